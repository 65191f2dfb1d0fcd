//! Centralized numerical tolerances.
//!
//! Every threshold used by the scanner, the fit and the verification gates
//! lives here so that a run can be reproduced from one record. The CLI
//! reads optional overrides from the JSON file named by
//! [`TOLERANCE_ENV_VAR`]; any field left out keeps its default.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable naming a JSON tolerance override file.
pub const TOLERANCE_ENV_VAR: &str = "CONERES_TOL_OVERRIDES";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read tolerance file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed tolerance file {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("tolerance `{0}` must be positive and finite")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Distance of a cotangent argument from a multiple of π below which
    /// the diffraction kernel is treated as singular.
    pub diffraction_guard: f64,
    /// Link-angle tolerance for the π-relation hypothesis check.
    pub pi_relation_tol: f64,
    /// Relative tolerance for treating two lengths as tied.
    pub length_tie_rtol: f64,
    /// Largest accepted phase increment during contour continuation.
    pub max_phase_step: f64,
    /// Reject a winding number whose distance to an integer exceeds this.
    pub winding_frac_reject: f64,
    /// Smallest contour step; a zero closer than this to a cell edge is
    /// reported as lying on the boundary.
    pub boundary_guard: f64,
    /// Newton stops once `|f| < newton_tol * (1 + |f'|)`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Cells with winding above one are not split below this diameter.
    pub min_cell_diameter: f64,
    /// Newton tolerance for the scalar ladder equation.
    pub ladder_tol: f64,
    /// Largest `|det(I - M)|` at which a null vector is extracted.
    pub null_residual: f64,
    /// Resonances with smaller real part are left out of the log-curve fit.
    pub fit_min_re: f64,
    /// The fit keeps resonances within this distance in ν of the predicted
    /// first string `-ν0 log Re λ + C_Im`.
    pub string_halfwidth: f64,
    /// Relative slope error accepted by `--verify`.
    pub slope_rel_tol: f64,
    /// Absolute spacing error accepted by `--verify`.
    pub spacing_tol: f64,
    /// Absolute error on `C_Re` and `C_Im` accepted by `--verify`.
    pub constants_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            diffraction_guard: 1e-8,
            pi_relation_tol: 1e-9,
            length_tie_rtol: 1e-9,
            max_phase_step: FRAC_PI_2,
            winding_frac_reject: 0.1,
            boundary_guard: 1e-9,
            newton_tol: 1e-10,
            newton_max_iter: 50,
            min_cell_diameter: 1e-6,
            ladder_tol: 1e-12,
            null_residual: 1e-6,
            fit_min_re: 50.0,
            string_halfwidth: 0.02,
            slope_rel_tol: 0.02,
            spacing_tol: 1e-3,
            constants_tol: 5e-2,
        }
    }
}

impl Tolerances {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let tol = Self::from_json(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        tol.validate()?;
        Ok(tol)
    }

    /// Defaults, overridden by the file named in `CONERES_TOL_OVERRIDES`
    /// when that variable is set and non-empty.
    pub fn from_env() -> Result<Self, ConfigError> {
        match std::env::var_os(TOLERANCE_ENV_VAR) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks: [(&'static str, f64); 15] = [
            ("diffraction_guard", self.diffraction_guard),
            ("pi_relation_tol", self.pi_relation_tol),
            ("length_tie_rtol", self.length_tie_rtol),
            ("max_phase_step", self.max_phase_step),
            ("winding_frac_reject", self.winding_frac_reject),
            ("boundary_guard", self.boundary_guard),
            ("newton_tol", self.newton_tol),
            ("min_cell_diameter", self.min_cell_diameter),
            ("ladder_tol", self.ladder_tol),
            ("string_halfwidth", self.string_halfwidth),
            ("null_residual", self.null_residual),
            ("fit_min_re", self.fit_min_re),
            ("slope_rel_tol", self.slope_rel_tol),
            ("spacing_tol", self.spacing_tol),
            ("constants_tol", self.constants_tol),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::NonPositive(name));
            }
        }
        if self.newton_max_iter == 0 {
            return Err(ConfigError::NonPositive("newton_max_iter"));
        }
        Ok(())
    }
}
