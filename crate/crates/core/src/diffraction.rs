//! Cone-point diffraction coefficient.
//!
//! For a flat two-dimensional cone of total angle `A` the link is a circle
//! of circumference `A`, whose Fourier modes `e^{iβkθ}` (`β = 2π/A`) are the
//! eigenfunctions of the link Laplacian with `√μ_k = β|k|`. The kernel of
//! `e^{-iπ√Δ}` is then the mode sum
//!
//! ```text
//! D_A(Δθ) = (1/A) Σ_k e^{-iπβ|k|} e^{iβkΔθ}
//! ```
//!
//! which does not converge but is Abel summable. Summing the two geometric
//! series gives the closed form
//!
//! ```text
//! D_A(Δθ) = (i/2A) [cot(β(Δθ-π)/2) - cot(β(Δθ+π)/2)]
//!         = (i/2A) sin(βπ) / (sin(β(Δθ-π)/2) sin(β(Δθ+π)/2))
//! ```
//!
//! evaluated here in the second form, which vanishes exactly for `A = 2π`
//! and is exactly even in `Δθ`. The kernel blows up on the geometric
//! directions `Δθ ≡ ±π (mod A)`.
//!
//! Normalization: Jacobi factors, half-density weights and the universal
//! `(2πi)^{-1}` prefactor of the propagator are not part of `D`; flat cones
//! have unit Jacobi factors and the remaining constants are absorbed into
//! the transfer coefficient.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{distance_to_lattice, ConePoint};

pub const DEFAULT_SINGULAR_GUARD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffractionError {
    #[error("cone angle must be positive and finite, got {0}")]
    ConeAngle(f64),
    #[error("Δθ = {dtheta} is a geometric direction of the cone of angle {cone_angle}")]
    GeometricRaySingularity { cone_angle: f64, dtheta: f64 },
    #[error("the closed form needs dimension 2 (got {0})")]
    ClosedFormDimension(usize),
    #[error("spectral mode needs a cross-section spectrum")]
    MissingSpectrum,
    #[error("invalid series parameters: {0}")]
    SeriesParameters(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffractionMode {
    ClosedForm2d,
    SpectralSeries,
}

#[derive(Debug, Clone)]
pub struct DiffractionEvaluator {
    cone_angle: f64,
    mode: DiffractionMode,
    spectrum: Option<Vec<f64>>,
    dimension: usize,
    guard: f64,
}

impl DiffractionEvaluator {
    /// Flat two-dimensional cone of total angle `cone_angle`.
    pub fn flat(cone_angle: f64) -> Result<Self, DiffractionError> {
        if !(cone_angle.is_finite() && cone_angle > 0.0) {
            return Err(DiffractionError::ConeAngle(cone_angle));
        }
        Ok(Self {
            cone_angle,
            mode: DiffractionMode::ClosedForm2d,
            spectrum: None,
            dimension: 2,
            guard: DEFAULT_SINGULAR_GUARD,
        })
    }

    /// Abstract `n > 2` cone: the coefficient is the scalar mode sum over
    /// the supplied cross-section eigenvalues.
    pub fn spectral(cone_angle: f64, spectrum: Vec<f64>, dimension: usize) -> Result<Self, DiffractionError> {
        if !(cone_angle.is_finite() && cone_angle > 0.0) {
            return Err(DiffractionError::ConeAngle(cone_angle));
        }
        if spectrum.is_empty() {
            return Err(DiffractionError::MissingSpectrum);
        }
        Ok(Self {
            cone_angle,
            mode: DiffractionMode::SpectralSeries,
            spectrum: Some(spectrum),
            dimension,
            guard: DEFAULT_SINGULAR_GUARD,
        })
    }

    /// Evaluator appropriate for a cone point of a surface of the given dimension.
    pub fn for_cone_point(point: &ConePoint, dimension: usize) -> Result<Self, DiffractionError> {
        if dimension == 2 {
            Self::flat(point.cone_angle)
        } else {
            let spectrum = point.spectrum.clone().ok_or(DiffractionError::MissingSpectrum)?;
            Self::spectral(point.cone_angle, spectrum, dimension)
        }
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn cone_angle(&self) -> f64 {
        self.cone_angle
    }

    pub fn beta(&self) -> f64 {
        2.0 * PI / self.cone_angle
    }

    pub fn mode(&self) -> DiffractionMode {
        self.mode
    }

    pub fn dimension_shift(&self) -> f64 {
        let n = self.dimension as f64;
        (n - 2.0) * (n - 2.0) / 4.0
    }

    /// Whether `dtheta` is (within the guard) a geometric turning direction.
    pub fn is_geometric(&self, dtheta: f64) -> bool {
        if self.mode != DiffractionMode::ClosedForm2d {
            return false;
        }
        let a = self.cone_angle;
        distance_to_lattice(dtheta - PI, a) <= self.guard || distance_to_lattice(dtheta + PI, a) <= self.guard
    }

    /// Diffraction coefficient for a turn of `dtheta` in the link.
    pub fn coefficient(&self, dtheta: f64) -> Result<Complex64, DiffractionError> {
        match self.mode {
            DiffractionMode::ClosedForm2d => self.closed_form(dtheta),
            DiffractionMode::SpectralSeries => Ok(self.spectral_sum(usize::MAX, 1.0)),
        }
    }

    fn closed_form(&self, dtheta: f64) -> Result<Complex64, DiffractionError> {
        if self.dimension != 2 {
            return Err(DiffractionError::ClosedFormDimension(self.dimension));
        }
        let beta = self.beta();
        let minus = 0.5 * beta * (dtheta - PI);
        let plus = 0.5 * beta * (dtheta + PI);
        if distance_to_lattice(minus, PI) <= self.guard || distance_to_lattice(plus, PI) <= self.guard {
            return Err(DiffractionError::GeometricRaySingularity {
                cone_angle: self.cone_angle,
                dtheta,
            });
        }
        let numer = sin_pi(beta);
        let denom = minus.sin() * plus.sin();
        Ok(Complex64::new(0.0, numer / (2.0 * self.cone_angle * denom)))
    }

    fn spectral_sum(&self, k_max: usize, r: f64) -> Complex64 {
        let spectrum = self.spectrum.as_deref().unwrap_or(&[]);
        let shift = self.dimension_shift();
        let mut weight = 1.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for &mu in spectrum.iter().take(k_max.saturating_add(1)) {
            sum += weight * Complex64::from_polar(1.0, -PI * (mu + shift).sqrt());
            weight *= r;
        }
        sum / self.cone_angle
    }

    /// Abel-weighted partial sum of the mode expansion:
    /// `(1/A) Σ_{|k|≤K} r^{|k|} e^{-iπβ|k|} e^{iβkΔθ}`.
    ///
    /// The truncation error is of size `r^K / |1 - r e^{iβ(Δθ∓π)}|`, so
    /// `K (1 - r)` must be large for the partial sum to approach the Abel
    /// limit. In spectral mode `dtheta` is ignored and the first `K + 1`
    /// eigenvalues are summed with the same weights.
    pub fn series_oracle(&self, dtheta: f64, k_max: usize, r: f64) -> Result<Complex64, DiffractionError> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(DiffractionError::SeriesParameters("abel factor must lie in (0, 1]"));
        }
        if self.mode == DiffractionMode::SpectralSeries {
            return Ok(self.spectral_sum(k_max, r));
        }
        let beta = self.beta();
        // k ≥ 1 terms pair up as r^k (z_-^k + z_+^k) with z_± = e^{iβ(±Δθ-π)};
        // advance both by complex multiplication, renormalizing to unit
        // modulus periodically to stop drift.
        let step_minus = Complex64::from_polar(1.0, beta * (dtheta - PI));
        let step_plus = Complex64::from_polar(1.0, -beta * (dtheta + PI));
        let mut z_minus = Complex64::new(1.0, 0.0);
        let mut z_plus = Complex64::new(1.0, 0.0);
        let mut weight = 1.0;
        let mut tail = Complex64::new(0.0, 0.0);
        for k in 1..=k_max {
            z_minus *= step_minus;
            z_plus *= step_plus;
            weight *= r;
            if k % 4096 == 0 {
                z_minus = Complex64::from_polar(1.0, beta * (dtheta - PI) * k as f64);
                z_plus = Complex64::from_polar(1.0, -beta * (dtheta + PI) * k as f64);
            }
            tail += weight * (z_minus + z_plus);
        }
        Ok((Complex64::new(1.0, 0.0) + tail) / self.cone_angle)
    }
}

/// `sin(πx)`, exactly zero at integers.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    if r == 0.0 || r.abs() == 1.0 {
        0.0
    } else {
        (PI * r).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn flat_plane_does_not_diffract() {
        let ev = DiffractionEvaluator::flat(TAU).unwrap();
        for t in [-2.0, -0.3, 0.0, 0.7, 1.0, 2.9] {
            assert_eq!(ev.coefficient(t).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn backscatter_on_4pi_cone() {
        let ev = DiffractionEvaluator::flat(4.0 * PI).unwrap();
        let d = ev.coefficient(0.0).unwrap();
        assert_eq!(d.re, 0.0);
        assert!((d.im + 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((d.im + 0.079577).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_cotangent_form() {
        for &a in &[3.0 * PI, 4.0 * PI, 5.0, 7.3] {
            let ev = DiffractionEvaluator::flat(a).unwrap();
            let beta = 2.0 * PI / a;
            for &t in &[0.0, 0.4, -1.1, 2.0] {
                let cot = |x: f64| x.cos() / x.sin();
                let expect = (cot(beta * (t - PI) / 2.0) - cot(beta * (t + PI) / 2.0)) / (2.0 * a);
                let d = ev.coefficient(t).unwrap();
                assert!((d.im - expect).abs() <= 1e-14 * expect.abs().max(1e-3), "A={a} t={t}");
            }
        }
    }

    #[test]
    fn even_kernel_example() {
        let ev = DiffractionEvaluator::flat(3.0 * PI).unwrap();
        assert_eq!(ev.coefficient(0.5).unwrap(), ev.coefficient(-0.5).unwrap());
    }

    #[test]
    fn geometric_directions_are_singular() {
        let ev = DiffractionEvaluator::flat(3.0 * PI).unwrap();
        assert!(ev.is_geometric(PI));
        assert!(!ev.is_geometric(0.4));
        assert!(ev.is_geometric(PI + 1e-12));
        assert!(ev.is_geometric(-PI));
        assert!(ev.is_geometric(PI + 3.0 * PI));
        assert!(matches!(
            ev.coefficient(PI + 1e-12),
            Err(DiffractionError::GeometricRaySingularity { .. })
        ));
    }

    #[test]
    fn series_with_no_modes_is_inverse_angle() {
        let ev = DiffractionEvaluator::flat(5.0).unwrap();
        assert_eq!(ev.series_oracle(0.3, 0, 0.5).unwrap(), Complex64::new(1.0 / 5.0, 0.0));
    }

    #[test]
    fn converged_series_matches_closed_form() {
        // r^K = e^{-30}: the partial sum has reached its Abel value for this r.
        let (k, r) = (3_000_000, 1.0 - 1e-5);
        let ev = DiffractionEvaluator::flat(4.0 * PI).unwrap();
        let s = ev.series_oracle(0.0, k, r).unwrap();
        let c = ev.coefficient(0.0).unwrap();
        assert!((s - c).norm() / c.norm() < 1e-3);

        let flat = DiffractionEvaluator::flat(TAU).unwrap();
        assert!(flat.series_oracle(1.0, k, r).unwrap().norm() < 1e-3);
    }

    #[test]
    fn short_partial_sum_keeps_its_tail() {
        // With K (1 - r) = 1 the dropped tail is r^{K+1} z^{K+1} / (1 - r z)
        // for each of the two series; adding it back recovers the closed form.
        let (k, r) = (100_000usize, 1.0 - 1e-5);
        let a = 4.0 * PI;
        let ev = DiffractionEvaluator::flat(a).unwrap();
        let s = ev.series_oracle(0.0, k, r).unwrap();
        let beta = 2.0 * PI / a;
        let z = Complex64::from_polar(1.0, -beta * PI);
        let rz = r * z;
        let tail = 2.0 * rz.powu(k as u32 + 1) / (1.0 - rz) / a;
        let abel = (Complex64::new(1.0, 0.0) + 2.0 * rz / (1.0 - rz)) / a;
        assert!((s + tail - abel).norm() < 1e-9);
        let c = ev.coefficient(0.0).unwrap();
        assert!((abel - c).norm() / c.norm() < 1e-4);
        assert!((s - c).norm() / c.norm() > 0.1);
    }

    #[test]
    fn spectral_mode_sums_supplied_modes() {
        let ev = DiffractionEvaluator::spectral(2.0, vec![0.0, 3.0], 3).unwrap();
        let shift: f64 = 0.25;
        let expect = (Complex64::from_polar(1.0, -PI * shift.sqrt()) + Complex64::from_polar(1.0, -PI * (3.25f64).sqrt())) / 2.0;
        assert!((ev.coefficient(0.1).unwrap() - expect).norm() < 1e-15);
        assert!(!ev.is_geometric(PI));
        let truncated = ev.series_oracle(0.0, 0, 0.5).unwrap();
        assert!((truncated - Complex64::from_polar(0.5, -PI * 0.5)).norm() < 1e-15);
    }

    #[test]
    fn pole_rate_is_inverse_distance() {
        let ev = DiffractionEvaluator::flat(3.0 * PI).unwrap();
        let offsets: Vec<f64> = (0..6).map(|j| 1e-2 * 0.5f64.powi(j)).collect();
        let pts: Vec<(f64, f64)> = offsets
            .iter()
            .map(|&d| (d.ln(), ev.coefficient(PI - d).unwrap().norm().ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 1.0).abs() < 1e-2, "slope {slope}");
    }

    #[test]
    fn rejects_bad_angles() {
        assert!(DiffractionEvaluator::flat(0.0).is_err());
        assert!(DiffractionEvaluator::flat(f64::NAN).is_err());
    }

    fn regular(a: f64, t: f64) -> bool {
        distance_to_lattice(t - PI, a) > 1e-3 && distance_to_lattice(t + PI, a) > 1e-3
    }

    proptest! {
        #[test]
        fn evenness_is_exact(a in 0.5f64..20.0, t in -10.0f64..10.0) {
            prop_assume!(regular(a, t));
            let ev = DiffractionEvaluator::flat(a).unwrap();
            prop_assert_eq!(ev.coefficient(t).unwrap(), ev.coefficient(-t).unwrap());
        }

        #[test]
        fn periodic_in_cone_angle(a in 0.5f64..20.0, t in -10.0f64..10.0) {
            prop_assume!(regular(a, t));
            let ev = DiffractionEvaluator::flat(a).unwrap();
            let d0 = ev.coefficient(t).unwrap();
            let d1 = ev.coefficient(t + a).unwrap();
            prop_assert!((d0 - d1).norm() <= 1e-9 * d0.norm().max(1.0));
        }

        #[test]
        fn plane_is_null(t in -10.0f64..10.0) {
            prop_assume!(regular(TAU, t));
            let ev = DiffractionEvaluator::flat(TAU).unwrap();
            prop_assert_eq!(ev.coefficient(t).unwrap(), Complex64::new(0.0, 0.0));
        }
    }
}
