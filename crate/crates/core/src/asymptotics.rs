//! Scalar resonance law of the maximal geodesic and fits against scans.
//!
//! Along the unique longest geodesic `f` with reversal `f̄`, the bounce
//! `f → f̄ → f` dominates `det(I - M)` near the first string, which reduces
//! to `c · λ^{-(n-1)} · e^{2iλL0} = 1` with `c = C(f̄, f) C(f, f̄)`.
//! Taking logarithms gives the ladder
//!
//! ```text
//! 2iλL0 - (n-1) log λ + log c = 2πik,
//! Re λ ≈ C_Re + πk/L0,   Im λ ≈ -((n-1)/(2L0)) log Re λ + C_Im.
//! ```

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::geometry::{length_scales, ConeSurfaceSpec, LengthScales};
use crate::monodromy::{MonodromyError, MonodromyModel};
use crate::resonances::{band_winding, default_grid, Band, BandWinding, GridSeed, ResonanceError, ResonanceSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("product of diffraction coefficients along the maximal geodesic vanishes")]
    VanishingProduct,
    #[error("no unique maximal geodesic: {0}")]
    NoUniqueMaximal(String),
    #[error("invalid ladder parameters: {0}")]
    Parameters(&'static str),
    #[error("ladder index {k}: start point has Re λ = {re} ≤ 1")]
    IndexOutOfRange { k: i64, re: f64 },
    #[error("ladder index {k}: Newton stalled at |g| = {residual:e}")]
    Newton { k: i64, residual: f64 },
    #[error("need at least {need} resonances with Re λ ≥ {min_re}, got {got}")]
    InsufficientData { got: usize, need: usize, min_re: f64 },
    #[error(transparent)]
    Resonance(#[from] ResonanceError),
    #[error(transparent)]
    Model(#[from] MonodromyError),
    #[error("{0}")]
    Geometry(String),
}

pub const MIN_FIT_POINTS: usize = 10;
const LADDER_MAX_ITER: usize = 100;
const LADDER_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderModel {
    pub n: usize,
    pub l0: f64,
    pub c_prod: Complex64,
    /// `-Im log c / (2 L0)` reduced into `[0, π/L0)`.
    pub c_re: f64,
    /// `Re log c / (2 L0)`.
    pub c_im: f64,
    /// Branch of `log c` under which index `k` sits near `C_Re + πk/L0`.
    log_c: Complex64,
}

impl LadderModel {
    pub fn new(n: usize, l0: f64, c_prod: Complex64) -> Result<Self, AsymptoticsError> {
        if n < 1 {
            return Err(AsymptoticsError::Parameters("dimension must be at least 1"));
        }
        if !(l0 > 0.0 && l0.is_finite()) {
            return Err(AsymptoticsError::Parameters("L0 must be positive"));
        }
        if c_prod.norm() == 0.0 || !c_prod.norm().is_finite() {
            return Err(AsymptoticsError::VanishingProduct);
        }
        let log_principal = c_prod.ln();
        let spacing = PI / l0;
        let unreduced = -log_principal.im / (2.0 * l0);
        let c_re = unreduced.rem_euclid(spacing);
        // Landing exactly on the period after rounding.
        let c_re = if c_re >= spacing { 0.0 } else { c_re };
        let j = ((unreduced - c_re) / spacing).round();
        Ok(Self {
            n,
            l0,
            c_prod,
            c_re,
            c_im: log_principal.re / (2.0 * l0),
            log_c: log_principal + Complex64::new(0.0, TAU * j),
        })
    }

    /// Ladder of the unique maximal geodesic of a surface.
    pub fn from_model(spec: &ConeSurfaceSpec, model: &MonodromyModel, tol: &Tolerances) -> Result<Self, AsymptoticsError> {
        let scales = length_scales(spec, tol).map_err(|e| AsymptoticsError::Geometry(e.to_string()))?;
        let (f, fbar) = maximal_pair(spec, &scales)?;
        let c = model.coefficient(&fbar, &f)? * model.coefficient(&f, &fbar)?;
        Self::new(spec.dimension(), scales.l0, c)
    }

    pub fn from_spec(spec: &ConeSurfaceSpec, tol: &Tolerances) -> Result<Self, AsymptoticsError> {
        let model = MonodromyModel::new(spec, tol)?;
        Self::from_model(spec, &model, tol)
    }

    pub fn spacing(&self) -> f64 {
        PI / self.l0
    }

    pub fn nu0(&self) -> f64 {
        (self.n as f64 - 1.0) / (2.0 * self.l0)
    }

    /// Slope of `Im λ` against `log Re λ`.
    pub fn slope(&self) -> f64 {
        -self.nu0()
    }

    pub fn predicted_im(&self, re: f64) -> f64 {
        self.slope() * re.ln() + self.c_im
    }

    /// `g(λ) = 2iλL0 - (n-1) log λ + log c - 2πik` and `g'(λ)`.
    pub fn ladder_equation(&self, lambda: Complex64, k: i64) -> (Complex64, Complex64) {
        let m = self.n as f64 - 1.0;
        let i = Complex64::i();
        let g = 2.0 * i * lambda * self.l0 - m * lambda.ln() + self.log_c - Complex64::new(0.0, TAU * k as f64);
        let dg = 2.0 * i * self.l0 - m / lambda;
        (g, dg)
    }

    /// Root of the ladder equation with index `k`.
    pub fn ladder_root(&self, k: i64) -> Result<Complex64, AsymptoticsError> {
        let re0 = self.c_re + PI * k as f64 / self.l0;
        if !(re0 > 1.0) {
            return Err(AsymptoticsError::IndexOutOfRange { k, re: re0 });
        }
        let mut z = Complex64::new(re0, -self.nu0() * re0.ln());
        // |g| < 10⁻¹² relative to the size of its terms; an absolute bound is
        // below rounding once 2πk is large.
        let converged = |g: Complex64, z: Complex64| g.norm() < LADDER_TOL * (1.0 + 2.0 * self.l0 * z.norm());
        let mut residual = f64::INFINITY;
        for _ in 0..LADDER_MAX_ITER {
            let (g, dg) = self.ladder_equation(z, k);
            residual = g.norm();
            if converged(g, z) {
                return Ok(z);
            }
            z -= g / dg;
        }
        Err(AsymptoticsError::Newton { k, residual })
    }

    /// Roots for `k_lo ..= k_hi`, each paired with its index.
    pub fn predicted_ladder(&self, k_lo: i64, k_hi: i64) -> Result<Vec<(i64, Complex64)>, AsymptoticsError> {
        if k_lo > k_hi {
            return Err(AsymptoticsError::Parameters("k_lo must not exceed k_hi"));
        }
        (k_lo..=k_hi).map(|k| Ok((k, self.ladder_root(k)?))).collect()
    }

    /// Ladder roots lying in `re_lo ≤ Re λ ≤ re_hi`, `nu_lo ≤ ν ≤ nu_hi`.
    pub fn ladder_in_window(&self, re_lo: f64, re_hi: f64, nu_lo: f64, nu_hi: f64) -> Result<Vec<Complex64>, AsymptoticsError> {
        let s = self.spacing();
        let k_lo = (((re_lo - self.c_re) / s).floor() as i64 - 1).max(self.first_index());
        let k_hi = ((re_hi - self.c_re) / s).ceil() as i64 + 1;
        if k_hi < k_lo {
            return Ok(Vec::new());
        }
        Ok(self
            .predicted_ladder(k_lo, k_hi)?
            .into_iter()
            .map(|(_, z)| z)
            .filter(|z| {
                let nu = -z.im / z.re.ln();
                z.re >= re_lo && z.re <= re_hi && nu >= nu_lo && nu <= nu_hi
            })
            .collect())
    }

    /// Smallest index whose starting point has `Re λ > 1`.
    fn first_index(&self) -> i64 {
        ((1.0 - self.c_re) / self.spacing()).floor() as i64 + 1
    }
}

fn maximal_pair(spec: &ConeSurfaceSpec, scales: &LengthScales) -> Result<(String, String), AsymptoticsError> {
    match scales.maximal_edges.as_slice() {
        [a, b] => {
            let ai = spec.edge_index(a).expect("edge from length scales");
            let bi = spec.edge_index(b).expect("edge from length scales");
            if spec.reversal(ai) == bi {
                Ok((a.clone(), b.clone()))
            } else {
                Err(AsymptoticsError::NoUniqueMaximal(format!("`{a}` and `{b}` are not reversals of each other")))
            }
        }
        other => Err(AsymptoticsError::NoUniqueMaximal(format!(
            "{} directed edges attain L0 = {}",
            other.len(),
            scales.l0
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub count: usize,
    pub slope: f64,
    pub slope_expected: f64,
    /// Empirical `C_Im`.
    pub intercept: f64,
    pub spacing_mean: f64,
    pub spacing_expected: f64,
    /// Circular mean of `Re λ mod π/L0`.
    pub c_re_empirical: f64,
    pub residual_rms: f64,
    /// Ladder indices of the first and last fitted point.
    pub k_range: (i64, i64),
    /// Decay exponent of the coset deviation, from a log-log fit.
    pub tail_exponent: Option<f64>,
}

/// Least-squares line `y = a + b x`; returns `(b, a, rms)`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / n).sqrt();
    (b, a, rms)
}

/// Circular mean of `x mod period`, in `[0, period)`.
pub fn circular_mean(xs: &[f64], period: f64) -> f64 {
    let s: Complex64 = xs.iter().map(|x| Complex64::from_polar(1.0, TAU * x / period)).sum();
    let m = (s.arg() / TAU * period).rem_euclid(period);
    if period - m < 1e-12 * period {
        0.0
    } else {
        m
    }
}

/// Signed distance of each `x` to the coset `c + period·ℤ`.
pub fn coset_deviations(xs: &[f64], c: f64, period: f64) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let t = (x - c) / period;
            (t - t.round()) * period
        })
        .collect()
}

/// Fit `Im λ` against `log Re λ` over points with `Re λ ≥ min_re`.
pub fn fit_log_curve(points: &[Complex64], n: usize, l0: f64, min_re: f64) -> Result<FitReport, AsymptoticsError> {
    let mut pts: Vec<Complex64> = points.iter().copied().filter(|z| z.re >= min_re).collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(AsymptoticsError::InsufficientData {
            got: pts.len(),
            need: MIN_FIT_POINTS,
            min_re,
        });
    }
    if !(l0 > 0.0) || n < 1 {
        return Err(AsymptoticsError::Parameters("need n ≥ 1 and L0 > 0"));
    }
    pts.sort_by(|a, b| a.re.total_cmp(&b.re));
    let xs: Vec<f64> = pts.iter().map(|z| z.re.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|z| z.im).collect();
    let (slope, intercept, residual_rms) = least_squares(&xs, &ys);
    let res: Vec<f64> = pts.iter().map(|z| z.re).collect();
    let spacing_mean = (res[res.len() - 1] - res[0]) / (res.len() - 1) as f64;
    let spacing = PI / l0;
    let c_re = circular_mean(&res, spacing);
    let k_of = |re: f64| ((re - c_re) / spacing).round() as i64;

    let devs = coset_deviations(&res, c_re, spacing);
    let (lx, ly): (Vec<f64>, Vec<f64>) = res
        .iter()
        .zip(&devs)
        .filter(|(_, d)| d.abs() > 0.0)
        .map(|(r, d)| (r.ln(), d.abs().ln()))
        .unzip();
    let tail_exponent = (lx.len() >= MIN_FIT_POINTS).then(|| -least_squares(&lx, &ly).0);

    Ok(FitReport {
        count: pts.len(),
        slope,
        slope_expected: -(n as f64 - 1.0) / (2.0 * l0),
        intercept,
        spacing_mean,
        spacing_expected: spacing,
        c_re_empirical: c_re,
        residual_rms,
        k_range: (k_of(res[0]), k_of(res[res.len() - 1])),
        tail_exponent: tail_exponent.filter(|t| t.is_finite()),
    })
}

/// Points within `halfwidth` in ν of the predicted first string.
pub fn first_string(points: &[Complex64], ladder: &LadderModel, halfwidth: f64) -> Vec<Complex64> {
    points
        .iter()
        .copied()
        .filter(|z| z.re > 1.0 && (z.im - ladder.predicted_im(z.re)).abs() <= halfwidth * z.re.ln())
        .collect()
}

/// Fit the first string of a scan; deeper strings are left out.
pub fn fit_resonances(rs: &ResonanceSet, ladder: &LadderModel, tol: &Tolerances) -> Result<FitReport, AsymptoticsError> {
    let pts = first_string(&rs.lambdas(), ladder, tol.string_halfwidth);
    fit_log_curve(&pts, ladder.n, ladder.l0, tol.fit_min_re)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub nu_lo: f64,
    pub nu_hi: f64,
    /// Added to `-ν log Re λ` on both boundary curves.
    pub im_shift: f64,
    /// `None` when the band is empty.
    pub winding: Option<i64>,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    pub l0: f64,
    pub lprime: Option<f64>,
    /// Gap edge `Λ`.
    pub gap_edge: f64,
    pub nu0: f64,
    pub delta: f64,
    pub re_window: (f64, f64),
    pub epsilon_prime: f64,
    /// `ν ∈ [ν0 + δ, Λ - δ]`; expected winding 0 once `Re λ` is large.
    pub gap_band: BandReport,
    /// The same band moved by `C_Im`, so that it keeps a distance
    /// `δ log Re λ` below the predicted string at every `Re λ`.
    pub shifted_gap_band: BandReport,
    /// `ν ∈ [ν0 - δ, ν0 + δ]` around the predicted string.
    pub string_band: BandReport,
    pub string_expected: f64,
}

impl GapReport {
    pub fn gap_is_empty_of_zeros(&self) -> bool {
        self.gap_band.winding.unwrap_or(0) == 0
    }
}

/// `min{(n-1) - 2L'(Λ-ε), (n-1) + 1/2 - 2L0(Λ-ε)}`; the first term is
/// dropped when there is no `L'`.
pub fn epsilon_prime(n: usize, scales: &LengthScales, eps: f64) -> f64 {
    let m = n as f64 - 1.0;
    let second = m + 0.5 - 2.0 * scales.l0 * (scales.lambda - eps);
    match scales.lprime {
        Some(lp) => (m - 2.0 * lp * (scales.lambda - eps)).min(second),
        None => second,
    }
}

/// Windings of the gap band and of the band around the first string.
///
/// The string band follows the predicted curve `-ν0 log Re λ + C_Im`,
/// since at moderate `Re λ` the offset `C_Im` moves the string well away
/// from `ν = ν0`. Without a ladder (vanishing product) the shift is 0.
pub fn gap_report(spec: &ConeSurfaceSpec, re_window: (f64, f64), delta: f64, tol: &Tolerances) -> Result<GapReport, AsymptoticsError> {
    if !(delta > 0.0) {
        return Err(AsymptoticsError::Parameters("delta must be positive"));
    }
    let scales = length_scales(spec, tol).map_err(|e| AsymptoticsError::Geometry(e.to_string()))?;
    let model = MonodromyModel::new(spec, tol)?;
    let n = spec.dimension();
    let nu0 = (n as f64 - 1.0) / (2.0 * scales.l0);
    let grid: GridSeed = default_grid(spec, &model, tol);
    let ladder = LadderModel::from_model(spec, &model, tol).ok();

    let run = |nu_lo: f64, nu_hi: f64, im_shift: f64| -> Result<BandReport, AsymptoticsError> {
        if nu_hi <= nu_lo {
            return Ok(BandReport {
                nu_lo,
                nu_hi,
                im_shift,
                winding: None,
                evaluations: 0,
            });
        }
        let band = Band {
            re_lo: re_window.0,
            re_hi: re_window.1,
            nu_lo,
            nu_hi,
            im_shift,
        };
        let w: BandWinding = band_winding(&model, &band, grid, tol)?;
        Ok(BandReport {
            nu_lo,
            nu_hi,
            im_shift,
            winding: Some(w.outer),
            evaluations: w.evaluations,
        })
    };

    let shift = ladder.map_or(0.0, |l| l.c_im);
    let gap_band = run(nu0 + delta, scales.lambda - delta, 0.0)?;
    let shifted_gap_band = if shift == 0.0 {
        gap_band.clone()
    } else {
        run(nu0 + delta, scales.lambda - delta, shift)?
    };
    let string_band = run(nu0 - delta, nu0 + delta, shift)?;
    let string_expected = if ladder.is_some() {
        (re_window.1 - re_window.0) * scales.l0 / PI
    } else {
        0.0
    };
    Ok(GapReport {
        n,
        l0: scales.l0,
        lprime: scales.lprime,
        gap_edge: scales.lambda,
        nu0,
        delta,
        re_window,
        epsilon_prime: epsilon_prime(n, &scales, delta),
        gap_band,
        shifted_gap_band,
        string_band,
        string_expected,
    })
}
