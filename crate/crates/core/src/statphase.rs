//! Oscillatory integrals `I_h = ∫ e^{iφ(x) w/h} a(x) dx` with a quadratic
//! phase `φ(x) = ½⟨Qx, x⟩` and a complex large parameter `w/h`.
//!
//! The expansion
//!
//! ```text
//! I_h ≈ (2πh/w)^{n/2} e^{iπ sgn Q / 4} |det Q|^{-1/2}
//!       Σ_{k<N} (1/k!) (h/w)^k (⟨Q⁻¹D, D⟩ / 2i)^k a(0),    D = -i∂,
//! ```
//!
//! is evaluated exactly on polynomial amplitudes; the operator reduces to
//! `L = (i/2) Σ_{jl} (Q⁻¹)_{jl} ∂_j ∂_l`. Amplitudes are a polynomial times
//! one fixed bump (`≡ 1` for `|x - c| ≤ R/2`, zero for `|x - c| ≥ R`), so
//! only the polynomial contributes to jets at the origin. The direct
//! integral is computed by panelled adaptive Gauss–Kronrod quadrature.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative eigenvalue threshold below which `Q` counts as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-8;
/// Smallest `h` the quadrature oracle accepts.
pub const MIN_ORACLE_H: f64 = 1e-4;
/// Default cap on integrand evaluations per oracle call.
pub const DEFAULT_BUDGET: u64 = 400_000_000;
/// Errors below this multiple of the oracle tolerance count as noise.
pub const FLOOR_FACTOR: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatPhaseError {
    #[error("quadratic form is singular (smallest |eigenvalue| {min_eig:e}, largest {max_eig:e})")]
    SingularPhase { min_eig: f64, max_eig: f64 },
    #[error("quadratic form must be square, symmetric and of dimension 1..=3")]
    BadForm,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
    #[error("the cutoff is not identically 1 near the critical point")]
    JetUnavailable,
    #[error("quadrature oracle supports n ≤ 2, got n = {0}")]
    OracleDimension(usize),
    #[error("h = {0} is below the oracle floor {MIN_ORACLE_H}")]
    StepTooSmall(f64),
    #[error("quadrature budget of {0} evaluations exceeded")]
    Budget(u64),
    #[error("h grid must be geometric with at least 5 points")]
    Grid,
}

/// Polynomial in `n` real variables with complex coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self::zero(n).with_term(vec![0; n], c)
    }

    /// Build from `(exponents, coefficient)` pairs; repeated monomials add up.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self, StatPhaseError>
    where
        I: IntoIterator<Item = (Vec<u32>, Complex64)>,
    {
        let mut p = Self::zero(n);
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(StatPhaseError::Dimension {
                    expected: n,
                    got: alpha.len(),
                });
            }
            p = p.with_term(alpha, c);
        }
        Ok(p)
    }

    /// One-variable polynomial from real coefficients `c_0 + c_1 x + ...`.
    pub fn univariate(coeffs: &[f64]) -> Self {
        coeffs
            .iter()
            .enumerate()
            .fold(Self::zero(1), |p, (k, &c)| p.with_term(vec![k as u32], Complex64::new(c, 0.0)))
    }

    fn with_term(mut self, alpha: Vec<u32>, c: Complex64) -> Self {
        let entry = self.terms.entry(alpha).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            self.terms.retain(|_, v| *v != ZERO);
        }
        self
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, alpha: &[u32]) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or(ZERO)
    }

    pub fn value_at_zero(&self) -> Complex64 {
        self.coefficient(&vec![0; self.n])
    }

    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (alpha, &c) in &self.terms {
            if alpha[j] > 0 {
                let mut beta = alpha.clone();
                beta[j] -= 1;
                out = out.with_term(beta, c * alpha[j] as f64);
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (alpha, &c) in &self.terms {
            out = out.with_term(alpha.clone(), c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (alpha, &c) in &other.terms {
            out = out.with_term(alpha.clone(), c);
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c = c.conj());
        out
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(alpha, c)| c * alpha.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product::<f64>())
            .sum()
    }
}

/// Symmetric nonsingular `Q` with its signature, `|det Q|` and inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticPhase {
    q: Vec<Vec<f64>>,
    inverse: Vec<Vec<f64>>,
    pub signature: i32,
    pub det_abs: f64,
}

impl QuadraticPhase {
    pub fn new(q: Vec<Vec<f64>>) -> Result<Self, StatPhaseError> {
        let n = q.len();
        if n == 0 || n > 3 || q.iter().any(|r| r.len() != n) || q.iter().flatten().any(|x| !x.is_finite()) {
            return Err(StatPhaseError::BadForm);
        }
        for i in 0..n {
            for j in 0..i {
                if (q[i][j] - q[j][i]).abs() > 1e-12 * (q[i][j].abs() + q[j][i].abs()).max(1.0) {
                    return Err(StatPhaseError::BadForm);
                }
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
        let eig = SymmetricEigen::new(m.clone()).eigenvalues;
        let max_eig = eig.iter().fold(0.0f64, |a, e| a.max(e.abs()));
        let min_eig = eig.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
        if !(min_eig > SINGULAR_THRESHOLD * max_eig.max(1.0)) {
            return Err(StatPhaseError::SingularPhase { min_eig, max_eig });
        }
        let signature = eig.iter().map(|e| if *e > 0.0 { 1 } else { -1 }).sum();
        let det_abs = eig.iter().map(|e| e.abs()).product();
        let inv = m.try_inverse().ok_or(StatPhaseError::SingularPhase { min_eig, max_eig })?;
        let inverse = (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect();
        Ok(Self {
            q,
            inverse,
            signature,
            det_abs,
        })
    }

    pub fn scalar(q: f64) -> Result<Self, StatPhaseError> {
        Self::new(vec![vec![q]])
    }

    pub fn identity(n: usize) -> Result<Self, StatPhaseError> {
        Self::new((0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn dimension(&self) -> usize {
        self.q.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn negated(&self) -> Self {
        Self::new(self.q.iter().map(|r| r.iter().map(|x| -x).collect()).collect()).expect("negation keeps Q nonsingular")
    }

    /// `φ(x) = ½⟨Qx, x⟩`.
    pub fn value(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.q.iter().enumerate() {
            for (j, q) in row.iter().enumerate() {
                s += q * x[i] * x[j];
            }
        }
        0.5 * s
    }

    /// `L p = (i/2) Σ (Q⁻¹)_{jl} ∂_j ∂_l p`.
    pub fn apply_operator(&self, p: &Polynomial) -> Polynomial {
        let n = self.dimension();
        let mut out = Polynomial::zero(n);
        for j in 0..n {
            let dj = p.derivative(j);
            for l in 0..n {
                let c = self.inverse[j][l];
                if c != 0.0 {
                    out = out.add(&dj.derivative(l).scale(Complex64::new(0.0, 0.5 * c)));
                }
            }
        }
        out
    }
}

/// `χ(x) = g(s) / (g(s) + g(1 - s))` with `s = (R - |x - c|) / (R/2)`,
/// `g(s) = e^{-1/s}` for `s > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpCutoff {
    pub radius: f64,
    pub center: Vec<f64>,
}

fn smooth_step_part(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl BumpCutoff {
    pub fn centered(n: usize, radius: f64) -> Self {
        Self {
            radius,
            center: vec![0.0; n],
        }
    }

    fn distance(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let s = (self.radius - self.distance(x)) / (0.5 * self.radius);
        if s >= 1.0 {
            return 1.0;
        }
        let a = smooth_step_part(s);
        if a == 0.0 {
            return 0.0;
        }
        a / (a + smooth_step_part(1.0 - s))
    }

    /// Whether `χ ≡ 1` on a neighbourhood of the origin.
    pub fn is_flat_at_origin(&self) -> bool {
        self.distance(&vec![0.0; self.center.len()]) < 0.5 * self.radius
    }

    /// Whether the origin lies outside the support.
    pub fn vanishes_at_origin(&self) -> bool {
        self.distance(&vec![0.0; self.center.len()]) >= self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatPhaseProblem {
    pub amplitude: Polynomial,
    pub cutoff: BumpCutoff,
    pub phase: QuadraticPhase,
    pub w: Complex64,
    pub h: f64,
}

impl StatPhaseProblem {
    pub fn new(amplitude: Polynomial, cutoff: BumpCutoff, phase: QuadraticPhase, w: Complex64, h: f64) -> Result<Self, StatPhaseError> {
        let n = phase.dimension();
        for got in [amplitude.dimension(), cutoff.center.len()] {
            if got != n {
                return Err(StatPhaseError::Dimension { expected: n, got });
            }
        }
        if !(h > 0.0 && h < 1.0) {
            return Err(StatPhaseError::Parameter("h must lie in (0, 1)"));
        }
        if !(w.re > 0.0 && w.im <= 0.0 && w.im.is_finite() && w.re.is_finite()) {
            return Err(StatPhaseError::Parameter("w needs Re w > 0 and Im w ≤ 0"));
        }
        if !(cutoff.radius > 0.0 && cutoff.radius.is_finite()) {
            return Err(StatPhaseError::Parameter("cutoff radius must be positive"));
        }
        Ok(Self {
            amplitude,
            cutoff,
            phase,
            w,
            h,
        })
    }

    pub fn dimension(&self) -> usize {
        self.phase.dimension()
    }

    pub fn with_h(&self, h: f64) -> Result<Self, StatPhaseError> {
        Self::new(self.amplitude.clone(), self.cutoff.clone(), self.phase.clone(), self.w, h)
    }

    pub fn with_w(&self, w: Complex64) -> Result<Self, StatPhaseError> {
        Self::new(self.amplitude.clone(), self.cutoff.clone(), self.phase.clone(), w, self.h)
    }

    /// Whether `w` lies in `{Re w ∈ [1-ε, 1+ε], (-Λ+ε) h log(1/h) < Im w ≤ 0}`.
    pub fn w_in_region(&self, eps: f64, gap_edge: f64) -> bool {
        (self.w.re - 1.0).abs() <= eps && self.w.im <= 0.0 && self.w.im > (-gap_edge + eps) * self.h * (1.0 / self.h).ln()
    }

    fn integrand(&self, x: &[f64]) -> Complex64 {
        let chi = self.cutoff.value(x);
        if chi == 0.0 {
            return ZERO;
        }
        let arg = Complex64::i() * self.w * (self.phase.value(x) / self.h);
        self.amplitude.eval(x) * chi * arg.exp()
    }
}

/// Terms `k = 0..N` of the expansion, prefactor included.
pub fn expansion_terms(p: &StatPhaseProblem, order: usize) -> Result<Vec<Complex64>, StatPhaseError> {
    if order < 1 {
        return Err(StatPhaseError::Parameter("expansion order must be at least 1"));
    }
    if p.cutoff.vanishes_at_origin() {
        return Ok(vec![ZERO; order]);
    }
    if !p.cutoff.is_flat_at_origin() {
        return Err(StatPhaseError::JetUnavailable);
    }
    let n = p.dimension() as f64;
    let ratio = Complex64::new(p.h, 0.0) / p.w;
    let prefactor = (2.0 * PI * ratio).powf(0.5 * n) * Complex64::from_polar(1.0, 0.25 * PI * p.phase.signature as f64)
        / p.phase.det_abs.sqrt();
    let mut terms = Vec::with_capacity(order);
    let mut jet = p.amplitude.clone();
    let mut factorial = 1.0;
    let mut power = Complex64::new(1.0, 0.0);
    for k in 0..order {
        if k > 0 {
            jet = p.phase.apply_operator(&jet);
            factorial *= k as f64;
            power *= ratio;
        }
        terms.push(prefactor * power / factorial * jet.value_at_zero());
    }
    Ok(terms)
}

/// Truncated expansion with `N` terms.
pub fn quadratic_expansion(p: &StatPhaseProblem, order: usize) -> Result<Complex64, StatPhaseError> {
    Ok(expansion_terms(p, order)?.into_iter().sum())
}

// Gauss–Kronrod 7–15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Budget {
    used: AtomicU64,
    limit: u64,
}

impl Budget {
    fn spend(&self, k: u64) -> Result<(), StatPhaseError> {
        if self.used.fetch_add(k, Ordering::Relaxed) + k > self.limit {
            Err(StatPhaseError::Budget(self.limit))
        } else {
            Ok(())
        }
    }
}

fn gk15<F: FnMut(f64) -> Result<Complex64, StatPhaseError>>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64), StatPhaseError> {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = r * XGK[j];
        let s = f(c - x)? + f(c + x)?;
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    Ok((kron * r, ((kron - gauss) * r).norm()))
}

fn adaptive<F: FnMut(f64) -> Result<Complex64, StatPhaseError>>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> Result<Complex64, StatPhaseError> {
    let (v, err) = gk15(f, a, b)?;
    if err <= tol || depth == 0 {
        return Ok(v);
    }
    let m = 0.5 * (a + b);
    Ok(adaptive(f, a, m, 0.5 * tol, depth - 1)? + adaptive(f, m, b, 0.5 * tol, depth - 1)?)
}

/// `∫_a^b f` over panels of width at most `max_width`, absolute tolerance `tol`.
fn panelled<F: FnMut(f64) -> Result<Complex64, StatPhaseError>>(f: &mut F, a: f64, b: f64, max_width: f64, tol: f64) -> Result<Complex64, StatPhaseError> {
    if b <= a {
        return Ok(ZERO);
    }
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    let width = (b - a) / panels as f64;
    let mut total = ZERO;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        total += adaptive(f, lo, hi, tol / panels as f64, 30)?;
    }
    Ok(total)
}

/// Oracle tolerance `10⁻¹⁰ (2R)ⁿ`.
pub fn oracle_tolerance(p: &StatPhaseProblem) -> f64 {
    1e-10 * (2.0 * p.cutoff.radius).powi(p.dimension() as i32)
}

pub fn quadrature_oracle(p: &StatPhaseProblem) -> Result<Complex64, StatPhaseError> {
    quadrature_oracle_with_budget(p, DEFAULT_BUDGET)
}

/// Direct evaluation of `I_h` including the cutoff.
pub fn quadrature_oracle_with_budget(p: &StatPhaseProblem, budget: u64) -> Result<Complex64, StatPhaseError> {
    let n = p.dimension();
    if n > 2 {
        return Err(StatPhaseError::OracleDimension(n));
    }
    if p.h < MIN_ORACLE_H {
        return Err(StatPhaseError::StepTooSmall(p.h));
    }
    let budget = Budget {
        used: AtomicU64::new(0),
        limit: budget,
    };
    let tol = oracle_tolerance(p);
    let width = p.h / (4.0 * p.w.norm());
    let r = p.cutoff.radius;
    let c = &p.cutoff.center;
    if n == 1 {
        let mut f = |x: f64| {
            budget.spend(1)?;
            Ok(p.integrand(&[x]))
        };
        return panelled(&mut f, c[0] - r, c[0] + r, width, tol);
    }
    let inner_tol = 0.5 * tol / (2.0 * r);
    let mut outer = |x: f64| {
        let half = (r * r - (x - c[0]).powi(2)).max(0.0).sqrt();
        let mut inner = |y: f64| {
            budget.spend(1)?;
            Ok(p.integrand(&[x, y]))
        };
        panelled(&mut inner, c[1] - half, c[1] + half, width, inner_tol)
    };
    panelled(&mut outer, c[0] - r, c[0] + r, width, 0.5 * tol)
}

/// Result of regressing `log |oracle - expansion|` on `log h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub n: usize,
    pub order: usize,
    pub hs: Vec<f64>,
    pub errors: Vec<f64>,
    /// Points at or below `floor` are left out of the fit.
    pub floor: f64,
    pub slope: Option<f64>,
    pub expected: f64,
}

impl OrderCheck {
    /// All differences sit at the noise floor.
    pub fn below_floor(&self) -> bool {
        self.slope.is_none()
    }

    pub fn within(&self, tol: f64) -> bool {
        match self.slope {
            Some(s) => (s - self.expected).abs() <= tol,
            None => true,
        }
    }
}

fn is_geometric(hs: &[f64]) -> bool {
    if hs.len() < 5 || hs.iter().any(|h| !(*h > 0.0)) {
        return false;
    }
    let q = hs[1] / hs[0];
    q != 1.0 && hs.windows(2).all(|w| ((w[1] / w[0]) / q - 1.0).abs() < 1e-6)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Decay exponent of the remainder after `order` terms over a geometric `h` grid.
pub fn order_check<F>(family: F, hs: &[f64], order: usize) -> Result<OrderCheck, StatPhaseError>
where
    F: Fn(f64) -> Result<StatPhaseProblem, StatPhaseError> + Sync,
{
    if !is_geometric(hs) {
        return Err(StatPhaseError::Grid);
    }
    let rows: Vec<(usize, f64, f64)> = hs
        .par_iter()
        .map(|&h| {
            let p = family(h)?;
            let diff = (quadrature_oracle(&p)? - quadratic_expansion(&p, order)?).norm();
            Ok((p.dimension(), diff, FLOOR_FACTOR * oracle_tolerance(&p)))
        })
        .collect::<Result<_, StatPhaseError>>()?;
    let n = rows[0].0;
    let floor = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let errors: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = hs
        .iter()
        .zip(&errors)
        .filter(|(_, e)| **e > floor)
        .map(|(h, e)| (h.ln(), e.ln()))
        .unzip();
    let slope = (lx.len() >= 3).then(|| fit_slope(&lx, &ly));
    Ok(OrderCheck {
        n,
        order,
        hs: hs.to_vec(),
        errors,
        floor,
        slope,
        expected: order as f64 + 0.5 * n as f64,
    })
}

/// `h₀ q^j` for `j = 0..count`.
pub fn geometric_grid(h0: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| h0 * ratio.powi(j as i32)).collect()
}

/// Radius of the cutoff used by the built-in checks.
pub const CHECK_RADIUS: f64 = 4.0;

/// `a = 1 + x² + x⁴`, `Q = 1`, `w = 1`.
pub fn quartic_family(h: f64) -> Result<StatPhaseProblem, StatPhaseError> {
    StatPhaseProblem::new(
        Polynomial::univariate(&[1.0, 0.0, 1.0, 0.0, 1.0]),
        BumpCutoff::centered(1, CHECK_RADIUS),
        QuadraticPhase::scalar(1.0)?,
        Complex64::new(1.0, 0.0),
        h,
    )
}

/// `a = 1 + x² + y²`, `Q = I`, `w = 1`.
pub fn planar_family(h: f64) -> Result<StatPhaseProblem, StatPhaseError> {
    let one = Complex64::new(1.0, 0.0);
    StatPhaseProblem::new(
        Polynomial::from_terms(2, [(vec![0, 0], one), (vec![2, 0], one), (vec![0, 2], one)])?,
        BumpCutoff::centered(2, CHECK_RADIUS),
        QuadraticPhase::identity(2)?,
        one,
        h,
    )
}

/// Bump of radius 2 centred at `x = 3`, where `φ' ≠ 0`.
pub fn nonstationary_family(h: f64) -> Result<StatPhaseProblem, StatPhaseError> {
    StatPhaseProblem::new(
        Polynomial::univariate(&[1.0]),
        BumpCutoff {
            radius: 2.0,
            center: vec![3.0],
        },
        QuadraticPhase::scalar(1.0)?,
        Complex64::new(1.0, 0.0),
        h,
    )
}

/// `a = x` with the centred cutoff.
pub fn odd_family(h: f64) -> Result<StatPhaseProblem, StatPhaseError> {
    StatPhaseProblem::new(
        Polynomial::univariate(&[0.0, 1.0]),
        BumpCutoff::centered(1, CHECK_RADIUS),
        QuadraticPhase::scalar(1.0)?,
        Complex64::new(1.0, 0.0),
        h,
    )
}

/// A built-in verification case.
#[derive(Debug, Clone, Copy)]
pub struct CheckCase {
    pub name: &'static str,
    pub order: usize,
    pub family: fn(f64) -> Result<StatPhaseProblem, StatPhaseError>,
    pub hs: fn() -> Vec<f64>,
}

fn quartic_grid() -> Vec<f64> {
    geometric_grid(0.04, 0.5f64.sqrt(), 5)
}

fn planar_grid() -> Vec<f64> {
    geometric_grid(0.16, 0.5f64.sqrt(), 5)
}

fn nonstationary_grid() -> Vec<f64> {
    geometric_grid(0.2, 0.5, 4)
}

pub fn builtin_cases() -> Vec<CheckCase> {
    vec![
        CheckCase {
            name: "quartic",
            order: 1,
            family: quartic_family,
            hs: quartic_grid,
        },
        CheckCase {
            name: "quartic",
            order: 2,
            family: quartic_family,
            hs: quartic_grid,
        },
        CheckCase {
            name: "planar",
            order: 1,
            family: planar_family,
            hs: planar_grid,
        },
    ]
}

/// Log-log decay slope of `|I_h|` for a bump away from the critical point.
/// The grid need only have two points.
pub fn nonstationary_decay(hs: &[f64]) -> Result<(f64, Vec<f64>), StatPhaseError> {
    if hs.len() < 2 {
        return Err(StatPhaseError::Grid);
    }
    let mags: Vec<f64> = hs
        .par_iter()
        .map(|&h| Ok(quadrature_oracle(&nonstationary_family(h)?)?.norm()))
        .collect::<Result<_, StatPhaseError>>()?;
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = mags.iter().map(|m| m.ln()).collect();
    Ok((fit_slope(&lx, &ly), mags))
}

pub fn default_nonstationary_grid() -> Vec<f64> {
    nonstationary_grid()
}
