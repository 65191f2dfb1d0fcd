//! Leading-order monodromy matrix over directed cone-to-cone geodesics.
//!
//! For `f → e` meeting at cone point `α`, the transfer entry is
//!
//! ```text
//! M(λ)[e, f] = C(e, f) · λ^{-(n-1)/2} · e^{iλ ℓ_f},   C(e, f) = D_α(θ_e^from - θ_f^to)
//! ```
//!
//! with the principal branch of the power (cut on the negative real axis).
//! Resonances of the model are the zeros of `det(I - M(λ))`. Only the
//! zero multi-index block is assembled; the coefficients `C(e, f)` do not
//! depend on `λ` and are computed once per surface.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::Tolerances;
use crate::diffraction::{DiffractionError, DiffractionEvaluator};
use crate::geometry::ConeSurfaceSpec;
use crate::linalg::{norm2, ComplexMatrix, Lu};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error("edge `{f}` does not feed edge `{e}`")]
    NotAdjacent { e: String, f: String },
    #[error("turn from `{f}` into `{e}` is geometric (Δθ = {dtheta})")]
    GeometricRaySingularity { e: String, f: String, dtheta: f64 },
    #[error("diffraction coefficient at `{point}`: {source}")]
    Diffraction {
        point: String,
        #[source]
        source: DiffractionError,
    },
    #[error("spectral parameter must be nonzero")]
    ZeroLambda,
    #[error("expansion order {0} is not available; only the leading order 0 is implemented")]
    UnsupportedOrder(usize),
    #[error("|det(I - M)| = {residual:e} exceeds the null-vector threshold {threshold:e}")]
    NotResonant { residual: f64, threshold: f64 },
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
}

#[derive(Debug, Clone)]
struct Transfer {
    row: usize,
    col: usize,
    coeff: Complex64,
    length: f64,
}

/// Precomputed transfer coefficients of a surface.
#[derive(Debug, Clone)]
pub struct MonodromyModel {
    edge_ids: Vec<String>,
    transfers: Vec<Transfer>,
    half_power: f64,
}

#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub edge_index: Vec<String>,
    pub entries: ComplexMatrix,
    pub lambda: Complex64,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyVector {
    pub edge_index: Vec<String>,
    pub components: Vec<Complex64>,
    pub norm: f64,
}

impl MonodromyVector {
    /// Share of `|s|²` carried by each edge.
    pub fn edge_mass(&self) -> BTreeMap<String, f64> {
        let total: f64 = self.components.iter().map(|z| z.norm_sqr()).sum();
        self.edge_index
            .iter()
            .zip(&self.components)
            .map(|(id, z)| (id.clone(), z.norm_sqr() / total))
            .collect()
    }
}

fn coefficient_for(spec: &ConeSurfaceSpec, e: usize, f: usize, tol: &Tolerances) -> Result<Complex64, MonodromyError> {
    let edges = spec.edges();
    if !spec.is_adjacent(f, e) {
        return Err(MonodromyError::NotAdjacent {
            e: edges[e].id.clone(),
            f: edges[f].id.clone(),
        });
    }
    let point = &spec.cone_points()[spec.to_point(f)];
    let ev = DiffractionEvaluator::for_cone_point(point, spec.dimension())
        .map_err(|source| MonodromyError::Diffraction {
            point: point.id.clone(),
            source,
        })?
        .with_guard(tol.diffraction_guard);
    let dtheta = edges[e].theta_from - edges[f].theta_to;
    if ev.is_geometric(dtheta) {
        return Err(MonodromyError::GeometricRaySingularity {
            e: edges[e].id.clone(),
            f: edges[f].id.clone(),
            dtheta,
        });
    }
    ev.coefficient(dtheta).map_err(|source| match source {
        DiffractionError::GeometricRaySingularity { .. } => MonodromyError::GeometricRaySingularity {
            e: edges[e].id.clone(),
            f: edges[f].id.clone(),
            dtheta,
        },
        source => MonodromyError::Diffraction {
            point: point.id.clone(),
            source,
        },
    })
}

/// `λ^{-p}` on the principal branch.
fn principal_power(lambda: Complex64, p: f64) -> Complex64 {
    (-p * lambda.ln()).exp()
}

/// Single transfer entry `M(λ)[e, f]` for `f → e`.
pub fn transfer_entry(spec: &ConeSurfaceSpec, e: usize, f: usize, lambda: Complex64) -> Result<Complex64, MonodromyError> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(MonodromyError::ZeroLambda);
    }
    let c = coefficient_for(spec, e, f, &Tolerances::default())?;
    let half = 0.5 * (spec.dimension() as f64 - 1.0);
    let phase = (Complex64::i() * lambda * spec.edges()[f].length).exp();
    Ok(c * principal_power(lambda, half) * phase)
}

impl MonodromyModel {
    pub fn new(spec: &ConeSurfaceSpec, tol: &Tolerances) -> Result<Self, MonodromyError> {
        let mut transfers = Vec::new();
        for (f, e) in spec.adjacent_pairs() {
            let coeff = coefficient_for(spec, e, f, tol)?;
            if coeff != Complex64::new(0.0, 0.0) {
                transfers.push(Transfer {
                    row: e,
                    col: f,
                    coeff,
                    length: spec.edges()[f].length,
                });
            }
        }
        Ok(Self {
            edge_ids: spec.edges().iter().map(|e| e.id.clone()).collect(),
            transfers,
            half_power: 0.5 * (spec.dimension() as f64 - 1.0),
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn edge_ids(&self) -> &[String] {
        &self.edge_ids
    }

    /// True when every transfer coefficient vanishes, so `det(I - M) ≡ 1`.
    pub fn is_trivial(&self) -> bool {
        self.transfers.is_empty()
    }

    /// `C(e, f)` by edge ids; zero for vanishing coefficients.
    pub fn coefficient(&self, e: &str, f: &str) -> Result<Complex64, MonodromyError> {
        let ei = self.index_of(e)?;
        let fi = self.index_of(f)?;
        Ok(self
            .transfers
            .iter()
            .find(|t| t.row == ei && t.col == fi)
            .map_or(Complex64::new(0.0, 0.0), |t| t.coeff))
    }

    /// Sum of the lengths of edges that feed a nonzero transfer. Every
    /// term of `det(I - M)` oscillates like `e^{iλs}` with `0 ≤ s ≤` this bound.
    pub fn frequency_bound(&self) -> f64 {
        let mut seen = vec![false; self.num_edges()];
        let mut total = 0.0;
        for t in &self.transfers {
            if !seen[t.col] {
                seen[t.col] = true;
                total += t.length;
            }
        }
        total
    }

    fn index_of(&self, id: &str) -> Result<usize, MonodromyError> {
        self.edge_ids
            .iter()
            .position(|x| x == id)
            .ok_or_else(|| MonodromyError::UnknownEdge(id.to_string()))
    }

    fn matrices(&self, lambda: Complex64, with_derivative: bool) -> Result<(ComplexMatrix, Option<ComplexMatrix>), MonodromyError> {
        if lambda == Complex64::new(0.0, 0.0) {
            return Err(MonodromyError::ZeroLambda);
        }
        let n = self.num_edges();
        let amp = principal_power(lambda, self.half_power);
        let mut m = ComplexMatrix::zeros(n);
        let mut dm = with_derivative.then(|| ComplexMatrix::zeros(n));
        let log_factor = -self.half_power / lambda;
        for t in &self.transfers {
            let entry = t.coeff * amp * (Complex64::i() * lambda * t.length).exp();
            m[(t.row, t.col)] = entry;
            if let Some(d) = dm.as_mut() {
                d[(t.row, t.col)] = entry * (log_factor + Complex64::i() * t.length);
            }
        }
        Ok((m, dm))
    }

    pub fn assemble(&self, lambda: Complex64) -> Result<TransferMatrix, MonodromyError> {
        let (entries, _) = self.matrices(lambda, false)?;
        Ok(TransferMatrix {
            edge_index: self.edge_ids.clone(),
            entries,
            lambda,
            order: 0,
        })
    }

    /// Assemble at a given expansion order; only order 0 exists.
    pub fn assemble_order(&self, lambda: Complex64, order: usize) -> Result<TransferMatrix, MonodromyError> {
        if order != 0 {
            return Err(MonodromyError::UnsupportedOrder(order));
        }
        self.assemble(lambda)
    }

    /// `d/dλ M(λ)`.
    pub fn derivative(&self, lambda: Complex64) -> Result<ComplexMatrix, MonodromyError> {
        Ok(self.matrices(lambda, true)?.1.expect("derivative requested"))
    }

    /// `det(I - M(λ))`.
    pub fn char_det(&self, lambda: Complex64) -> Result<Complex64, MonodromyError> {
        if self.is_trivial() {
            if lambda == Complex64::new(0.0, 0.0) {
                return Err(MonodromyError::ZeroLambda);
            }
            return Ok(Complex64::new(1.0, 0.0));
        }
        let (m, _) = self.matrices(lambda, false)?;
        Ok(Lu::factor(&m.identity_minus()).det())
    }

    /// `det(I - M(λ))` and its λ-derivative by Jacobi's formula
    /// `d det A = det A · tr(A⁻¹ dA)` with `A = I - M`.
    pub fn char_value(&self, lambda: Complex64) -> Result<(Complex64, Complex64), MonodromyError> {
        if self.is_trivial() {
            if lambda == Complex64::new(0.0, 0.0) {
                return Err(MonodromyError::ZeroLambda);
            }
            return Ok((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
        }
        let (m, dm) = self.matrices(lambda, true)?;
        let dm = dm.expect("derivative requested");
        let a = m.identity_minus();
        let lu = Lu::factor(&a);
        let det = lu.det();
        let n = a.dim();
        let deriv = if lu.is_singular() {
            derivative_by_rows(&a, &dm)
        } else {
            let mut trace = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let col: Vec<Complex64> = (0..n).map(|i| -dm[(i, j)]).collect();
                let x = lu.solve(&col).expect("nonsingular factorization");
                trace += x[j];
            }
            det * trace
        };
        Ok((det, deriv))
    }

    /// Unit right singular vector of `I - M(λ)` for its smallest singular
    /// value, by two steps of inverse iteration on `(I - M)^H (I - M)` from
    /// a seeded random start. The overall phase makes the largest component
    /// real and positive.
    pub fn null_vector(&self, lambda: Complex64, threshold: f64, seed: u64) -> Result<MonodromyVector, MonodromyError> {
        let residual = self.char_det(lambda)?.norm();
        if !(residual < threshold) {
            return Err(MonodromyError::NotResonant { residual, threshold });
        }
        let (m, _) = self.matrices(lambda, false)?;
        let mut a = m.identity_minus();
        let mut lu = Lu::factor(&a);
        if lu.is_singular() {
            for i in 0..a.dim() {
                a[(i, i)] += Complex64::new(1e-14, 0.0);
            }
            lu = Lu::factor(&a);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<Complex64> = (0..a.dim())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        for _ in 0..2 {
            let y = lu.solve_adjoint(&x).expect("nonsingular factorization");
            let z = lu.solve(&y).expect("nonsingular factorization");
            let nz = norm2(&z);
            x = z.into_iter().map(|c| c / nz).collect();
        }
        let pivot = x
            .iter()
            .copied()
            .fold(Complex64::new(0.0, 0.0), |best, c| if c.norm() > best.norm() { c } else { best });
        let rot = pivot.conj() / pivot.norm();
        let components: Vec<Complex64> = x.into_iter().map(|c| c * rot).collect();
        let norm = norm2(&components);
        Ok(MonodromyVector {
            edge_index: self.edge_ids.clone(),
            components,
            norm,
        })
    }
}

impl MonodromyModel {
    /// Amplitudes at the far end of each edge, `λ^{-(n-1)/2} e^{iλℓ_e} s_e`,
    /// for a null vector `s` at `λ`; unit norm. A null vector carries the
    /// amplitude leaving each edge's start, so short edges fed by a long one
    /// can hold much of its mass; arriving amplitudes single out the
    /// geodesics whose bounce produces the resonance.
    pub fn arrival_amplitudes(&self, v: &MonodromyVector, lambda: Complex64, lengths: &[f64]) -> MonodromyVector {
        let amp = principal_power(lambda, self.half_power);
        let raw: Vec<Complex64> = v
            .components
            .iter()
            .zip(lengths)
            .map(|(s, l)| s * amp * (Complex64::i() * lambda * *l).exp())
            .collect();
        let norm = norm2(&raw);
        let components: Vec<Complex64> = raw.into_iter().map(|c| c / norm).collect();
        MonodromyVector {
            edge_index: v.edge_index.clone(),
            norm: norm2(&components),
            components,
        }
    }
}

/// `d det A = Σ_i det(A with row i replaced by row i of dA)`, here with `dA = -dM`.
fn derivative_by_rows(a: &ComplexMatrix, dm: &ComplexMatrix) -> Complex64 {
    let n = a.dim();
    (0..n)
        .map(|i| {
            let mut b = a.clone();
            for j in 0..n {
                b[(i, j)] = -dm[(i, j)];
            }
            Lu::factor(&b).det()
        })
        .sum()
}

pub fn assemble(spec: &ConeSurfaceSpec, lambda: Complex64) -> Result<TransferMatrix, MonodromyError> {
    MonodromyModel::new(spec, &Tolerances::default())?.assemble(lambda)
}

pub fn char_value(spec: &ConeSurfaceSpec, lambda: Complex64) -> Result<(Complex64, Complex64), MonodromyError> {
    MonodromyModel::new(spec, &Tolerances::default())?.char_value(lambda)
}

pub fn null_vector(spec: &ConeSurfaceSpec, lambda: Complex64, threshold: f64) -> Result<MonodromyVector, MonodromyError> {
    MonodromyModel::new(spec, &Tolerances::default())?.null_vector(lambda, threshold, 0)
}
