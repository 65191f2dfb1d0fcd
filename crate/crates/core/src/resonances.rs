//! Zeros of `det(I - M(λ))` in logarithmic strips.
//!
//! Zeros are counted with the argument principle, tracking the phase of
//! `f` continuously along cell boundaries, and then polished by Newton's
//! method with the analytic derivative. A strip
//! `{ν_min ≤ -Im λ / log Re λ ≤ ν_max, re_min ≤ Re λ ≤ re_max}` is covered
//! by quadrilateral cells with vertical sides whose top and bottom corners
//! sit on the two boundary curves; adjacent cells share edges, so the cells
//! tile one polygon and their windings must add up to the winding of that
//! polygon's boundary.

use std::f64::consts::{PI, TAU};
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::LadderModel;
use crate::config::Tolerances;
use crate::geometry::{length_scales, ConeSurfaceSpec, GeometryError};
use crate::monodromy::{MonodromyError, MonodromyModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("invalid search region: {0}")]
    Region(&'static str),
    #[error("a zero lies within the boundary guard of the contour near {at}")]
    ZeroNearBoundary { at: Complex64 },
    #[error("non-finite function value at {at}")]
    NonFinite { at: Complex64 },
    #[error("phase change {turns} turns is not close to an integer")]
    NonIntegerWinding { turns: f64 },
    #[error("Newton did not converge from {start} after {iterations} iterations (|f| = {residual:e})")]
    NoConvergence {
        start: Complex64,
        iterations: usize,
        residual: f64,
    },
    #[error("Newton iterate {at} left its box")]
    EscapedBox { at: Complex64 },
    #[error("winding audit failed: cells sum to {sum}, outer contour winds {outer}")]
    Audit { outer: i64, sum: i64 },
    #[error("could not place a grid avoiding boundary zeros: {0}")]
    Grid(Box<ResonanceError>),
    #[error(transparent)]
    Model(#[from] MonodromyError),
    #[error(transparent)]
    Geometry(#[from] GeometryErrorWrapper),
}

/// `GeometryError` is not `Clone`; keep its message.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct GeometryErrorWrapper(pub String);

impl From<GeometryError> for ResonanceError {
    fn from(e: GeometryError) -> Self {
        ResonanceError::Geometry(GeometryErrorWrapper(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Smallest contour step; zeros closer than this to a cell edge make
    /// the count fail instead of being silently miscounted.
    pub guard: f64,
}

impl SearchRegion {
    pub fn new(re_min: f64, re_max: f64, nu_min: f64, nu_max: f64) -> Result<Self, ResonanceError> {
        let r = Self {
            re_min,
            re_max,
            nu_min,
            nu_max,
            guard: Tolerances::default().boundary_guard,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard;
        self
    }

    pub fn validate(&self) -> Result<(), ResonanceError> {
        let finite = [self.re_min, self.re_max, self.nu_min, self.nu_max, self.guard]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(ResonanceError::Region("bounds must be finite"));
        }
        if !(self.re_min > 1.0) {
            return Err(ResonanceError::Region("re_min must exceed 1 so that log Re λ > 0"));
        }
        if !(self.re_max > self.re_min) {
            return Err(ResonanceError::Region("re_max must exceed re_min"));
        }
        if !(self.nu_max > self.nu_min) {
            return Err(ResonanceError::Region("nu_max must exceed nu_min"));
        }
        if !(self.guard > 0.0) {
            return Err(ResonanceError::Region("guard must be positive"));
        }
        Ok(())
    }

    /// `Im λ` of the curve `-Im λ / log Re λ = ν`.
    pub fn im_at(nu: f64, re: f64) -> f64 {
        -nu * re.ln()
    }

    pub fn nu_of(lambda: Complex64) -> f64 {
        -lambda.im / lambda.re.ln()
    }
}

/// Quadrilateral with vertical sides at `re_lo`, `re_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub re_lo: f64,
    pub re_hi: f64,
    pub bottom_lo: f64,
    pub bottom_hi: f64,
    pub top_lo: f64,
    pub top_hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Cell {
    pub fn rect(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Self {
        Self {
            re_lo,
            re_hi,
            bottom_lo: im_lo,
            bottom_hi: im_lo,
            top_lo: im_hi,
            top_hi: im_hi,
        }
    }

    /// Cell between two log curves.
    pub fn strip(re_lo: f64, re_hi: f64, nu_lo: f64, nu_hi: f64) -> Self {
        Self::shifted_strip(re_lo, re_hi, nu_lo, nu_hi, 0.0)
    }

    /// Cell between the curves `Im λ = -ν log Re λ + shift`, `ν ∈ {nu_lo, nu_hi}`.
    pub fn shifted_strip(re_lo: f64, re_hi: f64, nu_lo: f64, nu_hi: f64, shift: f64) -> Self {
        Self {
            re_lo,
            re_hi,
            bottom_lo: SearchRegion::im_at(nu_hi, re_lo) + shift,
            bottom_hi: SearchRegion::im_at(nu_hi, re_hi) + shift,
            top_lo: SearchRegion::im_at(nu_lo, re_lo) + shift,
            top_hi: SearchRegion::im_at(nu_lo, re_hi) + shift,
        }
    }

    /// Counterclockwise corners.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_lo, self.bottom_lo),
            Complex64::new(self.re_hi, self.bottom_hi),
            Complex64::new(self.re_hi, self.top_hi),
            Complex64::new(self.re_lo, self.top_lo),
        ]
    }

    fn bottom_at(&self, re: f64) -> f64 {
        let t = (re - self.re_lo) / (self.re_hi - self.re_lo);
        self.bottom_lo + t * (self.bottom_hi - self.bottom_lo)
    }

    fn top_at(&self, re: f64) -> f64 {
        let t = (re - self.re_lo) / (self.re_hi - self.re_lo);
        self.top_lo + t * (self.top_hi - self.top_lo)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im >= self.bottom_at(z.re) && z.im <= self.top_at(z.re)
    }

    pub fn centroid(&self) -> Complex64 {
        let c = self.corners();
        (c[0] + c[1] + c[2] + c[3]) / 4.0
    }

    pub fn width(&self) -> f64 {
        self.re_hi - self.re_lo
    }

    pub fn height(&self) -> f64 {
        0.5 * ((self.top_lo - self.bottom_lo) + (self.top_hi - self.bottom_hi))
    }

    pub fn diameter(&self) -> f64 {
        let c = self.corners();
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                d = d.max((c[i] - c[j]).norm());
            }
        }
        d
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox {
            re_lo: self.re_lo,
            re_hi: self.re_hi,
            im_lo: self.bottom_lo.min(self.bottom_hi),
            im_hi: self.top_lo.max(self.top_hi),
        }
    }

    /// Split by a vertical line at fraction `t` of the width.
    pub fn split_re(&self, t: f64) -> (Cell, Cell) {
        let x = self.re_lo + t * self.width();
        let (b, tp) = (self.bottom_at(x), self.top_at(x));
        (
            Cell {
                re_hi: x,
                bottom_hi: b,
                top_hi: tp,
                ..*self
            },
            Cell {
                re_lo: x,
                bottom_lo: b,
                top_lo: tp,
                ..*self
            },
        )
    }

    /// Split along the line joining the points at fraction `t` of each vertical side.
    pub fn split_im(&self, t: f64) -> (Cell, Cell) {
        let mid_lo = self.bottom_lo + t * (self.top_lo - self.bottom_lo);
        let mid_hi = self.bottom_hi + t * (self.top_hi - self.bottom_hi);
        (
            Cell {
                top_lo: mid_lo,
                top_hi: mid_hi,
                ..*self
            },
            Cell {
                bottom_lo: mid_lo,
                bottom_hi: mid_hi,
                ..*self
            },
        )
    }
}

/// Parameters of the phase-continuation walk.
#[derive(Debug, Clone, Copy)]
pub struct ContourOptions {
    pub max_phase_step: f64,
    pub guard: f64,
    pub frac_reject: f64,
    /// Longest step along the contour, so that no full turn fits between samples.
    pub max_step: f64,
}

impl ContourOptions {
    pub fn new(tol: &Tolerances, guard: f64) -> Self {
        Self {
            max_phase_step: tol.max_phase_step,
            guard,
            frac_reject: tol.winding_frac_reject,
            max_step: f64::INFINITY,
        }
    }

    /// Cap the step at `0.5 / s` for a function built from `e^{iλs'}`, `s' ≤ s`.
    pub fn with_frequency_bound(mut self, s: f64) -> Self {
        if s > 0.0 {
            self.max_step = 0.5 / s;
        }
        self
    }
}

impl Default for ContourOptions {
    fn default() -> Self {
        Self::new(&Tolerances::default(), Tolerances::default().boundary_guard)
    }
}

fn checked<F: Fn(Complex64) -> Complex64>(f: &F, z: Complex64) -> Result<Complex64, ResonanceError> {
    let v = f(z);
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(ResonanceError::NonFinite { at: z });
    }
    if v == Complex64::new(0.0, 0.0) {
        return Err(ResonanceError::ZeroNearBoundary { at: z });
    }
    Ok(v)
}

/// Total change of `arg f` along the closed polygon `path`, in turns.
pub fn phase_turns<F: Fn(Complex64) -> Complex64>(f: &F, path: &[Complex64], opts: &ContourOptions) -> Result<f64, ResonanceError> {
    let mut total = 0.0;
    for (k, &a) in path.iter().enumerate() {
        let b = path[(k + 1) % path.len()];
        let len = (b - a).norm();
        if len == 0.0 {
            continue;
        }
        let at = |t: f64| a + (b - a) * t;
        let mut t: f64 = 0.0;
        let dt_max = (opts.max_step / len).min(0.5);
        let mut dt: f64 = dt_max.min(0.125);
        let mut cur = checked(f, a)?;
        while t < 1.0 {
            let t1 = (t + dt).min(1.0);
            let mid = checked(f, at(0.5 * (t + t1)))?;
            let end = checked(f, at(t1))?;
            let d1 = (mid / cur).arg();
            let d2 = (end / mid).arg();
            if d1.abs() < opts.max_phase_step && d2.abs() < opts.max_phase_step {
                total += d1 + d2;
                t = t1;
                cur = end;
                if d1.abs() + d2.abs() < 0.25 * opts.max_phase_step {
                    dt = (2.0 * dt).min(dt_max);
                }
            } else {
                dt *= 0.5;
                if dt * len < opts.guard {
                    return Err(ResonanceError::ZeroNearBoundary { at: at(t) });
                }
            }
        }
    }
    Ok(total / TAU)
}

/// Number of zeros (with multiplicity) of `f` inside the closed polygon `path`.
pub fn winding_number<F: Fn(Complex64) -> Complex64>(f: &F, path: &[Complex64], opts: &ContourOptions) -> Result<i64, ResonanceError> {
    let turns = phase_turns(f, path, opts)?;
    let k = turns.round();
    if (turns - k).abs() > opts.frac_reject {
        return Err(ResonanceError::NonIntegerWinding { turns });
    }
    Ok(k as i64)
}

/// Zeros of `f` inside a cell, by the argument principle.
pub fn count_zeros<F: Fn(Complex64) -> Complex64>(f: &F, cell: &Cell, opts: &ContourOptions) -> Result<i64, ResonanceError> {
    winding_number(f, &cell.corners(), opts)
}

/// Newton's method; stops once `|f| < tol (1 + |f'|)`.
pub fn newton<F: Fn(Complex64) -> (Complex64, Complex64)>(
    f: &F,
    start: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<(Complex64, f64), ResonanceError> {
    let mut z = start;
    let mut residual = f64::INFINITY;
    for _ in 0..=max_iter {
        let (v, d) = f(z);
        residual = v.norm();
        if !residual.is_finite() {
            return Err(ResonanceError::NonFinite { at: z });
        }
        if residual < tol * (1.0 + d.norm()) {
            // One more step is nearly free at quadratic convergence.
            let polished = z - v / d;
            let r = f(polished).0.norm();
            return Ok(if r < residual { (polished, r) } else { (z, residual) });
        }
        if d.norm() == 0.0 || !d.norm().is_finite() {
            break;
        }
        z -= v / d;
    }
    Err(ResonanceError::NoConvergence {
        start,
        iterations: max_iter,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub lambda: Complex64,
    pub residual: f64,
    pub winding: i64,
    #[serde(rename = "box")]
    pub cell: Cell,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_mass: Option<std::collections::BTreeMap<String, f64>>,
}

impl Resonance {
    pub fn nu(&self) -> f64 {
        SearchRegion::nu_of(self.lambda)
    }
}

/// Newton from `start`; the root must stay inside `cell`.
pub fn refine_root<F: Fn(Complex64) -> (Complex64, Complex64)>(
    f: &F,
    start: Complex64,
    cell: &Cell,
    tol: &Tolerances,
) -> Result<Resonance, ResonanceError> {
    let (z, residual) = newton(f, start, tol.newton_tol, tol.newton_max_iter)?;
    if !cell.contains(z) {
        return Err(ResonanceError::EscapedBox { at: z });
    }
    Ok(Resonance {
        lambda: z,
        residual,
        winding: 1,
        cell: *cell,
        null_mass: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub items: Vec<Resonance>,
    pub region: SearchRegion,
    /// Winding of the outer contour; equals the sum of item windings.
    pub total_winding_audited: i64,
    /// Width of the initial cell grid.
    pub grid_width: f64,
    /// Number of determinant evaluations spent.
    pub evaluations: u64,
}

impl ResonanceSet {
    pub fn lambdas(&self) -> Vec<Complex64> {
        self.items.iter().map(|r| r.lambda).collect()
    }

    pub fn total_winding(&self) -> i64 {
        self.items.iter().map(|r| r.winding).sum()
    }
}

/// How the initial cell grid is laid out along `Re λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSeed {
    /// Cells of the given width starting at `re_min`.
    Uniform { width: f64 },
    /// Cells of half the ladder spacing, with predicted zeros
    /// `c_re + k·spacing` at the centers of alternate cells.
    Ladder { c_re: f64, spacing: f64 },
}

impl GridSeed {
    pub fn width(&self) -> f64 {
        match *self {
            GridSeed::Uniform { width } => width,
            GridSeed::Ladder { spacing, .. } => 0.5 * spacing,
        }
    }

    /// Interior cut positions in `(lo, hi)`, shifted by `offset` (in units of the width).
    fn cuts(&self, lo: f64, hi: f64, offset: f64) -> Vec<f64> {
        let w = self.width();
        let origin = match *self {
            GridSeed::Uniform { .. } => lo,
            GridSeed::Ladder { c_re, spacing } => c_re + 0.25 * spacing,
        } + offset * w;
        let first = ((lo - origin) / w).floor() as i64;
        let mut cuts = Vec::new();
        let mut j = first;
        loop {
            let x = origin + j as f64 * w;
            if x >= hi - 0.1 * w {
                break;
            }
            if x > lo + 0.1 * w {
                cuts.push(x);
            }
            j += 1;
        }
        cuts
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub tolerances: Tolerances,
    pub grid: GridSeed,
    /// Shift of the grid, in units of the cell width.
    pub grid_offset: f64,
    pub null_seed: u64,
    pub compute_null_mass: bool,
}

/// Region between two shifted log curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub re_lo: f64,
    pub re_hi: f64,
    pub nu_lo: f64,
    pub nu_hi: f64,
    pub im_shift: f64,
}

impl Band {
    pub fn of_region(region: &SearchRegion) -> Self {
        Self {
            re_lo: region.re_min,
            re_hi: region.re_max,
            nu_lo: region.nu_min,
            nu_hi: region.nu_max,
            im_shift: 0.0,
        }
    }
}

/// Winding of a band and of each of its grid cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandWinding {
    pub outer: i64,
    pub cells: Vec<(Cell, i64)>,
    pub evaluations: u64,
}

impl BandWinding {
    pub fn total(&self) -> i64 {
        self.cells.iter().map(|c| c.1).sum()
    }
}

const SPLIT_FRACTIONS: [f64; 5] = [0.5, 0.43, 0.57, 0.37, 0.63];
const GRID_OFFSETS: [f64; 4] = [0.0, 0.137, 0.291, 0.419];

struct Scanner<'a> {
    model: &'a MonodromyModel,
    tol: &'a Tolerances,
    opts: ContourOptions,
    evaluations: AtomicU64,
}

impl<'a> Scanner<'a> {
    fn new(model: &'a MonodromyModel, tol: &'a Tolerances, guard: f64) -> Self {
        Self {
            model,
            tol,
            opts: ContourOptions::new(tol, guard).with_frequency_bound(model.frequency_bound()),
            evaluations: AtomicU64::new(0),
        }
    }

    fn value(&self, z: Complex64) -> Complex64 {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        // Cells live in Re λ > 1, where the model is defined.
        self.model.char_det(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    fn value_and_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.model
            .char_value(z)
            .unwrap_or((Complex64::new(f64::NAN, f64::NAN), Complex64::new(f64::NAN, f64::NAN)))
    }

    fn count(&self, path: &[Complex64]) -> Result<i64, ResonanceError> {
        winding_number(&|z| self.value(z), path, &self.opts)
    }

    fn cells_for(band: &Band, grid: GridSeed, offset: f64) -> Vec<Cell> {
        let mut xs = vec![band.re_lo];
        xs.extend(grid.cuts(band.re_lo, band.re_hi, offset));
        xs.push(band.re_hi);
        xs.windows(2)
            .map(|w| Cell::shifted_strip(w[0], w[1], band.nu_lo, band.nu_hi, band.im_shift))
            .collect()
    }

    fn outer_path(cells: &[Cell]) -> Vec<Complex64> {
        let mut path: Vec<Complex64> = Vec::with_capacity(2 * cells.len() + 2);
        path.push(Complex64::new(cells[0].re_lo, cells[0].bottom_lo));
        for c in cells {
            path.push(Complex64::new(c.re_hi, c.bottom_hi));
        }
        for c in cells.iter().rev() {
            path.push(Complex64::new(c.re_hi, c.top_hi));
        }
        path.push(Complex64::new(cells[0].re_lo, cells[0].top_lo));
        path
    }

    /// Band windings on a grid, retrying shifted grids when a cut passes
    /// through a zero.
    fn band(&self, band: &Band, grid: GridSeed, offset: f64) -> Result<BandWinding, ResonanceError> {
        let mut last_err = None;
        for extra in GRID_OFFSETS {
            let cells = Self::cells_for(band, grid, offset + extra);
            let outer = self.count(&Self::outer_path(&cells));
            let outer = match outer {
                Ok(w) => w,
                // Only the vertices of the outer boundary move with the offset.
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let counted: Result<Vec<(Cell, i64)>, ResonanceError> = cells
                .par_iter()
                .map(|c| Ok((*c, self.count(&c.corners())?)))
                .collect();
            match counted {
                Ok(cells) => {
                    let sum: i64 = cells.iter().map(|c| c.1).sum();
                    if sum != outer {
                        return Err(ResonanceError::Audit { outer, sum });
                    }
                    return Ok(BandWinding {
                        outer,
                        cells,
                        evaluations: 0,
                    });
                }
                Err(e) => last_err = Some(e),
            }
        }
        Err(ResonanceError::Grid(Box::new(last_err.expect("at least one attempt"))))
    }

    fn split(&self, cell: &Cell, winding: i64) -> Result<[(Cell, i64); 2], ResonanceError> {
        let by_width = cell.width() >= cell.height();
        let mut last_err = ResonanceError::Audit { outer: winding, sum: -1 };
        for t in SPLIT_FRACTIONS {
            let (a, b) = if by_width { cell.split_re(t) } else { cell.split_im(t) };
            let wa = self.count(&a.corners());
            let wb = self.count(&b.corners());
            match (wa, wb) {
                (Ok(wa), Ok(wb)) if wa + wb == winding => return Ok([(a, wa), (b, wb)]),
                (Ok(wa), Ok(wb)) => last_err = ResonanceError::Audit { outer: winding, sum: wa + wb },
                (Err(e), _) | (_, Err(e)) => last_err = e,
            }
        }
        Err(last_err)
    }

    fn isolate(&self, cell: Cell, winding: i64) -> Result<Vec<Resonance>, ResonanceError> {
        if winding == 0 {
            return Ok(Vec::new());
        }
        let fd = |z| self.value_and_derivative(z);
        if winding == 1 {
            if let Ok(r) = refine_root(&fd, cell.centroid(), &cell, self.tol) {
                return Ok(vec![r]);
            }
        }
        if cell.diameter() < self.tol.min_cell_diameter {
            // Cluster of `winding` zeros that no longer separates.
            let (z, residual) = match newton(&fd, cell.centroid(), self.tol.newton_tol, self.tol.newton_max_iter) {
                Ok((z, r)) if cell.contains(z) => (z, r),
                _ => {
                    let z = cell.centroid();
                    (z, self.value(z).norm())
                }
            };
            return Ok(vec![Resonance {
                lambda: z,
                residual,
                winding,
                cell,
                null_mass: None,
            }]);
        }
        let halves = self.split(&cell, winding)?;
        let mut out = Vec::new();
        for (c, w) in halves {
            out.extend(self.isolate(c, w)?);
        }
        Ok(out)
    }
}

fn sort_by_re(items: &mut [Resonance]) {
    items.sort_by(|a, b| {
        a.lambda
            .re
            .total_cmp(&b.lambda.re)
            .then(a.lambda.im.total_cmp(&b.lambda.im))
    });
}

/// Total winding of `det(I - M)` over a band, cell by cell.
pub fn band_winding(model: &MonodromyModel, band: &Band, grid: GridSeed, tol: &Tolerances) -> Result<BandWinding, ResonanceError> {
    SearchRegion {
        re_min: band.re_lo,
        re_max: band.re_hi,
        nu_min: band.nu_lo,
        nu_max: band.nu_hi,
        guard: tol.boundary_guard,
    }
    .validate()?;
    let scanner = Scanner::new(model, tol, tol.boundary_guard);
    let mut out = scanner.band(band, grid, 0.0)?;
    out.evaluations = scanner.evaluations.load(Ordering::Relaxed);
    Ok(out)
}

/// Locate every zero of `det(I - M)` in the region.
pub fn scan_model(model: &MonodromyModel, region: &SearchRegion, options: &ScanOptions) -> Result<ResonanceSet, ResonanceError> {
    region.validate()?;
    let tol = &options.tolerances;
    let scanner = Scanner::new(model, tol, region.guard);
    let band = scanner.band(&Band::of_region(region), options.grid, options.grid_offset)?;
    let found: Result<Vec<Vec<Resonance>>, ResonanceError> = band
        .cells
        .par_iter()
        .map(|&(c, w)| scanner.isolate(c, w))
        .collect();
    let mut items: Vec<Resonance> = found?.into_iter().flatten().collect();
    let sum: i64 = items.iter().map(|r| r.winding).sum();
    if sum != band.outer {
        return Err(ResonanceError::Audit { outer: band.outer, sum });
    }
    if options.compute_null_mass {
        items.par_iter_mut().for_each(|r| {
            r.null_mass = model
                .null_vector(r.lambda, tol.null_residual, options.null_seed)
                .ok()
                .map(|v| v.edge_mass());
        });
    }
    sort_by_re(&mut items);
    Ok(ResonanceSet {
        items,
        region: *region,
        total_winding_audited: band.outer,
        grid_width: options.grid.width(),
        evaluations: scanner.evaluations.load(Ordering::Relaxed),
    })
}

/// Grid suited to a surface: seeded by the ladder of its maximal geodesic
/// when that exists, otherwise uniform with width `π / (2 L0)`.
pub fn default_grid(spec: &ConeSurfaceSpec, model: &MonodromyModel, tol: &Tolerances) -> GridSeed {
    match LadderModel::from_model(spec, model, tol) {
        Ok(ladder) => GridSeed::Ladder {
            c_re: ladder.c_re,
            spacing: PI / ladder.l0,
        },
        Err(_) => {
            let width = length_scales(spec, tol).map(|ls| 0.5 * PI / ls.l0).unwrap_or(0.5);
            GridSeed::Uniform { width }
        }
    }
}

/// Scan a surface with default options.
pub fn scan_strip(spec: &ConeSurfaceSpec, region: &SearchRegion) -> Result<ResonanceSet, ResonanceError> {
    let tol = Tolerances::default();
    let model = MonodromyModel::new(spec, &tol)?;
    let options = ScanOptions {
        grid: default_grid(spec, &model, &tol),
        tolerances: tol,
        grid_offset: 0.0,
        null_seed: 0,
        compute_null_mass: true,
    };
    scan_model(&model, region, &options)
}
