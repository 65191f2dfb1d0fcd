//! Tables and reports written by scans.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::{coset_deviations, FitReport, GapReport, LadderModel};
use crate::config::Tolerances;
use crate::geometry::{HypothesisReport, LengthScales};
use crate::resonances::{Resonance, ResonanceSet, SearchRegion};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no resonances to report")]
    EmptySet,
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub const RESONANCE_CSV_HEADER: &str = "re_lambda,im_lambda,residual,winding,nu,box_re_lo,box_re_hi,box_im_lo,box_im_hi";
pub const PLOT_CSV_HEADER: &str = "re,im,nu,predicted_im,deviation";

pub fn resonances_csv(rs: &ResonanceSet) -> String {
    let mut out = String::from(RESONANCE_CSV_HEADER);
    out.push('\n');
    for r in &rs.items {
        let b = r.cell.bounding_box();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.lambda.re,
            r.lambda.im,
            r.residual,
            r.winding,
            r.nu(),
            b.re_lo,
            b.re_hi,
            b.im_lo,
            b.im_hi
        );
    }
    out
}

/// Points against the predicted curve `-((n-1)/2L0) log re + C_Im`.
pub fn plot_data_points(points: &[Complex64], model: &LadderModel) -> Result<String, ReportError> {
    if points.is_empty() {
        return Err(ReportError::EmptySet);
    }
    let mut out = String::from(PLOT_CSV_HEADER);
    out.push('\n');
    for z in points {
        let predicted = model.predicted_im(z.re);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            z.re,
            z.im,
            SearchRegion::nu_of(*z),
            predicted,
            z.im - predicted
        );
    }
    Ok(out)
}

pub fn emit_plot_data(rs: &ResonanceSet, model: &LadderModel) -> Result<String, ReportError> {
    plot_data_points(&rs.lambdas(), model)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCheck {
    pub name: String,
    pub passed: bool,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl VerificationCheck {
    fn within(name: &str, expected: f64, observed: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: (observed - expected).abs() <= tolerance,
            expected,
            observed,
            tolerance,
            detail,
        }
    }
}

/// Circular distance between two points of `ℝ / period ℤ`.
pub fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Checks of a scan against the ladder law and the gap.
pub fn verify_scan(
    rs: &ResonanceSet,
    ladder: Option<&LadderModel>,
    fit: Option<&FitReport>,
    gap: Option<&GapReport>,
    tol: &Tolerances,
) -> Vec<VerificationCheck> {
    let mut checks = vec![VerificationCheck::within(
        "winding_conservation",
        rs.total_winding_audited as f64,
        rs.total_winding() as f64,
        0.0,
        "sum of resonance windings equals the outer contour winding".into(),
    )];
    let max_res = rs.items.iter().map(|r| r.residual).fold(0.0, f64::max);
    checks.push(VerificationCheck {
        name: "refinement_residual".into(),
        passed: rs.items.iter().all(|r| r.winding > 1 || r.residual < tol.newton_tol * 1e2),
        expected: 0.0,
        observed: max_res,
        tolerance: tol.newton_tol * 1e2,
        detail: "largest |det(I - M)| over simple zeros".into(),
    });
    match (ladder, fit) {
        (Some(l), Some(f)) => {
            checks.push(VerificationCheck::within(
                "slope",
                f.slope_expected,
                f.slope,
                tol.slope_rel_tol * f.slope_expected.abs(),
                format!("Im λ against log Re λ over {} points", f.count),
            ));
            checks.push(VerificationCheck::within(
                "spacing",
                f.spacing_expected,
                f.spacing_mean,
                tol.spacing_tol,
                "mean consecutive Re λ spacing".into(),
            ));
            checks.push(VerificationCheck::within(
                "c_im",
                l.c_im,
                f.intercept,
                tol.constants_tol,
                "fitted intercept against Re log c / 2L0".into(),
            ));
            let d = circular_distance(f.c_re_empirical, l.c_re, l.spacing());
            checks.push(VerificationCheck {
                name: "c_re".into(),
                passed: d <= tol.constants_tol,
                expected: l.c_re,
                observed: f.c_re_empirical,
                tolerance: tol.constants_tol,
                detail: "circular mean of Re λ mod π/L0 against -Im log c / 2L0".into(),
            });
        }
        (Some(_), None) => checks.push(VerificationCheck {
            name: "fit".into(),
            passed: false,
            expected: 0.0,
            observed: rs.items.len() as f64,
            tolerance: 0.0,
            detail: format!("too few resonances on the first string with Re λ ≥ {} to fit", tol.fit_min_re),
        }),
        _ => {}
    }
    if let Some(g) = gap {
        let b = &g.shifted_gap_band;
        if let Some(w) = b.winding {
            checks.push(VerificationCheck::within(
                "gap",
                0.0,
                w as f64,
                0.0,
                format!("winding over ν ∈ [{}, {}] below the curves shifted by {}", b.nu_lo, b.nu_hi, b.im_shift),
            ));
        }
    }
    checks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub dimension: usize,
    pub edges: usize,
    pub length_scales: LengthScales,
    pub hypotheses: HypothesisReport,
    pub ladder: Option<LadderModel>,
    pub region: SearchRegion,
    pub total_winding_audited: i64,
    pub evaluations: u64,
    pub resonances: Vec<Resonance>,
    pub fit: Option<FitReport>,
    pub gap: Option<GapReport>,
    pub checks: Vec<VerificationCheck>,
    pub tolerances: Tolerances,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.hypotheses.passed() && self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

pub fn fit_summary_text(report: &ScanReport) -> String {
    let mut s = String::new();
    let ls = &report.length_scales;
    let _ = writeln!(s, "dimension            {}", report.dimension);
    let _ = writeln!(s, "directed edges       {}", report.edges);
    let _ = writeln!(s, "L0                   {}", ls.l0);
    match ls.lprime {
        Some(lp) => {
            let _ = writeln!(s, "L'                   {lp}");
        }
        None => {
            let _ = writeln!(s, "L'                   undefined");
        }
    }
    let _ = writeln!(s, "gap edge             {}", ls.lambda);
    let _ = writeln!(
        s,
        "region               Re [{}, {}], nu [{}, {}]",
        report.region.re_min, report.region.re_max, report.region.nu_min, report.region.nu_max
    );
    let _ = writeln!(s, "resonances           {}", report.resonances.len());
    let _ = writeln!(s, "outer winding        {}", report.total_winding_audited);
    let _ = writeln!(s, "det evaluations      {}", report.evaluations);
    for c in &report.hypotheses.checks {
        let _ = writeln!(
            s,
            "hypothesis {:<18}{}{}",
            c.name,
            if c.passed { "ok" } else { "FAILED" },
            if c.witnesses.is_empty() {
                String::new()
            } else {
                format!(" ({})", c.witnesses.join(", "))
            }
        );
    }
    if let Some(l) = &report.ladder {
        let _ = writeln!(s, "C_Re predicted       {}", l.c_re);
        let _ = writeln!(s, "C_Im predicted       {}", l.c_im);
    }
    if let Some(f) = &report.fit {
        let _ = writeln!(s, "slope                {} (expected {})", f.slope, f.slope_expected);
        let _ = writeln!(s, "intercept            {}", f.intercept);
        let _ = writeln!(s, "spacing              {} (expected {})", f.spacing_mean, f.spacing_expected);
        let _ = writeln!(s, "C_Re empirical       {}", f.c_re_empirical);
        let _ = writeln!(s, "fit rms              {}", f.residual_rms);
        if let Some(t) = f.tail_exponent {
            let _ = writeln!(s, "coset decay exponent {t}");
        }
    }
    if let Some(g) = &report.gap {
        let show = |w: Option<i64>| w.map_or("empty band".to_string(), |w| w.to_string());
        let _ = writeln!(s, "gap band winding     {}", show(g.gap_band.winding));
        let _ = writeln!(s, "shifted gap winding  {}", show(g.shifted_gap_band.winding));
        let _ = writeln!(s, "string band winding  {} (expected about {:.1})", show(g.string_band.winding), g.string_expected);
        let _ = writeln!(s, "epsilon'             {}", g.epsilon_prime);
    }
    for c in &report.checks {
        let _ = writeln!(
            s,
            "check {:<22}{}  observed {} expected {} tol {}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            c.observed,
            c.expected,
            c.tolerance
        );
    }
    s
}

/// Deviations of `Re λ` from the predicted coset, used by trend checks.
pub fn coset_deviation_profile(rs: &ResonanceSet, model: &LadderModel) -> Vec<(f64, f64)> {
    let res: Vec<f64> = rs.items.iter().map(|r| r.lambda.re).collect();
    res.iter()
        .copied()
        .zip(coset_deviations(&res, model.c_re, model.spacing()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn plot_data_rejects_empty_and_tracks_fit() {
        let l = LadderModel::new(2, PI, Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(plot_data_points(&[], &l), Err(ReportError::EmptySet)));
        let pts: Vec<Complex64> = (50..60)
            .map(|k| Complex64::new(k as f64, -(k as f64).ln() / TAU + 0.01))
            .collect();
        let csv = plot_data_points(&pts, &l).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(PLOT_CSV_HEADER));
        for line in lines {
            let dev: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!((dev - 0.01).abs() < 1e-12);
        }
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(0.98, 0.01, 1.0) - 0.03).abs() < 1e-12);
    }
}
