use std::f64::consts::{PI, TAU};

use coneres::asymptotics::{fit_log_curve, gap_report, LadderModel};
use coneres::geometry::{build_polygon_double, length_scales, two_cone_model, validate_hypotheses, ConeSurfaceSpec};
use coneres::report::emit_plot_data;
use coneres::resonances::{count_zeros, default_grid, refine_root, scan_model, scan_strip, Cell, ContourOptions, ScanOptions, SearchRegion};
use coneres::{Complex64, MonodromyModel, ResonanceSet, Tolerances};
use proptest::prelude::*;

fn two_cones() -> ConeSurfaceSpec {
    two_cone_model(4.0 * PI, 4.0 * PI, PI).unwrap()
}

fn triangle_345() -> ConeSurfaceSpec {
    build_polygon_double(&[[0.0, 0.0], [4.0, 0.0], [4.0, 3.0]]).unwrap()
}

fn scan_with_offset(spec: &ConeSurfaceSpec, region: SearchRegion, offset: f64) -> ResonanceSet {
    let tol = Tolerances::default();
    let model = MonodromyModel::new(spec, &tol).unwrap();
    let options = ScanOptions {
        grid: default_grid(spec, &model, &tol),
        tolerances: tol,
        grid_offset: offset,
        null_seed: 0,
        compute_null_mass: false,
    };
    scan_model(&model, &region, &options).unwrap()
}

#[test]
fn predicted_box_holds_one_zero() {
    let tol = Tolerances::default();
    let model = MonodromyModel::new(&two_cones(), &tol).unwrap();
    let ladder = LadderModel::from_spec(&two_cones(), &tol).unwrap();
    let z = ladder.ladder_root(30).unwrap();
    let cell = Cell::rect(z.re - 0.3, z.re + 0.3, z.im - 0.3, z.im + 0.3);
    let f = |l: Complex64| model.char_det(l).unwrap();
    assert_eq!(count_zeros(&f, &cell, &ContourOptions::default()).unwrap(), 1);
    let fd = |l: Complex64| model.char_value(l).unwrap();
    let r = refine_root(&fd, cell.centroid(), &cell, &tol).unwrap();
    assert!(r.residual < 1e-10);
    assert!((r.lambda - z).norm() < 1e-10);
}

#[test]
fn scan_counts_match_ladder() {
    let spec = two_cones();
    let rs = scan_strip(&spec, &SearchRegion::new(20.0, 40.0, 0.05, 0.4).unwrap()).unwrap();
    let ladder = LadderModel::from_spec(&spec, &Tolerances::default()).unwrap();
    let predicted = ladder.ladder_in_window(20.0, 40.0, 0.05, 0.4).unwrap();
    assert_eq!(rs.items.len(), predicted.len());
    assert!(!predicted.is_empty());
    assert_eq!(rs.total_winding_audited, rs.total_winding());
    for r in &rs.items {
        assert_eq!(r.winding, 1);
        assert!(r.residual < 1e-10);
    }
}

#[test]
fn trivial_surfaces_have_empty_scans() {
    let region = SearchRegion::new(20.0, 60.0, 0.0, 0.5).unwrap();
    let empty = ConeSurfaceSpec::new(2, Vec::new(), Vec::new()).unwrap();
    for spec in [empty, two_cone_model(TAU, TAU, 2.0).unwrap()] {
        let rs = scan_strip(&spec, &region).unwrap();
        assert!(rs.items.is_empty());
        assert_eq!(rs.total_winding_audited, 0);
    }
}

#[test]
fn items_sorted_and_conserved_on_triangle() {
    let rs = scan_with_offset(&triangle_345(), SearchRegion::new(30.0, 50.0, 0.0, 0.5).unwrap(), 0.0);
    assert!(!rs.items.is_empty());
    assert!(rs.items.windows(2).all(|w| w[0].lambda.re <= w[1].lambda.re));
    assert_eq!(rs.total_winding(), rs.total_winding_audited);
    let model = MonodromyModel::new(&triangle_345(), &Tolerances::default()).unwrap();
    for r in rs.items.iter().filter(|r| r.winding == 1) {
        let (f, d) = model.char_value(r.lambda).unwrap();
        assert!(f.norm() < 1e-10 * (1.0 + d.norm()));
        assert!(r.cell.contains(r.lambda));
    }
}

fn match_sets(a: &ResonanceSet, b: &ResonanceSet, tol: f64) -> bool {
    a.items.len() == b.items.len()
        && a.items.iter().all(|x| b.items.iter().any(|y| (x.lambda - y.lambda).norm() < tol && x.winding == y.winding))
}

#[test]
fn grid_shift_leaves_resonances_fixed() {
    // 0.1 π/L0 is 0.2 cell widths
    for (spec, region) in [
        (two_cones(), SearchRegion::new(20.0, 60.0, 0.05, 0.6).unwrap()),
        (triangle_345(), SearchRegion::new(30.0, 50.0, 0.0, 0.5).unwrap()),
    ] {
        let a = scan_with_offset(&spec, region, 0.0);
        let b = scan_with_offset(&spec, region, 0.2);
        assert!(match_sets(&a, &b, 1e-8), "{} vs {}", a.items.len(), b.items.len());
    }
}

#[test]
fn workload_grows_linearly() {
    let spec = triangle_345();
    let evals: Vec<f64> = [20.0, 40.0, 80.0]
        .iter()
        .map(|w| scan_with_offset(&spec, SearchRegion::new(100.0, 100.0 + w, 0.0, 0.3).unwrap(), 0.0).evaluations as f64)
        .collect();
    let r1 = evals[1] / evals[0];
    let r2 = evals[2] / evals[1];
    assert!((1.5..2.5).contains(&r1) && (1.5..2.5).contains(&r2), "{evals:?}");
}

#[test]
fn null_vector_two_cone_symmetric() {
    let tol = Tolerances::default();
    let model = MonodromyModel::new(&two_cones(), &tol).unwrap();
    let z = LadderModel::from_spec(&two_cones(), &tol).unwrap().ladder_root(40).unwrap();
    let v = model.null_vector(z, 1e-6, 3).unwrap();
    let m = v.edge_mass();
    assert!((m["f"] - 0.5).abs() < 1e-8 && (m["fbar"] - 0.5).abs() < 1e-8, "{m:?}");
    assert!((v.norm - 1.0).abs() < 1e-12);
}

#[test]
fn triangle_mode_arrives_along_hypotenuse() {
    let tol = Tolerances::default();
    let spec = triangle_345();
    let model = MonodromyModel::new(&spec, &tol).unwrap();
    let ladder = LadderModel::from_model(&spec, &model, &tol).unwrap();
    let ls = length_scales(&spec, &tol).unwrap();
    let lengths: Vec<f64> = spec.edges().iter().map(|e| e.length).collect();
    let fd = |l: Complex64| model.char_value(l).unwrap();
    let mut arriving = Vec::new();
    for k in [1000, 10_000] {
        let z0 = ladder.ladder_root(k).unwrap();
        let cell = Cell::rect(z0.re - 0.2, z0.re + 0.2, z0.im - 0.3, z0.im + 0.3);
        let r = refine_root(&fd, z0, &cell, &tol).unwrap();
        let v = model.null_vector(r.lambda, tol.null_residual, 0).unwrap();
        let leaving: f64 = ls.maximal_edges.iter().map(|e| v.edge_mass()[e]).sum();
        // the edges leaving the hypotenuse's ends keep a fixed share
        assert!(leaving < 0.5, "{leaving}");
        let u = model.arrival_amplitudes(&v, r.lambda, &lengths).edge_mass();
        arriving.push(ls.maximal_edges.iter().map(|e| u[e]).sum::<f64>());
    }
    assert!(arriving[1] > 0.9 && arriving[1] > arriving[0], "{arriving:?}");
}

#[test]
fn gap_report_two_cone() {
    let tol = Tolerances::default();
    let g = gap_report(&two_cones(), (100.0, 120.0), 0.02, &tol).unwrap();
    assert_eq!(g.gap_band.winding, Some(0));
    assert_eq!(g.shifted_gap_band.winding, Some(0));
    assert_eq!(g.string_band.winding, Some((20.0 * PI / PI).round() as i64));
    assert!((g.string_expected - 20.0).abs() < 1e-12);

    let flat = two_cone_model(TAU, TAU, PI).unwrap();
    let g = gap_report(&flat, (100.0, 120.0), 0.02, &tol).unwrap();
    assert_eq!(g.gap_band.winding, Some(0));
    assert_eq!(g.string_band.winding, Some(0));
}

#[test]
fn first_string_crosses_unshifted_gap_band_at_moderate_re() {
    // the string sits near ν = ν0 + |C_Im| / log Re, about 0.293 at Re 400
    let g = gap_report(&two_cones(), (400.0, 420.0), 0.02, &Tolerances::default()).unwrap();
    assert!(g.gap_band.winding.unwrap() > 0, "{:?}", g.gap_band);
    assert_eq!(g.shifted_gap_band.winding, Some(0));
}

#[test]
fn gap_band_empty_is_reported() {
    let g = gap_report(&triangle_345(), (100.0, 110.0), 0.02, &Tolerances::default()).unwrap();
    assert_eq!(g.gap_band.winding, None);
}

#[test]
fn scan_fit_and_plot_data() {
    let spec = two_cones();
    let rs = scan_strip(&spec, &SearchRegion::new(50.0, 200.0, 0.05, 0.6).unwrap()).unwrap();
    let ladder = LadderModel::from_spec(&spec, &Tolerances::default()).unwrap();
    let fit = fit_log_curve(&rs.lambdas(), 2, PI, 50.0).unwrap();
    assert!((fit.slope + 1.0 / TAU).abs() < 0.02 / TAU);
    let csv = emit_plot_data(&rs, &ladder).unwrap();
    let devs: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs())
        .collect();
    let head = devs[..10].iter().sum::<f64>();
    let tail = devs[devs.len() - 10..].iter().sum::<f64>();
    assert!(tail < head, "{head} {tail}");
}

#[test]
fn ladder_fed_back_is_self_consistent() {
    let m = LadderModel::new(2, PI, Complex64::new(1.0, 0.0)).unwrap();
    let pts: Vec<Complex64> = m.predicted_ladder(50, 500).unwrap().into_iter().map(|p| p.1).collect();
    let fit = fit_log_curve(&pts, 2, PI, 0.0).unwrap();
    assert!((fit.slope + 1.0 / TAU).abs() < 1e-3);
    assert!((fit.spacing_mean - 1.0).abs() < 1e-3);
    assert!(fit.c_re_empirical.min(1.0 - fit.c_re_empirical) < 1e-2);
    assert!(fit.intercept.abs() < 1e-2);
}

#[test]
fn slope_error_shrinks_to_the_right() {
    let m = LadderModel::new(2, PI, Complex64::new(0.01, 0.02)).unwrap();
    let err = |lo: i64, hi: i64| {
        let pts: Vec<Complex64> = m.predicted_ladder(lo, hi).unwrap().into_iter().map(|p| p.1).collect();
        (fit_log_curve(&pts, 2, PI, 0.0).unwrap().slope + 1.0 / TAU).abs()
    };
    assert!(err(1000, 10_000) < err(100, 1000));
}

#[test]
fn ladder_ignores_log_branch_of_product() {
    let c = Complex64::new(-0.3, 0.04);
    let a = LadderModel::new(2, 2.5, c).unwrap();
    let b = LadderModel::new(2, 2.5, c * Complex64::from_polar(1.0, TAU * 3.0)).unwrap();
    let la = a.ladder_in_window(30.0, 60.0, 0.0, 2.0).unwrap();
    let lb = b.ladder_in_window(30.0, 60.0, 0.0, 2.0).unwrap();
    assert_eq!(la.len(), lb.len());
    for (x, y) in la.iter().zip(&lb) {
        assert!((x - y).norm() < 1e-10);
    }
}

/// Scalene triangle with sides `a > b > c`.
fn triangle(a: f64, b: f64, c: f64) -> [[f64; 2]; 3] {
    let x = (a * a + b * b - c * c) / (2.0 * a);
    [[0.0, 0.0], [a, 0.0], [x, (b * b - x * x).sqrt()]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn gap_band_is_empty_of_zeros(a in 1.5f64..2.8, fb in 0.6f64..0.8, fc in 0.3f64..0.9) {
        let b = a * fb;
        let c = (a - b) + fc * (b - (a - b)) * 0.9 + 0.02;
        prop_assume!(c < b - 0.05 && c > a - b + 0.02);
        let spec = build_polygon_double(&triangle(a, b, c)).unwrap();
        let tol = Tolerances::default();
        prop_assume!(validate_hypotheses(&spec, &tol).passed());
        let g = gap_report(&spec, (100.0, 200.0), 0.02, &tol).unwrap();
        prop_assert!(g.gap_band.winding.unwrap_or(0) == 0, "{:?}", g.gap_band);
    }
}
