//! `coneres` command-line driver.
//!
//! Exit status is 0 on success, 1 on unusable input, and 2 when the surface
//! breaks a standing hypothesis or a requested verification fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use coneres::asymptotics::{fit_resonances, gap_report, LadderModel};
use coneres::geometry::{build_polygon_double, length_scales, load_surface, validate_hypotheses, HypothesisReport};
use coneres::report::{emit_plot_data, fit_summary_text, resonances_csv, verify_scan, ScanReport, VerificationCheck};
use coneres::resonances::{default_grid, scan_model, ScanOptions};
use coneres::statphase::{builtin_cases, default_nonstationary_grid, nonstationary_decay, order_check};
use coneres::{ConeSurfaceSpec, DiffractionEvaluator, MonodromyModel, SearchRegion, Tolerances};

const EXIT_INPUT: u8 = 1;
const EXIT_FAILED: u8 = 2;

/// Fitted exponents must land this close to the expected order.
const ORDER_TOL: f64 = 0.3;
/// Smallest decay exponent accepted for a bump away from the critical point.
const NONSTATIONARY_MIN: f64 = 3.0;
/// Half-width of the gap band below `Λ`, and offset above the first string.
const GAP_DELTA: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(name = "coneres", version, about = "Scattering resonances of conic surfaces")]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate resonances in a log strip and write tables and a report.
    Scan(ScanArgs),
    /// Evaluate the diffraction coefficient of a flat cone.
    Diffraction(DiffractionArgs),
    /// Compare stationary-phase expansions against quadrature.
    StatphaseCheck(StatphaseArgs),
    /// Check a surface against the standing hypotheses.
    Validate(InputArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Surface document (JSON).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Convex polygon vertices, counterclockwise, as `[[x, y], ...]` or
    /// `{"polygon": [[x, y], ...]}`.
    #[arg(long, value_name = "PATH")]
    polygon: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[command(flatten)]
    source: InputArgs,
    /// Range of Re λ.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [50.0, 200.0], allow_negative_numbers = true)]
    re: Vec<f64>,
    /// Range of ν = -Im λ / log Re λ.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.0, 0.5], allow_negative_numbers = true)]
    nu: Vec<f64>,
    /// Fit the ladder law and check the gap; exit 2 on any failed check.
    #[arg(long)]
    verify: bool,
    /// Directory for resonances.csv, report.json, fit_summary.txt and plot_data.csv.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Seed for null-vector extraction.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DiffractionArgs {
    /// Cone angle A.
    #[arg(long, allow_negative_numbers = true)]
    angle: f64,
    /// Angle between incoming and outgoing directions.
    #[arg(long, allow_negative_numbers = true)]
    dtheta: f64,
}

#[derive(Debug, Args)]
struct StatphaseArgs {
    /// Only run cases truncated at this order.
    #[arg(long, value_name = "N")]
    order: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_INPUT) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .context("starting the worker pool")?;
    let tol = Tolerances::from_env().context("loading tolerance overrides")?;
    match cli.command {
        Command::Scan(args) => scan(&args, &tol),
        Command::Diffraction(args) => diffraction(&args),
        Command::StatphaseCheck(args) => statphase_check(&args),
        Command::Validate(args) => validate(&args, &tol),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load(source: &InputArgs) -> Result<ConeSurfaceSpec> {
    if let Some(path) = &source.input {
        return load_surface(&read(path)?).with_context(|| format!("loading surface {}", path.display()));
    }
    let Some(path) = &source.polygon else {
        bail!("one of --input or --polygon is required");
    };
    let value: serde_json::Value = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let vertices = match value {
        serde_json::Value::Object(mut map) => map
            .remove("polygon")
            .with_context(|| format!("{} has no `polygon` field", path.display()))?,
        other => other,
    };
    let vertices: Vec<[f64; 2]> =
        serde_json::from_value(vertices).with_context(|| format!("{}: polygon must be a list of [x, y] pairs", path.display()))?;
    build_polygon_double(&vertices).with_context(|| format!("building polygon double from {}", path.display()))
}

fn report_hypotheses(h: &HypothesisReport) -> bool {
    for c in h.failures() {
        if c.witnesses.is_empty() {
            eprintln!("hypothesis {} violated: {}", c.name, c.detail);
        } else {
            eprintln!("hypothesis {} violated: {} (witnesses: {})", c.name, c.detail, c.witnesses.join(", "));
        }
    }
    h.passed()
}

fn report_checks(checks: &[VerificationCheck]) {
    for c in checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "check {} failed: observed {}, expected {} within {} ({})",
            c.name, c.observed, c.expected, c.tolerance, c.detail
        );
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn scan(args: &ScanArgs, tol: &Tolerances) -> Result<u8> {
    let spec = load(&args.source)?;
    let region = SearchRegion::new(args.re[0], args.re[1], args.nu[0], args.nu[1]).context("invalid search region")?;
    let hypotheses = validate_hypotheses(&spec, tol);
    if !report_hypotheses(&hypotheses) {
        return Ok(EXIT_FAILED);
    }
    let scales = length_scales(&spec, tol).context("computing length scales")?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    let model = MonodromyModel::new(&spec, tol).context("building the monodromy model")?;
    let ladder = LadderModel::from_model(&spec, &model, tol).ok();
    let options = ScanOptions {
        grid: default_grid(&spec, &model, tol),
        tolerances: tol.clone(),
        grid_offset: 0.0,
        null_seed: args.seed,
        compute_null_mass: true,
    };
    let rs = scan_model(&model, &region, &options).context("scanning the strip")?;
    let fit = ladder.as_ref().and_then(|l| fit_resonances(&rs, l, tol).ok());

    let mut gap = None;
    let mut checks = Vec::new();
    if args.verify {
        match gap_report(&spec, (region.re_min, region.re_max), GAP_DELTA, tol) {
            Ok(g) => gap = Some(g),
            Err(e) => checks.push(VerificationCheck {
                name: "gap".into(),
                passed: false,
                expected: 0.0,
                observed: f64::NAN,
                tolerance: 0.0,
                detail: format!("gap band could not be counted: {e}"),
            }),
        }
        checks.splice(0..0, verify_scan(&rs, ladder.as_ref(), fit.as_ref(), gap.as_ref(), tol));
    }

    let report = ScanReport {
        dimension: spec.dimension(),
        edges: spec.num_edges(),
        length_scales: scales,
        hypotheses,
        ladder,
        region,
        total_winding_audited: rs.total_winding_audited,
        evaluations: rs.evaluations,
        resonances: rs.items.clone(),
        fit,
        gap,
        checks,
        tolerances: tol.clone(),
    };
    write(&args.out, "resonances.csv", &resonances_csv(&rs))?;
    write(&args.out, "report.json", &report.to_json()?)?;
    let summary = fit_summary_text(&report);
    write(&args.out, "fit_summary.txt", &summary)?;
    if let (Some(l), false) = (&ladder, rs.items.is_empty()) {
        write(&args.out, "plot_data.csv", &emit_plot_data(&rs, l)?)?;
    }
    print!("{summary}");

    if args.verify && !report.passed() {
        report_checks(&report.checks);
        return Ok(EXIT_FAILED);
    }
    Ok(0)
}

/// `x` to 15 significant digits.
fn sig15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (14 - exp) as usize, x)
    } else {
        format!("{x:.14e}")
    }
}

fn diffraction(args: &DiffractionArgs) -> Result<u8> {
    let ev = DiffractionEvaluator::flat(args.angle).context("invalid cone angle")?;
    let d = ev
        .coefficient(args.dtheta)
        .with_context(|| format!("evaluating D at dtheta = {}", args.dtheta))?;
    println!("re {}", sig15(d.re));
    println!("im {}", sig15(d.im));
    Ok(0)
}

fn statphase_check(args: &StatphaseArgs) -> Result<u8> {
    let mut ok = true;
    println!("{:<14}{:>3}{:>3}{:>12}{:>10}  status", "case", "N", "n", "slope", "expected");
    for case in builtin_cases().into_iter().filter(|c| args.order.is_none_or(|n| n == c.order)) {
        let chk = order_check(case.family, &(case.hs)(), case.order)
            .with_context(|| format!("order check {} N = {}", case.name, case.order))?;
        let passed = chk.slope.is_some() && chk.within(ORDER_TOL);
        ok &= passed;
        let slope = chk.slope.map_or("floor".to_string(), |s| format!("{s:.4}"));
        println!(
            "{:<14}{:>3}{:>3}{:>12}{:>10.4}  {}",
            case.name,
            chk.order,
            chk.n,
            slope,
            chk.expected,
            if passed { "PASS" } else { "FAIL" }
        );
    }
    if args.order.is_none() {
        let (slope, _) = nonstationary_decay(&default_nonstationary_grid()).context("nonstationary decay")?;
        let passed = slope > NONSTATIONARY_MIN;
        ok &= passed;
        println!(
            "{:<14}{:>3}{:>3}{:>12.4}{:>10}  {}",
            "nonstationary",
            "-",
            1,
            slope,
            format!(">{NONSTATIONARY_MIN}"),
            if passed { "PASS" } else { "FAIL" }
        );
    }
    Ok(if ok { 0 } else { EXIT_FAILED })
}

fn validate(args: &InputArgs, tol: &Tolerances) -> Result<u8> {
    let spec = load(args)?;
    let hypotheses = validate_hypotheses(&spec, tol);
    println!("dimension {}, {} directed edges", spec.dimension(), spec.num_edges());
    if let Ok(ls) = length_scales(&spec, tol) {
        println!("L0 {}  L' {}  gap edge {}", ls.l0, ls.lprime.map_or("undefined".into(), |l| l.to_string()), ls.lambda);
        println!("maximal edges {}", ls.maximal_edges.join(", "));
    }
    for c in &hypotheses.checks {
        println!("{:<18}{}", c.name, if c.passed { "ok" } else { "FAILED" });
    }
    Ok(if report_hypotheses(&hypotheses) { 0 } else { EXIT_FAILED })
}
