//! `vstate`: exact and numeric bifurcation analysis of two-fold
//! doubly-connected V-states from the degenerate annuli.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 numerical failure,
//! 64 usage error.

mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use vstate::branch::{full_residual, trace_branch_partial, Sign, TraceConfig};
use vstate::error::Error;
use vstate::exactnum::{eval_brat, find_b2p, Field, Rat, RelElem};
use vstate::linearization::{lambda_2p, multiplier};
use vstate::reduction::{ls_solve_newton, verify, LsConfig, LsResult, Status, VerifyMode};
use vstate::spectral::{boundary_csv, boundary_svg, FourierState};

use report::{b_interval, bracket_strings, fmt_f64, to_json, REPORT_BITS};

const EXIT_MISMATCH: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Largest amplitude step when re-solving a branch sample from the annulus.
const RENDER_T_STEP: f64 = 0.02;

#[derive(Parser, Debug)]
#[command(name = "vstate", version, about = "Degenerate bifurcation of two-fold doubly-connected V-states")]
struct Cli {
    /// Allow p = 5, 6 for verify, trace and render (no acceptance claims).
    #[arg(long, global = true)]
    experimental: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certified bracket of the degenerate radius b_{2p}.
    Roots(RootsArgs),
    /// Determinants of the annulus multipliers M_{2n} at λ_{2p}.
    Multipliers(MultipliersArgs),
    /// Jet of the reduced map F₂ against its closed forms.
    Verify(VerifyArgs),
    /// Continue a nontrivial branch over a range of a.
    Trace(TraceArgs),
    /// Boundary curves of one traced sample.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
struct RootsArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 128)]
    precision_bits: u64,
    /// JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MultipliersArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 50)]
    n_max: u32,
    /// Precision of the numeric enclosures.
    #[arg(long, default_value_t = 64)]
    precision_bits: u64,
    /// JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    p: u32,
    /// Highest total derivative order, 1..=5.
    #[arg(long)]
    order: u32,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,
    /// Fourier blocks of the numeric solves.
    #[arg(long = "n", default_value_t = 32)]
    n: usize,
    /// Quadrature points (power of two, at least 8N).
    #[arg(long = "m")]
    m: Option<usize>,
    /// JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Symbolic,
    Numeric,
    Both,
}

impl From<ModeArg> for VerifyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Symbolic => VerifyMode::Symbolic,
            ModeArg::Numeric => VerifyMode::Numeric,
            ModeArg::Both => VerifyMode::Both,
        }
    }
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long)]
    p: u32,
    /// Branch selector, + or -.
    #[arg(long, allow_hyphen_values = true)]
    sign: String,
    #[arg(long, allow_hyphen_values = true)]
    a_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    a_max: f64,
    #[arg(long)]
    steps: usize,
    /// Branch CSV `a,lambda,t,reduced_residual,full_residual`.
    #[arg(long)]
    out: PathBuf,
    /// JSON summary; defaults to the CSV path with extension `.json`.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long = "n", default_value_t = 32)]
    n: usize,
    #[arg(long = "m", default_value_t = 256)]
    m: usize,
    #[arg(long, default_value = "1e-11")]
    tol_reduced: f64,
    #[arg(long, default_value = "1e-9")]
    tol_full: f64,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// CSV written by `trace`.
    #[arg(long)]
    branch: PathBuf,
    /// Zero-based sample row.
    #[arg(long)]
    index: usize,
    #[arg(long)]
    p: u32,
    /// `shape.svg` or `shape.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Output format; inferred from the extension of `--out` when absent.
    #[arg(long, value_enum)]
    format: Option<ShapeFormat>,
    /// Boundary points per curve.
    #[arg(long, default_value_t = 256)]
    points: usize,
    #[arg(long = "n", default_value_t = 32)]
    n: usize,
    #[arg(long = "m", default_value_t = 256)]
    m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ShapeFormat {
    Csv,
    Svg,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numeric(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Numeric(Error::InvalidArgument(_)) => EXIT_USAGE,
            Failure::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(s) => f.write_str(s),
            Failure::Numeric(e) => write!(f, "{}", e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

type Run = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = init_threads().and_then(|_| dispatch(&cli));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f);
            ExitCode::from(f.code())
        }
    }
}

/// `VSTATE_THREADS` caps the global rayon pool.
fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("VSTATE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("VSTATE_THREADS must be a positive integer, got {:?}", v)))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot size the thread pool: {}", e)))
}

fn dispatch(cli: &Cli) -> Run {
    match &cli.command {
        Command::Roots(a) => roots(a),
        Command::Multipliers(a) => multipliers(a),
        Command::Verify(a) => {
            check_p(a.p, cli.experimental)?;
            run_verify(a)
        }
        Command::Trace(a) => {
            check_p(a.p, cli.experimental)?;
            trace(a)
        }
        Command::Render(a) => {
            check_p(a.p, cli.experimental)?;
            render(a)
        }
    }
}

fn check_p(p: u32, experimental: bool) -> Result<(), Failure> {
    match p {
        2..=4 => Ok(()),
        5 | 6 if experimental => Ok(()),
        5 | 6 => Err(Failure::Usage(format!("p = {} requires --experimental", p))),
        _ => Err(Failure::Usage(format!("p must be in 2..=4, got {}", p))),
    }
}

fn check_p_exact(p: u32) -> Result<(), Failure> {
    if p < 2 {
        return Err(Failure::Usage(format!("p must be at least 2, got {}", p)));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {}", path.display(), e)))
}

/// `|x| < 2^{-k}` with `k = bits(den) - bits(num) - 1`, exact for `x ≠ 0`.
fn log2_bound(x: &Rat) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    Some(x.denom().bits() as i64 - x.numer().bits() as i64 - 1)
}

fn roots(args: &RootsArgs) -> Run {
    check_p_exact(args.p)?;
    if args.precision_bits < 16 {
        return Err(Failure::Usage("--precision-bits must be at least 16".into()));
    }
    let p = args.p;
    let root = find_b2p(p, args.precision_bits);
    let residual = root.midpoint_residual();
    // |rel(mid)| ≤ max|rel'|·|mid - b| ≤ 4p · width/2 on [0, 1].
    let bound = &Rat::from_int(2 * p as i64) * &root.interval.width();
    let ok = residual.abs() <= bound;
    let [lo, hi] = bracket_strings(&root);
    println!("b_{} at {} bits", 2 * p, args.precision_bits);
    println!("  lo       = {}", lo);
    println!("  hi       = {}", hi);
    println!("  value    = {}", fmt_f64(root.to_f64()));
    match log2_bound(&residual) {
        Some(k) => println!("  residual = {} (|r| < 2^-{})", fmt_f64(residual.to_f64()), k),
        None => println!("  residual = 0 (exact)"),
    }
    println!("  check    = {}", if ok { "pass" } else { "FAIL" });
    if let Some(out) = &args.out {
        let doc = json!({
            "p": p,
            "precision_bits": args.precision_bits,
            "b_interval": [lo, hi],
            "b": root.to_f64(),
            "midpoint_residual": residual.to_string(),
            "residual_log2_bound": log2_bound(&residual),
            "residual_bound": bound.to_string(),
            "residual_check": ok,
        });
        write_file(out, &to_json(&doc))?;
    }
    Ok(if ok { 0 } else { EXIT_NUMERIC })
}

#[derive(Serialize)]
struct MultiplierRow {
    n: u32,
    /// `det M_{2n}(λ_{2p})` reduced modulo the relation.
    det_reduced: String,
    enclosure: [f64; 2],
    enclosure_exact: [String; 2],
    zero: bool,
}

fn multipliers(args: &MultipliersArgs) -> Run {
    check_p_exact(args.p)?;
    if args.n_max == 0 {
        return Err(Failure::Usage("--n-max must be positive".into()));
    }
    if args.precision_bits < 16 {
        return Err(Failure::Usage("--precision-bits must be at least 16".into()));
    }
    let p = args.p;
    let root = find_b2p(p, REPORT_BITS);
    let b = RelElem::b(p);
    let lam = lambda_2p(&b);
    let mut rows = Vec::new();
    let mut inconclusive = false;
    println!("det M_2n(λ_{}) at b_{}, reduced modulo b^{} + {} b^2 - {}", 2 * p, 2 * p, 2 * p, p, p - 1);
    println!("{:>4}  {:>24}  {:>24}  {:<8}  reduced", "n", "enclosure lo", "enclosure hi", "status");
    for n in 1..=args.n_max {
        let det = multiplier(2 * n, &lam, &b).det();
        let zero = det.is_zero();
        let enc = eval_brat(&det.to_brat(), &root, args.precision_bits)?;
        let status = if zero {
            "zero"
        } else if enc.contains_zero() {
            inconclusive = true;
            "unknown"
        } else {
            "nonzero"
        };
        let reduced = det.to_bpoly().to_string();
        println!(
            "{:>4}  {:>24}  {:>24}  {:<8}  {}",
            n,
            fmt_f64(enc.lo.to_f64()),
            fmt_f64(enc.hi.to_f64()),
            status,
            reduced
        );
        rows.push(MultiplierRow {
            n,
            det_reduced: reduced,
            enclosure: [enc.lo.to_f64(), enc.hi.to_f64()],
            enclosure_exact: [enc.lo.to_string(), enc.hi.to_string()],
            zero,
        });
    }
    if let Some(out) = &args.out {
        let doc = json!({
            "p": p,
            "lambda": "(1 + b^2)/2",
            "b_interval": bracket_strings(&root),
            "precision_bits": args.precision_bits,
            "rows": rows,
        });
        write_file(out, &to_json(&doc))?;
    }
    Ok(if inconclusive { EXIT_NUMERIC } else { 0 })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), fmt_f64)
}

fn run_verify(args: &VerifyArgs) -> Run {
    let mut ls = LsConfig::with_n(args.n);
    if let Some(m) = args.m {
        ls.m = m;
    }
    let mode = VerifyMode::from(args.mode);
    let rep = verify(args.p, args.order, mode, args.a, &ls)?;
    println!(
        "F₂ jet: p = {}, order {}, mode {}, a = {}",
        rep.p,
        rep.order,
        rep.mode,
        fmt_f64(rep.a)
    );
    println!("b_{} ∈ [{}, {}]", 2 * rep.p, rep.b_interval[0], rep.b_interval[1]);
    println!("exact entries are in √2 units: √2·Σ c_k a^k");
    println!(
        "{:<14}  {:<8}  {:>24}  {:>24}  {:>24}  closed form | computed",
        "entry", "status", "closed form", "symbolic", "numeric"
    );
    for r in &rep.rows {
        let status = match r.status() {
            Status::Match => "match",
            Status::Mismatch => "MISMATCH",
            Status::Computed => "computed",
        };
        let exprs = format!(
            "{} | {}",
            r.anchor.as_deref().unwrap_or("-"),
            r.symbolic.as_deref().unwrap_or("-")
        );
        println!(
            "{:<14}  {:<8}  {:>24}  {:>24}  {:>24}  {}",
            r.name,
            status,
            opt(r.anchor_value),
            opt(r.symbolic_value),
            opt(r.numeric),
            exprs
        );
    }
    let bad = rep.mismatches();
    println!("{} entries, {} mismatches", rep.rows.len(), bad);
    if let Some(out) = &args.out {
        write_file(out, &to_json(&rep))?;
    }
    Ok(if bad > 0 { EXIT_MISMATCH } else { 0 })
}

#[derive(Debug, Serialize, Deserialize)]
struct BranchRow {
    a: f64,
    lambda: f64,
    t: f64,
    reduced_residual: f64,
    full_residual: f64,
}

fn trace(args: &TraceArgs) -> Run {
    let sign: Sign = args.sign.parse()?;
    let cfg = TraceConfig {
        ls: LsConfig {
            n: args.n,
            m: args.m,
            ..LsConfig::default()
        },
        tol_reduced: args.tol_reduced,
        tol_full: args.tol_full,
        ..TraceConfig::default()
    };
    let out = trace_branch_partial(args.p, args.a_min, args.a_max, args.steps, sign, &cfg)?;
    let curve = &out.curve;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["a", "lambda", "t", "reduced_residual", "full_residual"])
        .expect("in-memory CSV");
    for s in &curve.samples {
        w.write_record([s.a, s.lambda, s.t, s.reduced_residual, s.full_residual].map(fmt_f64))
            .expect("in-memory CSV");
    }
    let csv_text = String::from_utf8(w.into_inner().expect("in-memory CSV")).expect("UTF-8");
    write_file(&args.out, &csv_text)?;

    let summary = json!({
        "p": args.p,
        "sign": sign,
        "a_min": args.a_min,
        "a_max": args.a_max,
        "steps": args.steps,
        "b_interval": b_interval(args.p),
        "config": cfg,
        "samples": curve.samples.len(),
        "lost_at": out.lost_at,
        "fitted_exponent": curve.fitted_exponent,
        "fitted_prefactor": curve.fitted_prefactor,
        "r_squared": curve.r_squared,
        "csv": args.out.display().to_string(),
    });
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out.with_extension("json"));
    let text = to_json(&summary);
    write_file(&report_path, &text)?;
    print!("{}", text);
    match out.lost_at {
        Some(a) => {
            eprintln!(
                "error: branch lost at a = {} after {} samples; partial CSV written",
                fmt_f64(a),
                curve.samples.len()
            );
            Ok(EXIT_NUMERIC)
        }
        None => Ok(0),
    }
}

fn read_branch(path: &Path) -> Result<Vec<BranchRow>, Failure> {
    let mut rd = csv::Reader::from_path(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {}", path.display(), e)))?;
    rd.deserialize()
        .collect::<Result<Vec<BranchRow>, _>>()
        .map_err(|e| Failure::Usage(format!("malformed branch CSV {}: {}", path.display(), e)))
}

/// Re-solve the range equations at a branch sample, raising `t` from 0 in
/// steps of at most [`RENDER_T_STEP`].
fn resolve_sample(p: u32, row: &BranchRow, cfg: &LsConfig) -> vstate::error::Result<LsResult> {
    let k = ((row.t.abs() / RENDER_T_STEP).ceil() as usize).max(1);
    let mut jac = None;
    let mut start: Option<FourierState> = None;
    let mut last = None;
    for i in 1..=k {
        let t = row.t * i as f64 / k as f64;
        let r = ls_solve_newton(row.lambda, t, row.a, p, cfg, start.as_ref(), &mut jac)?;
        start = Some(r.phi.clone());
        last = Some(r);
    }
    Ok(last.expect("at least one step"))
}

fn render(args: &RenderArgs) -> Run {
    let format = match args.format {
        Some(f) => f,
        None => match args.out.extension().and_then(|e| e.to_str()) {
            Some("svg") => ShapeFormat::Svg,
            Some("csv") => ShapeFormat::Csv,
            _ => return Err(Failure::Usage("cannot infer format from --out; pass --format csv|svg".into())),
        },
    };
    if args.points < 8 {
        return Err(Failure::Usage("--points must be at least 8".into()));
    }
    let rows = read_branch(&args.branch)?;
    let row = rows.get(args.index).ok_or_else(|| {
        Failure::Usage(format!(
            "index {} out of range ({} samples in {})",
            args.index,
            rows.len(),
            args.branch.display()
        ))
    })?;
    let cfg = LsConfig {
        n: args.n,
        m: args.m,
        ..LsConfig::default()
    };
    let sol = resolve_sample(args.p, row, &cfg)?;
    let state = sol.state();
    let full = full_residual(row.lambda, &state, cfg.m)?;
    let text = match format {
        ShapeFormat::Csv => boundary_csv(&state, args.points),
        ShapeFormat::Svg => boundary_svg(&state, args.points),
    };
    write_file(&args.out, &text)?;
    println!(
        "sample {}: a = {}, lambda = {}, t = {}",
        args.index,
        fmt_f64(row.a),
        fmt_f64(row.lambda),
        fmt_f64(row.t)
    );
    println!(
        "re-solved: range residual = {}, full residual = {} (branch file: {})",
        fmt_f64(sol.residual),
        fmt_f64(full),
        fmt_f64(row.full_residual)
    );
    println!("wrote {}", args.out.display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn p_gate() {
        assert!(check_p(3, false).is_ok());
        assert_eq!(check_p(5, false).unwrap_err().code(), EXIT_USAGE);
        assert!(check_p(6, true).is_ok());
        assert!(check_p(7, true).is_err());
    }

    #[test]
    fn log2_bound_is_exact() {
        assert_eq!(log2_bound(&Rat::new(1, 8)), Some(2));
        assert_eq!(log2_bound(&Rat::new(3, 8)), Some(1));
        assert_eq!(log2_bound(&Rat::zero()), None);
    }

    #[test]
    fn failure_codes() {
        assert_eq!(Failure::Numeric(Error::BranchLost(1e-3)).code(), EXIT_NUMERIC);
        assert_eq!(Failure::Numeric(Error::InvalidArgument("x".into())).code(), EXIT_USAGE);
    }
}
