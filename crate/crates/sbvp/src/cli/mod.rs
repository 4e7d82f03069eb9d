//! Command-line frontend: classification, hypothesis checks, lambda-window
//! search, the monotone solve with CSV outputs, the finite-difference
//! oracle, and kernel grid dumps.
//!
//! Exit codes: 0 success, 2 hypothesis/validation failure, 3 non-convergence,
//! 4 config error.

pub mod config;
pub mod expr;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::classify::{
    admissible_lambda_window_with_floor, check_hypotheses, classify_alpha, FySign, LambdaSign,
    LAMBDA_SCAN_FLOOR,
};
use crate::error::Error;
use crate::green::{build_kernel_with, kernel_sign_report};
use crate::iterate::{
    solve_enclosure, theorem_inequality_holds, validate_lower, validate_upper, SolveReport,
    SolverOptions,
};
use crate::model::{interp, make_grid, GridFunction, ProblemSpec};
use crate::oracle::{fd_solve, FdConfig};
use config::{build_problem, parse_config, LambdaSpec, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

const BUNDLED_EXAMPLES: [(&str, &str); 4] = [
    ("ex1", include_str!("../../configs/ex1.cfg")),
    ("ex2", include_str!("../../configs/ex2.cfg")),
    ("ex3", include_str!("../../configs/ex3.cfg")),
    ("ex4", include_str!("../../configs/ex4.cfg")),
];

#[derive(Parser)]
#[command(
    name = "sbvp",
    about = "Monotone Green's-function solver for nonlinear three-point singular BVPs",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

fn parse_fy_sign(s: &str) -> Result<FySign, String> {
    match s.to_ascii_lowercase().as_str() {
        "pos" | "positive" | "+" => Ok(FySign::Positive),
        "neg" | "negative" | "-" => Ok(FySign::Negative),
        other => Err(format!("expected pos or neg, got `{other}`")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify alpha and the df/dy sign into (case, regime, hypothesis).
    Classify {
        #[arg(long)]
        alpha: f64,
        #[arg(long = "fy-sign", value_parser = parse_fy_sign)]
        fy_sign: FySign,
    },
    /// Evaluate the hypotheses at fixed (alpha, lambda, delta, eta).
    Check {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        eta: f64,
    },
    /// Search the admissible lambda window for given M.
    LambdaWindow {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        m: f64,
        #[arg(long = "fy-sign", value_parser = parse_fy_sign)]
        fy_sign: FySign,
        /// Scan floor for negative lambda.
        #[arg(long, default_value_t = LAMBDA_SCAN_FLOOR, allow_hyphen_values = true)]
        floor: f64,
    },
    /// Run the monotone iteration from both sides of a configured problem.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Solution CSV (x, u_star, v_star, oracle, |u-oracle|); overrides
        /// the config's [output] solution path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace CSV (iter, side, residual, step_norm, min_gap).
        #[arg(long = "trace-out")]
        trace_out: Option<PathBuf>,
        /// Mesh for the finite-difference oracle column.
        #[arg(long = "oracle-n", default_value_t = 1024)]
        oracle_n: usize,
    },
    /// Solve with the finite-difference oracle only.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1024)]
        n: usize,
    },
    /// Dump a Green's kernel on a grid (CSV: x, t, G).
    Green {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        eta: f64,
        /// Grid resolution per axis.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value = "kernel.csv")]
        out: PathBuf,
        /// Build the kernel even when the governing hypothesis fails
        /// (exploration only; solve refuses such kernels).
        #[arg(long)]
        force: bool,
    },
    /// Run the bundled example problems.
    Examples {
        /// Run a single example (ex1..ex4); default runs all.
        #[arg(long)]
        name: Option<String>,
        /// Directory for the CSV outputs.
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        /// Skip CSV outputs.
        #[arg(long)]
        no_output: bool,
    },
}

/// 17 significant digits, enough to reload bit-faithfully.
fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::HypothesisViolation { .. }
        | Error::MonotonicityBreach { .. }
        | Error::EnclosureViolation { .. }
        | Error::ResonantLambda { .. } => EXIT_HYPOTHESIS,
        Error::IntegrationFailure { .. } | Error::NewtonDiverged(_) | Error::SingularJacobian => {
            EXIT_NONCONVERGENCE
        }
        _ => EXIT_CONFIG,
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code_for(e)
}

/// Entry point used by `main` and the CLI tests.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            return EXIT_CONFIG;
        }
    };
    match cli.cmd {
        Command::Classify { alpha, fy_sign } => cmd_classify(alpha, fy_sign),
        Command::Check { alpha, lambda, delta, eta } => cmd_check(alpha, lambda, delta, eta),
        Command::LambdaWindow { alpha, delta, eta, m, fy_sign, floor } => {
            cmd_window(alpha, delta, eta, m, fy_sign, floor)
        }
        Command::Solve { config, out, trace_out, oracle_n } => {
            cmd_solve(&config, out.as_deref(), trace_out.as_deref(), oracle_n)
        }
        Command::Oracle { config, out, n } => cmd_oracle(&config, out.as_deref(), n),
        Command::Green { alpha, lambda, delta, eta, grid, out, force } => {
            cmd_green(alpha, lambda, delta, eta, grid, &out, force)
        }
        Command::Examples { name, dir, no_output } => cmd_examples(name.as_deref(), &dir, no_output),
    }
}

fn cmd_classify(alpha: f64, fy_sign: FySign) -> i32 {
    match classify_alpha(alpha, fy_sign) {
        Ok((case, regime, hyp)) => {
            println!("{case} {regime} {hyp}");
            EXIT_OK
        }
        Err(e) => fail(&e),
    }
}

fn cmd_check(alpha: f64, lambda: f64, delta: f64, eta: f64) -> i32 {
    match check_hypotheses(alpha, lambda, delta, eta) {
        Ok(report) => {
            println!("case = {}, nu = {}", report.case, report.nu);
            for e in &report.evaluated {
                println!(
                    "{}: holds={} zero_gap={:.6e} cond1={:.6e} cond2={:.6e} delta_ok={}",
                    e.name, e.holds, e.margins.zero_gap, e.margins.cond1, e.margins.cond2,
                    e.margins.delta_ok
                );
            }
            match report.governing() {
                Some(g) => {
                    println!("governing hypothesis: {}", g.name);
                    EXIT_OK
                }
                None => {
                    eprintln!("no hypothesis holds at lambda = {lambda}");
                    EXIT_HYPOTHESIS
                }
            }
        }
        Err(e) => fail(&e),
    }
}

fn cmd_window(alpha: f64, delta: f64, eta: f64, m: f64, fy_sign: FySign, floor: f64) -> i32 {
    let (_, regime, _) = match classify_alpha(alpha, fy_sign) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let sign = match fy_sign {
        FySign::Positive => LambdaSign::Positive,
        FySign::Negative => LambdaSign::Negative,
    };
    match admissible_lambda_window_with_floor(alpha, delta, eta, m, regime, sign, floor) {
        Ok(w) => {
            if w.nonempty {
                println!(
                    "window: [{}, {}] hypothesis={} regime={regime}",
                    csv_float(w.lo),
                    csv_float(w.hi),
                    w.hypothesis
                );
                println!("suggested lambda = {}", csv_float(w.midpoint()));
                EXIT_OK
            } else {
                eprintln!("no admissible lambda window (hypothesis {})", w.hypothesis);
                EXIT_HYPOTHESIS
            }
        }
        Err(e) => fail(&e),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, i32> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_CONFIG
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_CONFIG
    })
}

/// Sign of df/dy sampled over the rectangle spanned by the initial iterates.
fn infer_fy_sign(p: &ProblemSpec) -> FySign {
    let mut max_fy = f64::NEG_INFINITY;
    for i in 0..=6 {
        let x = i as f64 / 6.0;
        let (a, b) = (p.lower0.value(x), p.upper0.value(x));
        let (lo, hi) = (a.min(b), a.max(b));
        for j in 0..=6 {
            let y = lo + (hi - lo) * j as f64 / 6.0;
            let h = 1e-6 * y.abs().max(1.0);
            let fy = (p.f(x, y + h) - p.f(x, y - h)) / (2.0 * h);
            if fy.is_finite() {
                max_fy = max_fy.max(fy);
            }
        }
    }
    if max_fy > 1e-12 {
        FySign::Positive
    } else {
        FySign::Negative
    }
}

fn resolve_lambda(cfg: &RunConfig, p: &ProblemSpec) -> Result<f64, i32> {
    match cfg.solver.lambda {
        LambdaSpec::Fixed(v) => Ok(v),
        LambdaSpec::Auto => {
            let fy = infer_fy_sign(p);
            let (_, regime, _) = classify_alpha(p.alpha, fy).map_err(|e| fail(&e))?;
            let sign = match fy {
                FySign::Positive => LambdaSign::Positive,
                FySign::Negative => LambdaSign::Negative,
            };
            let w = admissible_lambda_window_with_floor(
                p.alpha,
                p.delta,
                p.eta,
                p.f_y_bound,
                regime,
                sign,
                LAMBDA_SCAN_FLOOR,
            )
            .map_err(|e| fail(&e))?;
            if !w.nonempty {
                eprintln!("error: no admissible lambda window for automatic selection");
                return Err(EXIT_HYPOTHESIS);
            }
            let lam = w.midpoint();
            println!("auto lambda = {} from window [{}, {}]", csv_float(lam), csv_float(w.lo), csv_float(w.hi));
            Ok(lam)
        }
    }
}

struct SolveArtifacts {
    report: SolveReport,
    oracle: GridFunction,
    oracle_diff: f64,
    lambda: f64,
}

fn run_solve_pipeline(cfg: &RunConfig, oracle_n: usize) -> Result<SolveArtifacts, i32> {
    let p = build_problem(cfg).map_err(|e| fail(&e))?;
    let grid = make_grid(cfg.solver.grid_n, p.eta).map_err(|e| fail(&e))?;

    let vu = validate_upper(&p, &grid);
    if !vu.valid {
        eprintln!(
            "error: upper solution fails validation (margin {:.3e} at x = {})",
            vu.worst_margin, vu.location
        );
        return Err(EXIT_HYPOTHESIS);
    }
    let vl = validate_lower(&p, &grid);
    if !vl.valid {
        eprintln!(
            "error: lower solution fails validation (margin {:.3e} at x = {})",
            vl.worst_margin, vl.location
        );
        return Err(EXIT_HYPOTHESIS);
    }

    let lambda = resolve_lambda(cfg, &p)?;
    let fy = if lambda > 0.0 { FySign::Positive } else { FySign::Negative };
    let (case, regime, hyp) = classify_alpha(p.alpha, fy).map_err(|e| fail(&e))?;
    println!("classification: {case} {regime} {hyp}");
    if !theorem_inequality_holds(regime, lambda, p.f_y_bound) {
        eprintln!(
            "warning: lambda = {lambda} is outside the {regime} theorem inequality for M = {}; \
             monotonicity may fail",
            p.f_y_bound
        );
    }

    let opts = SolverOptions {
        grid_n: cfg.solver.grid_n,
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        ..SolverOptions::default()
    };
    let report = solve_enclosure(&p, lambda, &opts).map_err(|e| fail(&e))?;

    let fd_cfg = FdConfig::with_n(oracle_n.max(16));
    let ogrid = make_grid(fd_cfg.n, p.eta).map_err(|e| fail(&e))?;
    let init = GridFunction::from_fn(ogrid, |x| {
        0.5 * (p.upper0.value(x) + p.lower0.value(x))
    })
    .map_err(|e| fail(&e))?;
    let oracle = fd_solve(&p, &fd_cfg, &init).map_err(|e| fail(&e))?;

    let mut oracle_diff = 0.0_f64;
    for (&x, &uv) in report.u_star.grid().nodes().iter().zip(report.u_star.values()) {
        let ov = interp(&oracle, x).map_err(|e| fail(&e))?;
        oracle_diff = oracle_diff.max((uv - ov).abs());
    }
    Ok(SolveArtifacts { report, oracle, oracle_diff, lambda })
}

fn write_solution_csv(path: &Path, art: &SolveArtifacts) -> Result<(), i32> {
    let mut out = String::from("x,u_star,v_star,oracle,|u-oracle|\n");
    for (i, &x) in art.report.u_star.grid().nodes().iter().enumerate() {
        let u = art.report.u_star.values()[i];
        let v = art.report.v_star.values()[i];
        let o = interp(&art.oracle, x).unwrap_or(f64::NAN);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_float(x),
            csv_float(u),
            csv_float(v),
            csv_float(o),
            csv_float((u - o).abs())
        );
    }
    std::fs::write(path, out).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_CONFIG
    })
}

fn write_trace_csv(path: &Path, art: &SolveArtifacts) -> Result<(), i32> {
    let mut out = String::from("iter,side,residual,step_norm,min_gap\n");
    for trace in [&art.report.traces.0, &art.report.traces.1] {
        for i in 0..trace.step_norms.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                trace.side,
                csv_float(trace.residuals[i + 1]),
                csv_float(trace.step_norms[i]),
                csv_float(trace.min_gaps[i])
            );
        }
    }
    std::fs::write(path, out).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_CONFIG
    })
}

fn summarize(art: &SolveArtifacts) -> i32 {
    let (u, v) = (&art.report.traces.0, &art.report.traces.1);
    println!(
        "upper trace: {} iterations, converged = {}, monotone = {}, final residual = {:.3e}",
        u.iterations(),
        u.converged,
        u.monotone_ok,
        u.residuals.last().unwrap()
    );
    println!(
        "lower trace: {} iterations, converged = {}, monotone = {}, final residual = {:.3e}",
        v.iterations(),
        v.converged,
        v.monotone_ok,
        v.residuals.last().unwrap()
    );
    println!(
        "lambda = {}, enclosure width = {:.3e}, unique_claimed = {}, sup|u - oracle| = {:.3e}",
        csv_float(art.lambda),
        art.report.enclosure_width,
        art.report.unique_claimed,
        art.oracle_diff
    );
    if u.converged && v.converged {
        EXIT_OK
    } else {
        eprintln!("error: iteration did not converge within max_iter");
        EXIT_NONCONVERGENCE
    }
}

fn cmd_solve(
    config: &Path,
    out: Option<&Path>,
    trace_out: Option<&Path>,
    oracle_n: usize,
) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let art = match run_solve_pipeline(&cfg, oracle_n) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let solution_path = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.solution.as_ref().map(PathBuf::from));
    if let Some(p) = solution_path {
        if let Err(code) = write_solution_csv(&p, &art) {
            return code;
        }
        println!("solution csv: {}", p.display());
    }
    let trace_path = trace_out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.trace.as_ref().map(PathBuf::from));
    if let Some(p) = trace_path {
        if let Err(code) = write_trace_csv(&p, &art) {
            return code;
        }
        println!("trace csv: {}", p.display());
    }
    summarize(&art)
}

fn cmd_oracle(config: &Path, out: Option<&Path>, n: usize) -> i32 {
    let cfg = match load_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let p = match build_problem(&cfg) {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    let fd_cfg = match FdConfig::new(n, 1e-10, 50, 1e-6) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let grid = match make_grid(fd_cfg.n, p.eta) {
        Ok(g) => g,
        Err(e) => return fail(&e),
    };
    let init = match GridFunction::from_fn(grid, |x| 0.5 * (p.upper0.value(x) + p.lower0.value(x)))
    {
        Ok(g) => g,
        Err(e) => return fail(&e),
    };
    let sol = match fd_solve(&p, &fd_cfg, &init) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    println!(
        "oracle solved on {} nodes, residual = {:.3e}",
        sol.grid().len(),
        crate::oracle::residual(&p, &sol)
    );
    if let Some(path) = out {
        let mut text = String::from("x,oracle\n");
        for (&x, &v) in sol.grid().nodes().iter().zip(sol.values()) {
            let _ = writeln!(text, "{},{}", csv_float(x), csv_float(v));
        }
        if let Err(e) = std::fs::write(path, text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_CONFIG;
        }
        println!("oracle csv: {}", path.display());
    }
    EXIT_OK
}

fn cmd_green(
    alpha: f64,
    lambda: f64,
    delta: f64,
    eta: f64,
    grid: usize,
    out: &Path,
    force: bool,
) -> i32 {
    let k = match build_kernel_with(alpha, lambda, delta, eta, force) {
        Ok(k) => k,
        Err(e) => return fail(&e),
    };
    if !k.hypothesis_ok {
        eprintln!("warning: governing hypothesis {} fails; kernel built with --force", k.hypothesis);
    }
    let m = grid.max(11);
    let mut text = String::from("x,t,G\n");
    const T_FLOOR: f64 = 1e-6;
    for i in 0..m {
        let x = i as f64 / (m - 1) as f64;
        let section = match k.at(x) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        for j in 0..m {
            let t = T_FLOOR + (1.0 - T_FLOOR) * j as f64 / (m - 1) as f64;
            match section.eval(t) {
                Ok(g) => {
                    let _ = writeln!(text, "{},{},{}", csv_float(x), csv_float(t), csv_float(g));
                }
                Err(e) => return fail(&e),
            }
        }
    }
    if let Err(e) = std::fs::write(out, text) {
        eprintln!("error: cannot write {}: {e}", out.display());
        return EXIT_CONFIG;
    }
    match kernel_sign_report(&k, m) {
        Ok(rep) => println!(
            "kernel {} (expectation {:?}): worst sign violation {:.3e} at (x,t) = ({}, {})",
            k.hypothesis, k.sign_expectation, rep.worst, rep.at_x, rep.at_t
        ),
        Err(e) => return fail(&e),
    }
    println!("kernel csv: {}", out.display());
    EXIT_OK
}

fn cmd_examples(name: Option<&str>, dir: &Path, no_output: bool) -> i32 {
    let selected: Vec<_> = match name {
        Some(n) => {
            let Some(found) = BUNDLED_EXAMPLES.iter().find(|(id, _)| *id == n) else {
                eprintln!(
                    "error: unknown example `{n}`; available: {}",
                    BUNDLED_EXAMPLES.iter().map(|(id, _)| *id).collect::<Vec<_>>().join(", ")
                );
                return EXIT_CONFIG;
            };
            vec![*found]
        }
        None => BUNDLED_EXAMPLES.to_vec(),
    };
    if !no_output {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return EXIT_CONFIG;
        }
    }
    let mut worst = EXIT_OK;
    for (id, text) in selected {
        println!("--- {id} ---");
        let cfg = match parse_config(text) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        };
        let art = match run_solve_pipeline(&cfg, 1024) {
            Ok(a) => a,
            Err(code) => {
                worst = worst.max(code);
                continue;
            }
        };
        if !no_output {
            if let Some(sol) = &cfg.output.solution {
                let path = dir.join(sol);
                if let Err(code) = write_solution_csv(&path, &art) {
                    return code;
                }
                println!("solution csv: {}", path.display());
            }
            if let Some(tr) = &cfg.output.trace {
                let path = dir.join(tr);
                if let Err(code) = write_trace_csv(&path, &art) {
                    return code;
                }
                println!("trace csv: {}", path.display());
            }
        }
        worst = worst.max(summarize(&art));
    }
    worst
}

/// Bundled example config text, for tests and documentation.
pub fn bundled_example(name: &str) -> Option<&'static str> {
    BUNDLED_EXAMPLES.iter().find(|(id, _)| *id == name).map(|(_, text)| *text)
}
