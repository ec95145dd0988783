//! Command-line front end: validate, solve, check, and curve-dump commands
//! over JSON problem documents.
//!
//! Exit codes: 0 success, 1 parse/usage error, 2 infeasible, 3 ill-posed,
//! 4 numerical failure, 5 certificate failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sepsolve_cli::schema::{ProblemFile, SolutionFile};
use sepsolve::{
    kkt_certificate, reduce, validate, Problem, Reduced, SolveOptions, SolverError, Tolerances,
};

#[derive(Parser)]
#[command(
    name = "sepsolve",
    version,
    about = "Solve separable convex problems with prefix-sum and box constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check feasibility and well-posedness of a problem file.
    Validate { path: PathBuf },
    /// Solve a problem file and emit a solution document.
    Solve {
        path: PathBuf,
        /// Skip stage equations that provably cannot win their stage.
        #[arg(long)]
        lazy: bool,
        /// Include the per-stage trace in the solution document.
        #[arg(long)]
        trace: bool,
        /// Relative bisection width on the multiplier.
        #[arg(long = "tol-root", value_name = "R")]
        tol_root: Option<f64>,
        /// Feasibility slack.
        #[arg(long = "tol-feas", value_name = "F")]
        tol_feas: Option<f64>,
        /// Write the solution document here instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Verify a solution document against its problem via KKT residuals.
    Check {
        problem: PathBuf,
        solution: PathBuf,
        /// Certificate residual threshold.
        #[arg(long = "tol-cert", value_name = "C")]
        tol_cert: Option<f64>,
    },
    /// Sample the per-variable responses and cumulative sums as CSV.
    Curves {
        path: PathBuf,
        /// Multiplier range "a:b" (a ≥ 0).
        #[arg(long, default_value = "0:6")]
        range: String,
        /// Number of rows, sampled uniformly over the range.
        #[arg(long, default_value_t = 601)]
        samples: usize,
        /// Stage start: cumulative sums run over indices after this one.
        #[arg(long, default_value_t = 0)]
        stage: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let ok = matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    let code = match cli.command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Solve { path, lazy, trace, tol_root, tol_feas, out } => {
            cmd_solve(&path, lazy, trace, tol_root, tol_feas, out.as_deref())
        }
        Command::Check { problem, solution, tol_cert } => {
            cmd_check(&problem, &solution, tol_cert)
        }
        Command::Curves { path, range, samples, stage } => {
            cmd_curves(&path, &range, samples, stage)
        }
    };
    ExitCode::from(code)
}

fn fail(message: &str, code: u8) -> u8 {
    eprintln!("error: {message}");
    code
}

fn solver_exit_code(err: &SolverError) -> u8 {
    match err {
        SolverError::Infeasible { .. } => 2,
        SolverError::IllPosed(_) => 3,
        SolverError::Domain(_) | SolverError::BracketFailure(_) => 4,
        SolverError::InvalidProblem(_) | SolverError::EmptyFeasibleSet => 1,
    }
}

fn load_problem(path: &Path) -> Result<Problem, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ProblemFile::parse(&text)?.to_problem()
}

/// Four significant digits for human-readable summaries.
fn sig4(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x.is_finite() && x.abs() >= 1e-3 && x.abs() < 1e4 {
        let digits = 3 - x.abs().log10().floor() as i32;
        format!("{x:.*}", digits.max(0) as usize)
    } else {
        format!("{x:.3e}")
    }
}

fn cmd_validate(path: &Path) -> u8 {
    let problem = match load_problem(path) {
        Ok(p) => p,
        Err(e) => return fail(&e, 1),
    };
    let report = validate(&problem, &Tolerances::default());
    if !report.feasible {
        let j = report.violated_constraint.unwrap_or(0);
        return fail(
            &format!("infeasible: constraint j={j} cannot be met by the lower bounds"),
            2,
        );
    }
    if !report.well_posed {
        let n = report.ill_posed_variable.unwrap_or(0);
        return fail(
            &format!(
                "ill-posed: variable {n} has an infinite upper bound and no constraint at or after it"
            ),
            3,
        );
    }
    println!("feasible: {} variables, {} constraints", problem.len(), problem.budgets().len());
    0
}

fn cmd_solve(
    path: &Path,
    lazy: bool,
    trace: bool,
    tol_root: Option<f64>,
    tol_feas: Option<f64>,
    out: Option<&Path>,
) -> u8 {
    let problem = match load_problem(path) {
        Ok(p) => p,
        Err(e) => return fail(&e, 1),
    };
    let mut tol = Tolerances::default();
    if let Some(r) = tol_root {
        tol.root_tol = r;
    }
    if let Some(f) = tol_feas {
        tol.feas_tol = f;
    }
    let opts = SolveOptions { lazy };
    match sepsolve::solve(&problem, &opts, &tol) {
        Ok(solution) => {
            let doc = SolutionFile::optimal(&solution, trace);
            if write_output(out, &doc.render()).is_err() {
                return 1;
            }
            0
        }
        Err(err) => {
            let code = solver_exit_code(&err);
            let status = match code {
                2 => Some("infeasible"),
                3 => Some("ill_posed"),
                _ => None,
            };
            if let Some(status) = status {
                let doc = SolutionFile::status_only(status);
                let _ = write_output(out, &doc.render());
            }
            fail(&err.to_string(), code)
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), ()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_check(problem_path: &Path, solution_path: &Path, tol_cert: Option<f64>) -> u8 {
    let problem = match load_problem(problem_path) {
        Ok(p) => p,
        Err(e) => return fail(&e, 1),
    };
    let text = match fs::read_to_string(solution_path) {
        Ok(t) => t,
        Err(e) => return fail(&format!("cannot read {}: {e}", solution_path.display()), 1),
    };
    let doc = match SolutionFile::parse(&text) {
        Ok(d) => d,
        Err(e) => return fail(&e, 1),
    };
    if doc.status != "optimal" {
        return fail(&format!("solution status is \"{}\", nothing to check", doc.status), 1);
    }
    let (x, sigma) = match (doc.x, doc.sigma) {
        (Some(x), Some(sigma)) => (x, sigma),
        _ => return fail("solution document lacks x or sigma", 1),
    };
    if x.len() != problem.len() || sigma.len() != problem.len() {
        return fail(
            &format!(
                "dimension mismatch: problem has {} variables, solution has {} x / {} sigma",
                problem.len(),
                x.len(),
                sigma.len()
            ),
            1,
        );
    }
    let mut tol = Tolerances::default();
    if let Some(c) = tol_cert {
        tol.cert_tol = c;
    }
    let report = kkt_certificate(&problem, &x, &sigma, &tol);
    println!(
        "feasibility={} stationarity={} slackness={} sign={}",
        sig4(report.feasibility),
        sig4(report.stationarity),
        sig4(report.slackness),
        sig4(report.sign)
    );
    if report.pass {
        println!("certificate: pass (tolerance {})", sig4(tol.cert_tol));
        0
    } else {
        println!("certificate: FAIL (tolerance {})", sig4(tol.cert_tol));
        5
    }
}

fn cmd_curves(path: &Path, range: &str, samples: usize, stage: usize) -> u8 {
    let problem = match load_problem(path) {
        Ok(p) => p,
        Err(e) => return fail(&e, 1),
    };
    let (a, b) = match parse_range(range) {
        Ok(r) => r,
        Err(e) => return fail(&e, 1),
    };
    if samples == 0 {
        return fail("--samples must be positive", 1);
    }
    let n = problem.len();
    if stage >= n {
        return fail(&format!("--stage must be below the variable count {n}"), 1);
    }
    let tol = Tolerances::default();
    let report = validate(&problem, &tol);
    if !report.feasible {
        return fail("problem is infeasible", 2);
    }
    if !report.well_posed {
        return fail("problem is ill-posed", 3);
    }
    let pre = match reduce(&problem, &tol) {
        Ok(p) => p,
        Err(e) => return fail(&e.to_string(), solver_exit_code(&e)),
    };
    let reduced = Reduced::build(&problem, &pre);

    let mut header = String::from("sigma");
    for i in 1..=n {
        header.push_str(&format!(",xi_{i}"));
    }
    for i in 1..=n {
        header.push_str(&format!(",c_{i}"));
    }
    println!("{header}");

    let mut cells = vec![0.0f64; n];
    for row in 0..samples {
        let s = if samples == 1 {
            a
        } else {
            a + (b - a) * row as f64 / (samples - 1) as f64
        };
        // Fixed variables respond with their pinned value; surviving ones
        // with ξ, infinite where undefined.
        for (&var, &l) in &pre.fixed {
            cells[var - 1] = l;
        }
        for (i, &var) in reduced.survivors().iter().enumerate() {
            cells[var - 1] = reduced.xi_at(i, s, &tol).unwrap_or(f64::INFINITY);
        }
        let mut line = format!("{s}");
        for &v in cells.iter() {
            line.push_str(&format!(",{v}"));
        }
        let mut running = 0.0f64;
        for (idx, &v) in cells.iter().enumerate() {
            if idx + 1 > stage {
                running += v;
            }
            line.push_str(&format!(",{running}"));
        }
        println!("{line}");
    }
    0
}

fn parse_range(range: &str) -> Result<(f64, f64), String> {
    let (a, b) = range
        .split_once(':')
        .ok_or_else(|| format!("range must look like a:b, got \"{range}\""))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad range start \"{a}\""))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad range end \"{b}\""))?;
    if !a.is_finite() || !b.is_finite() || a < 0.0 || b < a {
        return Err(format!("range must satisfy 0 ≤ a ≤ b, got {a}:{b}"));
    }
    Ok((a, b))
}
