//! End-to-end tests of the command-line interface: exit codes, document
//! shapes, determinism, and the curve dump.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sepsolve_cli::schema::{CandidateJson, SolutionFile};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepsolve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn quartet() -> String {
    fixture("exp_quartet.json").display().to_string()
}

#[test]
fn validate_feasible_file_exits_zero() {
    let out = run(&["validate", &quartet()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("feasible"));
}

#[test]
fn validate_infeasible_file_exits_two_naming_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("infeasible.json");
    std::fs::write(
        &path,
        r#"{"terms": [{"family": "quadratic", "t": 0.0}, {"family": "quadratic", "t": 0.0}],
            "lower": [0.0, 2.0], "upper": [10.0, 10.0], "rho": [1.0, 1.0]}"#,
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("j=2"), "stderr: {}", stderr(&out));
}

#[test]
fn validate_and_solve_report_ill_posed_problems() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ill_posed.json");
    // Variable 2 has an infinite upper bound and no covering constraint.
    std::fs::write(
        &path,
        r#"{"terms": [{"family": "neglog", "a": 1.0}, {"family": "neglog", "a": 1.0}],
            "lower": [0.0, 0.0], "upper": [null, null],
            "rho": {"1": 5.0}, "constraints": [1]}"#,
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr(&out));
    let out = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn validate_rejects_malformed_documents() {
    let dir = tempfile::tempdir().unwrap();

    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(exit_code(&run(&["validate", path.to_str().unwrap()])), 1);

    let path = dir.path().join("family.json");
    std::fs::write(
        &path,
        r#"{"terms": [{"family": "cubic", "t": 1.0}], "lower": [0.0], "upper": [1.0], "rho": [1.0]}"#,
    )
    .unwrap();
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("cubic"));

    let path = dir.path().join("extra.json");
    std::fs::write(
        &path,
        r#"{"terms": [{"family": "exp", "w": 1.0}], "lower": [0.0], "upper": [1.0],
            "rho": [1.0], "color": "red"}"#,
    )
    .unwrap();
    assert_eq!(exit_code(&run(&["validate", path.to_str().unwrap()])), 1);

    let path = dir.path().join("extra_param.json");
    std::fs::write(
        &path,
        r#"{"terms": [{"family": "exp", "w": 1.0, "q": 2.0}], "lower": [0.0], "upper": [1.0],
            "rho": [1.0]}"#,
    )
    .unwrap();
    assert_eq!(exit_code(&run(&["validate", path.to_str().unwrap()])), 1);
}

#[test]
fn solve_reproduces_the_quartet_within_print_precision() {
    let out = run(&["solve", &quartet()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let doc = SolutionFile::parse(&stdout(&out)).unwrap();
    assert_eq!(doc.status, "optimal");
    let x = doc.x.unwrap();
    for (got, want) in x.iter().zip([-0.8, -1.2, 1.9, -1.8]) {
        assert!((got - want).abs() < 1e-3, "x = {x:?}");
    }
    assert!(doc.stages.is_none(), "trace must be opt-in");
}

#[test]
fn solve_output_is_byte_identical_across_runs() {
    let a = run(&["solve", &quartet(), "--trace"]);
    let b = run(&["solve", &quartet(), "--trace"]);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn lazy_solve_matches_eager_and_marks_skips() {
    let eager = run(&["solve", &quartet(), "--trace"]);
    let lazy = run(&["solve", &quartet(), "--trace", "--lazy"]);
    let eager = SolutionFile::parse(&stdout(&eager)).unwrap();
    let lazy = SolutionFile::parse(&stdout(&lazy)).unwrap();

    let (ex, lx) = (eager.x.unwrap(), lazy.x.unwrap());
    for (a, b) in ex.iter().zip(&lx) {
        assert!((a - b).abs() <= 1e-9);
    }
    assert_eq!(eager.sigma.unwrap(), lazy.sigma.unwrap());
    assert_eq!(eager.objective.unwrap(), lazy.objective.unwrap());

    let stages = lazy.stages.unwrap();
    let eager_stages = eager.stages.unwrap();
    assert_eq!(stages.len(), eager_stages.len());
    for (l, e) in stages.iter().zip(&eager_stages) {
        assert_eq!(l.mu_star, e.mu_star);
        assert_eq!(l.k_star, e.k_star);
    }
    // Stage 1 solves exactly the first two equations; 3 and 4 are skipped.
    let first = &stages[0];
    assert!(matches!(first.candidates[&1], CandidateJson::Solved { .. }));
    assert!(matches!(first.candidates[&2], CandidateJson::Solved { .. }));
    assert_eq!(first.candidates[&3], CandidateJson::Skipped);
    assert_eq!(first.candidates[&4], CandidateJson::Skipped);
}

#[test]
fn solve_handles_subset_constraints() {
    let out = run(&["solve", &fixture("waterfilling.json").display().to_string()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let doc = SolutionFile::parse(&stdout(&out)).unwrap();
    let x = doc.x.unwrap();
    assert!((x[0] - 2.0).abs() < 1e-9);
    assert!((x[1] - 1.0).abs() < 1e-9);
}

#[test]
fn solve_writes_status_document_for_infeasible_input() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("infeasible.json");
    std::fs::write(
        &problem,
        r#"{"terms": [{"family": "quadratic", "t": 0.0}, {"family": "quadratic", "t": 0.0}],
            "lower": [0.0, 2.0], "upper": [10.0, 10.0], "rho": [1.0, 1.0]}"#,
    )
    .unwrap();
    let out_path = dir.path().join("solution.json");
    let out = run(&[
        "solve",
        problem.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    let doc = SolutionFile::parse(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc.status, "infeasible");
    assert!(doc.x.is_none());
}

#[test]
fn check_accepts_solver_output_and_rejects_perturbations() {
    let dir = tempfile::tempdir().unwrap();
    let sol_path = dir.path().join("sol.json");
    let out = run(&["solve", &quartet(), "--out", sol_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);

    let out = run(&["check", &quartet(), sol_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stdout: {}", stdout(&out));
    assert!(stdout(&out).contains("pass"));

    // Perturb x₃ into the interior away from h₃ = σ₃: stationarity fails.
    let mut doc = SolutionFile::parse(&std::fs::read_to_string(&sol_path).unwrap()).unwrap();
    doc.x.as_mut().unwrap()[2] = 1.8;
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, doc.render()).unwrap();
    let out = run(&["check", &quartet(), bad_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 5);
    assert!(stdout(&out).contains("stationarity"));

    // Dimension mismatch is a usage error.
    doc.x.as_mut().unwrap().pop();
    let short_path = dir.path().join("short.json");
    std::fs::write(&short_path, doc.render()).unwrap();
    let out = run(&["check", &quartet(), short_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn check_passes_on_solver_output_for_every_fixture() {
    let dir = tempfile::tempdir().unwrap();
    for (i, name) in ["exp_quartet.json", "waterfilling.json"].iter().enumerate() {
        let problem = fixture(name).display().to_string();
        let sol_path = dir.path().join(format!("sol{i}.json"));
        let out = run(&["solve", &problem, "--out", sol_path.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0, "{name}: {}", stderr(&out));
        let out = run(&["check", &problem, sol_path.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0, "{name}: {}", stdout(&out));
    }
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|line| {
            line.split(',')
                .map(|cell| cell.parse::<f64>().unwrap())
                .collect()
        })
        .collect()
}

fn nearest_row(rows: &[Vec<f64>], sigma: f64) -> &[f64] {
    rows.iter()
        .min_by(|a, b| {
            (a[0] - sigma)
                .abs()
                .partial_cmp(&(b[0] - sigma).abs())
                .unwrap()
        })
        .unwrap()
}

#[test]
fn curves_reproduce_the_stage_intersections() {
    let out = run(&["curves", &quartet(), "--range", "0:6", "--samples", "24001"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("sigma,xi_1,xi_2,xi_3,xi_4,c_1,c_2,c_3,c_4"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 24001);

    // Columns: 0 = sigma, 1..=4 = xi, 5..=8 = c.
    let row = nearest_row(&rows, 4.451);
    assert!((row[6] - (-2.0)).abs() < 1e-3, "c2 = {}", row[6]);
    let row = nearest_row(&rows, 1.196);
    assert!((row[7] - 1.1).abs() < 1e-3, "c3 = {}", row[7]);
}

#[test]
fn curves_single_sample_at_zero_reads_the_uppers() {
    let out = run(&["curves", &quartet(), "--range", "0:0", "--samples", "1"]);
    assert_eq!(exit_code(&out), 0);
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1..5], &[0.4, -1.2, 2.0, -1.8]);
}

#[test]
fn curves_reject_bad_ranges() {
    assert_eq!(exit_code(&run(&["curves", &quartet(), "--range", "6:0"])), 1);
    assert_eq!(exit_code(&run(&["curves", &quartet(), "--range", "-1:2"])), 1);
    assert_eq!(exit_code(&run(&["curves", &quartet(), "--range", "zap"])), 1);
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["frobnicate"]);
    assert_eq!(exit_code(&out), 1);
    let out = run(&[]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn infinite_upper_cells_print_inf() {
    // Unbounded upper with ς = 0 has no finite response; the cell reads inf.
    let out = run(&[
        "curves",
        &fixture("waterfilling.json").display().to_string(),
        "--range",
        "0:1",
        "--samples",
        "3",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("0,inf,inf,inf,inf"), "row: {first}");
}
