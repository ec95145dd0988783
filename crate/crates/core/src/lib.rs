//! Exact solver for separable convex minimization under prefix-sum and box
//! constraints.
//!
//! The problem shape is: minimize `Σ f_n(x_n)` subject to
//! `Σ_{n≤j} x_n ≤ ρ_j` for `j` in an active constraint set, with per-variable
//! bounds `l_n ≤ x_n ≤ u_n` that may be infinite. Each `f_n` is strictly
//! convex and continuously differentiable on its box, drawn from a small
//! family of built-in terms (exponential, negative logarithm, quadratic,
//! reciprocal) or supplied through the [`term::Term`] contract.
//!
//! The solver computes the exact minimizer in finitely many stages. Terms
//! that are increasing on their box are fixed at their lower bound and terms
//! with an interior minimum have their upper bound tightened to it, leaving
//! an all-decreasing problem. Each stage then finds, per active constraint,
//! the multiplier level at which the clamped inverse slopes sum to the
//! remaining budget; the largest level fixes a block of multipliers, budgets
//! shrink, and the loop repeats on the remainder. Waterfilling power
//! allocation is the special case with logarithmic terms.
//!
//! Optimality is independently checkable: [`oracle::kkt_certificate`]
//! reconstructs the constraint multipliers and verifies feasibility, sign,
//! complementary slackness, and stationarity, which is sufficient for global
//! optimality by convexity. [`oracle::grid_reference`] offers a brute-force
//! cross-check for tiny instances.
//!
//! ```
//! use sepsolve::{Bounds, ObjectiveTerm, Problem, SolveOptions, Tolerances};
//!
//! // Two-level waterfilling: minimize -ln(1+x1) - ln(2+x2), x >= 0,
//! // x1 + x2 <= 3.
//! let problem = Problem::new(
//!     vec![ObjectiveTerm::NegLog { a: 1.0 }, ObjectiveTerm::NegLog { a: 2.0 }],
//!     vec![
//!         Bounds::from_f64(0.0, f64::INFINITY).unwrap(),
//!         Bounds::from_f64(0.0, f64::INFINITY).unwrap(),
//!     ],
//!     [(2, 3.0)].into_iter().collect(),
//! )
//! .unwrap();
//! let sol = sepsolve::solve(&problem, &SolveOptions::default(), &Tolerances::default()).unwrap();
//! assert!((sol.x[0] - 2.0).abs() < 1e-9);
//! assert!((sol.x[1] - 1.0).abs() < 1e-9);
//! ```
//!
//! All types are immutable values after construction; solves are pure
//! functions and safe to run concurrently.

pub mod engine;
pub mod error;
pub mod extended;
pub mod oracle;
pub mod preprocess;
pub mod problem;
pub mod term;

pub use engine::{
    solve, stage_trace_gammas, xi, Candidate, Reduced, SolveOptions, Solution, StageRecord,
    StageState,
};
pub use error::SolverError;
pub use extended::ExtendedReal;
pub use oracle::{
    grid_reference, kkt_certificate, max_slope_bound, objective_value, CertificateReport,
    GridSolution,
};
pub use preprocess::{
    fix_increasing_terms, tighten_interior_minima, classify_term, reduce, CaseLabel, PreprocessReport,
};
pub use problem::{validate, Bounds, FeasibilityReport, Problem, Tolerances};
pub use term::{inverse_slope, term_slope, term_value, ObjectiveTerm, Term};
