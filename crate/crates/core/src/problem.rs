//! Problem container: terms, box bounds, prefix-sum budgets, tolerances.

use std::collections::BTreeMap;

use crate::error::SolverError;
use crate::extended::ExtendedReal;
use crate::term::{ObjectiveTerm, Term};

/// Per-variable box `l ≤ x ≤ u` with possibly infinite endpoints.
///
/// `Bounds` rather than `Box` to stay clear of the std pointer type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    lower: ExtendedReal,
    upper: ExtendedReal,
}

impl Bounds {
    /// Requires `lower < upper` strictly.
    pub fn new(lower: ExtendedReal, upper: ExtendedReal) -> Result<Self, SolverError> {
        if lower < upper {
            Ok(Bounds { lower, upper })
        } else {
            Err(SolverError::InvalidProblem(format!(
                "bounds must satisfy lower < upper, got [{lower}, {upper}]"
            )))
        }
    }

    /// Convenience constructor from IEEE floats (infinities become markers).
    pub fn from_f64(lower: f64, upper: f64) -> Result<Self, SolverError> {
        Bounds::new(ExtendedReal::from_f64(lower), ExtendedReal::from_f64(upper))
    }

    pub fn lower(&self) -> ExtendedReal {
        self.lower
    }

    pub fn upper(&self) -> ExtendedReal {
        self.upper
    }
}

/// Numerical tolerances used throughout the solver.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Relative width at which bisection on ς stops.
    pub root_tol: f64,
    /// Stage-equation residual scale: accept ς with
    /// `|c(ς) − γ| ≤ residual_tol · max(1, |γ|)`.
    pub residual_tol: f64,
    /// Feasibility slack on prefix sums and box bounds.
    pub feas_tol: f64,
    /// Certificate residual threshold.
    pub cert_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root_tol: 1e-12,
            residual_tol: 1e-9,
            feas_tol: 1e-9,
            cert_tol: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn check(&self) -> Result<(), SolverError> {
        let all = [self.root_tol, self.residual_tol, self.feas_tol, self.cert_tol];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(SolverError::InvalidProblem(
                "tolerances must be strictly positive".into(),
            ))
        }
    }
}

/// A separable convex program: minimize `Σ f_n(x_n)` subject to
/// `Σ_{n≤j} x_n ≤ ρ_j` for `j` in the constraint set, and `l_n ≤ x_n ≤ u_n`.
///
/// Indices are 1-based in the public interface and in all diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    terms: Vec<ObjectiveTerm>,
    bounds: Vec<Bounds>,
    /// Budgets `ρ_j`, keyed by 1-based constraint index; the key set is the
    /// active constraint set.
    budgets: BTreeMap<usize, f64>,
}

impl Problem {
    /// Builds and structurally checks a problem. The constraint set is the
    /// key set of `budgets`; it must be a nonempty subset of `1..=N`. Each
    /// term's natural domain must cover its box (touching a domain edge is
    /// allowed as a limit endpoint).
    pub fn new(
        terms: Vec<ObjectiveTerm>,
        bounds: Vec<Bounds>,
        budgets: BTreeMap<usize, f64>,
    ) -> Result<Self, SolverError> {
        let n = terms.len();
        if n == 0 {
            return Err(SolverError::InvalidProblem("need at least one term".into()));
        }
        if bounds.len() != n {
            return Err(SolverError::InvalidProblem(format!(
                "{} terms but {} bounds",
                n,
                bounds.len()
            )));
        }
        if budgets.is_empty() {
            return Err(SolverError::InvalidProblem(
                "constraint set must be nonempty".into(),
            ));
        }
        for (&j, &rho) in &budgets {
            if j == 0 || j > n {
                return Err(SolverError::InvalidProblem(format!(
                    "constraint index j={j} outside 1..={n}"
                )));
            }
            if !rho.is_finite() {
                return Err(SolverError::InvalidProblem(format!(
                    "budget at j={j} must be finite, got {rho}"
                )));
            }
        }
        for (idx, (term, b)) in terms.iter().zip(&bounds).enumerate() {
            term.check_parameters()?;
            let (dlo, dhi) = term.domain();
            if b.lower() < dlo || b.upper() > dhi {
                return Err(SolverError::InvalidProblem(format!(
                    "box [{}, {}] of term {} not covered by its domain ({dlo}, {dhi})",
                    b.lower(),
                    b.upper(),
                    idx + 1
                )));
            }
        }
        Ok(Problem { terms, bounds, budgets })
    }

    /// Builds a problem with one budget per index (`ℒ = {1..N}`).
    pub fn with_full_constraints(
        terms: Vec<ObjectiveTerm>,
        bounds: Vec<Bounds>,
        rho: Vec<f64>,
    ) -> Result<Self, SolverError> {
        if rho.len() != terms.len() {
            return Err(SolverError::InvalidProblem(format!(
                "{} terms but {} budgets",
                terms.len(),
                rho.len()
            )));
        }
        let budgets = rho.into_iter().enumerate().map(|(i, r)| (i + 1, r)).collect();
        Problem::new(terms, bounds, budgets)
    }

    /// Number of variables.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[ObjectiveTerm] {
        &self.terms
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    /// Budgets keyed by 1-based constraint index.
    pub fn budgets(&self) -> &BTreeMap<usize, f64> {
        &self.budgets
    }

    /// The active constraint set, ascending.
    pub fn constraint_set(&self) -> impl Iterator<Item = usize> + '_ {
        self.budgets.keys().copied()
    }

    /// Largest constrained index.
    pub fn max_constraint(&self) -> usize {
        *self.budgets.keys().next_back().expect("nonempty by invariant")
    }
}

/// Outcome of [`validate`]: the prefix-sum feasibility test plus the
/// well-posedness check.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// First 1-based constraint index with `Σ_{n≤j} l_n > ρ_j`.
    pub violated_constraint: Option<usize>,
    pub well_posed: bool,
    /// First 1-based variable with infinite upper bound and no covering
    /// constraint, if any.
    pub ill_posed_variable: Option<usize>,
}

impl FeasibilityReport {
    /// True when the problem is both feasible and well posed.
    pub fn ok(&self) -> bool {
        self.feasible && self.well_posed
    }
}

/// Checks `Σ_{n≤j} l_n ≤ ρ_j` for every constrained `j` (a sum containing
/// `−∞` passes automatically), and that every variable either has a finite
/// upper bound or is covered by a constraint at or after its index
/// (otherwise the infimum may be unattained).
pub fn validate(problem: &Problem, _tol: &Tolerances) -> FeasibilityReport {
    let mut feasible = true;
    let mut violated = None;

    let mut prefix = ExtendedReal::finite(0.0);
    let mut next = 1usize;
    for (&j, &rho) in problem.budgets() {
        while next <= j {
            prefix = prefix + problem.bounds()[next - 1].lower();
            next += 1;
        }
        if let Some(sum) = prefix.as_finite() {
            if sum > rho {
                feasible = false;
                violated = Some(j);
                break;
            }
        }
    }

    let max_j = problem.max_constraint();
    let mut well_posed = true;
    let mut ill_var = None;
    for n in 1..=problem.len() {
        if problem.bounds()[n - 1].upper().is_pos_inf() && n > max_j {
            well_posed = false;
            ill_var = Some(n);
            break;
        }
    }

    FeasibilityReport {
        feasible,
        violated_constraint: violated,
        well_posed,
        ill_posed_variable: ill_var,
    }
}
