//! Error type shared across the solver.

/// Errors produced by problem construction, validation, and solving.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SolverError {
    /// An argument lies outside the natural domain of a term or of an
    /// inverse-slope function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The prefix-sum feasibility test failed; `constraint` is the first
    /// violated 1-based index.
    #[error("infeasible: constraint j={constraint} violated (sum of lower bounds {lower_sum} exceeds budget {budget})")]
    Infeasible {
        constraint: usize,
        lower_sum: f64,
        budget: f64,
    },

    /// The problem admits no attained minimum or violates a structural
    /// requirement that the staging procedure depends on.
    #[error("ill-posed problem: {0}")]
    IllPosed(String),

    /// Geometric bracket expansion ran out of representable range. Signals
    /// infeasible or ill-posed data that escaped validation.
    #[error("bracket search failed: {0}")]
    BracketFailure(String),

    /// Structural invariant violated at construction time (length mismatch,
    /// empty constraint set, invalid bounds, term parameters out of range).
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// The brute-force grid contains no feasible point.
    #[error("empty feasible set: no grid point satisfies the constraints")]
    EmptyFeasibleSet,
}
