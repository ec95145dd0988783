//! Multiplier engine: stagewise computation of the optimal multipliers.
//!
//! After preprocessing, every surviving term is strictly decreasing on its
//! box, so its response to a multiplier level `ς ≥ 0` is
//! `ξ(ς) = clamp(h⁻¹(ς), l, u)` with `h = -f'`. Each stage solves, for every
//! active constraint `n`, the scalar equation `c_n(ς) = Σ ξ_i(ς) = γ_n` over
//! the variables opened by the stage; the largest candidate `μ*` and the
//! largest index `k*` attaining it fix the multiplier of every variable up
//! to `k*`. Budgets after `k*` shrink by `γ_{k*}` and the procedure repeats
//! on the remainder, finishing in at most one stage per variable.
//!
//! Candidate equations are monotone, so they are solved by bracketed
//! bisection on `ς`, never on `x`; the bracket grows geometrically from
//! `ς = 1`. In lazy mode a candidate equation is only solved once the
//! running sum `c_n` at the best multiplier so far proves it could reach or
//! beat that best; skipped candidates are provably smaller.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::SolverError;
use crate::extended::ExtendedReal;
use crate::oracle;
use crate::preprocess::{self, PreprocessReport};
use crate::problem::{validate, Problem, Tolerances};
use crate::term::Term;

const MAX_BISECT_ITERS: usize = 4096;

/// Options for [`solve`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Skip candidate equations that provably cannot reach the running
    /// stage maximum.
    pub lazy: bool,
}

/// Per-constraint candidate multiplier within one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Candidate {
    /// Stage equation solved by bisection.
    Solved(f64),
    /// Budget at or above the attainable sum of uppers; the candidate is 0.
    Zero,
    /// Lazy mode proved the candidate strictly below the running best.
    Skipped,
}

impl Candidate {
    /// The candidate value, `None` when skipped.
    pub fn value(&self) -> Option<f64> {
        match *self {
            Candidate::Solved(v) => Some(v),
            Candidate::Zero => Some(0.0),
            Candidate::Skipped => None,
        }
    }
}

/// Trace of one stage.
#[derive(Debug, Clone)]
pub struct StageRecord {
    /// Remaining budgets on stage entry, keyed by 1-based constraint index.
    pub entry_gammas: BTreeMap<usize, f64>,
    /// Candidate per active constraint.
    pub candidates: BTreeMap<usize, Candidate>,
    /// Largest non-skipped candidate.
    pub mu_star: f64,
    /// Largest 1-based constraint index attaining `mu_star`.
    pub k_star: usize,
}

/// Mutable stage-loop state: how many reduced variables are already fixed
/// and the remaining budgets.
#[derive(Debug, Clone)]
pub struct StageState {
    /// Count of leading reduced variables fixed by earlier stages.
    pub start: usize,
    /// Remaining budgets keyed by 1-based original constraint index. Keys
    /// always lie strictly after the fixed block.
    pub gammas: BTreeMap<usize, f64>,
}

/// Solver output: the minimizer, its multipliers, the stage trace, and the
/// objective value.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub sigma: Vec<f64>,
    pub stages: Vec<StageRecord>,
    pub objective: f64,
}

/// The γ snapshots entering each stage, in stage order.
pub fn stage_trace_gammas(solution: &Solution) -> Vec<BTreeMap<usize, f64>> {
    solution.stages.iter().map(|s| s.entry_gammas.clone()).collect()
}

/// Projects `h⁻¹(ς)` onto `[lower, upper]`.
///
/// Requires a term that is strictly decreasing on the interval, which holds
/// for every surviving term after preprocessing. The result is nonincreasing
/// in `ς` and always lies in the interval. Fails when the projection is
/// `+∞`, i.e. an infinite upper bound combined with `ς` at or below the
/// infimum of `h`.
pub fn xi(
    term: &dyn Term,
    lower: ExtendedReal,
    upper: ExtendedReal,
    varsigma: f64,
    tol: &Tolerances,
) -> Result<f64, SolverError> {
    if varsigma.is_nan() || varsigma < 0.0 {
        return Err(SolverError::Domain(format!(
            "ξ requires ς ≥ 0, got {varsigma}"
        )));
    }
    let lo = lower.to_f64();
    let hi = upper.to_f64();
    let candidate = match term.inverse_neg_slope(varsigma) {
        Some(x) => x,
        None => inverse_by_bisection(term, lo, hi, varsigma, tol)?,
    };
    let x = candidate.max(lo).min(hi);
    if x == f64::INFINITY {
        return Err(SolverError::Domain(format!(
            "ξ(ς = {varsigma}) is +inf: infinite upper bound with ς at or below the slope limit"
        )));
    }
    debug_assert!(!x.is_nan());
    Ok(x)
}

/// Bisection fallback for terms without an analytic inverse slope: finds
/// `x` in the box with `h(x) = ς`, or the endpoint the root is clamped to.
fn inverse_by_bisection(
    term: &dyn Term,
    lo: f64,
    hi: f64,
    varsigma: f64,
    tol: &Tolerances,
) -> Result<f64, SolverError> {
    let (dlo, dhi) = term.domain();
    let left = lo.max(dlo.to_f64());
    let right = hi.min(dhi.to_f64());

    let seed = if left.is_finite() && right.is_finite() {
        0.5 * (left + right)
    } else if left.is_finite() {
        left + left.abs().max(1.0)
    } else if right.is_finite() {
        right - right.abs().max(1.0)
    } else {
        0.0
    };

    // Expand right until h ≤ ς (h is decreasing in x).
    let mut b = seed;
    let mut steps = 0usize;
    while term.neg_slope(b)? > varsigma {
        if right.is_finite() {
            let next = 0.5 * (b + right);
            if next <= b || next >= right {
                // h stays above ς all the way to the upper end: clamp there.
                return Ok(right);
            }
            b = next;
        } else {
            b = if b >= 1.0 {
                b * 2.0
            } else if b >= -1.0 {
                b + 1.0
            } else {
                b * 0.5
            };
            if b > 1e300 {
                return Ok(f64::INFINITY);
            }
        }
        steps += 1;
        if steps > 4096 {
            return Err(SolverError::BracketFailure(
                "no right bracket for the inverse slope".into(),
            ));
        }
    }

    // Expand left until h ≥ ς.
    let mut a = seed.min(b);
    steps = 0;
    while term.neg_slope(a)? < varsigma {
        if left.is_finite() {
            let next = 0.5 * (a + left);
            if next >= a || next <= left {
                return Ok(left);
            }
            a = next;
        } else {
            a = if a <= -1.0 {
                a * 2.0
            } else if a <= 1.0 {
                a - 1.0
            } else {
                a * 0.5
            };
            if a < -1e300 {
                return Err(SolverError::BracketFailure(
                    "no left bracket for the inverse slope".into(),
                ));
            }
        }
        steps += 1;
        if steps > 4096 {
            return Err(SolverError::BracketFailure(
                "no left bracket for the inverse slope".into(),
            ));
        }
    }

    for _ in 0..MAX_BISECT_ITERS {
        if b - a <= tol.root_tol * a.abs().max(b.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if term.neg_slope(mid)? >= varsigma {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Extended-real running sum restricted to values `> -∞`.
#[derive(Clone, Copy)]
struct UpperSum {
    finite: f64,
    infinite: bool,
}

impl UpperSum {
    fn zero() -> Self {
        UpperSum { finite: 0.0, infinite: false }
    }

    fn push(&mut self, u: ExtendedReal) {
        match u {
            ExtendedReal::Finite(v) => self.finite += v,
            ExtendedReal::PosInf => self.infinite = true,
            ExtendedReal::NegInf => unreachable!("upper bounds are > -inf"),
        }
    }

    fn exceeds(&self, gamma: f64) -> bool {
        self.infinite || self.finite > gamma
    }

    fn at_most(&self, gamma: f64) -> bool {
        !self.infinite && self.finite <= gamma
    }
}

/// The preprocessed, all-decreasing view of a problem that the stage loop
/// operates on. Variables are addressed by reduced position `0..len()`;
/// constraints keep their original 1-based indices.
pub struct Reduced<'a> {
    problem: &'a Problem,
    /// Original 1-based indices of the surviving variables, ascending.
    survivors: Vec<usize>,
    lower: Vec<ExtendedReal>,
    upper: Vec<ExtendedReal>,
    /// `(original j, reduced end position, adjusted budget)`, ascending in
    /// `j`. Constraints that cover no surviving variable are dropped; their
    /// residual budgets are nonnegative for any feasible problem.
    constraints: Vec<(usize, usize, f64)>,
}

impl<'a> Reduced<'a> {
    /// Builds the reduced view from a preprocessing report.
    pub fn build(problem: &'a Problem, report: &PreprocessReport) -> Self {
        let survivors = report.surviving_indices.clone();
        let lower = survivors
            .iter()
            .map(|&n| problem.bounds()[n - 1].lower())
            .collect();
        let upper = report.tightened_uppers.clone();
        let mut constraints = Vec::with_capacity(report.adjusted_budgets.len());
        for (&j, &rho) in &report.adjusted_budgets {
            let pos = survivors.partition_point(|&n| n <= j);
            if pos == 0 {
                // Covers fixed variables only; feasibility already
                // guarantees the shifted budget is nonnegative.
                debug_assert!(rho >= -1e-9 * rho.abs().max(1.0));
                continue;
            }
            constraints.push((j, pos, rho));
        }
        Reduced { problem, survivors, lower, upper, constraints }
    }

    /// Number of surviving variables.
    pub fn len(&self) -> usize {
        self.survivors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.survivors.is_empty()
    }

    /// Surviving original indices (1-based, ascending).
    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    /// Constraints as `(original j, reduced end position, budget)`.
    pub fn constraints(&self) -> &[(usize, usize, f64)] {
        &self.constraints
    }

    /// Reduced end position of constraint `j`: the count of surviving
    /// variables at or before `j`.
    pub fn position_of(&self, j: usize) -> usize {
        self.survivors.partition_point(|&n| n <= j)
    }

    fn term(&self, i: usize) -> &dyn Term {
        &self.problem.terms()[self.survivors[i] - 1]
    }

    /// ξ of the i-th surviving variable (0-based reduced position).
    pub fn xi_at(&self, i: usize, varsigma: f64, tol: &Tolerances) -> Result<f64, SolverError> {
        xi(self.term(i), self.lower[i], self.upper[i], varsigma, tol)
    }

    /// Tightened upper bound at reduced position `i`.
    pub fn upper_at(&self, i: usize) -> ExtendedReal {
        self.upper[i]
    }

    /// `c(ς) = Σ ξ_i(ς)` over a range of reduced positions. Nonincreasing in
    /// `ς`; equals the sum of tightened uppers at `ς = 0` when those are all
    /// finite.
    pub fn cumulative_c(
        &self,
        range: Range<usize>,
        varsigma: f64,
        tol: &Tolerances,
    ) -> Result<f64, SolverError> {
        let mut sum = 0.0;
        for i in range {
            sum += self.xi_at(i, varsigma, tol)?;
        }
        Ok(sum)
    }

    fn upper_sum(&self, range: Range<usize>) -> UpperSum {
        let mut s = UpperSum::zero();
        for i in range {
            s.push(self.upper[i]);
        }
        s
    }

    /// Solves the stage equation `c(ς) = γ` over a range of reduced
    /// positions.
    ///
    /// Returns 0 when `γ` already covers the sum of uppers (evaluated in
    /// extended reals: any infinite upper forces a solve). Otherwise the
    /// root is isolated by halving/doubling from `ς = 1` and bisected to
    /// relative width `root_tol`, continuing until the residual at the
    /// returned point is within `residual_tol · max(1, |γ|)`. The feasible
    /// side of the final bracket (where `c ≤ γ`) is returned, so tight
    /// constraints never overshoot their budget.
    ///
    /// When `c` has a flat segment at level `γ` (all responses clamped),
    /// any point of the plateau is a valid answer and bisection lands on
    /// one of them; downstream values are unaffected because ξ is constant
    /// across the plateau.
    pub fn solve_stage_equation(
        &self,
        range: Range<usize>,
        gamma: f64,
        tol: &Tolerances,
    ) -> Result<f64, SolverError> {
        self.stage_equation(range, gamma, tol).map(|(v, _)| v)
    }

    /// As [`Self::solve_stage_equation`], also reporting whether the
    /// zero branch fired.
    fn stage_equation(
        &self,
        range: Range<usize>,
        gamma: f64,
        tol: &Tolerances,
    ) -> Result<(f64, bool), SolverError> {
        assert!(!range.is_empty(), "stage equation needs a nonempty range");
        if self.upper_sum(range.clone()).at_most(gamma) {
            return Ok((0.0, true));
        }

        let c_at_one = self.cumulative_c(range.clone(), 1.0, tol)?;

        let lo = if c_at_one > gamma {
            1.0
        } else {
            let mut x = 0.5;
            loop {
                if x < f64::MIN_POSITIVE {
                    break 0.0;
                }
                if self.cumulative_c(range.clone(), x, tol)? > gamma {
                    break x;
                }
                x *= 0.5;
            }
        };

        let (hi, c_hi) = if c_at_one <= gamma {
            (1.0, c_at_one)
        } else {
            let mut x = 2.0;
            loop {
                if x > 1e308 {
                    return Err(SolverError::BracketFailure(format!(
                        "no upper bracket for the stage equation at γ = {gamma}"
                    )));
                }
                let c = self.cumulative_c(range.clone(), x, tol)?;
                if c <= gamma {
                    break (x, c);
                }
                x *= 2.0;
            }
        };

        let mut lo = lo;
        let mut hi = hi;
        let mut c_hi = c_hi;
        let residual_scale = tol.residual_tol * gamma.abs().max(1.0);
        for _ in 0..MAX_BISECT_ITERS {
            let width_ok = hi - lo <= tol.root_tol * hi;
            let residual_ok = gamma - c_hi <= residual_scale;
            if width_ok && residual_ok {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let c = self.cumulative_c(range.clone(), mid, tol)?;
            if c > gamma {
                lo = mid;
            } else {
                hi = mid;
                c_hi = c;
            }
        }
        Ok((hi, false))
    }

    /// Runs one stage: computes candidates for every active constraint and
    /// reduces them to `(μ*, k*)`.
    ///
    /// Eager mode solves every candidate equation. Lazy mode scans the
    /// active constraints in index order keeping a running sum of ξ at the
    /// best multiplier so far, and solves a candidate only when that sum
    /// reaches its budget; while the best is still zero the test mirrors the
    /// zero branch exactly. Ties resolve to the larger index in both modes,
    /// and both modes produce identical `(μ*, k*)`.
    pub fn run_stage(
        &self,
        state: &StageState,
        lazy: bool,
        tol: &Tolerances,
    ) -> Result<StageRecord, SolverError> {
        assert!(!state.gammas.is_empty(), "stage needs an active constraint");
        let mut candidates = BTreeMap::new();
        let mut best: Option<(f64, usize)> = None;

        if !lazy {
            for (&j, &gamma) in &state.gammas {
                let pos = self.position_of(j);
                debug_assert!(pos > state.start);
                let (value, zero) = self.stage_equation(state.start..pos, gamma, tol)?;
                candidates.insert(j, if zero { Candidate::Zero } else { Candidate::Solved(value) });
                if best.is_none_or(|(bv, _)| value >= bv) {
                    best = Some((value, j));
                }
            }
        } else {
            // Running sum of ξ at the current best multiplier; while the
            // best is zero this is the extended-real sum of uppers.
            let mut zero_phase = UpperSum::zero();
            let mut running = 0.0f64;
            let mut scanned = state.start;

            for (&j, &gamma) in &state.gammas {
                let pos = self.position_of(j);
                debug_assert!(pos > state.start);
                match best {
                    Some((best_value, _)) if best_value > 0.0 => {
                        for i in scanned..pos {
                            running += self.xi_at(i, best_value, tol)?;
                        }
                        scanned = pos;
                        // `≥` rather than `>`: at exact equality the
                        // candidate ties the best and must win the index
                        // tie-break, so it cannot be skipped.
                        if running >= gamma {
                            let (value, zero) = self.stage_equation(state.start..pos, gamma, tol)?;
                            candidates
                                .insert(j, if zero { Candidate::Zero } else { Candidate::Solved(value) });
                            if value > best_value {
                                best = Some((value, j));
                                running = self.cumulative_c(state.start..pos, value, tol)?;
                            } else if value == best_value {
                                best = Some((value, j));
                            }
                        } else {
                            candidates.insert(j, Candidate::Skipped);
                        }
                    }
                    _ => {
                        for i in scanned..pos {
                            zero_phase.push(self.upper[i]);
                        }
                        scanned = pos;
                        if zero_phase.exceeds(gamma) {
                            let (value, zero) = self.stage_equation(state.start..pos, gamma, tol)?;
                            debug_assert!(!zero && value > 0.0);
                            candidates.insert(j, Candidate::Solved(value));
                            best = Some((value, j));
                            running = self.cumulative_c(state.start..pos, value, tol)?;
                        } else {
                            // Zero candidate; ties at zero go to the larger
                            // index, matching the eager reduction.
                            candidates.insert(j, Candidate::Zero);
                            best = Some((0.0, j));
                        }
                    }
                }
            }
        }

        let (mu_star, k_star) = best.expect("nonempty active set");
        Ok(StageRecord {
            entry_gammas: state.gammas.clone(),
            candidates,
            mu_star,
            k_star,
        })
    }
}

/// Solves the problem: validation, reduction to the all-decreasing form,
/// the stage loop, and reassembly of the full solution.
///
/// Variables past the last constrained index (all decreasing, finite upper
/// bounds by well-posedness) receive a zero multiplier and sit at their
/// tightened upper bound.
pub fn solve(
    problem: &Problem,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<Solution, SolverError> {
    tol.check()?;
    let report = validate(problem, tol);
    if let Some(j) = report.violated_constraint {
        let mut sum = ExtendedReal::finite(0.0);
        for b in &problem.bounds()[..j] {
            sum = sum + b.lower();
        }
        return Err(SolverError::Infeasible {
            constraint: j,
            lower_sum: sum.to_f64(),
            budget: problem.budgets()[&j],
        });
    }
    if let Some(n) = report.ill_posed_variable {
        return Err(SolverError::IllPosed(format!(
            "variable {n} has an infinite upper bound and no constraint at or after it"
        )));
    }

    let pre = preprocess::reduce(problem, tol)?;
    let reduced = Reduced::build(problem, &pre);

    let mut state = StageState {
        start: 0,
        gammas: reduced.constraints.iter().map(|&(j, _, rho)| (j, rho)).collect(),
    };
    let mut stages: Vec<StageRecord> = Vec::new();
    // (original k*, μ*) per stage; k* ascending, μ* nonincreasing.
    let mut boundaries: Vec<(usize, f64)> = Vec::new();

    while state.start < reduced.len() && !state.gammas.is_empty() {
        let record = reduced.run_stage(&state, opts.lazy, tol)?;
        let k_pos = reduced.position_of(record.k_star);
        debug_assert!(k_pos > state.start, "stages must make progress");
        let gamma_k = state.gammas[&record.k_star];
        boundaries.push((record.k_star, record.mu_star));

        state.gammas = state
            .gammas
            .iter()
            .filter_map(|(&j, &g)| {
                if reduced.position_of(j) <= k_pos {
                    None
                } else {
                    Some((j, g - gamma_k))
                }
            })
            .collect();
        state.start = k_pos;
        stages.push(record);
    }

    let n = problem.len();
    let mut sigma = vec![0.0; n];
    let mut b_idx = 0;
    for (i, s) in sigma.iter_mut().enumerate() {
        let var = i + 1;
        while b_idx < boundaries.len() && boundaries[b_idx].0 < var {
            b_idx += 1;
        }
        if b_idx < boundaries.len() {
            *s = boundaries[b_idx].1;
        }
    }

    let mut x = vec![0.0; n];
    for (&var, &l) in &pre.fixed {
        x[var - 1] = l;
    }
    for (i, &var) in reduced.survivors.iter().enumerate() {
        x[var - 1] = reduced.xi_at(i, sigma[var - 1], tol)?;
    }

    let objective = oracle::objective_value(problem, &x)?;
    Ok(Solution { x, sigma, stages, objective })
}
