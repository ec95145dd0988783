//! Reduction to an all-decreasing problem.
//!
//! Every term is classified by the sign of its slope on the box: increasing
//! (case a), interior minimum at `z` (case b), or decreasing (case c).
//! Increasing terms are optimal at their lower bound and are fixed there,
//! with every budget at or after their index shifted accordingly. Terms with
//! an interior minimum never exceed `z` at the optimum, so their upper bound
//! tightens to `z`. What remains is strictly decreasing on every box, which
//! is the shape the multiplier engine requires.

use std::collections::BTreeMap;

use crate::error::SolverError;
use crate::extended::ExtendedReal;
use crate::problem::{Bounds, Problem, Tolerances};
use crate::term::Term;

/// Slope trichotomy of a term on its box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseLabel {
    /// `f' > 0` on the interior (case a).
    Increasing,
    /// `f'(z) = 0` for a `z` strictly inside the box (case b).
    InteriorMin { z: f64 },
    /// `f' < 0` on the interior (case c).
    Decreasing,
}

/// Outcome of the reduction.
#[derive(Debug, Clone)]
pub struct PreprocessReport {
    /// Label per original term, in index order.
    pub labels: Vec<CaseLabel>,
    /// Variables fixed at their lower bound (1-based index → value).
    pub fixed: BTreeMap<usize, f64>,
    /// Shifted budgets `ρ'_j` for every constrained `j`.
    pub adjusted_budgets: BTreeMap<usize, f64>,
    /// Original 1-based indices that survive the reduction, ascending.
    pub surviving_indices: Vec<usize>,
    /// Upper bounds of the surviving variables, tightened to `z` for
    /// interior-minimum terms. Aligned with `surviving_indices`.
    pub tightened_uppers: Vec<ExtendedReal>,
}

/// Classifies a term on its box.
///
/// Terms that expose a stationary point are classified exactly against the
/// box. Otherwise the slope sign near both ends decides; a sign change is
/// resolved by bisecting the slope for `z`. A slope that is positive on the
/// left and negative on the right contradicts convexity and is rejected.
pub fn classify_term(
    term: &dyn Term,
    bounds: &Bounds,
    tol: &Tolerances,
) -> Result<CaseLabel, SolverError> {
    if let Some(z) = term.stationary_point() {
        let z_ext = ExtendedReal::finite(z);
        return Ok(if z_ext <= bounds.lower() {
            CaseLabel::Increasing
        } else if z_ext >= bounds.upper() {
            CaseLabel::Decreasing
        } else {
            CaseLabel::InteriorMin { z }
        });
    }

    let (dlo, _) = term.domain();
    let lo = bounds.lower().to_f64().max(dlo.to_f64());
    let hi = bounds.upper().to_f64();
    let (p_lo, p_hi) = probe_points(lo, hi, tol);
    let s_lo = term.slope(p_lo)?;
    let s_hi = term.slope(p_hi)?;

    if s_lo > 0.0 && s_hi > 0.0 {
        Ok(CaseLabel::Increasing)
    } else if s_lo < 0.0 && s_hi < 0.0 {
        Ok(CaseLabel::Decreasing)
    } else if s_lo <= 0.0 && s_hi >= 0.0 {
        let z = bisect_stationary(term, p_lo, p_hi, tol)?;
        Ok(CaseLabel::InteriorMin { z })
    } else {
        Err(SolverError::InvalidProblem(
            "slope decreases across the box; term is not convex".into(),
        ))
    }
}

/// Two probe points strictly inside `(lo, hi)`, offset from the ends by a
/// margin tied to the root tolerance.
fn probe_points(lo: f64, hi: f64, tol: &Tolerances) -> (f64, f64) {
    let eps = tol.root_tol.sqrt();
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let margin = (eps * lo.abs().max(1.0)).min(0.25 * (hi - lo));
            (lo + margin, hi - (eps * hi.abs().max(1.0)).min(0.25 * (hi - lo)))
        }
        (true, false) => {
            let margin = (eps * lo.abs().max(1.0)).min(0.25);
            (lo + margin, lo.max(0.0) + 1.0)
        }
        (false, true) => (hi.min(0.0) - 1.0, hi - (eps * hi.abs().max(1.0)).min(0.25)),
        (false, false) => (-1.0, 1.0),
    }
}

/// Bisects `f'` for its root on `[lo, hi]`, assuming `f'(lo) ≤ 0 ≤ f'(hi)`.
fn bisect_stationary(
    term: &dyn Term,
    mut lo: f64,
    mut hi: f64,
    tol: &Tolerances,
) -> Result<f64, SolverError> {
    for _ in 0..4096 {
        if hi - lo <= tol.root_tol * hi.abs().max(lo.abs()).max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if term.slope(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fixes every increasing term at its lower bound and shifts the budgets.
///
/// The fixed set need not be a prefix of the index range: each fixed `l_n`
/// is subtracted from every budget at or after `n`. A variable is fixed
/// whether or not any constraint covers it; the reduction is constraint-free.
///
/// Fails with `IllPosed` when an increasing term has an infinite lower
/// bound, since its infimum is then unattained.
pub fn fix_increasing_terms(
    problem: &Problem,
    labels: &[CaseLabel],
) -> Result<PreprocessReport, SolverError> {
    assert_eq!(labels.len(), problem.len(), "one label per term");

    let mut fixed = BTreeMap::new();
    let mut surviving = Vec::new();
    for (idx, label) in labels.iter().enumerate() {
        let n = idx + 1;
        match label {
            CaseLabel::Increasing => match problem.bounds()[idx].lower().as_finite() {
                Some(l) => {
                    fixed.insert(n, l);
                }
                None => {
                    return Err(SolverError::IllPosed(format!(
                        "increasing term {n} has lower bound -inf; its infimum is unattained"
                    )));
                }
            },
            _ => surviving.push(n),
        }
    }

    let mut adjusted = BTreeMap::new();
    for (&j, &rho) in problem.budgets() {
        let shift: f64 = fixed.iter().filter(|(&n, _)| n <= j).map(|(_, &l)| l).sum();
        adjusted.insert(j, rho - shift);
    }

    let tightened = surviving
        .iter()
        .map(|&n| problem.bounds()[n - 1].upper())
        .collect();

    Ok(PreprocessReport {
        labels: labels.to_vec(),
        fixed,
        adjusted_budgets: adjusted,
        surviving_indices: surviving,
        tightened_uppers: tightened,
    })
}

/// Tightens the upper bound of every interior-minimum term to its
/// stationary point. After this step every surviving term is strictly
/// decreasing on its (possibly tightened) box.
pub fn tighten_interior_minima(mut report: PreprocessReport) -> PreprocessReport {
    for (pos, &n) in report.surviving_indices.iter().enumerate() {
        if let CaseLabel::InteriorMin { z } = report.labels[n - 1] {
            report.tightened_uppers[pos] = ExtendedReal::finite(z);
        }
    }
    report
}

/// Classifies every term and applies both reductions.
///
/// Assumes the problem already passed [`crate::problem::validate`].
pub fn reduce(problem: &Problem, tol: &Tolerances) -> Result<PreprocessReport, SolverError> {
    let labels = problem
        .terms()
        .iter()
        .zip(problem.bounds())
        .map(|(term, bounds)| classify_term(term, bounds, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(tighten_interior_minima(fix_increasing_terms(problem, &labels)?))
}
