//! Independent verification: KKT certificate and brute-force grid search.
//!
//! The certificate reconstructs the per-constraint multipliers `λ_j` from
//! the cumulative multipliers `σ_n` and checks primal feasibility,
//! multiplier sign, complementary slackness, and stationarity. For a convex
//! problem these conditions are sufficient for global optimality, so any
//! point passing the certificate needs no second solver to confirm. The
//! grid search exists as a belt-and-braces cross-check at tiny dimension.

use std::collections::BTreeMap;

use crate::error::SolverError;
use crate::problem::{Problem, Tolerances};
use crate::term::Term;

/// `Σ f_n(x_n)` with values extended by continuity at domain edges.
pub fn objective_value(problem: &Problem, x: &[f64]) -> Result<f64, SolverError> {
    if x.len() != problem.len() {
        return Err(SolverError::InvalidProblem(format!(
            "point has {} coordinates, problem has {}",
            x.len(),
            problem.len()
        )));
    }
    let mut sum = 0.0;
    for (term, &xn) in problem.terms().iter().zip(x) {
        sum += term.value(xn)?;
    }
    Ok(sum)
}

/// Residuals of the KKT system at a candidate point, and the reconstructed
/// per-constraint multipliers.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    /// `λ_j = σ_j − σ_(next constrained index)`, with σ past the last
    /// constrained index taken as 0.
    pub lambda: BTreeMap<usize, f64>,
    /// Worst prefix-sum overshoot (scaled by `max(1, |ρ_j|)`) or box
    /// violation.
    pub feasibility: f64,
    /// Worst gradient residual `f'_n(x_n) + σ_n`, one-sided at the bounds.
    pub stationarity: f64,
    /// Worst `|λ_j · (Σ_{n≤j} x_n − ρ_j)|`, scaled by `max(1, |ρ_j|)`.
    pub slackness: f64,
    /// Worst negative part of any `λ_j`.
    pub sign: f64,
    /// All residuals at or below `cert_tol`.
    pub pass: bool,
}

impl CertificateReport {
    /// Largest of the four residuals.
    pub fn worst(&self) -> f64 {
        self.feasibility
            .max(self.stationarity)
            .max(self.slackness)
            .max(self.sign)
    }
}

/// Checks the KKT conditions of `(x, σ)` against the problem.
///
/// Stationarity is `|f'_n(x_n) + σ_n| ≤ tol` at interior points,
/// `f'_n + σ_n ≥ −tol` where `x_n` sits at the lower bound, and
/// `f'_n + σ_n ≤ tol` at the upper bound. A coordinate where the slope is
/// undefined contributes an infinite residual.
///
/// Panics if the dimensions of `x` or `sigma` disagree with the problem.
pub fn kkt_certificate(
    problem: &Problem,
    x: &[f64],
    sigma: &[f64],
    tol: &Tolerances,
) -> CertificateReport {
    let n = problem.len();
    assert_eq!(x.len(), n, "x must have one entry per variable");
    assert_eq!(sigma.len(), n, "sigma must have one entry per variable");

    let constrained: Vec<usize> = problem.constraint_set().collect();
    let mut lambda = BTreeMap::new();
    for (idx, &j) in constrained.iter().enumerate() {
        let next_sigma = constrained.get(idx + 1).map_or(0.0, |&j2| sigma[j2 - 1]);
        lambda.insert(j, sigma[j - 1] - next_sigma);
    }

    let mut feasibility = 0.0f64;
    let mut slackness = 0.0f64;
    let mut prefix = 0.0f64;
    let mut next = 1usize;
    for (&j, &rho) in problem.budgets() {
        while next <= j {
            prefix += x[next - 1];
            next += 1;
        }
        let scale = rho.abs().max(1.0);
        feasibility = feasibility.max((prefix - rho) / scale);
        slackness = slackness.max((lambda[&j] * (prefix - rho)).abs() / scale);
    }

    let mut stationarity = 0.0f64;
    for (idx, (term, bounds)) in problem.terms().iter().zip(problem.bounds()).enumerate() {
        let xn = x[idx];
        let lo = bounds.lower().to_f64();
        let hi = bounds.upper().to_f64();
        feasibility = feasibility.max(lo - xn).max(xn - hi);

        let grad = match term.slope(xn) {
            Ok(s) => s + sigma[idx],
            Err(_) => {
                stationarity = f64::INFINITY;
                continue;
            }
        };
        let at_lower = xn <= lo + tol.feas_tol;
        let at_upper = xn >= hi - tol.feas_tol;
        let residual = match (at_lower, at_upper) {
            (true, true) => (-grad).max(0.0).min(grad.max(0.0)),
            (true, false) => (-grad).max(0.0),
            (false, true) => grad.max(0.0),
            (false, false) => grad.abs(),
        };
        stationarity = stationarity.max(residual);
    }

    let sign = lambda
        .values()
        .fold(0.0f64, |acc, &l| acc.max(-l));

    let pass = feasibility <= tol.cert_tol
        && stationarity <= tol.cert_tol
        && slackness <= tol.cert_tol
        && sign <= tol.cert_tol;

    CertificateReport {
        lambda,
        feasibility,
        stationarity,
        slackness,
        sign,
        pass,
    }
}

/// Best point of an exhaustive grid search.
#[derive(Debug, Clone)]
pub struct GridSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Exhaustively minimizes over the grid `{l_n + k·(u_n−l_n)/resolution}`,
/// keeping only points whose prefix sums satisfy every constraint. Intended
/// as a desk-scale reference: requires `N ≤ 4` and finite boxes.
///
/// Ties resolve to the lexicographically lowest grid index. The engine's
/// objective can undershoot the grid's by at most
/// `L_max · Σ(u_n − l_n) / resolution`, with `L_max` a bound on `|f'|` over
/// the boxes (see [`max_slope_bound`]).
pub fn grid_reference(problem: &Problem, resolution: usize) -> Result<GridSolution, SolverError> {
    let n = problem.len();
    if n > 4 {
        return Err(SolverError::InvalidProblem(
            "grid reference supports at most 4 variables".into(),
        ));
    }
    if resolution == 0 {
        return Err(SolverError::InvalidProblem("resolution must be positive".into()));
    }
    for b in problem.bounds() {
        if !(b.lower().is_finite() && b.upper().is_finite()) {
            return Err(SolverError::InvalidProblem(
                "grid reference requires finite boxes".into(),
            ));
        }
    }

    // Per-axis grid values and term values.
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut values: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (term, b) in problem.terms().iter().zip(problem.bounds()) {
        let lo = b.lower().to_f64();
        let hi = b.upper().to_f64();
        let mut pts = Vec::with_capacity(resolution + 1);
        let mut vals = Vec::with_capacity(resolution + 1);
        for k in 0..=resolution {
            let x = lo + (hi - lo) * (k as f64) / (resolution as f64);
            pts.push(x);
            vals.push(term.value(x)?);
        }
        axes.push(pts);
        values.push(vals);
    }

    let rho_by_depth: Vec<Option<f64>> = (1..=n).map(|j| problem.budgets().get(&j).copied()).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut index = vec![0usize; n];
    search(
        &rho_by_depth,
        &axes,
        &values,
        0,
        0.0,
        0.0,
        &mut index,
        &mut best,
    );

    match best {
        Some((objective, idx)) => {
            let x = idx.iter().enumerate().map(|(d, &k)| axes[d][k]).collect();
            Ok(GridSolution { x, objective })
        }
        None => Err(SolverError::EmptyFeasibleSet),
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    rho_by_depth: &[Option<f64>],
    axes: &[Vec<f64>],
    values: &[Vec<f64>],
    depth: usize,
    prefix_sum: f64,
    objective: f64,
    index: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<usize>)>,
) {
    if depth == axes.len() {
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            *best = Some((objective, index.clone()));
        }
        return;
    }
    let constraint = rho_by_depth[depth];
    for k in 0..axes[depth].len() {
        let sum = prefix_sum + axes[depth][k];
        if let Some(rho) = constraint {
            // Axis values ascend, so the first violated prefix ends the row;
            // deeper coordinates cannot repair it.
            if sum > rho {
                break;
            }
        }
        index[depth] = k;
        search(
            rho_by_depth,
            axes,
            values,
            depth + 1,
            sum,
            objective + values[depth][k],
            index,
            best,
        );
    }
}

/// A bound on `|f'|` over the boxes: the slope magnitude at both box ends
/// (slopes are monotone for convex terms). Infinite when a box touches a
/// domain edge where the slope diverges.
pub fn max_slope_bound(problem: &Problem) -> f64 {
    let mut bound = 0.0f64;
    for (term, b) in problem.terms().iter().zip(problem.bounds()) {
        for end in [b.lower().to_f64(), b.upper().to_f64()] {
            let s = term.slope(end).map_or(f64::INFINITY, |s| s.abs());
            bound = bound.max(s);
        }
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Bounds;
    use crate::term::ObjectiveTerm;

    fn quad_pair() -> Problem {
        Problem::with_full_constraints(
            vec![
                ObjectiveTerm::Quadratic { t: 2.0 },
                ObjectiveTerm::Quadratic { t: 2.0 },
            ],
            vec![
                Bounds::from_f64(0.0, 1.0).unwrap(),
                Bounds::from_f64(0.0, 1.0).unwrap(),
            ],
            vec![1.0, 1.5],
        )
        .unwrap()
    }

    #[test]
    fn objective_examples() {
        let p = Problem::with_full_constraints(
            vec![
                ObjectiveTerm::Quadratic { t: 0.0 },
                ObjectiveTerm::Quadratic { t: 0.0 },
            ],
            vec![
                Bounds::from_f64(-1.0, 1.0).unwrap(),
                Bounds::from_f64(-1.0, 1.0).unwrap(),
            ],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert_eq!(objective_value(&p, &[0.0, 0.0]).unwrap(), 0.0);

        let p = Problem::with_full_constraints(
            vec![ObjectiveTerm::NegLog { a: 1.0 }],
            vec![Bounds::from_f64(0.0, 2.0).unwrap()],
            vec![1.0],
        )
        .unwrap();
        assert_eq!(objective_value(&p, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn grid_matches_hand_solution() {
        // Projection of (2,2) onto {x1 + x2 ≤ 1.5} within the box: the
        // symmetric point (0.75, 0.75), with multiplier 1.25 on j=2.
        let sol = grid_reference(&quad_pair(), 200).unwrap();
        assert!((sol.x[0] - 0.75).abs() < 1e-12, "x1 = {}", sol.x[0]);
        assert!((sol.x[1] - 0.75).abs() < 1e-12, "x2 = {}", sol.x[1]);
        assert!((sol.objective - 1.5625).abs() < 1e-12);
    }

    #[test]
    fn grid_reports_empty_feasible_set() {
        let p = Problem::with_full_constraints(
            vec![
                ObjectiveTerm::Quadratic { t: 0.0 },
                ObjectiveTerm::Quadratic { t: 0.0 },
            ],
            vec![
                Bounds::from_f64(0.0, 1.0).unwrap(),
                Bounds::from_f64(2.0, 3.0).unwrap(),
            ],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            grid_reference(&p, 10),
            Err(SolverError::EmptyFeasibleSet)
        ));
    }

    #[test]
    fn certificate_rejects_box_violation() {
        let p = quad_pair();
        let report = kkt_certificate(&p, &[2.0, 0.5], &[1.0, 1.0], &Tolerances::default());
        assert!(!report.pass);
        assert!(report.feasibility > 0.5);
    }

    /// N = 4 exponential instance: w = (2, 5, 8, 0.5), u = (0.4, -1.2, 2, -1.8),
    /// ρ = (0.2, -2, 1.1, -1.9), lowers unbounded.
    fn exp_quartet() -> Problem {
        let w = [2.0, 5.0, 8.0, 0.5];
        let u = [0.4, -1.2, 2.0, -1.8];
        let terms = w.iter().map(|&w| ObjectiveTerm::Exponential { w }).collect();
        let bounds = u
            .iter()
            .map(|&u| Bounds::from_f64(f64::NEG_INFINITY, u).unwrap())
            .collect();
        Problem::with_full_constraints(terms, bounds, vec![0.2, -2.0, 1.1, -1.9]).unwrap()
    }

    fn quartet_optimum() -> ([f64; 4], [f64; 4]) {
        let hi = 2.0 * (0.8f64).exp();
        let lo = 8.0 * (-1.9f64).exp();
        ([-0.8, -1.2, 1.9, -1.8], [hi, hi, lo, lo])
    }

    #[test]
    fn certificate_accepts_the_quartet_optimum() {
        let p = exp_quartet();
        let (x, sigma) = quartet_optimum();
        let report = kkt_certificate(&p, &x, &sigma, &Tolerances::default());
        assert!(report.pass, "residuals: {report:?}");
        // λ = σ differences over the constraint set; slack constraints 1
        // and 3 carry zero multipliers.
        assert!(report.lambda[&1].abs() < 1e-12);
        assert!((report.lambda[&2] - (sigma[1] - sigma[2])).abs() < 1e-12);
        assert!((report.lambda[&2] - 3.2545).abs() < 1e-3);
        assert!(report.lambda[&3].abs() < 1e-12);
        assert!((report.lambda[&4] - sigma[3]).abs() < 1e-12);
    }

    #[test]
    fn certificate_flags_perturbed_interior_point() {
        let p = exp_quartet();
        let (mut x, sigma) = quartet_optimum();
        x[2] = 1.8; // interior, but h₃(1.8) = 8 e^{-1.8} ≈ 1.322 ≠ σ₃
        let report = kkt_certificate(&p, &x, &sigma, &Tolerances::default());
        assert!(!report.pass);
        assert!(report.stationarity > 0.1, "stationarity: {}", report.stationarity);
    }

    #[test]
    fn certificate_residuals_scale_linearly_with_perturbation() {
        let p = exp_quartet();
        let (x, sigma) = quartet_optimum();
        let tol = Tolerances::default();
        let base = kkt_certificate(&p, &x, &sigma, &tol).worst();
        for delta in [1e-10, 1e-8, 1e-6] {
            let mut xp = x;
            xp[0] += delta; // interior coordinate
            let worst = kkt_certificate(&p, &xp, &sigma, &tol).worst();
            // |dh/dx| ≈ σ₁ ≈ 4.45 at the optimum, so the residual grows by
            // about 4.5·δ.
            assert!(worst >= base);
            assert!(worst <= base + 10.0 * delta, "δ = {delta}: residual {worst}");
        }
    }

    #[test]
    fn grid_cross_checks_the_quartet_objective() {
        // Same instance with the lowers clipped to -3 so the grid applies.
        let w = [2.0, 5.0, 8.0, 0.5];
        let u = [0.4, -1.2, 2.0, -1.8];
        let terms: Vec<_> = w.iter().map(|&w| ObjectiveTerm::Exponential { w }).collect();
        let bounds: Vec<_> = u
            .iter()
            .map(|&u| Bounds::from_f64(-3.0, u).unwrap())
            .collect();
        let p =
            Problem::with_full_constraints(terms, bounds, vec![0.2, -2.0, 1.1, -1.9]).unwrap();
        let resolution = 40;
        let grid = grid_reference(&p, resolution).unwrap();
        let engine_objective = 25.273;
        let spacing: f64 = problem_ranges(&p).iter().sum();
        let bound = max_slope_bound(&p) * spacing / resolution as f64;
        assert!(grid.objective + 1e-9 >= engine_objective - bound);
        assert!((grid.objective - engine_objective).abs() <= bound);
    }

    fn problem_ranges(p: &Problem) -> Vec<f64> {
        p.bounds()
            .iter()
            .map(|b| b.upper().to_f64() - b.lower().to_f64())
            .collect()
    }
}
