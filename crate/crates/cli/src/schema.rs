//! Problem and solution documents.
//!
//! A problem file is a JSON object with keys `terms`, `lower`, `upper`,
//! `rho`, and optionally `constraints`. Bounds use `null` for infinite
//! endpoints. `rho` is either an array with one budget per index or a map
//! from 1-based index to budget; `constraints` lists the active 1-based
//! indices and defaults to all of them. Unknown keys and unknown term
//! families are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use sepsolve::{Bounds, Candidate, ExtendedReal, ObjectiveTerm, Problem, Solution};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub terms: Vec<Value>,
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
    pub rho: RhoSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoSpec {
    List(Vec<f64>),
    /// Keys are 1-based indices; JSON object keys are strings.
    Map(BTreeMap<String, f64>),
}

fn term_from_value(value: &Value, index: usize) -> Result<ObjectiveTerm, String> {
    let obj = value
        .as_object()
        .ok_or_else(|| format!("term {index}: expected an object"))?;
    let family = obj
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| format!("term {index}: missing string key \"family\""))?;
    let num = |key: &str| {
        obj.get(key)
            .and_then(Value::as_f64)
            .ok_or_else(|| format!("term {index} ({family}): missing numeric key \"{key}\""))
    };
    let (term, allowed): (ObjectiveTerm, &[&str]) = match family {
        "exp" => (ObjectiveTerm::Exponential { w: num("w")? }, &["family", "w"]),
        "neglog" => (ObjectiveTerm::NegLog { a: num("a")? }, &["family", "a"]),
        "quadratic" => (ObjectiveTerm::Quadratic { t: num("t")? }, &["family", "t"]),
        "reciprocal" => (
            ObjectiveTerm::Reciprocal { w: num("w")?, a: num("a")? },
            &["family", "w", "a"],
        ),
        other => return Err(format!("term {index}: unknown family \"{other}\"")),
    };
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(format!("term {index} ({family}): unknown key \"{key}\""));
        }
    }
    Ok(term)
}

fn term_to_value(term: &ObjectiveTerm) -> Value {
    match *term {
        ObjectiveTerm::Exponential { w } => json!({"family": "exp", "w": w}),
        ObjectiveTerm::NegLog { a } => json!({"family": "neglog", "a": a}),
        ObjectiveTerm::Quadratic { t } => json!({"family": "quadratic", "t": t}),
        ObjectiveTerm::Reciprocal { w, a } => json!({"family": "reciprocal", "w": w, "a": a}),
    }
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("problem file: {e}"))
    }

    /// Converts the document into a checked [`Problem`].
    pub fn to_problem(&self) -> Result<Problem, String> {
        let n = self.terms.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(format!(
                "length mismatch: {} terms, {} lower, {} upper",
                n,
                self.lower.len(),
                self.upper.len()
            ));
        }

        let mut terms = Vec::with_capacity(n);
        for (i, v) in self.terms.iter().enumerate() {
            terms.push(term_from_value(v, i + 1)?);
        }

        let mut bounds = Vec::with_capacity(n);
        for (i, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            let lo = lo.map_or(ExtendedReal::NegInf, ExtendedReal::from_f64);
            let hi = hi.map_or(ExtendedReal::PosInf, ExtendedReal::from_f64);
            bounds.push(Bounds::new(lo, hi).map_err(|e| format!("variable {}: {e}", i + 1))?);
        }

        let constraint_set: Vec<usize> = match &self.constraints {
            Some(list) => {
                if list.is_empty() {
                    return Err("\"constraints\" must be nonempty when present".into());
                }
                let mut sorted = list.clone();
                sorted.sort_unstable();
                sorted.dedup();
                sorted
            }
            None => (1..=n).collect(),
        };
        if let Some(&bad) = constraint_set.iter().find(|&&j| j == 0 || j > n) {
            return Err(format!("constraint index {bad} outside 1..={n}"));
        }

        let budgets: BTreeMap<usize, f64> = match &self.rho {
            RhoSpec::List(list) => {
                if list.len() != n {
                    return Err(format!("\"rho\" array has {} entries, need {n}", list.len()));
                }
                constraint_set.iter().map(|&j| (j, list[j - 1])).collect()
            }
            RhoSpec::Map(map) => {
                let mut parsed = BTreeMap::new();
                for (key, &rho) in map {
                    let j: usize = key
                        .parse()
                        .map_err(|_| format!("budget key \"{key}\" is not an index"))?;
                    if j == 0 || j > n {
                        return Err(format!("budget index {j} outside 1..={n}"));
                    }
                    if constraint_set.binary_search(&j).is_err() {
                        return Err(format!("budget at j={j} outside the constraint set"));
                    }
                    parsed.insert(j, rho);
                }
                let mut budgets = BTreeMap::new();
                for &j in &constraint_set {
                    let rho = parsed
                        .get(&j)
                        .ok_or_else(|| format!("missing budget for constraint j={j}"))?;
                    budgets.insert(j, *rho);
                }
                budgets
            }
        };

        Problem::new(terms, bounds, budgets).map_err(|e| e.to_string())
    }

    /// Renders a [`Problem`] back into document form.
    pub fn from_problem(problem: &Problem) -> Self {
        let n = problem.len();
        let terms = problem.terms().iter().map(term_to_value).collect();
        let lower = problem
            .bounds()
            .iter()
            .map(|b| b.lower().as_finite())
            .collect();
        let upper = problem
            .bounds()
            .iter()
            .map(|b| b.upper().as_finite())
            .collect();
        let full: Vec<usize> = (1..=n).collect();
        let active: Vec<usize> = problem.constraint_set().collect();
        let (rho, constraints) = if active == full {
            (
                RhoSpec::List((1..=n).map(|j| problem.budgets()[&j]).collect()),
                None,
            )
        } else {
            let map = problem
                .budgets()
                .iter()
                .map(|(&j, &rho)| (j.to_string(), rho))
                .collect();
            (RhoSpec::Map(map), Some(active))
        };
        ProblemFile {
            terms,
            lower,
            upper,
            rho,
            constraints,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageJson>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageJson {
    pub mu_star: f64,
    pub k_star: usize,
    pub candidates: BTreeMap<usize, CandidateJson>,
    pub gammas: BTreeMap<usize, f64>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CandidateJson {
    Solved { value: f64 },
    Zero { value: f64 },
    Skipped,
}

impl SolutionFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("solution file: {e}"))
    }

    pub fn optimal(solution: &Solution, with_trace: bool) -> Self {
        let stages = with_trace.then(|| {
            solution
                .stages
                .iter()
                .map(|s| StageJson {
                    mu_star: s.mu_star,
                    k_star: s.k_star,
                    candidates: s
                        .candidates
                        .iter()
                        .map(|(&j, c)| {
                            let cj = match *c {
                                Candidate::Solved(value) => CandidateJson::Solved { value },
                                Candidate::Zero => CandidateJson::Zero { value: 0.0 },
                                Candidate::Skipped => CandidateJson::Skipped,
                            };
                            (j, cj)
                        })
                        .collect(),
                    gammas: s.entry_gammas.clone(),
                })
                .collect()
        });
        SolutionFile {
            status: "optimal".into(),
            x: Some(solution.x.clone()),
            sigma: Some(solution.sigma.clone()),
            objective: Some(solution.objective),
            stages,
        }
    }

    pub fn status_only(status: &str) -> Self {
        SolutionFile {
            status: status.into(),
            x: None,
            sigma: None,
            objective: None,
            stages: None,
        }
    }

    pub fn render(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("solution serializes");
        text.push('\n');
        text
    }
}

pub fn render_problem(file: &ProblemFile) -> String {
    let mut text = serde_json::to_string_pretty(file).expect("problem serializes");
    text.push('\n');
    text
}
