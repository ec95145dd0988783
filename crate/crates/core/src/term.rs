//! Objective-term families: per-coordinate strictly convex functions.
//!
//! Each term knows its value `f(x)`, its slope `f'(x)`, the negated slope
//! `h(x) = -f'(x)` together with the inverse `h⁻¹(ς)`, and its stationary
//! point when one exists. The negated slope is the quantity the multiplier
//! engine works with: on any interval where `f` is strictly decreasing,
//! `h` is positive and strictly decreasing, so `h⁻¹` is well defined.
//!
//! The built-in families form a closed enum. New families can be plugged in
//! through the [`Term`] trait; a term that does not provide an analytic
//! inverse slope is handled by the engine through bisection on `h` over the
//! box, so only `value`, `slope`, `stationary_point`, and `domain` are
//! mandatory.

use crate::error::SolverError;
use crate::extended::ExtendedReal;

/// Contract every objective term must satisfy.
///
/// Requirements on the implementor, spot-checked by the test suite rather
/// than proven: `f` is strictly convex and continuously differentiable on
/// the interior of its natural domain, and values at domain edges are the
/// one-sided limits.
pub trait Term {
    /// `f(x)` for `x` in the closure of the natural domain. Edge points and
    /// IEEE infinities evaluate to the one-sided limit, which may be
    /// `f64::INFINITY`.
    fn value(&self, x: f64) -> Result<f64, SolverError>;

    /// `f'(x)` for `x` in the open interior of the natural domain.
    fn slope(&self, x: f64) -> Result<f64, SolverError>;

    /// The point `z` with `f'(z) = 0`, when the family has one.
    fn stationary_point(&self) -> Option<f64>;

    /// Natural domain as an open interval; bounds must lie inside its
    /// closure.
    fn domain(&self) -> (ExtendedReal, ExtendedReal);

    /// `h(x) = -f'(x)`.
    fn neg_slope(&self, x: f64) -> Result<f64, SolverError> {
        Ok(-self.slope(x)?)
    }

    /// Analytic `h⁻¹(ς)` for `ς ≥ 0`, unclamped. May return
    /// `f64::INFINITY` as the `ς → 0` limit when `h` never vanishes.
    /// Returning `None` means the family provides no analytic inverse and
    /// the engine falls back to bisection on `h`.
    fn inverse_neg_slope(&self, varsigma: f64) -> Option<f64> {
        let _ = varsigma;
        None
    }
}

/// The built-in term families.
///
/// * `Exponential`: `f(x) = w·e^(−x)` with `w > 0`, on all of ℝ.
/// * `NegLog`: `f(x) = −ln(a + x)` on `x > −a`.
/// * `Quadratic`: `f(x) = (x − t)²/2`, on all of ℝ.
/// * `Reciprocal`: `f(x) = w/(x + a)` with `w > 0`, on `x > −a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveTerm {
    Exponential { w: f64 },
    NegLog { a: f64 },
    Quadratic { t: f64 },
    Reciprocal { w: f64, a: f64 },
}

impl ObjectiveTerm {
    /// Checks the parameter invariants of the family.
    pub fn check_parameters(&self) -> Result<(), SolverError> {
        let ok = match *self {
            ObjectiveTerm::Exponential { w } => w.is_finite() && w > 0.0,
            ObjectiveTerm::NegLog { a } => a.is_finite(),
            ObjectiveTerm::Quadratic { t } => t.is_finite(),
            ObjectiveTerm::Reciprocal { w, a } => w.is_finite() && w > 0.0 && a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SolverError::InvalidProblem(format!(
                "term parameters out of range: {self:?}"
            )))
        }
    }

    fn domain_error(&self, x: f64) -> SolverError {
        SolverError::Domain(format!("x = {x} outside the domain of {self:?}"))
    }
}

impl Term for ObjectiveTerm {
    fn value(&self, x: f64) -> Result<f64, SolverError> {
        if x.is_nan() {
            return Err(self.domain_error(x));
        }
        match *self {
            ObjectiveTerm::Exponential { w } => Ok(w * (-x).exp()),
            ObjectiveTerm::NegLog { a } => {
                if x + a < 0.0 {
                    Err(self.domain_error(x))
                } else if x + a == 0.0 {
                    Ok(f64::INFINITY)
                } else {
                    Ok(-(a + x).ln())
                }
            }
            ObjectiveTerm::Quadratic { t } => {
                if x.is_infinite() {
                    Ok(f64::INFINITY)
                } else {
                    Ok(0.5 * (x - t) * (x - t))
                }
            }
            ObjectiveTerm::Reciprocal { w, a } => {
                if x + a < 0.0 {
                    Err(self.domain_error(x))
                } else if x + a == 0.0 {
                    Ok(f64::INFINITY)
                } else {
                    Ok(w / (x + a))
                }
            }
        }
    }

    fn slope(&self, x: f64) -> Result<f64, SolverError> {
        if !x.is_finite() {
            return Err(self.domain_error(x));
        }
        match *self {
            ObjectiveTerm::Exponential { w } => Ok(-w * (-x).exp()),
            ObjectiveTerm::NegLog { a } => {
                if x + a <= 0.0 {
                    Err(self.domain_error(x))
                } else {
                    Ok(-1.0 / (a + x))
                }
            }
            ObjectiveTerm::Quadratic { t } => Ok(x - t),
            ObjectiveTerm::Reciprocal { w, a } => {
                if x + a <= 0.0 {
                    Err(self.domain_error(x))
                } else {
                    Ok(-w / ((x + a) * (x + a)))
                }
            }
        }
    }

    fn stationary_point(&self) -> Option<f64> {
        match *self {
            ObjectiveTerm::Quadratic { t } => Some(t),
            _ => None,
        }
    }

    fn domain(&self) -> (ExtendedReal, ExtendedReal) {
        match *self {
            ObjectiveTerm::Exponential { .. } | ObjectiveTerm::Quadratic { .. } => {
                (ExtendedReal::NegInf, ExtendedReal::PosInf)
            }
            ObjectiveTerm::NegLog { a } | ObjectiveTerm::Reciprocal { a, .. } => {
                (ExtendedReal::finite(-a), ExtendedReal::PosInf)
            }
        }
    }

    fn inverse_neg_slope(&self, varsigma: f64) -> Option<f64> {
        debug_assert!(varsigma >= 0.0, "inverse_neg_slope requires ς ≥ 0");
        // ln(0) = −inf and 1/0 = +inf give the ς → 0 limits for free.
        let x = match *self {
            ObjectiveTerm::Exponential { w } => w.ln() - varsigma.ln(),
            ObjectiveTerm::NegLog { a } => 1.0 / varsigma - a,
            ObjectiveTerm::Quadratic { t } => t - varsigma,
            ObjectiveTerm::Reciprocal { w, a } => (w / varsigma).sqrt() - a,
        };
        Some(x)
    }
}

/// `f(x)`, extending by continuity at domain edges and infinite arguments.
pub fn term_value(term: &ObjectiveTerm, x: f64) -> Result<f64, SolverError> {
    term.value(x)
}

/// `f'(x)` on the open domain interior.
pub fn term_slope(term: &ObjectiveTerm, x: f64) -> Result<f64, SolverError> {
    term.slope(x)
}

/// The unique finite `x` with `h(x) = ς`, unclamped. Clamping onto a box is
/// the engine's job (see [`crate::engine::xi`]).
pub fn inverse_slope(term: &ObjectiveTerm, varsigma: f64) -> Result<f64, SolverError> {
    if varsigma.is_nan() || varsigma < 0.0 {
        return Err(SolverError::Domain(format!(
            "inverse slope requires ς ≥ 0, got {varsigma}"
        )));
    }
    let x = term
        .inverse_neg_slope(varsigma)
        .expect("built-in families provide an analytic inverse");
    if x.is_finite() {
        Ok(x)
    } else {
        Err(SolverError::Domain(format!(
            "h has no finite preimage of ς = {varsigma} for {term:?}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_examples() {
        let exp2 = ObjectiveTerm::Exponential { w: 2.0 };
        assert_eq!(term_value(&exp2, 0.0).unwrap(), 2.0);

        let quad = ObjectiveTerm::Quadratic { t: 1.0 };
        assert_eq!(term_value(&quad, 1.0).unwrap(), 0.0);

        let exp8 = ObjectiveTerm::Exponential { w: 8.0 };
        let v = term_value(&exp8, 1.9).unwrap();
        assert!((v - 8.0 * (-1.9f64).exp()).abs() < 1e-15);
        assert!((v - 1.1965).abs() < 1e-4);
    }

    #[test]
    fn value_takes_limits_at_edges() {
        let nl = ObjectiveTerm::NegLog { a: 1.0 };
        assert_eq!(term_value(&nl, -1.0).unwrap(), f64::INFINITY);
        assert!(term_value(&nl, -1.5).is_err());

        let exp = ObjectiveTerm::Exponential { w: 3.0 };
        assert_eq!(term_value(&exp, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(term_value(&exp, f64::NEG_INFINITY).unwrap(), f64::INFINITY);
    }

    #[test]
    fn slope_examples() {
        let quad = ObjectiveTerm::Quadratic { t: 1.5 };
        assert_eq!(term_slope(&quad, 1.5).unwrap(), 0.0);

        let exp2 = ObjectiveTerm::Exponential { w: 2.0 };
        assert_eq!(term_slope(&exp2, 0.0).unwrap(), -2.0);

        let nl = ObjectiveTerm::NegLog { a: 1.0 };
        assert_eq!(term_slope(&nl, 1.0).unwrap(), -0.5);
    }

    #[test]
    fn inverse_slope_examples() {
        let exp2 = ObjectiveTerm::Exponential { w: 2.0 };
        let x = inverse_slope(&exp2, 4.451).unwrap();
        assert!((x - (-0.8001)).abs() < 1e-3, "got {x}");

        let quad = ObjectiveTerm::Quadratic { t: 3.0 };
        assert_eq!(inverse_slope(&quad, 1.0).unwrap(), 2.0);

        let rec = ObjectiveTerm::Reciprocal { w: 4.0, a: 0.0 };
        assert_eq!(inverse_slope(&rec, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn inverse_slope_rejects_inadmissible_levels() {
        let exp = ObjectiveTerm::Exponential { w: 2.0 };
        assert!(inverse_slope(&exp, 0.0).is_err());
        assert!(inverse_slope(&exp, -1.0).is_err());
        // Quadratic h has full range, so ς = 0 is fine.
        let quad = ObjectiveTerm::Quadratic { t: 3.0 };
        assert_eq!(inverse_slope(&quad, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn parameters_are_checked() {
        assert!(ObjectiveTerm::Exponential { w: 0.0 }.check_parameters().is_err());
        assert!(ObjectiveTerm::Reciprocal { w: -1.0, a: 0.0 }.check_parameters().is_err());
        assert!(ObjectiveTerm::Quadratic { t: f64::NAN }.check_parameters().is_err());
        assert!(ObjectiveTerm::NegLog { a: 2.0 }.check_parameters().is_ok());
    }
}
