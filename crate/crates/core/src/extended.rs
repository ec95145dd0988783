//! Extended reals: finite values plus first-class infinity markers.
//!
//! Bounds may be infinite, and several branch decisions (feasibility sums,
//! the zero-multiplier test) must treat infinities exactly rather than as
//! large sentinels. `ExtendedReal` keeps the markers distinct and makes the
//! one illegal combination, `∞ − ∞`, a loud defect instead of a silent NaN.

use std::cmp::Ordering;
use std::fmt;

/// A real number, or one of the two infinity markers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    /// Wraps a finite value. Panics on NaN or infinite input; use
    /// [`ExtendedReal::from_f64`] to map IEEE infinities to markers.
    pub fn finite(value: f64) -> Self {
        assert!(value.is_finite(), "ExtendedReal::finite requires a finite value");
        ExtendedReal::Finite(value)
    }

    /// Maps IEEE infinities to the corresponding markers. Panics on NaN.
    pub fn from_f64(value: f64) -> Self {
        assert!(!value.is_nan(), "ExtendedReal cannot represent NaN");
        if value == f64::INFINITY {
            ExtendedReal::PosInf
        } else if value == f64::NEG_INFINITY {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(value)
        }
    }

    /// The finite payload, if any.
    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Converts to `f64`, mapping markers to IEEE infinities. Safe wherever
    /// IEEE semantics coincide with extended-real semantics (comparisons,
    /// min/max clamping); sums must stay in `ExtendedReal` via `+`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::NegInf => f64::NEG_INFINITY,
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInf => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        matches!(self, ExtendedReal::PosInf)
    }

    pub fn is_neg_inf(self) -> bool {
        matches!(self, ExtendedReal::NegInf)
    }

}

impl std::ops::Add for ExtendedReal {
    type Output = ExtendedReal;

    /// Extended-real addition. `∞ − ∞` is a programming error and panics;
    /// callers are expected to keep sums one-signed.
    fn add(self, other: ExtendedReal) -> ExtendedReal {
        use ExtendedReal::*;
        match (self, other) {
            (NegInf, PosInf) | (PosInf, NegInf) => {
                panic!("defect: ∞ − ∞ encountered in extended-real arithmetic")
            }
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        let ord = match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
            (Finite(a), Finite(b)) => return a.partial_cmp(b),
        };
        Some(ord)
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => write!(f, "-inf"),
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInf => write!(f, "+inf"),
        }
    }
}
