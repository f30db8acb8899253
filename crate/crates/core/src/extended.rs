//! Reals extended with `+∞`, and the `[a]₊` clamp used by the inverse
//! quadratic transform.

use core::fmt;
use core::ops::Add;

/// A real number or `+∞`.
///
/// Conversions to `f64` are explicit ([`ExtendedReal::to_f64`]); the infinite
/// element never turns into a finite number on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// `f64` view, with `+∞` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;

    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

/// Result of `[a]₊`: either a strictly positive value or the `0⁺` limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositivePart {
    Positive(f64),
    ZeroPlus,
}

impl PositivePart {
    pub fn value(self) -> f64 {
        match self {
            PositivePart::Positive(v) => v,
            PositivePart::ZeroPlus => 0.0,
        }
    }

    /// `1/[a]₊`, which is `+∞` at the `0⁺` sentinel.
    pub fn recip(self) -> ExtendedReal {
        match self {
            PositivePart::Positive(v) => ExtendedReal::from(1.0 / v),
            PositivePart::ZeroPlus => ExtendedReal::PosInfinity,
        }
    }
}

/// `[a]₊ = lim_{b→a⁺} max(b, 0)`.
pub fn plus_part(a: f64) -> PositivePart {
    if a > 0.0 {
        PositivePart::Positive(a)
    } else {
        PositivePart::ZeroPlus
    }
}
