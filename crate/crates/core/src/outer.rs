//! The closed family of outer functions wrapped around ratios.

#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

use crate::extended::ExtendedReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// Concave outer function `f(r)` applied to a ratio.
///
/// Increasing kinds belong on the max side, decreasing kinds on the min side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterFunction {
    /// `w·r`
    Identity(f64),
    /// `w·ln(1 + r)`
    WeightedLog1p(f64),
    /// `w·ln(1 − r)`
    WeightedLog1m(f64),
    /// `−1/(2r)`
    NegHalfInverse,
    /// `−w·r`
    NegIdentity(f64),
}

impl OuterFunction {
    pub fn monotonicity(&self) -> Monotonicity {
        match self {
            OuterFunction::Identity(_)
            | OuterFunction::WeightedLog1p(_)
            | OuterFunction::NegHalfInverse => Monotonicity::Increasing,
            OuterFunction::WeightedLog1m(_) | OuterFunction::NegIdentity(_) => {
                Monotonicity::Decreasing
            }
        }
    }

    pub fn weight(&self) -> f64 {
        match *self {
            OuterFunction::Identity(w)
            | OuterFunction::WeightedLog1p(w)
            | OuterFunction::WeightedLog1m(w)
            | OuterFunction::NegIdentity(w) => w,
            OuterFunction::NegHalfInverse => 1.0,
        }
    }

    /// Open domain of the function.
    pub fn in_domain(&self, r: f64) -> bool {
        if !r.is_finite() {
            return false;
        }
        match self {
            OuterFunction::Identity(_) | OuterFunction::NegIdentity(_) => true,
            OuterFunction::WeightedLog1p(_) => r > -1.0,
            OuterFunction::WeightedLog1m(_) => r < 1.0,
            OuterFunction::NegHalfInverse => r > 0.0,
        }
    }

    pub fn evaluate(&self, r: f64) -> Option<f64> {
        if !self.in_domain(r) {
            return None;
        }
        Some(match *self {
            OuterFunction::Identity(w) => w * r,
            OuterFunction::WeightedLog1p(w) => w * r.ln_1p(),
            OuterFunction::WeightedLog1m(w) => w * (-r).ln_1p(),
            OuterFunction::NegHalfInverse => -0.5 / r,
            OuterFunction::NegIdentity(w) => -w * r,
        })
    }

    pub fn derivative(&self, r: f64) -> Option<f64> {
        if !self.in_domain(r) {
            return None;
        }
        Some(match *self {
            OuterFunction::Identity(w) => w,
            OuterFunction::WeightedLog1p(w) => w / (1.0 + r),
            OuterFunction::WeightedLog1m(w) => -w / (1.0 - r),
            OuterFunction::NegHalfInverse => 0.5 / (r * r),
            OuterFunction::NegIdentity(w) => -w,
        })
    }

    /// Evaluation on the extended reals.
    ///
    /// `f(+∞)` is `−∞` for the decreasing kinds (both are unbounded below),
    /// `0` for `−1/(2r)` and `+∞` for the increasing unbounded kinds.
    pub fn evaluate_extended(&self, r: ExtendedReal) -> f64 {
        match r {
            ExtendedReal::Finite(v) => self.evaluate(v).unwrap_or(f64::NEG_INFINITY),
            ExtendedReal::PosInfinity => match *self {
                OuterFunction::NegHalfInverse => 0.0,
                OuterFunction::WeightedLog1m(_) => f64::NEG_INFINITY,
                OuterFunction::NegIdentity(w) | OuterFunction::Identity(w) | OuterFunction::WeightedLog1p(w) => {
                    if w == 0.0 {
                        0.0
                    } else if self.monotonicity() == Monotonicity::Decreasing {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    }
                }
            },
        }
    }
}
