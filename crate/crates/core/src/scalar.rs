//! Scalar ratio surrogates: quadratic transform (max side), inverse quadratic
//! transform (min side) and their mixed sum.
//!
//! For a max-side ratio `A/B` the surrogate `2y√A − y²B` never exceeds the
//! ratio and touches it at `y = √A/B`. For a min-side ratio the surrogate
//! `1/[2ỹ√B − ỹ²A]₊` never falls below the ratio and touches it at
//! `ỹ = √B/A`. Wrapping both in the matching monotone outer functions gives a
//! lower bound of the mixed objective that is tight at the anchor.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

use crate::error::{FpError, Result};
use crate::extended::{plus_part, ExtendedReal};
use crate::outer::{Monotonicity, OuterFunction};
use crate::solver::{FeasibleSet, MmProblem};

/// `2y√A − y²B`
pub fn quad_surrogate(a: f64, b: f64, y: f64) -> Result<f64> {
    check_ratio(a, b)?;
    Ok(2.0 * y * a.sqrt() - y * y * b)
}

/// `√A / B`, the maximizer of [`quad_surrogate`] over `y`.
pub fn opt_y(a: f64, b: f64) -> Result<f64> {
    check_ratio(a, b)?;
    Ok(a.sqrt() / b)
}

/// `1/[2ỹ√B − ỹ²A]₊`
pub fn inv_quad_surrogate(a: f64, b: f64, y_tilde: f64) -> Result<ExtendedReal> {
    check_ratio(a, b)?;
    Ok(plus_part(2.0 * y_tilde * b.sqrt() - y_tilde * y_tilde * a).recip())
}

/// `√B / (A + eps)`.
///
/// `eps = 0` is accepted as the exact limit when `A > 0`.
pub fn opt_y_tilde(a: f64, b: f64, eps: f64) -> Result<f64> {
    check_ratio(a, b)?;
    if eps < 0.0 || (eps == 0.0 && a == 0.0) {
        return Err(FpError::invalid("eps must be positive"));
    }
    Ok(b.sqrt() / (a + eps))
}

fn check_ratio(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(FpError::invalid("ratio numerator must be finite and nonnegative"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(FpError::invalid("ratio denominator must be finite and positive"));
    }
    Ok(())
}

/// Which way a ratio is pushed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Max,
    Min,
}

/// Smooth scalar function of the decision vector: writes the gradient into
/// the slice and returns the value.
pub type SmoothFn = Box<dyn Fn(&[f64], &mut [f64]) -> f64 + Send + Sync>;

/// One ratio `A(x)/B(x)` with its outer function.
pub struct RatioTerm {
    numerator: SmoothFn,
    denominator: SmoothFn,
    outer: OuterFunction,
    side: Side,
}

impl core::fmt::Debug for RatioTerm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("RatioTerm").field("outer", &self.outer).field("side", &self.side).finish()
    }
}

impl RatioTerm {
    pub fn new(
        side: Side,
        outer: OuterFunction,
        numerator: impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync + 'static,
        denominator: impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let expected = match side {
            Side::Max => Monotonicity::Increasing,
            Side::Min => Monotonicity::Decreasing,
        };
        if outer.monotonicity() != expected {
            return Err(FpError::invalid("outer function monotonicity does not match the ratio side"));
        }
        Ok(RatioTerm { numerator: Box::new(numerator), denominator: Box::new(denominator), outer, side })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn outer(&self) -> OuterFunction {
        self.outer
    }

    /// `(A(x), B(x))` with gradients written into the buffers.
    pub fn eval(&self, x: &[f64], grad_a: &mut [f64], grad_b: &mut [f64]) -> (f64, f64) {
        ((self.numerator)(x, grad_a), (self.denominator)(x, grad_b))
    }

    pub fn values(&self, x: &[f64]) -> (f64, f64) {
        let mut ga = vec![0.0; x.len()];
        let mut gb = vec![0.0; x.len()];
        self.eval(x, &mut ga, &mut gb)
    }
}

/// Auxiliary variables: one `y` per max-side term, one `ỹ` per min-side term,
/// each in term order within its side.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxState {
    pub y: Vec<f64>,
    pub y_tilde: Vec<f64>,
}

/// Mixed max-and-min sum-of-functions-of-ratios problem over a feasible set.
pub struct MixedFpProblem {
    dim: usize,
    terms: Vec<RatioTerm>,
    feasible: Box<dyn FeasibleSet + Send + Sync>,
    eps: f64,
}

impl MixedFpProblem {
    pub fn new(dim: usize, terms: Vec<RatioTerm>, feasible: impl FeasibleSet + Send + Sync + 'static) -> Result<Self> {
        if terms.is_empty() {
            return Err(FpError::invalid("a problem needs at least one ratio term"));
        }
        if feasible.dim() != dim {
            return Err(FpError::invalid("feasible set dimension does not match the problem"));
        }
        Ok(MixedFpProblem { dim, terms, feasible: Box::new(feasible), eps: crate::DEFAULT_EPS })
    }

    /// Safeguard used by [`MmProblem::update_aux`] for `ỹ`.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn terms(&self) -> &[RatioTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Auxiliaries at `anchor`; `eps = None` uses the exact `√B/A` for `ỹ`.
    pub fn aux_at(&self, anchor: &[f64], eps: Option<f64>) -> Result<AuxState> {
        let mut y = Vec::new();
        let mut y_tilde = Vec::new();
        for term in &self.terms {
            let (a, b) = term.values(anchor);
            match term.side {
                Side::Max => y.push(opt_y(a, b)?),
                Side::Min => {
                    let e = match eps {
                        Some(e) => e,
                        None if a > 0.0 => 0.0,
                        None => crate::DEFAULT_EPS,
                    };
                    y_tilde.push(opt_y_tilde(a, b, e)?)
                }
            }
        }
        Ok(AuxState { y, y_tilde })
    }

    /// Surrogate `g(x)` for fixed auxiliaries, with gradient.
    ///
    /// Returns `−∞` (with an unspecified gradient) when some min-side bracket
    /// is nonpositive or a surrogate ratio leaves its outer function's domain.
    pub fn surrogate_with(&self, aux: &AuxState, x: &[f64], grad: &mut [f64]) -> f64 {
        let n = x.len();
        let mut ga = vec![0.0; n];
        let mut gb = vec![0.0; n];
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (mut iy, mut it) = (0, 0);
        let mut total = 0.0;
        for term in &self.terms {
            let (a, b) = term.eval(x, &mut ga, &mut gb);
            let sa = a.max(0.0).sqrt();
            match term.side {
                Side::Max => {
                    let y = aux.y[iy];
                    iy += 1;
                    let q = 2.0 * y * sa - y * y * b;
                    let (Some(v), Some(d)) = (term.outer.evaluate(q), term.outer.derivative(q)) else {
                        return f64::NEG_INFINITY;
                    };
                    total += v;
                    let ka = if sa > 0.0 { y / sa } else { 0.0 };
                    for i in 0..n {
                        grad[i] += d * (ka * ga[i] - y * y * gb[i]);
                    }
                }
                Side::Min => {
                    let yt = aux.y_tilde[it];
                    it += 1;
                    let sb = b.sqrt();
                    let q = 2.0 * yt * sb - yt * yt * a;
                    let r = plus_part(q).recip();
                    let ExtendedReal::Finite(r) = r else {
                        if term.outer.evaluate_extended(r) == f64::NEG_INFINITY {
                            return f64::NEG_INFINITY;
                        }
                        total += term.outer.evaluate_extended(r);
                        continue;
                    };
                    let (Some(v), Some(d)) = (term.outer.evaluate(r), term.outer.derivative(r)) else {
                        return f64::NEG_INFINITY;
                    };
                    total += v;
                    // dr = −dQ/Q²
                    let kb = yt / sb;
                    let scale = -d / (q * q);
                    for i in 0..n {
                        grad[i] += scale * (kb * gb[i] - yt * yt * ga[i]);
                    }
                }
            }
        }
        total
    }

    /// Analytic gradient of the true objective. `None` outside the domain.
    pub fn objective_with_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let n = x.len();
        let mut ga = vec![0.0; n];
        let mut gb = vec![0.0; n];
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for term in &self.terms {
            let (a, b) = term.eval(x, &mut ga, &mut gb);
            if !(b > 0.0) || a < 0.0 {
                return None;
            }
            let r = a / b;
            total += term.outer.evaluate(r)?;
            let d = term.outer.derivative(r)?;
            for i in 0..n {
                grad[i] += d * (ga[i] * b - a * gb[i]) / (b * b);
            }
        }
        Some(total)
    }
}

/// `Σ_max f⁺(A/B) + Σ_min f⁻(A/B)`
pub fn mixed_objective(problem: &MixedFpProblem, x: &[f64]) -> Result<f64> {
    if x.len() != problem.dim {
        return Err(FpError::invalid("decision vector dimension mismatch"));
    }
    let mut total = 0.0;
    for (index, term) in problem.terms.iter().enumerate() {
        let (a, b) = term.values(x);
        if !(b > 0.0) || a < 0.0 {
            return Err(FpError::Domain { index });
        }
        total += term.outer.evaluate(a / b).ok_or(FpError::Domain { index })?;
    }
    Ok(total)
}

/// `g(x | anchor)` with auxiliaries set to their exact optima at `anchor`.
///
/// Bounded above by [`mixed_objective`] and equal to it at `x = anchor`.
/// Returns `−∞` when a min-side bracket is nonpositive at `x`.
pub fn mixed_surrogate(problem: &MixedFpProblem, x: &[f64], anchor: &[f64]) -> Result<f64> {
    if x.len() != problem.dim || anchor.len() != problem.dim {
        return Err(FpError::invalid("decision vector dimension mismatch"));
    }
    let aux = problem.aux_at(anchor, None)?;
    let mut grad = vec![0.0; x.len()];
    Ok(problem.surrogate_with(&aux, x, &mut grad))
}

impl MmProblem for MixedFpProblem {
    type Aux = AuxState;

    fn dim(&self) -> usize {
        self.dim
    }

    fn feasible(&self) -> &dyn FeasibleSet {
        &*self.feasible
    }

    fn objective(&self, x: &[f64]) -> Option<f64> {
        mixed_objective(self, x).ok()
    }

    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]) -> bool {
        self.objective_with_gradient(x, grad).is_some()
    }

    fn update_aux(&self, x: &[f64]) -> AuxState {
        // Feasible anchors always satisfy the aux preconditions.
        self.aux_at(x, Some(self.eps)).unwrap_or_else(|_| AuxState {
            y: vec![0.0; self.terms.iter().filter(|t| t.side == Side::Max).count()],
            y_tilde: vec![0.0; self.terms.iter().filter(|t| t.side == Side::Min).count()],
        })
    }

    fn surrogate(&self, aux: &AuxState, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let v = self.surrogate_with(aux, x, grad);
        v.is_finite().then_some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{run_mm, stationarity_residual, BoxSet, NoClock, SolveOptions};
    use proptest::prelude::*;

    fn linear(c: f64) -> impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync {
        move |x, g| {
            g[0] = c;
            c * x[0]
        }
    }

    fn constant(v: f64) -> impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync {
        move |_, g| {
            g.iter_mut().for_each(|gi| *gi = 0.0);
            v
        }
    }

    #[test]
    fn quad_surrogate_examples() {
        assert_eq!(quad_surrogate(4.0, 2.0, 1.0).unwrap(), 2.0);
        assert_eq!(quad_surrogate(4.0, 2.0, 0.0).unwrap(), 0.0);
        assert_eq!(quad_surrogate(1.0, 1.0, 3.0).unwrap(), -3.0);
        assert!(quad_surrogate(-1.0, 1.0, 1.0).is_err());
        assert!(quad_surrogate(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn opt_y_examples() {
        assert_eq!(opt_y(4.0, 2.0).unwrap(), 1.0);
        assert_eq!(opt_y(0.0, 5.0).unwrap(), 0.0);
        assert_eq!(opt_y(1.0, 4.0).unwrap(), 0.25);
        assert!(opt_y(1.0, 0.0).is_err());
    }

    #[test]
    fn inv_quad_surrogate_examples() {
        assert_eq!(inv_quad_surrogate(1.0, 4.0, 2.0).unwrap(), ExtendedReal::Finite(0.25));
        assert_eq!(inv_quad_surrogate(1.0, 1.0, 1.0).unwrap(), ExtendedReal::Finite(1.0));
        assert_eq!(inv_quad_surrogate(4.0, 1.0, 1.0).unwrap(), ExtendedReal::PosInfinity);
    }

    #[test]
    fn opt_y_tilde_examples() {
        assert_eq!(opt_y_tilde(1.0, 4.0, 0.0).unwrap(), 2.0);
        assert!((opt_y_tilde(0.0, 1.0, 1e-12).unwrap() - 1e12).abs() < 1.0);
        assert!((opt_y_tilde(3.0, 9.0, 1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(opt_y_tilde(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn mixed_objective_examples() {
        let p = MixedFpProblem::new(
            1,
            vec![RatioTerm::new(Side::Max, OuterFunction::Identity(1.0), |x, g| {
                g[0] = 2.0 * x[0];
                x[0] * x[0]
            }, constant(1.0))
            .unwrap()],
            BoxSet::uniform(1, -10.0, 10.0).unwrap(),
        )
        .unwrap();
        assert_eq!(mixed_objective(&p, &[3.0]).unwrap(), 9.0);

        let p = MixedFpProblem::new(
            1,
            vec![RatioTerm::new(Side::Min, OuterFunction::NegIdentity(1.0), constant(2.0), constant(4.0)).unwrap()],
            BoxSet::uniform(1, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(mixed_objective(&p, &[0.5]).unwrap(), -0.5);

        let p = MixedFpProblem::new(
            1,
            vec![
                RatioTerm::new(Side::Max, OuterFunction::WeightedLog1p(1.0), constant(1.0), constant(1.0)).unwrap(),
                RatioTerm::new(Side::Max, OuterFunction::WeightedLog1p(1.0), constant(3.0), constant(1.0)).unwrap(),
            ],
            BoxSet::uniform(1, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        let v = mixed_objective(&p, &[0.0]).unwrap();
        assert!((v - (2f64.ln() + 4f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn domain_error_names_term() {
        let p = MixedFpProblem::new(
            1,
            vec![
                RatioTerm::new(Side::Max, OuterFunction::Identity(1.0), constant(1.0), constant(1.0)).unwrap(),
                RatioTerm::new(Side::Min, OuterFunction::WeightedLog1m(1.0), constant(2.0), constant(1.0)).unwrap(),
            ],
            BoxSet::uniform(1, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert_eq!(mixed_objective(&p, &[0.0]).unwrap_err(), FpError::Domain { index: 1 });
    }

    #[test]
    fn mismatched_side_is_rejected() {
        assert!(RatioTerm::new(Side::Max, OuterFunction::NegIdentity(1.0), constant(1.0), constant(1.0)).is_err());
        assert!(RatioTerm::new(Side::Min, OuterFunction::WeightedLog1p(1.0), constant(1.0), constant(1.0)).is_err());
    }

    #[test]
    fn mixed_surrogate_examples() {
        let p = MixedFpProblem::new(
            1,
            vec![RatioTerm::new(Side::Max, OuterFunction::Identity(1.0), linear(1.0), constant(1.0)).unwrap()],
            BoxSet::uniform(1, 0.0, 10.0).unwrap(),
        )
        .unwrap();
        // y = opt_y(4, 1) = 2; 2·2·√1 − 4·1 = 0
        assert_eq!(mixed_surrogate(&p, &[1.0], &[4.0]).unwrap(), 0.0);
        assert_eq!(quad_surrogate(1.0, 1.0, opt_y(4.0, 1.0).unwrap()).unwrap(), 0.0);
        assert_eq!(mixed_surrogate(&p, &[4.0], &[4.0]).unwrap(), 4.0);

        let p = MixedFpProblem::new(
            1,
            vec![RatioTerm::new(Side::Min, OuterFunction::NegIdentity(1.0), linear(1.0), constant(1.0)).unwrap()],
            BoxSet::uniform(1, 0.0, 10.0).unwrap(),
        )
        .unwrap();
        assert_eq!(mixed_surrogate(&p, &[4.0], &[1.0]).unwrap(), f64::NEG_INFINITY);
        assert_eq!(mixed_surrogate(&p, &[1.0], &[1.0]).unwrap(), -1.0);
    }

    #[test]
    fn mm_single_max_ratio() {
        let p = MixedFpProblem::new(
            1,
            vec![RatioTerm::new(Side::Max, OuterFunction::Identity(1.0), linear(1.0), constant(1.0)).unwrap()],
            BoxSet::uniform(1, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        let (x, trace) = run_mm(&p, &[0.5], &SolveOptions::default(), &NoClock).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
        assert!((trace.final_objective() - 1.0).abs() < 1e-9);
        assert!(trace.iterations() <= 3, "{}", trace.iterations());
    }

    #[test]
    fn mm_single_min_ratio_interior() {
        let p = MixedFpProblem::new(
            1,
            vec![RatioTerm::new(
                Side::Min,
                OuterFunction::NegIdentity(1.0),
                |x, g| {
                    g[0] = 2.0 * (x[0] - 2.0);
                    (x[0] - 2.0).powi(2) + 1.0
                },
                constant(1.0),
            )
            .unwrap()],
            BoxSet::uniform(1, 0.0, 5.0).unwrap(),
        )
        .unwrap();
        let (x, trace) = run_mm(&p, &[4.5], &SolveOptions::default(), &NoClock).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-4, "{x:?}");
        assert!(trace.is_monotone(1e-9));
        assert!(stationarity_residual(&p, &x) < 1e-6);
    }

    /// f(x) = ln(1 + (x₁+1)/(x₂+1)) − (x₂+2)/(x₁+1) over [0,3]², a mixed
    /// toy with one ratio on each side.
    fn mixed_toy() -> MixedFpProblem {
        MixedFpProblem::new(
            2,
            vec![
                RatioTerm::new(
                    Side::Max,
                    OuterFunction::WeightedLog1p(1.0),
                    |x, g| {
                        g[0] = 1.0;
                        g[1] = 0.0;
                        x[0] + 1.0
                    },
                    |x, g| {
                        g[0] = 0.0;
                        g[1] = 1.0;
                        x[1] + 1.0
                    },
                )
                .unwrap(),
                RatioTerm::new(
                    Side::Min,
                    OuterFunction::NegIdentity(1.0),
                    |x, g| {
                        g[0] = 0.0;
                        g[1] = 1.0;
                        x[1] + 2.0
                    },
                    |x, g| {
                        g[0] = 1.0;
                        g[1] = 0.0;
                        x[0] + 1.0
                    },
                )
                .unwrap(),
                RatioTerm::new(
                    Side::Min,
                    OuterFunction::NegIdentity(0.3),
                    |x, g| {
                        g[0] = 2.0 * (x[0] - 1.5);
                        g[1] = 0.0;
                        (x[0] - 1.5).powi(2) + 0.5
                    },
                    |_, g| {
                        g[0] = 0.0;
                        g[1] = 0.0;
                        1.0
                    },
                )
                .unwrap(),
            ],
            BoxSet::uniform(2, 0.0, 3.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn mm_mixed_toy_matches_grid_oracle() {
        let p = mixed_toy();
        let x0 = [0.5, 2.5];
        let f0 = mixed_objective(&p, &x0).unwrap();
        let (x, trace) = run_mm(&p, &x0, &SolveOptions::default(), &NoClock).unwrap();
        assert!(trace.final_objective() >= f0);
        assert!(trace.is_monotone(1e-9));

        let mut best = f64::NEG_INFINITY;
        let steps = 1500;
        for i in 0..=steps {
            for j in 0..=steps {
                let z = [3.0 * i as f64 / steps as f64, 3.0 * j as f64 / steps as f64];
                best = best.max(mixed_objective(&p, &z).unwrap());
            }
        }
        assert!((trace.final_objective() - best).abs() <= 1e-4, "{} vs {best} at {x:?}", trace.final_objective());
    }

    #[test]
    fn stationarity_detects_non_stationary_point() {
        let p = mixed_toy();
        let opts = SolveOptions { outer_tol: 1e-14, inner_tol: 1e-10, max_outer: 5000, ..SolveOptions::default() };
        let (x, t) = run_mm(&p, &[0.5, 2.5], &opts, &NoClock).unwrap();
        let r = stationarity_residual(&p, &x);
        assert!(r <= 1e-6, "{r} {x:?} {}", t.iterations());
        assert!(stationarity_residual(&p, &[0.5, 2.5]) > 0.01);
    }

    #[test]
    fn surrogate_gradient_matches_finite_difference() {
        let p = mixed_toy();
        let aux = p.aux_at(&[1.0, 1.0], Some(1e-12)).unwrap();
        let x = [1.3, 0.8];
        let mut g = [0.0; 2];
        p.surrogate_with(&aux, &x, &mut g);
        let mut fd = [0.0; 2];
        crate::solver::central_difference(|z| Some(p.surrogate_with(&aux, z, &mut [0.0; 2])), &x, &mut fd);
        for i in 0..2 {
            assert!((g[i] - fd[i]).abs() <= 1e-5 * g[i].abs().max(1e-3), "{g:?} vs {fd:?}");
        }
    }

    proptest! {
        #[test]
        fn quad_bound_and_tightness(a in 0.0..10.0f64, b in 1e-3..10.0f64, y in -5.0..5.0f64) {
            let v = quad_surrogate(a, b, y).unwrap();
            prop_assert!(v <= a / b + 1e-12);
            let ys = opt_y(a, b).unwrap();
            prop_assert!((quad_surrogate(a, b, ys).unwrap() - a / b).abs() <= 1e-12 * (1.0 + a / b));
        }

        #[test]
        fn inverse_quad_bound(a in 1e-3..10.0f64, b in 1e-3..10.0f64, yt in -5.0..5.0f64) {
            let v = inv_quad_surrogate(a, b, yt).unwrap();
            prop_assert!(v.to_f64() >= a / b - 1e-12);
            let ys = b.sqrt() / a;
            let t = inv_quad_surrogate(a, b, ys).unwrap().to_f64();
            prop_assert!((t - a / b).abs() <= 1e-9 * (1.0 + a / b));
        }

        #[test]
        fn arithmetic_harmonic_witness(a1 in 0.1..10.0f64, b1 in 0.1..10.0f64, a2 in 0.1..10.0f64, b2 in 0.1..10.0f64) {
            let sum = a1 / b1 + a2 / b2;
            let flipped = 4.0 / (b1 / a1 + b2 / a2);
            prop_assert!(sum >= flipped - 1e-12);
        }

        #[test]
        fn surrogate_sandwich(x0 in 0.0..3.0f64, x1 in 0.0..3.0f64, a0 in 0.0..3.0f64, a1 in 0.0..3.0f64) {
            let p = mixed_toy();
            let f = mixed_objective(&p, &[x0, x1]).unwrap();
            let g = mixed_surrogate(&p, &[x0, x1], &[a0, a1]).unwrap();
            prop_assert!(g <= f + 1e-9);
            let fa = mixed_objective(&p, &[a0, a1]).unwrap();
            let ga = mixed_surrogate(&p, &[a0, a1], &[a0, a1]).unwrap();
            prop_assert!((fa - ga).abs() <= 1e-9);
        }
    }
}
