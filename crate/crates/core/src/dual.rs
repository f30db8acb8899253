//! Lagrangian dual transform for sums of weighted log-ratios.
//!
//! `w·ln(1 + A/B)` is rewritten as `max_γ ζ⁺(γ)` and `−w·ln(1 + A/B)` as
//! `max_γ̃ ζ⁻(γ̃)`. With the multipliers held fixed, the only `x`-dependence
//! left is the fractional last term of each ζ, so the ratios sit outside the
//! logarithms and can be handled by the quadratic transforms in [`scalar`].
//!
//! [`scalar`]: crate::scalar

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

use crate::error::{FpError, Result};
use crate::scalar::{Side, SmoothFn};
use crate::solver::{FeasibleSet, MmProblem};

/// Upper clamp on `γ̃` so that `ln(1 − γ̃)` stays finite.
pub const GAMMA_TILDE_MAX: f64 = 1.0 - 1e-12;

fn check(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(FpError::invalid("numerator must be finite and nonnegative"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(FpError::invalid("denominator must be finite and positive"));
    }
    Ok(())
}

/// `A/B`
pub fn opt_gamma(a: f64, b: f64) -> Result<f64> {
    check(a, b)?;
    Ok(a / b)
}

/// `A/(A+B)`, clamped to `[0, 1−1e-12]`.
pub fn opt_gamma_tilde(a: f64, b: f64) -> Result<f64> {
    check(a, b)?;
    Ok((a / (a + b)).min(GAMMA_TILDE_MAX))
}

/// `w·ln(1+γ) − wγ + w(1+γ)A/(A+B)`
pub fn zeta_plus(w: f64, gamma: f64, a: f64, b: f64) -> Result<f64> {
    check(a, b)?;
    if !(gamma >= 0.0) || !(w >= 0.0) {
        return Err(FpError::invalid("γ and w must be nonnegative"));
    }
    Ok(w * gamma.ln_1p() - w * gamma + w * (1.0 + gamma) * a / (a + b))
}

/// `w·ln(1−γ̃) + wγ̃ − w(1−γ̃)A/B`
pub fn zeta_minus(w: f64, gamma_tilde: f64, a: f64, b: f64) -> Result<f64> {
    check(a, b)?;
    if !(w >= 0.0) {
        return Err(FpError::invalid("w must be nonnegative"));
    }
    if !(gamma_tilde >= 0.0) {
        return Err(FpError::invalid("γ̃ must be nonnegative"));
    }
    if !(gamma_tilde < 1.0) {
        return Err(FpError::Domain { index: 0 });
    }
    Ok(w * (-gamma_tilde).ln_1p() + w * gamma_tilde - w * (1.0 - gamma_tilde) * a / b)
}

/// One weighted log-ratio: `w·ln(1+A/B)` on the max side, `−w·ln(1+A/B)` on
/// the min side.
pub struct LogRatioTerm {
    numerator: SmoothFn,
    denominator: SmoothFn,
    weight: f64,
    side: Side,
}

impl core::fmt::Debug for LogRatioTerm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LogRatioTerm").field("weight", &self.weight).field("side", &self.side).finish()
    }
}

impl LogRatioTerm {
    pub fn new(
        side: Side,
        weight: f64,
        numerator: impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync + 'static,
        denominator: impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(FpError::invalid("log-ratio weight must be finite and nonnegative"));
        }
        Ok(LogRatioTerm { numerator: Box::new(numerator), denominator: Box::new(denominator), weight, side })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn eval(&self, x: &[f64], grad_a: &mut [f64], grad_b: &mut [f64]) -> (f64, f64) {
        ((self.numerator)(x, grad_a), (self.denominator)(x, grad_b))
    }

    pub fn values(&self, x: &[f64]) -> (f64, f64) {
        let mut ga = vec![0.0; x.len()];
        let mut gb = vec![0.0; x.len()];
        self.eval(x, &mut ga, &mut gb)
    }
}

/// Multipliers, one per term in term order; the unused side is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaState {
    pub gamma: Vec<f64>,
    pub gamma_tilde: Vec<f64>,
}

/// `Σ_max w·ln(1+A/B) − Σ_min w·ln(1+A/B)`
pub fn log_ratio_objective(terms: &[LogRatioTerm], x: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (index, t) in terms.iter().enumerate() {
        let (a, b) = t.values(x);
        if !(b > 0.0) || !(a >= 0.0) {
            return Err(FpError::Domain { index });
        }
        let v = t.weight * (a / b).ln_1p();
        total += match t.side {
            Side::Max => v,
            Side::Min => -v,
        };
    }
    Ok(total)
}

/// Multipliers at `anchor`.
pub fn gammas_at(terms: &[LogRatioTerm], anchor: &[f64]) -> Result<GammaState> {
    let mut gamma = vec![0.0; terms.len()];
    let mut gamma_tilde = vec![0.0; terms.len()];
    for (i, t) in terms.iter().enumerate() {
        let (a, b) = t.values(anchor);
        match t.side {
            Side::Max => gamma[i] = opt_gamma(a, b)?,
            Side::Min => gamma_tilde[i] = opt_gamma_tilde(a, b)?,
        }
    }
    Ok(GammaState { gamma, gamma_tilde })
}

/// `Σ ζ⁺ + Σ ζ⁻` for fixed multipliers. Zero-weight terms contribute nothing.
pub fn log_ratio_surrogate_with(terms: &[LogRatioTerm], gammas: &GammaState, x: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (i, t) in terms.iter().enumerate() {
        if t.weight == 0.0 {
            continue;
        }
        let (a, b) = t.values(x);
        total += match t.side {
            Side::Max => zeta_plus(t.weight, gammas.gamma[i], a, b)?,
            Side::Min => zeta_minus(t.weight, gammas.gamma_tilde[i], a, b)?,
        };
    }
    Ok(total)
}

/// `g(x | anchor)` with the multipliers set at the anchor.
pub fn log_ratio_surrogate(terms: &[LogRatioTerm], x: &[f64], anchor: &[f64]) -> Result<f64> {
    let gammas = gammas_at(terms, anchor)?;
    log_ratio_surrogate_with(terms, &gammas, x)
}

/// Auxiliaries of the nested transform: multipliers plus the quadratic
/// transform variables for each fractional piece.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRatioAux {
    pub gammas: GammaState,
    /// Per term: `y` for max-side terms, `ỹ` for min-side terms.
    pub y: Vec<f64>,
}

/// Log-ratio problem solved by alternating the multiplier update, the
/// quadratic transform of the fractional pieces, and a concave subproblem.
///
/// Max-side pieces `w(1+γ)A/(A+B)` use `2y√(w(1+γ)A) − y²(A+B)`; min-side
/// pieces `−w(1−γ̃)A/B` use `−1/[2ỹ√B − ỹ²w(1−γ̃)A]₊`.
pub struct LogRatioProblem {
    dim: usize,
    terms: Vec<LogRatioTerm>,
    feasible: Box<dyn FeasibleSet + Send + Sync>,
    eps: f64,
}

impl LogRatioProblem {
    pub fn new(dim: usize, terms: Vec<LogRatioTerm>, feasible: impl FeasibleSet + Send + Sync + 'static) -> Result<Self> {
        if terms.is_empty() {
            return Err(FpError::invalid("a problem needs at least one log-ratio term"));
        }
        if feasible.dim() != dim {
            return Err(FpError::invalid("feasible set dimension does not match the problem"));
        }
        Ok(LogRatioProblem { dim, terms, feasible: Box::new(feasible), eps: crate::DEFAULT_EPS })
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn terms(&self) -> &[LogRatioTerm] {
        &self.terms
    }

    /// Objective with the multipliers fixed: `Σ ζ⁺ + Σ ζ⁻` (no quadratic
    /// transform yet).
    pub fn fixed_gamma_objective(&self, gammas: &GammaState, x: &[f64]) -> Option<f64> {
        log_ratio_surrogate_with(&self.terms, gammas, x).ok()
    }

    fn aux_at(&self, x: &[f64]) -> Result<LogRatioAux> {
        let gammas = gammas_at(&self.terms, x)?;
        let mut y = vec![0.0; self.terms.len()];
        for (i, t) in self.terms.iter().enumerate() {
            let (a, b) = t.values(x);
            y[i] = match t.side {
                Side::Max => (t.weight * (1.0 + gammas.gamma[i]) * a).sqrt() / (a + b),
                Side::Min => b.sqrt() / (t.weight * (1.0 - gammas.gamma_tilde[i]) * a + self.eps),
            };
        }
        Ok(LogRatioAux { gammas, y })
    }

    /// Nested surrogate and its gradient; `None` when a min-side bracket is
    /// nonpositive.
    pub fn surrogate_with(&self, aux: &LogRatioAux, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let n = x.len();
        let mut ga = vec![0.0; n];
        let mut gb = vec![0.0; n];
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for (i, t) in self.terms.iter().enumerate() {
            let w = t.weight;
            if w == 0.0 {
                continue;
            }
            let (a, b) = t.eval(x, &mut ga, &mut gb);
            if !(b > 0.0) || a < 0.0 {
                return None;
            }
            let y = aux.y[i];
            match t.side {
                Side::Max => {
                    let g = aux.gammas.gamma[i];
                    let cw = w * (1.0 + g);
                    let sa = (cw * a).sqrt();
                    total += w * g.ln_1p() - w * g + 2.0 * y * sa - y * y * (a + b);
                    let ka = if a > 0.0 { y * cw / sa } else { 0.0 };
                    for j in 0..n {
                        grad[j] += ka * ga[j] - y * y * (ga[j] + gb[j]);
                    }
                }
                Side::Min => {
                    let gt = aux.gammas.gamma_tilde[i];
                    let cw = w * (1.0 - gt);
                    let sb = b.sqrt();
                    let q = 2.0 * y * sb - y * y * cw * a;
                    if !(q > 0.0) {
                        return None;
                    }
                    total += w * (-gt).ln_1p() + w * gt - 1.0 / q;
                    let inv_q2 = 1.0 / (q * q);
                    for j in 0..n {
                        grad[j] += inv_q2 * (y / sb * gb[j] - y * y * cw * ga[j]);
                    }
                }
            }
        }
        Some(total)
    }

    /// Analytic gradient of the log-ratio objective.
    pub fn objective_with_gradient(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let n = x.len();
        let mut ga = vec![0.0; n];
        let mut gb = vec![0.0; n];
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for t in &self.terms {
            let (a, b) = t.eval(x, &mut ga, &mut gb);
            if !(b > 0.0) || a < 0.0 {
                return None;
            }
            let s = match t.side {
                Side::Max => t.weight,
                Side::Min => -t.weight,
            };
            total += s * (a / b).ln_1p();
            // d ln(1+A/B) = (dA − (A/B)... ) simplifies to dA/(A+B) − A dB/(B(A+B))
            for j in 0..n {
                grad[j] += s * (ga[j] / (a + b) - a * gb[j] / (b * (a + b)));
            }
        }
        Some(total)
    }
}

impl MmProblem for LogRatioProblem {
    type Aux = LogRatioAux;

    fn dim(&self) -> usize {
        self.dim
    }

    fn feasible(&self) -> &dyn FeasibleSet {
        &*self.feasible
    }

    fn objective(&self, x: &[f64]) -> Option<f64> {
        log_ratio_objective(&self.terms, x).ok()
    }

    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]) -> bool {
        self.objective_with_gradient(x, grad).is_some()
    }

    fn update_aux(&self, x: &[f64]) -> LogRatioAux {
        self.aux_at(x).unwrap_or_else(|_| LogRatioAux {
            gammas: GammaState { gamma: vec![0.0; self.terms.len()], gamma_tilde: vec![0.0; self.terms.len()] },
            y: vec![0.0; self.terms.len()],
        })
    }

    fn surrogate(&self, aux: &LogRatioAux, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        self.surrogate_with(aux, x, grad)
    }
}
