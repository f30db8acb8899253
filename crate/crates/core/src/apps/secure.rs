//! Power control for secure transmission over an `L`-link interference
//! channel where the first `K` links each have an eavesdropper.
//!
//! Link `i ≤ K` earns `ln(1+SINR_i) − ln(1+SINR̃_i)`, the others the plain
//! `ln(1+SINR_i)`. Two MM solvers are provided: the direct one applies the
//! mixed quadratic transform to the SINRs inside the logarithms, the fast one
//! first moves the ratios out of the logarithms with multipliers `γ, γ̃` and
//! then applies the transform to the resulting sum of ratios.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

use super::nats_to_bits;
use crate::dual::{LogRatioProblem, LogRatioTerm, GAMMA_TILDE_MAX};
use crate::error::{FpError, Result};
use crate::outer::OuterFunction;
use crate::scalar::{MixedFpProblem, RatioTerm, Side};
use crate::solver::{run_mm, BoxSet, Clock, FeasibleSet, IterationTrace, MmProblem, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct SecureScenario {
    l: usize,
    k: usize,
    /// `|h_ij|²`, row-major `L×L`.
    h2: Vec<f64>,
    /// `|h̃_kj|²`, row-major `K×L`.
    ht2: Vec<f64>,
    sigma2: Vec<f64>,
    sigma2_tilde: Vec<f64>,
    p_max: f64,
    w: Vec<f64>,
}

impl SecureScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        l: usize,
        k: usize,
        h2: Vec<f64>,
        ht2: Vec<f64>,
        sigma2: Vec<f64>,
        sigma2_tilde: Vec<f64>,
        p_max: f64,
        w: Vec<f64>,
    ) -> Result<Self> {
        if l == 0 {
            return Err(FpError::invalid("L must be at least 1"));
        }
        if k > l {
            return Err(FpError::invalid("K must not exceed L"));
        }
        if h2.len() != l * l || ht2.len() != k * l || sigma2.len() != l || sigma2_tilde.len() != k || w.len() != l {
            return Err(FpError::invalid("channel, noise or weight dimensions do not match L and K"));
        }
        let all_finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !all_finite(&h2) || !all_finite(&ht2) || h2.iter().chain(&ht2).any(|g| *g < 0.0) {
            return Err(FpError::invalid("channel gains must be finite and nonnegative"));
        }
        if (0..l).any(|i| !(h2[i * l + i] > 0.0)) || (0..k).any(|i| !(ht2[i * l + i] > 0.0)) {
            return Err(FpError::invalid("direct channel gains must be positive"));
        }
        if sigma2.iter().chain(&sigma2_tilde).any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(FpError::invalid("noise powers must be positive"));
        }
        if !(p_max > 0.0) || !p_max.is_finite() {
            return Err(FpError::invalid("power cap P must be positive"));
        }
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(FpError::invalid("weights must be nonnegative"));
        }
        Ok(SecureScenario { l, k, h2, ht2, sigma2, sigma2_tilde, p_max, w })
    }

    /// Two links, both eavesdropped; noise −10 dBm (links) and 0 dBm
    /// (eavesdroppers), `P = 10 dBm`, unit weights.
    pub fn two_link_example() -> Self {
        SecureScenario::new(
            2,
            2,
            vec![1.0, 0.1, 0.09, 0.87],
            vec![0.5, 0.11, 0.13, 0.39],
            vec![0.1, 0.1],
            vec![1.0, 1.0],
            10.0,
            vec![1.0, 1.0],
        )
        .expect("valid scenario")
    }

    /// Five links, the first two eavesdropped, cross gains 0.1; weights
    /// `(1, 1, η, η, η)`.
    pub fn five_link_example(eta: f64) -> Result<Self> {
        let diag = [1.0, 0.74, 0.85, 0.93, 0.61];
        let mut h2 = vec![0.1; 25];
        for i in 0..5 {
            h2[i * 5 + i] = diag[i];
        }
        let mut ht2 = vec![0.1; 10];
        ht2[0] = 0.50;
        ht2[6] = 0.15;
        SecureScenario::new(5, 2, h2, ht2, vec![0.1; 5], vec![1.0; 2], 10.0, vec![1.0, 1.0, eta, eta, eta])
    }

    pub fn links(&self) -> usize {
        self.l
    }

    pub fn eavesdropped(&self) -> usize {
        self.k
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn with_weights(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.l || w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(FpError::invalid("weights must be L nonnegative numbers"));
        }
        self.w = w;
        Ok(self)
    }

    pub fn h2(&self, i: usize, j: usize) -> f64 {
        self.h2[i * self.l + j]
    }

    pub fn ht2(&self, k: usize, j: usize) -> f64 {
        self.ht2[k * self.l + j]
    }

    pub fn sigma2(&self, i: usize) -> f64 {
        self.sigma2[i]
    }

    pub fn sigma2_tilde(&self, k: usize) -> f64 {
        self.sigma2_tilde[k]
    }

    /// Received power at link `i`'s receiver: `Σ_j |h_ij|² p_j + σ_i²`.
    fn total(&self, p: &[f64], i: usize) -> f64 {
        (0..self.l).map(|j| self.h2(i, j) * p[j]).sum::<f64>() + self.sigma2[i]
    }

    fn total_tilde(&self, p: &[f64], k: usize) -> f64 {
        (0..self.l).map(|j| self.ht2(k, j) * p[j]).sum::<f64>() + self.sigma2_tilde[k]
    }

    fn interference(&self, p: &[f64], i: usize) -> f64 {
        self.total(p, i) - self.h2(i, i) * p[i]
    }

    fn interference_tilde(&self, p: &[f64], k: usize) -> f64 {
        self.total_tilde(p, k) - self.ht2(k, k) * p[k]
    }

    pub fn sinr(&self, p: &[f64], i: usize) -> f64 {
        self.h2(i, i) * p[i] / self.interference(p, i)
    }

    pub fn eavesdropper_sinr(&self, p: &[f64], k: usize) -> f64 {
        self.ht2(k, k) * p[k] / self.interference_tilde(p, k)
    }

    fn feasible_box(&self) -> BoxSet {
        BoxSet::uniform(self.l, 0.0, self.p_max).expect("P > 0")
    }

    fn check_power(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.l || p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(FpError::invalid("power vector must hold L nonnegative entries"));
        }
        Ok(())
    }
}

/// Rate of link `i` in nats; negative when the eavesdropper hears more.
pub fn secret_rate(s: &SecureScenario, p: &[f64], i: usize) -> Result<f64> {
    s.check_power(p)?;
    if i >= s.l {
        return Err(FpError::invalid("link index out of range"));
    }
    let own = s.sinr(p, i).ln_1p();
    Ok(if i < s.k { own - s.eavesdropper_sinr(p, i).ln_1p() } else { own })
}

/// Same rate written as `ln(1+SINR_i) + ln(1 − |h̃_ii|²p_i/(Σ_j |h̃_ij|²p_j + σ̃_i²))`.
pub fn secret_rate_rewritten(s: &SecureScenario, p: &[f64], i: usize) -> Result<f64> {
    s.check_power(p)?;
    if i >= s.l {
        return Err(FpError::invalid("link index out of range"));
    }
    let own = s.sinr(p, i).ln_1p();
    if i >= s.k {
        return Ok(own);
    }
    Ok(own + (-(s.ht2(i, i) * p[i] / s.total_tilde(p, i))).ln_1p())
}

/// `Σ w_i R_i` in nats.
pub fn weighted_sum_rate(s: &SecureScenario, p: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..s.l {
        if s.w[i] != 0.0 {
            total += s.w[i] * secret_rate(s, p, i)?;
        }
    }
    Ok(total)
}

/// Gradient of [`weighted_sum_rate`] with respect to `p`.
pub fn weighted_sum_rate_gradient(s: &SecureScenario, p: &[f64], grad: &mut [f64]) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    for i in 0..s.l {
        let w = s.w[i];
        if w == 0.0 {
            continue;
        }
        // ln(total) − ln(interference) per receiver.
        let (t, n) = (s.total(p, i), s.interference(p, i));
        for j in 0..s.l {
            grad[j] += w * s.h2(i, j) / t;
            if j != i {
                grad[j] -= w * s.h2(i, j) / n;
            }
        }
        if i < s.k {
            let (t, n) = (s.total_tilde(p, i), s.interference_tilde(p, i));
            for j in 0..s.l {
                grad[j] -= w * s.ht2(i, j) / t;
                if j != i {
                    grad[j] += w * s.ht2(i, j) / n;
                }
            }
        }
    }
}

/// Rates of the eavesdropped links and of the plain links, in bits.
pub fn group_rates_bits(s: &SecureScenario, p: &[f64]) -> Result<(f64, f64)> {
    let mut secure = 0.0;
    let mut plain = 0.0;
    for i in 0..s.l {
        let r = nats_to_bits(secret_rate(s, p, i)?);
        if i < s.k {
            secure += r;
        } else {
            plain += r;
        }
    }
    Ok((secure, plain))
}

/// Quadratic-transform auxiliaries of the direct method.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectAux {
    pub y: Vec<f64>,
    pub y_tilde: Vec<f64>,
}

/// `y_i = √(|h_ii|²p_i)/(interference_i + σ_i²)`,
/// `ỹ_k = √(Σ_j|h̃_kj|²p_j + σ̃_k²)/(|h̃_kk|²p_k + ε)`.
pub fn direct_fp_aux(s: &SecureScenario, p: &[f64], eps: f64) -> DirectAux {
    let y = (0..s.l).map(|i| (s.h2(i, i) * p[i]).sqrt() / s.interference(p, i)).collect();
    let y_tilde = (0..s.k).map(|k| s.total_tilde(p, k).sqrt() / (s.ht2(k, k) * p[k] + eps)).collect();
    DirectAux { y, y_tilde }
}

/// `Σ w_i ln(1+Q⁺_i) + Σ_k w_k ln(1−1/Q⁻_k)` with
/// `Q⁺_i = 2y_i√(|h_ii|²p_i) − y_i²(interference_i + σ_i²)` and
/// `Q⁻_k = 2ỹ_k√(Σ_j|h̃_kj|²p_j + σ̃_k²) − ỹ_k²|h̃_kk|²p_k`.
///
/// `None` when some `Q⁻_k ≤ 1` or `Q⁺_i ≤ −1`.
pub fn direct_fp_surrogate(s: &SecureScenario, p: &[f64], aux: &DirectAux, grad: &mut [f64]) -> Option<f64> {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut total = 0.0;
    for i in 0..s.l {
        let w = s.w[i];
        let y = aux.y[i];
        let a = s.h2(i, i) * p[i];
        let q = 2.0 * y * a.sqrt() - y * y * s.interference(p, i);
        if !(q > -1.0) {
            return None;
        }
        total += w * q.ln_1p();
        let d = w / (1.0 + q);
        for j in 0..s.l {
            let dq = if j == i {
                if a > 0.0 { y * s.h2(i, i) / a.sqrt() } else { 0.0 }
            } else {
                -y * y * s.h2(i, j)
            };
            grad[j] += d * dq;
        }
    }
    for k in 0..s.k {
        let w = s.w[k];
        let yt = aux.y_tilde[k];
        let b = s.total_tilde(p, k);
        let q = 2.0 * yt * b.sqrt() - yt * yt * s.ht2(k, k) * p[k];
        if !(q > 1.0) {
            return None;
        }
        total += w * (-1.0 / q).ln_1p();
        // d ln(1 − 1/q) = dq / (q(q−1))
        let d = w / (q * (q - 1.0));
        for j in 0..s.l {
            let mut dq = yt * s.ht2(k, j) / b.sqrt();
            if j == k {
                dq -= yt * yt * s.ht2(k, k);
            }
            grad[j] += d * dq;
        }
    }
    Some(total)
}

/// Multipliers of the fast method.
#[derive(Debug, Clone, PartialEq)]
pub struct SecureGammas {
    /// `γ_i = SINR_i`
    pub gamma: Vec<f64>,
    /// `γ̃_k = |h̃_kk|²p_k / (Σ_j|h̃_kj|²p_j + σ̃_k²)`
    pub gamma_tilde: Vec<f64>,
}

pub fn fast_fp_gamma(s: &SecureScenario, p: &[f64]) -> SecureGammas {
    SecureGammas {
        gamma: (0..s.l).map(|i| s.sinr(p, i)).collect(),
        gamma_tilde: (0..s.k)
            .map(|k| (s.ht2(k, k) * p[k] / s.total_tilde(p, k)).min(GAMMA_TILDE_MAX))
            .collect(),
    }
}

/// Part of the fast objective that does not depend on `p`:
/// `Σ w_i(ln(1+γ_i) − γ_i) + Σ w_k(ln(1−γ̃_k) + γ̃_k)`.
pub fn fast_fp_constant(s: &SecureScenario, g: &SecureGammas) -> f64 {
    let mut c = 0.0;
    for i in 0..s.l {
        if s.w[i] != 0.0 {
            c += s.w[i] * (g.gamma[i].ln_1p() - g.gamma[i]);
        }
    }
    for k in 0..s.k {
        if s.w[k] != 0.0 {
            c += s.w[k] * ((-g.gamma_tilde[k]).ln_1p() + g.gamma_tilde[k]);
        }
    }
    c
}

/// Objective with the multipliers fixed:
/// constant + `Σ w_i(1+γ_i)|h_ii|²p_i/total_i − Σ w_k(1−γ̃_k)|h̃_kk|²p_k/interferencẽ_k`.
pub fn fast_fp_objective_fr(s: &SecureScenario, p: &[f64], g: &SecureGammas) -> Result<f64> {
    s.check_power(p)?;
    if g.gamma_tilde.iter().any(|v| !(*v < 1.0) || *v < 0.0) || g.gamma.iter().any(|v| !(*v >= 0.0)) {
        return Err(FpError::Domain { index: 0 });
    }
    let mut total = fast_fp_constant(s, g);
    for i in 0..s.l {
        if s.w[i] != 0.0 {
            total += s.w[i] * (1.0 + g.gamma[i]) * s.h2(i, i) * p[i] / s.total(p, i);
        }
    }
    for k in 0..s.k {
        if s.w[k] != 0.0 {
            total -= s.w[k] * (1.0 - g.gamma_tilde[k]) * s.ht2(k, k) * p[k] / s.interference_tilde(p, k);
        }
    }
    Ok(total)
}

/// Quadratic-transform auxiliaries of the fast method.
#[derive(Debug, Clone, PartialEq)]
pub struct FastAux {
    pub gammas: SecureGammas,
    /// `y_i = √(w_i(1+γ_i)|h_ii|²p_i) / total_i`
    pub y: Vec<f64>,
    /// `ỹ_k = √(interferencẽ_k) / (w_k(1−γ̃_k)|h̃_kk|²p_k + ε)`
    pub y_tilde: Vec<f64>,
}

pub fn fast_fp_aux(s: &SecureScenario, p: &[f64], eps: f64) -> FastAux {
    let gammas = fast_fp_gamma(s, p);
    let y = (0..s.l)
        .map(|i| (s.w[i] * (1.0 + gammas.gamma[i]) * s.h2(i, i) * p[i]).sqrt() / s.total(p, i))
        .collect();
    let y_tilde = (0..s.k)
        .map(|k| s.interference_tilde(p, k).sqrt() / (s.w[k] * (1.0 - gammas.gamma_tilde[k]) * s.ht2(k, k) * p[k] + eps))
        .collect();
    FastAux { gammas, y, y_tilde }
}

/// `Σ Q⁺_i − Σ 1/Q⁻_k` with
/// `Q⁺_i = 2y_i√(w_i(1+γ_i)|h_ii|²p_i) − y_i²·total_i` and
/// `Q⁻_k = 2ỹ_k√(interferencẽ_k) − ỹ_k²w_k(1−γ̃_k)|h̃_kk|²p_k`.
///
/// No logarithm of `p` appears. `None` when some `Q⁻_k ≤ 0`.
pub fn fast_fp_subproblem(s: &SecureScenario, p: &[f64], aux: &FastAux, grad: &mut [f64]) -> Option<f64> {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut total = 0.0;
    for i in 0..s.l {
        let w = s.w[i];
        if w == 0.0 {
            continue;
        }
        let y = aux.y[i];
        let c = w * (1.0 + aux.gammas.gamma[i]) * s.h2(i, i);
        let sa = (c * p[i]).sqrt();
        total += 2.0 * y * sa - y * y * s.total(p, i);
        for j in 0..s.l {
            grad[j] -= y * y * s.h2(i, j);
        }
        if sa > 0.0 {
            grad[i] += y * c / sa;
        }
    }
    for k in 0..s.k {
        let w = s.w[k];
        if w == 0.0 {
            continue;
        }
        let yt = aux.y_tilde[k];
        let c = w * (1.0 - aux.gammas.gamma_tilde[k]) * s.ht2(k, k);
        let b = s.interference_tilde(p, k);
        let q = 2.0 * yt * b.sqrt() - yt * yt * c * p[k];
        if !(q > 0.0) {
            return None;
        }
        total -= 1.0 / q;
        let d = 1.0 / (q * q);
        for j in 0..s.l {
            let mut dq = if j != k { yt * s.ht2(k, j) / b.sqrt() } else { 0.0 };
            if j == k {
                dq -= yt * yt * c;
            }
            grad[j] += d * dq;
        }
    }
    Some(total)
}

/// Direct method as an MM problem; the objective is the true weighted sum rate.
pub struct DirectProblem<'a> {
    scenario: &'a SecureScenario,
    feasible: BoxSet,
    eps: f64,
}

impl<'a> DirectProblem<'a> {
    pub fn new(scenario: &'a SecureScenario, eps: f64) -> Self {
        DirectProblem { scenario, feasible: scenario.feasible_box(), eps }
    }
}

impl MmProblem for DirectProblem<'_> {
    type Aux = DirectAux;

    fn dim(&self) -> usize {
        self.scenario.l
    }

    fn feasible(&self) -> &dyn FeasibleSet {
        &self.feasible
    }

    fn objective(&self, x: &[f64]) -> Option<f64> {
        weighted_sum_rate(self.scenario, x).ok()
    }

    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]) -> bool {
        weighted_sum_rate_gradient(self.scenario, x, grad);
        true
    }

    fn update_aux(&self, x: &[f64]) -> DirectAux {
        direct_fp_aux(self.scenario, x, self.eps)
    }

    fn surrogate(&self, aux: &DirectAux, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        direct_fp_surrogate(self.scenario, x, aux, grad)
    }
}

/// Fast method as an MM problem: multipliers and auxiliaries are refreshed
/// together at each anchor, then the log-free subproblem is maximized.
pub struct FastProblem<'a> {
    scenario: &'a SecureScenario,
    feasible: BoxSet,
    eps: f64,
}

impl<'a> FastProblem<'a> {
    pub fn new(scenario: &'a SecureScenario, eps: f64) -> Self {
        FastProblem { scenario, feasible: scenario.feasible_box(), eps }
    }
}

impl MmProblem for FastProblem<'_> {
    type Aux = FastAux;

    fn dim(&self) -> usize {
        self.scenario.l
    }

    fn feasible(&self) -> &dyn FeasibleSet {
        &self.feasible
    }

    fn objective(&self, x: &[f64]) -> Option<f64> {
        weighted_sum_rate(self.scenario, x).ok()
    }

    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]) -> bool {
        weighted_sum_rate_gradient(self.scenario, x, grad);
        true
    }

    fn update_aux(&self, x: &[f64]) -> FastAux {
        fast_fp_aux(self.scenario, x, self.eps)
    }

    fn surrogate(&self, aux: &FastAux, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let v = fast_fp_subproblem(self.scenario, x, aux, grad)?;
        Some(v + fast_fp_constant(self.scenario, &aux.gammas))
    }
}

/// Direct method from `p = P·1`.
pub fn solve_direct(s: &SecureScenario, opts: &SolveOptions, clock: &dyn Clock) -> Result<(Vec<f64>, IterationTrace)> {
    run_mm(&DirectProblem::new(s, opts.eps_safeguard), &vec![s.p_max; s.l], opts, clock)
}

/// Fast method from `p = P·1`.
pub fn solve_fast(s: &SecureScenario, opts: &SolveOptions, clock: &dyn Clock) -> Result<(Vec<f64>, IterationTrace)> {
    run_mm(&FastProblem::new(s, opts.eps_safeguard), &vec![s.p_max; s.l], opts, clock)
}

/// The direct method assembled from generic ratio terms (max side
/// `w ln(1+SINR)`, min side `w ln(1 − |h̃_kk|²p_k/total̃_k)`).
pub fn build_direct_problem(s: &SecureScenario) -> MixedFpProblem {
    let mut terms = Vec::new();
    for i in 0..s.l {
        let (sa, sb) = (s.clone(), s.clone());
        let num = move |p: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|v| *v = 0.0);
            g[i] = sa.h2(i, i);
            sa.h2(i, i) * p[i]
        };
        let den = move |p: &[f64], g: &mut [f64]| {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj = if j == i { 0.0 } else { sb.h2(i, j) };
            }
            sb.interference(p, i)
        };
        terms.push(RatioTerm::new(Side::Max, OuterFunction::WeightedLog1p(s.w[i]), num, den).expect("max side"));
    }
    for k in 0..s.k {
        let (sa, sb) = (s.clone(), s.clone());
        let num = move |p: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|v| *v = 0.0);
            g[k] = sa.ht2(k, k);
            sa.ht2(k, k) * p[k]
        };
        let den = move |p: &[f64], g: &mut [f64]| {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj = sb.ht2(k, j);
            }
            sb.total_tilde(p, k)
        };
        terms.push(RatioTerm::new(Side::Min, OuterFunction::WeightedLog1m(s.w[k]), num, den).expect("min side"));
    }
    MixedFpProblem::new(s.l, terms, s.feasible_box()).expect("consistent dimensions")
}

/// The weighted sum rate as generic log-ratio terms.
pub fn build_log_ratio_problem(s: &SecureScenario) -> LogRatioProblem {
    let mut terms = Vec::new();
    for i in 0..s.l {
        let (sa, sb) = (s.clone(), s.clone());
        let num = move |p: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|v| *v = 0.0);
            g[i] = sa.h2(i, i);
            sa.h2(i, i) * p[i]
        };
        let den = move |p: &[f64], g: &mut [f64]| {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj = if j == i { 0.0 } else { sb.h2(i, j) };
            }
            sb.interference(p, i)
        };
        terms.push(LogRatioTerm::new(Side::Max, s.w[i], num, den).expect("valid weight"));
    }
    for k in 0..s.k {
        let (sa, sb) = (s.clone(), s.clone());
        let num = move |p: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|v| *v = 0.0);
            g[k] = sa.ht2(k, k);
            sa.ht2(k, k) * p[k]
        };
        let den = move |p: &[f64], g: &mut [f64]| {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj = if j == k { 0.0 } else { sb.ht2(k, j) };
            }
            sb.interference_tilde(p, k)
        };
        terms.push(LogRatioTerm::new(Side::Min, s.w[k], num, den).expect("valid weight"));
    }
    LogRatioProblem::new(s.l, terms, s.feasible_box()).expect("consistent dimensions")
}

/// Links scanned together by the max-power-and-linear-search baseline.
fn baseline_groups(s: &SecureScenario) -> Vec<Vec<usize>> {
    let l = s.l;
    if l == 1 {
        return vec![vec![0]];
    }
    let split = if s.k > 0 && s.k < l { s.k } else { l / 2 };
    vec![(0..split).collect(), (split..l).collect()]
}

/// Hold one group of links at full power and scan a common power for the
/// other group on `grid_points` evenly spaced levels in `[0, P]`; keep the
/// best over both choices.
pub fn baseline_max_power_linear_search(s: &SecureScenario, grid_points: usize) -> Result<(Vec<f64>, f64)> {
    if grid_points < 2 {
        return Err(FpError::invalid("grid_points must be at least 2"));
    }
    let groups = baseline_groups(s);
    let mut best = (vec![s.p_max; s.l], weighted_sum_rate(s, &vec![s.p_max; s.l])?);
    let mut p = vec![0.0; s.l];
    for (gi, scanned) in groups.iter().enumerate() {
        for n in 0..grid_points {
            let rho = s.p_max * n as f64 / (grid_points - 1) as f64;
            p.iter_mut().for_each(|v| *v = s.p_max);
            for &i in scanned {
                p[i] = rho;
            }
            let v = weighted_sum_rate(s, &p)?;
            if v > best.1 {
                best = (p.clone(), v);
            }
        }
        if groups.len() == 1 && gi == 0 {
            break;
        }
    }
    Ok(best)
}

/// Exhaustive grid over `[0, P]²` followed by one finer pass (step/100)
/// around the incumbent. Two links only.
pub fn oracle_grid_2d(s: &SecureScenario, step: f64) -> Result<(Vec<f64>, f64)> {
    if s.l != 2 {
        return Err(FpError::Refused(alloc::format!("2-D grid oracle needs L = 2, got L = {}", s.l)));
    }
    if !(step > 0.0) || step > s.p_max {
        return Err(FpError::invalid("step must lie in (0, P]"));
    }
    let n = (s.p_max / step).round().max(1.0) as usize;
    let h = s.p_max / n as f64;
    let mut best = (vec![s.p_max; 2], f64::NEG_INFINITY);
    for i in 0..=n {
        for j in 0..=n {
            let p = [h * i as f64, h * j as f64];
            let v = weighted_sum_rate(s, &p)?;
            if v > best.1 {
                best = (p.to_vec(), v);
            }
        }
    }
    let fine = h / 100.0;
    let c = best.0.clone();
    for a in -100i32..=100 {
        for b in -100i32..=100 {
            let p = [
                (c[0] + a as f64 * fine).clamp(0.0, s.p_max),
                (c[1] + b as f64 * fine).clamp(0.0, s.p_max),
            ];
            let v = weighted_sum_rate(s, &p)?;
            if v > best.1 {
                best = (p.to_vec(), v);
            }
        }
    }
    Ok(best)
}

/// One solution on the rate tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub p: Vec<f64>,
    /// Sum rate of the eavesdropped links, bits/s/Hz.
    pub secure_bits: f64,
    /// Sum rate of the other links, bits/s/Hz.
    pub plain_bits: f64,
    /// Weighted sum rate, nats.
    pub objective: f64,
}

impl FrontierPoint {
    fn at(s: &SecureScenario, p: Vec<f64>) -> Result<Self> {
        let (secure_bits, plain_bits) = group_rates_bits(s, &p)?;
        let objective = weighted_sum_rate(s, &p)?;
        Ok(FrontierPoint { p, secure_bits, plain_bits, objective })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub eta: f64,
    pub fast: FrontierPoint,
    pub direct: FrontierPoint,
    pub baseline: FrontierPoint,
}

/// For each `η`, weight the eavesdropped links by 1 and the others by `η`,
/// then run both FP methods and the baseline.
pub fn tradeoff_sweep(
    base: &SecureScenario,
    etas: &[f64],
    opts: &SolveOptions,
    clock: &dyn Clock,
) -> Result<Vec<TradeoffPoint>> {
    let mut out = Vec::with_capacity(etas.len());
    for &eta in etas {
        let w = (0..base.l).map(|i| if i < base.k { 1.0 } else { eta }).collect();
        let s = base.clone().with_weights(w)?;
        let (pf, _) = solve_fast(&s, opts, clock)?;
        let (pd, _) = solve_direct(&s, opts, clock)?;
        let (pb, _) = baseline_max_power_linear_search(&s, 2001)?;
        out.push(TradeoffPoint {
            eta,
            fast: FrontierPoint::at(&s, pf)?,
            direct: FrontierPoint::at(&s, pd)?,
            baseline: FrontierPoint::at(&s, pb)?,
        });
    }
    Ok(out)
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}
