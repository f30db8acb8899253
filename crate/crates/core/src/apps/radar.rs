//! Waveform design for `M` co-located radars that each estimate the
//! direction of their own target while hearing the other radars' echoes.
//!
//! Radar `m` transmits `s_m = vec(S_m)` (`L` snapshots of `N_T` antennas) and
//! its Fisher information about `θ_m` is `J_m = 2 v_mᴴ K_m⁻¹ v_m` with
//! `v_m = (I_L⊗Ġ_mm) s_m` and `K_m` the interference-plus-noise covariance.
//! The sum of Cramér-Rao bounds `Σ 1/J_m` is minimized by maximizing
//! `Σ −1/(2r_m)` over `r_m = J_m/2`, a matrix ratio with a rank-one numerator.
//!
//! Waveforms are optimized directly: with `U_m = s_m s_mᴴ` the transformed
//! subproblem is concave in the stacked real and imaginary parts.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FpError, Result};
use crate::extended::ExtendedReal;
use crate::linalg::{c, hermitian_eigen, kron_identity, solve_hpd, solve_hpd_fast, CMatrix, CVector, C64};
use crate::solver::{run_mm, BallProduct, Clock, FeasibleSet, IterationTrace, MmProblem, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct RadarScenario {
    n_t: Vec<usize>,
    n_r: Vec<usize>,
    theta: Vec<f64>,
    /// `β_{mm'}`, row-major `M×M`.
    beta: Vec<C64>,
    sigma2: Vec<f64>,
    power: Vec<f64>,
    l: usize,
}

impl RadarScenario {
    pub fn new(
        n_t: Vec<usize>,
        n_r: Vec<usize>,
        theta: Vec<f64>,
        beta: Vec<C64>,
        sigma2: Vec<f64>,
        power: Vec<f64>,
        l: usize,
    ) -> Result<Self> {
        let m = n_t.len();
        if m == 0 {
            return Err(FpError::invalid("at least one radar is required"));
        }
        if n_r.len() != m || theta.len() != m || sigma2.len() != m || power.len() != m || beta.len() != m * m {
            return Err(FpError::invalid("per-radar lists must all have length M (beta M×M)"));
        }
        if l == 0 || n_t.iter().chain(&n_r).any(|&n| n == 0) {
            return Err(FpError::invalid("antenna counts and L must be at least 1"));
        }
        if theta.iter().any(|t| !t.is_finite()) || beta.iter().any(|b| !b.re.is_finite() || !b.im.is_finite()) {
            return Err(FpError::invalid("angles and reflection coefficients must be finite"));
        }
        if sigma2.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(FpError::invalid("sigma2 must be positive"));
        }
        if power.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(FpError::invalid("power budgets must be positive"));
        }
        Ok(RadarScenario { n_t, n_r, theta, beta, sigma2, power, l })
    }

    /// Five radars with `L = 4`, `N_T = (4,2,2,2,2)`, `N_R = (6,4,4,4,4)`,
    /// `θ = π(1/6, 1/3, 1/4, 2/5, 3/7)`, all `β = 1`, common power budget and
    /// noise power given in mW.
    pub fn five_radar(power_mw: f64, sigma2_mw: f64) -> Result<Self> {
        let pi = core::f64::consts::PI;
        RadarScenario::new(
            vec![4, 2, 2, 2, 2],
            vec![6, 4, 4, 4, 4],
            vec![pi / 6.0, pi / 3.0, pi / 4.0, 2.0 * pi / 5.0, 3.0 * pi / 7.0],
            vec![c(1.0, 0.0); 25],
            vec![sigma2_mw; 5],
            vec![power_mw; 5],
            4,
        )
    }

    pub fn radars(&self) -> usize {
        self.n_t.len()
    }

    pub fn snapshots(&self) -> usize {
        self.l
    }

    pub fn power(&self, m: usize) -> f64 {
        self.power[m]
    }

    pub fn sigma2(&self, m: usize) -> f64 {
        self.sigma2[m]
    }

    pub fn theta(&self, m: usize) -> f64 {
        self.theta[m]
    }

    pub fn transmit_antennas(&self, m: usize) -> usize {
        self.n_t[m]
    }

    pub fn receive_antennas(&self, m: usize) -> usize {
        self.n_r[m]
    }

    pub fn beta(&self, m: usize, mp: usize) -> C64 {
        self.beta[m * self.radars() + mp]
    }

    /// Complex length of `s_m`.
    pub fn waveform_len(&self, m: usize) -> usize {
        self.l * self.n_t[m]
    }

    fn echo_len(&self, m: usize) -> usize {
        self.l * self.n_r[m]
    }
}

/// `a_n = e^{−jπ(n−1)sinθ}` for a half-wavelength uniform linear array.
pub fn steering_vector(n: usize, theta: f64) -> CVector {
    let s = theta.sin();
    CVector::from_iterator(n, (0..n).map(|k| {
        let phase = -core::f64::consts::PI * k as f64 * s;
        c(phase.cos(), phase.sin())
    }))
}

/// `∂a/∂θ`, entrywise `−jπ(n−1)cosθ·a_n`.
pub fn steering_derivative(n: usize, theta: f64) -> CVector {
    let a = steering_vector(n, theta);
    // cos(π/2) evaluates to ~6e-17 in floating point; treat it as the exact zero.
    let cs = theta.cos();
    let cs = if cs.abs() < 1e-15 { 0.0 } else { cs };
    CVector::from_iterator(n, a.iter().enumerate().map(|(k, v)| c(0.0, -core::f64::consts::PI * k as f64 * cs) * v))
}

/// `G_mm' = β_mm'·a^R_m(θ_m)·a^T_m'(θ_m')ᵀ` (plain transpose).
pub fn response_matrix(s: &RadarScenario, m: usize, mp: usize) -> CMatrix {
    let ar = steering_vector(s.n_r[m], s.theta[m]);
    let at = steering_vector(s.n_t[mp], s.theta[mp]);
    &ar * at.transpose() * s.beta(m, mp)
}

/// `Ġ_mm = β_mm(ȧ^R a^Tᵀ + a^R ȧ^Tᵀ)`, the derivative of `G_mm` in `θ_m`.
pub fn response_derivative(s: &RadarScenario, m: usize) -> CMatrix {
    let (nr, nt, th) = (s.n_r[m], s.n_t[m], s.theta[m]);
    let (ar, dar) = (steering_vector(nr, th), steering_derivative(nr, th));
    let (at, dat) = (steering_vector(nt, th), steering_derivative(nt, th));
    (&dar * at.transpose() + &ar * dat.transpose()) * s.beta(m, m)
}

fn check_waveforms(s: &RadarScenario, w: &[CVector]) -> Result<()> {
    if w.len() != s.radars() || w.iter().enumerate().any(|(m, v)| v.len() != s.waveform_len(m)) {
        return Err(FpError::invalid("waveform set does not match the scenario"));
    }
    Ok(())
}

/// `K_m = Σ_{m'≠m} (I⊗G_mm')s_m' s_m'ᴴ(I⊗G_mm')ᴴ + σ_m² I`
pub fn covariance_k(s: &RadarScenario, w: &[CVector], m: usize) -> Result<CMatrix> {
    check_waveforms(s, w)?;
    let n = s.echo_len(m);
    let mut k = CMatrix::identity(n, n) * c(s.sigma2[m], 0.0);
    for mp in 0..s.radars() {
        if mp != m {
            let e = kron_identity(s.l, &response_matrix(s, m, mp)) * &w[mp];
            k += &e * e.adjoint();
        }
    }
    Ok(k)
}

/// `v_m = (I⊗Ġ_mm) s_m`
fn signal_derivative(s: &RadarScenario, w: &[CVector], m: usize) -> CVector {
    kron_identity(s.l, &response_derivative(s, m)) * &w[m]
}

/// `J_m = 2 v_mᴴ K_m⁻¹ v_m`; zero when `v_m = 0`.
pub fn fisher_information(s: &RadarScenario, w: &[CVector], m: usize) -> Result<f64> {
    let k = covariance_k(s, w, m)?;
    let v = signal_derivative(s, w, m);
    let n = v.len();
    let y = solve_hpd(&k, &CMatrix::from_column_slice(n, 1, v.as_slice()))?;
    Ok(2.0 * v.dotc(&y.column(0)).re)
}

/// `Σ_m 1/J_m`, `+∞` when some `J_m = 0`.
pub fn sum_crb(s: &RadarScenario, w: &[CVector]) -> Result<ExtendedReal> {
    let mut total = 0.0;
    for m in 0..s.radars() {
        let j = fisher_information(s, w, m)?;
        if !(j > 0.0) {
            return Ok(ExtendedReal::PosInfinity);
        }
        total += 1.0 / j;
    }
    Ok(ExtendedReal::Finite(total))
}

/// `Y_m = K_m⁻¹ (I⊗Ġ_mm) s_m`
pub fn radar_aux_update(s: &RadarScenario, w: &[CVector], m: usize) -> Result<CVector> {
    let k = covariance_k(s, w, m)?;
    let v = signal_derivative(s, w, m);
    let n = v.len();
    Ok(solve_hpd(&k, &CMatrix::from_column_slice(n, 1, v.as_slice()))?.column(0).into_owned())
}

/// Auxiliary vectors plus the products the subproblem needs.
#[derive(Debug, Clone)]
pub struct RadarAux {
    pub y: Vec<CVector>,
    /// `(I⊗Ġ_mm)ᴴ Y_m`
    own: Vec<CVector>,
    /// `(I⊗G_mm')ᴴ Y_m` for every `m'` (unused at `m' = m`).
    cross: Vec<Vec<CVector>>,
    /// `σ_m²‖Y_m‖²`
    noise: Vec<f64>,
}

/// Precomputed operators of a scenario.
#[derive(Debug, Clone)]
pub struct RadarModel {
    scenario: RadarScenario,
    /// `I⊗Ġ_mm`
    d: Vec<CMatrix>,
    /// `I⊗G_mm'`
    g: Vec<Vec<CMatrix>>,
    offsets: Vec<usize>,
}

impl RadarModel {
    pub fn new(scenario: &RadarScenario) -> Self {
        let m_total = scenario.radars();
        let d = (0..m_total).map(|m| kron_identity(scenario.l, &response_derivative(scenario, m))).collect();
        let g = (0..m_total)
            .map(|m| (0..m_total).map(|mp| kron_identity(scenario.l, &response_matrix(scenario, m, mp))).collect())
            .collect();
        let mut offsets = Vec::with_capacity(m_total + 1);
        let mut off = 0;
        for m in 0..m_total {
            offsets.push(off);
            off += 2 * scenario.waveform_len(m);
        }
        offsets.push(off);
        RadarModel { scenario: scenario.clone(), d, g, offsets }
    }

    pub fn scenario(&self) -> &RadarScenario {
        &self.scenario
    }

    /// Length of the stacked real coordinates.
    pub fn real_dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Interleave `(re, im)` of all waveforms.
    pub fn pack(&self, w: &[CVector]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.real_dim());
        for v in w {
            for z in v.iter() {
                x.push(z.re);
                x.push(z.im);
            }
        }
        x
    }

    pub fn unpack(&self, x: &[f64]) -> Vec<CVector> {
        (0..self.scenario.radars())
            .map(|m| {
                let block = &x[self.offsets[m]..self.offsets[m + 1]];
                CVector::from_iterator(block.len() / 2, block.chunks(2).map(|p| c(p[0], p[1])))
            })
            .collect()
    }

    fn scatter(&self, m: usize, g: &CVector, scale: f64, grad: &mut [f64]) {
        let off = self.offsets[m];
        for (i, z) in g.iter().enumerate() {
            grad[off + 2 * i] += scale * z.re;
            grad[off + 2 * i + 1] += scale * z.im;
        }
    }

    fn covariance(&self, w: &[CVector], m: usize) -> CMatrix {
        let n = self.d[m].nrows();
        let mut k = CMatrix::identity(n, n) * c(self.scenario.sigma2[m], 0.0);
        for (mp, wp) in w.iter().enumerate() {
            if mp != m {
                let e = &self.g[m][mp] * wp;
                k += &e * e.adjoint();
            }
        }
        k
    }

    /// `(J_m, Y_m)` for every radar; `None` if a covariance is not PD.
    fn fisher_all(&self, w: &[CVector]) -> Option<Vec<(f64, CVector)>> {
        (0..w.len())
            .map(|m| {
                let v = &self.d[m] * &w[m];
                let y = solve_hpd_fast(&self.covariance(w, m), &v)?;
                Some((2.0 * v.dotc(&y).re, y))
            })
            .collect()
    }

    /// `−Σ 1/J_m` at packed waveforms, with its gradient when requested.
    pub fn neg_sum_crb(&self, x: &[f64], grad: Option<&mut [f64]>) -> Option<f64> {
        let w = self.unpack(x);
        let all = self.fisher_all(&w)?;
        if all.iter().any(|(j, _)| !(*j > 0.0)) {
            return None;
        }
        let value = -all.iter().map(|(j, _)| 1.0 / j).sum::<f64>();
        if let Some(grad) = grad {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for (m, (j, y)) in all.iter().enumerate() {
                // d(−1/J) = dJ/J²; own waveform: 4(I⊗Ġ)ᴴY, others: −4(uᴴs')u.
                let scale = 1.0 / (j * j);
                self.scatter(m, &(self.d[m].adjoint() * y), 4.0 * scale, grad);
                for (mp, wp) in w.iter().enumerate() {
                    if mp != m {
                        let u = self.g[m][mp].adjoint() * y;
                        let cu = &u * u.dotc(wp);
                        self.scatter(mp, &cu, -4.0 * scale, grad);
                    }
                }
            }
        }
        Some(value)
    }

    pub fn aux_at(&self, w: &[CVector]) -> Option<RadarAux> {
        let all = self.fisher_all(w)?;
        let m_total = w.len();
        let y: Vec<CVector> = all.into_iter().map(|(_, y)| y).collect();
        let own = (0..m_total).map(|m| self.d[m].adjoint() * &y[m]).collect();
        let cross = (0..m_total).map(|m| (0..m_total).map(|mp| self.g[m][mp].adjoint() * &y[m]).collect()).collect();
        let noise = (0..m_total).map(|m| self.scenario.sigma2[m] * y[m].norm_squared()).collect();
        Some(RadarAux { y, own, cross, noise })
    }

    /// `Q⁺_m = 2Re(Y_mᴴ(I⊗Ġ_mm)s_m) − Σ_{m'≠m}|Y_mᴴ(I⊗G_mm')s_m'|² − σ_m²‖Y_m‖²`
    pub fn q_plus(&self, aux: &RadarAux, w: &[CVector], m: usize) -> f64 {
        let mut q = 2.0 * aux.own[m].dotc(&w[m]).re - aux.noise[m];
        for (mp, wp) in w.iter().enumerate() {
            if mp != m {
                q -= aux.cross[m][mp].dotc(wp).norm_sqr();
            }
        }
        q
    }

    /// `Σ_m −1/(2Q⁺_m)` and its gradient; `None` when some `Q⁺_m ≤ 0`.
    pub fn subproblem(&self, aux: &RadarAux, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let w = self.unpack(x);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut total = 0.0;
        for m in 0..w.len() {
            let q = self.q_plus(aux, &w, m);
            if !(q > 0.0) {
                return None;
            }
            total -= 0.5 / q;
            let d = 0.5 / (q * q);
            self.scatter(m, &aux.own[m], 2.0 * d, grad);
            for (mp, wp) in w.iter().enumerate() {
                if mp != m {
                    let u = &aux.cross[m][mp];
                    self.scatter(mp, &(u * u.dotc(wp)), -2.0 * d, grad);
                }
            }
        }
        Some(total)
    }
}

/// Subproblem value `Σ −1/(2Q⁺_m)` and gradient at `w` for fixed `aux`.
pub fn radar_subproblem_objective(model: &RadarModel, w: &[CVector], aux: &RadarAux) -> Option<(f64, Vec<f64>)> {
    let x = model.pack(w);
    let mut g = vec![0.0; x.len()];
    model.subproblem(aux, &x, &mut g).map(|v| (v, g))
}

/// MM problem over packed waveforms. Objective and surrogate are multiplied
/// by a fixed positive `scale` so that the solver tolerances see values of
/// order one; the maximizers are unchanged.
pub struct RadarProblem {
    model: RadarModel,
    feasible: BallProduct,
    scale: f64,
}

impl RadarProblem {
    pub fn new(model: RadarModel, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(FpError::invalid("objective scale must be positive"));
        }
        let s = model.scenario();
        let blocks: Vec<(usize, f64)> = (0..s.radars()).map(|m| (2 * s.waveform_len(m), s.power(m))).collect();
        let feasible = BallProduct::new(&blocks)?;
        Ok(RadarProblem { model, feasible, scale })
    }

    pub fn model(&self) -> &RadarModel {
        &self.model
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl MmProblem for RadarProblem {
    type Aux = Option<RadarAux>;

    fn dim(&self) -> usize {
        self.model.real_dim()
    }

    fn feasible(&self) -> &dyn FeasibleSet {
        &self.feasible
    }

    fn objective(&self, x: &[f64]) -> Option<f64> {
        self.model.neg_sum_crb(x, None).map(|v| v * self.scale)
    }

    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]) -> bool {
        let ok = self.model.neg_sum_crb(x, Some(grad)).is_some();
        grad.iter_mut().for_each(|g| *g *= self.scale);
        ok
    }

    fn update_aux(&self, x: &[f64]) -> Option<RadarAux> {
        self.model.aux_at(&self.model.unpack(x))
    }

    fn surrogate(&self, aux: &Option<RadarAux>, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let v = self.model.subproblem(aux.as_ref()?, x, grad)?;
        grad.iter_mut().for_each(|g| *g *= self.scale);
        Some(v * self.scale)
    }
}

/// Flat full-power start `s_m = √(P_m/(L·N_T_m))·1`. Radars whose signal
/// derivative vanishes get a seeded perturbation of relative size `1e-3`,
/// rescaled back to full power.
pub fn initial_waveforms(s: &RadarScenario, seed: u64) -> Vec<CVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<CVector> = (0..s.radars())
        .map(|m| {
            let n = s.waveform_len(m);
            CVector::from_element(n, c((s.power[m] / n as f64).sqrt(), 0.0))
        })
        .collect();
    for m in 0..s.radars() {
        if signal_derivative(s, &w, m).norm() == 0.0 {
            let amp = (s.power[m] / w[m].len() as f64).sqrt() * 1e-3;
            for z in w[m].iter_mut() {
                *z += c(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
            }
            let norm = w[m].norm();
            w[m] *= c(s.power[m].sqrt() / norm, 0.0);
        }
    }
    w
}

/// MM from [`initial_waveforms`]; the trace reports `sum_crb`
/// (nonincreasing).
pub fn design_waveforms(s: &RadarScenario, opts: &SolveOptions, clock: &dyn Clock) -> Result<(Vec<CVector>, IterationTrace)> {
    let w0 = initial_waveforms(s, opts.seed);
    let model = RadarModel::new(s);
    let x0 = model.pack(&w0);
    let start = model.neg_sum_crb(&x0, None).ok_or(FpError::InvalidStart)?;
    let problem = RadarProblem::new(model, 1.0 / start.abs())?;
    let (x, mut trace) = run_mm(&problem, &x0, opts, clock)?;
    for r in &mut trace.records {
        r.objective /= problem.scale;
        r.surrogate_gap /= problem.scale;
        r.surrogate_gain /= problem.scale;
    }
    Ok((problem.model.unpack(&x), trace.into_minimization()))
}

/// Projected-gradient residual of `−sum_crb` (unscaled) at `w`.
pub fn radar_stationarity(s: &RadarScenario, w: &[CVector]) -> f64 {
    let problem = RadarProblem::new(RadarModel::new(s), 1.0).expect("unit scale");
    crate::solver::stationarity_residual(&problem, &problem.model.pack(w))
}

/// Checks the lifted form at `U_m = s_m s_mᴴ`: returns the largest absolute
/// gap between the lifted and direct subproblem values at `aux`, and the
/// smallest eigenvalue over all `[[U_m, s_m], [s_mᴴ, 1]]`.
pub fn schur_lift_check(s: &RadarScenario, w: &[CVector], aux: &RadarAux) -> (f64, f64) {
    let model = RadarModel::new(s);
    let mut gap = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let u: Vec<CMatrix> = w.iter().map(|v| v * v.adjoint()).collect();
    for m in 0..w.len() {
        let direct = model.q_plus(aux, w, m);
        let mut lifted = 2.0 * aux.y[m].dotc(&(&model.d[m] * &w[m])).re - aux.noise[m];
        for mp in 0..w.len() {
            if mp != m {
                let gy = model.g[m][mp].adjoint() * &aux.y[m];
                lifted -= gy.dotc(&(&u[mp] * &gy)).re;
            }
        }
        gap = gap.max((0.5 / lifted - 0.5 / direct).abs());
        let n = w[m].len();
        let mut block = CMatrix::zeros(n + 1, n + 1);
        block.view_mut((0, 0), (n, n)).copy_from(&u[m]);
        for i in 0..n {
            block[(i, n)] = w[m][i];
            block[(n, i)] = w[m][i].conj();
        }
        block[(n, n)] = c(1.0, 0.0);
        min_eig = min_eig.min(hermitian_eigen(&block).0[0]);
    }
    (gap, min_eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{opt_y_matrix, HermitianPD, SqrtFactor};
    use crate::solver::{central_difference, NoClock};
    use core::f64::consts::PI;

    fn single(n_t: usize, n_r: usize, theta: f64, l: usize, p: f64) -> RadarScenario {
        RadarScenario::new(vec![n_t], vec![n_r], vec![theta], vec![c(1.0, 0.0)], vec![1.0], vec![p], l).unwrap()
    }

    fn two_radars() -> RadarScenario {
        RadarScenario::new(
            vec![2, 3],
            vec![3, 2],
            vec![0.4, -0.9],
            vec![c(1.0, 0.0), c(0.3, -0.2), c(0.5, 0.1), c(0.8, 0.4)],
            vec![0.5, 0.7],
            vec![2.0, 3.0],
            2,
        )
        .unwrap()
    }

    fn close(a: &CVector, b: &CVector, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn steering_examples() {
        assert!(close(&steering_vector(3, 0.0), &CVector::from_element(3, c(1.0, 0.0)), 1e-15));
        assert!(close(&steering_vector(2, PI / 2.0), &CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]), 1e-15));
        assert_eq!(steering_vector(1, 0.7)[0], c(1.0, 0.0));
        assert!(steering_derivative(2, PI / 2.0).norm() < 1e-15);
        assert!(close(&steering_derivative(2, 0.0), &CVector::from_vec(vec![c(0.0, 0.0), c(0.0, -PI)]), 1e-15));
        assert_eq!(steering_derivative(1, 1.1)[0], c(0.0, 0.0));
        for th in [0.3, -1.2, 2.0] {
            let h = 1e-6;
            let fd = (steering_vector(5, th + h) - steering_vector(5, th - h)) / c(2.0 * h, 0.0);
            assert!((&fd - steering_derivative(5, th)).norm() <= 1e-5 * (1.0 + fd.norm()));
        }
    }

    #[test]
    fn response_examples() {
        let mut s = single(1, 1, 0.3, 1, 1.0);
        s.beta = vec![c(2.0, 0.0)];
        assert_eq!(response_matrix(&s, 0, 0)[(0, 0)], c(2.0, 0.0));
        assert!(response_derivative(&s, 0).norm() == 0.0);
        let s = single(3, 4, 0.0, 1, 1.0);
        assert!((response_matrix(&s, 0, 0) - CMatrix::from_element(4, 3, c(1.0, 0.0))).norm() < 1e-15);
        let s = single(3, 4, PI / 2.0, 1, 1.0);
        assert!(response_derivative(&s, 0).norm() < 1e-12);
        let g = response_matrix(&two_radars(), 0, 1);
        assert_eq!(hermitian_eigen(&(&g * g.adjoint())).0.iter().filter(|v| **v > 1e-9).count(), 1);
    }

    #[test]
    fn response_derivative_matches_finite_difference() {
        let s = two_radars();
        for m in 0..2 {
            let h = 1e-6;
            let mut hi = s.clone();
            hi.theta[m] += h;
            let mut lo = s.clone();
            lo.theta[m] -= h;
            let fd = (response_matrix(&hi, m, m) - response_matrix(&lo, m, m)) / c(2.0 * h, 0.0);
            assert!((&fd - response_derivative(&s, m)).norm() <= 1e-5 * fd.norm());
        }
    }

    #[test]
    fn covariance_examples() {
        let s = single(2, 3, 0.3, 2, 1.0);
        let w = initial_waveforms(&s, 0);
        assert!((covariance_k(&s, &w, 0).unwrap() - CMatrix::identity(6, 6)).norm() == 0.0);
        let s2 = two_radars();
        let zero = vec![CVector::zeros(4), CVector::zeros(6)];
        assert!((covariance_k(&s2, &zero, 0).unwrap() - CMatrix::identity(6, 6) * c(0.5, 0.0)).norm() == 0.0);
        let w = initial_waveforms(&s2, 0);
        let k = covariance_k(&s2, &w, 1).unwrap();
        let vals = hermitian_eigen(&k).0;
        assert!(vals[0] >= 0.7 - 1e-12);
        assert_eq!(vals.iter().filter(|v| **v > 0.7 + 1e-9).count(), 1);
    }

    #[test]
    fn fisher_examples() {
        let s = single(1, 2, 0.0, 1, 1.0);
        let w = vec![CVector::from_element(1, c(1.0, 0.0))];
        let j = fisher_information(&s, &w, 0).unwrap();
        assert!((j - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sum_crb(&s, &w).unwrap().finite().unwrap() - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);

        let s = single(2, 2, PI / 2.0, 1, 1.0);
        let w = initial_waveforms(&s, 0);
        assert!(fisher_information(&s, &w, 0).unwrap().abs() < 1e-20);
        assert_eq!(sum_crb(&s, &w).unwrap(), ExtendedReal::PosInfinity);

        let s = single(3, 2, 0.4, 2, 1.0);
        let w = vec![CVector::from_fn(6, |i, _| c(0.1 * i as f64, 0.3 - 0.05 * i as f64))];
        let scaled = vec![&w[0] * c(1.5, -0.5)];
        let ratio = fisher_information(&s, &scaled, 0).unwrap() / fisher_information(&s, &w, 0).unwrap();
        assert!((ratio - 2.5).abs() < 1e-12);
    }

    #[test]
    fn tightness_and_aux_consistency() {
        let s = two_radars();
        let model = RadarModel::new(&s);
        let w = initial_waveforms(&s, 0);
        let aux = model.aux_at(&w).unwrap();
        for m in 0..2 {
            let j = fisher_information(&s, &w, m).unwrap();
            assert!((model.q_plus(&aux, &w, m) - j / 2.0).abs() <= 1e-10 * j);
            let y = radar_aux_update(&s, &w, m).unwrap();
            assert!(close(&y, &aux.y[m], 1e-12 * y.norm()));
            let v = signal_derivative(&s, &w, m);
            let ym = opt_y_matrix(
                &SqrtFactor::new(CMatrix::from_column_slice(v.len(), 1, v.as_slice())).unwrap(),
                &HermitianPD::definite(covariance_k(&s, &w, m).unwrap()).unwrap(),
            )
            .unwrap();
            assert!(close(&ym.column(0).into_owned(), &y, 1e-10 * y.norm()));
        }
        let (v, _) = radar_subproblem_objective(&model, &w, &aux).unwrap();
        let crb = sum_crb(&s, &w).unwrap().finite().unwrap();
        assert!((v + crb).abs() <= 1e-10 * crb);

        let single_s = single(2, 3, 0.5, 2, 1.0);
        let w1 = initial_waveforms(&single_s, 0);
        let y = radar_aux_update(&single_s, &w1, 0).unwrap();
        assert!(close(&y, &signal_derivative(&single_s, &w1, 0), 1e-12));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let s = two_radars();
        let model = RadarModel::new(&s);
        let w0 = initial_waveforms(&s, 0);
        let aux = model.aux_at(&w0).unwrap();
        let x: Vec<f64> = model.pack(&w0).iter().enumerate().map(|(i, v)| v * (1.0 + 0.05 * ((i * 7 % 5) as f64 - 2.0))).collect();
        let n = x.len();
        let mut g = vec![0.0; n];
        let mut fd = vec![0.0; n];
        model.subproblem(&aux, &x, &mut g).unwrap();
        assert!(central_difference(|z| model.subproblem(&aux, z, &mut vec![0.0; n]), &x, &mut fd));
        let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..n {
            assert!((g[i] - fd[i]).abs() <= 1e-5 * scale, "{i}: {} {}", g[i], fd[i]);
        }
        model.neg_sum_crb(&x, Some(&mut g)).unwrap();
        assert!(central_difference(|z| model.neg_sum_crb(z, None), &x, &mut fd));
        let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..n {
            assert!((g[i] - fd[i]).abs() <= 1e-5 * scale, "{i}: {} {}", g[i], fd[i]);
        }
    }

    #[test]
    fn single_radar_aligns_with_top_eigenvector() {
        let s = single(3, 4, 0.6, 2, 2.0);
        let (w, trace) = design_waveforms(&s, &SolveOptions::default(), &NoClock).unwrap();
        assert!(trace.is_monotone(1e-9));
        let d = kron_identity(2, &response_derivative(&s, 0));
        let (vals, vecs) = hermitian_eigen(&(d.adjoint() * &d));
        // The top eigenvalue repeats once per snapshot; project onto its eigenspace.
        let top = vals[vals.len() - 1];
        let align: f64 = (0..vals.len())
            .filter(|&i| vals[i] >= top * (1.0 - 1e-9))
            .map(|i| vecs.column(i).dotc(&w[0]).norm_sqr())
            .sum::<f64>()
            / w[0].norm_squared();
        assert!(align > 1.0 - 1e-6, "{align}");
        assert!((w[0].norm_squared() - 2.0).abs() < 1e-9);
        let j_opt = 2.0 * 2.0 * vals[vals.len() - 1];
        assert!((fisher_information(&s, &w, 0).unwrap() - j_opt).abs() <= 1e-6 * j_opt);
    }

    #[test]
    fn degenerate_start_is_perturbed() {
        let s = single(2, 2, PI / 2.0 - 1e-3, 1, 1.0);
        let w = initial_waveforms(&s, 3);
        assert!((w[0].norm_squared() - 1.0).abs() < 1e-12);
        let s = RadarScenario::new(vec![2], vec![2], vec![PI / 2.0], vec![c(1.0, 0.0)], vec![1.0], vec![1.0], 1).unwrap();
        let w = initial_waveforms(&s, 3);
        assert!((w[0].norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_radar_run_saturates_power_and_lift_is_consistent() {
        let s = two_radars();
        let (w, trace) = design_waveforms(&s, &SolveOptions::default(), &NoClock).unwrap();
        assert!(trace.is_monotone(1e-9));
        assert!(trace.final_objective() < trace.initial_objective());
        for m in 0..2 {
            assert!((w[m].norm_squared() - s.power(m)).abs() <= 1e-6 * s.power(m));
        }
        let aux = RadarModel::new(&s).aux_at(&w).unwrap();
        let (gap, eig) = schur_lift_check(&s, &w, &aux);
        assert!(gap <= 1e-10 && eig >= -1e-9, "{gap} {eig}");
    }
}
