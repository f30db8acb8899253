//! MM driver and the projected-gradient subproblem solver.
//!
//! Every problem flavour in the crate (scalar mixed FP, log-ratio, and the
//! application-specific ones) implements [`MmProblem`]. [`run_mm`] alternates
//! a closed-form auxiliary update with a concave maximization of the resulting
//! surrogate over a box or a product of balls.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Complex;
#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

use crate::error::{FpError, Result};

/// Closed constraint set with an optional open-domain guard.
pub trait FeasibleSet {
    fn dim(&self) -> usize;

    /// Euclidean projection, in place.
    fn project(&self, x: &mut [f64]);

    /// Open-domain test (strict inequalities the closed set cannot express).
    fn in_domain(&self, _x: &[f64]) -> bool {
        true
    }
}

/// Componentwise box `lo ≤ x ≤ hi`, optionally excluding `x_i ≤ floor_i`
/// from the open domain.
#[derive(Debug, Clone)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
    floor: Option<Vec<f64>>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(FpError::invalid("box bounds differ in length"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(FpError::invalid("box lower bound exceeds upper bound"));
        }
        Ok(BoxSet { lo, hi, floor: None })
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        BoxSet::new(vec![lo; dim], vec![hi; dim])
    }

    /// Points with some `x_i ≤ floor` are treated as outside the open domain.
    pub fn with_domain_floor(mut self, floor: f64) -> Self {
        self.floor = Some(vec![floor; self.lo.len()]);
        self
    }

    pub fn lower(&self) -> &[f64] {
        &self.lo
    }

    pub fn upper(&self) -> &[f64] {
        &self.hi
    }
}

impl FeasibleSet for BoxSet {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn project(&self, x: &mut [f64]) {
        for ((xi, &l), &h) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *xi = xi.max(l).min(h);
        }
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        match &self.floor {
            Some(floor) => x.iter().zip(floor).all(|(xi, f)| xi > f),
            None => true,
        }
    }
}

/// Product of Euclidean balls over consecutive blocks of coordinates.
///
/// Each block is a complex vector stored as interleaved `(re, im)` pairs, so a
/// block of `n` complex entries spans `2n` real coordinates.
#[derive(Debug, Clone)]
pub struct BallProduct {
    blocks: Vec<(usize, usize, f64)>,
    dim: usize,
}

impl BallProduct {
    /// `blocks` lists `(real_len, radius_sq)` for each block in order.
    pub fn new(blocks: &[(usize, f64)]) -> Result<Self> {
        let mut offset = 0;
        let mut out = Vec::with_capacity(blocks.len());
        for &(len, r2) in blocks {
            if !(r2 > 0.0) {
                return Err(FpError::invalid("ball radius must be positive"));
            }
            out.push((offset, len, r2));
            offset += len;
        }
        Ok(BallProduct { blocks: out, dim: offset })
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.blocks.iter().copied()
    }
}

impl FeasibleSet for BallProduct {
    fn dim(&self) -> usize {
        self.dim
    }

    fn project(&self, x: &mut [f64]) {
        for &(off, len, r2) in &self.blocks {
            project_ball_real(&mut x[off..off + len], r2);
        }
    }
}

/// Componentwise clamp of `x` into `[lo, hi]`.
pub fn project_box(x: &[f64], lo: &[f64], hi: &[f64]) -> Result<Vec<f64>> {
    let b = BoxSet::new(lo.to_vec(), hi.to_vec())?;
    if x.len() != lo.len() {
        return Err(FpError::invalid("point and bounds differ in length"));
    }
    let mut out = x.to_vec();
    b.project(&mut out);
    Ok(out)
}

/// Radial projection of a complex vector onto `‖x‖² ≤ radius_sq`.
pub fn project_ball(x: &[Complex<f64>], radius_sq: f64) -> Vec<Complex<f64>> {
    let n2: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    if n2 <= radius_sq {
        return x.to_vec();
    }
    let scale = (radius_sq / n2).sqrt();
    x.iter().map(|z| z * scale).collect()
}

pub(crate) fn project_ball_real(x: &mut [f64], radius_sq: f64) {
    let n2: f64 = x.iter().map(|v| v * v).sum();
    if n2 > radius_sq {
        let scale = (radius_sq / n2).sqrt();
        x.iter_mut().for_each(|v| *v *= scale);
    }
}

/// Solver knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub outer_tol: f64,
    pub max_outer: usize,
    pub inner_tol: f64,
    pub max_inner: usize,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub eps_safeguard: f64,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            outer_tol: 1e-8,
            max_outer: 500,
            inner_tol: 1e-7,
            max_inner: 10_000,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            eps_safeguard: crate::DEFAULT_EPS,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("outer_tol", self.outer_tol),
            ("inner_tol", self.inner_tol),
            ("armijo_c", self.armijo_c),
            ("eps_safeguard", self.eps_safeguard),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(FpError::InvalidInput(alloc::format!("{name} must be positive")));
            }
        }
        if !(self.armijo_c < 1.0) {
            return Err(FpError::invalid("armijo_c must lie in (0,1)"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(FpError::invalid("backtrack_factor must lie in (0,1)"));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(FpError::invalid("iteration limits must be at least 1"));
        }
        Ok(())
    }
}

/// Millisecond clock, injected so the core stays free of `std`.
pub trait Clock {
    fn elapsed_ms(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_ms(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub outer_index: usize,
    pub objective: f64,
    pub wall_ms: f64,
    pub inner_iterations: usize,
    /// `surrogate(x) − objective(x)` at the incoming iterate; zero when tight.
    pub surrogate_gap: f64,
    /// Surrogate gain of the subproblem solve (never negative).
    pub surrogate_gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub status: Status,
    pub sense: Sense,
}

impl IterationTrace {
    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }

    pub fn initial_objective(&self) -> f64 {
        self.records.first().map_or(f64::NAN, |r| r.objective)
    }

    /// Number of outer iterations performed (record 0 is the start point).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.objective)
    }

    /// Monotone in the direction of `sense`, up to `rel_slack·(1+|f|)`.
    pub fn is_monotone(&self, rel_slack: f64) -> bool {
        self.records.windows(2).all(|w| {
            let (a, b) = (w[0].objective, w[1].objective);
            let slack = rel_slack * (1.0 + a.abs());
            match self.sense {
                Sense::Maximize => b >= a - slack,
                Sense::Minimize => b <= a + slack,
            }
        })
    }

    /// First outer index whose objective is within `rel_tol` (relative) of
    /// the final value.
    pub fn iterations_to_within(&self, rel_tol: f64) -> usize {
        let f = self.final_objective();
        self.records
            .iter()
            .find(|r| (r.objective - f).abs() <= rel_tol * f.abs().max(f64::MIN_POSITIVE))
            .map_or(self.iterations(), |r| r.outer_index)
    }

    /// Flip a maximization trace of `−g` into a minimization trace of `g`.
    pub fn into_minimization(mut self) -> Self {
        if self.sense == Sense::Maximize {
            for r in &mut self.records {
                r.objective = -r.objective;
                r.surrogate_gap = -r.surrogate_gap;
            }
            self.sense = Sense::Minimize;
        }
        self
    }
}

/// Result of one subproblem solve.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// `false` when `max_inner` was hit before the residual tolerance.
    pub converged: bool,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `‖x − P(x + g)‖`
pub fn projected_gradient_norm(feasible: &dyn FeasibleSet, x: &[f64], g: &[f64]) -> f64 {
    let mut z: Vec<f64> = x.iter().zip(g).map(|(a, b)| a + b).collect();
    feasible.project(&mut z);
    x.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Maximize a smooth concave `objective` over `feasible` by spectral projected
/// gradient ascent with Armijo backtracking along the projection arc.
///
/// `objective(x, grad)` writes the gradient and returns the value, or `None`
/// when `x` is outside the open domain. Accepted iterates never decrease the
/// objective.
pub fn maximize_subproblem<F>(
    objective: F,
    feasible: &dyn FeasibleSet,
    x0: &[f64],
    opts: &SolveOptions,
) -> Result<SubproblemSolution>
where
    F: Fn(&[f64], &mut [f64]) -> Option<f64>,
{
    let n = x0.len();
    if n != feasible.dim() {
        return Err(FpError::invalid("start point dimension mismatch"));
    }
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = match objective(&x, &mut g) {
        Some(v) if v.is_finite() && feasible.in_domain(&x) => v,
        _ => return Err(FpError::InvalidStart),
    };

    let gnorm = norm2(&g);
    let mut step = if gnorm > 0.0 { (norm2(&x).max(1.0) * 1e-2) / gnorm } else { 1.0 };
    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut iterations = 0;

    loop {
        let residual = projected_gradient_norm(feasible, &x, &g);
        if residual <= opts.inner_tol * (1.0 + f.abs()) {
            return Ok(SubproblemSolution { x, value: f, iterations, converged: true });
        }
        if iterations >= opts.max_inner {
            return Ok(SubproblemSolution { x, value: f, iterations, converged: false });
        }
        iterations += 1;

        let mut t = step;
        let mut accepted = None;
        for _ in 0..80 {
            for i in 0..n {
                xt[i] = x[i] + t * g[i];
            }
            feasible.project(&mut xt);
            if feasible.in_domain(&xt) {
                if let Some(ft) = objective(&xt, &mut gt) {
                    let ascent: f64 = g.iter().zip(xt.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
                    if ft.is_finite() && ft >= f + opts.armijo_c * ascent {
                        accepted = Some(ft);
                        break;
                    }
                }
            }
            t *= opts.backtrack_factor;
        }
        let Some(ft) = accepted else {
            // No further progress representable in floating point.
            return Ok(SubproblemSolution { x, value: f, iterations, converged: true });
        };

        // Barzilai-Borwein step for the next iteration (ascent form).
        let s: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = -dot(&s, &y);
        let ss = dot(&s, &s);
        step = if sy > 0.0 && ss > 0.0 { (ss / sy).clamp(1e-30, 1e30) } else { (t * 4.0).min(1e30) };

        core::mem::swap(&mut x, &mut xt);
        core::mem::swap(&mut g, &mut gt);
        if ft == f && ss == 0.0 {
            return Ok(SubproblemSolution { x, value: ft, iterations, converged: true });
        }
        f = ft;
    }
}

/// A problem solvable by alternating closed-form auxiliary updates with
/// concave surrogate maximization.
///
/// All values use the maximization convention.
pub trait MmProblem {
    type Aux;

    fn dim(&self) -> usize;

    fn feasible(&self) -> &dyn FeasibleSet;

    /// True objective, `None` outside the open domain.
    fn objective(&self, x: &[f64]) -> Option<f64>;

    /// Gradient of the true objective. Defaults to central differences.
    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]) -> bool {
        central_difference(|z| self.objective(z), x, grad)
    }

    /// Optimal auxiliary variables for the anchor `x`.
    fn update_aux(&self, x: &[f64]) -> Self::Aux;

    /// Surrogate value and gradient for fixed auxiliaries; `None` rejects `x`.
    fn surrogate(&self, aux: &Self::Aux, x: &[f64], grad: &mut [f64]) -> Option<f64>;
}

/// Central finite-difference gradient with step `1e-6·(1+|x_i|)`.
pub fn central_difference<F>(f: F, x: &[f64], grad: &mut [f64]) -> bool
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let mut z = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * (1.0 + x[i].abs());
        z[i] = x[i] + h;
        let hi = f(&z);
        z[i] = x[i] - h;
        let lo = f(&z);
        z[i] = x[i];
        match (hi, lo) {
            (Some(a), Some(b)) => grad[i] = (a - b) / (2.0 * h),
            // One-sided fallback at the edge of the open domain.
            (Some(a), None) => match f(x) {
                Some(c) => grad[i] = (a - c) / h,
                None => return false,
            },
            (None, Some(b)) => match f(x) {
                Some(c) => grad[i] = (c - b) / h,
                None => return false,
            },
            (None, None) => return false,
        }
    }
    true
}

/// Run the MM loop from `x0`.
///
/// Each outer iteration records the true objective; a decrease beyond
/// `1e-9·(1+|f|)` is reported as [`FpError::MonotonicityViolated`].
pub fn run_mm<P: MmProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    opts: &SolveOptions,
    clock: &dyn Clock,
) -> Result<(Vec<f64>, IterationTrace)> {
    opts.validate()?;
    let feasible = problem.feasible();
    if x0.len() != problem.dim() {
        return Err(FpError::invalid("start point dimension mismatch"));
    }
    let mut projected = x0.to_vec();
    feasible.project(&mut projected);
    if projected.iter().zip(x0).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs())) || !feasible.in_domain(x0) {
        return Err(FpError::InvalidStart);
    }
    let mut x = x0.to_vec();
    let mut f = match problem.objective(&x) {
        Some(v) if v.is_finite() => v,
        _ => return Err(FpError::InvalidStart),
    };

    let start = clock.elapsed_ms();
    let mut records = vec![IterationRecord {
        outer_index: 0,
        objective: f,
        wall_ms: 0.0,
        inner_iterations: 0,
        surrogate_gap: 0.0,
        surrogate_gain: 0.0,
    }];
    let mut grad = vec![0.0; x.len()];
    let mut status = Status::MaxIterations;

    for outer in 1..=opts.max_outer {
        let aux = problem.update_aux(&x);
        let anchor_value = problem.surrogate(&aux, &x, &mut grad).ok_or_else(|| {
            FpError::Invariant(alloc::format!("surrogate rejects its own anchor at iteration {outer}"))
        })?;
        let sub = maximize_subproblem(|z, g| problem.surrogate(&aux, z, g), feasible, &x, opts)?;
        let f_new = problem.objective(&sub.x).ok_or_else(|| {
            FpError::Invariant(alloc::format!("subproblem left the objective domain at iteration {outer}"))
        })?;
        if f_new < f - 1e-9 * (1.0 + f.abs()) {
            return Err(FpError::MonotonicityViolated { iteration: outer, previous: f, current: f_new });
        }
        records.push(IterationRecord {
            outer_index: outer,
            objective: f_new,
            wall_ms: clock.elapsed_ms() - start,
            inner_iterations: sub.iterations,
            surrogate_gap: anchor_value - f,
            surrogate_gain: sub.value - anchor_value,
        });
        let delta = (f_new - f).abs();
        x = sub.x;
        f = f_new;
        if delta <= opts.outer_tol * f.abs() || delta == 0.0 {
            status = Status::Converged;
            break;
        }
    }

    Ok((x, IterationTrace { records, status, sense: Sense::Maximize }))
}

/// `‖x − P(x + ∇f_o(x))‖` for the true objective.
pub fn stationarity_residual<P: MmProblem + ?Sized>(problem: &P, x: &[f64]) -> f64 {
    let mut g = vec![0.0; x.len()];
    if !problem.objective_gradient(x, &mut g) {
        return f64::INFINITY;
    }
    projected_gradient_norm(problem.feasible(), x, &g)
}
