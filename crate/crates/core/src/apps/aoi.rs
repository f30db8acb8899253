//! Rate control for the sum of average ages of information over `K` sources
//! sharing one LCFS server with preemption in service.
//!
//! Source `k` sees the normalized load `ρ̂_k = Σ_{i<k} λ_i/μ` of the sources
//! ahead of it, so the sum is not symmetric in `λ`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // needed for float math without std
use num_traits::Float;

use crate::error::{FpError, Result};
use crate::extended::ExtendedReal;
use crate::outer::OuterFunction;
use crate::scalar::{MixedFpProblem, RatioTerm, Side};
use crate::solver::{run_mm, BoxSet, Clock, IterationTrace, SolveOptions};

/// Relative floor below which a rate counts as zero.
pub const RATE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiScenario {
    k: usize,
    mu: f64,
}

impl AoiScenario {
    pub fn new(k: usize, mu: f64) -> Result<Self> {
        if k == 0 {
            return Err(FpError::invalid("K must be at least 1"));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(FpError::invalid("mu must be positive"));
        }
        Ok(AoiScenario { k, mu })
    }

    pub fn sources(&self) -> usize {
        self.k
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

fn load_ahead(k: usize, lambda: &[f64], mu: f64) -> f64 {
    lambda[..k].iter().sum::<f64>() / mu
}

fn check_index(k: usize, lambda: &[f64]) -> Result<()> {
    if k >= lambda.len() {
        return Err(FpError::invalid("source index out of range"));
    }
    if lambda.iter().any(|l| !(*l >= 0.0)) {
        return Err(FpError::invalid("rates must be nonnegative"));
    }
    Ok(())
}

/// Average AoI of source `k` (0-based):
/// `(1+ρ+3ρ̂+3ρ̂ρ+3ρ̂²+ρ̂²ρ+ρ̂³) / (μρ(1+ρ̂))`, `+∞` at `λ_k = 0`.
pub fn avg_aoi(k: usize, lambda: &[f64], mu: f64) -> Result<ExtendedReal> {
    check_index(k, lambda)?;
    let rho = lambda[k] / mu;
    if rho == 0.0 {
        return Ok(ExtendedReal::PosInfinity);
    }
    let h = load_ahead(k, lambda, mu);
    let num = 1.0 + rho + 3.0 * h + 3.0 * h * rho + 3.0 * h * h + h * h * rho + h * h * h;
    Ok(ExtendedReal::Finite(num / (mu * rho * (1.0 + h))))
}

/// The same quantity split as `(ρ̂²+3ρ̂+1)/(μ(1+ρ̂))` and `(ρ̂+1)²/(μρ)`.
pub fn avg_aoi_decomposed(k: usize, lambda: &[f64], mu: f64) -> Result<(f64, ExtendedReal)> {
    check_index(k, lambda)?;
    let h = load_ahead(k, lambda, mu);
    let first = (h * h + 3.0 * h + 1.0) / (mu * (1.0 + h));
    let rho = lambda[k] / mu;
    let second = if rho == 0.0 { ExtendedReal::PosInfinity } else { ExtendedReal::Finite((h + 1.0) * (h + 1.0) / (mu * rho)) };
    Ok((first, second))
}

/// `Σ_k avg_aoi(k)`; `+∞` when some rate is zero.
pub fn sum_aoi(lambda: &[f64], mu: f64) -> f64 {
    let mut total = 0.0;
    for k in 0..lambda.len() {
        match avg_aoi(k, lambda, mu) {
            Ok(ExtendedReal::Finite(v)) => total += v,
            _ => return f64::INFINITY,
        }
    }
    total
}

/// `2K` min-side terms with `f(r) = −r`; the mixed objective is the negated
/// sum-AoI. The box is `[0, μ]^K` with rates at or below `1e-9·μ` outside the
/// open domain.
pub fn build_aoi_problem(scenario: &AoiScenario) -> MixedFpProblem {
    let (k_total, mu) = (scenario.k, scenario.mu);
    let mut terms = Vec::with_capacity(2 * k_total);
    for k in 0..k_total {
        // ρ̂ and its gradient; both fractions depend on λ only through ρ̂ and λ_k.
        let ahead = move |x: &[f64], g: &mut [f64]| -> f64 {
            for (i, gi) in g.iter_mut().enumerate() {
                *gi = if i < k { 1.0 / mu } else { 0.0 };
            }
            load_ahead(k, x, mu)
        };
        let first_num = move |x: &[f64], g: &mut [f64]| {
            let h = ahead(x, g);
            let d = 2.0 * h + 3.0;
            g.iter_mut().for_each(|v| *v *= d);
            h * h + 3.0 * h + 1.0
        };
        let first_den = move |x: &[f64], g: &mut [f64]| {
            let h = ahead(x, g);
            g.iter_mut().for_each(|v| *v *= mu);
            mu * (1.0 + h)
        };
        let second_num = move |x: &[f64], g: &mut [f64]| {
            let h = ahead(x, g);
            let d = 2.0 * (h + 1.0);
            g.iter_mut().for_each(|v| *v *= d);
            (h + 1.0) * (h + 1.0)
        };
        let second_den = move |x: &[f64], g: &mut [f64]| {
            g.iter_mut().for_each(|v| *v = 0.0);
            g[k] = 1.0;
            x[k]
        };
        terms.push(RatioTerm::new(Side::Min, OuterFunction::NegIdentity(1.0), first_num, first_den).expect("min side"));
        terms.push(RatioTerm::new(Side::Min, OuterFunction::NegIdentity(1.0), second_num, second_den).expect("min side"));
    }
    let feasible = BoxSet::uniform(k_total, 0.0, mu).expect("mu > 0").with_domain_floor(RATE_FLOOR * mu);
    MixedFpProblem::new(k_total, terms, feasible).expect("consistent dimensions")
}

/// MM from `λ = (μ/K)·1`; the trace reports sum-AoI (nonincreasing).
pub fn optimize_rates(scenario: &AoiScenario, opts: &SolveOptions, clock: &dyn Clock) -> Result<(Vec<f64>, IterationTrace)> {
    let problem = build_aoi_problem(scenario);
    let x0 = vec![scenario.mu / scenario.k as f64; scenario.k];
    let (x, trace) = run_mm(&problem, &x0, opts, clock)?;
    Ok((x, trace.into_minimization()))
}

/// Best common rate for all sources: a 1-D grid followed by golden-section
/// refinement in the winning bracket.
pub fn baseline_equal_rate(scenario: &AoiScenario) -> (Vec<f64>, f64) {
    let (k, mu) = (scenario.k, scenario.mu);
    let f = |l: f64| sum_aoi(&vec![l; k], mu);
    let n = 2000;
    let h = mu / n as f64;
    let (mut best_l, mut best_v) = (mu, f(mu));
    for i in 1..=n {
        let l = h * i as f64;
        let v = f(l);
        if v < best_v {
            best_v = v;
            best_l = l;
        }
    }
    let (mut a, mut b) = ((best_l - h).max(RATE_FLOOR * mu * 2.0), (best_l + h).min(mu));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a <= 1e-14 * mu {
            break;
        }
    }
    for (l, v) in [(c, fc), (d, fd)] {
        if v < best_v {
            best_v = v;
            best_l = l;
        }
    }
    (vec![best_l; k], best_v)
}

/// Every source at `λ_k = μ`.
pub fn baseline_max_rate(scenario: &AoiScenario) -> (Vec<f64>, f64) {
    let lambda = vec![scenario.mu; scenario.k];
    let v = sum_aoi(&lambda, scenario.mu);
    (lambda, v)
}

/// Exhaustive search over `{step, 2·step, …, μ}^K`, then `refine_rounds`
/// local rounds with a 10× finer step around the incumbent. Refuses `K > 3`.
pub fn oracle_grid(scenario: &AoiScenario, coarse_step: f64, refine_rounds: usize) -> Result<(Vec<f64>, f64)> {
    let (k, mu) = (scenario.k, scenario.mu);
    if k > 3 {
        return Err(FpError::Refused(alloc::format!("grid oracle is limited to K ≤ 3, got K = {k}")));
    }
    if !(coarse_step > 0.0) || coarse_step > mu {
        return Err(FpError::invalid("coarse_step must lie in (0, mu]"));
    }
    let n = (mu / coarse_step).round().max(1.0) as usize;
    let axis: Vec<f64> = (1..=n).map(|i| (i as f64 * mu / n as f64).min(mu)).collect();
    let mut best = (vec![mu; k], sum_aoi(&vec![mu; k], mu));
    search(&vec![axis; k], &mut best, mu);

    let mut step = mu / n as f64;
    for _ in 0..refine_rounds {
        let fine = step / 10.0;
        let axes: Vec<Vec<f64>> = best
            .0
            .iter()
            .map(|&c| {
                (-10i32..=10)
                    .map(|j| c + j as f64 * fine)
                    .filter(|&v| v > RATE_FLOOR * mu && v <= mu)
                    .collect()
            })
            .collect();
        search(&axes, &mut best, mu);
        step = fine;
    }
    Ok(best)
}

fn search(axes: &[Vec<f64>], best: &mut (Vec<f64>, f64), mu: f64) {
    let k = axes.len();
    let mut idx = vec![0usize; k];
    let mut point = vec![0.0; k];
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    loop {
        for i in 0..k {
            point[i] = axes[i][idx[i]];
        }
        let v = sum_aoi(&point, mu);
        if v < best.1 {
            *best = (point.clone(), v);
        }
        let mut i = 0;
        loop {
            idx[i] += 1;
            if idx[i] < axes[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
            if i == k {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::mixed_objective;
    use crate::solver::{central_difference, MmProblem, NoClock};
    use proptest::prelude::*;

    fn fin(v: ExtendedReal) -> f64 {
        v.finite().unwrap()
    }

    #[test]
    fn avg_aoi_examples() {
        assert!((fin(avg_aoi(0, &[1.0, 0.3], 1.0).unwrap()) - 2.0).abs() < 1e-15);
        assert!((fin(avg_aoi(0, &[0.5], 1.0).unwrap()) - 3.0).abs() < 1e-15);
        assert!((fin(avg_aoi(1, &[1.0, 1.0], 1.0).unwrap()) - 6.5).abs() < 1e-14);
        assert_eq!(avg_aoi(0, &[0.0], 1.0).unwrap(), ExtendedReal::PosInfinity);
    }

    #[test]
    fn decomposition_examples() {
        let (a, b) = avg_aoi_decomposed(0, &[1.0], 1.0).unwrap();
        assert!((a - 1.0).abs() < 1e-15 && (fin(b) - 1.0).abs() < 1e-15);
        let (a, b) = avg_aoi_decomposed(1, &[1.0, 1.0], 1.0).unwrap();
        assert!((a - 2.5).abs() < 1e-15 && (fin(b) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn problem_examples() {
        let s = AoiScenario::new(1, 1.0).unwrap();
        assert_eq!(build_aoi_problem(&s).terms().len(), 2);
        let s = AoiScenario::new(2, 1.0).unwrap();
        let p = build_aoi_problem(&s);
        assert!((mixed_objective(&p, &[1.0, 1.0]).unwrap() + 8.5).abs() < 1e-13);

        let x = [0.37, 0.81];
        let mut g = [0.0; 2];
        let mut fd = [0.0; 2];
        assert!(p.objective_gradient(&x, &mut g));
        assert!(central_difference(|z| p.objective(z), &x, &mut fd));
        for i in 0..2 {
            assert!((g[i] - fd[i]).abs() <= 1e-5 * fd[i].abs().max(1.0));
        }
    }

    #[test]
    fn invalid_scenarios() {
        assert!(AoiScenario::new(0, 1.0).is_err());
        assert!(AoiScenario::new(2, 0.0).is_err());
        assert!(AoiScenario::new(2, f64::NAN).is_err());
    }

    #[test]
    fn single_source_runs_to_full_rate() {
        let s = AoiScenario::new(1, 1.0).unwrap();
        let (x, trace) = optimize_rates(&s, &SolveOptions::default(), &NoClock).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9);
        assert!(trace.is_monotone(1e-9));
        assert!((trace.final_objective() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn baseline_examples() {
        let s = AoiScenario::new(1, 1.0).unwrap();
        let (l, v) = baseline_equal_rate(&s);
        assert!((l[0] - 1.0).abs() < 1e-9 && (v - 2.0).abs() < 1e-9);
        assert_eq!(baseline_max_rate(&s).1, 2.0);
        let s2 = AoiScenario::new(2, 1.0).unwrap();
        assert!((baseline_max_rate(&s2).1 - 8.5).abs() < 1e-13);

        // Independent 1-D scan at step 1e-4.
        let (_, v) = baseline_equal_rate(&s2);
        let scan = (1..=10_000).map(|i| sum_aoi(&[i as f64 * 1e-4; 2], 1.0)).fold(f64::INFINITY, f64::min);
        assert!(v <= scan + 1e-12 && v >= scan - 1e-6, "{v} {scan}");
    }

    #[test]
    fn oracle_examples() {
        let s = AoiScenario::new(1, 1.0).unwrap();
        let (l, _) = oracle_grid(&s, 0.02, 3).unwrap();
        assert_eq!(l[0], 1.0);
        let s2 = AoiScenario::new(2, 1.0).unwrap();
        let (_, v1) = oracle_grid(&s2, 0.02, 2).unwrap();
        let (_, v2) = oracle_grid(&s2, 0.02, 3).unwrap();
        assert!(v2 <= v1 && v1 - v2 <= 1e-6 * v1);
        assert!(matches!(oracle_grid(&AoiScenario::new(4, 1.0).unwrap(), 0.02, 1), Err(FpError::Refused(_))));
    }

    #[test]
    fn sum_is_not_symmetric() {
        assert!((sum_aoi(&[0.2, 0.9], 1.0) - sum_aoi(&[0.9, 0.2], 1.0)).abs() > 1e-3);
    }

    #[test]
    fn algorithm_beats_baselines() {
        for k in 1..=10 {
            let s = AoiScenario::new(k, 1.0).unwrap();
            let (_, trace) = optimize_rates(&s, &SolveOptions::default(), &NoClock).unwrap();
            let f = trace.final_objective();
            assert!(trace.is_monotone(1e-9));
            assert!(f <= baseline_equal_rate(&s).1 * (1.0 + 1e-9), "K={k}");
            assert!(f <= baseline_max_rate(&s).1 * (1.0 + 1e-9), "K={k}");
        }
    }

    proptest! {
        #[test]
        fn decomposition_identity(l in proptest::collection::vec(1e-3..5.0f64, 1..6), mu in 0.5..5.0f64) {
            for k in 0..l.len() {
                let whole = fin(avg_aoi(k, &l, mu).unwrap());
                let (a, b) = avg_aoi_decomposed(k, &l, mu).unwrap();
                prop_assert!((a + fin(b) - whole).abs() <= 1e-12 * whole);
            }
        }
    }
}
