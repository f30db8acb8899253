//! Lagrangian dual transform of log-ratios and its nested MM solver.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fracprog_core::dual::{
    gammas_at, log_ratio_objective, log_ratio_surrogate, opt_gamma, opt_gamma_tilde, zeta_minus, zeta_plus, LogRatioProblem,
    LogRatioTerm, GAMMA_TILDE_MAX,
};
use fracprog_core::scalar::Side;
use fracprog_core::solver::{run_mm, BoxSet, NoClock, SolveOptions};

use super::core_suite::TermSpec;
use super::{close, ensure, rng, trace_is_sound, uniform_point, CheckFn, DomainGuard, Outcome};

pub(crate) const CHECKS: &[(&str, CheckFn)] = &[
    ("closed_form_stationarity", closed_form_stationarity),
    ("dual_recovers_logarithm", dual_recovers_logarithm),
    ("surrogate_bound", surrogate_bound),
    ("fixed_multipliers_log_free", fixed_multipliers_log_free),
    ("nested_mm_monotone", nested_mm_monotone),
];

fn e(err: fracprog_core::FpError) -> String {
    err.to_string()
}

// Richardson-extrapolated central difference; the step shrinks with the
// distance to the nearest end of the multiplier's range so that the ln(1−γ̃)
// curvature near γ̃ → 1 does not swamp the check.
fn richardson<F: Fn(f64) -> Result<f64, String>>(f: F, x: f64, h: f64) -> Result<f64, String> {
    let d = |h: f64| -> Result<f64, String> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    Ok((4.0 * d(h / 2.0)? - d(h)?) / 3.0)
}

fn closed_form_stationarity() -> Outcome {
    let mut r = rng(31);
    for _ in 0..1000 {
        let w = r.gen_range(0.1..=2.0);
        let a = r.gen_range(0.1..=10.0);
        let b = r.gen_range(0.1..=10.0);
        let g = opt_gamma(a, b).map_err(e)?;
        let d = richardson(|g| zeta_plus(w, g, a, b).map_err(e), g, 1e-3 * g.min(1.0))?;
        ensure(d.abs() <= 1e-8, || format!("w={w} A={a} B={b}: ∂ζ⁺/∂γ = {d:e} at γ=A/B"))?;
        let gt = opt_gamma_tilde(a, b).map_err(e)?;
        let d = richardson(|g| zeta_minus(w, g, a, b).map_err(e), gt, 1e-3 * gt.min(1.0 - gt))?;
        ensure(d.abs() <= 1e-8, || format!("w={w} A={a} B={b}: ∂ζ⁻/∂γ̃ = {d:e} at γ̃=A/(A+B)"))?;
    }
    Ok(())
}

fn dual_recovers_logarithm() -> Outcome {
    let mut r = rng(32);
    for _ in 0..1000 {
        let w: f64 = r.gen_range(0.0..=2.0);
        let a: f64 = r.gen_range(0.0..=10.0);
        let b: f64 = r.gen_range(1e-3..=10.0);
        let target = w * (a / b).ln_1p();
        let zp = zeta_plus(w, opt_gamma(a, b).map_err(e)?, a, b).map_err(e)?;
        ensure(close(zp, target, 1e-12), || format!("w={w} A={a} B={b}: ζ⁺(γ*) = {zp:e}, w·ln(1+A/B) = {target:e}"))?;
        let zm = zeta_minus(w, opt_gamma_tilde(a, b).map_err(e)?, a, b).map_err(e)?;
        ensure(close(zm, -target, 1e-12), || format!("w={w} A={a} B={b}: ζ⁻(γ̃*) = {zm:e}, −w·ln(1+A/B) = {:e}", -target))?;
        // and they are maxima over the multiplier
        let g = r.gen_range(0.0..=20.0);
        let zg = zeta_plus(w, g, a, b).map_err(e)?;
        ensure(zg <= zp + 1e-12 * zp.abs().max(1.0), || format!("w={w} A={a} B={b}: ζ⁺({g}) = {zg:e} exceeds ζ⁺(γ*) = {zp:e}"))?;
        let gt = r.gen_range(0.0..GAMMA_TILDE_MAX);
        let zg = zeta_minus(w, gt, a, b).map_err(e)?;
        ensure(zg <= zm + 1e-12 * zm.abs().max(1.0), || format!("w={w} A={a} B={b}: ζ⁻({gt}) = {zg:e} exceeds ζ⁻(γ̃*) = {zm:e}"))?;
    }
    Ok(())
}

struct Instance {
    n: usize,
    specs: Vec<(Side, f64, TermSpec)>,
}

impl Instance {
    fn random(r: &mut ChaCha8Rng) -> Self {
        let n = r.gen_range(1..=3);
        let count = r.gen_range(1..=5);
        let specs = (0..count)
            .map(|_| {
                let side = if r.gen_bool(0.5) { Side::Max } else { Side::Min };
                (side, r.gen_range(0.1..=2.0), TermSpec::random(r, n, false))
            })
            .collect();
        Instance { n, specs }
    }

    fn terms(&self) -> Vec<LogRatioTerm> {
        self.specs
            .iter()
            .map(|(side, w, s)| LogRatioTerm::new(*side, *w, s.numerator(), s.denominator()).expect("weight is positive"))
            .collect()
    }

    fn problem(&self) -> LogRatioProblem {
        LogRatioProblem::new(self.n, self.terms(), BoxSet::uniform(self.n, 0.0, 2.0).expect("box")).expect("problem")
    }

    fn point(&self, r: &mut ChaCha8Rng) -> Vec<f64> {
        uniform_point(r, &vec![0.0; self.n], &vec![2.0; self.n])
    }
}

fn surrogate_bound() -> Outcome {
    let mut r = rng(33);
    for _ in 0..200 {
        let inst = Instance::random(&mut r);
        let terms = inst.terms();
        let anchor = inst.point(&mut r);
        let fa = log_ratio_objective(&terms, &anchor).map_err(e)?;
        let ga = log_ratio_surrogate(&terms, &anchor, &anchor).map_err(e)?;
        ensure((fa - ga).abs() <= 1e-10 * (1.0 + fa.abs()), || format!("anchor {anchor:?}: surrogate {ga:e} vs objective {fa:e}"))?;
        for _ in 0..20 {
            let x = inst.point(&mut r);
            let f = log_ratio_objective(&terms, &x).map_err(e)?;
            let g = log_ratio_surrogate(&terms, &x, &anchor).map_err(e)?;
            ensure(g <= f + 1e-10, || format!("x={x:?} anchor={anchor:?}: surrogate {g:e} above objective {f:e}"))?;
        }
    }
    Ok(())
}

// With the multipliers fixed, the objective minus its fractional pieces
// Σ_max w(1+γ)A/(A+B) − Σ_min w(1−γ̃)A/B must not depend on x at all.
fn fixed_multipliers_log_free() -> Outcome {
    let mut r = rng(34);
    for _ in 0..200 {
        let inst = Instance::random(&mut r);
        let problem = inst.problem();
        let gammas = gammas_at(problem.terms(), &inst.point(&mut r)).map_err(e)?;
        let rest = |x: &[f64]| -> Option<f64> {
            let mut frac = 0.0;
            for (i, (side, w, spec)) in inst.specs.iter().enumerate() {
                let (a, b) = spec.values(x);
                frac += match side {
                    Side::Max => w * (1.0 + gammas.gamma[i]) * a / (a + b),
                    Side::Min => -w * (1.0 - gammas.gamma_tilde[i]) * a / b,
                };
            }
            Some(problem.fixed_gamma_objective(&gammas, x)? - frac)
        };
        let x0 = inst.point(&mut r);
        let c0 = rest(&x0).ok_or("fixed-multiplier objective rejected a box point")?;
        for _ in 0..10 {
            let x = inst.point(&mut r);
            let cx = rest(&x).ok_or("fixed-multiplier objective rejected a box point")?;
            ensure((cx - c0).abs() <= 1e-12 * (1.0 + c0.abs()), || {
                format!("non-fractional part moved from {c0:e} at {x0:?} to {cx:e} at {x:?}")
            })?;
        }
    }
    Ok(())
}

fn nested_mm_monotone() -> Outcome {
    let mut r = rng(35);
    let opts = SolveOptions { max_outer: 200, ..SolveOptions::default() };
    for seed in 0..20 {
        let inst = Instance::random(&mut r);
        let problem = inst.problem();
        let guard = DomainGuard::new(&problem);
        let x0 = inst.point(&mut r);
        let (_, trace) = run_mm(&guard, &x0, &opts, &NoClock).map_err(|err| format!("seed {seed}: {err}"))?;
        guard.verdict().map_err(|v| format!("seed {seed}: {v}"))?;
        trace_is_sound(&trace).map_err(|v| format!("seed {seed} from {x0:?}: {v}"))?;
    }
    Ok(())
}
