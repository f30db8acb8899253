//! Scalar transforms, the mixed surrogate, term gradients and projections.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fracprog_core::apps::aoi::{build_aoi_problem, AoiScenario};
use fracprog_core::apps::secure::build_direct_problem;
use fracprog_core::linalg::c;
use fracprog_core::scalar::{
    inv_quad_surrogate, mixed_objective, mixed_surrogate, opt_y, opt_y_tilde, quad_surrogate, MixedFpProblem, RatioTerm, Side,
};
use fracprog_core::solver::{BallProduct, BoxSet, FeasibleSet};
use fracprog_core::{OuterFunction, DEFAULT_EPS};

use super::apps::random_secure;
use super::{close, ensure, gradient_matches, rng, uniform_point, CheckFn, Outcome};

pub(crate) const CHECKS: &[(&str, CheckFn)] = &[
    ("quadratic_transform_bound", quadratic_transform_bound),
    ("inverse_transform_bound", inverse_transform_bound),
    ("mixed_surrogate_sandwich", mixed_surrogate_sandwich),
    ("reciprocal_sum_inequality", reciprocal_sum_inequality),
    ("ratio_term_gradients", ratio_term_gradients),
    ("projections_idempotent", projections_idempotent),
];

fn quadratic_transform_bound() -> Outcome {
    let mut r = rng(11);
    for _ in 0..1000 {
        let a = r.gen_range(0.0..=10.0);
        let b = r.gen_range(1e-6..=10.0);
        let ratio = a / b;
        let ys = opt_y(a, b).map_err(|e| e.to_string())?;
        let y = r.gen_range(0.0..=2.0 * ys + 1.0);
        let q = quad_surrogate(a, b, y).map_err(|e| e.to_string())?;
        let tol = 1e-12 * ratio.max(1.0);
        ensure(q <= ratio + tol, || format!("A={a:e} B={b:e} y={y:e}: surrogate {q:e} exceeds A/B={ratio:e}"))?;
        // the gap is exactly B(y − y*)², so equality holds only at y*
        let gap = b * (y - ys) * (y - ys);
        ensure((ratio - q - gap).abs() <= 1e-9 * ratio.max(1.0), || {
            format!("A={a:e} B={b:e} y={y:e}: gap {:e} differs from B(y−y*)²={gap:e}", ratio - q)
        })?;
        let tight = quad_surrogate(a, b, ys).map_err(|e| e.to_string())?;
        ensure((tight - ratio).abs() <= tol, || format!("A={a:e} B={b:e}: surrogate at y* is {tight:e}, A/B={ratio:e}"))?;
    }
    Ok(())
}

fn inverse_transform_bound() -> Outcome {
    let mut r = rng(12);
    for _ in 0..1000 {
        let a: f64 = r.gen_range(1e-3..=10.0);
        let b: f64 = r.gen_range(1e-3..=10.0);
        let ratio = a / b;
        let ys = b.sqrt() / a;
        let y = r.gen_range(0.0..=3.0 * ys);
        let v = inv_quad_surrogate(a, b, y).map_err(|e| e.to_string())?.to_f64();
        let tol = 1e-12 * ratio.max(1.0);
        ensure(v >= ratio - tol, || format!("A={a:e} B={b:e} ỹ={y:e}: surrogate {v:e} below A/B={ratio:e}"))?;
        let tight = inv_quad_surrogate(a, b, ys).map_err(|e| e.to_string())?.to_f64();
        ensure((tight - ratio).abs() <= tol, || format!("A={a:e} B={b:e}: surrogate at √B/A is {tight:e}, A/B={ratio:e}"))?;
        let safeguarded = opt_y_tilde(a, b, DEFAULT_EPS).map_err(|e| e.to_string())?;
        ensure(close(safeguarded, ys, 1e-9), || format!("A={a:e} B={b:e}: opt ỹ {safeguarded:e} vs √B/A={ys:e}"))?;
    }
    Ok(())
}

/// Coefficients of `A(x) = a0 + Σ a_i x_i²`, `B(x) = b0 + Σ b_i x_i` on `[0, 2]^n`.
#[derive(Debug, Clone)]
pub(crate) struct TermSpec {
    pub a0: f64,
    pub a: Vec<f64>,
    pub b0: f64,
    pub b: Vec<f64>,
}

impl TermSpec {
    /// With `small`, `A < B` everywhere on the box (for `ln(1 − r)`).
    pub fn random(r: &mut ChaCha8Rng, n: usize, small: bool) -> Self {
        let (a0_hi, ai_hi) = if small { (0.1, 0.02) } else { (2.0, 1.0) };
        TermSpec {
            a0: r.gen_range(0.01..=a0_hi),
            a: (0..n).map(|_| r.gen_range(0.0..=ai_hi)).collect(),
            b0: r.gen_range(0.5..=2.0),
            b: (0..n).map(|_| r.gen_range(0.0..=1.0)).collect(),
        }
    }

    pub fn numerator(&self) -> impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync + 'static {
        let (a0, a) = (self.a0, self.a.clone());
        move |x: &[f64], g: &mut [f64]| {
            let mut v = a0;
            for i in 0..x.len() {
                v += a[i] * x[i] * x[i];
                g[i] = 2.0 * a[i] * x[i];
            }
            v
        }
    }

    pub fn denominator(&self) -> impl Fn(&[f64], &mut [f64]) -> f64 + Send + Sync + 'static {
        let (b0, b) = (self.b0, self.b.clone());
        move |x: &[f64], g: &mut [f64]| {
            g.copy_from_slice(&b);
            b0 + b.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
        }
    }

    pub fn values(&self, x: &[f64]) -> (f64, f64) {
        let a = self.a0 + self.a.iter().zip(x).map(|(c, v)| c * v * v).sum::<f64>();
        let b = self.b0 + self.b.iter().zip(x).map(|(c, v)| c * v).sum::<f64>();
        (a, b)
    }
}

fn random_mixed(r: &mut ChaCha8Rng) -> (usize, MixedFpProblem, String) {
    let n = r.gen_range(1..=3);
    let count = r.gen_range(1..=6);
    let mut terms = Vec::new();
    let mut desc = Vec::new();
    for _ in 0..count {
        let w = r.gen_range(0.1..=2.0);
        let kind = r.gen_range(0..5);
        let (side, outer, small) = match kind {
            0 => (Side::Max, OuterFunction::Identity(w), false),
            1 => (Side::Max, OuterFunction::WeightedLog1p(w), false),
            2 => (Side::Max, OuterFunction::NegHalfInverse, false),
            3 => (Side::Min, OuterFunction::NegIdentity(w), false),
            _ => (Side::Min, OuterFunction::WeightedLog1m(w), true),
        };
        let spec = TermSpec::random(r, n, small);
        desc.push(format!("{outer:?} {spec:?}"));
        terms.push(RatioTerm::new(side, outer, spec.numerator(), spec.denominator()).expect("side matches outer"));
    }
    let problem = MixedFpProblem::new(n, terms, BoxSet::uniform(n, 0.0, 2.0).expect("box")).expect("problem");
    (n, problem, desc.join("; "))
}

fn mixed_surrogate_sandwich() -> Outcome {
    let mut r = rng(13);
    for _ in 0..200 {
        let (n, problem, desc) = random_mixed(&mut r);
        let (lo, hi) = (vec![0.0; n], vec![2.0; n]);
        let anchor = uniform_point(&mut r, &lo, &hi);
        let fa = mixed_objective(&problem, &anchor).map_err(|e| e.to_string())?;
        let ga = mixed_surrogate(&problem, &anchor, &anchor).map_err(|e| e.to_string())?;
        ensure((fa - ga).abs() <= 1e-9, || format!("[{desc}] anchor {anchor:?}: surrogate {ga:e} vs objective {fa:e}"))?;
        for _ in 0..20 {
            let x = uniform_point(&mut r, &lo, &hi);
            let f = mixed_objective(&problem, &x).map_err(|e| e.to_string())?;
            let g = mixed_surrogate(&problem, &x, &anchor).map_err(|e| e.to_string())?;
            ensure(g <= f + 1e-9, || format!("[{desc}] x={x:?} anchor={anchor:?}: surrogate {g:e} above objective {f:e}"))?;
        }
    }
    Ok(())
}

// Σ A/B and N²/Σ(B/A) differ unless the ratios coincide, so replacing a
// min-side ratio by its flipped max-side counterpart is not an equivalence.
fn reciprocal_sum_inequality() -> Outcome {
    let mut r = rng(14);
    for _ in 0..1000 {
        let r1: f64 = r.gen_range(1e-3..=100.0);
        let r2: f64 = r.gen_range(1e-3..=100.0);
        let direct = r1 + r2;
        let flipped = 4.0 / (1.0 / r1 + 1.0 / r2);
        ensure(direct >= flipped * (1.0 - 1e-12), || format!("ratios {r1:e}, {r2:e}: {direct:e} < {flipped:e}"))?;
        if (r1 - r2).abs() > 1e-6 * r1.max(r2) {
            ensure(direct > flipped, || format!("distinct ratios {r1:e}, {r2:e} gave equality"))?;
        }
        let same = 2.0 * r1;
        let same_flipped = 4.0 / (2.0 / r1);
        ensure(close(same, same_flipped, 1e-12), || format!("equal ratios {r1:e}: {same:e} vs {same_flipped:e}"))?;
    }
    Ok(())
}

fn term_gradients(terms: &[RatioTerm], x: &[f64], what: &str) -> Outcome {
    let n = x.len();
    for (i, t) in terms.iter().enumerate() {
        let (mut ga, mut gb) = (vec![0.0; n], vec![0.0; n]);
        t.eval(x, &mut ga, &mut gb);
        gradient_matches(|z| Some(t.values(z).0), x, &ga, 1e-5).map_err(|e| format!("{what} term {i} numerator: {e}"))?;
        gradient_matches(|z| Some(t.values(z).1), x, &gb, 1e-5).map_err(|e| format!("{what} term {i} denominator: {e}"))?;
    }
    Ok(())
}

fn ratio_term_gradients() -> Outcome {
    let mut r = rng(15);
    for _ in 0..20 {
        let k = r.gen_range(1..=6);
        let mu = r.gen_range(0.5..=3.0);
        let problem = build_aoi_problem(&AoiScenario::new(k, mu).expect("scenario"));
        let x = uniform_point(&mut r, &vec![0.05 * mu; k], &vec![mu; k]);
        term_gradients(problem.terms(), &x, &format!("aoi K={k} mu={mu}"))?;
        let mut g = vec![0.0; k];
        problem.objective_with_gradient(&x, &mut g).ok_or("aoi objective rejected an interior point")?;
        gradient_matches(|z| problem.objective_with_gradient(z, &mut vec![0.0; k]), &x, &g, 1e-5)
            .map_err(|e| format!("aoi objective K={k} mu={mu}: {e}"))?;

        let s = random_secure(&mut r, 5);
        let problem = build_direct_problem(&s);
        let l = s.links();
        let p = uniform_point(&mut r, &vec![0.05 * s.p_max(); l], &vec![s.p_max(); l]);
        term_gradients(problem.terms(), &p, "secure direct")?;
    }
    Ok(())
}

fn projections_idempotent() -> Outcome {
    let mut r = rng(16);
    for _ in 0..500 {
        let n = r.gen_range(1..=6);
        let lo: Vec<f64> = (0..n).map(|_| r.gen_range(-5.0..=0.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + r.gen_range(0.0..=5.0)).collect();
        let bx = BoxSet::new(lo.clone(), hi.clone()).map_err(|e| e.to_string())?;
        let mut x: Vec<f64> = (0..n).map(|_| r.gen_range(-10.0..=10.0)).collect();
        bx.project(&mut x);
        let once = x.clone();
        bx.project(&mut x);
        ensure(once == x, || format!("box projection not idempotent: {once:?} -> {x:?}"))?;
        ensure(x.iter().zip(&lo).zip(&hi).all(|((v, l), h)| l <= v && v <= h), || format!("box projection infeasible: {x:?}"))?;

        let blocks: Vec<(usize, f64)> = (0..r.gen_range(1..=3)).map(|_| (2 * r.gen_range(1..=4), r.gen_range(0.1..=10.0))).collect();
        let balls = BallProduct::new(&blocks).map_err(|e| e.to_string())?;
        let mut z: Vec<f64> = (0..balls.dim()).map(|_| r.gen_range(-5.0..=5.0)).collect();
        balls.project(&mut z);
        let once = z.clone();
        balls.project(&mut z);
        ensure(once.iter().zip(&z).all(|(a, b)| (a - b).abs() <= 1e-15 * (1.0 + a.abs())), || {
            format!("ball projection not idempotent: {once:?} -> {z:?}")
        })?;
        for (off, len, r2) in balls.blocks() {
            let norm2: f64 = z[off..off + len].iter().map(|v| v * v).sum();
            ensure(norm2 <= r2 * (1.0 + 1e-12), || format!("ball block at {off} has ‖·‖²={norm2:e} > {r2:e}"))?;
        }
    }
    // keep the complex helper honest too: a point inside the ball is left alone
    let inside = fracprog_core::solver::project_ball(&[c(0.1, 0.2)], 1.0);
    ensure(inside[0] == c(0.1, 0.2), || format!("interior complex point moved to {:?}", inside[0]))
}
