//! Application-level properties: the AoI rewriting, radar tightness and the
//! Schur lift, the secure-rate rewriting, analytic gradients, and MM
//! monotonicity over 20 seeds per application.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fracprog_core::apps::aoi::{self, avg_aoi, avg_aoi_decomposed, build_aoi_problem, sum_aoi, AoiScenario};
use fracprog_core::apps::radar::{
    self, fisher_information, initial_waveforms, radar_stationarity, response_derivative, response_matrix, schur_lift_check,
    steering_derivative, steering_vector, RadarModel, RadarProblem, RadarScenario,
};
use fracprog_core::apps::secure::{
    self, direct_fp_aux, direct_fp_surrogate, fast_fp_aux, fast_fp_gamma, fast_fp_objective_fr, fast_fp_subproblem, secret_rate,
    secret_rate_rewritten, weighted_sum_rate, weighted_sum_rate_gradient, DirectProblem, FastProblem, SecureScenario,
};
use fracprog_core::linalg::{c, CVector};
use fracprog_core::scalar::mixed_objective;
use fracprog_core::solver::{run_mm, MmProblem, NoClock, SolveOptions};
use fracprog_core::DEFAULT_EPS;

use super::{close, ensure, gradient_matches, rng, trace_is_sound, uniform_point, CheckFn, DomainGuard, Outcome};

pub(crate) const CHECKS: &[(&str, CheckFn)] = &[
    ("aoi_decomposition_identity", aoi_decomposition_identity),
    ("aoi_order_dependence", aoi_order_dependence),
    ("aoi_beats_baselines", aoi_beats_baselines),
    ("aoi_mm_monotone_20_seeds", aoi_mm_monotone),
    ("radar_tightness", radar_tightness),
    ("radar_derivatives", radar_derivatives),
    ("radar_schur_lift", radar_schur_lift),
    ("radar_mm_monotone_20_seeds", radar_mm_monotone),
    ("radar_five_radar_stationarity", radar_five_radar_stationarity),
    ("secure_rate_rewriting_identity", secure_rate_rewriting_identity),
    ("secure_tightness_chain", secure_tightness_chain),
    ("secure_dedicated_matches_generic", secure_dedicated_matches_generic),
    ("secure_gradients", secure_gradients),
    ("secure_mm_monotone_20_seeds", secure_mm_monotone),
    ("secure_two_link_oracle", secure_two_link_oracle),
];

fn e(err: fracprog_core::FpError) -> String {
    err.to_string()
}

// ---------------------------------------------------------------- aoi

fn aoi_decomposition_identity() -> Outcome {
    let mut r = rng(41);
    for _ in 0..10_000 {
        let k_total = r.gen_range(1..=10);
        let mu = r.gen_range(0.2..=5.0);
        let lambda: Vec<f64> = (0..k_total).map(|_| r.gen_range(1e-3 * mu..=mu)).collect();
        let k = r.gen_range(0..k_total);
        let whole = avg_aoi(k, &lambda, mu).map_err(e)?.to_f64();
        let (first, second) = avg_aoi_decomposed(k, &lambda, mu).map_err(e)?;
        let parts = first + second.to_f64();
        ensure(close(whole, parts, 1e-12), || format!("k={k} mu={mu} λ={lambda:?}: {whole:e} vs parts {parts:e}"))?;
    }
    Ok(())
}

// The sum is not symmetric in λ: sources later in the order see more load.
fn aoi_order_dependence() -> Outcome {
    let lambda = [0.2, 0.9];
    let (a, b) = (sum_aoi(&lambda, 1.0), sum_aoi(&[0.9, 0.2], 1.0));
    ensure((a - b).abs() > 1e-6, || format!("sum-AoI symmetric under swapping λ={lambda:?}: {a} vs {b}"))
}

fn aoi_beats_baselines() -> Outcome {
    let opts = SolveOptions::default();
    for k in 1..=10 {
        let s = AoiScenario::new(k, 1.0).map_err(e)?;
        let (_, trace) = aoi::optimize_rates(&s, &opts, &NoClock).map_err(e)?;
        let f = trace.final_objective();
        let equal = aoi::baseline_equal_rate(&s).1;
        let max = aoi::baseline_max_rate(&s).1;
        ensure(f <= equal * (1.0 + 1e-9), || format!("K={k}: FP {f} above equal-rate {equal}"))?;
        ensure(equal <= max * (1.0 + 1e-12), || format!("K={k}: equal-rate {equal} above max-rate {max}"))?;
        ensure(f <= max, || format!("K={k}: FP {f} above max-rate {max}"))?;
    }
    Ok(())
}

fn aoi_mm_monotone() -> Outcome {
    let opts = SolveOptions::default();
    for seed in 0..20u64 {
        let mut r = rng(4200 + seed);
        let k = r.gen_range(1..=6);
        let mu = r.gen_range(0.5..=3.0);
        let problem = build_aoi_problem(&AoiScenario::new(k, mu).map_err(e)?);
        let guard = DomainGuard::new(&problem);
        let x0 = uniform_point(&mut r, &vec![0.05 * mu; k], &vec![mu; k]);
        let (_, trace) = run_mm(&guard, &x0, &opts, &NoClock).map_err(|err| format!("seed {seed} K={k} mu={mu}: {err}"))?;
        guard.verdict().map_err(|v| format!("seed {seed}: {v}"))?;
        trace_is_sound(&trace).map_err(|v| format!("seed {seed} K={k} mu={mu} from {x0:?}: {v}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- radar

/// At least two receive antennas: with a single antenna on both ends the
/// response has no angular derivative and the Fisher information is zero.
fn random_radar(r: &mut ChaCha8Rng) -> RadarScenario {
    let m = r.gen_range(2..=3);
    let n_t = (0..m).map(|_| r.gen_range(1..=3)).collect();
    let n_r = (0..m).map(|_| r.gen_range(2..=3)).collect();
    let theta = (0..m).map(|_| r.gen_range(-0.45..=0.45) * std::f64::consts::PI).collect();
    let beta = (0..m * m).map(|_| c(r.gen_range(0.2..=1.0), r.gen_range(-0.5..=0.5))).collect();
    let sigma2 = (0..m).map(|_| r.gen_range(0.1..=1.0)).collect();
    let power = (0..m).map(|_| r.gen_range(1.0..=100.0)).collect();
    RadarScenario::new(n_t, n_r, theta, beta, sigma2, power, r.gen_range(1..=2)).expect("valid random radar scenario")
}

/// Random waveforms on the power spheres.
fn random_waveforms(r: &mut ChaCha8Rng, s: &RadarScenario) -> Vec<CVector> {
    (0..s.radars())
        .map(|m| {
            let v = CVector::from_fn(s.waveform_len(m), |_, _| c(r.gen_range(-1.0..=1.0), r.gen_range(-1.0..=1.0)));
            let scale = (s.power(m).sqrt() / v.norm()) * r.gen_range(0.5..=1.0);
            v * c(scale, 0.0)
        })
        .collect()
}

fn five_radar() -> RadarScenario {
    RadarScenario::five_radar(fracprog_core::apps::dbm_to_mw(30.0), 1.0).expect("five-radar scenario")
}

fn radar_tightness() -> Outcome {
    let mut r = rng(51);
    let scenarios = [five_radar(), random_radar(&mut r), random_radar(&mut r)];
    for s in &scenarios {
        let model = RadarModel::new(s);
        for _ in 0..5 {
            let w = random_waveforms(&mut r, s);
            let aux = model.aux_at(&w).ok_or("auxiliary update failed")?;
            for m in 0..s.radars() {
                let q = model.q_plus(&aux, &w, m);
                let half_j = 0.5 * fisher_information(s, &w, m).map_err(e)?;
                ensure((q - half_j).abs() <= 1e-10 * half_j.abs(), || format!("radar {m}: Q⁺ = {q:e}, J/2 = {half_j:e}"))?;
            }
        }
    }
    Ok(())
}

fn complex_fd_check(what: &str, f: impl Fn(f64) -> CVector, analytic: &CVector, theta: f64) -> Outcome {
    let h = 1e-6 * (1.0 + theta.abs());
    let fd = (f(theta + h) - f(theta - h)) / c(2.0 * h, 0.0);
    let scale = fd.iter().fold(1f64, |m, z| m.max(z.norm_sqr().sqrt()));
    let err = (analytic - &fd).iter().fold(0f64, |m, z| m.max(z.norm_sqr().sqrt()));
    ensure(err <= 1e-5 * scale, || format!("{what} at θ={theta}: max deviation {err:e} from finite differences"))
}

fn radar_derivatives() -> Outcome {
    let mut r = rng(52);
    for _ in 0..50 {
        let n = r.gen_range(1..=8);
        let theta = r.gen_range(-1.5..=1.5);
        complex_fd_check("steering derivative", |t| steering_vector(n, t), &steering_derivative(n, theta), theta)?;
    }
    for _ in 0..5 {
        let s = random_radar(&mut r);
        // Ġ_mm against a finite difference of G_mm in its own angle
        for m in 0..s.radars() {
            let g = |t: f64| {
                let mut theta: Vec<f64> = (0..s.radars()).map(|i| s.theta(i)).collect();
                theta[m] = t;
                let sc = with_theta(&s, theta);
                let gm = response_matrix(&sc, m, m);
                CVector::from_column_slice(gm.as_slice())
            };
            let d = response_derivative(&s, m);
            complex_fd_check("response derivative", g, &CVector::from_column_slice(d.as_slice()), s.theta(m))?;
        }
        let model = RadarModel::new(&s);
        let x = model.pack(&random_waveforms(&mut r, &s));
        let mut g = vec![0.0; x.len()];
        model.neg_sum_crb(&x, Some(&mut g)).ok_or("sum-CRB undefined at random waveforms")?;
        gradient_matches(|z| model.neg_sum_crb(z, None), &x, &g, 1e-5).map_err(|v| format!("−sum-CRB gradient: {v}"))?;
        let aux = model.aux_at(&model.unpack(&model.pack(&random_waveforms(&mut r, &s)))).ok_or("aux failed")?;
        if model.subproblem(&aux, &x, &mut g).is_some() {
            gradient_matches(|z| model.subproblem(&aux, z, &mut vec![0.0; z.len()]), &x, &g, 1e-5)
                .map_err(|v| format!("subproblem gradient: {v}"))?;
        }
    }
    Ok(())
}

fn with_theta(s: &RadarScenario, theta: Vec<f64>) -> RadarScenario {
    let m = s.radars();
    RadarScenario::new(
        (0..m).map(|i| s.transmit_antennas(i)).collect(),
        (0..m).map(|i| s.receive_antennas(i)).collect(),
        theta,
        (0..m * m).map(|k| s.beta(k / m, k % m)).collect(),
        (0..m).map(|i| s.sigma2(i)).collect(),
        (0..m).map(|i| s.power(i)).collect(),
        s.snapshots(),
    )
    .expect("same scenario with new angles")
}

fn radar_schur_lift() -> Outcome {
    let s = five_radar();
    let (w, _) = radar::design_waveforms(&s, &SolveOptions::default(), &NoClock).map_err(e)?;
    let aux = RadarModel::new(&s).aux_at(&w).ok_or("aux failed at the solution")?;
    let (gap, min_eig) = schur_lift_check(&s, &w, &aux);
    let crb = radar::sum_crb(&s, &w).map_err(e)?.to_f64();
    ensure(gap <= 1e-10 * crb, || format!("lifted and direct objectives differ by {gap:e} (sum-CRB {crb:e})"))?;
    ensure(min_eig >= -1e-9, || format!("[[U, s], [sᴴ, 1]] has eigenvalue {min_eig:e}"))
}

fn radar_mm_monotone() -> Outcome {
    let opts = SolveOptions { max_outer: 60, ..SolveOptions::default() };
    for seed in 0..20u64 {
        let mut r = rng(5300 + seed);
        let s = random_radar(&mut r);
        let model = RadarModel::new(&s);
        let x0 = model.pack(&random_waveforms(&mut r, &s));
        let f0 = model.neg_sum_crb(&x0, None).ok_or_else(|| format!("seed {seed}: start outside the domain"))?;
        let problem = RadarProblem::new(model, 1.0 / f0.abs()).map_err(e)?;
        let guard = DomainGuard::new(&problem);
        let (_, trace) = run_mm(&guard, &x0, &opts, &NoClock).map_err(|err| format!("seed {seed}: {err}"))?;
        guard.verdict().map_err(|v| format!("seed {seed}: {v}"))?;
        trace_is_sound(&trace).map_err(|v| format!("seed {seed} scenario {s:?}: {v}"))?;
    }
    Ok(())
}

fn radar_five_radar_stationarity() -> Outcome {
    let s = five_radar();
    let (w, trace) = radar::design_waveforms(&s, &SolveOptions::default(), &NoClock).map_err(e)?;
    let f = trace.final_objective();
    let res = radar_stationarity(&s, &w);
    ensure(res <= 1e-5 * (1.0 + f.abs()), || format!("residual {res:e} at sum-CRB {f:e}"))?;
    let flat = radar::sum_crb(&s, &initial_waveforms(&s, 0)).map_err(e)?.to_f64();
    ensure(f < flat, || format!("final sum-CRB {f:e} not below the flat start {flat:e}"))
}

// ---------------------------------------------------------------- secure

/// Random scenario with `1 ≤ L ≤ max_l`, random `K ≤ L` and weights.
pub(crate) fn random_secure(r: &mut ChaCha8Rng, max_l: usize) -> SecureScenario {
    let l = r.gen_range(1..=max_l);
    let k = r.gen_range(0..=l);
    let h2 = (0..l * l).map(|i| if i % (l + 1) == 0 { r.gen_range(0.3..=1.0) } else { r.gen_range(0.0..=0.3) }).collect();
    let ht2 = (0..k * l).map(|i| if i % (l + 1) == 0 { r.gen_range(0.05..=0.6) } else { r.gen_range(0.0..=0.3) }).collect();
    let sigma2 = (0..l).map(|_| r.gen_range(0.05..=1.0)).collect();
    let sigma2_tilde = (0..k).map(|_| r.gen_range(0.05..=1.0)).collect();
    let w = (0..l).map(|_| r.gen_range(0.1..=2.0)).collect();
    SecureScenario::new(l, k, h2, ht2, sigma2, sigma2_tilde, r.gen_range(1.0..=20.0), w).expect("valid random scenario")
}

fn random_power(r: &mut ChaCha8Rng, s: &SecureScenario, lo_frac: f64) -> Vec<f64> {
    let l = s.links();
    uniform_point(r, &vec![lo_frac * s.p_max(); l], &vec![s.p_max(); l])
}

fn secure_rate_rewriting_identity() -> Outcome {
    let mut r = rng(61);
    for _ in 0..10_000 {
        let s = random_secure(&mut r, 5);
        let p = random_power(&mut r, &s, 0.0);
        for i in 0..s.links() {
            let a = secret_rate(&s, &p, i).map_err(e)?;
            let b = secret_rate_rewritten(&s, &p, i).map_err(e)?;
            ensure((a - b).abs() <= 1e-12 * (1.0 + a.abs()), || format!("link {i}, p={p:?}, {s:?}: {a:e} vs {b:e}"))?;
        }
    }
    Ok(())
}

fn secure_tightness_chain() -> Outcome {
    let mut r = rng(62);
    for _ in 0..500 {
        let s = random_secure(&mut r, 5);
        let p = random_power(&mut r, &s, 0.01);
        let f = weighted_sum_rate(&s, &p).map_err(e)?;
        let fr = fast_fp_objective_fr(&s, &p, &fast_fp_gamma(&s, &p)).map_err(e)?;
        ensure((fr - f).abs() <= 1e-10 * (1.0 + f.abs()), || format!("p={p:?}: f_r at γ* = {fr:e}, rate {f:e}"))?;
        let mut g = vec![0.0; p.len()];
        let fast = FastProblem::new(&s, DEFAULT_EPS);
        let gf = fast.surrogate(&fast.update_aux(&p), &p, &mut g).ok_or("fast surrogate rejected its anchor")?;
        ensure((gf - f).abs() <= 1e-10 * (1.0 + f.abs()), || format!("p={p:?}: fast surrogate {gf:e}, rate {f:e}"))?;
        let direct = DirectProblem::new(&s, DEFAULT_EPS);
        let gd = direct.surrogate(&direct.update_aux(&p), &p, &mut g).ok_or("direct surrogate rejected its anchor")?;
        ensure((gd - f).abs() <= 1e-10 * (1.0 + f.abs()), || format!("p={p:?}: direct surrogate {gd:e}, rate {f:e}"))?;
    }
    Ok(())
}

fn secure_dedicated_matches_generic() -> Outcome {
    let mut r = rng(63);
    for _ in 0..300 {
        let s = random_secure(&mut r, 5);
        let p = random_power(&mut r, &s, 0.01);
        let f = weighted_sum_rate(&s, &p).map_err(e)?;
        let mixed = mixed_objective(&secure::build_direct_problem(&s), &p).map_err(e)?;
        ensure(close(mixed, f, 1e-12), || format!("p={p:?}: generic mixed objective {mixed:e} vs {f:e}"))?;
        let lr = secure::build_log_ratio_problem(&s);
        let logr = fracprog_core::dual::log_ratio_objective(lr.terms(), &p).map_err(e)?;
        ensure(close(logr, f, 1e-12), || format!("p={p:?}: generic log-ratio objective {logr:e} vs {f:e}"))?;
        let anchor = random_power(&mut r, &s, 0.01);
        let generic = fracprog_core::scalar::mixed_surrogate(&secure::build_direct_problem(&s), &p, &anchor).map_err(e)?;
        let mut g = vec![0.0; p.len()];
        if let Some(dedicated) = direct_fp_surrogate(&s, &p, &direct_fp_aux(&s, &anchor, DEFAULT_EPS), &mut g) {
            ensure(close(dedicated, generic, 1e-9), || format!("p={p:?} anchor={anchor:?}: direct {dedicated:e} vs generic {generic:e}"))?;
        }
    }
    Ok(())
}

fn secure_gradients() -> Outcome {
    let mut r = rng(64);
    for _ in 0..100 {
        let s = random_secure(&mut r, 5);
        let p = random_power(&mut r, &s, 0.05);
        let mut g = vec![0.0; p.len()];
        weighted_sum_rate_gradient(&s, &p, &mut g);
        gradient_matches(|z| weighted_sum_rate(&s, z).ok(), &p, &g, 1e-5).map_err(|v| format!("rate gradient: {v}"))?;
        let anchor = random_power(&mut r, &s, 0.05);
        let aux = direct_fp_aux(&s, &anchor, DEFAULT_EPS);
        if direct_fp_surrogate(&s, &p, &aux, &mut g).is_some() {
            gradient_matches(|z| direct_fp_surrogate(&s, z, &aux, &mut vec![0.0; z.len()]), &p, &g, 1e-5)
                .map_err(|v| format!("direct surrogate gradient: {v}"))?;
        }
        let aux = fast_fp_aux(&s, &anchor, DEFAULT_EPS);
        if fast_fp_subproblem(&s, &p, &aux, &mut g).is_some() {
            gradient_matches(|z| fast_fp_subproblem(&s, z, &aux, &mut vec![0.0; z.len()]), &p, &g, 1e-5)
                .map_err(|v| format!("fast subproblem gradient: {v}"))?;
        }
    }
    Ok(())
}

fn secure_mm_monotone() -> Outcome {
    let opts = SolveOptions::default();
    for seed in 0..20u64 {
        let mut r = rng(6500 + seed);
        let s = random_secure(&mut r, 5);
        let x0 = random_power(&mut r, &s, 0.0);
        let direct = DirectProblem::new(&s, DEFAULT_EPS);
        let guard = DomainGuard::new(&direct);
        let (_, trace) = run_mm(&guard, &x0, &opts, &NoClock).map_err(|err| format!("seed {seed} direct: {err}"))?;
        guard.verdict().map_err(|v| format!("seed {seed} direct: {v}"))?;
        trace_is_sound(&trace).map_err(|v| format!("seed {seed} direct from {x0:?}, {s:?}: {v}"))?;
        let fast = FastProblem::new(&s, DEFAULT_EPS);
        let guard = DomainGuard::new(&fast);
        let (_, trace) = run_mm(&guard, &x0, &opts, &NoClock).map_err(|err| format!("seed {seed} fast: {err}"))?;
        guard.verdict().map_err(|v| format!("seed {seed} fast: {v}"))?;
        trace_is_sound(&trace).map_err(|v| format!("seed {seed} fast from {x0:?}, {s:?}: {v}"))?;
    }
    Ok(())
}

fn secure_two_link_oracle() -> Outcome {
    let s = SecureScenario::two_link_example();
    let opts = SolveOptions::default();
    let (_, oracle) = secure::oracle_grid_2d(&s, 0.01).map_err(e)?;
    let (_, t3) = secure::solve_direct(&s, &opts, &NoClock).map_err(e)?;
    let (_, t4) = secure::solve_fast(&s, &opts, &NoClock).map_err(e)?;
    let (f3, f4) = (t3.final_objective(), t4.final_objective());
    ensure((f3 - oracle).abs() <= 1e-3, || format!("direct {f3} vs oracle {oracle}"))?;
    ensure((f4 - oracle).abs() <= 1e-3, || format!("fast {f4} vs oracle {oracle}"))?;
    ensure((f3 - f4).abs() <= 1e-3, || format!("direct {f3} vs fast {f4}"))
}
