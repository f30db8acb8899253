//! End-to-end acceptance criteria. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use std::time::{Duration, Instant};

use fracprog::experiment::{tradeoff_rows, TradeoffRow};
use fracprog::verify::{run_suite, Suite};
use fracprog_core::apps::radar::{self, RadarScenario};
use fracprog_core::apps::secure::{self, SecureScenario};
use fracprog_core::apps::{aoi, dbm_to_mw};
use fracprog_core::solver::{NoClock, SolveOptions};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<Duration, String> {
    let el = t.elapsed();
    check(el < limit, || format!("took {el:.1?}, limit {limit:?}"))?;
    Ok(el)
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn aoi_global_optimum() -> Outcome {
    let t = Instant::now();
    let s = aoi::AoiScenario::new(3, 1.0).map_err(e)?;
    let (_, trace) = aoi::optimize_rates(&s, &SolveOptions::default(), &NoClock).map_err(e)?;
    let el = within(t, Duration::from_secs(60))?;
    let (_, oracle) = aoi::oracle_grid(&s, 0.01, 4).map_err(e)?;
    let f = trace.final_objective();
    let rel = (f - oracle).abs() / oracle;
    check(rel <= 1e-3, || format!("sum-AoI {f} vs oracle {oracle} (rel {rel:e})"))?;
    check(trace.iterations() <= 50, || format!("{} outer iterations", trace.iterations()))?;
    Ok(format!("sum-AoI {f:.6}, oracle {oracle:.6}, {} iterations, {el:.1?}", trace.iterations()))
}

fn aoi_improvement() -> Outcome {
    let t = Instant::now();
    let s = aoi::AoiScenario::new(10, 1.0).map_err(e)?;
    let (_, trace) = aoi::optimize_rates(&s, &SolveOptions::default(), &NoClock).map_err(e)?;
    let f = trace.final_objective();
    let (_, equal) = aoi::baseline_equal_rate(&s);
    let (_, max) = aoi::baseline_max_rate(&s);
    let el = within(t, Duration::from_secs(120))?;
    let vs_equal = 100.0 * (1.0 - f / equal);
    let vs_max = 100.0 * (1.0 - f / max);
    check((vs_equal - 40.0).abs() <= 5.0, || format!("{vs_equal:.2}% below equal-rate, want 40 ± 5"))?;
    check((vs_max - 70.0).abs() <= 5.0, || format!("{vs_max:.2}% below max-rate, want 70 ± 5"))?;
    Ok(format!("{vs_equal:.1}% below equal-rate, {vs_max:.1}% below max-rate, {el:.1?}"))
}

fn secure_global_optimum() -> Outcome {
    let t = Instant::now();
    let s = SecureScenario::two_link_example();
    let opts = SolveOptions::default();
    let (_, direct) = secure::solve_direct(&s, &opts, &NoClock).map_err(e)?;
    let (_, fast) = secure::solve_fast(&s, &opts, &NoClock).map_err(e)?;
    let el = within(t, Duration::from_secs(120))?;
    let (_, oracle) = secure::oracle_grid_2d(&s, 0.01).map_err(e)?;
    let (fd, ff) = (direct.final_objective(), fast.final_objective());
    check((fd - oracle).abs() <= 1e-3, || format!("direct {fd} vs oracle {oracle}"))?;
    check((ff - oracle).abs() <= 1e-3, || format!("fast {ff} vs oracle {oracle}"))?;
    let (nd, nf) = (direct.iterations_to_within(1e-6), fast.iterations_to_within(1e-6));
    check(nd <= nf, || format!("direct needs {nd} iterations to reach 1e-6, fast {nf}"))?;
    Ok(format!("oracle {oracle:.7}, direct {fd:.7} ({nd} it), fast {ff:.7} ({nf} it), {el:.1?}"))
}

/// The row whose secure-link sum is closest to `target`.
fn nearest<'a>(rows: &'a [TradeoffRow], target: f64, secure: impl Fn(&TradeoffRow) -> f64) -> &'a TradeoffRow {
    rows.iter().min_by(|a, b| (secure(a) - target).abs().total_cmp(&(secure(b) - target).abs())).expect("nonempty")
}

fn secure_tradeoff() -> Outcome {
    let t = Instant::now();
    let base = SecureScenario::five_link_example(1.0).map_err(e)?;
    let etas = secure::log_spaced(1e-3, 100.0, 21);
    let rows = tradeoff_rows(&base, &etas, &SolveOptions::default()).map_err(e)?;
    let el = within(t, Duration::from_secs(600))?;

    // solver-tolerance noise on flat stretches of the curve
    let slack = 1e-6;
    for w in rows.windows(2) {
        for (name, a0, a1, b0, b1) in [
            ("fast", w[0].fast_plain_bits, w[1].fast_plain_bits, w[0].fast_secure_bits, w[1].fast_secure_bits),
            ("direct", w[0].direct_plain_bits, w[1].direct_plain_bits, w[0].direct_secure_bits, w[1].direct_secure_bits),
        ] {
            check(a1 >= a0 - slack, || format!("{name}: R3+R4+R5 drops from {a0} to {a1} at eta {}", w[1].eta))?;
            check(b1 <= b0 + slack, || format!("{name}: R1+R2 rises from {b0} to {b1} at eta {}", w[1].eta))?;
        }
    }
    let mut gap = 0f64;
    for r in &rows {
        gap = gap.max((r.fast_secure_bits - r.direct_secure_bits).abs());
        gap = gap.max((r.fast_plain_bits - r.direct_plain_bits).abs());
        check(r.fast_objective >= r.baseline_objective && r.direct_objective >= r.baseline_objective, || {
            format!("eta {}: fast {} direct {} below baseline {}", r.eta, r.fast_objective, r.direct_objective, r.baseline_objective)
        })?;
    }
    check(gap <= 1e-2, || format!("methods differ by {gap:e} bits"))?;

    let fp = nearest(&rows, 3.4, |r| r.fast_secure_bits);
    let bl = nearest(&rows, 3.4, |r| r.baseline_secure_bits);
    check(fp.fast_plain_bits >= 2.0 * bl.baseline_plain_bits, || {
        format!(
            "near R1+R2 = 3.4: FP ({:.3}, {:.3}) vs baseline ({:.3}, {:.3})",
            fp.fast_secure_bits, fp.fast_plain_bits, bl.baseline_secure_bits, bl.baseline_plain_bits
        )
    })?;
    Ok(format!(
        "{} points, method gap {gap:.1e} bits, near R1+R2 = 3.4: FP R3+R4+R5 = {:.3} at {:.3}, baseline {:.3} at {:.3}, {el:.1?}",
        rows.len(),
        fp.fast_plain_bits,
        fp.fast_secure_bits,
        bl.baseline_plain_bits,
        bl.baseline_secure_bits
    ))
}

fn radar_reduction() -> Outcome {
    let t = Instant::now();
    let opts = SolveOptions::default();
    let s = RadarScenario::five_radar(dbm_to_mw(30.0), 1.0).map_err(e)?;
    let (w, trace) = radar::design_waveforms(&s, &opts, &NoClock).map_err(e)?;
    check(trace.is_monotone(0.0), || format!("trace not nonincreasing: {:?}", trace.objectives().collect::<Vec<_>>()))?;
    let (f0, f) = (trace.initial_objective(), trace.final_objective());
    check(f <= 0.4 * f0, || format!("final {f:e} above 40% of the start {f0:e}"))?;
    let res = radar::radar_stationarity(&s, &w);
    check(res <= 1e-5 * (1.0 + f.abs()), || format!("stationarity residual {res:e} at {f:e}"))?;

    let mut finals = Vec::new();
    for dbm in [10.0, 15.0, 20.0, 25.0, 30.0] {
        let s = RadarScenario::five_radar(dbm_to_mw(dbm), 1.0).map_err(e)?;
        let (_, tr) = radar::design_waveforms(&s, &opts, &NoClock).map_err(e)?;
        finals.push(tr.final_objective());
    }
    check(finals.windows(2).all(|w| w[1] <= w[0]), || format!("sum-CRB over 10..30 dBm not nonincreasing: {finals:?}"))?;
    let el = within(t, Duration::from_secs(900))?;
    Ok(format!("sum-CRB {f0:.4e} -> {f:.4e} ({:.1}% lower), residual {res:.1e}, {el:.1?}", 100.0 * (1.0 - f / f0)))
}

fn property_suites() -> Outcome {
    let t = Instant::now();
    let results = run_suite(Suite::All);
    let el = within(t, Duration::from_secs(300))?;
    let failed: Vec<String> = results.iter().filter(|r| !r.passed()).map(|r| r.to_string()).collect();
    check(failed.is_empty(), || failed.join("; "))?;
    Ok(format!("{} properties, {el:.1?}", results.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 6] = [
        ("aoi_global_optimum_k3", aoi_global_optimum),
        ("aoi_improvement_k10", aoi_improvement),
        ("secure_global_optimum_two_links", secure_global_optimum),
        ("secure_rate_tradeoff", secure_tradeoff),
        ("radar_crb_reduction", radar_reduction),
        ("property_suites", property_suites),
    ];
    let mut failures = 0;
    for (name, f) in criteria {
        match std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into())) {
            Ok(note) => println!("PASS {name}: {note}"),
            Err(why) => {
                failures += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
