//! `run` and `sweep`: solve a configured scenario and write its data files.

use std::path::{Path, PathBuf};
use std::thread;
use std::time::Instant;

use serde::Serialize;

use fracprog_core::apps::aoi::{self, AoiScenario};
use fracprog_core::apps::nats_to_bits;
use fracprog_core::apps::radar::{self, RadarScenario};
use fracprog_core::apps::secure::{self, DirectProblem, SecureScenario, TradeoffPoint};
use fracprog_core::solver::{stationarity_residual, Clock, IterationTrace, SolveOptions, Status};

use crate::config::{ExperimentConfig, ExperimentKind, SweepAxis};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, write_baselines, write_rows, write_summary, write_trace};

/// Wall clock measured from construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock(Instant);

impl StdClock {
    pub fn start() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn elapsed_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

/// Grid step and refinement rounds of the AoI oracle.
const AOI_ORACLE_STEP: f64 = 0.01;
const AOI_ORACLE_ROUNDS: usize = 4;
const SECURE_ORACLE_STEP_DEFAULT: f64 = 0.01;
const BASELINE_GRID: usize = 2001;

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIterations => "max-iterations",
    }
}

fn check_monotone(what: &str, trace: &IterationTrace) -> Result<()> {
    if trace.is_monotone(1e-9) {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("{what}: objective trace is not monotone")))
    }
}

/// Map `f` over the points, one thread per point; results keep input order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> Result<R> + Sync) -> Result<Vec<R>> {
    thread::scope(|scope| {
        let handles: Vec<_> = items.iter().map(|it| scope.spawn(|| f(it))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    })
}

/// Files written by a run, for the caller to report.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub headline: String,
}

pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    cfg.validate()?;
    let seed = cfg.resolve_seed()?;
    let opts = cfg.solve_options(seed)?;
    ensure_dir(out)?;
    match cfg.experiment {
        ExperimentKind::Aoi => run_aoi(cfg, &opts, out),
        ExperimentKind::Radar => run_radar(cfg, &opts, out),
        ExperimentKind::Secure => run_secure(cfg, &opts, out),
        ExperimentKind::SecureTradeoff => run_sweep(cfg, out),
    }
}

// ---------------------------------------------------------------- aoi

#[derive(Debug, Serialize)]
struct AoiSummary {
    experiment: &'static str,
    seed: u64,
    k: usize,
    mu: f64,
    sum_aoi: f64,
    rates: Vec<f64>,
    iterations: usize,
    status: &'static str,
    stationarity: f64,
    baseline_equal_rate: f64,
    baseline_max_rate: f64,
    gain_vs_equal_rate_pct: f64,
    gain_vs_max_rate_pct: f64,
    oracle: Option<f64>,
    oracle_rel_gap: Option<f64>,
}

struct AoiResult {
    rates: Vec<f64>,
    trace: IterationTrace,
    stationarity: f64,
    equal: f64,
    max: f64,
}

fn solve_aoi(s: &AoiScenario, opts: &SolveOptions) -> Result<AoiResult> {
    let (rates, trace) = aoi::optimize_rates(s, opts, &StdClock::start())?;
    check_monotone("aoi", &trace)?;
    let stationarity = stationarity_residual(&aoi::build_aoi_problem(s), &rates);
    Ok(AoiResult { rates, trace, stationarity, equal: aoi::baseline_equal_rate(s).1, max: aoi::baseline_max_rate(s).1 })
}

fn gain_pct(ours: f64, baseline: f64) -> f64 {
    100.0 * (baseline - ours) / baseline
}

fn run_aoi(cfg: &ExperimentConfig, opts: &SolveOptions, out: &Path) -> Result<RunOutput> {
    let s = cfg.aoi_scenario()?;
    let r = solve_aoi(&s, opts)?;
    let f = r.trace.final_objective();
    let oracle = if cfg.aoi.as_ref().and_then(|a| a.oracle).unwrap_or(false) {
        Some(aoi::oracle_grid(&s, AOI_ORACLE_STEP * s.mu(), AOI_ORACLE_ROUNDS)?.1)
    } else {
        None
    };
    let summary = AoiSummary {
        experiment: "aoi",
        seed: opts.seed,
        k: s.sources(),
        mu: s.mu(),
        sum_aoi: f,
        rates: r.rates.clone(),
        iterations: r.trace.iterations(),
        status: status_name(r.trace.status),
        stationarity: r.stationarity,
        baseline_equal_rate: r.equal,
        baseline_max_rate: r.max,
        gain_vs_equal_rate_pct: gain_pct(f, r.equal),
        gain_vs_max_rate_pct: gain_pct(f, r.max),
        oracle,
        oracle_rel_gap: oracle.map(|o| (f - o) / o),
    };
    let files = vec![out.join("trace.csv"), out.join("summary.toml"), out.join("baselines.csv")];
    write_trace(&files[0], &r.trace)?;
    write_summary(&files[1], &summary)?;
    let mut base = vec![("fp", f), ("equal_rate", r.equal), ("max_rate", r.max)];
    if let Some(o) = oracle {
        base.push(("oracle_grid", o));
    }
    write_baselines(&files[2], &base)?;
    Ok(RunOutput { files, headline: format!("sum-AoI {f:.6} after {} iterations", r.trace.iterations()) })
}

// ---------------------------------------------------------------- radar

#[derive(Debug, Serialize)]
struct RadarSummary {
    experiment: &'static str,
    seed: u64,
    power_dbm: f64,
    initial_sum_crb: f64,
    sum_crb: f64,
    reduction_pct: f64,
    iterations: usize,
    status: &'static str,
    stationarity: f64,
    crb_per_radar: Vec<f64>,
}

struct RadarResult {
    trace: IterationTrace,
    stationarity: f64,
    crb: Vec<f64>,
}

fn solve_radar(s: &RadarScenario, opts: &SolveOptions) -> Result<RadarResult> {
    let (w, trace) = radar::design_waveforms(s, opts, &StdClock::start())?;
    check_monotone("radar", &trace)?;
    let stationarity = radar::radar_stationarity(s, &w);
    let crb = (0..s.radars()).map(|m| radar::fisher_information(s, &w, m).map(|j| 1.0 / j)).collect::<Result<_, _>>()?;
    Ok(RadarResult { trace, stationarity, crb })
}

fn run_radar(cfg: &ExperimentConfig, opts: &SolveOptions, out: &Path) -> Result<RunOutput> {
    let s = cfg.radar_scenario()?;
    let r = solve_radar(&s, opts)?;
    let (f0, f) = (r.trace.initial_objective(), r.trace.final_objective());
    let summary = RadarSummary {
        experiment: "radar",
        seed: opts.seed,
        power_dbm: cfg.radar.as_ref().map_or(f64::NAN, |x| x.power_dbm),
        initial_sum_crb: f0,
        sum_crb: f,
        reduction_pct: 100.0 * (f0 - f) / f0,
        iterations: r.trace.iterations(),
        status: status_name(r.trace.status),
        stationarity: r.stationarity,
        crb_per_radar: r.crb,
    };
    let files = vec![out.join("trace.csv"), out.join("summary.toml"), out.join("baselines.csv")];
    write_trace(&files[0], &r.trace)?;
    write_summary(&files[1], &summary)?;
    write_baselines(&files[2], &[("fp", f), ("flat_full_power", f0)])?;
    Ok(RunOutput { files, headline: format!("sum-CRB {f0:.6e} -> {f:.6e} after {} iterations", r.trace.iterations()) })
}

// ---------------------------------------------------------------- secure

#[derive(Debug, Serialize)]
struct SecureSummary {
    experiment: &'static str,
    seed: u64,
    power_dbm: f64,
    direct_nats: f64,
    direct_bits: f64,
    direct_power_mw: Vec<f64>,
    direct_iterations: usize,
    direct_iterations_to_1e6: usize,
    direct_stationarity: f64,
    fast_nats: f64,
    fast_bits: f64,
    fast_power_mw: Vec<f64>,
    fast_iterations: usize,
    fast_iterations_to_1e6: usize,
    fast_stationarity: f64,
    baseline_nats: f64,
    baseline_bits: f64,
    oracle_nats: Option<f64>,
    oracle_bits: Option<f64>,
}

struct SecureResult {
    direct: (Vec<f64>, IterationTrace),
    fast: (Vec<f64>, IterationTrace),
    direct_stat: f64,
    fast_stat: f64,
    baseline: f64,
}

fn solve_secure(s: &SecureScenario, opts: &SolveOptions) -> Result<SecureResult> {
    let direct = secure::solve_direct(s, opts, &StdClock::start())?;
    let fast = secure::solve_fast(s, opts, &StdClock::start())?;
    check_monotone("secure (direct)", &direct.1)?;
    check_monotone("secure (fast)", &fast.1)?;
    let problem = DirectProblem::new(s, opts.eps_safeguard);
    let direct_stat = stationarity_residual(&problem, &direct.0);
    let fast_stat = stationarity_residual(&problem, &fast.0);
    let baseline = secure::baseline_max_power_linear_search(s, BASELINE_GRID)?.1;
    Ok(SecureResult { direct, fast, direct_stat, fast_stat, baseline })
}

fn run_secure(cfg: &ExperimentConfig, opts: &SolveOptions, out: &Path) -> Result<RunOutput> {
    let s = cfg.secure_scenario()?;
    let sec = cfg.secure.as_ref().expect("validated");
    let r = solve_secure(&s, opts)?;
    let oracle = if sec.oracle.unwrap_or(false) {
        Some(secure::oracle_grid_2d(&s, sec.oracle_step_mw.unwrap_or(SECURE_ORACLE_STEP_DEFAULT))?.1)
    } else {
        None
    };
    let (fd, ff) = (r.direct.1.final_objective(), r.fast.1.final_objective());
    let summary = SecureSummary {
        experiment: "secure",
        seed: opts.seed,
        power_dbm: sec.power_dbm,
        direct_nats: fd,
        direct_bits: nats_to_bits(fd),
        direct_power_mw: r.direct.0.clone(),
        direct_iterations: r.direct.1.iterations(),
        direct_iterations_to_1e6: r.direct.1.iterations_to_within(1e-6),
        direct_stationarity: r.direct_stat,
        fast_nats: ff,
        fast_bits: nats_to_bits(ff),
        fast_power_mw: r.fast.0.clone(),
        fast_iterations: r.fast.1.iterations(),
        fast_iterations_to_1e6: r.fast.1.iterations_to_within(1e-6),
        fast_stationarity: r.fast_stat,
        baseline_nats: r.baseline,
        baseline_bits: nats_to_bits(r.baseline),
        oracle_nats: oracle,
        oracle_bits: oracle.map(nats_to_bits),
    };
    let files = vec![out.join("trace.csv"), out.join("trace_fast.csv"), out.join("summary.toml"), out.join("baselines.csv")];
    write_trace(&files[0], &r.direct.1)?;
    write_trace(&files[1], &r.fast.1)?;
    write_summary(&files[2], &summary)?;
    let mut base = vec![("fp_direct", fd), ("fp_fast", ff), ("max_power_linear_search", r.baseline)];
    if let Some(o) = oracle {
        base.push(("oracle_grid", o));
    }
    write_baselines(&files[3], &base)?;
    Ok(RunOutput { files, headline: format!("weighted rate {fd:.6} nats (direct), {ff:.6} nats (fast)") })
}

// ---------------------------------------------------------------- sweeps

#[derive(Debug, Serialize)]
struct AoiSweepRow {
    k: usize,
    sum_aoi: f64,
    baseline_equal_rate: f64,
    baseline_max_rate: f64,
    gain_vs_equal_rate_pct: f64,
    gain_vs_max_rate_pct: f64,
    iterations: usize,
    stationarity: f64,
}

#[derive(Debug, Serialize)]
struct RadarSweepRow {
    power_dbm: f64,
    initial_sum_crb: f64,
    sum_crb: f64,
    reduction_pct: f64,
    iterations: usize,
    stationarity: f64,
}

#[derive(Debug, Serialize)]
struct SecureSweepRow {
    power_dbm: f64,
    direct_nats: f64,
    fast_nats: f64,
    baseline_nats: f64,
    direct_iterations: usize,
    fast_iterations: usize,
}

/// One row of the rate tradeoff curve; rates in bits/s/Hz, objectives in nats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub eta: f64,
    pub fast_secure_bits: f64,
    pub fast_plain_bits: f64,
    pub fast_objective: f64,
    pub direct_secure_bits: f64,
    pub direct_plain_bits: f64,
    pub direct_objective: f64,
    pub baseline_secure_bits: f64,
    pub baseline_plain_bits: f64,
    pub baseline_objective: f64,
}

impl From<&TradeoffPoint> for TradeoffRow {
    fn from(p: &TradeoffPoint) -> Self {
        TradeoffRow {
            eta: p.eta,
            fast_secure_bits: p.fast.secure_bits,
            fast_plain_bits: p.fast.plain_bits,
            fast_objective: p.fast.objective,
            direct_secure_bits: p.direct.secure_bits,
            direct_plain_bits: p.direct.plain_bits,
            direct_objective: p.direct.objective,
            baseline_secure_bits: p.baseline.secure_bits,
            baseline_plain_bits: p.baseline.plain_bits,
            baseline_objective: p.baseline.objective,
        }
    }
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    experiment: &'static str,
    seed: u64,
    points: usize,
}

#[derive(Debug, Serialize)]
struct TradeoffSummary {
    experiment: &'static str,
    seed: u64,
    points: usize,
    plain_rate_nondecreasing: bool,
    secure_rate_nonincreasing: bool,
    max_method_gap_bits: f64,
    fp_dominates_baseline: bool,
}

/// Whole tradeoff curve, one thread per weight.
pub fn tradeoff_rows(base: &SecureScenario, etas: &[f64], opts: &SolveOptions) -> Result<Vec<TradeoffRow>> {
    par_map(etas, |&eta| {
        let pts = secure::tradeoff_sweep(base, &[eta], opts, &StdClock::start())?;
        Ok(TradeoffRow::from(&pts[0]))
    })
}

pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutput> {
    cfg.validate()?;
    let seed = cfg.resolve_seed()?;
    let opts = cfg.solve_options(seed)?;
    let axis = cfg.sweep_axis()?;
    ensure_dir(out)?;
    let sweep_path = out.join("sweep.csv");
    let summary_path = out.join("summary.toml");
    let experiment = cfg.experiment.name();
    let points = match (&axis, cfg.experiment) {
        (SweepAxis::Sources(ks), ExperimentKind::Aoi) => {
            let rows = par_map(ks, |&k| {
                let s = cfg.aoi_scenario_with(k)?;
                let r = solve_aoi(&s, &opts)?;
                let f = r.trace.final_objective();
                Ok(AoiSweepRow {
                    k,
                    sum_aoi: f,
                    baseline_equal_rate: r.equal,
                    baseline_max_rate: r.max,
                    gain_vs_equal_rate_pct: gain_pct(f, r.equal),
                    gain_vs_max_rate_pct: gain_pct(f, r.max),
                    iterations: r.trace.iterations(),
                    stationarity: r.stationarity,
                })
            })?;
            write_rows(&sweep_path, &rows)?;
            rows.len()
        }
        (SweepAxis::PowerDbm(ps), ExperimentKind::Radar) => {
            let rows = par_map(ps, |&p| {
                let s = cfg.radar_scenario_with(p)?;
                let r = solve_radar(&s, &opts)?;
                let (f0, f) = (r.trace.initial_objective(), r.trace.final_objective());
                Ok(RadarSweepRow {
                    power_dbm: p,
                    initial_sum_crb: f0,
                    sum_crb: f,
                    reduction_pct: 100.0 * (f0 - f) / f0,
                    iterations: r.trace.iterations(),
                    stationarity: r.stationarity,
                })
            })?;
            write_rows(&sweep_path, &rows)?;
            rows.len()
        }
        (SweepAxis::PowerDbm(ps), ExperimentKind::Secure) => {
            let rows = par_map(ps, |&p| {
                let s = cfg.secure_scenario_with(p)?;
                let r = solve_secure(&s, &opts)?;
                Ok(SecureSweepRow {
                    power_dbm: p,
                    direct_nats: r.direct.1.final_objective(),
                    fast_nats: r.fast.1.final_objective(),
                    baseline_nats: r.baseline,
                    direct_iterations: r.direct.1.iterations(),
                    fast_iterations: r.fast.1.iterations(),
                })
            })?;
            write_rows(&sweep_path, &rows)?;
            rows.len()
        }
        (SweepAxis::Eta(etas), ExperimentKind::SecureTradeoff) => {
            let base = cfg.secure_scenario()?;
            let rows = tradeoff_rows(&base, etas, &opts)?;
            write_rows(&sweep_path, &rows)?;
            let summary = TradeoffSummary {
                experiment,
                seed,
                points: rows.len(),
                plain_rate_nondecreasing: rows.windows(2).all(|w| w[1].fast_plain_bits >= w[0].fast_plain_bits - 1e-6),
                secure_rate_nonincreasing: rows.windows(2).all(|w| w[1].fast_secure_bits <= w[0].fast_secure_bits + 1e-6),
                max_method_gap_bits: rows
                    .iter()
                    .map(|r| {
                        (r.fast_secure_bits - r.direct_secure_bits).abs().max((r.fast_plain_bits - r.direct_plain_bits).abs())
                    })
                    .fold(0.0, f64::max),
                fp_dominates_baseline: rows
                    .iter()
                    .all(|r| r.fast_objective.min(r.direct_objective) >= r.baseline_objective - 1e-9),
            };
            write_summary(&summary_path, &summary)?;
            return Ok(RunOutput {
                files: vec![sweep_path, summary_path],
                headline: format!("{} tradeoff points", rows.len()),
            });
        }
        _ => return Err(CliError::config("sweep: axis does not match the experiment")),
    };
    write_summary(&summary_path, &SweepSummary { experiment, seed, points })?;
    Ok(RunOutput { files: vec![sweep_path, summary_path], headline: format!("{points} sweep points") })
}
