//! TOML experiment configs.
//!
//! Powers and noise levels are given in dBm and converted to mW here; radar
//! angles are given as multiples of π. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use fracprog_core::apps::aoi::AoiScenario;
use fracprog_core::apps::dbm_to_mw;
use fracprog_core::apps::radar::RadarScenario;
use fracprog_core::apps::secure::{log_spaced, SecureScenario};
use fracprog_core::linalg::c;
use fracprog_core::solver::SolveOptions;

use crate::error::{CliError, Result};

/// Environment variable that replaces the default seed when the config has none.
pub const SEED_ENV: &str = "FRACPROG_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Aoi,
    Radar,
    Secure,
    SecureTradeoff,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Aoi => "aoi",
            ExperimentKind::Radar => "radar",
            ExperimentKind::Secure => "secure",
            ExperimentKind::SecureTradeoff => "secure-tradeoff",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Used when `--out` is not given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aoi: Option<AoiSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radar: Option<RadarSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secure: Option<SecureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// Overrides for [`SolveOptions`]; missing fields keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_inner: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub armijo_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backtrack_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_safeguard: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AoiSection {
    /// Number of sources.
    pub k: usize,
    /// Service rate (updates per unit time).
    pub mu: f64,
    /// Also run the exhaustive grid oracle (K ≤ 3 only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSection {
    pub n_t: Vec<usize>,
    pub n_r: Vec<usize>,
    /// Target angles as multiples of π.
    pub theta_pi: Vec<f64>,
    pub snapshots: usize,
    /// Per-radar power budget.
    pub power_dbm: f64,
    /// Receiver noise power, the same at every radar.
    pub noise_dbm: f64,
    /// Real part of `β`, `M×M`; all ones when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_re: Option<Vec<Vec<f64>>>,
    /// Imaginary part of `β`, `M×M`; zero when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecureSection {
    /// `|h_ij|²` between transmitter `j` and receiver `i`, `L×L`.
    pub gains: Vec<Vec<f64>>,
    /// `|h̃_kj|²` from transmitter `j` to eavesdropper `k`, `K×L`. The first
    /// `K` links are the eavesdropped ones.
    pub eve_gains: Vec<Vec<f64>>,
    pub noise_dbm: Vec<f64>,
    pub eve_noise_dbm: Vec<f64>,
    /// Per-link power cap.
    pub power_dbm: f64,
    /// Link weights; all ones when omitted. Ignored by `secure-tradeoff`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Also run the 2-D grid oracle (two links only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    /// Coarse grid step of the oracle in mW.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_step_mw: Option<f64>,
}

/// Exactly one axis must be set, matching the experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Source counts (aoi).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    /// Power budgets in dBm (radar, secure).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_dbm: Option<Vec<f64>>,
    /// Explicit weights of the plain links (secure-tradeoff).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    /// Log-spaced weights of the plain links (secure-tradeoff).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_log: Option<LogAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// The sweep axis after validation.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    Sources(Vec<usize>),
    PowerDbm(Vec<f64>),
    Eta(Vec<f64>),
}

fn bad(field: &str, msg: &str) -> CliError {
    CliError::config(format!("{field}: {msg}"))
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(field, "must be a finite number"))
    }
}

fn square(field: &str, rows: &[Vec<f64>], n: usize, cols: usize) -> Result<Vec<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != cols) {
        return Err(bad(field, &format!("must be a {n}×{cols} matrix")));
    }
    Ok(rows.iter().flatten().copied().collect())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Checks everything a run needs before any compute happens.
    pub fn validate(&self) -> Result<()> {
        let present = [
            ("aoi", self.aoi.is_some()),
            ("radar", self.radar.is_some()),
            ("secure", self.secure.is_some()),
        ];
        let wanted = match self.experiment {
            ExperimentKind::Aoi => "aoi",
            ExperimentKind::Radar => "radar",
            ExperimentKind::Secure | ExperimentKind::SecureTradeoff => "secure",
        };
        for (name, is_set) in present {
            if name == wanted && !is_set {
                return Err(bad(name, &format!("section [{name}] is required for experiment {}", self.experiment.name())));
            }
            if name != wanted && is_set {
                return Err(bad(name, &format!("section [{name}] does not apply to experiment {}", self.experiment.name())));
            }
        }
        self.solve_options(0)?;
        match self.experiment {
            ExperimentKind::Aoi => {
                let s = self.aoi_scenario()?;
                if self.aoi.as_ref().and_then(|a| a.oracle).unwrap_or(false) && s.sources() > 3 {
                    return Err(bad("aoi.oracle", "the grid oracle is limited to k ≤ 3"));
                }
            }
            ExperimentKind::Radar => {
                self.radar_scenario()?;
            }
            ExperimentKind::Secure | ExperimentKind::SecureTradeoff => {
                let s = self.secure_scenario()?;
                let sec = self.secure.as_ref().expect("checked above");
                if sec.oracle.unwrap_or(false) && s.links() != 2 {
                    return Err(bad("secure.oracle", "the grid oracle needs exactly two links"));
                }
                if let Some(step) = sec.oracle_step_mw {
                    if !(step > 0.0) || step > s.p_max() {
                        return Err(bad("secure.oracle_step_mw", "must lie in (0, P]"));
                    }
                }
            }
        }
        if self.sweep.is_some() || self.experiment == ExperimentKind::SecureTradeoff {
            self.sweep_axis()?;
        }
        Ok(())
    }

    /// Seed from the config, else from `FRACPROG_SEED`, else 0.
    pub fn resolve_seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| bad(SEED_ENV, "must be a nonnegative integer")),
            Err(_) => Ok(0),
        }
    }

    pub fn solve_options(&self, seed: u64) -> Result<SolveOptions> {
        let mut o = SolveOptions { seed, ..SolveOptions::default() };
        if let Some(s) = &self.solver {
            o.outer_tol = s.outer_tol.unwrap_or(o.outer_tol);
            o.max_outer = s.max_outer.unwrap_or(o.max_outer);
            o.inner_tol = s.inner_tol.unwrap_or(o.inner_tol);
            o.max_inner = s.max_inner.unwrap_or(o.max_inner);
            o.armijo_c = s.armijo_c.unwrap_or(o.armijo_c);
            o.backtrack_factor = s.backtrack_factor.unwrap_or(o.backtrack_factor);
            o.eps_safeguard = s.eps_safeguard.unwrap_or(o.eps_safeguard);
        }
        // the core messages start with the offending field name
        o.validate().map_err(|e| CliError::config(format!("solver.{}", e.to_string().trim_start_matches("invalid input: "))))?;
        Ok(o)
    }

    pub fn aoi_scenario(&self) -> Result<AoiScenario> {
        let a = self.aoi.as_ref().ok_or_else(|| bad("aoi", "section is missing"))?;
        self.aoi_scenario_with(a.k)
    }

    /// Same scenario with the source count replaced (sweeps).
    pub fn aoi_scenario_with(&self, k: usize) -> Result<AoiScenario> {
        let a = self.aoi.as_ref().ok_or_else(|| bad("aoi", "section is missing"))?;
        if k == 0 {
            return Err(bad("aoi.k", "must be at least 1"));
        }
        if !(a.mu > 0.0) || !a.mu.is_finite() {
            return Err(bad("aoi.mu", "must be a positive number"));
        }
        Ok(AoiScenario::new(k, a.mu)?)
    }

    pub fn radar_scenario(&self) -> Result<RadarScenario> {
        let r = self.radar.as_ref().ok_or_else(|| bad("radar", "section is missing"))?;
        self.radar_scenario_with(r.power_dbm)
    }

    pub fn radar_scenario_with(&self, power_dbm: f64) -> Result<RadarScenario> {
        let r = self.radar.as_ref().ok_or_else(|| bad("radar", "section is missing"))?;
        let m = r.n_t.len();
        if m == 0 {
            return Err(bad("radar.n_t", "needs at least one radar"));
        }
        if r.n_r.len() != m {
            return Err(bad("radar.n_r", "must have one entry per radar (same length as n_t)"));
        }
        if r.theta_pi.len() != m {
            return Err(bad("radar.theta_pi", "must have one entry per radar (same length as n_t)"));
        }
        if r.n_t.contains(&0) {
            return Err(bad("radar.n_t", "antenna counts must be at least 1"));
        }
        if r.n_r.contains(&0) {
            return Err(bad("radar.n_r", "antenna counts must be at least 1"));
        }
        if r.snapshots == 0 {
            return Err(bad("radar.snapshots", "must be at least 1"));
        }
        for t in &r.theta_pi {
            finite("radar.theta_pi", *t)?;
        }
        let power = dbm_to_mw(finite("radar.power_dbm", power_dbm)?);
        let noise = dbm_to_mw(finite("radar.noise_dbm", r.noise_dbm)?);
        let re = match &r.beta_re {
            Some(rows) => square("radar.beta_re", rows, m, m)?,
            None => vec![1.0; m * m],
        };
        let im = match &r.beta_im {
            Some(rows) => square("radar.beta_im", rows, m, m)?,
            None => vec![0.0; m * m],
        };
        for v in re.iter().chain(&im) {
            finite("radar.beta", *v)?;
        }
        let beta = re.iter().zip(&im).map(|(a, b)| c(*a, *b)).collect();
        let theta = r.theta_pi.iter().map(|t| t * std::f64::consts::PI).collect();
        Ok(RadarScenario::new(r.n_t.clone(), r.n_r.clone(), theta, beta, vec![noise; m], vec![power; m], r.snapshots)?)
    }

    pub fn secure_scenario(&self) -> Result<SecureScenario> {
        let s = self.secure.as_ref().ok_or_else(|| bad("secure", "section is missing"))?;
        self.secure_scenario_with(s.power_dbm)
    }

    pub fn secure_scenario_with(&self, power_dbm: f64) -> Result<SecureScenario> {
        let s = self.secure.as_ref().ok_or_else(|| bad("secure", "section is missing"))?;
        let l = s.gains.len();
        if l == 0 {
            return Err(bad("secure.gains", "needs at least one link"));
        }
        let k = s.eve_gains.len();
        if k > l {
            return Err(bad("secure.eve_gains", "cannot have more rows than there are links"));
        }
        let h2 = square("secure.gains", &s.gains, l, l)?;
        let ht2 = square("secure.eve_gains", &s.eve_gains, k, l)?;
        if h2.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) || (0..l).any(|i| !(h2[i * l + i] > 0.0)) {
            return Err(bad("secure.gains", "must be finite and nonnegative with a positive diagonal"));
        }
        if ht2.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) || (0..k).any(|i| !(ht2[i * l + i] > 0.0)) {
            return Err(bad("secure.eve_gains", "must be finite and nonnegative with a positive diagonal"));
        }
        if s.noise_dbm.len() != l {
            return Err(bad("secure.noise_dbm", "must have one entry per link"));
        }
        if s.eve_noise_dbm.len() != k {
            return Err(bad("secure.eve_noise_dbm", "must have one entry per eavesdropper"));
        }
        let sigma2 = s.noise_dbm.iter().map(|v| finite("secure.noise_dbm", *v).map(dbm_to_mw)).collect::<Result<Vec<_>>>()?;
        let sigma2_tilde =
            s.eve_noise_dbm.iter().map(|v| finite("secure.eve_noise_dbm", *v).map(dbm_to_mw)).collect::<Result<Vec<_>>>()?;
        let p_max = dbm_to_mw(finite("secure.power_dbm", power_dbm)?);
        let w = match &s.weights {
            Some(w) if w.len() != l => return Err(bad("secure.weights", "must have one entry per link")),
            Some(w) if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) => {
                return Err(bad("secure.weights", "must be finite and nonnegative"))
            }
            Some(w) => w.clone(),
            None => vec![1.0; l],
        };
        Ok(SecureScenario::new(l, k, h2, ht2, sigma2, sigma2_tilde, p_max, w)?)
    }

    pub fn sweep_axis(&self) -> Result<SweepAxis> {
        let s = self.sweep.as_ref().ok_or_else(|| bad("sweep", "a [sweep] section with one axis is required"))?;
        let set = [s.k.is_some(), s.power_dbm.is_some(), s.eta.is_some(), s.eta_log.is_some()];
        if set.iter().filter(|b| **b).count() != 1 {
            return Err(bad("sweep", "exactly one of k, power_dbm, eta, eta_log must be given"));
        }
        let axis = match self.experiment {
            ExperimentKind::Aoi => {
                let ks = s.k.clone().ok_or_else(|| bad("sweep.k", "an aoi sweep runs over k"))?;
                for &k in &ks {
                    self.aoi_scenario_with(k).map_err(|_| bad("sweep.k", "every entry must be at least 1"))?;
                }
                SweepAxis::Sources(ks)
            }
            ExperimentKind::Radar | ExperimentKind::Secure => {
                let ps = s.power_dbm.clone().ok_or_else(|| bad("sweep.power_dbm", "this experiment sweeps over power_dbm"))?;
                for &p in &ps {
                    finite("sweep.power_dbm", p)?;
                }
                SweepAxis::PowerDbm(ps)
            }
            ExperimentKind::SecureTradeoff => {
                let etas = match (&s.eta, &s.eta_log) {
                    (Some(e), _) => e.clone(),
                    (None, Some(ax)) => {
                        if !(ax.min > 0.0 && ax.max >= ax.min && ax.max.is_finite()) {
                            return Err(bad("sweep.eta_log", "needs 0 < min ≤ max"));
                        }
                        if ax.points == 0 {
                            return Err(bad("sweep.eta_log.points", "must be at least 1"));
                        }
                        log_spaced(ax.min, ax.max, ax.points)
                    }
                    _ => return Err(bad("sweep.eta", "a secure-tradeoff sweep runs over eta or eta_log")),
                };
                if etas.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
                    return Err(bad("sweep.eta", "weights must be finite and nonnegative"));
                }
                SweepAxis::Eta(etas)
            }
        };
        let len = match &axis {
            SweepAxis::Sources(v) => v.len(),
            SweepAxis::PowerDbm(v) | SweepAxis::Eta(v) => v.len(),
        };
        if len == 0 {
            return Err(bad("sweep", "the axis has no points"));
        }
        Ok(axis)
    }
}
