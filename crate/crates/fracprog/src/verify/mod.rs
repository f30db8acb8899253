//! Property suites behind `fracprog verify`.
//!
//! Every check draws its inputs from a fixed-seed generator and reports the
//! first counterexample it finds.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fracprog_core::solver::{central_difference, FeasibleSet, IterationTrace, MmProblem};

mod apps;
mod core_suite;
mod lagrangian;
mod matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Core,
    Matrix,
    Lagrangian,
    Apps,
    All,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "core" => Ok(Suite::Core),
            "matrix" => Ok(Suite::Matrix),
            "lagrangian" => Ok(Suite::Lagrangian),
            "apps" => Ok(Suite::Apps),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite `{other}` (expected core, matrix, lagrangian, apps or all)")),
        }
    }
}

/// Outcome of one property; `Err` carries the counterexample.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub outcome: Result<(), String>,
    pub millis: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Ok(()) => write!(f, "PASS {}::{} ({:.0} ms)", self.suite, self.name, self.millis),
            Err(cx) => write!(f, "FAIL {}::{}: {}", self.suite, self.name, cx),
        }
    }
}

pub(crate) type Outcome = Result<(), String>;
pub(crate) type CheckFn = fn() -> Outcome;

fn run_checks(suite: &'static str, checks: &[(&'static str, CheckFn)], report: &mut dyn FnMut(&CheckResult)) -> Vec<CheckResult> {
    checks
        .iter()
        .map(|&(name, f)| {
            let t = Instant::now();
            let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
            let r = CheckResult { suite, name, outcome, millis: t.elapsed().as_secs_f64() * 1e3 };
            report(&r);
            r
        })
        .collect()
}

/// Run a suite, calling `report` as each property finishes.
pub fn run_suite_with(suite: Suite, report: &mut dyn FnMut(&CheckResult)) -> Vec<CheckResult> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Core | Suite::All) {
        out.extend(run_checks("core", core_suite::CHECKS, report));
    }
    if matches!(suite, Suite::Matrix | Suite::All) {
        out.extend(run_checks("matrix", matrix::CHECKS, report));
    }
    if matches!(suite, Suite::Lagrangian | Suite::All) {
        out.extend(run_checks("lagrangian", lagrangian::CHECKS, report));
    }
    if matches!(suite, Suite::Apps | Suite::All) {
        out.extend(run_checks("apps", apps::CHECKS, report));
    }
    out
}

pub fn run_suite(suite: Suite) -> Vec<CheckResult> {
    run_suite_with(suite, &mut |_| {})
}

// ---------------------------------------------------------------- helpers

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `|a − b| ≤ tol·max(1, |a|, |b|)`
pub(crate) fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Analytic gradient against central differences: every component within
/// `rel·max(1, ‖fd‖∞)`.
pub(crate) fn gradient_matches<F>(f: F, x: &[f64], analytic: &[f64], rel: f64) -> Outcome
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let mut fd = vec![0.0; x.len()];
    if !central_difference(&f, x, &mut fd) {
        return Err(format!("finite differences left the domain at x={x:?}"));
    }
    let scale = fd.iter().fold(1f64, |m, v| m.max(v.abs()));
    for (i, (a, n)) in analytic.iter().zip(&fd).enumerate() {
        if (a - n).abs() > rel * scale {
            return Err(format!("component {i}: analytic {a:e} vs finite-difference {n:e} at x={x:?}"));
        }
    }
    Ok(())
}

pub(crate) fn uniform_point(r: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(l, h)| r.gen_range(*l..=*h)).collect()
}

/// Trace checks shared by every MM run: monotone up to `1e-9·(1+|f|)`, the
/// surrogate tight at each anchor, and a nonnegative subproblem gain.
pub(crate) fn trace_is_sound(trace: &IterationTrace) -> Outcome {
    ensure(trace.is_monotone(1e-9), || {
        let obj: Vec<f64> = trace.objectives().collect();
        format!("objective trace not monotone: {obj:?}")
    })?;
    for r in trace.records.iter().skip(1) {
        let prev = trace.records[r.outer_index - 1].objective;
        if r.surrogate_gap.abs() > 1e-9 * (1.0 + prev.abs()) {
            return Err(format!("surrogate gap {:e} at the anchor of iteration {}", r.surrogate_gap, r.outer_index));
        }
        if r.surrogate_gain < 0.0 {
            return Err(format!("subproblem decreased the surrogate by {:e} at iteration {}", r.surrogate_gain, r.outer_index));
        }
    }
    Ok(())
}

/// Wraps a problem and records any accepted iterate outside the open domain.
pub(crate) struct DomainGuard<'a, P: MmProblem> {
    pub inner: &'a P,
    pub violation: Cell<Option<String>>,
}

impl<'a, P: MmProblem> DomainGuard<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        DomainGuard { inner, violation: Cell::new(None) }
    }

    pub fn verdict(&self) -> Outcome {
        match self.violation.take() {
            Some(v) => Err(v),
            None => Ok(()),
        }
    }
}

impl<P: MmProblem> MmProblem for DomainGuard<'_, P> {
    type Aux = P::Aux;

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn feasible(&self) -> &dyn FeasibleSet {
        self.inner.feasible()
    }

    // run_mm only evaluates the true objective at the start and at accepted iterates
    fn objective(&self, x: &[f64]) -> Option<f64> {
        let fs = self.inner.feasible();
        let mut p = x.to_vec();
        fs.project(&mut p);
        let outside = p.iter().zip(x).any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()));
        if outside || !fs.in_domain(x) {
            let prev = self.violation.take();
            self.violation.set(prev.or_else(|| Some(format!("accepted iterate outside the domain: {x:?}"))));
        }
        self.inner.objective(x)
    }

    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]) -> bool {
        self.inner.objective_gradient(x, grad)
    }

    fn update_aux(&self, x: &[f64]) -> Self::Aux {
        self.inner.update_aux(x)
    }

    fn surrogate(&self, aux: &Self::Aux, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        self.inner.surrogate(aux, x, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert_eq!("lagrangian".parse::<Suite>().unwrap(), Suite::Lagrangian);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn gradient_check_catches_wrong_gradient() {
        let f = |x: &[f64]| Some(x[0] * x[0] + 3.0 * x[1]);
        assert!(gradient_matches(f, &[1.0, 2.0], &[2.0, 3.0], 1e-5).is_ok());
        assert!(gradient_matches(f, &[1.0, 2.0], &[2.1, 3.0], 1e-5).is_err());
    }

    #[test]
    fn failing_check_reports_counterexample() {
        fn bad() -> Outcome {
            ensure(1.0 > 2.0, || "x=1 y=2".into())
        }
        fn boom() -> Outcome {
            panic!("kaput")
        }
        let r = run_checks("t", &[("bad", bad), ("boom", boom)], &mut |_| {});
        assert!(r[0].to_string().starts_with("FAIL t::bad: x=1 y=2"));
        assert!(r[1].to_string().contains("kaput"));
    }
}
