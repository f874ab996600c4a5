//! Reliability of compiled circuits under independent per-instruction errors.
//!
//! A trial executes the instruction stream until the first failure. PST is the
//! fraction of trials with no failure. MIBF counts instructions completed before
//! the first failure, with error-free completions restarting the program and
//! accumulating; the failing instruction itself is not counted.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::compiler::{PhysicalCircuit, PhysicalOp};
use crate::device::CalibrationSnapshot;

/// Program repetitions allowed per trial while waiting for a failure.
pub const MAX_REPETITIONS: u64 = 10_000;

/// PST below this marks a program as non-terminating.
pub const NON_TERMINATING_PST: f64 = 0.001;

/// Trials per aggregation chunk. Fixed so results do not depend on worker count.
const CHUNK: u64 = 4096;

/// Resolves per-instruction failure probabilities from a snapshot.
#[derive(Debug, Clone, Copy)]
pub struct ErrorModel<'a> {
    snapshot: &'a CalibrationSnapshot,
    pub include_readout_errors: bool,
}

impl<'a> ErrorModel<'a> {
    pub fn new(snapshot: &'a CalibrationSnapshot) -> Self {
        Self { snapshot, include_readout_errors: true }
    }

    pub fn with_readout(mut self, include: bool) -> Self {
        self.include_readout_errors = include;
        self
    }

    pub fn snapshot(&self) -> &CalibrationSnapshot {
        self.snapshot
    }

    pub fn failure_prob(&self, op: &PhysicalOp) -> f64 {
        match op {
            PhysicalOp::Cnot { control, target } => self
                .snapshot
                .link_between(*control, *target)
                .map(|l| l.two_qubit_error)
                .unwrap_or_else(|| panic!("CNOT {control}->{target} is not on a link of this snapshot")),
            PhysicalOp::OneQubit { qubit, .. } => self.snapshot.qubit(*qubit).single_qubit_error,
            PhysicalOp::Measure { qubit, .. } if self.include_readout_errors => self.snapshot.qubit(*qubit).readout_error,
            PhysicalOp::Measure { .. } => 0.0,
        }
    }

    pub fn failure_probs(&self, physical: &PhysicalCircuit) -> Vec<f64> {
        physical.instructions().iter().map(|i| self.failure_prob(&i.op)).collect()
    }
}

/// Mean instructions before failure; infinite when nothing can fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mibf {
    Finite(f64),
    Infinite,
}

impl Mibf {
    pub fn value(self) -> f64 {
        match self {
            Mibf::Finite(v) => v,
            Mibf::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Mibf::Infinite)
    }
}

impl fmt::Display for Mibf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mibf::Finite(v) => write!(f, "{v}"),
            Mibf::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Mibf {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Mibf::Finite(v) => s.serialize_f64(*v),
            Mibf::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricClass {
    Terminating,
    NonTerminating,
}

impl MetricClass {
    pub fn name(self) -> &'static str {
        match self {
            MetricClass::Terminating => "terminating",
            MetricClass::NonTerminating => "non_terminating",
        }
    }
}

pub fn classify_pst(pst: f64) -> MetricClass {
    if pst < NON_TERMINATING_PST {
        MetricClass::NonTerminating
    } else {
        MetricClass::Terminating
    }
}

pub fn classify_metric(stats: &TrialStats) -> MetricClass {
    classify_pst(stats.pst)
}

pub fn pst_from_probs(probs: &[f64]) -> f64 {
    probs.iter().fold(1.0, |acc, e| acc * (1.0 - e))
}

/// Closed-form MIBF for failure probabilities in execution order.
pub fn mibf_from_probs(probs: &[f64]) -> Mibf {
    let mut prefix = 1.0;
    let mut numerator = 0.0;
    for (k, e) in probs.iter().enumerate() {
        numerator += prefix * e * k as f64;
        prefix *= 1.0 - e;
    }
    let whole = prefix;
    if whole >= 1.0 {
        return Mibf::Infinite;
    }
    numerator += whole * probs.len() as f64;
    Mibf::Finite(numerator / (1.0 - whole))
}

pub fn analytic_pst(physical: &PhysicalCircuit, model: &ErrorModel<'_>) -> f64 {
    pst_from_probs(&model.failure_probs(physical))
}

pub fn analytic_mibf(physical: &PhysicalCircuit, model: &ErrorModel<'_>) -> Mibf {
    mibf_from_probs(&model.failure_probs(physical))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Run the restart phase that estimates MIBF.
    pub estimate_mibf: bool,
}

impl MonteCarloConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self { trials, seed, workers: None, estimate_mibf: true }
    }

    pub fn workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn pst_only(mut self) -> Self {
        self.estimate_mibf = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialStats {
    pub trials: u64,
    pub successes: u64,
    pub pst: f64,
    /// Half-width of the Wilson 95% interval.
    pub pst_ci95: f64,
    pub pst_ci_low: f64,
    pub pst_ci_high: f64,
    pub mibf: Mibf,
    /// MIBF fell back to the closed form because a trial hit the repetition cap.
    pub mibf_from_analytic: bool,
    pub metric_class: MetricClass,
    pub seed: u64,
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(0.975);
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    successes: u64,
    ibf_sum: u128,
    capped: bool,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally { successes: self.successes + other.successes, ibf_sum: self.ibf_sum + other.ibf_sum, capped: self.capped || other.capped }
    }
}

/// Failure thresholds on the full `u64` range: instruction fails iff a draw is below.
fn thresholds(probs: &[f64]) -> Vec<u64> {
    const SCALE: f64 = 18_446_744_073_709_551_616.0;
    probs.iter().map(|&e| if e <= 0.0 { 0 } else { (e * SCALE).min(u64::MAX as f64) as u64 }).collect()
}

/// Index of the first failing instruction in one pass, if any.
fn run_once(rng: &mut ChaCha8Rng, thresholds: &[u64]) -> Option<usize> {
    thresholds.iter().position(|&t| rng.next_u64() < t)
}

fn run_trial(seed: u64, trial: u64, thresholds: &[u64], estimate_mibf: bool) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let len = thresholds.len() as u128;
    let mut tally = Tally::default();
    match run_once(&mut rng, thresholds) {
        Some(k) => tally.ibf_sum = k as u128,
        None => {
            tally.successes = 1;
            if estimate_mibf {
                let mut completed: u128 = 1;
                loop {
                    if completed as u64 >= MAX_REPETITIONS {
                        tally.capped = true;
                        break;
                    }
                    match run_once(&mut rng, thresholds) {
                        Some(k) => {
                            tally.ibf_sum = completed * len + k as u128;
                            break;
                        }
                        None => completed += 1,
                    }
                }
            }
        }
    }
    tally
}

/// Seeded Monte Carlo estimate of PST and MIBF. Trial `t` draws from stream `t`
/// of a generator keyed by the seed, so results are identical for any worker count.
pub fn monte_carlo(physical: &PhysicalCircuit, model: &ErrorModel<'_>, config: MonteCarloConfig) -> TrialStats {
    monte_carlo_probs(&model.failure_probs(physical), config)
}

pub fn monte_carlo_probs(probs: &[f64], config: MonteCarloConfig) -> TrialStats {
    assert!(config.trials >= 1, "at least one trial is required");
    let thresholds = thresholds(probs);
    let chunks = config.trials.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let end = ((c + 1) * CHUNK).min(config.trials);
                (c * CHUNK..end).map(|t| run_trial(config.seed, t, &thresholds, config.estimate_mibf)).fold(Tally::default(), Tally::merge)
            })
            .reduce(Tally::default, Tally::merge)
    };
    let tally = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build().expect("thread pool").install(work),
        None => work(),
    };

    let pst = tally.successes as f64 / config.trials as f64;
    let (low, high) = wilson_interval(tally.successes, config.trials);
    let analytic = mibf_from_probs(probs);
    let (mibf, from_analytic) = if analytic.is_infinite() {
        (Mibf::Infinite, false)
    } else if !config.estimate_mibf || tally.capped {
        (analytic, true)
    } else {
        (Mibf::Finite(tally.ibf_sum as f64 / config.trials as f64), false)
    };
    TrialStats {
        trials: config.trials,
        successes: tally.successes,
        pst,
        pst_ci95: (high - low) / 2.0,
        pst_ci_low: low,
        pst_ci_high: high,
        mibf,
        mibf_from_analytic: from_analytic,
        metric_class: classify_pst(pst),
        seed: config.seed,
    }
}
