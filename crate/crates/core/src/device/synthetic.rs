//! Synthetic calibration data.
//!
//! Each qubit metric and each link gets a persistent mean drawn once from a
//! truncated normal whose *truncated* moments match the requested mean and
//! standard deviation. Every day then multiplies that mean by a mean-one
//! log-normal factor, so strong links stay strong while still moving from day
//! to day. `jitter_fraction` is the share of the pooled variance that comes from
//! the day-to-day factor rather than from link-to-link spread.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::{CalibrationSeries, CalibrationSnapshot, CouplingLink, DeviceError, QubitCalibration, QubitId, Topology};

/// Target distribution of one calibration metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub mean: f64,
    pub std: f64,
    /// Inclusive lower bound.
    pub lower: f64,
    /// Exclusive upper bound.
    pub upper: f64,
}

impl MetricParams {
    pub const fn new(mean: f64, std: f64, lower: f64, upper: f64) -> Self {
        Self { mean, std, lower, upper }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub t1_us: MetricParams,
    pub t2_us: MetricParams,
    pub single_qubit_error: MetricParams,
    pub readout_error: MetricParams,
    pub two_qubit_error: MetricParams,
    pub jitter_fraction: f64,
}

impl GeneratorParams {
    /// Statistics observed on IBM-Q20. Coherence and two-qubit numbers are the
    /// measured ones; single-qubit and readout errors only have their order of
    /// magnitude pinned down.
    pub fn ibm_q20() -> Self {
        Self {
            t1_us: MetricParams::new(80.32, 35.23, 5.0, 1000.0),
            t2_us: MetricParams::new(42.13, 13.34, 5.0, 500.0),
            single_qubit_error: MetricParams::new(0.004, 0.003, 0.0, 0.05),
            readout_error: MetricParams::new(0.06, 0.03, 0.0, 0.5),
            two_qubit_error: MetricParams::new(0.043, 0.0302, 0.0, 0.5),
            jitter_fraction: 0.2,
        }
    }

    /// Every metric collapses to its mean.
    pub fn zero_variance(mut self) -> Self {
        for m in [&mut self.t1_us, &mut self.t2_us, &mut self.single_qubit_error, &mut self.readout_error, &mut self.two_qubit_error] {
            m.std = 0.0;
        }
        self
    }
}

/// Normal distribution restricted to `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormal {
    mu: f64,
    sigma: f64,
    lower: f64,
    upper: f64,
}

fn truncated_moments(mu: f64, sigma: f64, lower: f64, upper: f64) -> (f64, f64) {
    let std = Normal::standard();
    let alpha = (lower - mu) / sigma;
    let beta = (upper - mu) / sigma;
    let z = std.cdf(beta) - std.cdf(alpha);
    let (pa, pb) = (std.pdf(alpha), std.pdf(beta));
    let apa = if alpha.is_finite() { alpha * pa } else { 0.0 };
    let bpb = if beta.is_finite() { beta * pb } else { 0.0 };
    let shift = (pa - pb) / z;
    let mean = mu + sigma * shift;
    let var = sigma * sigma * (1.0 + (apa - bpb) / z - shift * shift);
    (mean, var.max(0.0).sqrt())
}

impl TruncatedNormal {
    /// Underlying (untruncated) parameters given directly.
    pub fn new(mu: f64, sigma: f64, lower: f64, upper: f64) -> Self {
        Self { mu, sigma, lower, upper }
    }

    /// Find underlying parameters whose truncation to `[lower, upper)` has the
    /// requested mean and standard deviation.
    pub fn with_moments(mean: f64, std: f64, lower: f64, upper: f64) -> Result<Self, String> {
        if !(lower <= mean && mean < upper) {
            return Err(format!("mean {mean} outside [{lower}, {upper})"));
        }
        if std == 0.0 {
            return Ok(Self { mu: mean, sigma: 0.0, lower, upper });
        }
        let (mut mu, mut sigma) = (mean, std);
        for _ in 0..2000 {
            let (m, s) = truncated_moments(mu, sigma, lower, upper);
            if !(m.is_finite() && s > 0.0) {
                break;
            }
            if (m - mean).abs() < 1e-12 * mean.abs().max(1e-300) && (s - std).abs() < 1e-12 * std {
                return Ok(Self { mu, sigma, lower, upper });
            }
            mu += mean - m;
            sigma *= std / s;
        }
        let (m, s) = truncated_moments(mu, sigma, lower, upper);
        if (m - mean).abs() <= 1e-6 * mean.abs().max(1e-12) && (s - std).abs() <= 1e-6 * std {
            Ok(Self { mu, sigma, lower, upper })
        } else {
            Err(format!("no truncated normal on [{lower}, {upper}) has mean {mean} and std {std}"))
        }
    }

    pub fn mean(&self) -> f64 {
        if self.sigma == 0.0 {
            self.mu
        } else {
            truncated_moments(self.mu, self.sigma, self.lower, self.upper).0
        }
    }

    pub fn std(&self) -> f64 {
        if self.sigma == 0.0 {
            0.0
        } else {
            truncated_moments(self.mu, self.sigma, self.lower, self.upper).1
        }
    }

    /// Inverse-CDF sampling; one uniform draw per sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return self.mu.clamp(self.lower, prev_below(self.upper));
        }
        let n = Normal::new(self.mu, self.sigma).expect("sigma is positive");
        let lo = n.cdf(self.lower);
        let hi = n.cdf(self.upper);
        let u: f64 = rng.random();
        let x = n.inverse_cdf(lo + u * (hi - lo));
        x.clamp(self.lower, prev_below(self.upper))
    }
}

fn prev_below(x: f64) -> f64 {
    if x.is_finite() {
        f64::from_bits(x.to_bits() - 1)
    } else {
        f64::MAX
    }
}

/// Standard deviation of the mean-one log-normal day factor for a metric.
fn jitter_sigma(m: &MetricParams, jitter_fraction: f64) -> f64 {
    let var = m.std * m.std;
    if var == 0.0 || jitter_fraction <= 0.0 {
        return 0.0;
    }
    let persistent_var = (1.0 - jitter_fraction) * var;
    (1.0 + jitter_fraction * var / (persistent_var + m.mean * m.mean)).ln().sqrt()
}

fn persistent_sampler(m: &MetricParams, jitter_fraction: f64) -> Result<TruncatedNormal, DeviceError> {
    let std = m.std * (1.0 - jitter_fraction.clamp(0.0, 1.0)).sqrt();
    TruncatedNormal::with_moments(m.mean, std, m.lower, m.upper).map_err(DeviceError::Generator)
}

/// One draw of per-qubit and per-link persistent means.
pub fn persistent_snapshot(topology: &Topology, params: &GeneratorParams, seed: u64) -> Result<CalibrationSnapshot, DeviceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = params.jitter_fraction;
    let t1 = persistent_sampler(&params.t1_us, f)?;
    let t2 = persistent_sampler(&params.t2_us, f)?;
    let sq = persistent_sampler(&params.single_qubit_error, f)?;
    let ro = persistent_sampler(&params.readout_error, f)?;
    let tq = persistent_sampler(&params.two_qubit_error, f)?;
    let qubits = (0..topology.num_qubits)
        .map(|_| {
            let sq = sq.sample(&mut rng);
            let ro = ro.sample(&mut rng);
            let t1 = t1.sample(&mut rng);
            let t2 = t2.sample(&mut rng);
            QubitCalibration::new(sq, ro, t1, t2)
        })
        .collect();
    let links = topology.edges.iter().map(|&(u, v)| CouplingLink::new(u, v, tq.sample(&mut rng))).collect();
    CalibrationSnapshot::new("synthetic", "persistent", qubits, links)
}

fn jitter<R: Rng + ?Sized>(rng: &mut R, base: f64, sigma: f64, m: &MetricParams) -> f64 {
    if sigma == 0.0 {
        return base;
    }
    for _ in 0..16 {
        let z: f64 = rng.sample(StandardNormal);
        let v = base * (sigma * z - 0.5 * sigma * sigma).exp();
        if v >= m.lower && v < m.upper {
            return v;
        }
    }
    base.clamp(m.lower, prev_below(m.upper))
}

/// Daily snapshots around the per-element means of `base`.
pub fn jitter_series(
    base: &CalibrationSnapshot,
    params: &GeneratorParams,
    days: usize,
    seed: u64,
) -> Result<CalibrationSeries, DeviceError> {
    let f = params.jitter_fraction;
    let s_t1 = jitter_sigma(&params.t1_us, f);
    let s_t2 = jitter_sigma(&params.t2_us, f);
    let s_sq = jitter_sigma(&params.single_qubit_error, f);
    let s_ro = jitter_sigma(&params.readout_error, f);
    let s_tq = jitter_sigma(&params.two_qubit_error, f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut snapshots = Vec::with_capacity(days);
    for day in 0..days {
        let qubits = base
            .qubits()
            .iter()
            .map(|q| {
                let sq = jitter(&mut rng, q.single_qubit_error, s_sq, &params.single_qubit_error);
                let ro = jitter(&mut rng, q.readout_error, s_ro, &params.readout_error);
                let t1 = jitter(&mut rng, q.t1_us, s_t1, &params.t1_us);
                let t2 = jitter(&mut rng, q.t2_us, s_t2, &params.t2_us);
                QubitCalibration::new(sq, ro, t1, t2)
            })
            .collect();
        let links = base
            .links()
            .iter()
            .map(|l| {
                let (a, b) = l.endpoints();
                CouplingLink::new(a, b, jitter(&mut rng, l.two_qubit_error, s_tq, &params.two_qubit_error))
            })
            .collect();
        snapshots.push(CalibrationSnapshot::new(base.name(), format!("day-{:02}", day + 1), qubits, links)?);
    }
    CalibrationSeries::new(snapshots)
}

/// Jittered daily snapshots in which the `link` error ramps linearly from its
/// value in `base` on the first day to `final_error` on the last.
pub fn degrading_link_series(
    base: &CalibrationSnapshot,
    params: &GeneratorParams,
    days: usize,
    seed: u64,
    link: (usize, usize),
    final_error: f64,
) -> Result<CalibrationSeries, DeviceError> {
    let (a, b) = (QubitId(link.0), QubitId(link.1));
    let start = base
        .link_between(a, b)
        .ok_or_else(|| DeviceError::Generator(format!("no link between {} and {}", link.0, link.1)))?
        .two_qubit_error;
    let series = jitter_series(base, params, days, seed)?;
    let steps = days.saturating_sub(1).max(1) as f64;
    let snapshots = series
        .snapshots()
        .iter()
        .enumerate()
        .map(|(day, s)| s.with_link_error(a, b, start + (final_error - start) * day as f64 / steps))
        .collect::<Result<Vec<_>, _>>()?;
    CalibrationSeries::new(snapshots)
}

/// Persistent means followed by `days` jittered daily snapshots. Deterministic in `seed`.
pub fn generate_synthetic_series(
    topology: &Topology,
    params: &GeneratorParams,
    days: usize,
    seed: u64,
) -> Result<CalibrationSeries, DeviceError> {
    let base = persistent_snapshot(topology, params, seed)?;
    jitter_series(&base, params, days, seed)
}

/// Seed of the bundled IBM-Q20-style snapshot.
pub const REFERENCE_SEED: u64 = 2018;

/// IBM-Q20-topology snapshot with the published extremes pinned: the Q14-Q18
/// link is the unique worst at 0.15, Q0-Q1 sits at 0.04 and the best links are
/// at 0.02. Every other value is synthetic.
pub fn ibm_q20_reference_snapshot(seed: u64) -> Result<CalibrationSnapshot, DeviceError> {
    let params = GeneratorParams { jitter_fraction: 0.0, ..GeneratorParams::ibm_q20() };
    let base = persistent_snapshot(&Topology::ibm_q20(), &params, seed)?;
    let mut links: Vec<CouplingLink> = base
        .links()
        .iter()
        .map(|l| {
            let (a, b) = l.endpoints();
            CouplingLink::new(a, b, l.two_qubit_error.clamp(0.02, 0.145))
        })
        .collect();
    for link in &mut links {
        match link.endpoints() {
            (QubitId(14), QubitId(18)) => link.two_qubit_error = 0.15,
            (QubitId(0), QubitId(1)) => link.two_qubit_error = 0.04,
            _ => {}
        }
    }
    if !links.iter().any(|l| l.two_qubit_error == 0.02) {
        let best = links
            .iter_mut()
            .filter(|l| l.endpoints() != (QubitId(0), QubitId(1)))
            .min_by(|x, y| x.two_qubit_error.total_cmp(&y.two_qubit_error))
            .expect("device has links");
        best.two_qubit_error = 0.02;
    }
    CalibrationSnapshot::new("ibmq20-synthetic", "reference", base.qubits().to_vec(), links)
}
