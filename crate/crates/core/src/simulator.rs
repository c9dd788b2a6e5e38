//! Slot-level Monte Carlo simulation of one scheduled user.
//!
//! Each slot one packet arrives and a unit-mean exponential fading value is
//! drawn. The scheduler picks a target state from the threshold table; a
//! transmission is acknowledged with probability `1 - nu_d`. A failed or
//! skipped slot moves the chain forward and, from states `p >= B`, drops one
//! packet.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ExpFading, SimRng, SystemConfig};
use crate::error::{invalid, Result};
use crate::fsmc::{ChainSolution, QosSpec, ThresholdTable};

/// Number of batches used for the standard errors of the slot averages.
pub const BATCHES: usize = 100;

/// Fixed-width histogram with an overflow bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges; the last bin extends to infinity.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(upper: f64, bins: usize) -> Self {
        let width = upper / (bins - 1) as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| i as f64 * width).collect();
        edges.push(f64::INFINITY);
        Self {
            edges,
            counts: vec![0; bins],
        }
    }

    fn add(&mut self, y: f64, weight: u64) {
        let bins = self.counts.len();
        let i = self.edges[..bins].partition_point(|e| *e <= y).saturating_sub(1);
        self.counts[i] += weight;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Standard errors of the slot averages, estimated by batch means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub pi: Vec<f64>,
    pub theta_r: f64,
    pub gamma: f64,
    pub batches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub slots: u64,
    pub empirical_pi: Vec<f64>,
    /// Drop transitions per slot.
    pub empirical_theta_r: f64,
    /// Slots in state `M` that end in a further drop, per slot.
    pub empirical_gamma: f64,
    /// `burst_histogram[n]`: completed runs of exactly `n` successive drops.
    pub burst_histogram: Vec<u64>,
    /// Fading of transmitted packets, one count per packet.
    pub vu_fading_histogram: Histogram,
    /// Packets scheduled.
    pub packets: u64,
    /// Landing states of heterogeneous burst starts out of `B`.
    pub jump_counts: Vec<u64>,
    /// Energy per bit from the empirical VU gain distribution.
    pub energy_estimate: f64,
    pub errors: StandardErrors,
}

impl SimReport {
    pub fn longest_burst(&self) -> usize {
        self.burst_histogram.iter().rposition(|c| *c > 0).unwrap_or(0)
    }
}

/// Simulation knobs that do not change the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub histogram_bins: usize,
    pub histogram_upper: f64,
    /// Keep the VU gains for the energy estimate.
    pub estimate_energy: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            histogram_bins: 50,
            histogram_upper: 8.0,
            estimate_energy: true,
        }
    }
}

pub fn simulate(
    thresholds: &ThresholdTable,
    spec: &QosSpec,
    config: &SystemConfig,
    slots: u64,
    rng: &mut SimRng,
) -> Result<SimReport> {
    simulate_with(thresholds, spec, config, slots, &SimOptions::default(), rng)
}

pub fn simulate_with(
    thresholds: &ThresholdTable,
    spec: &QosSpec,
    config: &SystemConfig,
    slots: u64,
    options: &SimOptions,
    rng: &mut SimRng,
) -> Result<SimReport> {
    spec.validate()?;
    config.validate()?;
    if slots == 0 {
        return Err(invalid("slots", "must be at least one"));
    }
    let n = spec.num_states();
    if thresholds.kappa.len() != n
        || thresholds
            .kappa
            .iter()
            .enumerate()
            .any(|(p, row)| row.len() != spec.buffered(p) + 1)
    {
        return Err(crate::error::Error::Shape("thresholds do not match the spec".into()));
    }
    if options.histogram_bins < 2 || !(options.histogram_upper > 0.0) {
        return Err(invalid("histogram", "needs at least two bins and a positive range"));
    }

    let b = spec.buffer;
    let m = spec.max_state();
    let nu_s = spec.nu_s();
    let pathloss = config.pathloss();
    let zeta_cdf: Option<Vec<f64>> = spec.ccon_distribution.as_ref().map(|z| {
        z.iter()
            .scan(0.0, |acc, v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    });

    let batches = (slots as usize).min(BATCHES);
    let batch_len = slots / batches as u64;
    let mut occupancy = vec![0u64; n];
    let mut batch_occ = vec![vec![0u64; n]; batches];
    let mut batch_drops = vec![0u64; batches];
    let mut batch_viol = vec![0u64; batches];
    let mut batch_slots = vec![0u64; batches];
    let mut drops = 0u64;
    let mut violations = 0u64;
    let mut bursts = vec![0u64; m + 2];
    let mut run = 0usize;
    let mut jumps = vec![0u64; n];
    let mut hist = Histogram::new(options.histogram_upper, options.histogram_bins);
    let mut packets = 0u64;
    let mut gains = Vec::new();

    let mut p = 0usize;
    for t in 0..slots {
        let k = ((t / batch_len.max(1)) as usize).min(batches - 1);
        batch_slots[k] += 1;
        occupancy[p] += 1;
        batch_occ[k][p] += 1;
        let f = ExpFading.sample(rng);
        let target = thresholds.kappa[p].iter().position(|&kq| f > kq);
        let acked = match target {
            Some(q) => {
                let count = (p.min(b) - q + 1) as u64;
                packets += count;
                hist.add(f, count);
                if options.estimate_energy {
                    for _ in 0..count {
                        gains.push(pathloss.sample(rng) * f);
                    }
                }
                if rng.random::<f64>() < nu_s {
                    Some(q)
                } else {
                    None
                }
            }
            None => None,
        };
        p = match acked {
            Some(q) => {
                if run > 0 {
                    bursts[run.min(m + 1)] += 1;
                }
                run = 0;
                q
            }
            None => {
                if p >= b {
                    drops += 1;
                    batch_drops[k] += 1;
                    run += 1;
                    if p == m {
                        violations += 1;
                        batch_viol[k] += 1;
                    }
                }
                match (&zeta_cdf, p == b) {
                    (Some(cdf), true) => {
                        let u = rng.random::<f64>();
                        let class = cdf.iter().position(|c| u < *c).unwrap_or(cdf.len() - 1);
                        let next = b + 1 + (spec.ccon - (class + 1));
                        jumps[next] += 1;
                        next
                    }
                    _ => (p + 1).min(m),
                }
            }
        };
    }
    if run > 0 {
        bursts[run.min(m + 1)] += 1;
    }

    let total = slots as f64;
    let empirical_pi: Vec<f64> = occupancy.iter().map(|c| *c as f64 / total).collect();
    let errors = StandardErrors {
        pi: (0..n)
            .map(|s| batch_error(batch_occ.iter().map(|o| o[s]), &batch_slots))
            .collect(),
        theta_r: batch_error(batch_drops.iter().copied(), &batch_slots),
        gamma: batch_error(batch_viol.iter().copied(), &batch_slots),
        batches,
    };
    let energy_estimate = if gains.is_empty() {
        f64::INFINITY
    } else {
        empirical_energy(&mut gains, config.spectral_efficiency)
    };
    Ok(SimReport {
        slots,
        empirical_pi,
        empirical_theta_r: drops as f64 / total,
        empirical_gamma: violations as f64 / total,
        burst_histogram: bursts,
        vu_fading_histogram: hist,
        packets,
        jump_counts: jumps,
        energy_estimate,
        errors,
    })
}

/// Standard error of a ratio of batch totals via batch means.
fn batch_error(counts: impl Iterator<Item = u64>, slots: &[u64]) -> f64 {
    let means: Vec<f64> = counts
        .zip(slots)
        .map(|(c, s)| c as f64 / (*s).max(1) as f64)
        .collect();
    let k = means.len();
    if k < 2 {
        return f64::NAN;
    }
    let mean = means.iter().sum::<f64>() / k as f64;
    let var = means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (var / k as f64).sqrt()
}

/// `ln2 * int_0^1 2^(C u) / x(u) du` with `x(u)` the empirical quantile,
/// evaluated by the midpoint rule over the sorted sample.
pub fn empirical_energy(gains: &mut [f64], spectral_efficiency: f64) -> f64 {
    gains.sort_by(f64::total_cmp);
    let n = gains.len() as f64;
    let sum: f64 = gains
        .iter()
        .enumerate()
        .map(|(i, x)| (spectral_efficiency * (i as f64 + 0.5) / n).exp2() / x)
        .sum();
    std::f64::consts::LN_2 * sum / n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Pass,
    Fail,
    /// Too few slots to estimate the sampling error.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCheck {
    pub metric: String,
    pub empirical: f64,
    pub analytic: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub checks: Vec<MetricCheck>,
    /// Metrics outside the band.
    pub failures: Vec<String>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.kind == VerdictKind::Pass
    }
}

/// Fewest batches with which a verdict is reported.
const MIN_BATCHES: usize = 20;
/// Fewest slots per batch.
const MIN_BATCH_LEN: u64 = 1000;

/// Compares a simulation with the analytic chain solution using per-metric
/// z-scores at `confidence` standard deviations.
///
/// The standard error is the batch-means estimate, floored at the i.i.d.
/// binomial error of the analytic value so that rarely visited states are
/// not judged on an empty sample.
pub fn validate_against_chain(sim: &SimReport, solution: &ChainSolution, confidence: f64) -> Verdict {
    let n = sim.slots as f64;
    let mut checks = Vec::new();
    let mut push = |metric: String, empirical: f64, analytic: f64, se: f64| {
        let floor = (analytic * (1.0 - analytic) / n).max(0.0).sqrt();
        let se = if se.is_nan() { floor } else { se.max(floor) };
        let diff = (empirical - analytic).abs();
        let z = if diff <= 1e-12 {
            0.0
        } else if se > 0.0 {
            diff / se
        } else {
            f64::INFINITY
        };
        checks.push(MetricCheck {
            metric,
            empirical,
            analytic,
            z,
        });
    };
    for (s, (&e, &a)) in sim.empirical_pi.iter().zip(&solution.pi).enumerate() {
        push(format!("pi[{s}]"), e, a, sim.errors.pi[s]);
    }
    push("theta_r".into(), sim.empirical_theta_r, solution.theta_r, sim.errors.theta_r);
    push("gamma".into(), sim.empirical_gamma, solution.gamma, sim.errors.gamma);

    let failures: Vec<String> = checks
        .iter()
        .filter(|c| c.z > confidence)
        .map(|c| c.metric.clone())
        .collect();
    let enough = sim.errors.batches >= MIN_BATCHES && sim.slots / sim.errors.batches as u64 >= MIN_BATCH_LEN;
    let kind = if sim.empirical_pi.len() != solution.pi.len() {
        VerdictKind::Fail
    } else if !enough {
        VerdictKind::Inconclusive
    } else if failures.is_empty() {
        VerdictKind::Pass
    } else {
        VerdictKind::Fail
    };
    Verdict { kind, checks, failures }
}
