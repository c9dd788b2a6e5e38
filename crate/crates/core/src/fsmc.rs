//! Finite-state Markov chain of the opportunistic scheduler.
//!
//! A state `p` in `0..=M` (with `M = B + N`) is the sum of the number of
//! buffered packets `min(p, B)` and the number of packets dropped in
//! succession `max(0, p - B)`. In every slot one packet arrives; the
//! scheduler either transmits `L` of the `min(p, B) + 1` available packets
//! and moves to a state `q <= min(p, B)`, or transmits nothing and moves
//! forward to `p + 1` (saturating at `M`). A failed transmission (NACK, with
//! probability `nu_d`) behaves like a slot in which nothing was scheduled.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::ExpFading;
use crate::error::{invalid, Error, Result};

const ROW_TOL: f64 = 1e-12;

/// Design parameters of the scheduler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QosSpec {
    /// Buffer size `B`.
    pub buffer: usize,
    /// Continuity constraint `N`: packets that may be dropped in a row.
    /// In the heterogeneous case this is the largest per-user value.
    pub ccon: usize,
    /// Optional population mix over per-user CCON values. Entry `a - 1` is
    /// the fraction of users with `N_a = a`; its length must equal `ccon`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccon_distribution: Option<Vec<f64>>,
    /// Target average drop rate.
    pub theta_tar: f64,
    /// Bound on the CCON-violation probability; `None` leaves it free.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Probability that a scheduled transmission fails.
    pub nu_d: f64,
}

impl QosSpec {
    pub fn homogeneous(buffer: usize, ccon: usize, theta_tar: f64, epsilon: Option<f64>, nu_d: f64) -> Self {
        Self {
            buffer,
            ccon,
            ccon_distribution: None,
            theta_tar,
            epsilon,
            nu_d,
        }
    }

    /// Heterogeneous population; `zeta[a - 1]` is the share of users with
    /// CCON parameter `a`.
    pub fn heterogeneous(buffer: usize, zeta: Vec<f64>, theta_tar: f64, epsilon: Option<f64>, nu_d: f64) -> Self {
        Self {
            buffer,
            ccon: zeta.len(),
            ccon_distribution: Some(zeta),
            theta_tar,
            epsilon,
            nu_d,
        }
    }

    /// Largest state index `M = B + N`.
    pub fn max_state(&self) -> usize {
        self.buffer + self.ccon
    }

    pub fn num_states(&self) -> usize {
        self.max_state() + 1
    }

    pub fn nu_s(&self) -> f64 {
        1.0 - self.nu_d
    }

    /// `min(p, B)`: buffered packets in state `p`.
    pub fn buffered(&self, p: usize) -> usize {
        p.min(self.buffer)
    }

    pub fn with_epsilon(&self, epsilon: Option<f64>) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_buffer(&self, buffer: usize) -> Self {
        Self {
            buffer,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ccon == 0 {
            return Err(invalid("ccon", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.theta_tar) {
            return Err(invalid("theta_tar", "must be a probability"));
        }
        if !(0.0..1.0).contains(&self.nu_d) {
            return Err(invalid("nu_d", "must lie in [0, 1)"));
        }
        if let Some(eps) = self.epsilon {
            if !(0.0..=self.theta_tar).contains(&eps) {
                return Err(invalid("epsilon", "must lie in [0, theta_tar]"));
            }
        }
        if let Some(zeta) = &self.ccon_distribution {
            if zeta.len() != self.ccon {
                return Err(invalid(
                    "ccon_distribution",
                    format!("has {} entries but ccon = {}", zeta.len(), self.ccon),
                ));
            }
            if zeta.iter().any(|z| !(0.0..=1.0).contains(z)) {
                return Err(invalid("ccon_distribution", "entries must be probabilities"));
            }
            let total: f64 = zeta.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(invalid("ccon_distribution", format!("sums to {total}, not 1")));
            }
        }
        Ok(())
    }
}

/// Scheduling probabilities together with the full transition matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    buffer: usize,
    ccon: usize,
    nu_d: f64,
    zeta: Option<Vec<f64>>,
    /// `sched[p][q]`: probability of scheduling down to state `q` from `p`.
    sched: Vec<Vec<f64>>,
    /// Probability of scheduling nothing in state `p`.
    no_sched: Vec<f64>,
    /// Row-major `(M + 1) x (M + 1)` transition matrix.
    matrix: Vec<f64>,
}

fn check_rows(rows: &[Vec<f64>], spec: &QosSpec) -> Result<Vec<f64>> {
    let n = spec.num_states();
    if rows.len() != n {
        return Err(Error::Shape(format!("expected {n} rows, got {}", rows.len())));
    }
    let mut no_sched = Vec::with_capacity(n);
    for (p, row) in rows.iter().enumerate() {
        let want = spec.buffered(p) + 1;
        if row.len() != want {
            return Err(Error::Shape(format!("row {p} has {} entries, expected {want}", row.len())));
        }
        for &a in row {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::ProbabilityRange { row: p, value: a });
            }
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 + ROW_TOL {
            return Err(Error::RowSum { row: p, sum });
        }
        no_sched.push((1.0 - sum).max(0.0));
    }
    Ok(no_sched)
}

/// Builds the homogeneous-CCON policy from the scheduling rows.
pub fn build_policy(rows: Vec<Vec<f64>>, spec: &QosSpec) -> Result<Policy> {
    spec.validate()?;
    let no_sched = check_rows(&rows, spec)?;
    let n = spec.num_states();
    let m = spec.max_state();
    let nu_s = spec.nu_s();
    let mut matrix = vec![0.0; n * n];
    for p in 0..n {
        let row = &rows[p];
        for (q, &a) in row.iter().enumerate() {
            matrix[p * n + q] = nu_s * a;
        }
        let sent: f64 = row.iter().sum();
        let forward = (p + 1).min(m);
        matrix[p * n + forward] += no_sched[p] + spec.nu_d * sent;
    }
    Ok(Policy {
        buffer: spec.buffer,
        ccon: spec.ccon,
        nu_d: spec.nu_d,
        zeta: None,
        sched: rows,
        no_sched,
        matrix,
    })
}

/// Builds the system-level chain for a heterogeneous CCON population.
///
/// Rows other than `B` are as in the homogeneous chain. The drop mass
/// `d_B = 1 - nu_s * sum_q sched[B][q]` leaving state `B` is split by user
/// class: a user with CCON `N_a` jumps to `B + 1 + (N - N_a)`.
pub fn build_heterogeneous_policy(rows: Vec<Vec<f64>>, spec: &QosSpec) -> Result<Policy> {
    let zeta = spec
        .ccon_distribution
        .clone()
        .ok_or_else(|| invalid("ccon_distribution", "required for a heterogeneous chain"))?;
    let mut policy = build_policy(rows, spec)?;
    let n = spec.num_states();
    let b = spec.buffer;
    let nn = spec.ccon;
    let d_b = 1.0 - spec.nu_s() * policy.sched[b].iter().sum::<f64>();
    for q in b + 1..n {
        policy.matrix[b * n + q] = 0.0;
    }
    for (a_minus_1, &z) in zeta.iter().enumerate() {
        let target = b + 1 + (nn - (a_minus_1 + 1));
        policy.matrix[b * n + target] += z * d_b;
    }
    policy.zeta = Some(zeta);
    Ok(policy)
}

/// Dispatches on whether the spec carries a CCON distribution.
pub fn policy_for(rows: Vec<Vec<f64>>, spec: &QosSpec) -> Result<Policy> {
    if spec.ccon_distribution.is_some() {
        build_heterogeneous_policy(rows, spec)
    } else {
        build_policy(rows, spec)
    }
}

impl Policy {
    pub fn buffer(&self) -> usize {
        self.buffer
    }

    pub fn ccon(&self) -> usize {
        self.ccon
    }

    pub fn nu_d(&self) -> f64 {
        self.nu_d
    }

    pub fn nu_s(&self) -> f64 {
        1.0 - self.nu_d
    }

    pub fn zeta(&self) -> Option<&[f64]> {
        self.zeta.as_deref()
    }

    pub fn is_heterogeneous(&self) -> bool {
        self.zeta.is_some()
    }

    pub fn max_state(&self) -> usize {
        self.buffer + self.ccon
    }

    pub fn num_states(&self) -> usize {
        self.max_state() + 1
    }

    pub fn sched_rows(&self) -> &[Vec<f64>] {
        &self.sched
    }

    pub fn sched_row(&self, p: usize) -> &[f64] {
        &self.sched[p]
    }

    pub fn no_sched(&self, p: usize) -> f64 {
        self.no_sched[p]
    }

    /// Probability that state `p` ends the slot without an acknowledged
    /// transmission, `1 - nu_s * sum_q sched[p][q]`.
    pub fn miss_probability(&self, p: usize) -> f64 {
        1.0 - self.nu_s() * self.sched[p].iter().sum::<f64>()
    }

    /// Transition probability `Q[p][q]`.
    pub fn q(&self, p: usize, q: usize) -> f64 {
        self.matrix[p * self.num_states() + q]
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.num_states();
        DMatrix::from_row_slice(n, n, &self.matrix)
    }

    /// Scheduled-only part `Q_s` of the transition matrix.
    pub fn scheduled_part(&self) -> DMatrix<f64> {
        let n = self.num_states();
        let m = self.max_state();
        DMatrix::from_fn(n, n, |p, q| {
            if q < self.sched[p].len() {
                self.nu_s() * self.sched[p][q]
            } else if q == (p + 1).min(m) {
                self.no_sched[p]
            } else {
                0.0
            }
        })
    }

    /// Failed-transmission part `Q_c` (homogeneous chains).
    pub fn failure_part(&self) -> DMatrix<f64> {
        let n = self.num_states();
        let m = self.max_state();
        DMatrix::from_fn(n, n, |p, q| {
            if q == (p + 1).min(m) {
                self.nu_d * self.sched[p].iter().sum::<f64>()
            } else {
                0.0
            }
        })
    }

    pub fn max_row_error(&self) -> f64 {
        let n = self.num_states();
        (0..n)
            .map(|p| (self.matrix[p * n..(p + 1) * n].iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Descending fading thresholds per state; `kappa[p][q]` is the smallest
/// fading for which state `p` schedules down to `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub kappa: Vec<Vec<f64>>,
}

impl ThresholdTable {
    /// Lowest threshold of state `p`: below it nothing is scheduled.
    pub fn lowest(&self, p: usize) -> f64 {
        *self.kappa[p].last().expect("rows are nonempty")
    }
}

/// Maps scheduling probabilities to fading thresholds under exponential
/// fading. A row whose cumulative mass reaches exactly one gets a zero
/// lowest threshold; a zero prefix maps to `f64::INFINITY`.
pub fn thresholds_from_policy(policy: &Policy, fading: &ExpFading) -> ThresholdTable {
    thresholds_from_rows(policy.sched_rows(), fading)
}

pub fn thresholds_from_rows(rows: &[Vec<f64>], fading: &ExpFading) -> ThresholdTable {
    let kappa = rows
        .iter()
        .map(|row| {
            let mut cum = 0.0;
            row.iter()
                .map(|&a| {
                    cum += a;
                    if cum >= 1.0 - ROW_TOL {
                        0.0
                    } else {
                        fading.survival_quantile(cum)
                    }
                })
                .collect()
        })
        .collect();
    ThresholdTable { kappa }
}

/// Inverse of [`thresholds_from_policy`].
pub fn policy_from_thresholds(table: &ThresholdTable, fading: &ExpFading) -> Result<Vec<Vec<f64>>> {
    table
        .kappa
        .iter()
        .enumerate()
        .map(|(p, row)| {
            let mut prev = 0.0;
            let mut upper = f64::INFINITY;
            row.iter()
                .map(|&k| {
                    if k.is_nan() || k < 0.0 || k > upper {
                        return Err(invalid("kappa", format!("row {p} is not nonincreasing and nonnegative")));
                    }
                    upper = k;
                    let cum = fading.survival(k);
                    let a = cum - prev;
                    prev = cum;
                    Ok(a)
                })
                .collect()
        })
        .collect()
}

/// Number of packets scheduled in state `p` with fading `f`: find the
/// first `q` with `f > kappa[p][q]` and return `min(p, B) - q + 1`, or zero
/// if `f` does not clear the lowest threshold.
pub fn scheduled_count(p: usize, f: f64, table: &ThresholdTable, buffer: usize) -> usize {
    let mu = p.min(buffer);
    match table.kappa[p].iter().position(|&k| f > k) {
        Some(q) => mu - q + 1,
        None => 0,
    }
}

/// Target state chosen by the scheduler, `None` if nothing is scheduled.
pub fn scheduled_target(p: usize, f: f64, table: &ThresholdTable) -> Option<usize> {
    table.kappa[p].iter().position(|&k| f > k)
}

/// Steady-state distribution with drop metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSolution {
    pub pi: Vec<f64>,
    pub theta_r: f64,
    pub gamma: f64,
}

/// Solves `pi Q = pi`, `sum pi = 1` by a dense LU solve in which the last
/// balance equation is replaced with the normalisation.
pub fn steady_state(policy: &Policy) -> Result<Vec<f64>> {
    let n = policy.num_states();
    if policy.max_row_error() > ROW_TOL {
        return Err(invalid("policy", "transition matrix is not row-stochastic"));
    }
    let q = policy.matrix();
    let mut a = q.transpose() - DMatrix::<f64>::identity(n, n);
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let lu = a.lu();
    let pi = lu.solve(&rhs).ok_or(Error::Reducible)?;
    if pi.iter().any(|v| !v.is_finite() || *v < -1e-10) {
        return Err(Error::Reducible);
    }
    let mut pi: Vec<f64> = pi.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    let residual = (0..n)
        .map(|j| ((0..n).map(|i| pi[i] * q[(i, j)]).sum::<f64>() - pi[j]).abs())
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(Error::Reducible);
    }
    Ok(pi)
}

/// Average drop rate as the miss mass of states `B..=M`.
pub fn drop_rate(policy: &Policy, pi: &[f64]) -> f64 {
    let theta: f64 = (policy.buffer()..=policy.max_state())
        .map(|p| policy.miss_probability(p) * pi[p])
        .sum();
    debug_assert!((theta - drop_rate_transitions(policy, pi)).abs() < 1e-12);
    theta
}

/// Average drop rate counted over drop transitions: forward moves out of
/// `B..M`, the self-loop at `M`, and for heterogeneous chains the burst
/// jumps out of `B` that skip ahead.
pub fn drop_rate_transitions(policy: &Policy, pi: &[f64]) -> f64 {
    let b = policy.buffer();
    let m = policy.max_state();
    let mut theta: f64 = (b..m).map(|p| policy.q(p, p + 1) * pi[p]).sum();
    theta += policy.q(m, m) * pi[m];
    if policy.is_heterogeneous() {
        theta += pi[b] * (b + 2..=m).map(|q| policy.q(b, q)).sum::<f64>();
    }
    theta
}

/// Probability of a slot that drops a packet after `N` successive drops.
pub fn ccon_violation(policy: &Policy, pi: &[f64]) -> f64 {
    let m = policy.max_state();
    policy.miss_probability(m) * pi[m]
}

pub fn solve_chain(policy: &Policy) -> Result<ChainSolution> {
    let pi = steady_state(policy)?;
    let theta_r = drop_rate(policy, &pi);
    let gamma = ccon_violation(policy, &pi);
    Ok(ChainSolution { pi, theta_r, gamma })
}
