//! Constrained threshold optimisation by simulated annealing.
//!
//! Candidates are scheduling-probability rows. A candidate is feasible when
//! its chain has a steady state, its drop rate is at most `theta_tar` and,
//! when constrained, its CCON-violation probability is at most `epsilon`.
//! Only feasible candidates have their energy evaluated. Worse candidates
//! replace the current state with probability `exp(-(E_new - E_cur) / T)`
//! under the fast-annealing schedule `T_b = T0 / (c_sa * b + 1)`; the best
//! feasible candidate ever seen is returned.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::{rng_from_seed, split_rng, ExpFading, SimRng, SystemConfig};
use crate::energy::{energy_cst, to_db, VuChannel, VuDistribution};
use crate::error::Result;
use crate::fsmc::{policy_for, solve_chain, thresholds_from_rows, ChainSolution, Policy, QosSpec};

/// Slack applied to the drop-rate and violation constraints.
pub const CONSTRAINT_SLACK: f64 = 1e-12;

/// Fast-annealing cooling schedule and move parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealSchedule {
    /// Initial temperature; calibrated from sampled energy differences when
    /// absent.
    pub t0: Option<f64>,
    /// Cooling constant; calibrated when absent.
    pub c_sa: Option<f64>,
    pub temp_steps: usize,
    /// Candidates per temperature; `50 (M + 1)` when absent.
    pub configs_per_temp: Option<usize>,
    /// Stop once the temperature falls below this value.
    pub t_min: Option<f64>,
    /// Log-space step size of neighbourhood moves at `T0`.
    pub step_initial: f64,
    /// Step size floor reached as the temperature falls.
    pub step_final: f64,
    /// Probability that a candidate is drawn afresh instead of as a
    /// neighbour of the current state.
    pub restart_probability: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            t0: None,
            c_sa: None,
            temp_steps: 100,
            configs_per_temp: None,
            t_min: None,
            step_initial: 1.0,
            step_final: 0.02,
            restart_probability: 0.05,
        }
    }
}

impl AnnealSchedule {
    /// A reduced schedule for quick runs.
    pub fn quick(temp_steps: usize, configs_per_temp: usize) -> Self {
        Self {
            temp_steps,
            configs_per_temp: Some(configs_per_temp),
            ..Self::default()
        }
    }

    pub fn configs_for(&self, spec: &QosSpec) -> usize {
        self.configs_per_temp.unwrap_or(50 * spec.num_states())
    }
}

/// `T0 / (c_sa * b + 1)`.
pub fn fa_temperature(t0: f64, c_sa: f64, b: usize) -> f64 {
    t0 / (c_sa * b as f64 + 1.0)
}

/// Draws rows uniformly from the simplex: row `p` gets `min(p, B) + 2`
/// unit exponentials, normalised, with the last coordinate taken as the
/// no-schedule mass.
pub fn random_candidate<R: Rng + ?Sized>(spec: &QosSpec, rng: &mut R) -> Vec<Vec<f64>> {
    (0..spec.num_states())
        .map(|p| {
            let len = spec.buffered(p) + 2;
            let draws: Vec<f64> = (0..len).map(|_| rng.sample(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            draws[..len - 1].iter().map(|d| d / total).collect()
        })
        .collect()
}

/// Multiplicative log-space perturbation of every row, renormalised on the
/// simplex (including the no-schedule coordinate).
pub fn neighbour_candidate<R: Rng + ?Sized>(rows: &[Vec<f64>], step: f64, rng: &mut R) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|row| {
            let rest = (1.0 - row.iter().sum::<f64>()).max(0.0);
            let coords: Vec<f64> = row
                .iter()
                .copied()
                .chain(std::iter::once(rest))
                .map(|a| {
                    let z = a.max(1e-300).ln() + step * rng.sample::<f64, _>(StandardNormal);
                    z.clamp(-700.0, 700.0)
                })
                .collect();
            let top = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = coords.iter().map(|z| (z - top).exp()).collect();
            let total: f64 = w.iter().sum();
            w[..w.len() - 1].iter().map(|v| v / total).collect()
        })
        .collect()
}

/// A candidate that passed the constraint gate, with its energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub rows: Vec<Vec<f64>>,
    pub policy: Policy,
    pub solution: ChainSolution,
    pub energy: f64,
}

#[derive(Debug, Clone)]
enum Outcome {
    /// No steady state or no defined energy.
    Rejected,
    Infeasible { violation: f64 },
    Feasible(Box<Evaluated>),
}

fn constraint_violation(spec: &QosSpec, sol: &ChainSolution) -> f64 {
    let drop = (sol.theta_r - spec.theta_tar - CONSTRAINT_SLACK).max(0.0);
    let ccon = match spec.epsilon {
        Some(eps) => (sol.gamma - eps - CONSTRAINT_SLACK).max(0.0),
        None => 0.0,
    };
    drop + ccon
}

fn evaluate(spec: &QosSpec, config: &SystemConfig, rows: Vec<Vec<f64>>) -> Outcome {
    let Ok(policy) = policy_for(rows.clone(), spec) else {
        return Outcome::Rejected;
    };
    let Ok(solution) = solve_chain(&policy) else {
        return Outcome::Rejected;
    };
    let violation = constraint_violation(spec, &solution);
    if violation > 0.0 {
        return Outcome::Infeasible { violation };
    }
    let thresholds = thresholds_from_rows(&rows, &ExpFading);
    let Ok(vu) = VuDistribution::new(&policy, &solution.pi, &thresholds) else {
        return Outcome::Rejected;
    };
    match energy_cst(&VuChannel::new(&vu, config.pathloss()), config) {
        Ok(energy) if energy.is_finite() => Outcome::Feasible(Box::new(Evaluated {
            rows,
            policy,
            solution,
            energy,
        })),
        _ => Outcome::Rejected,
    }
}

/// Evaluates a single candidate; `None` when it is infeasible.
pub fn evaluate_candidate(spec: &QosSpec, config: &SystemConfig, rows: Vec<Vec<f64>>) -> Option<Evaluated> {
    match evaluate(spec, config, rows) {
        Outcome::Feasible(e) => Some(*e),
        _ => None,
    }
}

/// Outcome of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: Option<Evaluated>,
    pub feasible: bool,
    /// Candidates generated.
    pub candidates: usize,
    /// Energy evaluations performed.
    pub evaluations: usize,
    pub seed: Option<u64>,
    pub t0: f64,
    pub c_sa: f64,
}

impl OptimizationResult {
    pub fn best_energy(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.energy)
    }

    pub fn best_energy_db(&self) -> f64 {
        self.best.as_ref().map_or(f64::NAN, |b| to_db(b.energy))
    }

    pub fn solution(&self) -> Option<&ChainSolution> {
        self.best.as_ref().map(|b| &b.solution)
    }

    pub fn policy(&self) -> Option<&Policy> {
        self.best.as_ref().map(|b| &b.policy)
    }
}

/// Picks `T0` so that the typical worsening between random feasible
/// candidates is accepted with probability 0.8, and `c_sa` so that at the
/// last temperature a typical worsening between neighbours at the final step
/// size is accepted with probability below 0.01.
fn calibrate(spec: &QosSpec, config: &SystemConfig, schedule: &AnnealSchedule, rng: &mut SimRng) -> (f64, f64) {
    const SAMPLES: usize = 64;
    const FALLBACK: f64 = 0.05;
    let mut feasible = Vec::new();
    let mut tries = 0;
    while feasible.len() < SAMPLES && tries < SAMPLES * 40 {
        tries += 1;
        if let Outcome::Feasible(e) = evaluate(spec, config, random_candidate(spec, rng)) {
            feasible.push(*e);
        }
    }
    let coarse = mean_positive_gap(feasible.iter().map(|e| e.energy));
    let mut fine_gaps = Vec::new();
    for e in feasible.iter().take(SAMPLES / 2) {
        let cand = neighbour_candidate(&e.rows, schedule.step_final, rng);
        if let Outcome::Feasible(n) = evaluate(spec, config, cand) {
            fine_gaps.push((n.energy - e.energy).abs());
        }
    }
    let fine = if fine_gaps.is_empty() {
        None
    } else {
        Some(fine_gaps.iter().sum::<f64>() / fine_gaps.len() as f64)
    };
    let t0 = schedule
        .t0
        .unwrap_or_else(|| coarse.map_or(FALLBACK, |d| d / (1.0f64 / 0.8).ln()));
    let c_sa = schedule.c_sa.unwrap_or_else(|| {
        let steps = schedule.temp_steps.saturating_sub(1).max(1) as f64;
        let t_final = fine.map_or(t0 * 1e-3, |d| (d / 100.0f64.ln()).max(t0 * 1e-6));
        ((t0 / t_final - 1.0) / steps).max(0.0)
    });
    (t0, c_sa)
}

fn mean_positive_gap(energies: impl Iterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = energies.collect();
    let gaps: Vec<f64> = v
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|g| *g > 0.0)
        .collect();
    if gaps.is_empty() {
        None
    } else {
        Some(gaps.iter().sum::<f64>() / gaps.len() as f64)
    }
}

/// Runs the annealer with a generator derived from `seed`.
pub fn anneal(spec: &QosSpec, config: &SystemConfig, schedule: &AnnealSchedule, seed: u64) -> Result<OptimizationResult> {
    let mut rng = rng_from_seed(seed);
    let mut result = anneal_with_rng(spec, config, schedule, &mut rng)?;
    result.seed = Some(seed);
    Ok(result)
}

/// Runs the annealer on an explicit generator.
///
/// Until a feasible candidate is found the search descends on the total
/// constraint violation; afterwards the current state only moves between
/// feasible candidates.
pub fn anneal_with_rng(
    spec: &QosSpec,
    config: &SystemConfig,
    schedule: &AnnealSchedule,
    rng: &mut SimRng,
) -> Result<OptimizationResult> {
    spec.validate()?;
    config.validate()?;
    let mut calib_rng = split_rng(rng);
    let (t0, c_sa) = calibrate(spec, config, schedule, &mut calib_rng);
    let per_temp = schedule.configs_for(spec);

    let mut candidates = 0;
    let mut evaluations = 0;
    let mut best: Option<Evaluated> = None;
    let mut current: Option<Evaluated> = None;
    // Least-violating candidate while nothing feasible is known.
    let mut scout: Option<(Vec<Vec<f64>>, f64)> = None;

    for b in 0..schedule.temp_steps {
        let temp = fa_temperature(t0, c_sa, b);
        if schedule.t_min.is_some_and(|t_min| temp < t_min) {
            break;
        }
        let ratio = temp / t0;
        let step = (schedule.step_initial * ratio).max(schedule.step_final);
        for _ in 0..per_temp {
            candidates += 1;
            let restart = rng.random::<f64>() < schedule.restart_probability;
            let base = match (&current, &scout) {
                (Some(cur), _) => Some(&cur.rows),
                (None, Some((rows, _))) => Some(rows),
                (None, None) => None,
            };
            let rows = match base {
                Some(rows) if !restart => neighbour_candidate(rows, step, rng),
                _ => random_candidate(spec, rng),
            };
            match evaluate(spec, config, rows.clone()) {
                Outcome::Rejected => {}
                Outcome::Infeasible { violation } => {
                    if current.is_none() && scout.as_ref().is_none_or(|(_, v)| violation < *v) {
                        scout = Some((rows, violation));
                    }
                }
                Outcome::Feasible(cand) => {
                    evaluations += 1;
                    let cand = *cand;
                    if best.as_ref().is_none_or(|b| cand.energy <= b.energy) {
                        best = Some(cand.clone());
                    }
                    let accept = match &current {
                        None => true,
                        Some(cur) => {
                            let r = rng.random::<f64>();
                            r < (-(cand.energy - cur.energy) / temp).exp()
                        }
                    };
                    if accept {
                        current = Some(cand);
                    }
                }
            }
        }
    }
    Ok(OptimizationResult {
        feasible: best.is_some(),
        best,
        candidates,
        evaluations,
        seed: None,
        t0,
        c_sa,
    })
}

/// Largest useful CCON-violation bound: the violation probability of the
/// best policy found without the `epsilon` constraint.
pub fn gamma_max(
    spec: &QosSpec,
    config: &SystemConfig,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<(Option<f64>, OptimizationResult)> {
    let result = anneal(&spec.with_epsilon(None), config, schedule, seed)?;
    Ok((result.solution().map(|s| s.gamma), result))
}

/// Smallest achievable CCON-violation bound, estimated by bisection on
/// `epsilon` over `[0, upper]` using annealer feasibility.
pub fn gamma_min(
    spec: &QosSpec,
    config: &SystemConfig,
    schedule: &AnnealSchedule,
    upper: f64,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    let (mut lo, mut hi) = (0.0, upper);
    let feasible_at = |eps: f64| -> Result<bool> {
        Ok(anneal(&spec.with_epsilon(Some(eps)), config, schedule, seed)?.feasible)
    };
    if feasible_at(lo)? {
        return Ok(0.0);
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One row of the buffer-search table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferCandidate {
    pub buffer: usize,
    pub feasible: bool,
    pub energy_db: f64,
    pub gamma: Option<f64>,
    pub theta_r: Option<f64>,
    /// Gain over the smallest buffer in dB.
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferSearch {
    /// Smallest buffer reaching the target gain, if any.
    pub buffer: Option<usize>,
    pub table: Vec<BufferCandidate>,
}

/// Finds the smallest buffer in `buffers` whose constrained optimum improves
/// on the smallest buffer's by at least `target_gain_db`.
pub fn buffer_search(
    spec: &QosSpec,
    buffers: &[usize],
    target_gain_db: f64,
    epsilon: f64,
    config: &SystemConfig,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<BufferSearch> {
    let mut sorted = buffers.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut table = Vec::with_capacity(sorted.len());
    for &b in &sorted {
        let s = spec.with_buffer(b).with_epsilon(Some(epsilon));
        let r = anneal(&s, config, schedule, seed)?;
        table.push(BufferCandidate {
            buffer: b,
            feasible: r.feasible,
            energy_db: r.best_energy_db(),
            gamma: r.solution().map(|s| s.gamma),
            theta_r: r.solution().map(|s| s.theta_r),
            gain_db: f64::NAN,
        });
    }
    let baseline = table.first().filter(|c| c.feasible).map(|c| c.energy_db);
    for c in &mut table {
        if let Some(base) = baseline {
            if c.feasible {
                c.gain_db = base - c.energy_db;
            }
        }
    }
    let buffer = table
        .iter()
        .find(|c| c.feasible && c.gain_db >= target_gain_db - 1e-12)
        .map(|c| c.buffer);
    Ok(BufferSearch { buffer, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn temperature_schedule() {
        assert_eq!(fa_temperature(100.0, 4.0, 0), 100.0);
        assert_relative_eq!(fa_temperature(100.0, 4.0, 24), 100.0 / 97.0, epsilon = 1e-15);
        assert_relative_eq!(fa_temperature(100.0, 4.0, 24), 1.030_928, epsilon = 1e-6);
        for b in 0..500 {
            assert!(fa_temperature(3.0, 0.2, b + 1) < fa_temperature(3.0, 0.2, b));
        }
    }

    #[test]
    fn candidates_are_on_the_simplex() {
        let spec = QosSpec::homogeneous(2, 2, 0.3, None, 0.02);
        let mut rng = rng_from_seed(1);
        for _ in 0..2000 {
            let rows = random_candidate(&spec, &mut rng);
            assert_eq!(rows.len(), 5);
            for (p, row) in rows.iter().enumerate() {
                assert_eq!(row.len(), p.min(2) + 1);
                let s: f64 = row.iter().sum();
                assert!(s <= 1.0 + 1e-12 && row.iter().all(|a| *a >= 0.0));
            }
            let n = neighbour_candidate(&rows, 0.5, &mut rng);
            for row in &n {
                assert!(row.iter().sum::<f64>() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn candidates_are_deterministic() {
        let spec = QosSpec::homogeneous(1, 2, 0.3, None, 0.02);
        let a: Vec<_> = {
            let mut r = rng_from_seed(9);
            (0..20).map(|_| random_candidate(&spec, &mut r)).collect()
        };
        let b: Vec<_> = {
            let mut r = rng_from_seed(9);
            (0..20).map(|_| random_candidate(&spec, &mut r)).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn forced_optimum_in_tiny_feasible_region() {
        // theta_tar = 0 with nu_d = 0 forces schedule-always rows, whose
        // energy diverges, so nothing is feasible.
        let spec = QosSpec::homogeneous(0, 1, 0.0, None, 0.0);
        let r = anneal(&spec, &SystemConfig::default(), &AnnealSchedule::quick(5, 20), 3).unwrap();
        assert!(!r.feasible);
        assert!(r.best.is_none());
        assert!(r.best_energy().is_infinite());
    }

    #[test]
    fn quick_run_respects_constraints() {
        let spec = QosSpec::homogeneous(0, 1, 0.3, Some(0.02), 0.02);
        let r = anneal(&spec, &SystemConfig::default(), &AnnealSchedule::quick(20, 50), 5).unwrap();
        assert!(r.feasible);
        let sol = r.solution().unwrap();
        assert!(sol.theta_r <= 0.3 + CONSTRAINT_SLACK);
        assert!(sol.gamma <= 0.02 + CONSTRAINT_SLACK);
        assert_eq!(r.seed, Some(5));
        assert!(r.evaluations > 0 && r.evaluations <= r.candidates);
    }
}
