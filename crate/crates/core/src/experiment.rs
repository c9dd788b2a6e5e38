//! Batch experiments driven by a JSON config.
//!
//! Every command runs one job per (sweep value, seed) and writes
//! `results.csv`, `summary.csv` and `config.echo.json` to the output
//! directory.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annealer::{anneal, buffer_search, gamma_max, AnnealSchedule, BufferCandidate};
use crate::channel::{rng_from_seed, sample_channel, ExpFading, SystemConfig};
use crate::energy::{
    energy_cso, energy_cst, finite_k_approximation, finite_k_sic_energy, to_db, FiniteKInstance, VuChannel,
    VuDistribution,
};
use crate::error::{Error, Result};
use crate::fsmc::{policy_for, solve_chain, thresholds_from_policy, QosSpec};
use crate::simulator::simulate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Optimize,
    Sweep,
    Simulate,
    GammaMax,
    BufferSearch,
    FiniteK,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Optimize,
        Command::Sweep,
        Command::Simulate,
        Command::GammaMax,
        Command::BufferSearch,
        Command::FiniteK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Simulate => "simulate",
            Command::GammaMax => "gamma-max",
            Command::BufferSearch => "buffer-search",
            Command::FiniteK => "finite-k",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "N")]
    Ccon,
    #[serde(rename = "B")]
    Buffer,
    #[serde(rename = "epsilon")]
    Epsilon,
    #[serde(rename = "beta2")]
    Beta2,
    #[serde(rename = "zeta2")]
    Zeta2,
    #[serde(rename = "nu_d")]
    NuD,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BufferSearchConfig {
    pub buffers: Vec<usize>,
    pub target_gain_db: f64,
}

/// A finite group of users. Without explicit gains, `users` gains are drawn
/// from the cell's channel model with each seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteKConfig {
    #[serde(default)]
    pub gains: Option<Vec<f64>>,
    #[serde(default = "default_users")]
    pub users: usize,
    /// Per-user load factors; all ones when absent.
    #[serde(default)]
    pub loads: Option<Vec<f64>>,
}

fn default_users() -> usize {
    8
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub system: SystemConfig,
    pub qos: QosSpec,
    #[serde(default)]
    pub schedule: AnnealSchedule,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Estimation error variance for CSO energies.
    #[serde(default)]
    pub beta2: Option<f64>,
    /// Slots per simulation.
    #[serde(default)]
    pub slots: Option<u64>,
    /// Scheduling rows to simulate; optimised first when absent.
    #[serde(default)]
    pub policy: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub buffer_search: Option<BufferSearchConfig>,
    #[serde(default)]
    pub finite_k: Option<FiniteKConfig>,
}

pub const DEFAULT_SLOTS: u64 = 1_000_000;

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked before running.
    pub fn validate(&self, command: Command) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        self.system.validate().map_err(cfg)?;
        self.qos.validate().map_err(cfg)?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.beta2.is_some_and(|b| !(b >= 0.0)) {
            return Err(Error::Config("beta2 must be nonnegative".into()));
        }
        if self.slots == Some(0) {
            return Err(Error::Config("slots must be positive".into()));
        }
        if command == Command::Sweep && self.sweep.as_ref().is_none_or(|s| s.values.is_empty()) {
            return Err(Error::Config("the sweep command needs a nonempty `sweep`".into()));
        }
        if command == Command::BufferSearch {
            let bs = self
                .buffer_search
                .as_ref()
                .ok_or_else(|| Error::Config("buffer-search needs `buffer_search`".into()))?;
            if bs.buffers.is_empty() {
                return Err(Error::Config("buffer_search.buffers is empty".into()));
            }
            if self.qos.epsilon.is_none() {
                return Err(Error::Config("buffer-search needs qos.epsilon".into()));
            }
        }
        if command == Command::FiniteK {
            let fk = self.finite_k.clone().unwrap_or(FiniteKConfig {
                gains: None,
                users: default_users(),
                loads: None,
            });
            let k = fk.gains.as_ref().map_or(fk.users, Vec::len);
            if k == 0 || fk.loads.as_ref().is_some_and(|l| l.len() != k) {
                return Err(Error::Config("finite_k needs users and matching loads".into()));
            }
        }
        for point in self.points() {
            self.point_spec(point).map_err(cfg)?;
        }
        Ok(())
    }

    fn points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) if !s.values.is_empty() => s.values.iter().copied().map(Some).collect(),
            _ => vec![None],
        }
    }

    /// The spec and `beta2` in force at one sweep value.
    fn point_spec(&self, value: Option<f64>) -> Result<(QosSpec, Option<f64>)> {
        let mut spec = self.qos.clone();
        let mut beta2 = self.beta2;
        let (Some(sweep), Some(v)) = (&self.sweep, value) else {
            return Ok((spec, beta2));
        };
        let count = |name: &str| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("{name} values must be nonnegative integers, got {v}")))
            }
        };
        match sweep.parameter {
            SweepAxis::Ccon => {
                if spec.ccon_distribution.is_some() {
                    return Err(Error::Config("cannot sweep N with a CCON distribution".into()));
                }
                spec.ccon = count("N")?;
            }
            SweepAxis::Buffer => spec.buffer = count("B")?,
            SweepAxis::Epsilon => spec.epsilon = Some(v),
            SweepAxis::Beta2 => beta2 = Some(v),
            SweepAxis::Zeta2 => {
                if spec.ccon != 2 {
                    return Err(Error::Config("zeta2 sweeps need qos.ccon = 2".into()));
                }
                spec.ccon_distribution = Some(vec![1.0 - v, v]);
            }
            SweepAxis::NuD => spec.nu_d = v,
        }
        spec.validate()?;
        if beta2.is_some_and(|b| !(b >= 0.0)) {
            return Err(Error::Config("beta2 must be nonnegative".into()));
        }
        Ok((spec, beta2))
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub command: Command,
    pub point: usize,
    pub sweep_value: Option<f64>,
    pub ccon: usize,
    pub buffer: usize,
    pub theta_tar: f64,
    pub epsilon: Option<f64>,
    pub nu_d: f64,
    pub beta2: Option<f64>,
    pub zeta: Option<Vec<f64>>,
    pub seed: u64,
    pub ebn0_linear: f64,
    pub theta_r: Option<f64>,
    pub gamma: Option<f64>,
    pub feasible: bool,
    pub evaluations: usize,
    pub wall_ms: f64,
}

impl ResultRow {
    fn new(command: Command, point: usize, value: Option<f64>, spec: &QosSpec, beta2: Option<f64>, seed: u64) -> Self {
        Self {
            command,
            point,
            sweep_value: value,
            ccon: spec.ccon,
            buffer: spec.buffer,
            theta_tar: spec.theta_tar,
            epsilon: spec.epsilon,
            nu_d: spec.nu_d,
            beta2,
            zeta: spec.ccon_distribution.clone(),
            seed,
            ebn0_linear: f64::NAN,
            theta_r: None,
            gamma: None,
            feasible: false,
            evaluations: 0,
            wall_ms: 0.0,
        }
    }

    pub fn ebn0_db(&self) -> f64 {
        to_db(self.ebn0_linear)
    }
}

pub const RESULT_COLUMNS: [&str; 16] = [
    "command",
    "N",
    "B",
    "theta_tar",
    "epsilon",
    "nu_d",
    "beta2",
    "zeta_json",
    "seed",
    "ebn0_db",
    "ebn0_linear",
    "theta_r",
    "gamma",
    "feasible",
    "evaluations",
    "wall_ms",
];

/// Formats a float with 9 significant digits; non-finite values become
/// `nan`, `inf` or `-inf`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.command.to_string(),
            self.ccon.to_string(),
            self.buffer.to_string(),
            format_sig(self.theta_tar),
            opt(self.epsilon),
            format_sig(self.nu_d),
            opt(self.beta2),
            self.zeta
                .as_ref()
                .map(|z| serde_json::to_string(z).expect("floats serialise"))
                .unwrap_or_default(),
            self.seed.to_string(),
            format_sig(self.ebn0_db()),
            format_sig(self.ebn0_linear),
            opt(self.theta_r),
            opt(self.gamma),
            self.feasible.to_string(),
            self.evaluations.to_string(),
            format_sig(self.wall_ms),
        ]
    }
}

/// Aggregate over seeds at one sweep value; statistics cover feasible rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub command: Command,
    pub parameter: Option<SweepAxis>,
    pub value: Option<f64>,
    pub seeds: usize,
    pub feasible: usize,
    pub ebn0_db_mean: f64,
    pub ebn0_db_min: f64,
    pub ebn0_db_max: f64,
    pub gamma_mean: f64,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub theta_r_mean: f64,
}

pub const SUMMARY_COLUMNS: [&str; 12] = [
    "command",
    "parameter",
    "value",
    "seeds",
    "feasible",
    "ebn0_db_mean",
    "ebn0_db_min",
    "ebn0_db_max",
    "gamma_mean",
    "gamma_min",
    "gamma_max",
    "theta_r_mean",
];

fn stats(values: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    let v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, min, max)
}

pub fn summarize(rows: &[ResultRow], parameter: Option<SweepAxis>) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut start = 0;
    while start < rows.len() {
        let point = rows[start].point;
        let end = start + rows[start..].iter().take_while(|r| r.point == point).count();
        let group = &rows[start..end];
        let ok: Vec<&ResultRow> = group.iter().filter(|r| r.feasible).collect();
        let (e_mean, e_min, e_max) = stats(ok.iter().map(|r| r.ebn0_db()));
        let (g_mean, g_min, g_max) = stats(ok.iter().filter_map(|r| r.gamma));
        let (t_mean, _, _) = stats(ok.iter().filter_map(|r| r.theta_r));
        out.push(SummaryRow {
            command: group[0].command,
            parameter,
            value: group[0].sweep_value,
            seeds: group.len(),
            feasible: ok.len(),
            ebn0_db_mean: e_mean,
            ebn0_db_min: e_min,
            ebn0_db_max: e_max,
            gamma_mean: g_mean,
            gamma_min: g_min,
            gamma_max: g_max,
            theta_r_mean: t_mean,
        });
        start = end;
    }
    out
}

impl SummaryRow {
    fn record(&self) -> Vec<String> {
        let param = match self.parameter {
            Some(p) => serde_json::to_value(p)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            None => String::new(),
        };
        vec![
            self.command.to_string(),
            param,
            opt(self.value),
            self.seeds.to_string(),
            self.feasible.to_string(),
            format_sig(self.ebn0_db_mean),
            format_sig(self.ebn0_db_min),
            format_sig(self.ebn0_db_max),
            format_sig(self.gamma_mean),
            format_sig(self.gamma_min),
            format_sig(self.gamma_max),
            format_sig(self.theta_r_mean),
        ]
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub slots: Option<u64>,
    pub jobs: Option<usize>,
}

/// Parses a comma-separated seed list.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().map_err(|e| Error::Config(format!("bad seed `{s}`: {e}"))))
        .collect()
}

/// Outcome of a run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub config: ExperimentConfig,
    pub output_dir: PathBuf,
}

pub fn resolve(mut config: ExperimentConfig, overrides: &Overrides) -> ExperimentConfig {
    if let Some(out) = &overrides.out {
        config.output_dir = out.clone();
    }
    if let Some(seeds) = &overrides.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(slots) = overrides.slots {
        config.slots = Some(slots);
    }
    config
}

/// Runs every job of `command` and writes the result files.
pub fn run(command: Command, config: ExperimentConfig, overrides: &Overrides) -> Result<RunOutput> {
    let config = resolve(config, overrides);
    config.validate(command)?;
    let rows = match overrides.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| run_jobs(command, &config)),
        None => run_jobs(command, &config),
    }?;
    let summary = summarize(&rows, config.sweep.as_ref().map(|s| s.parameter));
    write_outputs(&config, &rows, &summary)?;
    Ok(RunOutput {
        rows,
        summary,
        output_dir: config.output_dir.clone(),
        config,
    })
}

/// Runs the jobs without touching the filesystem; rows are sorted by
/// (sweep value position, seed position).
pub fn run_jobs(command: Command, config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let jobs: Vec<(usize, Option<f64>, usize, u64)> = config
        .points()
        .into_iter()
        .enumerate()
        .flat_map(|(i, v)| config.seeds.iter().enumerate().map(move |(j, s)| (i, v, j, *s)))
        .collect();
    let mut rows: Vec<(usize, usize, ResultRow)> = jobs
        .into_par_iter()
        .map(|(i, v, j, seed)| run_job(command, config, i, v, seed).map(|r| (i, j, r)))
        .collect::<Result<_>>()?;
    rows.sort_by_key(|(i, j, _)| (*i, *j));
    Ok(rows.into_iter().map(|(_, _, r)| r).collect())
}

fn run_job(command: Command, config: &ExperimentConfig, point: usize, value: Option<f64>, seed: u64) -> Result<ResultRow> {
    let (spec, beta2) = config.point_spec(value)?;
    let mut row = ResultRow::new(command, point, value, &spec, beta2, seed);
    let start = Instant::now();
    let sys = &config.system;
    match command {
        Command::Optimize | Command::Sweep => {
            let r = anneal(&spec, sys, &config.schedule, seed)?;
            row.evaluations = r.evaluations;
            if let Some(best) = &r.best {
                row.feasible = true;
                row.theta_r = Some(best.solution.theta_r);
                row.gamma = Some(best.solution.gamma);
                row.ebn0_linear = policy_energy(&best.policy, &best.solution.pi, sys, beta2)?;
            }
        }
        Command::GammaMax => {
            row.epsilon = None;
            let (gm, r) = gamma_max(&spec, sys, &config.schedule, seed)?;
            row.evaluations = r.evaluations;
            if let Some(best) = &r.best {
                row.feasible = true;
                row.theta_r = Some(best.solution.theta_r);
                row.gamma = gm;
                row.ebn0_linear = best.energy;
            }
        }
        Command::Simulate => {
            let policy = match &config.policy {
                Some(rows) => Some(policy_for(rows.clone(), &spec)?),
                None => {
                    let r = anneal(&spec, sys, &config.schedule, seed)?;
                    row.evaluations = r.evaluations;
                    r.best.map(|b| b.policy)
                }
            };
            if let Some(policy) = policy {
                let sol = solve_chain(&policy)?;
                let table = thresholds_from_policy(&policy, &ExpFading);
                let mut rng = rng_from_seed(seed);
                let slots = config.slots.unwrap_or(DEFAULT_SLOTS);
                let sim = simulate(&table, &spec, sys, slots, &mut rng)?;
                row.feasible = sol.theta_r <= spec.theta_tar + crate::annealer::CONSTRAINT_SLACK
                    && spec.epsilon.is_none_or(|e| sol.gamma <= e + crate::annealer::CONSTRAINT_SLACK);
                row.theta_r = Some(sim.empirical_theta_r);
                row.gamma = Some(sim.empirical_gamma);
                row.ebn0_linear = sim.energy_estimate;
            }
        }
        Command::BufferSearch => {
            let bs = config.buffer_search.as_ref().expect("validated");
            let eps = spec.epsilon.expect("validated");
            let found = buffer_search(&spec, &bs.buffers, bs.target_gain_db, eps, sys, &config.schedule, seed)?;
            if let Some(b) = found.buffer {
                let c: &BufferCandidate = found.table.iter().find(|c| c.buffer == b).expect("listed");
                row.buffer = b;
                row.feasible = true;
                row.ebn0_linear = 10f64.powf(c.energy_db / 10.0);
                row.theta_r = c.theta_r;
                row.gamma = c.gamma;
            }
        }
        Command::FiniteK => {
            let fk = config.finite_k.clone().unwrap_or(FiniteKConfig {
                gains: None,
                users: default_users(),
                loads: None,
            });
            let gains = fk.gains.clone().unwrap_or_else(|| {
                let mut rng = rng_from_seed(seed);
                let pl = sys.pathloss();
                (0..fk.users).map(|_| sample_channel(&pl, &mut rng).gain).collect()
            });
            let loads = fk.loads.clone().unwrap_or_else(|| vec![1.0; gains.len()]);
            let inst = FiniteKInstance::from_loads(
                gains,
                &loads,
                sys.spectral_efficiency,
                beta2.unwrap_or(0.0),
                sys.noise_density,
            );
            let bits: f64 = inst.rates.iter().sum();
            match finite_k_sic_energy(&inst) {
                Ok(e) => {
                    row.feasible = true;
                    row.ebn0_linear = e.iter().sum::<f64>() / bits / sys.noise_density;
                    row.evaluations = inst.len();
                }
                Err(Error::InfeasibleErrorVariance { .. }) => {
                    let approx = finite_k_approximation(&inst)?;
                    row.ebn0_linear = approx.iter().sum::<f64>() / bits / sys.noise_density;
                }
                Err(e) => return Err(e),
            }
        }
    }
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(row)
}

fn policy_energy(policy: &crate::fsmc::Policy, pi: &[f64], sys: &SystemConfig, beta2: Option<f64>) -> Result<f64> {
    let table = thresholds_from_policy(policy, &ExpFading);
    let vu = VuDistribution::new(policy, pi, &table)?;
    let ch = VuChannel::new(&vu, sys.pathloss());
    match beta2 {
        Some(b) => energy_cso(&ch, sys, b),
        None => energy_cst(&ch, sys),
    }
}

fn write_outputs(config: &ExperimentConfig, rows: &[ResultRow], summary: &[SummaryRow]) -> Result<()> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let csv_err = |e: csv::Error| Error::Io(e.to_string());

    let mut w = csv::Writer::from_path(dir.join("results.csv")).map_err(csv_err)?;
    w.write_record(RESULT_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.record()).map_err(csv_err)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(csv_err)?;
    w.write_record(SUMMARY_COLUMNS).map_err(csv_err)?;
    for s in summary {
        w.write_record(s.record()).map_err(csv_err)?;
    }
    w.flush()?;

    let echo = serde_json::to_string_pretty(config).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join("config.echo.json"), echo + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.52255216649), "0.522552166");
        assert_eq!(format_sig(-2.8187034734543683), "-2.81870347");
        assert_eq!(format_sig(1234.0), "1234");
        assert_eq!(format_sig(1.5e-7), "1.5e-7");
        assert_eq!(format_sig(0.3), "0.3");
        assert_eq!(format_sig(123456789012.0), "1.23456789e11");
        assert_eq!(format_sig(f64::NAN), "nan");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("plot".parse::<Command>().is_err());
    }

    #[test]
    fn sweep_axis_names() {
        let s: Sweep = serde_json::from_str(r#"{"parameter":"nu_d","values":[0.1]}"#).unwrap();
        assert_eq!(s.parameter, SweepAxis::NuD);
        assert!(serde_json::from_str::<Sweep>(r#"{"parameter":"delta","values":[0.1]}"#).is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1, 2,3").unwrap(), vec![1, 2, 3]);
        assert!(parse_seeds("1,x").is_err());
    }
}
