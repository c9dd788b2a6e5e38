//! System energy per bit for the scheduled virtual users.
//!
//! Each scheduled packet is an independent virtual user (VU). Its fading is
//! distributed as the unit-mean exponential density reweighted by the
//! expected number of packets a policy schedules at that fading level; its
//! path loss is the cell's. In the large-system limit the energy per bit is
//!
//! ```text
//! Eb/N0 = ln2 * int 2^(C P(x)) / x dP(x)
//! ```
//!
//! with `P` the VU channel CDF. Integrating by parts gives the form used
//! here, `(1/C) * int_0^inf (2^(C P(x)) - 1) / x^2 dx`, which needs only the
//! CDF. The estimation-error term is handled the same way with `4^(C P)`
//! and `x^-3`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{exp_tail2, gain_cdf, gain_cdf_exact, FadingCdf, PathLoss, SystemConfig};
use crate::error::{invalid, Error, Result};
use crate::fsmc::{scheduled_count, Policy, ThresholdTable};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

/// Absolute tolerance on a computed energy per bit.
pub const ENERGY_TOL: f64 = 1e-7;

/// Fading distribution of the scheduled virtual users.
///
/// The density is `c * w(y) * e^-y` where the weight `w(y) = sum_p pi_p
/// L(p, y)` is a step function that changes only at the thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct VuDistribution {
    /// Left edges of the weight segments; `edges[0] = 0`.
    edges: Vec<f64>,
    weights: Vec<f64>,
    /// Unnormalised CDF at each left edge.
    cum: Vec<f64>,
    /// Unnormalised integrated CDF at each left edge.
    integrated: Vec<f64>,
    norm: f64,
    nu_d: f64,
}

impl VuDistribution {
    /// Builds the distribution induced by a policy, its steady state and its
    /// thresholds.
    pub fn new(policy: &Policy, pi: &[f64], thresholds: &ThresholdTable) -> Result<Self> {
        if pi.len() != policy.num_states() || thresholds.kappa.len() != policy.num_states() {
            return Err(Error::Shape("policy, steady state and thresholds disagree".into()));
        }
        let mut edges: Vec<f64> = thresholds
            .kappa
            .iter()
            .flatten()
            .copied()
            .filter(|k| k.is_finite())
            .chain(std::iter::once(0.0))
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();

        let weights: Vec<f64> = (0..edges.len())
            .map(|i| {
                let y = match edges.get(i + 1) {
                    Some(next) => 0.5 * (edges[i] + next),
                    None => edges[i] + 1.0,
                };
                (0..policy.num_states())
                    .map(|p| pi[p] * scheduled_count(p, y, thresholds, policy.buffer()) as f64)
                    .sum()
            })
            .collect();
        Self::from_segments(edges, weights, policy.nu_d())
    }

    /// Builds the distribution from explicit segment edges and weights.
    pub fn from_segments(edges: Vec<f64>, weights: Vec<f64>, nu_d: f64) -> Result<Self> {
        if edges.is_empty() || edges.len() != weights.len() || edges[0] != 0.0 {
            return Err(Error::Shape("segments must start at zero and match the weights".into()));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) || weights.iter().any(|w| *w < 0.0) {
            return Err(invalid("segments", "edges must increase and weights be nonnegative"));
        }
        let n = edges.len();
        let mut cum = vec![0.0; n];
        let mut integrated = vec![0.0; n];
        for i in 1..n {
            let d = edges[i] - edges[i - 1];
            let tail = (-edges[i - 1]).exp();
            cum[i] = cum[i - 1] + weights[i - 1] * tail * -(-d).exp_m1();
            integrated[i] = integrated[i - 1] + cum[i - 1] * d + weights[i - 1] * tail * exp_tail2(d);
        }
        let mass = cum[n - 1] + weights[n - 1] * (-edges[n - 1]).exp();
        if !(mass > 0.0) {
            return Err(Error::NeverSchedules);
        }
        Ok(Self {
            edges,
            weights,
            cum,
            integrated,
            norm: 1.0 / mass,
            nu_d,
        })
    }

    /// Normalisation constant `c`, the inverse of the mean number of
    /// packets scheduled per slot.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    pub fn mean_scheduled(&self) -> f64 {
        1.0 / self.norm
    }

    pub fn nu_d(&self) -> f64 {
        self.nu_d
    }

    /// Smallest fading value carrying density.
    pub fn lowest_support(&self) -> f64 {
        self.weights
            .iter()
            .position(|w| *w > 0.0)
            .map(|i| self.edges[i])
            .expect("a normalised distribution has a weighted segment")
    }

    /// Segment edges at which the density jumps.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn segment(&self, y: f64) -> usize {
        self.edges.partition_point(|e| *e <= y).saturating_sub(1)
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        self.norm * self.weights[self.segment(y)] * (-y).exp()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let i = self.segment(y);
        let d = y - self.edges[i];
        let v = self.cum[i] + self.weights[i] * (-self.edges[i]).exp() * -(-d).exp_m1();
        (self.norm * v).min(1.0)
    }

    /// Inverse CDF on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let target = u.clamp(0.0, 1.0) / self.norm;
        let i = self.cum.partition_point(|c| *c <= target).saturating_sub(1);
        // Skip zero-weight segments sharing the same cumulative value.
        let i = (i..self.edges.len())
            .find(|&j| self.weights[j] > 0.0)
            .unwrap_or(i);
        let rest = (target - self.cum[i]).max(0.0);
        let scaled = rest / (self.weights[i] * (-self.edges[i]).exp());
        if scaled >= 1.0 {
            return f64::INFINITY;
        }
        self.edges[i] - (-scaled).ln_1p()
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }
}

impl FadingCdf for VuDistribution {
    fn cdf(&self, y: f64) -> f64 {
        VuDistribution::cdf(self, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.edges[1..].to_vec()
    }

    fn integrated_cdf(&self, y: f64) -> Option<f64> {
        if y <= 0.0 {
            return Some(0.0);
        }
        let i = self.segment(y);
        let d = y - self.edges[i];
        let v = self.integrated[i]
            + self.cum[i] * d
            + self.weights[i] * (-self.edges[i]).exp() * exp_tail2(d);
        Some(self.norm * v)
    }
}

/// A nonnegative channel-gain distribution that the energy functional can
/// integrate.
pub trait ChannelDistribution {
    fn cdf(&self, x: f64) -> f64;
    /// Infimum of the support.
    fn support_min(&self) -> f64;
    /// A point beyond which the CDF equals one to machine precision.
    fn support_max(&self) -> f64;
    /// Points where the CDF is not smooth.
    fn breakpoints(&self) -> Vec<f64>;
}

/// Channel of the virtual users: VU fading mixed with the cell's path loss.
#[derive(Debug, Clone)]
pub struct VuChannel<'a> {
    fading: &'a VuDistribution,
    pathloss: PathLoss,
}

impl<'a> VuChannel<'a> {
    pub fn new(fading: &'a VuDistribution, pathloss: PathLoss) -> Self {
        Self { fading, pathloss }
    }

    pub fn fading(&self) -> &VuDistribution {
        self.fading
    }

    pub fn pathloss(&self) -> &PathLoss {
        &self.pathloss
    }

    fn span(&self) -> f64 {
        if self.pathloss.is_degenerate() {
            1.0
        } else {
            self.pathloss.max_gain()
        }
    }
}

impl ChannelDistribution for VuChannel<'_> {
    fn cdf(&self, x: f64) -> f64 {
        match gain_cdf_exact(x, &self.pathloss, self.fading) {
            Some(v) => v,
            None => gain_cdf(x, &self.pathloss, self.fading, QuadOptions::absolute(1e-10))
                .expect("smooth integrand on a compact support"),
        }
    }

    fn support_min(&self) -> f64 {
        self.fading.lowest_support()
    }

    fn support_max(&self) -> f64 {
        // The VU fading tail beyond the last edge is a plain exponential.
        let last = *self.fading.edges.last().unwrap_or(&0.0);
        (last + 45.0) * self.span()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let span = self.span();
        let mut pts = Vec::new();
        for &k in &self.fading.edges {
            if k > 0.0 {
                pts.push(k);
                if span > 1.0 {
                    pts.push(k * span);
                }
            }
        }
        pts
    }
}

/// All channel mass at a single gain `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMassChannel(pub f64);

impl ChannelDistribution for PointMassChannel {
    fn cdf(&self, x: f64) -> f64 {
        if x >= self.0 {
            1.0
        } else {
            0.0
        }
    }

    fn support_min(&self) -> f64 {
        self.0
    }

    fn support_max(&self) -> f64 {
        self.0
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.0]
    }
}

/// `(1/C) int (2^(order C P(x)) - 1) / x^(order + 1) dx`, which equals
/// `ln2 int 2^(order C P) / x^order dP`.
fn energy_moment<D: ChannelDistribution + ?Sized>(dist: &D, c: f64, order: i32) -> Result<f64> {
    let lo = dist.support_min();
    if !(lo > 0.0) {
        return Err(Error::Divergent);
    }
    let hi = dist.support_max().max(lo);
    let m = f64::from(order);
    let rate = m * c;
    let full = rate.exp2() - 1.0;
    let (tlo, thi) = (lo.ln(), hi.ln());
    let mut points = vec![tlo, thi];
    points.extend(
        dist.breakpoints()
            .into_iter()
            .filter(|x| *x > lo && *x < hi)
            .map(f64::ln),
    );
    points.sort_by(f64::total_cmp);
    points.dedup();
    let opts = QuadOptions {
        abs_tol: ENERGY_TOL * c * 0.5,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let body = integrate_with_breaks(
        |t| {
            let x = t.exp();
            ((rate * dist.cdf(x)).exp2() - 1.0) * (-m * t).exp()
        },
        &points,
        opts,
    )?;
    let tail = full / (m * hi.powi(order));
    Ok((body.value + tail) / c)
}

/// Energy per bit with imperfect transmitter CSI.
pub fn energy_cst<D: ChannelDistribution + ?Sized>(dist: &D, config: &SystemConfig) -> Result<f64> {
    energy_moment(dist, config.spectral_efficiency, 1)
}

/// The estimation-error term per unit error variance:
/// `ln2 int 2^(2 C P) / x^2 dP`.
pub fn cso_penalty<D: ChannelDistribution + ?Sized>(dist: &D, config: &SystemConfig) -> Result<f64> {
    energy_moment(dist, config.spectral_efficiency, 2)
}

/// Energy per bit with imperfect CSI at both ends, modelled by the
/// estimation error variance `beta2`. The scheduler must have been designed
/// for error-free transmission.
pub fn energy_cso(vu: &VuChannel<'_>, config: &SystemConfig, beta2: f64) -> Result<f64> {
    if vu.fading().nu_d() != 0.0 {
        return Err(Error::LossyTransmission(vu.fading().nu_d()));
    }
    energy_cso_unchecked(vu, config, beta2)
}

/// [`energy_cso`] for an arbitrary channel distribution.
pub fn energy_cso_unchecked<D: ChannelDistribution + ?Sized>(
    dist: &D,
    config: &SystemConfig,
    beta2: f64,
) -> Result<f64> {
    if !(beta2 >= 0.0) {
        return Err(invalid("beta2", "must be nonnegative"));
    }
    let base = energy_cst(dist, config)?;
    if beta2 == 0.0 {
        return Ok(base);
    }
    Ok(base + beta2 * cso_penalty(dist, config)?)
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Energy of one evaluated policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub ebn0_cst: f64,
    pub ebn0_cst_db: f64,
    pub ebn0_cso: Option<f64>,
    pub ebn0_cso_db: Option<f64>,
    pub beta2: Option<f64>,
    pub theta_r: f64,
    pub gamma: f64,
}

/// Builds the VU channel of a solved policy and evaluates its energy, adding
/// the CSO value when `beta2` is given.
pub fn energy_report(
    policy: &Policy,
    solution: &crate::fsmc::ChainSolution,
    config: &SystemConfig,
    beta2: Option<f64>,
) -> Result<EnergyReport> {
    let thresholds = crate::fsmc::thresholds_from_policy(policy, &crate::channel::ExpFading);
    let vu = VuDistribution::new(policy, &solution.pi, &thresholds)?;
    let channel = VuChannel::new(&vu, config.pathloss());
    let cst = energy_cst(&channel, config)?;
    let cso = match beta2 {
        Some(b) => Some(energy_cso(&channel, config, b)?),
        None => None,
    };
    Ok(EnergyReport {
        ebn0_cst: cst,
        ebn0_cst_db: to_db(cst),
        ebn0_cso: cso,
        ebn0_cso_db: cso.map(to_db),
        beta2,
        theta_r: solution.theta_r,
        gamma: solution.gamma,
    })
}

/// A finite group of simultaneously scheduled users decoded by successive
/// interference cancellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteKInstance {
    pub gains: Vec<f64>,
    /// Rates in bits/s/Hz.
    pub rates: Vec<f64>,
    pub beta2: f64,
    pub noise_density: f64,
}

impl FiniteKInstance {
    /// Rates from load factors, `R_k = lambda_k C / K`.
    pub fn from_loads(gains: Vec<f64>, loads: &[f64], spectral_efficiency: f64, beta2: f64, noise_density: f64) -> Self {
        let k = gains.len() as f64;
        let rates = loads.iter().map(|l| l * spectral_efficiency / k).collect();
        Self {
            gains,
            rates,
            beta2,
            noise_density,
        }
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.gains.is_empty() || self.gains.len() != self.rates.len() {
            return Err(Error::Shape("gains and rates must be nonempty and of equal length".into()));
        }
        if self.gains.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(invalid("gains", "must be positive"));
        }
        if self.rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(invalid("rates", "must be nonnegative"));
        }
        if !(self.beta2 >= 0.0) {
            return Err(invalid("beta2", "must be nonnegative"));
        }
        if !(self.noise_density > 0.0) {
            return Err(invalid("noise_density", "must be positive"));
        }
        Ok(())
    }

    /// `rho_k = 2^R_k - 1`.
    pub fn rho(&self) -> Vec<f64> {
        self.rates.iter().map(|r| r.exp2() - 1.0).collect()
    }

    /// Decoding order with the strongest user first and the weakest last,
    /// so that the weakest user sees no residual interference.
    pub fn default_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.gains[b].total_cmp(&self.gains[a]).then(a.cmp(&b)));
        order
    }
}

/// Telescoping energies for perfect CSI: with users sorted by increasing
/// gain, user `k` needs `Z0 / h_k (2^(sum_{i<=k} R_i) - 2^(sum_{i<k} R_i))`.
/// Results are in the instance's user order.
pub fn finite_k_closed_form(instance: &FiniteKInstance) -> Result<Vec<f64>> {
    instance.validate()?;
    let mut order = instance.default_order();
    order.reverse();
    let mut energies = vec![0.0; instance.len()];
    let mut below = 0.0;
    for &k in &order {
        let upto = below + instance.rates[k];
        energies[k] = instance.noise_density / instance.gains[k] * (upto.exp2() - below.exp2());
        below = upto;
    }
    Ok(energies)
}

/// Solves the SIC power region `(B - beta2 R) E = Z0 rho` for a given
/// decoding order (`order[0]` is decoded first and sees every later user as
/// interference). Results are in the instance's user order.
pub fn finite_k_energy_in_order(instance: &FiniteKInstance, order: &[usize]) -> Result<Vec<f64>> {
    instance.validate()?;
    let k = instance.len();
    if order.len() != k {
        return Err(Error::Shape("decoding order must list every user".into()));
    }
    let rho = instance.rho();
    let h: Vec<f64> = order.iter().map(|&i| instance.gains[i]).collect();
    let r: Vec<f64> = order.iter().map(|&i| rho[i]).collect();
    let coupling = DMatrix::from_fn(k, k, |row, col| {
        if row == col {
            h[row]
        } else if col > row {
            -r[row] * h[col]
        } else {
            0.0
        }
    });
    let rates = DMatrix::from_fn(k, k, |row, _| r[row]);
    let rhs = DVector::from_iterator(k, r.iter().map(|v| instance.noise_density * v));
    let system = coupling - rates * instance.beta2;
    let sol = system.lu().solve(&rhs).ok_or(Error::InfeasibleErrorVariance { margin: 0.0 })?;
    let mut energies = vec![0.0; k];
    for (slot, &user) in order.iter().enumerate() {
        energies[user] = sol[slot];
    }
    if energies.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(Error::InfeasibleErrorVariance { margin: f64::NAN });
    }
    Ok(energies)
}

/// Per-user SIC energies under estimation error variance `beta2`.
///
/// Perfect CSI uses the telescoping closed form; otherwise the linear
/// system is solved in the default decoding order.
pub fn finite_k_sic_energy(instance: &FiniteKInstance) -> Result<Vec<f64>> {
    instance.validate()?;
    let clean = finite_k_closed_form(instance)?;
    if instance.beta2 == 0.0 {
        return Ok(clean);
    }
    // The estimation error couples all users through a rank-one term; the
    // system is solvable iff 1 - beta2 * sum(E(0)) / Z0 > 0.
    let total: f64 = clean.iter().sum::<f64>() / instance.noise_density;
    let margin = 1.0 - instance.beta2 * total;
    if margin <= 0.0 {
        return Err(Error::InfeasibleErrorVariance { margin });
    }
    finite_k_energy_in_order(instance, &instance.default_order())
}

/// First-order approximation `(1 + beta2 / K * sum rho_k / h_k) E(0)`.
pub fn finite_k_approximation(instance: &FiniteKInstance) -> Result<Vec<f64>> {
    let clean = finite_k_closed_form(instance)?;
    let rho = instance.rho();
    let trace: f64 = rho.iter().zip(&instance.gains).map(|(r, h)| r / h).sum();
    let factor = 1.0 + instance.beta2 / instance.len() as f64 * trace;
    Ok(clean.into_iter().map(|e| e * factor).collect())
}
