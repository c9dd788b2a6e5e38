//! Propagation model: distance-dependent path loss for users spread uniformly
//! over a cell with a forbidden inner disc, unit-mean exponential block
//! fading, and the distribution of their product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadOptions};

/// The generator used by every stochastic operation in the crate.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child generator, advancing the parent.
pub fn split_rng(parent: &mut SimRng) -> SimRng {
    let mut seed = <ChaCha8Rng as SeedableRng>::Seed::default();
    parent.fill(&mut seed);
    ChaCha8Rng::from_seed(seed)
}

/// Global physical parameters of the cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    /// System spectral efficiency C in bits/s/Hz.
    pub spectral_efficiency: f64,
    /// Radius of the forbidden region around the base station, relative to
    /// the cell radius.
    pub delta: f64,
    pub pathloss_exponent: f64,
    /// Noise power spectral density Z0.
    pub noise_density: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            spectral_efficiency: 0.5,
            delta: 0.01,
            pathloss_exponent: 2.0,
            noise_density: 1.0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.spectral_efficiency > 0.0 && self.spectral_efficiency.is_finite()) {
            return Err(invalid("spectral_efficiency", "must be positive"));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("delta", "must lie in (0, 1]"));
        }
        if !(self.pathloss_exponent > 0.0 && self.pathloss_exponent.is_finite()) {
            return Err(invalid("pathloss_exponent", "must be positive"));
        }
        if !(self.noise_density > 0.0 && self.noise_density.is_finite()) {
            return Err(invalid("noise_density", "must be positive"));
        }
        Ok(())
    }

    pub fn pathloss(&self) -> PathLoss {
        PathLoss {
            delta: self.delta,
            exponent: self.pathloss_exponent,
        }
    }
}

/// One channel realisation `h = s * f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub pathloss: f64,
    pub fading: f64,
    pub gain: f64,
}

impl ChannelSample {
    pub fn new(pathloss: f64, fading: f64) -> Self {
        Self {
            pathloss,
            fading,
            gain: pathloss * fading,
        }
    }
}

/// Path-loss gain distribution. Gains are normalised to one at the cell
/// border and reach `delta^-exponent` at the edge of the forbidden region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    delta: f64,
    exponent: f64,
}

impl PathLoss {
    pub fn new(delta: f64, exponent: f64) -> Result<Self> {
        SystemConfig {
            delta,
            pathloss_exponent: exponent,
            ..SystemConfig::default()
        }
        .validate()?;
        Ok(Self { delta, exponent })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Upper edge of the support, `delta^-exponent`.
    pub fn max_gain(&self) -> f64 {
        self.delta.powf(-self.exponent)
    }

    /// True when the support collapses to the single point `s = 1`.
    pub fn is_degenerate(&self) -> bool {
        self.delta >= 1.0
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 1.0 {
            return 0.0;
        }
        if self.is_degenerate() || x >= self.max_gain() {
            return 1.0;
        }
        let d2 = self.delta * self.delta;
        let v = 1.0 - (x.powf(-2.0 / self.exponent) - d2) / (1.0 - d2);
        v.clamp(0.0, 1.0)
    }

    /// Density of the interior branch, obtained by differentiating the CDF.
    pub fn density(&self, x: f64) -> f64 {
        if self.is_degenerate() || x < 1.0 || x >= self.max_gain() {
            return 0.0;
        }
        let d2 = self.delta * self.delta;
        (2.0 / self.exponent) * x.powf(-2.0 / self.exponent - 1.0) / (1.0 - d2)
    }

    /// Inverse CDF on `[0, 1)`; `u = 1` maps to the upper edge.
    pub fn quantile(&self, u: f64) -> f64 {
        if self.is_degenerate() || u <= 0.0 {
            return 1.0;
        }
        if u >= 1.0 {
            return self.max_gain();
        }
        let d2 = self.delta * self.delta;
        let base = d2 + (1.0 - u) * (1.0 - d2);
        base.powf(-self.exponent / 2.0).clamp(1.0, self.max_gain())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Density of `v = ln s` on `[0, -exponent * ln delta]`.
    fn log_density(&self, v: f64) -> f64 {
        let d2 = self.delta * self.delta;
        (2.0 / self.exponent) * (-2.0 * v / self.exponent).exp() / (1.0 - d2)
    }
}

/// A fading-amplitude distribution on `[0, inf)` that can be mixed with the
/// path loss.
pub trait FadingCdf: Sync {
    fn cdf(&self, y: f64) -> f64;

    /// Points where the CDF is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `int_0^y F(u) du`, when available in closed form.
    fn integrated_cdf(&self, _y: f64) -> Option<f64> {
        None
    }
}

/// Unit-mean exponential small-scale fading (Rayleigh power gain).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExpFading;

impl ExpFading {
    pub fn cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            -(-y).exp_m1()
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            0.0
        } else {
            (-y).exp()
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", format!("{p} is not a probability")));
        }
        if p >= 1.0 {
            return Err(Error::UnboundedSupport);
        }
        Ok(-(-p).ln_1p())
    }

    /// Inverse of the survival function: the value exceeded with
    /// probability `s`. `s = 0` maps to infinity.
    pub fn survival_quantile(&self, s: f64) -> f64 {
        if s <= 0.0 {
            f64::INFINITY
        } else if s >= 1.0 {
            0.0
        } else {
            -s.ln()
        }
    }

    pub fn survival(&self, y: f64) -> f64 {
        if y <= 0.0 {
            1.0
        } else {
            (-y).exp()
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.sample(rand_distr::Exp1)
    }
}

impl FadingCdf for ExpFading {
    fn cdf(&self, y: f64) -> f64 {
        ExpFading::cdf(self, y)
    }

    fn integrated_cdf(&self, y: f64) -> Option<f64> {
        if y <= 0.0 {
            return Some(0.0);
        }
        Some(exp_tail2(y))
    }
}

/// `d - (1 - e^-d)`, accurate for small `d`.
pub(crate) fn exp_tail2(d: f64) -> f64 {
    if d < 1e-3 {
        d * d * (0.5 - d * (1.0 / 6.0 - d / 24.0))
    } else {
        d + (-d).exp_m1()
    }
}

/// Draws one channel realisation with exponential fading.
pub fn sample_channel<R: Rng + ?Sized>(pathloss: &PathLoss, rng: &mut R) -> ChannelSample {
    ChannelSample::new(pathloss.sample(rng), ExpFading.sample(rng))
}

/// `P(s * f <= x)` by adaptive quadrature over the log path-loss support.
pub fn gain_cdf<F: FadingCdf + ?Sized>(
    x: f64,
    pathloss: &PathLoss,
    fading: &F,
    opts: QuadOptions,
) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if pathloss.is_degenerate() {
        return Ok(fading.cdf(x));
    }
    let top = pathloss.max_gain().ln();
    let mut points = vec![0.0, top];
    for k in fading.breakpoints() {
        if k > 0.0 && k.is_finite() {
            let v = (x / k).ln();
            if v > 0.0 && v < top {
                points.push(v);
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let r = integrate_with_breaks(
        |v| fading.cdf(x * (-v).exp()) * pathloss.log_density(v),
        &points,
        opts,
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// `P(s * f <= x)` using the closed-form antiderivative of the fading CDF.
///
/// Only available for the free-space exponent 2, where the path-loss measure
/// becomes uniform in `1 / s` and the mixture reduces to
/// `(G(x) - G(x / S)) / (x (1 - delta^2))` with `G' = F`.
pub fn gain_cdf_exact<F: FadingCdf + ?Sized>(x: f64, pathloss: &PathLoss, fading: &F) -> Option<f64> {
    if x <= 0.0 {
        return Some(0.0);
    }
    if pathloss.is_degenerate() {
        return Some(fading.cdf(x));
    }
    if pathloss.exponent != 2.0 {
        return None;
    }
    let d2 = pathloss.delta * pathloss.delta;
    let hi = fading.integrated_cdf(x)?;
    let lo = fading.integrated_cdf(x * d2)?;
    Some(((hi - lo) / (x * (1.0 - d2))).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_pl() -> PathLoss {
        SystemConfig::default().pathloss()
    }

    #[test]
    fn pathloss_cdf_edges() {
        let pl = default_pl();
        assert_eq!(pl.cdf(0.5), 0.0);
        assert_relative_eq!(pl.cdf(1.0), 0.0, epsilon = 1e-15);
        assert_eq!(pl.cdf(pl.max_gain()), 1.0);
        assert_eq!(pl.cdf(1e9), 1.0);
        let expected = 1.0 - (0.25 - 1e-4) / (1.0 - 1e-4);
        assert_relative_eq!(pl.cdf(4.0), expected, epsilon = 1e-15);
        assert_relative_eq!(pl.cdf(4.0), 0.750_075_0, epsilon = 1e-7);
    }

    #[test]
    fn pathloss_quantile_edges() {
        let pl = default_pl();
        assert_eq!(pl.quantile(0.0), 1.0);
        assert_relative_eq!(pl.quantile(1.0 - 1e-15), pl.max_gain(), max_relative = 1e-9);
        let u = 1.0 - (0.25 - 1e-4) / (1.0 - 1e-4);
        assert_relative_eq!(pl.quantile(u), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn density_matches_finite_difference() {
        let pl = PathLoss::new(0.05, 3.5).unwrap();
        for &x in &[1.5, 7.0, 40.0, 1000.0] {
            let h = 1e-6 * x;
            let fd = (pl.cdf(x + h) - pl.cdf(x - h)) / (2.0 * h);
            assert_relative_eq!(pl.density(x), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn fading_closed_forms() {
        assert_eq!(ExpFading.cdf(0.0), 0.0);
        assert_eq!(ExpFading.pdf(0.0), 1.0);
        assert_relative_eq!(ExpFading.quantile(0.5).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(ExpFading.quantile(1.0), Err(Error::UnboundedSupport));
        assert_eq!(ExpFading.survival_quantile(0.0), f64::INFINITY);
        for &y in &[0.0, 1e-9, 0.3, 2.0, 12.0] {
            let back = ExpFading.quantile(ExpFading.cdf(y)).unwrap();
            assert_relative_eq!(back, y, epsilon = 1e-12, max_relative = 1e-9);
        }
    }

    #[test]
    fn gain_cdf_limits() {
        let pl = default_pl();
        let o = QuadOptions::default();
        assert_eq!(gain_cdf(0.0, &pl, &ExpFading, o).unwrap(), 0.0);
        let far = gain_cdf(1e7, &pl, &ExpFading, o).unwrap();
        assert!(far > 1.0 - 1e-9);
        let point = PathLoss::new(1.0, 2.0).unwrap();
        for &x in &[0.1, 1.0, 3.0] {
            assert_eq!(gain_cdf(x, &point, &ExpFading, o).unwrap(), ExpFading.cdf(x));
        }
    }

    #[test]
    fn exact_and_quadrature_mixing_agree() {
        let pl = default_pl();
        for &x in &[1e-3, 0.05, 0.7, 1.0, 12.0, 800.0, 3e4] {
            let q = gain_cdf(x, &pl, &ExpFading, QuadOptions::absolute(1e-12)).unwrap();
            let e = gain_cdf_exact(x, &pl, &ExpFading).unwrap();
            assert_relative_eq!(q, e, epsilon = 1e-10);
        }
        assert!(gain_cdf_exact(1.0, &PathLoss::new(0.01, 3.0).unwrap(), &ExpFading).is_none());
    }

    #[test]
    fn split_rng_is_deterministic() {
        let mut a = rng_from_seed(7);
        let mut b = rng_from_seed(7);
        let mut ca = split_rng(&mut a);
        let mut cb = split_rng(&mut b);
        assert_eq!(ca.random::<u64>(), cb.random::<u64>());
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }
}
