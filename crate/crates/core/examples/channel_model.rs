//! Path-loss and fading model of the cell, and the CDF of their product.

use oppsched::channel::{gain_cdf, gain_cdf_exact, rng_from_seed, sample_channel, ExpFading, SystemConfig};
use oppsched::quadrature::QuadOptions;

fn main() -> oppsched::Result<()> {
    let config = SystemConfig::default();
    let pl = config.pathloss();
    println!("path loss: delta = {}, exponent = {}, max gain = {}", pl.delta(), pl.exponent(), pl.max_gain());

    println!("{:>8} {:>12} {:>14} {:>14}", "x", "P(s<=x)", "gain cdf", "quadrature");
    for x in [0.5, 1.0, 4.0, 100.0, 5000.0] {
        let exact = gain_cdf_exact(x, &pl, &ExpFading).expect("closed form at exponent 2");
        let quad = gain_cdf(x, &pl, &ExpFading, QuadOptions::absolute(1e-12))?;
        println!("{x:>8} {:>12.7} {exact:>14.10} {quad:>14.10}", pl.cdf(x));
    }

    let mut rng = rng_from_seed(1);
    let n = 200_000;
    let below = (0..n).filter(|_| sample_channel(&pl, &mut rng).gain <= 4.0).count();
    println!("empirical P(gain <= 4) over {n} draws: {:.4}", below as f64 / n as f64);
    Ok(())
}
