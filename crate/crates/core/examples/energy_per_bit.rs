//! Energy per bit of a fixed scheduler, with and without estimation error.

use oppsched::channel::{ExpFading, SystemConfig};
use oppsched::energy::{energy_cso_unchecked, energy_cst, energy_report, to_db, PointMassChannel, VuChannel, VuDistribution};
use oppsched::fsmc::{build_policy, solve_chain, thresholds_from_policy, QosSpec};

fn main() -> oppsched::Result<()> {
    let config = SystemConfig::default();

    // All users at unit gain: the integral collapses to (2^C - 1) / C.
    let point = energy_cst(&PointMassChannel(1.0), &config)?;
    println!("point mass: {point:.9} ({:.4} dB)", to_db(point));

    let spec = QosSpec::homogeneous(0, 1, 0.3, None, 0.02);
    let policy = build_policy(vec![vec![0.7], vec![0.9]], &spec)?;
    let sol = solve_chain(&policy)?;
    let report = energy_report(&policy, &sol, &config, None)?;
    println!("toy scheduler: {:.9} ({:.4} dB)", report.ebn0_cst, report.ebn0_cst_db);

    let vu = VuDistribution::new(&policy, &sol.pi, &thresholds_from_policy(&policy, &ExpFading))?;
    println!("VU fading starts at {:.4}, mean packets per slot {:.4}", vu.lowest_support(), vu.mean_scheduled());
    let channel = VuChannel::new(&vu, config.pathloss());
    for beta2 in [0.0, 0.01, 0.05, 0.1] {
        let e = energy_cso_unchecked(&channel, &config, beta2)?;
        println!("beta2 = {beta2:<5} -> {:.4} dB", to_db(e));
    }
    Ok(())
}
