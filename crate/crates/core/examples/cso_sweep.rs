//! Energy of an optimised scheduler as the estimation error grows.

use oppsched::annealer::{anneal, AnnealSchedule};
use oppsched::channel::{ExpFading, SystemConfig};
use oppsched::energy::{cso_penalty, energy_cso, to_db, VuChannel, VuDistribution};
use oppsched::fsmc::{thresholds_from_policy, QosSpec};

fn main() -> oppsched::Result<()> {
    let config = SystemConfig::default();
    let spec = QosSpec::homogeneous(1, 1, 0.3, Some(0.01), 0.0);
    let r = anneal(&spec, &config, &AnnealSchedule::default(), 0)?;
    let best = r.best.expect("feasible");
    let vu = VuDistribution::new(&best.policy, &best.solution.pi, &thresholds_from_policy(&best.policy, &ExpFading))?;
    let channel = VuChannel::new(&vu, config.pathloss());
    println!("penalty per unit beta2: {:.6}", cso_penalty(&channel, &config)?);
    for beta2 in [0.0, 0.02, 0.04, 0.06, 0.08, 0.1] {
        let e = energy_cso(&channel, &config, beta2)?;
        println!("beta2 {beta2:<5} {e:.6} ({:.4} dB)", to_db(e));
    }
    Ok(())
}
