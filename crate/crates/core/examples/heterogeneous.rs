//! Mixed population of users with different continuity constraints.

use oppsched::annealer::{anneal, AnnealSchedule};
use oppsched::channel::SystemConfig;
use oppsched::fsmc::QosSpec;

fn main() -> oppsched::Result<()> {
    let config = SystemConfig::default();
    let schedule = AnnealSchedule::default();
    println!("{:>6} {:>10} {:>8} {:>9}", "zeta2", "Eb/N0 dB", "theta_r", "gamma");
    for zeta2 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        // Error-free links, one buffered packet, users tolerating 1 or 2 drops.
        let spec = QosSpec::heterogeneous(1, vec![1.0 - zeta2, zeta2], 0.3, Some(1e-3), 0.0);
        let r = anneal(&spec, &config, &schedule, 0)?;
        let sol = r.solution().expect("feasible");
        println!("{zeta2:>6} {:>10.4} {:>8.4} {:>9.6}", r.best_energy_db(), sol.theta_r, sol.gamma);
    }
    Ok(())
}
