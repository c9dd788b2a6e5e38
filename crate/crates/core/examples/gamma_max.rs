//! Violation probability of the unconstrained optimum as the CCON grows.

use oppsched::annealer::{gamma_max, AnnealSchedule};
use oppsched::channel::SystemConfig;
use oppsched::fsmc::QosSpec;

fn main() -> oppsched::Result<()> {
    let config = SystemConfig::default();
    let schedule = AnnealSchedule::default();
    println!("{:>2} {:>10} {:>12} {:>10}", "N", "gamma_m", "0.3^(N+1)", "Eb/N0 dB");
    for n in 1..=5 {
        let spec = QosSpec::homogeneous(0, n, 0.3, None, 0.02);
        let (gm, r) = gamma_max(&spec, &config, &schedule, 0)?;
        println!(
            "{n:>2} {:>10.6} {:>12.6} {:>10.4}",
            gm.unwrap_or(f64::NAN),
            0.3f64.powi(n as i32 + 1),
            r.best_energy_db()
        );
    }
    Ok(())
}
