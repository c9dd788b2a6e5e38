//! Constrained energy minimisation by simulated annealing.

use oppsched::annealer::{anneal, AnnealSchedule};
use oppsched::channel::SystemConfig;
use oppsched::fsmc::QosSpec;

fn main() -> oppsched::Result<()> {
    let spec = QosSpec::homogeneous(0, 1, 0.3, Some(0.01), 0.02);
    let config = SystemConfig::default();
    let schedule = AnnealSchedule::default();

    for seed in 0..3 {
        let r = anneal(&spec, &config, &schedule, seed)?;
        let best = r.best.as_ref().expect("the toy problem is feasible");
        println!(
            "seed {seed}: {:.4} dB  theta_r {:.4}  gamma {:.5}  T0 {:.3}  c_sa {:.2}  {} energies",
            r.best_energy_db(),
            best.solution.theta_r,
            best.solution.gamma,
            r.t0,
            r.c_sa,
            r.evaluations
        );
        println!("         rows {:.4?}", best.rows);
    }
    Ok(())
}
