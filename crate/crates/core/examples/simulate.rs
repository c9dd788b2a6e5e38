//! Slot-level simulation checked against the analytic chain.

use oppsched::channel::{rng_from_seed, ExpFading, SystemConfig};
use oppsched::energy::energy_report;
use oppsched::fsmc::{build_policy, solve_chain, thresholds_from_policy, QosSpec};
use oppsched::simulator::{simulate, validate_against_chain};

fn main() -> oppsched::Result<()> {
    let config = SystemConfig::default();
    let spec = QosSpec::homogeneous(1, 2, 0.3, None, 0.02);
    let rows = vec![vec![0.6], vec![0.3, 0.4], vec![0.4, 0.4], vec![0.5, 0.4]];
    let policy = build_policy(rows, &spec)?;
    let sol = solve_chain(&policy)?;
    let table = thresholds_from_policy(&policy, &ExpFading);

    let mut rng = rng_from_seed(42);
    let sim = simulate(&table, &spec, &config, 1_000_000, &mut rng)?;
    let verdict = validate_against_chain(&sim, &sol, 3.0);
    println!("{:>8} {:>10} {:>10} {:>6}", "metric", "simulated", "analytic", "z");
    for c in &verdict.checks {
        println!("{:>8} {:>10.6} {:>10.6} {:>6.2}", c.metric, c.empirical, c.analytic, c.z);
    }
    println!("verdict: {:?}", verdict.kind);

    let analytic = energy_report(&policy, &sol, &config, None)?.ebn0_cst;
    println!("energy: simulated {:.5}, analytic {analytic:.5}", sim.energy_estimate);
    println!("longest drop run: {} (burst counts {:?})", sim.longest_burst(), &sim.burst_histogram[1..]);
    Ok(())
}
