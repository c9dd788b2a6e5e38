//! Scheduling probabilities, their fading thresholds and the chain they induce.

use oppsched::channel::ExpFading;
use oppsched::fsmc::{build_policy, drop_rate_transitions, solve_chain, thresholds_from_policy, QosSpec};

fn main() -> oppsched::Result<()> {
    // One buffered packet, one tolerated drop in a row.
    let spec = QosSpec::homogeneous(1, 1, 0.3, Some(0.05), 0.02);
    let rows = vec![vec![0.55], vec![0.25, 0.45], vec![0.3, 0.6]];
    let policy = build_policy(rows, &spec)?;

    println!("transition matrix:");
    let q = policy.matrix();
    for p in 0..q.nrows() {
        let row: Vec<String> = (0..q.ncols()).map(|c| format!("{:.4}", q[(p, c)])).collect();
        println!("  {}", row.join("  "));
    }

    let table = thresholds_from_policy(&policy, &ExpFading);
    for (p, k) in table.kappa.iter().enumerate() {
        println!("state {p}: thresholds {k:.4?}");
    }

    let sol = solve_chain(&policy)?;
    println!("pi = {:.6?}", sol.pi);
    println!("theta_r = {:.6} (transition form {:.6})", sol.theta_r, drop_rate_transitions(&policy, &sol.pi));
    println!("gamma   = {:.6}", sol.gamma);
    Ok(())
}
