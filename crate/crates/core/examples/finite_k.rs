//! A finite group of SIC-decoded users under channel estimation error.

use oppsched::channel::{rng_from_seed, sample_channel, SystemConfig};
use oppsched::energy::{finite_k_approximation, finite_k_closed_form, finite_k_sic_energy, FiniteKInstance};

fn main() -> oppsched::Result<()> {
    let config = SystemConfig::default();
    let pl = config.pathloss();
    let mut rng = rng_from_seed(3);
    let gains: Vec<f64> = (0..8).map(|_| sample_channel(&pl, &mut rng).gain).collect();
    let loads = vec![1.0; gains.len()];

    let clean = FiniteKInstance::from_loads(gains.clone(), &loads, config.spectral_efficiency, 0.0, 1.0);
    let base: f64 = finite_k_closed_form(&clean)?.iter().sum();
    println!("perfect CSI total energy {base:.6}");

    println!("{:>7} {:>12} {:>12} {:>10}", "beta2", "exact", "first order", "rel err");
    for beta2 in [0.001, 0.01, 0.05, 0.1] {
        let inst = FiniteKInstance { beta2, ..clean.clone() };
        let exact: f64 = finite_k_sic_energy(&inst)?.iter().sum();
        let approx: f64 = finite_k_approximation(&inst)?.iter().sum();
        println!("{beta2:>7} {exact:>12.6} {approx:>12.6} {:>10.2e}", (approx - exact).abs() / exact);
    }
    Ok(())
}
