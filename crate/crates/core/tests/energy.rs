mod common;

use approx::assert_relative_eq;
use oppsched::channel::{ExpFading, PathLoss, SystemConfig};
use oppsched::energy::{
    cso_penalty, energy_cso, energy_cso_unchecked, energy_cst, finite_k_approximation, finite_k_closed_form,
    finite_k_energy_in_order, finite_k_sic_energy, FiniteKInstance, PointMassChannel, VuChannel, VuDistribution,
};
use oppsched::fsmc::{build_policy, solve_chain, thresholds_from_policy, QosSpec};
use oppsched::Error;
use proptest::prelude::*;
use rand::Rng;

fn vu_energy(rows: Vec<Vec<f64>>, b: usize, n: usize, nu_d: f64, config: &SystemConfig) -> (f64, Vec<f64>) {
    let spec = QosSpec::homogeneous(b, n, 0.3, None, nu_d);
    let policy = build_policy(rows, &spec).unwrap();
    let sol = solve_chain(&policy).unwrap();
    let vu = VuDistribution::new(&policy, &sol.pi, &thresholds_from_policy(&policy, &ExpFading)).unwrap();
    let e = energy_cst(&VuChannel::new(&vu, config.pathloss()), config).unwrap();
    (e, sol.pi)
}

#[test]
fn toy_energy_matches_reference_quadrature() {
    // Computed separately with a general-purpose adaptive integrator.
    let (e, _) = vu_energy(vec![vec![0.7], vec![0.9]], 0, 1, 0.02, &SystemConfig::default());
    assert_relative_eq!(e, 0.522_552_166_7, epsilon = 1e-7);
}

#[test]
fn point_mass_closed_forms() {
    let config = SystemConfig::default();
    for x0 in [0.25, 1.0, 7.5] {
        let e = energy_cst(&PointMassChannel(x0), &config).unwrap();
        assert_relative_eq!(e, (2f64.sqrt() - 1.0) / (0.5 * x0), epsilon = 1e-9);
        let p = cso_penalty(&PointMassChannel(x0), &config).unwrap();
        // (4^C - 1) / (2 C x0^2) with C = 1/2.
        assert_relative_eq!(p, 1.0 / (x0 * x0), epsilon = 1e-9);
    }
}

#[test]
fn energy_matches_monte_carlo() {
    let config = SystemConfig::default();
    let mut rng = common::rng(5);
    for (b, n) in [(0, 1), (1, 1), (2, 2)] {
        let rows = common::random_rows(b, n, &mut rng);
        let (e, pi) = vu_energy(rows.clone(), b, n, 0.02, &config);
        let mut gains = common::vu_gains(&rows, &pi, b, 0.01, 2.0, 1_000_000, &mut rng);
        let mc = common::mc_energy(&mut gains, 0.5);
        assert!((e - mc).abs() / mc < 0.01, "B={b} N={n}: {e} vs {mc}");
    }
}

#[test]
fn general_exponent_uses_quadrature() {
    let config = SystemConfig {
        pathloss_exponent: 3.5,
        ..SystemConfig::default()
    };
    let rows = vec![vec![0.6], vec![0.3, 0.5], vec![0.4, 0.5]];
    let (e, pi) = vu_energy(rows.clone(), 1, 1, 0.05, &config);
    let mut gains = common::vu_gains(&rows, &pi, 1, 0.01, 3.5, 1_000_000, &mut common::rng(8));
    let mc = common::mc_energy(&mut gains, 0.5);
    assert!((e - mc).abs() / mc < 0.01, "{e} vs {mc}");
}

#[test]
fn cso_is_cst_at_zero_and_rejects_lossy_links() {
    let config = SystemConfig::default();
    let spec = QosSpec::homogeneous(1, 1, 0.3, None, 0.0);
    let policy = build_policy(vec![vec![0.5], vec![0.2, 0.5], vec![0.3, 0.6]], &spec).unwrap();
    let sol = solve_chain(&policy).unwrap();
    let vu = VuDistribution::new(&policy, &sol.pi, &thresholds_from_policy(&policy, &ExpFading)).unwrap();
    let ch = VuChannel::new(&vu, config.pathloss());
    assert_eq!(energy_cso(&ch, &config, 0.0).unwrap(), energy_cst(&ch, &config).unwrap());
    assert!(energy_cso(&ch, &config, 0.1).unwrap() > energy_cst(&ch, &config).unwrap());

    let lossy = QosSpec::homogeneous(1, 1, 0.3, None, 0.02);
    let policy = build_policy(vec![vec![0.5], vec![0.2, 0.5], vec![0.3, 0.6]], &lossy).unwrap();
    let sol = solve_chain(&policy).unwrap();
    let vu = VuDistribution::new(&policy, &sol.pi, &thresholds_from_policy(&policy, &ExpFading)).unwrap();
    let ch = VuChannel::new(&vu, config.pathloss());
    assert!(matches!(energy_cso(&ch, &config, 0.1), Err(Error::LossyTransmission(_))));
    assert!(energy_cso_unchecked(&ch, &config, 0.1).is_ok());
}

#[test]
fn zero_threshold_diverges() {
    let config = SystemConfig::default();
    let spec = QosSpec::homogeneous(0, 1, 0.3, None, 0.0);
    let policy = build_policy(vec![vec![0.5], vec![1.0]], &spec).unwrap();
    let sol = solve_chain(&policy).unwrap();
    let vu = VuDistribution::new(&policy, &sol.pi, &thresholds_from_policy(&policy, &ExpFading)).unwrap();
    assert_eq!(energy_cst(&VuChannel::new(&vu, config.pathloss()), &config), Err(Error::Divergent));
}

#[test]
fn higher_thresholds_cost_less_energy() {
    // Scheduling fewer, stronger slots lowers the energy per bit.
    let config = SystemConfig::default();
    let mut last = f64::INFINITY;
    for a in [0.95, 0.8, 0.6, 0.4, 0.2] {
        let (e, _) = vu_energy(vec![vec![a], vec![a]], 0, 1, 0.0, &config);
        assert!(e < last);
        last = e;
    }
}

#[test]
fn vu_distribution_is_normalised() {
    let mut rng = common::rng(17);
    for _ in 0..50 {
        let rows = common::random_rows(2, 2, &mut rng);
        let spec = QosSpec::homogeneous(2, 2, 0.3, None, 0.02);
        let policy = build_policy(rows, &spec).unwrap();
        let sol = solve_chain(&policy).unwrap();
        let vu = VuDistribution::new(&policy, &sol.pi, &thresholds_from_policy(&policy, &ExpFading)).unwrap();
        assert_relative_eq!(vu.cdf(60.0), 1.0, epsilon = 1e-12);
        for u in [0.01, 0.3, 0.7, 0.99] {
            assert_relative_eq!(vu.cdf(vu.quantile(u)), u, epsilon = 1e-10);
        }
    }
}

#[test]
fn pathloss_by_hand() {
    let pl = PathLoss::new(0.01, 2.0).unwrap();
    assert_relative_eq!(pl.cdf(4.0), 1.0 - (0.25 - 1e-4) / (1.0 - 1e-4), epsilon = 1e-12);
    assert_relative_eq!(pl.cdf(4.0), 0.750_075_0, epsilon = 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn finite_k_oracles(seed in any::<u64>(), k in 1usize..10) {
        let mut rng = common::rng(seed);
        let gains: Vec<f64> = (0..k).map(|_| common::pathloss_sample(0.01, 2.0, &mut rng) * -(1.0 - rng.random::<f64>()).ln() + 1e-3).collect();
        let rates: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 0.5).collect();
        let inst = FiniteKInstance { gains: gains.clone(), rates: rates.clone(), beta2: 0.0, noise_density: 1.0 };

        // Telescoping form, linear system and independent elimination agree.
        let closed = finite_k_closed_form(&inst).unwrap();
        let linear = finite_k_energy_in_order(&inst, &inst.default_order()).unwrap();
        let oracle = common::sic_energies(&gains, &rates, 0.0, 1.0);
        for i in 0..k {
            prop_assert!((closed[i] - linear[i]).abs() <= 1e-9 * closed[i].max(1.0));
            prop_assert!((closed[i] - oracle[i]).abs() <= 1e-9 * closed[i].max(1.0));
        }

        let total: f64 = closed.iter().sum();
        let mut last = total;
        for beta2 in [0.001, 0.01, 0.05] {
            let inst = FiniteKInstance { beta2, ..inst.clone() };
            match finite_k_sic_energy(&inst) {
                Ok(e) => {
                    let oracle = common::sic_energies(&gains, &rates, beta2, 1.0);
                    for i in 0..k {
                        prop_assert!((e[i] - oracle[i]).abs() <= 1e-8 * oracle[i].max(1e-12));
                    }
                    let sum: f64 = e.iter().sum();
                    // Closed form of the rank-one update on the total.
                    prop_assert!((sum - total / (1.0 - beta2 * total)).abs() <= 1e-8 * sum);
                    prop_assert!(sum > last);
                    last = sum;
                }
                Err(Error::InfeasibleErrorVariance { margin }) => {
                    prop_assert!(margin <= 0.0);
                    prop_assert!(1.0 - beta2 * total <= 0.0);
                    break;
                }
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }
}

#[test]
fn decoding_strongest_first_is_cheapest() {
    let inst = FiniteKInstance::from_loads(vec![0.5, 3.0, 1.2], &[1.0, 1.0, 1.0], 1.5, 0.02, 1.0);
    let best: f64 = finite_k_sic_energy(&inst).unwrap().iter().sum();
    for order in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [2, 0, 1], [2, 1, 0]] {
        let e: f64 = finite_k_energy_in_order(&inst, &order).unwrap().iter().sum();
        assert!(e >= best - 1e-12, "{order:?}: {e} < {best}");
    }
}

#[test]
fn first_order_error_vanishes() {
    let inst = FiniteKInstance::from_loads(vec![0.7, 1.9, 4.0, 12.0], &[1.0, 0.5, 1.5, 1.0], 2.0, 0.0, 1.0);
    let err = |beta2: f64| {
        let i = FiniteKInstance { beta2, ..inst.clone() };
        let exact: f64 = finite_k_sic_energy(&i).unwrap().iter().sum();
        let approx: f64 = finite_k_approximation(&i).unwrap().iter().sum();
        (approx - exact).abs()
    };
    assert!(err(0.01) / err(0.001) >= 5.0);
    assert!(err(1e-5) < 1e-4);
}
