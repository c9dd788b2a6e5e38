mod common;

use approx::assert_relative_eq;
use oppsched::channel::ExpFading;
use oppsched::fsmc::{
    build_heterogeneous_policy, build_policy, drop_rate, drop_rate_transitions, policy_for, policy_from_thresholds,
    scheduled_count, solve_chain, thresholds_from_policy, QosSpec,
};
use oppsched::Error;
use proptest::prelude::*;

fn rows_strategy() -> impl Strategy<Value = (usize, usize, f64, u64)> {
    (0usize..=3, 1usize..=3, 0.0f64..0.3, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chain_identities((b, n, nu_d, seed) in rows_strategy()) {
        let rows = common::random_rows(b, n, &mut common::rng(seed));
        let spec = QosSpec::homogeneous(b, n, 0.3, None, nu_d);
        let policy = build_policy(rows.clone(), &spec).unwrap();
        prop_assert!(policy.max_row_error() <= 1e-12);

        let sol = solve_chain(&policy).unwrap();
        prop_assert!((sol.pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(sol.pi.iter().all(|p| *p >= 0.0));
        prop_assert!((drop_rate(&policy, &sol.pi) - drop_rate_transitions(&policy, &sol.pi)).abs() < 1e-12);
        prop_assert!(sol.gamma <= sol.theta_r + 1e-15);

        // Independent matrix and stationary distribution.
        let q = common::transition_matrix(&rows, b, n, nu_d, None);
        let lib = policy.matrix();
        for i in 0..q.len() {
            for j in 0..q.len() {
                prop_assert!((q[i][j] - lib[(i, j)]).abs() < 1e-15);
            }
        }
        let pi = common::stationary(&q);
        for (a, e) in sol.pi.iter().zip(&pi) {
            prop_assert!((a - e).abs() < 1e-9, "{:?} vs {:?}", sol.pi, pi);
        }
    }

    #[test]
    fn threshold_round_trip((b, n, _nu, seed) in rows_strategy()) {
        let rows = common::random_rows(b, n, &mut common::rng(seed));
        let spec = QosSpec::homogeneous(b, n, 0.3, None, 0.02);
        let policy = build_policy(rows.clone(), &spec).unwrap();
        let table = thresholds_from_policy(&policy, &ExpFading);
        let oracle = common::thresholds(&rows);
        for (r, o) in table.kappa.iter().zip(&oracle) {
            for (x, y) in r.iter().zip(o) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
            prop_assert!(r.windows(2).all(|w| w[0] >= w[1]));
        }
        let back = policy_from_thresholds(&table, &ExpFading).unwrap();
        for (r, o) in back.iter().zip(&rows) {
            for (x, y) in r.iter().zip(o) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scheduled_counts_match_oracle((b, n, _nu, seed) in rows_strategy(), f in 0.0f64..6.0) {
        let rows = common::random_rows(b, n, &mut common::rng(seed));
        let spec = QosSpec::homogeneous(b, n, 0.3, None, 0.02);
        let policy = build_policy(rows.clone(), &spec).unwrap();
        let table = thresholds_from_policy(&policy, &ExpFading);
        let kappa = common::thresholds(&rows);
        for p in 0..=b + n {
            prop_assert_eq!(scheduled_count(p, f, &table, b), common::packets(&kappa, p, b, f));
        }
    }

    #[test]
    fn heterogeneous_row_identity(b in 0usize..=2, seed in any::<u64>(), z2 in 0.0f64..=1.0, nu_d in 0.0f64..0.2) {
        let rows = common::random_rows(b, 2, &mut common::rng(seed));
        let zeta = vec![1.0 - z2, z2];
        let spec = QosSpec::heterogeneous(b, zeta.clone(), 0.3, None, nu_d);
        let policy = build_heterogeneous_policy(rows.clone(), &spec).unwrap();
        prop_assert!(policy.max_row_error() <= 1e-12);
        let nu_s = 1.0 - nu_d;
        let d_b = 1.0 - nu_s * rows[b].iter().sum::<f64>();
        let skip: f64 = (b + 2..=b + 2).map(|q| policy.q(b, q)).sum();
        prop_assert!((skip - (1.0 - zeta[1]) * d_b).abs() < 1e-15);
        prop_assert!((policy.q(b, b + 1) - zeta[1] * d_b).abs() < 1e-15);

        let q = common::transition_matrix(&rows, b, 2, nu_d, Some(&zeta));
        let sol = solve_chain(&policy).unwrap();
        let pi = common::stationary(&q);
        for (a, e) in sol.pi.iter().zip(&pi) {
            prop_assert!((a - e).abs() < 1e-9);
        }
        prop_assert!((drop_rate(&policy, &sol.pi) - drop_rate_transitions(&policy, &sol.pi)).abs() < 1e-12);
        prop_assert!(sol.gamma <= sol.theta_r + 1e-15);
    }
}

#[test]
fn toy_chain_by_hand() {
    let spec = QosSpec::homogeneous(0, 1, 0.3, None, 0.02);
    let policy = build_policy(vec![vec![0.7], vec![0.9]], &spec).unwrap();
    let sol = solve_chain(&policy).unwrap();
    // pi_0 = 0.882 / (0.882 + 0.314).
    assert_relative_eq!(sol.pi[0], 0.882 / 1.196, epsilon = 1e-12);
    assert_relative_eq!(sol.pi[0], 0.737459, epsilon = 1e-6);
    assert_relative_eq!(sol.theta_r, sol.pi[1], epsilon = 1e-12);
    assert_relative_eq!(sol.gamma, 0.118 * 0.314 / 1.196, epsilon = 1e-12);
}

#[test]
fn shape_and_range_errors() {
    let spec = QosSpec::homogeneous(1, 1, 0.3, None, 0.02);
    assert!(matches!(build_policy(vec![vec![0.5]; 3], &spec), Err(Error::Shape(_))));
    let bad = vec![vec![0.5], vec![0.6, 0.6], vec![0.1, 0.1]];
    assert!(matches!(build_policy(bad, &spec), Err(Error::RowSum { row: 1, .. })));
    let neg = vec![vec![-0.1], vec![0.1, 0.1], vec![0.1, 0.1]];
    assert!(matches!(build_policy(neg, &spec), Err(Error::ProbabilityRange { row: 0, .. })));
}

#[test]
fn never_scheduling_chain_is_rejected() {
    // Every row empty: the chain is absorbed at M and never returns.
    let spec = QosSpec::homogeneous(0, 2, 0.3, None, 0.0);
    let policy = policy_for(vec![vec![0.0]; 3], &spec).unwrap();
    let sol = solve_chain(&policy).unwrap();
    assert_relative_eq!(sol.pi[2], 1.0, epsilon = 1e-12);
    assert_relative_eq!(sol.gamma, 1.0, epsilon = 1e-12);
}
