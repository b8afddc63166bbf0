mod common;

use pitchnet::dynamics::{gradient_check, potential, rhs};
use pitchnet::graph::{effective_resistance, effective_resistance_by_solve, laplacian};
use pitchnet::stability::{jacobian_elementwise, jacobian_laplacian_form};
use pitchnet::stationary::{enumerate_detailed_balance, realize, residual, LinkAssignment};
use pitchnet::{generators, integrate, Graph, IntegratorOptions, SystemParams};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    let corpus = common::small_corpus();
    (0..corpus.len()).prop_map(move |k| corpus[k].1.clone())
}

fn graph_and_state() -> impl Strategy<Value = (Graph, Vec<f64>, f64)> {
    (graph_strategy(), -3.0f64..3.0).prop_flat_map(|(g, r)| {
        let n = g.node_count();
        (Just(g), prop::collection::vec(-2.0f64..2.0, n), Just(r))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rhs_is_negative_gradient((g, x, r) in graph_and_state()) {
        let p = SystemParams::new(r);
        prop_assert!(gradient_check(&x, &g, p, 1e-5).unwrap() < 1e-6);
    }

    #[test]
    fn rhs_sums_to_zero((g, x, r) in graph_and_state()) {
        let f = rhs(&x, &g, SystemParams::new(r)).unwrap();
        let scale = f.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        prop_assert!(f.iter().sum::<f64>().abs() < 1e-12 * scale * g.node_count() as f64);
    }

    #[test]
    fn dynamics_are_translation_invariant((g, x, r) in graph_and_state(), c in -5.0f64..5.0) {
        let p = SystemParams::new(r);
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let a = rhs(&x, &g, p).unwrap();
        let b = rhs(&shifted, &g, p).unwrap();
        for (u, v) in a.iter().zip(b.iter()) {
            prop_assert!((u - v).abs() < 1e-9);
        }
        let va = potential(&x, &g, p).unwrap();
        let vb = potential(&shifted, &g, p).unwrap();
        prop_assert!((va - vb).abs() < 1e-9 * va.abs().max(1.0));
    }

    #[test]
    fn jacobian_is_symmetric_and_kills_constants((g, x, r) in graph_and_state()) {
        let j = jacobian_elementwise(&x, &g, SystemParams::new(r)).unwrap().matrix;
        prop_assert!((&j - j.transpose()).amax() == 0.0);
        let scale = j.amax().max(1.0);
        for row in j.row_iter() {
            prop_assert!(row.sum().abs() < 1e-12 * scale * g.node_count() as f64);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences((g, x, r) in graph_and_state()) {
        let p = SystemParams::new(r);
        let j = jacobian_elementwise(&x, &g, p).unwrap().matrix;
        let h = 1e-6;
        for c in 0..x.len() {
            let mut up = x.clone();
            let mut down = x.clone();
            up[c] += h;
            down[c] -= h;
            let fu = rhs(&up, &g, p).unwrap();
            let fd = rhs(&down, &g, p).unwrap();
            for i in 0..x.len() {
                let fd_entry = (fu[i] - fd[i]) / (2.0 * h);
                prop_assert!((fd_entry - j[(i, c)]).abs() < 1e-5 * j.amax().max(1.0));
            }
        }
    }

    #[test]
    fn resistance_is_a_metric(g in graph_strategy(), a in 0usize..8, b in 0usize..8, c in 0usize..8) {
        let n = g.node_count();
        let (a, b, c) = (a % n, b % n, c % n);
        prop_assume!(a != b && b != c && a != c);
        let ab = effective_resistance(&g, a, b).unwrap();
        let bc = effective_resistance(&g, b, c).unwrap();
        let ac = effective_resistance(&g, a, c).unwrap();
        prop_assert!(ab > 0.0);
        prop_assert!((ab - effective_resistance(&g, b, a).unwrap()).abs() < 1e-12);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!((ab - effective_resistance_by_solve(&g, a, b).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn potential_never_increases((g, x, r) in graph_and_state()) {
        let p = SystemParams::new(r);
        let opts = IntegratorOptions::for_params(p).with_dt(2e-3).with_sample_every(5);
        let traj = integrate(&x, &g, p, 2.0, &opts).unwrap();
        let v = traj.potentials(&g, p);
        for w in v.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
        let drift = (traj.final_state().mean() - traj.states[0].mean()).abs();
        prop_assert!(drift < 1e-9 * traj.final_time());
    }

    #[test]
    fn random_tree_assignments_are_stationary(seed in 0u64..1000, n in 2usize..8, r in 0.1f64..4.0) {
        let trees = generators::all_trees(n);
        let g = &trees[(seed as usize) % trees.len()];
        let symbols: Vec<i8> = (0..g.link_count())
            .map(|k| ((seed >> (k % 16)) % 3) as i8 - 1)
            .collect();
        let p = SystemParams::new(r);
        let d = realize(&LinkAssignment::new(symbols).unwrap(), g, p).unwrap();
        prop_assert!(residual(&d.realization, g, p).unwrap() < 1e-12 * r.max(1.0).powf(1.5));
        let a = jacobian_elementwise(&d.realization, g, p).unwrap().matrix;
        let b = jacobian_laplacian_form(&d, g, p).matrix;
        prop_assert!((a - b).amax() < 1e-12 * r.max(1.0));
    }
}

#[test]
fn laplacian_rows_sum_to_zero_on_corpus() {
    for (name, g) in common::small_corpus() {
        let q = laplacian(&g).into_matrix();
        for row in q.row_iter() {
            assert_eq!(row.sum(), 0.0, "{name}");
        }
    }
}

#[test]
fn every_enumerated_state_is_exactly_stationary() {
    let p = SystemParams::new(1.0);
    for (name, g) in common::small_corpus() {
        for d in enumerate_detailed_balance(&g, p).unwrap() {
            assert!(residual(&d.realization, &g, p).unwrap() < 1e-12, "{name}");
            let a = jacobian_elementwise(&d.realization, &g, p).unwrap().matrix;
            let b = jacobian_laplacian_form(&d, &g, p).matrix;
            assert!((a - b).amax() < 1e-12, "{name}");
        }
    }
}
