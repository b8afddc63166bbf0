//! Brute-force search for stationary states on tiny graphs: dense grid
//! starts polished by damped Newton steps with an SVD least-squares solve.

use nalgebra::{DMatrix, DVector};
use pitchnet::dynamics::rhs;
use pitchnet::generators::{all_trees, complete};
use pitchnet::stability::jacobian_elementwise;
use pitchnet::stationary::{enumerate_detailed_balance, three_cycle_circle_state};
use pitchnet::{Graph, StateVector, SystemParams};

const R: SystemParams = SystemParams { r: 1.0 };

/// Node states with the last node pinned at 0, so the unknowns are the
/// first `N - 1` coordinates.
fn polish(g: &Graph, start: &[f64]) -> Option<StateVector> {
    let n = g.node_count();
    let mut x = start.to_vec();
    x.push(0.0);
    for _ in 0..200 {
        let f = rhs(&x, g, R).unwrap();
        let res = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if res < 1e-13 {
            return Some(StateVector::new(x).canonical());
        }
        let j = jacobian_elementwise(&x, g, R).unwrap().matrix;
        let a = DMatrix::from_fn(n, n - 1, |i, c| j[(i, c)]);
        let b = DVector::from_iterator(n, f.iter().map(|v| -v));
        let step = a.svd(true, true).solve(&b, 1e-10).ok()?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = (0..n)
                .map(|i| if i < n - 1 { x[i] + t * step[i] } else { 0.0 })
                .collect();
            let fr = rhs(&trial, g, R).unwrap();
            let tres = fr.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if tres < res || t < 1e-4 {
                x = trial;
                break;
            }
            t *= 0.5;
        }
        if x.iter().any(|v| v.abs() > 10.0) {
            return None;
        }
    }
    None
}

fn grid_starts(dim: usize, points: usize, half_width: f64) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (0..points)
        .map(|k| -half_width + 2.0 * half_width * (k as f64 + 0.37) / points as f64)
        .collect();
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

fn roots(g: &Graph) -> Vec<StateVector> {
    // the pinned node can sit at either end of a state spanning 3√r
    let points = if g.node_count() <= 3 { 25 } else { 15 };
    let mut found: Vec<StateVector> = Vec::new();
    for start in grid_starts(g.node_count() - 1, points, 3.5) {
        if let Some(x) = polish(g, &start) {
            if !found.iter().any(|y| y.distance_in_x(&x) < 1e-6) {
                found.push(x);
            }
        }
    }
    found
}

#[test]
fn trees_have_only_detailed_balance_states() {
    for n in 2..=4 {
        for g in all_trees(n) {
            let states = enumerate_detailed_balance(&g, R).unwrap();
            let found = roots(&g);
            for x in &found {
                assert!(
                    states.iter().any(|d| d.realization.distance_in_x(x) < 1e-6),
                    "stationary state {x:?} outside the enumeration on {:?}",
                    g.edges()
                );
            }
            // the search is dense enough to recover every enumerated state too
            assert_eq!(found.len(), states.len(), "{:?}", g.edges());
        }
    }
}

#[test]
fn three_cycle_extra_states_lie_on_the_circle() {
    let g = complete(3);
    let states = enumerate_detailed_balance(&g, R).unwrap();
    let mut on_circle = 0;
    for x in roots(&g) {
        if states.iter().any(|d| d.realization.distance_in_x(&x) < 1e-6) {
            continue;
        }
        let sq: f64 = x.iter().map(|v| v * v).sum();
        assert!((sq - 2.0 * R.r / 3.0).abs() < 1e-6, "off-circle root {x:?}");
        on_circle += 1;
    }
    assert!(on_circle > 0, "the degenerate circle should be reachable");
    // the six non-consensus detailed-balance states lie on the circle themselves
    for d in states.iter().filter(|d| !d.is_full_consensus()) {
        let sq: f64 = d.realization.iter().map(|v| v * v).sum();
        assert!((sq - 2.0 / 3.0).abs() < 1e-12);
    }
    let x = three_cycle_circle_state(1.5 * std::f64::consts::PI, R).unwrap();
    assert!(states.iter().any(|d| d.realization.distance_in_x(&x) < 1e-12));
}
