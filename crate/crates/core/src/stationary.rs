//! Detailed-balance stationary states: every link difference is `0` or
//! `±√r`, so each coupling term vanishes on its own.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, StateVector, SystemParams};
use crate::error::{Error, Result};
use crate::graph::{CycleBasis, Graph};

/// Largest link count accepted by [`enumerate_detailed_balance`].
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Per canonical link `(i, j)`, the symbol `s` with `x_i - x_j = s √r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkAssignment(Vec<i8>);

impl LinkAssignment {
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|s| !(-1..=1).contains(*s)) {
            return Err(Error::OutOfDomain(format!(
                "link symbol {bad} is not one of -1, 0, +1"
            )));
        }
        Ok(LinkAssignment(symbols))
    }

    pub fn all_consensus(links: usize) -> Self {
        LinkAssignment(vec![0; links])
    }

    pub fn symbols(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices of links with symbol 0.
    pub fn consensus_links(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&k| self.0[k] == 0).collect()
    }

    /// Number of dissensus links `ℓ`.
    pub fn dissensus_count(&self) -> usize {
        self.0.iter().filter(|&&s| s != 0).count()
    }

    /// Signed symbol sum around every fundamental cycle vanishes.
    pub fn is_cycle_consistent(&self, basis: &CycleBasis) -> bool {
        basis.cycles.iter().all(|cycle| {
            cycle
                .iter()
                .map(|se| i32::from(se.sign) * i32::from(self.0[se.edge]))
                .sum::<i32>()
                == 0
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailedBalanceState {
    pub assignment: LinkAssignment,
    /// Mean-zero node values.
    pub realization: StateVector,
    pub dissensus_count: usize,
}

impl DetailedBalanceState {
    pub fn is_full_consensus(&self) -> bool {
        self.dissensus_count == 0
    }

    pub fn is_full_dissensus(&self) -> bool {
        self.dissensus_count == self.assignment.len()
    }
}

fn sqrt_r_for(assignment: &LinkAssignment, p: SystemParams) -> Result<f64> {
    if assignment.dissensus_count() == 0 {
        return Ok(p.r.max(0.0).sqrt());
    }
    if p.r.is_nan() || p.r <= 0.0 {
        return Err(Error::NegativeR(p.r));
    }
    Ok(p.r.sqrt())
}

fn state_from_levels(levels: &[i64], assignment: LinkAssignment, sqrt_r: f64) -> DetailedBalanceState {
    let mean = levels.iter().sum::<i64>() as f64 / levels.len() as f64;
    let realization = StateVector::new(
        levels
            .iter()
            .map(|&k| (k as f64 - mean) * sqrt_r)
            .collect(),
    );
    let dissensus_count = assignment.dissensus_count();
    DetailedBalanceState {
        assignment,
        realization,
        dissensus_count,
    }
}

/// Integer node levels `k_i` with `x_i = k_i √r`, propagated down the BFS
/// spanning tree and checked on every chord.
fn levels_for(assignment: &LinkAssignment, g: &Graph) -> Result<Vec<i64>> {
    let tree = g.spanning_tree();
    let mut levels = vec![0i64; g.node_count()];
    for &v in tree.order.iter().skip(1) {
        let (u, e) = tree.parent[v].expect("non-root node has a parent");
        let s = i64::from(assignment.0[e]);
        let (a, _) = g.edge(e);
        levels[v] = if a == u { levels[u] - s } else { levels[u] + s };
    }
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        if !tree.is_tree_edge[k] && levels[i] - levels[j] != i64::from(assignment.0[k]) {
            return Err(Error::CycleInconsistent(i, j));
        }
    }
    Ok(levels)
}

/// Node values realizing a link assignment, shifted to mean zero.
pub fn realize(assignment: &LinkAssignment, g: &Graph, p: SystemParams) -> Result<DetailedBalanceState> {
    if assignment.len() != g.link_count() {
        return Err(Error::DimensionMismatch {
            expected: g.link_count(),
            got: assignment.len(),
        });
    }
    let sqrt_r = sqrt_r_for(assignment, p)?;
    let levels = levels_for(assignment, g)?;
    Ok(state_from_levels(&levels, assignment.clone(), sqrt_r))
}

/// Depth-first search over node levels in BFS order. `allowed(edge)` lists
/// the admissible symbols of each link; tree links branch over them and
/// chords are checked as soon as both endpoints are placed.
fn search_assignments<A, F>(g: &Graph, allowed: A, mut visit: F)
where
    A: Fn(usize) -> &'static [i8],
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let tree = g.spanning_tree();
    let n = g.node_count();
    let mut position = vec![0usize; n];
    for (k, &v) in tree.order.iter().enumerate() {
        position[v] = k;
    }
    // chords from each node back to earlier nodes, excluding its tree edge
    let back_chords: Vec<Vec<(usize, usize)>> = tree
        .order
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter(|&&(w, e)| position[w] < position[v] && !tree.is_tree_edge[e])
                .copied()
                .collect()
        })
        .collect();
    let mut levels = vec![0i64; n];

    fn recurse<A, F>(
        depth: usize,
        g: &Graph,
        tree: &crate::graph::SpanningTree,
        back_chords: &[Vec<(usize, usize)>],
        allowed: &A,
        levels: &mut Vec<i64>,
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        A: Fn(usize) -> &'static [i8],
        F: FnMut(&[i64]) -> ControlFlow<()>,
    {
        if depth == tree.order.len() {
            return visit(levels);
        }
        let v = tree.order[depth];
        let (u, e) = tree.parent[v].expect("non-root node has a parent");
        let (a, _) = g.edge(e);
        'symbols: for &s in allowed(e) {
            let s = i64::from(s);
            levels[v] = if a == u { levels[u] - s } else { levels[u] + s };
            for &(w, c) in &back_chords[depth] {
                let (ci, cj) = g.edge(c);
                let diff = levels[ci] - levels[cj];
                if !allowed(c).iter().any(|&t| i64::from(t) == diff) {
                    continue 'symbols;
                }
                debug_assert!(w == ci || w == cj);
            }
            recurse(depth + 1, g, tree, back_chords, allowed, levels, visit)?;
        }
        ControlFlow::Continue(())
    }

    let _ = recurse(1, g, &tree, &back_chords, &allowed, &mut levels, &mut visit);
}

fn assignment_from_levels(g: &Graph, levels: &[i64]) -> LinkAssignment {
    LinkAssignment(
        g.edges()
            .iter()
            .map(|&(i, j)| (levels[i] - levels[j]) as i8)
            .collect(),
    )
}

const ANY_SYMBOL: &[i8] = &[0, 1, -1];
const DISSENSUS: &[i8] = &[1, -1];
const CONSENSUS: &[i8] = &[0];

/// All cycle-consistent detailed-balance states, each exactly once.
///
/// Fails with `TooLarge` when the graph has more than
/// [`DEFAULT_ENUMERATION_CAP`] links; see [`enumerate_detailed_balance_capped`].
pub fn enumerate_detailed_balance(g: &Graph, p: SystemParams) -> Result<Vec<DetailedBalanceState>> {
    enumerate_detailed_balance_capped(g, p, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_detailed_balance_capped(
    g: &Graph,
    p: SystemParams,
    cap: usize,
) -> Result<Vec<DetailedBalanceState>> {
    if p.r.is_nan() || p.r <= 0.0 {
        return Err(Error::NegativeR(p.r));
    }
    if g.link_count() > cap {
        return Err(Error::TooLarge {
            links: g.link_count(),
            cap,
        });
    }
    let sqrt_r = p.r.sqrt();
    let mut out = Vec::new();
    search_assignments(
        g,
        |_| ANY_SYMBOL,
        |levels| {
            out.push(state_from_levels(levels, assignment_from_levels(g, levels), sqrt_r));
            ControlFlow::Continue(())
        },
    );
    Ok(out)
}

/// Some cycle-consistent assignment whose consensus links are exactly
/// `consensus` (link indices), if one exists.
pub fn find_assignment_with_consensus(g: &Graph, consensus: &[usize]) -> Option<LinkAssignment> {
    let mut is_consensus = vec![false; g.link_count()];
    for &k in consensus {
        if k < is_consensus.len() {
            is_consensus[k] = true;
        }
    }
    let mut found = None;
    search_assignments(
        g,
        |e| if is_consensus[e] { CONSENSUS } else { DISSENSUS },
        |levels| {
            found = Some(assignment_from_levels(g, levels));
            ControlFlow::Break(())
        },
    );
    found
}

/// `max_i |dx_i/dt|`.
pub fn residual(x: &[f64], g: &Graph, p: SystemParams) -> Result<f64> {
    Ok(dynamics::rhs(x, g, p)?.max_abs())
}

/// `-r² ℓ / 4`.
pub fn state_potential(d: &DetailedBalanceState, p: SystemParams) -> f64 {
    -0.25 * p.r * p.r * d.dissensus_count as f64
}

/// One representative per group size `V = 0..=N` on `K_N`: nodes `0..V`
/// sit at `√r`, the rest at 0 (then mean-shifted).
///
/// With node labels there are `Σ_V C(N, V) = 2^N` such configurations.
/// `V = 0` and `V = N` are the same point of the quotient space (the
/// consensus state), so `K_N` has `2^N - 1` distinct detailed-balance states.
pub fn complete_graph_states(n: usize, p: SystemParams) -> Result<Vec<(usize, DetailedBalanceState)>> {
    if p.r.is_nan() || p.r <= 0.0 {
        return Err(Error::NegativeR(p.r));
    }
    let g = crate::graph::generators::complete(n);
    (0..=n)
        .map(|v| {
            let symbols = g
                .edges()
                .iter()
                .map(|&(i, j)| i8::from(i < v && j >= v))
                .collect();
            realize(&LinkAssignment(symbols), &g, p).map(|d| (v, d))
        })
        .collect()
}

/// Point on the circle of non-detailed-balance stationary states of `K_3`:
/// mean zero, `Σ x_i² = 2r/3`, at angle `theta` in the mean-zero plane
/// spanned by `(1,-1,0)/√2` and `(1,1,-2)/√6`.
pub fn three_cycle_circle_state(theta: f64, p: SystemParams) -> Result<StateVector> {
    if p.r.is_nan() || p.r <= 0.0 {
        return Err(Error::NegativeR(p.r));
    }
    let radius = (2.0 * p.r / 3.0).sqrt();
    let (s, c) = theta.sin_cos();
    let e1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let e2 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    Ok(StateVector::new(
        (0..3).map(|i| radius * (c * e1[i] + s * e2[i])).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::potential;
    use crate::graph::cycle_basis;
    use crate::graph::generators::*;

    const R1: SystemParams = SystemParams { r: 1.0 };

    fn assign(s: &[i8]) -> LinkAssignment {
        LinkAssignment::new(s.to_vec()).unwrap()
    }

    #[test]
    fn realize_k2() {
        let d = realize(&assign(&[1]), &path(2), R1).unwrap();
        assert_eq!(d.realization.to_vec(), vec![0.5, -0.5]);
        assert_eq!(d.dissensus_count, 1);
    }

    #[test]
    fn realize_consensus_is_zero() {
        let g = wheel(6);
        let d = realize(&LinkAssignment::all_consensus(g.link_count()), &g, R1).unwrap();
        assert!(d.realization.iter().all(|&x| x == 0.0));
        // consensus needs no √r, so any r is accepted
        assert!(realize(&LinkAssignment::all_consensus(g.link_count()), &g, SystemParams::new(-2.0)).is_ok());
    }

    #[test]
    fn realize_rejects_inconsistent_triangle() {
        // canonical order (0,1), (0,2), (1,2): x0-x1 = x1-x2 = √r forces x0-x2 = 2√r
        let g = complete(3);
        assert_eq!(
            realize(&assign(&[1, 1, 1]), &g, R1),
            Err(Error::CycleInconsistent(1, 2))
        );
        assert!(!assign(&[1, 1, 1]).is_cycle_consistent(&cycle_basis(&g)));
        assert!(assign(&[1, 1, 0]).is_cycle_consistent(&cycle_basis(&g)));
    }

    #[test]
    fn realize_rejects_dissensus_without_positive_r() {
        assert_eq!(
            realize(&assign(&[1]), &path(2), SystemParams::new(0.0)),
            Err(Error::NegativeR(0.0))
        );
    }

    #[test]
    fn symbols_are_validated() {
        assert!(LinkAssignment::new(vec![0, 2]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_detailed_balance(&path(3), R1).unwrap().len(), 9);
        assert_eq!(enumerate_detailed_balance(&path(2), R1).unwrap().len(), 3);
        // 2^3 labelled configurations, with V=0 and V=3 the same point of X
        assert_eq!(enumerate_detailed_balance(&complete(3), R1).unwrap().len(), 7);
    }

    #[test]
    fn enumeration_starts_with_consensus_and_is_unique() {
        let states = enumerate_detailed_balance(&wheel(5), R1).unwrap();
        assert!(states[0].is_full_consensus());
        let mut seen = std::collections::BTreeSet::new();
        for s in &states {
            assert!(seen.insert(s.assignment.clone()));
        }
    }

    #[test]
    fn enumeration_guards() {
        let g = complete(7);
        assert_eq!(
            enumerate_detailed_balance(&g, R1).unwrap_err(),
            Error::TooLarge { links: 21, cap: 20 }
        );
        assert_eq!(enumerate_detailed_balance_capped(&g, R1, 21).unwrap().len(), 127);
        assert_eq!(
            enumerate_detailed_balance(&path(3), SystemParams::new(-1.0)).unwrap_err(),
            Error::NegativeR(-1.0)
        );
    }

    #[test]
    fn enumerated_states_are_stationary() {
        let p = SystemParams::new(2.5);
        for g in [cycle(5), barbell(3), parallel_paths(3), star(5)] {
            for d in enumerate_detailed_balance(&g, p).unwrap() {
                assert!(residual(&d.realization, &g, p).unwrap() < 1e-12);
                assert!(d.assignment.is_cycle_consistent(&cycle_basis(&g)));
                let v = potential(&d.realization, &g, p).unwrap();
                assert!((v - state_potential(&d, p)).abs() < 1e-12);
                assert!(d.realization.mean().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn state_potential_examples() {
        let g = path(5);
        let full = realize(&assign(&[1, -1, 1, 1]), &g, R1).unwrap();
        assert_eq!(state_potential(&full, R1), -1.0);
        let k3 = complete(3);
        let two = realize(&assign(&[1, 1, 0]), &k3, SystemParams::new(2.0)).unwrap();
        assert_eq!(two.dissensus_count, 2);
        assert_eq!(state_potential(&two, SystemParams::new(2.0)), -2.0);
    }

    #[test]
    fn single_consensus_search() {
        let g = parallel_paths(4);
        let hub = g.edge_index(0, 1).unwrap();
        let a = find_assignment_with_consensus(&g, &[hub]).unwrap();
        assert_eq!(a.consensus_links(), vec![hub]);
        // a hub-to-midpoint consensus link would force two other midpoints into conflict
        let spoke = g.edge_index(0, 2).unwrap();
        assert!(find_assignment_with_consensus(&g, &[spoke]).is_none());
        // K4 has no state with exactly one consensus link
        assert!(find_assignment_with_consensus(&complete(4), &[0]).is_none());
    }

    #[test]
    fn complete_graph_representatives() {
        let states = complete_graph_states(3, R1).unwrap();
        assert_eq!(states.len(), 4);
        let labelled: usize = states.iter().map(|(v, _)| binomial(3, *v)).sum();
        assert_eq!(labelled, 8);
        assert!(states[0].1.is_full_consensus());
        let (_, d) = &complete_graph_states(4, R1).unwrap()[2];
        assert_eq!(d.dissensus_count, 4);
        assert_eq!(d.assignment.consensus_links().len(), 2);
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn circle_states() {
        let x = three_cycle_circle_state(1.5 * std::f64::consts::PI, R1).unwrap();
        let expected = [-1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0];
        for i in 0..3 {
            assert!((x[i] - expected[i]).abs() < 1e-12);
        }
        let sq: f64 = x.iter().map(|v| v * v).sum();
        assert!((sq - 2.0 / 3.0).abs() < 1e-12);
        let a = three_cycle_circle_state(0.4, R1).unwrap();
        let b = three_cycle_circle_state(0.4 + 2.0 * std::f64::consts::PI, R1).unwrap();
        assert!(a.distance_in_x(&b) < 1e-12);
        let k3 = complete(3);
        for k in 0..12 {
            let theta = k as f64 * std::f64::consts::PI / 6.0;
            let x = three_cycle_circle_state(theta, R1).unwrap();
            assert!(residual(&x, &k3, R1).unwrap() < 1e-9);
        }
        assert!(three_cycle_circle_state(0.0, SystemParams::new(-1.0)).is_err());
    }
}
