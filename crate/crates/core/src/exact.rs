//! Eigenstates (stationary states that are Laplacian eigenvectors), their
//! closed-form trajectories, and external equitable partitions with their
//! quotient graphs.

use serde::{Deserialize, Serialize};

use crate::dynamics::{pitchfork, StateVector, SystemParams};
use crate::error::{Error, Result};
use crate::graph::{laplacian, Graph};
use crate::stationary::{enumerate_detailed_balance_capped, residual, DEFAULT_ENUMERATION_CAP};

/// Tolerance for eigenvector and stationarity checks.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

/// A stationary state `x*` with `Q x* = mu x*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenstate {
    pub state: StateVector,
    pub mu: f64,
}

/// Node-to-cell assignment with cells numbered `0..K`, none empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cell_of: Vec<usize>,
    cell_count: usize,
}

impl Partition {
    pub fn from_cell_ids(cell_of: Vec<usize>) -> Result<Self> {
        let cell_count = cell_of.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; cell_count];
        for &c in &cell_of {
            seen[c] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(Error::PartitionMismatch(format!("cell {empty} is empty")));
        }
        Ok(Partition { cell_of, cell_count })
    }

    /// Builds from explicit cells, which must be nonempty, disjoint and
    /// cover `0..node_count`.
    pub fn from_cells(node_count: usize, cells: &[Vec<usize>]) -> Result<Self> {
        let mut cell_of = vec![usize::MAX; node_count];
        for (k, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(Error::PartitionMismatch(format!("cell {k} is empty")));
            }
            for &i in cell {
                if i >= node_count {
                    return Err(Error::PartitionMismatch(format!(
                        "node {i} is outside 0..{node_count}"
                    )));
                }
                if cell_of[i] != usize::MAX {
                    return Err(Error::PartitionMismatch(format!(
                        "node {i} appears in cells {} and {k}",
                        cell_of[i]
                    )));
                }
                cell_of[i] = k;
            }
        }
        if let Some(i) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::PartitionMismatch(format!("node {i} is in no cell")));
        }
        Ok(Partition {
            cell_of,
            cell_count: cells.len(),
        })
    }

    /// Every node in its own cell.
    pub fn discrete(node_count: usize) -> Self {
        Partition {
            cell_of: (0..node_count).collect(),
            cell_count: node_count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.cell_of.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn cell_of(&self, node: usize) -> usize {
        self.cell_of[node]
    }

    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.cell_count];
        for (i, &c) in self.cell_of.iter().enumerate() {
            cells[c].push(i);
        }
        cells
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cell_count];
        for &c in &self.cell_of {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Weighted arc `from -> to`: each node of cell `from` has `weight`
/// neighbours in cell `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientArc {
    pub from: usize,
    pub to: usize,
    pub weight: usize,
}

/// Directed weighted graph on the cells of an equitable partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    cell_count: usize,
    /// Sorted by `(from, to)`.
    arcs: Vec<QuotientArc>,
}

impl QuotientGraph {
    /// Arcs must have positive weights, distinct endpoints inside `0..K`,
    /// no repeats, and come in opposite pairs.
    pub fn from_arcs<I>(cell_count: usize, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize)>,
    {
        let mut list: Vec<QuotientArc> = Vec::new();
        for (from, to, weight) in arcs {
            if from >= cell_count || to >= cell_count {
                return Err(Error::NodeOutOfRange(from, to, cell_count));
            }
            if from == to {
                return Err(Error::SelfLoop(from));
            }
            if weight == 0 {
                return Err(Error::PartitionMismatch(format!(
                    "arc ({from}, {to}) has zero weight"
                )));
            }
            list.push(QuotientArc { from, to, weight });
        }
        list.sort_by_key(|a| (a.from, a.to));
        for w in list.windows(2) {
            if (w[0].from, w[0].to) == (w[1].from, w[1].to) {
                return Err(Error::DuplicateEdge(w[0].from, w[0].to));
            }
        }
        let q = QuotientGraph {
            cell_count,
            arcs: list,
        };
        for a in &q.arcs {
            if q.weight(a.to, a.from) == 0 {
                return Err(Error::PartitionMismatch(format!(
                    "arc ({}, {}) has no reverse arc",
                    a.from, a.to
                )));
            }
        }
        Ok(q)
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn arcs(&self) -> &[QuotientArc] {
        &self.arcs
    }

    /// `d_km`, zero when there is no arc.
    pub fn weight(&self, from: usize, to: usize) -> usize {
        self.arcs
            .binary_search_by_key(&(from, to), |a| (a.from, a.to))
            .map_or(0, |k| self.arcs[k].weight)
    }

    /// `|N_k| d_km = |N_m| d_mk` for every arc.
    pub fn check_cell_sizes(&self, sizes: &[usize]) -> Result<()> {
        if sizes.len() != self.cell_count {
            return Err(Error::PartitionMismatch(format!(
                "partition has {} cells, quotient has {}",
                sizes.len(),
                self.cell_count
            )));
        }
        for a in &self.arcs {
            if sizes[a.from] * a.weight != sizes[a.to] * self.weight(a.to, a.from) {
                return Err(Error::PartitionMismatch(format!(
                    "cell sizes {} and {} do not balance weights {} and {}",
                    sizes[a.from],
                    sizes[a.to],
                    a.weight,
                    self.weight(a.to, a.from)
                )));
            }
        }
        Ok(())
    }

    /// `(L y)_k = Σ_m d_km (y_k - y_m)`.
    pub fn laplacian_apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cell_count];
        for a in &self.arcs {
            out[a.from] += a.weight as f64 * (y[a.from] - y[a.to]);
        }
        out
    }
}

/// Checks that every node of a cell has the same number of neighbours in
/// each other cell and returns the resulting quotient.
pub fn validate_eep(g: &Graph, part: &Partition) -> Result<QuotientGraph> {
    if part.node_count() != g.node_count() {
        return Err(Error::PartitionMismatch(format!(
            "partition covers {} nodes, graph has {}",
            part.node_count(),
            g.node_count()
        )));
    }
    let k = part.cell_count();
    let counts: Vec<Vec<usize>> = (0..g.node_count())
        .map(|i| {
            let mut c = vec![0; k];
            for &(j, _) in g.neighbors(i) {
                c[part.cell_of(j)] += 1;
            }
            c
        })
        .collect();
    let cells = part.cells();
    let mut arcs = Vec::new();
    for (from, cell) in cells.iter().enumerate() {
        let first = cell[0];
        for &other in &cell[1..] {
            if let Some(to) = (0..k).find(|&m| m != from && counts[other][m] != counts[first][m]) {
                return Err(Error::NotEquitable(first, other, to));
            }
        }
        for (to, &d) in counts[first].iter().enumerate() {
            if to != from && d > 0 {
                arcs.push((from, to, d));
            }
        }
    }
    QuotientGraph::from_arcs(k, arcs)
}

/// Result of testing a per-cell state against the quotient eigenstate
/// conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientCheck {
    pub is_eigenstate: bool,
    pub mu: f64,
    /// Constant input: accepted with `mu = 0` but carries no information.
    pub trivial: bool,
}

/// Weighted stationarity `Σ_m d_km p(y_k - y_m)` per cell.
pub fn quotient_rhs(y: &[f64], qg: &QuotientGraph, p: SystemParams) -> Result<Vec<f64>> {
    if y.len() != qg.cell_count() {
        return Err(Error::DimensionMismatch {
            expected: qg.cell_count(),
            got: y.len(),
        });
    }
    let mut out = vec![0.0; y.len()];
    for a in qg.arcs() {
        out[a.from] += a.weight as f64 * pitchfork(y[a.from] - y[a.to], p);
    }
    Ok(out)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Tests `L y = mu y` for a common `mu` and weighted stationarity of `y`.
pub fn quotient_eigenstate_check(qg: &QuotientGraph, y: &[f64], p: SystemParams) -> QuotientCheck {
    let fail = QuotientCheck {
        is_eigenstate: false,
        mu: f64::NAN,
        trivial: false,
    };
    if y.len() != qg.cell_count() || y.iter().any(|v| !v.is_finite()) {
        return fail;
    }
    let ly = qg.laplacian_apply(y);
    let scale = inf_norm(y).max(1.0);
    if inf_norm(&ly) <= EIGEN_TOLERANCE * scale
        && y.iter().all(|v| (v - y[0]).abs() <= EIGEN_TOLERANCE * scale)
    {
        return QuotientCheck {
            is_eigenstate: true,
            mu: 0.0,
            trivial: true,
        };
    }
    let yy: f64 = y.iter().map(|v| v * v).sum();
    if yy == 0.0 {
        return fail;
    }
    let mu = y.iter().zip(&ly).map(|(a, b)| a * b).sum::<f64>() / yy;
    let eigen_residual = inf_norm(&ly.iter().zip(y).map(|(l, v)| l - mu * v).collect::<Vec<_>>());
    let stationary_residual = inf_norm(&quotient_rhs(y, qg, p).expect("length checked"));
    let ok = eigen_residual <= EIGEN_TOLERANCE * scale.max(inf_norm(&ly))
        && stationary_residual <= EIGEN_TOLERANCE * scale.max(p.r.abs() * scale);
    QuotientCheck {
        is_eigenstate: ok,
        mu: if ok { mu } else { f64::NAN },
        trivial: false,
    }
}

/// `x_i = y_{cell(i)}`.
pub fn lift_state(qg: &QuotientGraph, part: &Partition, y: &[f64]) -> Result<StateVector> {
    qg.check_cell_sizes(&part.cell_sizes())?;
    if y.len() != qg.cell_count() {
        return Err(Error::PartitionMismatch(format!(
            "state has {} entries for {} cells",
            y.len(),
            qg.cell_count()
        )));
    }
    Ok(StateVector::new(
        (0..part.node_count()).map(|i| y[part.cell_of(i)]).collect(),
    ))
}

/// `x` as an eigenstate when it is a nonzero (in X) stationary state and a
/// Laplacian eigenvector.
pub fn check_eigenstate_candidate(x: &[f64], g: &Graph, p: SystemParams) -> Result<Option<Eigenstate>> {
    let q = laplacian(g);
    check_with_laplacian(x, g, q.as_matrix(), p)
}

fn check_with_laplacian(
    x: &[f64],
    g: &Graph,
    q: &nalgebra::DMatrix<f64>,
    p: SystemParams,
) -> Result<Option<Eigenstate>> {
    if x.len() != g.node_count() {
        return Err(Error::DimensionMismatch {
            expected: g.node_count(),
            got: x.len(),
        });
    }
    let c = StateVector::new(x.to_vec()).canonical();
    let scale = c.max_abs();
    if scale <= EIGEN_TOLERANCE {
        return Ok(None);
    }
    let v = nalgebra::DVector::from_column_slice(&c);
    let qx = q * &v;
    let mu = v.dot(&qx) / v.dot(&v);
    let eigen_residual = crate::linalg::max_abs(&(&qx - &v * mu));
    if eigen_residual > EIGEN_TOLERANCE * scale.max(1.0) {
        return Ok(None);
    }
    if residual(&c, g, p)? > EIGEN_TOLERANCE * scale.max(1.0) {
        return Ok(None);
    }
    Ok(Some(Eigenstate { state: c, mu }))
}

/// Detailed-balance states that are Laplacian eigenvectors, plus any
/// accepted user candidates, in that order.
pub fn find_eigenstates(g: &Graph, p: SystemParams, candidates: &[StateVector]) -> Result<Vec<Eigenstate>> {
    find_eigenstates_capped(g, p, candidates, DEFAULT_ENUMERATION_CAP)
}

pub fn find_eigenstates_capped(
    g: &Graph,
    p: SystemParams,
    candidates: &[StateVector],
    cap: usize,
) -> Result<Vec<Eigenstate>> {
    let q = laplacian(g).into_matrix();
    let mut out = Vec::new();
    for d in enumerate_detailed_balance_capped(g, p, cap)? {
        if let Some(e) = check_with_laplacian(&d.realization, g, &q, p)? {
            out.push(e);
        }
    }
    for x in candidates {
        if let Some(e) = check_with_laplacian(x, g, &q, p)? {
            out.push(e);
        }
    }
    Ok(out)
}

/// Scalar amplitude `alpha(t)` along the eigenstate direction.
pub fn exact_amplitude(mu: f64, alpha0: f64, t: f64, p: SystemParams) -> Result<f64> {
    let a2 = alpha0 * alpha0;
    let base = a2 - (a2 - 1.0) * (-2.0 * mu * p.r * t).exp();
    if !base.is_finite() || base <= 0.0 {
        return Err(Error::OutOfDomain(format!(
            "alpha0 = {alpha0} blows up before t = {t} at r = {}",
            p.r
        )));
    }
    Ok(alpha0 / base.sqrt())
}

/// `alpha(t) x*` for the trajectory started at `alpha0 x*`.
pub fn exact_solution(e: &Eigenstate, alpha0: f64, t: f64, p: SystemParams) -> Result<StateVector> {
    Ok(e.state.scaled(exact_amplitude(e.mu, alpha0, t, p)?))
}

/// Wiring inside each expanded cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InternalWiring {
    Empty,
    Complete,
    /// A ring for cells of 3 or more nodes, a single link for 2.
    Cycle,
}

/// Replaces quotient cell `k` by `sizes[k]` nodes and joins cells `k` and
/// `m` by a biregular bipartite graph with degrees `d_km` and `d_mk`.
///
/// Returns the expanded graph and the partition it is equitable for. Node
/// `i` of cell `k` links to nodes `(i d_km + t) mod |N_m|`, `t < d_km`, of
/// cell `m`; the result must be connected.
pub fn expand_quotient(
    qg: &QuotientGraph,
    sizes: &[usize],
    wiring: InternalWiring,
) -> Result<(Graph, Partition)> {
    qg.check_cell_sizes(sizes)?;
    if let Some(k) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::PartitionMismatch(format!("cell {k} has size 0")));
    }
    let mut offset = vec![0usize; sizes.len() + 1];
    for (k, &s) in sizes.iter().enumerate() {
        offset[k + 1] = offset[k] + s;
    }
    let node_count = offset[sizes.len()];
    let mut edges = Vec::new();
    for (k, &s) in sizes.iter().enumerate() {
        let base = offset[k];
        match wiring {
            InternalWiring::Empty => {}
            InternalWiring::Complete => {
                for a in 0..s {
                    for b in a + 1..s {
                        edges.push((base + a, base + b));
                    }
                }
            }
            InternalWiring::Cycle => match s {
                0 | 1 => {}
                2 => edges.push((base, base + 1)),
                _ => edges.extend((0..s).map(|a| (base + a, base + (a + 1) % s))),
            },
        }
    }
    for arc in qg.arcs().iter().filter(|a| a.from < a.to) {
        let (a, b) = (sizes[arc.from], sizes[arc.to]);
        if arc.weight > b {
            return Err(Error::PartitionMismatch(format!(
                "cell {} cannot have {} distinct neighbours in cell {} of size {b}",
                arc.from, arc.weight, arc.to
            )));
        }
        for i in 0..a {
            for t in 0..arc.weight {
                let j = (i * arc.weight + t) % b;
                edges.push((offset[arc.from] + i, offset[arc.to] + j));
            }
        }
    }
    let g = Graph::new(node_count, edges)?;
    let cell_of = (0..sizes.len())
        .flat_map(|k| std::iter::repeat_n(k, sizes[k]))
        .collect();
    Ok((g, Partition::from_cell_ids(cell_of)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::*;

    const R1: SystemParams = SystemParams { r: 1.0 };

    #[test]
    fn star_quotient() {
        let g = star(5);
        let part = Partition::from_cells(5, &[vec![0], vec![1, 2, 3, 4]]).unwrap();
        let q = validate_eep(&g, &part).unwrap();
        assert_eq!(q.weight(0, 1), 4);
        assert_eq!(q.weight(1, 0), 1);
    }

    #[test]
    fn discrete_partition_gives_the_graph() {
        let g = wheel(5);
        let q = validate_eep(&g, &Partition::discrete(5)).unwrap();
        assert_eq!(q.arcs().len(), 2 * g.link_count());
        for &(i, j) in g.edges() {
            assert_eq!(q.weight(i, j), 1);
            assert_eq!(q.weight(j, i), 1);
        }
    }

    #[test]
    fn path_ends_and_middle() {
        let part = Partition::from_cells(3, &[vec![0, 2], vec![1]]).unwrap();
        let q = validate_eep(&path(3), &part).unwrap();
        assert_eq!(q.weight(0, 1), 1);
        assert_eq!(q.weight(1, 0), 2);
    }

    #[test]
    fn non_equitable_partition() {
        let part = Partition::from_cells(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(validate_eep(&path(4), &part).unwrap_err(), Error::NotEquitable(0, 1, 1));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::from_cells(3, &[vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::from_cells(3, &[vec![0, 1]]).is_err());
        assert!(Partition::from_cells(3, &[vec![0, 1, 2], vec![]]).is_err());
        assert!(Partition::from_cell_ids(vec![0, 2]).is_err());
    }

    #[test]
    fn k2_quotient_check() {
        let q = validate_eep(&path(2), &Partition::discrete(2)).unwrap();
        let c = quotient_eigenstate_check(&q, &[0.5, -0.5], R1);
        assert!(c.is_eigenstate && !c.trivial);
        assert!((c.mu - 2.0).abs() < 1e-12);
        let t = quotient_eigenstate_check(&q, &[0.7, 0.7], R1);
        assert!(t.is_eigenstate && t.trivial && t.mu == 0.0);
        assert!(!quotient_eigenstate_check(&q, &[0.9, -0.5], R1).is_eigenstate);
    }

    #[test]
    fn star_eigenstate_lift() {
        // d_cl = 4, d_lc = 1: 4(a - b) = mu a, (b - a) = mu b, (a - b)² = r
        let g = star(5);
        let part = Partition::from_cells(5, &[vec![0], vec![1, 2, 3, 4]]).unwrap();
        let q = validate_eep(&g, &part).unwrap();
        let y = [-0.8, 0.2];
        let c = quotient_eigenstate_check(&q, &y, R1);
        assert!(c.is_eigenstate);
        assert!((c.mu - 5.0).abs() < 1e-12);
        let x = lift_state(&q, &part, &y).unwrap();
        let e = check_eigenstate_candidate(&x, &g, R1).unwrap().unwrap();
        assert!((e.mu - 5.0).abs() < 1e-12);
    }

    #[test]
    fn lift_checks_partition() {
        let q = validate_eep(&path(2), &Partition::discrete(2)).unwrap();
        assert!(lift_state(&q, &Partition::discrete(3), &[0.0, 1.0]).is_err());
        let part = Partition::discrete(2);
        assert_eq!(lift_state(&q, &part, &[0.3, 0.3]).unwrap().to_vec(), vec![0.3, 0.3]);
    }

    #[test]
    fn eigenstates_on_small_graphs() {
        let k2 = find_eigenstates(&path(2), R1, &[]).unwrap();
        assert_eq!(k2.len(), 2);
        assert!(k2.iter().all(|e| (e.mu - 2.0).abs() < 1e-12));

        let p3 = find_eigenstates(&path(3), R1, &[]).unwrap();
        let dissensus = p3
            .iter()
            .find(|e| (e.state[0] - 1.0).abs() < 1e-12 && (e.state[2] + 1.0).abs() < 1e-12)
            .expect("(1, 0, -1) is an eigenstate");
        assert!((dissensus.mu - 1.0).abs() < 1e-12);

        // balanced split of K4
        let k4 = find_eigenstates(&complete(4), R1, &[]).unwrap();
        assert!(k4.iter().any(|e| (e.mu - 4.0).abs() < 1e-12));

        let candidate = StateVector::new(vec![0.1, 0.0, 0.0]);
        assert_eq!(find_eigenstates(&path(3), R1, &[candidate]).unwrap().len(), p3.len());
    }

    #[test]
    fn amplitude_examples() {
        assert_eq!(exact_amplitude(2.0, 0.7, 0.0, R1).unwrap(), 0.7);
        assert!((exact_amplitude(2.0, 2.0, 10.0, R1).unwrap() - 1.0).abs() < 1e-8);
        for t in [0.0, 0.5, 3.0] {
            assert!((exact_amplitude(2.0, 1.0, t, R1).unwrap() - 1.0).abs() < 1e-15);
        }
        let neg = SystemParams::new(-1.0);
        assert!(exact_amplitude(2.0, 0.5, 3.0, neg).unwrap().abs() < 0.01);
        assert!(exact_amplitude(2.0, 2.0, 10.0, neg).is_err());
    }

    #[test]
    fn expanded_quotients_are_equitable() {
        let q = QuotientGraph::from_arcs(2, [(0, 1, 2), (1, 0, 3)]).unwrap();
        for wiring in [InternalWiring::Complete, InternalWiring::Cycle] {
            let (g, part) = expand_quotient(&q, &[6, 4], wiring).unwrap();
            assert_eq!(g.node_count(), 10);
            assert_eq!(validate_eep(&g, &part).unwrap(), q);
        }
        let (g, part) = expand_quotient(&q, &[3, 2], InternalWiring::Empty).unwrap();
        assert_eq!(g, complete_bipartite(3, 2));
        assert_eq!(validate_eep(&g, &part).unwrap(), q);
        // cross links alone split into two components here
        assert_eq!(
            expand_quotient(&q, &[6, 4], InternalWiring::Empty).unwrap_err(),
            Error::DisconnectedGraph(1)
        );
        assert!(expand_quotient(&q, &[5, 4], InternalWiring::Empty).is_err());
    }

    #[test]
    fn quotient_arc_validation() {
        assert!(QuotientGraph::from_arcs(2, [(0, 1, 1)]).is_err());
        assert!(QuotientGraph::from_arcs(2, [(0, 0, 1)]).is_err());
        assert!(QuotientGraph::from_arcs(2, [(0, 1, 0), (1, 0, 1)]).is_err());
        assert!(QuotientGraph::from_arcs(2, [(0, 1, 1), (1, 0, 1), (0, 1, 1)]).is_err());
    }
}
