//! Undirected simple connected graphs and their Laplacian algebra.
//!
//! Edges are stored canonically as `(i, j)` with `i < j`, sorted
//! lexicographically. The orientation of link `(i, j)` is fixed by the
//! difference `x_i - x_j`; every per-link quantity in the crate (link
//! variables, assignments, incidence signs) uses this convention.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

pub mod generators;

/// Undirected, simple, connected graph on nodes `0..node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    /// Per node: `(neighbour, edge index)`, sorted by neighbour.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Validates and canonicalizes an edge list.
    pub fn new<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if node_count < 2 {
            return Err(Error::EmptyGraph(node_count));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::NodeOutOfRange(a, b, node_count));
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); node_count];
        for (k, &(i, j)) in edges.iter().enumerate() {
            adjacency[i].push((j, k));
            adjacency[j].push((i, k));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let g = Graph {
            node_count,
            edges,
            adjacency,
        };
        if let Some(unreached) = g.first_unreachable() {
            return Err(Error::DisconnectedGraph(unreached));
        }
        Ok(g)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut seen = vec![false; self.node_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Number of links `L`.
    pub fn link_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> (usize, usize) {
        self.edges[index]
    }

    /// `(neighbour, edge index)` pairs of node `i`, sorted by neighbour.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Index of the canonical edge joining `i` and `j`, in either order.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.node_count || j >= self.node_count {
            return None;
        }
        self.adjacency[i]
            .binary_search_by_key(&j, |&(v, _)| v)
            .ok()
            .map(|pos| self.adjacency[i][pos].1)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.node_count
    }

    /// Breadth-first spanning tree rooted at node 0.
    pub fn spanning_tree(&self) -> SpanningTree {
        let n = self.node_count;
        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut order = Vec::with_capacity(n);
        let mut is_tree_edge = vec![false; self.edges.len()];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, e) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some((u, e));
                    depth[v] = depth[u] + 1;
                    is_tree_edge[e] = true;
                    queue.push_back(v);
                }
            }
        }
        SpanningTree {
            order,
            parent,
            depth,
            is_tree_edge,
        }
    }

    /// Signed node-link incidence matrix `B` (N x L): column `(i, j)` has
    /// `+1` at `i` and `-1` at `j`, so link variables are `y = Bᵀ x`.
    pub fn incidence(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.node_count, self.edges.len());
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            b[(i, k)] = 1.0;
            b[(j, k)] = -1.0;
        }
        b
    }

    /// Link variables `y_(i,j) = x_i - x_j` in canonical edge order.
    pub fn link_differences(&self, x: &[f64]) -> Vec<f64> {
        self.edges.iter().map(|&(i, j)| x[i] - x[j]).collect()
    }
}

/// Equivalent to [`Graph::new`].
pub fn build_graph<I>(node_count: usize, edges: I) -> Result<Graph>
where
    I: IntoIterator<Item = (usize, usize)>,
{
    Graph::new(node_count, edges)
}

pub fn is_tree(g: &Graph) -> bool {
    g.is_tree()
}

/// BFS spanning tree; `order` lists nodes so every node follows its parent.
#[derive(Debug, Clone)]
pub struct SpanningTree {
    pub order: Vec<usize>,
    /// `(parent node, tree edge index)`; `None` for the root.
    pub parent: Vec<Option<(usize, usize)>>,
    pub depth: Vec<usize>,
    pub is_tree_edge: Vec<bool>,
}

impl SpanningTree {
    /// Nodes on the tree path from `from` to `to`, both ends included.
    pub fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let (mut a, mut b) = (from, to);
        let mut head = vec![a];
        let mut tail = vec![b];
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root has a parent").0;
            head.push(a);
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("non-root has a parent").0;
            tail.push(b);
        }
        while a != b {
            a = self.parent[a].expect("non-root has a parent").0;
            b = self.parent[b].expect("non-root has a parent").0;
            head.push(a);
            tail.push(b);
        }
        tail.pop();
        head.extend(tail.into_iter().rev());
        head
    }
}

/// Dense graph Laplacian `Q = D - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix(DMatrix<f64>);

impl LaplacianMatrix {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

pub fn laplacian(g: &Graph) -> LaplacianMatrix {
    LaplacianMatrix(edge_subset_laplacian(g, |_| true))
}

/// Laplacian of the spanning subgraph `(nodes, {edges k : keep(k)})`.
pub fn edge_subset_laplacian(g: &Graph, keep: impl Fn(usize) -> bool) -> DMatrix<f64> {
    let n = g.node_count();
    let mut q = DMatrix::zeros(n, n);
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        if keep(k) {
            q[(i, i)] += 1.0;
            q[(j, j)] += 1.0;
            q[(i, j)] -= 1.0;
            q[(j, i)] -= 1.0;
        }
    }
    q
}

/// Moore-Penrose pseudoinverse `Q†` of a connected graph's Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoinverseMatrix(DMatrix<f64>);

impl PseudoinverseMatrix {
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `(e_i - e_j)ᵀ Q† (e_i - e_j)`.
    pub fn resistance(&self, i: usize, j: usize) -> Result<f64> {
        if i == j {
            return Err(Error::SameNode(i));
        }
        let n = self.0.nrows();
        if i >= n || j >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: i.max(j) + 1,
            });
        }
        Ok(self.0[(i, i)] + self.0[(j, j)] - 2.0 * self.0[(i, j)])
    }
}

/// Eigenvalues at or below this fraction of the largest are treated as zero.
const PINV_RELATIVE_CUTOFF: f64 = 1e-9;

pub fn pseudoinverse(q: &LaplacianMatrix) -> Result<PseudoinverseMatrix> {
    let eig = linalg::symmetric_eigen(q.as_matrix())?;
    let n = eig.values.len();
    let lambda_max = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = PINV_RELATIVE_CUTOFF * lambda_max;
    let zeros = eig.values.iter().filter(|&&l| l <= cutoff).count();
    if zeros != 1 {
        return Err(Error::NumericalRankDeficiency(zeros));
    }
    let mut pinv = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda > cutoff {
            let v = eig.vectors.column(k);
            pinv += (v * v.transpose()) / lambda;
        }
    }
    Ok(PseudoinverseMatrix(pinv))
}

/// Effective resistance between nodes `i` and `j`.
///
/// Builds `Q†` on every call; use [`PseudoinverseMatrix::resistance`] for
/// repeated queries on one graph.
pub fn effective_resistance(g: &Graph, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::SameNode(i));
    }
    pseudoinverse(&laplacian(g))?.resistance(i, j)
}

/// Effective resistance by solving `(Q + 11ᵀ/N) v = e_i - e_j` directly.
///
/// Independent of the eigendecomposition route; the rank-one term makes the
/// system nonsingular without changing the solution on the mean-zero subspace.
pub fn effective_resistance_by_solve(g: &Graph, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::SameNode(i));
    }
    let n = g.node_count();
    let mut a = laplacian(g).into_matrix();
    a.add_scalar_mut(1.0 / n as f64);
    let mut rhs = DVector::zeros(n);
    rhs[i] = 1.0;
    rhs[j] = -1.0;
    let v = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::NumericalRankDeficiency(0))?;
    Ok(v[i] - v[j])
}

/// One traversed link of a cycle: `sign = +1` when walked from the lower to
/// the higher endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedEdge {
    pub edge: usize,
    pub sign: i8,
}

/// Fundamental cycles with respect to the BFS spanning tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBasis {
    pub cycles: Vec<Vec<SignedEdge>>,
}

impl CycleBasis {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

/// One cycle per chord, walking the chord `i -> j` then the tree path back.
pub fn cycle_basis(g: &Graph) -> CycleBasis {
    let tree = g.spanning_tree();
    let mut cycles = Vec::new();
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        if tree.is_tree_edge[k] {
            continue;
        }
        let mut cycle = vec![SignedEdge { edge: k, sign: 1 }];
        let path = tree.path(j, i);
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            let e = g.edge_index(a, b).expect("tree path follows edges");
            cycle.push(SignedEdge {
                edge: e,
                sign: if a < b { 1 } else { -1 },
            });
        }
        cycles.push(cycle);
    }
    CycleBasis { cycles }
}
