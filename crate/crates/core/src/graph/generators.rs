//! Named graph families used throughout the tests and the CLI.
//!
//! All constructors panic on sizes for which the family is not a simple
//! connected graph; [`named`] is the fallible entry point.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::Graph;

fn must(g: Result<Graph>) -> Graph {
    g.expect("generator produced an invalid graph")
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Graph {
    must(Graph::new(n, (1..n).map(|i| (i - 1, i))))
}

/// Cycle on `n >= 3` nodes.
pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 nodes");
    must(Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))))
}

/// Star with center 0 and `n - 1` leaves.
pub fn star(n: usize) -> Graph {
    must(Graph::new(n, (1..n).map(|i| (0, i))))
}

pub fn complete(n: usize) -> Graph {
    must(Graph::new(
        n,
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))),
    ))
}

/// Two copies of `K_n` on nodes `0..n` and `n..2n`, joined by the bridge
/// link `(n - 1, n)`.
pub fn barbell(n: usize) -> Graph {
    assert!(n >= 2, "barbell needs cliques of at least 2 nodes");
    let clique = |offset: usize| {
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (offset + i, offset + j)))
    };
    must(Graph::new(
        2 * n,
        clique(0).chain(clique(n)).chain([(n - 1, n)]),
    ))
}

/// Bridge link of [`barbell`].
pub fn barbell_bridge(n: usize) -> (usize, usize) {
    (n - 1, n)
}

/// Heap-shaped binary tree: node `i` has children `2i + 1` and `2i + 2`.
pub fn balanced_binary_tree(n: usize) -> Graph {
    must(Graph::new(n, (1..n).map(|i| ((i - 1) / 2, i))))
}

/// Hub 0 joined to every node of the cycle `1..n`.
pub fn wheel(n: usize) -> Graph {
    assert!(n >= 4, "wheel needs at least 4 nodes");
    let rim = n - 1;
    must(Graph::new(
        n,
        (1..n)
            .map(|i| (0, i))
            .chain((0..rim).map(|k| (1 + k, 1 + (k + 1) % rim))),
    ))
}

/// Hub link `(0, 1)` plus `k` midpoints `2..k+2`, each adjacent to both hubs.
pub fn parallel_paths(k: usize) -> Graph {
    must(Graph::new(
        k + 2,
        std::iter::once((0, 1)).chain((2..k + 2).flat_map(|m| [(0, m), (1, m)])),
    ))
}

/// Complete bipartite graph with parts `0..a` and `a..a+b`.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    must(Graph::new(
        a + b,
        (0..a).flat_map(|i| (a..a + b).map(move |j| (i, j))),
    ))
}

/// Graph family selectable by name (`path`, `cycle`, `star`, `complete`,
/// `barbell`, `binary-tree`, `wheel`, `parallel-paths`, `k2`).
pub fn named(family: &str, n: usize) -> Result<Graph> {
    let min = match family {
        "k2" => 0,
        "path" | "star" | "complete" | "binary-tree" | "barbell" => 2,
        "cycle" => 3,
        "wheel" => 4,
        "parallel-paths" => 1,
        _ => return Err(Error::UnknownFamily(family.to_string())),
    };
    if n < min {
        return Err(Error::EmptyGraph(n));
    }
    Ok(match family {
        "k2" => path(2),
        "path" => path(n),
        "cycle" => cycle(n),
        "star" => star(n),
        "complete" => complete(n),
        "barbell" => barbell(n),
        "binary-tree" => balanced_binary_tree(n),
        "wheel" => wheel(n),
        "parallel-paths" => parallel_paths(n),
        _ => unreachable!(),
    })
}

/// All pairwise non-isomorphic trees on `n` nodes, in a deterministic order.
///
/// Grows trees leaf by leaf and deduplicates with a canonical encoding
/// rooted at the tree center.
pub fn all_trees(n: usize) -> Vec<Graph> {
    assert!(n >= 2, "trees need at least 2 nodes");
    let mut level: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    level.insert(vec![(0, 1)]);
    for size in 3..=n {
        let mut next = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for edges in &level {
            for attach in 0..size - 1 {
                let mut grown = edges.clone();
                grown.push((attach, size - 1));
                if seen.insert(tree_canonical_form(size, &grown)) {
                    next.insert(grown);
                }
            }
        }
        level = next;
    }
    level
        .into_iter()
        .map(|edges| must(Graph::new(n, edges)))
        .collect()
}

fn tree_canonical_form(n: usize, edges: &[(usize, usize)]) -> String {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    // peel leaves to find the one or two centers
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &leaf in &layer {
            for &v in &adj[leaf] {
                degree[v] -= 1;
                if degree[v] == 1 {
                    next.push(v);
                }
            }
        }
        layer = next;
    }
    layer
        .iter()
        .map(|&root| rooted_encoding(&adj, root, usize::MAX))
        .min()
        .expect("a tree has a center")
}

fn rooted_encoding(adj: &[Vec<usize>], node: usize, parent: usize) -> String {
    let mut children: Vec<String> = adj[node]
        .iter()
        .filter(|&&c| c != parent)
        .map(|&c| rooted_encoding(adj, c, node))
        .collect();
    children.sort();
    format!("({})", children.concat())
}
