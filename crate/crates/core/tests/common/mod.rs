#![allow(dead_code)]

use pitchnet::generators::*;
use pitchnet::Graph;

/// Small connected graphs with and without cycles.
pub fn small_corpus() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 2..=6 {
        for (k, t) in all_trees(n).into_iter().enumerate() {
            out.push((format!("tree{n}_{k}"), t));
        }
    }
    for n in 3..=6 {
        out.push((format!("cycle{n}"), cycle(n)));
    }
    for n in 3..=5 {
        out.push((format!("complete{n}"), complete(n)));
    }
    out.push(("barbell3".into(), barbell(3)));
    out.push(("wheel5".into(), wheel(5)));
    out.push(("parallel_paths3".into(), parallel_paths(3)));
    out.push(("parallel_paths4".into(), parallel_paths(4)));
    out.push(("bipartite2_3".into(), complete_bipartite(2, 3)));
    out
}

/// Trees used for basin checks: paths, stars and heap-shaped binary trees.
pub fn basin_trees(max_n: usize) -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        out.push((format!("path{n}"), path(n)));
        if n >= 4 {
            out.push((format!("star{n}"), star(n)));
        }
        if n >= 4 {
            out.push((format!("binary_tree{n}"), balanced_binary_tree(n)));
        }
    }
    out
}
