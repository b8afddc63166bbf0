//! JSON file schemas and number formatting shared by the CLI.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Partition, QuotientGraph};
use crate::graph::Graph;
use crate::stationary::DetailedBalanceState;

/// Scientific notation with 17 significant digits (round-trips exactly).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// `{"nodes": N, "edges": [[i, j], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        GraphFile {
            nodes: g.node_count(),
            edges: g.edges().iter().map(|&(i, j)| [i, j]).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.nodes, self.edges.iter().map(|e| (e[0], e[1])))
    }
}

/// `{"cells": [[node ids], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub cells: Vec<Vec<usize>>,
}

impl PartitionFile {
    pub fn from_partition(p: &Partition) -> Self {
        PartitionFile { cells: p.cells() }
    }

    pub fn to_partition(&self, node_count: usize) -> Result<Partition> {
        Partition::from_cells(node_count, &self.cells)
    }
}

/// `{"nodes": K, "edges": [[k, m, d_km], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientFile {
    pub nodes: usize,
    pub edges: Vec<[usize; 3]>,
}

impl QuotientFile {
    pub fn from_quotient(q: &QuotientGraph) -> Self {
        QuotientFile {
            nodes: q.cell_count(),
            edges: q.arcs().iter().map(|a| [a.from, a.to, a.weight]).collect(),
        }
    }

    pub fn to_quotient(&self) -> Result<QuotientGraph> {
        QuotientGraph::from_arcs(self.nodes, self.edges.iter().map(|e| (e[0], e[1], e[2])))
    }
}

/// One entry of the state-list export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub assignment: Vec<i8>,
    pub dissensus_count: usize,
    pub realization: Vec<f64>,
}

impl From<&DetailedBalanceState> for StateRecord {
    fn from(d: &DetailedBalanceState) -> Self {
        StateRecord {
            assignment: d.assignment.symbols().to_vec(),
            dissensus_count: d.dissensus_count,
            realization: d.realization.to_vec(),
        }
    }
}

pub fn state_list_json(states: &[DetailedBalanceState]) -> String {
    let records: Vec<StateRecord> = states.iter().map(StateRecord::from).collect();
    serde_json::to_string_pretty(&records).expect("state records serialize")
}

fn read_text(path: &Path) -> std::io::Result<String> {
    fs::read_to_string(path)
}

/// Errors from reading input files: I/O failures are kept apart from
/// schema or domain errors so callers can map them to exit codes.
#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Parse(String),
    Domain(Error),
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadError::Io(m) | LoadError::Parse(m) => f.write_str(m),
            LoadError::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for LoadError {}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> std::result::Result<T, LoadError> {
    let text = read_text(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            LoadError::Io(format!("{what} file not found: {}", path.display()))
        } else {
            LoadError::Io(format!("cannot read {what} file {}: {e}", path.display()))
        }
    })?;
    serde_json::from_str(&text)
        .map_err(|e| LoadError::Parse(format!("malformed {what} file {}: {e}", path.display())))
}

pub fn load_graph(path: &Path) -> std::result::Result<Graph, LoadError> {
    let file: GraphFile = load_json(path, "graph")?;
    file.to_graph().map_err(LoadError::Domain)
}
