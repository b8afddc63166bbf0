use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph needs at least 2 nodes, got {0}")]
    EmptyGraph(usize),
    #[error("edge ({0}, {1}) references a node outside 0..{2}")]
    NodeOutOfRange(usize, usize, usize),
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is not connected (node {0} unreachable from node 0)")]
    DisconnectedGraph(usize),
    #[error("({0}, {1}) is not an edge of the graph")]
    NotAnEdge(usize, usize),
    #[error("laplacian has {0} near-zero eigenvalues, expected exactly one")]
    NumericalRankDeficiency(usize),
    #[error("effective resistance requested between node {0} and itself")]
    SameNode(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("third derivative of the coupling vanishes; reduction undefined")]
    DegenerateCubic,
    #[error("invalid integration settings: {0}")]
    InvalidStep(String),
    #[error("state diverged at t = {time} (max |x| = {norm:e})")]
    NonFiniteState { time: f64, norm: f64 },
    #[error("link assignment is inconsistent around the cycle closed by edge ({0}, {1})")]
    CycleInconsistent(usize, usize),
    #[error("dissensus states require r > 0, got r = {0}")]
    NegativeR(f64),
    #[error("graph has {links} links, above the enumeration cap of {cap} (raise the cap to override)")]
    TooLarge { links: usize, cap: usize },
    #[error("symmetric eigensolver failed: {0}")]
    EigensolverFailure(String),
    #[error("no cycle-consistent detailed-balance state has this consensus link set")]
    NoSuchState,
    #[error("partition is not externally equitable: nodes {0} and {1} differ in neighbour count towards cell {2}")]
    NotEquitable(usize, usize, usize),
    #[error("partition does not match: {0}")]
    PartitionMismatch(String),
    #[error("closed-form solution undefined: {0}")]
    OutOfDomain(String),
    #[error("operation requires a tree graph")]
    NotATree,
    #[error("unknown graph family '{0}'")]
    UnknownFamily(String),
}

pub type Result<T> = std::result::Result<T, Error>;
