//! Linear stability of stationary states: Jacobians, spectral verdicts on
//! the mean-zero subspace and the effective-resistance criteria.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{StateVector, SystemParams};
use crate::error::{Error, Result};
use crate::graph::{edge_subset_laplacian, laplacian, pseudoinverse, Graph, PseudoinverseMatrix};
use crate::linalg::{mean_zero_projector, symmetric_eigen};
use crate::stationary::{find_assignment_with_consensus, DetailedBalanceState, LinkAssignment};

/// Resistance threshold separating stable from unstable consensus links.
pub const CRITICAL_RESISTANCE: f64 = 2.0 / 3.0;

/// Dead zone around [`CRITICAL_RESISTANCE`].
pub const RESISTANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JacobianProvenance {
    Elementwise,
    LaplacianForm,
}

/// Symmetric Jacobian of the node dynamics at some state.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    pub matrix: DMatrix<f64>,
    pub provenance: JacobianProvenance,
}

/// Entrywise Jacobian, valid at any state: off-diagonal `-r + 3(x_i - x_j)²`
/// on links, diagonal the negated row sum.
pub fn jacobian_elementwise(x: &[f64], g: &Graph, p: SystemParams) -> Result<JacobianMatrix> {
    let n = g.node_count();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    let mut m = DMatrix::zeros(n, n);
    for &(i, j) in g.edges() {
        let d = x[i] - x[j];
        let off = -p.r + 3.0 * d * d;
        m[(i, j)] = off;
        m[(j, i)] = off;
        m[(i, i)] -= off;
        m[(j, j)] -= off;
    }
    Ok(JacobianMatrix {
        matrix: m,
        provenance: JacobianProvenance::Elementwise,
    })
}

/// `r (Q - 3 Q_≠)` where `Q_≠` is the Laplacian of the dissensus links.
pub fn jacobian_laplacian_form(d: &DetailedBalanceState, g: &Graph, p: SystemParams) -> JacobianMatrix {
    let symbols = d.assignment.symbols();
    let q = laplacian(g).into_matrix();
    let q_dis = edge_subset_laplacian(g, |k| symbols[k] != 0);
    JacobianMatrix {
        matrix: (q - q_dis * 3.0) * p.r,
        provenance: JacobianProvenance::LaplacianForm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "Stable",
            Verdict::Unstable => "Unstable",
            Verdict::Marginal => "Marginal",
        })
    }
}

/// Outcome of a resistance criterion. `Marginal` only arises for a single
/// consensus link sitting on the threshold; `Inconclusive` only from the
/// mixed-state criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prediction {
    Stable,
    Unstable,
    Marginal,
    Inconclusive,
}

impl Prediction {
    /// The spectral verdict this prediction commits to, if any.
    pub fn as_verdict(self) -> Option<Verdict> {
        match self {
            Prediction::Stable => Some(Verdict::Stable),
            Prediction::Unstable => Some(Verdict::Unstable),
            Prediction::Marginal | Prediction::Inconclusive => None,
        }
    }
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prediction::Stable => "Stable",
            Prediction::Unstable => "Unstable",
            Prediction::Marginal => "Marginal",
            Prediction::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Single,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistanceReport {
    pub criterion: Criterion,
    pub omega_sum: f64,
    pub omega_max: f64,
    pub verdict: Prediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub lambda_max: f64,
    /// The `N - 1` eigenvalues on the mean-zero subspace, descending.
    pub eigenvalues: Vec<f64>,
    pub verdict: Verdict,
    pub marginal_tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resistance: Option<ResistanceReport>,
}

fn verdict_for(lambda_max: f64, tol: f64) -> Verdict {
    if lambda_max < -tol {
        Verdict::Stable
    } else if lambda_max > tol {
        Verdict::Unstable
    } else {
        Verdict::Marginal
    }
}

/// Spectrum of `P J P` with `P = I - 11ᵀ/N`, minus the eigenvalue belonging
/// to the constant direction.
pub fn classify(j: &JacobianMatrix, p: SystemParams) -> Result<StabilityReport> {
    let n = j.matrix.nrows();
    if n < 2 || !j.matrix.is_square() {
        return Err(Error::EigensolverFailure(format!(
            "need a square matrix of size at least 2, got {}x{}",
            j.matrix.nrows(),
            j.matrix.ncols()
        )));
    }
    let proj = mean_zero_projector(n);
    let mut restricted = &proj * &j.matrix * &proj;
    // symmetrize away rounding so the solver sees an exactly symmetric input
    restricted = (&restricted + restricted.transpose()) * 0.5;
    let eig = symmetric_eigen(&restricted)?;
    let constant = (0..n)
        .max_by(|&a, &b| {
            let overlap = |k: usize| eig.vectors.column(k).sum().abs();
            overlap(a).total_cmp(&overlap(b))
        })
        .expect("n >= 2");
    let mut eigenvalues: Vec<f64> = eig
        .values
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != constant)
        .map(|(_, &v)| v)
        .collect();
    eigenvalues.reverse();
    let lambda_max = eigenvalues[0];
    let tol = p.marginal_tolerance();
    Ok(StabilityReport {
        lambda_max,
        eigenvalues,
        verdict: verdict_for(lambda_max, tol),
        marginal_tolerance: tol,
        resistance: None,
    })
}

fn single_prediction(omega: f64) -> Prediction {
    if omega < CRITICAL_RESISTANCE - RESISTANCE_TOLERANCE {
        Prediction::Stable
    } else if omega > CRITICAL_RESISTANCE + RESISTANCE_TOLERANCE {
        Prediction::Unstable
    } else {
        Prediction::Marginal
    }
}

fn mixed_prediction(omega_sum: f64, omega_max: f64) -> Prediction {
    if omega_sum < CRITICAL_RESISTANCE - RESISTANCE_TOLERANCE {
        Prediction::Stable
    } else if omega_max > CRITICAL_RESISTANCE + RESISTANCE_TOLERANCE {
        Prediction::Unstable
    } else {
        Prediction::Inconclusive
    }
}

/// Resistance prediction for a state with exactly one consensus link.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleConsensusPrediction {
    pub edge: (usize, usize),
    pub omega: f64,
    pub verdict: Prediction,
    /// A state witnessing that such a configuration exists.
    pub assignment: LinkAssignment,
}

pub fn predict_single_consensus(g: &Graph, edge: (usize, usize)) -> Result<SingleConsensusPrediction> {
    let pinv = pseudoinverse(&laplacian(g))?;
    predict_single_consensus_with(g, &pinv, edge)
}

/// As [`predict_single_consensus`], reusing a precomputed `Q†`.
pub fn predict_single_consensus_with(
    g: &Graph,
    pinv: &PseudoinverseMatrix,
    edge: (usize, usize),
) -> Result<SingleConsensusPrediction> {
    let (i, j) = edge;
    let k = g.edge_index(i, j).ok_or(Error::NotAnEdge(i, j))?;
    let assignment = find_assignment_with_consensus(g, &[k]).ok_or(Error::NoSuchState)?;
    let omega = pinv.resistance(i, j)?;
    Ok(SingleConsensusPrediction {
        edge: g.edge(k),
        omega,
        verdict: single_prediction(omega),
        assignment,
    })
}

/// Per-link verdict for resistance tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkVerdict {
    /// A state with exactly this consensus link exists; single-link verdict.
    Single(Prediction),
    /// No single-consensus state exists, but `ω > 2/3` makes every state
    /// with this link in consensus unstable by the max criterion.
    ConsensusUnstable,
    /// No single-consensus state exists and `ω` decides nothing.
    NoState,
}

impl fmt::Display for LinkVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkVerdict::Single(p) => write!(f, "{p}"),
            LinkVerdict::ConsensusUnstable => f.write_str("Unstable"),
            LinkVerdict::NoState => f.write_str("no-state"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkResistance {
    pub edge: (usize, usize),
    pub omega: f64,
    pub verdict: LinkVerdict,
}

/// Effective resistance and verdict for every link, in canonical order.
pub fn resistance_table(g: &Graph) -> Result<Vec<LinkResistance>> {
    let pinv = pseudoinverse(&laplacian(g))?;
    g.edges()
        .iter()
        .map(|&edge| {
            let omega = pinv.resistance(edge.0, edge.1)?;
            let verdict = match predict_single_consensus_with(g, &pinv, edge) {
                Ok(pred) => LinkVerdict::Single(pred.verdict),
                Err(Error::NoSuchState) if omega > CRITICAL_RESISTANCE + RESISTANCE_TOLERANCE => {
                    LinkVerdict::ConsensusUnstable
                }
                Err(Error::NoSuchState) => LinkVerdict::NoState,
                Err(e) => return Err(e),
            };
            Ok(LinkResistance { edge, omega, verdict })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedPrediction {
    pub omega_sum: f64,
    pub omega_max: f64,
    pub verdict: Prediction,
    pub assignment: LinkAssignment,
}

/// Sum and max criteria over the consensus links of a detailed-balance state.
pub fn predict_mixed(g: &Graph, consensus_edges: &[(usize, usize)]) -> Result<MixedPrediction> {
    let mut indices = Vec::with_capacity(consensus_edges.len());
    for &(i, j) in consensus_edges {
        indices.push(g.edge_index(i, j).ok_or(Error::NotAnEdge(i, j))?);
    }
    indices.sort_unstable();
    indices.dedup();
    let assignment = find_assignment_with_consensus(g, &indices).ok_or(Error::NoSuchState)?;
    let pinv = pseudoinverse(&laplacian(g))?;
    let (omega_sum, omega_max) = resistance_totals(g, &pinv, &indices)?;
    Ok(MixedPrediction {
        omega_sum,
        omega_max,
        verdict: mixed_prediction(omega_sum, omega_max),
        assignment,
    })
}

fn resistance_totals(g: &Graph, pinv: &PseudoinverseMatrix, links: &[usize]) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut max = 0.0_f64;
    for &k in links {
        let (i, j) = g.edge(k);
        let w = pinv.resistance(i, j)?;
        sum += w;
        max = max.max(w);
    }
    Ok((sum, max))
}

/// Spectral report of a detailed-balance state, with the applicable
/// resistance criterion attached: the single-link criterion when exactly one
/// link is in consensus, the mixed criterion when several are (but not all).
pub fn analyze_state(
    d: &DetailedBalanceState,
    g: &Graph,
    pinv: &PseudoinverseMatrix,
    p: SystemParams,
) -> Result<StabilityReport> {
    let mut report = classify(&jacobian_laplacian_form(d, g, p), p)?;
    let consensus = d.assignment.consensus_links();
    if !consensus.is_empty() && consensus.len() < g.link_count() && p.r > 0.0 {
        let (omega_sum, omega_max) = resistance_totals(g, pinv, &consensus)?;
        report.resistance = Some(if consensus.len() == 1 {
            ResistanceReport {
                criterion: Criterion::Single,
                omega_sum,
                omega_max,
                verdict: single_prediction(omega_max),
            }
        } else {
            ResistanceReport {
                criterion: Criterion::Mixed,
                omega_sum,
                omega_max,
                verdict: mixed_prediction(omega_sum, omega_max),
            }
        });
    }
    Ok(report)
}

/// Closed-form Jacobian spectrum of the two-group state on `K_N` with `V`
/// nodes in one group, ascending, `N` values including the constant
/// direction's 0.
///
/// For `0 < V < N` the spectrum is `0`, `-2rN`, `-3r(V - N/3)` with
/// multiplicity `N - V - 1` and `3r(V - 2N/3)` with multiplicity `V - 1`.
/// For `V = 0` or `V = N` there is only one group: the state is full
/// consensus with Jacobian `rQ`, so the spectrum is `0` and `rN` repeated
/// `N - 1` times.
pub fn complete_graph_spectrum(n: usize, v: usize, p: SystemParams) -> Vec<f64> {
    assert!(v <= n, "group size {v} exceeds node count {n}");
    let (nf, vf, r) = (n as f64, v as f64, p.r);
    let mut values = vec![0.0];
    if v == 0 || v == n {
        values.extend(std::iter::repeat_n(r * nf, n - 1));
    } else {
        values.push(-2.0 * r * nf);
        values.extend(std::iter::repeat_n(-3.0 * r * (vf - nf / 3.0), n - v - 1));
        values.extend(std::iter::repeat_n(3.0 * r * (vf - 2.0 * nf / 3.0), v - 1));
    }
    values.sort_by(f64::total_cmp);
    values
}

/// Stability of the `V`-group state on `K_N` for `r > 0`: stable iff
/// `V/N ∈ (1/3, 2/3)`, marginal at the endpoints.
pub fn classify_complete(n: usize, v: usize) -> Verdict {
    let (three_v, n) = (3 * v, n);
    if three_v > n && three_v < 2 * n {
        Verdict::Stable
    } else if three_v == n || three_v == 2 * n {
        Verdict::Marginal
    } else {
        Verdict::Unstable
    }
}

/// Helper for reports keyed by the mean-zero realization.
pub fn classify_state(x: &StateVector, g: &Graph, p: SystemParams) -> Result<StabilityReport> {
    classify(&jacobian_elementwise(x, g, p)?, p)
}
