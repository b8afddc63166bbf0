//! Basins of attraction: the sign rule for sub-critical states on trees
//! and empirical basin sampling on arbitrary graphs.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, potential, IntegratorOptions, StateVector, SystemParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::stationary::{
    enumerate_detailed_balance_capped, realize, residual, DetailedBalanceState, LinkAssignment,
    DEFAULT_ENUMERATION_CAP,
};

/// Max-norm distance in X within which a final state is binned to a
/// stationary state.
pub const BIN_TOLERANCE: f64 = 1e-4;

/// Final residual above which a sample counts as not converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

/// `V_c = -(L - 1) r² / 4`.
pub fn critical_potential(g: &Graph, p: SystemParams) -> Result<f64> {
    if p.r.is_nan() || p.r <= 0.0 {
        return Err(Error::NegativeR(p.r));
    }
    Ok(-((g.link_count() - 1) as f64) * p.r * p.r / 4.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinPrediction {
    /// The full-dissensus state the trajectory converges to.
    pub target: DetailedBalanceState,
    /// `sign(x_i - x_j)` per canonical link.
    pub sign_pattern: Vec<i8>,
    pub sub_critical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasinOutcome {
    Predicted(BasinPrediction),
    /// At or above the critical potential, or some link difference is zero.
    NotPredictable,
}

/// On a tree below the critical potential, the limit is the full-dissensus
/// state whose link signs agree with those of `x`.
pub fn predict_basin(x: &[f64], g: &Graph, p: SystemParams) -> Result<BasinOutcome> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    let vc = critical_potential(g, p)?;
    if potential(x, g, p)? >= vc {
        return Ok(BasinOutcome::NotPredictable);
    }
    let diffs = g.link_differences(x);
    if diffs.contains(&0.0) {
        return Ok(BasinOutcome::NotPredictable);
    }
    let sign_pattern: Vec<i8> = diffs.iter().map(|&d| if d > 0.0 { 1 } else { -1 }).collect();
    let target = realize(&LinkAssignment::new(sign_pattern.clone())?, g, p)?;
    Ok(BasinOutcome::Predicted(BasinPrediction {
        target,
        sign_pattern,
        sub_critical: true,
    }))
}

/// Node values on a tree with prescribed link differences `x_i - x_j`,
/// shifted to mean zero.
pub fn tree_state_from_differences(g: &Graph, diffs: &[f64]) -> Result<StateVector> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    if diffs.len() != g.link_count() {
        return Err(Error::DimensionMismatch {
            expected: g.link_count(),
            got: diffs.len(),
        });
    }
    let tree = g.spanning_tree();
    let mut x = vec![0.0; g.node_count()];
    for &v in tree.order.iter().skip(1) {
        let (u, e) = tree.parent[v].expect("non-root node has a parent");
        let (a, _) = g.edge(e);
        x[v] = if a == u { x[u] - diffs[e] } else { x[u] + diffs[e] };
    }
    Ok(StateVector::new(x).canonical())
}

/// Random state on a tree strictly below the critical potential, by
/// rejection: each link difference is `s √r (1 + δ)` with a random sign `s`
/// and `δ` uniform in `[-0.6/√L, 0.6/√L]`.
pub fn sample_subcritical_tree_state<R: Rng>(g: &Graph, p: SystemParams, rng: &mut R) -> Result<StateVector> {
    let vc = critical_potential(g, p)?;
    let sqrt_r = p.r.sqrt();
    let spread = 0.6 / (g.link_count() as f64).sqrt();
    loop {
        let diffs: Vec<f64> = (0..g.link_count())
            .map(|_| {
                let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                s * sqrt_r * (1.0 + rng.gen_range(-spread..=spread))
            })
            .collect();
        let x = tree_state_from_differences(g, &diffs)?;
        if potential(&x, g, p)? < vc {
            return Ok(x);
        }
    }
}

#[derive(Debug, Clone)]
pub struct SamplingOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub t_end: f64,
    /// Half-width of the sampling box; `2√|r|` when `None`.
    pub half_width: Option<f64>,
    pub integrator: IntegratorOptions,
    pub cap: usize,
}

impl SamplingOptions {
    pub fn new(p: SystemParams, n_samples: usize, seed: u64, t_end: f64) -> Self {
        SamplingOptions {
            n_samples,
            seed,
            t_end,
            half_width: None,
            integrator: IntegratorOptions::for_params(p).with_sample_every(usize::MAX),
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Where one sample ended up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SampleOutcome {
    /// Index into [`BasinHistogram::states`].
    State(usize),
    /// Residual still above [`CONVERGENCE_TOLERANCE`] at `t_end`.
    NonConvergent { residual: f64 },
    /// Converged to a stationary state outside the detailed-balance list,
    /// such as a point of the `K_3` circle.
    OtherStationary,
}

#[derive(Debug, Clone)]
pub struct BasinHistogram {
    pub states: Vec<DetailedBalanceState>,
    pub counts: Vec<usize>,
    /// Initial state of each sample, aligned with `outcomes`.
    pub starts: Vec<StateVector>,
    pub outcomes: Vec<SampleOutcome>,
}

impl BasinHistogram {
    pub fn non_convergent(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o, SampleOutcome::NonConvergent { .. }))
            .count()
    }

    pub fn other_stationary(&self) -> usize {
        self.outcomes
            .iter()
            .filter(|o| matches!(o, SampleOutcome::OtherStationary))
            .count()
    }

    /// `state_index,assignment,count`, assignments as `;`-joined symbols.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "state_index,assignment,count")?;
        for (k, (state, count)) in self.states.iter().zip(&self.counts).enumerate() {
            let symbols: Vec<String> = state.assignment.symbols().iter().map(|s| s.to_string()).collect();
            writeln!(out, "{k},{},{count}", symbols.join(";"))?;
        }
        Ok(())
    }
}

fn nearest(states: &[DetailedBalanceState], x: &StateVector) -> Option<(usize, f64)> {
    states
        .iter()
        .enumerate()
        .map(|(k, s)| (k, x.distance_in_x(&s.realization)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Integrates `n_samples` random initial states and bins each final state
/// by the nearest detailed-balance state.
///
/// Initial coordinates are uniform in `[-w, w]` and then shifted to mean
/// zero. For `r < 0` the only candidate is consensus.
pub fn sample_basins(g: &Graph, p: SystemParams, opts: &SamplingOptions) -> Result<BasinHistogram> {
    if p.r == 0.0 {
        return Err(Error::OutOfDomain("basin sampling needs r != 0".into()));
    }
    let states = if p.r > 0.0 {
        enumerate_detailed_balance_capped(g, p, opts.cap)?
    } else {
        vec![realize(&LinkAssignment::all_consensus(g.link_count()), g, p)?]
    };
    let w = opts.half_width.unwrap_or(2.0 * p.r.abs().sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut counts = vec![0; states.len()];
    let mut outcomes = Vec::with_capacity(opts.n_samples);
    let mut starts = Vec::with_capacity(opts.n_samples);
    for _ in 0..opts.n_samples {
        let x0 = StateVector::new((0..g.node_count()).map(|_| rng.gen_range(-w..=w)).collect()).canonical();
        let traj = integrate(&x0, g, p, opts.t_end, &opts.integrator)?;
        let x = traj.final_state().canonical();
        let res = residual(&x, g, p)?;
        let outcome = match nearest(&states, &x) {
            Some((k, dist)) if dist <= BIN_TOLERANCE => {
                counts[k] += 1;
                SampleOutcome::State(k)
            }
            _ if res > CONVERGENCE_TOLERANCE => SampleOutcome::NonConvergent { residual: res },
            _ => SampleOutcome::OtherStationary,
        };
        outcomes.push(outcome);
        starts.push(x0);
    }
    Ok(BasinHistogram {
        states,
        counts,
        starts,
        outcomes,
    })
}
