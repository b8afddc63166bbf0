//! The node dynamics `dx_i/dt = Σ_{j~i} p(x_i - x_j)` with the pitchfork
//! coupling `p(y) = r y - y³`, its link-variable form, its potential and a
//! fixed-step integrator.

use std::fmt;
use std::io::{self, Write};
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::fmt_f64;

/// The bifurcation parameter `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub r: f64,
}

impl SystemParams {
    pub fn new(r: f64) -> Self {
        SystemParams { r }
    }

    /// `1e-3 * min(1, 1/|r|)`.
    pub fn default_dt(&self) -> f64 {
        if self.r == 0.0 {
            1e-3
        } else {
            1e-3 * (1.0 / self.r.abs()).min(1.0)
        }
    }

    /// Spectral dead zone `1e-9 * max(1, |r|)` used by stability verdicts.
    pub fn marginal_tolerance(&self) -> f64 {
        1e-9 * self.r.abs().max(1.0)
    }
}

/// Node state; entries are only meaningful up to a common additive constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        StateVector(values)
    }

    pub fn zeros(n: usize) -> Self {
        StateVector(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    /// Mean-zero representative of the class in `R^N / 1`.
    pub fn canonical(&self) -> StateVector {
        let m = self.mean();
        StateVector(self.0.iter().map(|x| x - m).collect())
    }

    /// Max-norm distance between the mean-zero representatives.
    pub fn distance_in_x(&self, other: &[f64]) -> f64 {
        assert_eq!(self.0.len(), other.len());
        let shift = self.mean() - other.iter().sum::<f64>() / other.len() as f64;
        self.0
            .iter()
            .zip(other)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b - shift).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, factor: f64) -> StateVector {
        StateVector(self.0.iter().map(|x| x * factor).collect())
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        StateVector(v)
    }
}

/// `p(y) = r y - y³`.
pub fn pitchfork(y: f64, p: SystemParams) -> f64 {
    p.r * y - y * y * y
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Time derivative of the node state.
pub fn rhs(x: &[f64], g: &Graph, p: SystemParams) -> Result<StateVector> {
    check_len(g.node_count(), x.len())?;
    let mut out = vec![0.0; x.len()];
    rhs_into(x, g, p, &mut out);
    Ok(StateVector(out))
}

/// Unchecked in-place form of [`rhs`]; `out` is overwritten.
pub fn rhs_into(x: &[f64], g: &Graph, p: SystemParams, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for &(i, j) in g.edges() {
        let f = pitchfork(x[i] - x[j], p);
        out[i] += f;
        out[j] -= f;
    }
}

/// Sign of link `m`'s orientation at `node`: `+1` if `node` is its first
/// endpoint.
fn orientation_at(edge: (usize, usize), node: usize) -> f64 {
    if edge.0 == node {
        1.0
    } else {
        -1.0
    }
}

/// Time derivative of the link variables `y_(i,j) = x_i - x_j`:
/// `dy_l/dt = 2 p(y_l) + Σ_{m~l} σ(l, m) p(y_m)`.
pub fn link_rhs(y: &[f64], g: &Graph, p: SystemParams) -> Result<Vec<f64>> {
    check_len(g.link_count(), y.len())?;
    let pv: Vec<f64> = y.iter().map(|&v| pitchfork(v, p)).collect();
    let out = g
        .edges()
        .iter()
        .enumerate()
        .map(|(l, &edge)| {
            let mut acc = 2.0 * pv[l];
            for node in [edge.0, edge.1] {
                let s_l = orientation_at(edge, node);
                for &(_, m) in g.neighbors(node) {
                    if m != l {
                        acc += s_l * orientation_at(g.edge(m), node) * pv[m];
                    }
                }
            }
            acc
        })
        .collect();
    Ok(out)
}

/// `V(x) = 1/4 Σ_{i~j} d² (d² - 2r)` with `d = x_i - x_j`.
pub fn potential(x: &[f64], g: &Graph, p: SystemParams) -> Result<f64> {
    check_len(g.node_count(), x.len())?;
    Ok(potential_unchecked(x, g, p))
}

pub(crate) fn potential_unchecked(x: &[f64], g: &Graph, p: SystemParams) -> f64 {
    g.edges()
        .iter()
        .map(|&(i, j)| {
            let d2 = (x[i] - x[j]).powi(2);
            0.25 * d2 * (d2 - 2.0 * p.r)
        })
        .sum()
}

/// Parameters of the cubic truncation of an odd coupling `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddCouplingReduction {
    pub r: f64,
    /// Factor `c` in `t' = c t`.
    pub time_scale: f64,
}

/// Maps `Σ f1 d + (f3/6) d³` onto the pitchfork system, given
/// `f1 = f'(0)` and `f3 = f'''(0)`.
pub fn odd_coupling_reduction(f1: f64, f3: f64) -> Result<OddCouplingReduction> {
    if f3 == 0.0 || !f3.is_finite() || !f1.is_finite() {
        return Err(Error::DegenerateCubic);
    }
    Ok(OddCouplingReduction {
        r: -6.0 * f1 / f3,
        time_scale: -6.0 / f3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Euler,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::Euler => "euler",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "euler" => Ok(Method::Euler),
            other => Err(format!("unknown method '{other}' (expected rk4 or euler)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub dt: f64,
    pub method: Method,
    /// Integration aborts once `max |x_i|` exceeds this.
    pub divergence_bound: f64,
    /// Record every `sample_every`-th step; the final state is always kept.
    pub sample_every: usize,
}

impl IntegratorOptions {
    pub fn for_params(p: SystemParams) -> Self {
        IntegratorOptions {
            dt: p.default_dt(),
            ..Default::default()
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_sample_every(mut self, every: usize) -> Self {
        self.sample_every = every;
        self
    }
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            dt: 1e-3,
            method: Method::Rk4,
            divergence_bound: 1e6,
            sample_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub dt: f64,
    pub method: Method,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }

    /// Potential at every recorded sample.
    pub fn potentials(&self, g: &Graph, p: SystemParams) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| potential_unchecked(s, g, p))
            .collect()
    }

    /// `t,x0,...,x{N-1}` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, |s| s.len());
        let mut header = String::from("t");
        for i in 0..n {
            header.push_str(&format!(",x{i}"));
        }
        writeln!(out, "{header}")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = fmt_f64(*t);
            for v in s.iter() {
                row.push(',');
                row.push_str(&fmt_f64(*v));
            }
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

/// Integrates the node dynamics from `x0` up to `t_end`.
pub fn integrate(
    x0: &[f64],
    g: &Graph,
    p: SystemParams,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    check_len(g.node_count(), x0.len())?;
    integrate_with(x0, |x, out| rhs_into(x, g, p, out), t_end, opts)
}

/// Fixed-step integration of an arbitrary autonomous vector field.
///
/// Sample times are `k * dt`; the last step is shortened so the final
/// sample lands on `t_end` exactly.
pub fn integrate_with<F>(
    x0: &[f64],
    mut field: F,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::InvalidStep(format!("dt must be positive, got {}", opts.dt)));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidStep(format!("t_end must be positive, got {t_end}")));
    }
    if opts.sample_every == 0 {
        return Err(Error::InvalidStep("sample_every must be at least 1".into()));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    let mut times = vec![0.0];
    let mut states = vec![StateVector(x.clone())];
    let mut t = 0.0;
    let mut step = 0usize;
    while t < t_end {
        step += 1;
        let mut t_next = step as f64 * opts.dt;
        if t_next > t_end || t_end - t_next < 1e-9 * opts.dt {
            t_next = t_end;
        }
        let h = t_next - t;
        match opts.method {
            Method::Euler => {
                field(&x, &mut k1);
                for i in 0..n {
                    x[i] += h * k1[i];
                }
            }
            Method::Rk4 => {
                field(&x, &mut k1);
                for i in 0..n {
                    tmp[i] = x[i] + 0.5 * h * k1[i];
                }
                field(&tmp, &mut k2);
                for i in 0..n {
                    tmp[i] = x[i] + 0.5 * h * k2[i];
                }
                field(&tmp, &mut k3);
                for i in 0..n {
                    tmp[i] = x[i] + h * k3[i];
                }
                field(&tmp, &mut k4);
                for i in 0..n {
                    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        t = t_next;
        let norm = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !norm.is_finite() || norm > opts.divergence_bound {
            return Err(Error::NonFiniteState { time: t, norm });
        }
        if step.is_multiple_of(opts.sample_every) || t >= t_end {
            times.push(t);
            states.push(StateVector(x.clone()));
        }
    }
    Ok(Trajectory {
        times,
        states,
        dt: opts.dt,
        method: opts.method,
        steps: step,
    })
}

/// Largest deviation between `rhs` and the central-difference `-∇V`.
pub fn gradient_check(x: &[f64], g: &Graph, p: SystemParams, h: f64) -> Result<f64> {
    let f = rhs(x, g, p)?;
    let mut probe = x.to_vec();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = potential_unchecked(&probe, g, p);
        probe[i] = x[i] - h;
        let down = potential_unchecked(&probe, g, p);
        probe[i] = x[i];
        worst = worst.max((f[i] + (up - down) / (2.0 * h)).abs());
    }
    Ok(worst)
}
