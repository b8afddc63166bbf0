use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pitchnet::exact::{lift_state, quotient_eigenstate_check, validate_eep, EIGEN_TOLERANCE};
use pitchnet::graph::{laplacian, pseudoinverse, LaplacianMatrix};
use pitchnet::io::{fmt_f64, load_graph, load_json, LoadError, PartitionFile, QuotientFile, StateRecord};
use pitchnet::stability::{analyze_state, resistance_table, StabilityReport, Verdict};
use pitchnet::stationary::{enumerate_detailed_balance_capped, residual};
use pitchnet::sweep::linear_grid;
use pitchnet::{generators, integrate, Graph, IntegratorOptions, SystemParams};

use crate::{EnumerateArgs, GraphSource, QuotientArgs, ResistanceArgs, SimulateArgs, SweepArgs};

#[derive(Debug)]
pub enum CliError {
    /// Invalid request for the model (exit code 1).
    Domain(String),
    /// Unreadable input, unwritable output or bad configuration (exit code 2).
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(m) | CliError::Config(m) => f.write_str(m),
        }
    }
}

impl From<pitchnet::Error> for CliError {
    fn from(e: pitchnet::Error) -> Self {
        match e {
            pitchnet::Error::TooLarge { .. } => {
                CliError::Domain(format!("{e}; pass --cap N or set PITCHNET_CAP"))
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Domain(d) => d.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_error(path: Option<&Path>, e: io::Error) -> CliError {
    match path {
        Some(p) => CliError::Config(format!("cannot write {}: {e}", p.display())),
        None => CliError::Config(format!("cannot write output: {e}")),
    }
}

/// Runs `write` against the file at `path`, or stdout.
fn with_output<F>(path: Option<&PathBuf>, write: F) -> CliResult<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let result = match path {
        Some(p) => File::create(p).and_then(|f| {
            let mut w = BufWriter::new(f);
            write(&mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).and_then(|_| lock.flush())
        }
    };
    result.map_err(|e| io_error(path.map(PathBuf::as_path), e))
}

fn write_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    with_output(path, |w| writeln!(w, "{text}"))
}

fn load_source(src: &GraphSource) -> CliResult<Graph> {
    match (&src.graph, &src.family, src.n) {
        (Some(path), _, _) => Ok(load_graph(path)?),
        (None, Some(family), Some(n)) => Ok(generators::named(family, n)?),
        _ => Err(CliError::Config(
            "specify a graph with --graph PATH or --family NAME --n INT".into(),
        )),
    }
}

fn check_finite(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("--{name} must be finite, got {v}")))
    }
}

#[derive(Serialize)]
struct SimulationSummary {
    nodes: usize,
    links: usize,
    r: f64,
    dt: f64,
    method: pitchnet::Method,
    steps: usize,
    t_end: f64,
    final_state: Vec<f64>,
    final_residual: f64,
    initial_potential: f64,
    final_potential: f64,
    mean_drift: f64,
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    check_finite("r", a.r)?;
    check_finite("t-end", a.t_end)?;
    let g = load_source(&a.source)?;
    let p = SystemParams::new(a.r);
    let x0: Vec<f64> = match (&a.x0, a.seed) {
        (Some(path), _) => load_json(path, "initial state")?,
        (None, seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            let w = if a.r == 0.0 { 1.0 } else { 2.0 * a.r.abs().sqrt() };
            (0..g.node_count()).map(|_| rng.gen_range(-w..=w)).collect()
        }
    };
    let mut opts = IntegratorOptions::for_params(p)
        .with_method(a.method)
        .with_sample_every(a.sample_every);
    if let Some(dt) = a.dt {
        opts = opts.with_dt(dt);
    }
    let traj = integrate(&x0, &g, p, a.t_end, &opts)?;
    with_output(a.out.as_ref(), |w| traj.write_csv(w))?;

    let first = &traj.states[0];
    let last = traj.final_state();
    let potentials = traj.potentials(&g, p);
    let summary = SimulationSummary {
        nodes: g.node_count(),
        links: g.link_count(),
        r: a.r,
        dt: traj.dt,
        method: traj.method,
        steps: traj.steps,
        t_end: traj.final_time(),
        final_state: last.to_vec(),
        final_residual: residual(last, &g, p)?,
        initial_potential: potentials[0],
        final_potential: *potentials.last().expect("nonempty"),
        mean_drift: last.mean() - first.mean(),
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    match &a.summary {
        Some(path) => with_output(Some(path), |w| writeln!(w, "{text}")),
        None => {
            eprintln!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct EnumeratedState {
    #[serde(flatten)]
    record: StateRecord,
    stability: StabilityReport,
}

#[derive(Serialize)]
struct VerdictCounts {
    total: usize,
    stable: usize,
    unstable: usize,
    marginal: usize,
}

#[derive(Serialize)]
struct EnumerationReport {
    nodes: usize,
    links: usize,
    r: f64,
    counts: VerdictCounts,
    states: Vec<EnumeratedState>,
}

pub fn enumerate(a: &EnumerateArgs) -> CliResult<()> {
    check_finite("r", a.r)?;
    if a.r <= 0.0 {
        return Err(CliError::Domain(format!(
            "enumeration needs r > 0: dissensus states require r > 0, got r = {}",
            a.r
        )));
    }
    let g = load_source(&a.source)?;
    let p = SystemParams::new(a.r);
    let states = enumerate_detailed_balance_capped(&g, p, a.cap)?;
    let pinv = pseudoinverse(&laplacian(&g))?;
    let mut out = Vec::with_capacity(states.len());
    for d in &states {
        out.push(EnumeratedState {
            record: StateRecord::from(d),
            stability: analyze_state(d, &g, &pinv, p)?,
        });
    }
    let count = |v: Verdict| out.iter().filter(|s| s.stability.verdict == v).count();
    let report = EnumerationReport {
        nodes: g.node_count(),
        links: g.link_count(),
        r: a.r,
        counts: VerdictCounts {
            total: out.len(),
            stable: count(Verdict::Stable),
            unstable: count(Verdict::Unstable),
            marginal: count(Verdict::Marginal),
        },
        states: out,
    };
    write_json(a.out.as_ref(), &report)
}

pub fn sweep(a: &SweepArgs) -> CliResult<()> {
    let grid = match a.r {
        Some(r) => {
            check_finite("r", r)?;
            vec![r]
        }
        None => linear_grid(a.r_min, a.r_max, a.r_steps)
            .map_err(|e| CliError::Config(e.to_string()))?,
    };
    let table = pitchnet::sweep::sweep(&a.family, a.n, &grid)?;
    with_output(a.out.as_ref(), |w| table.write_csv(w))
}

pub fn resistance(a: &ResistanceArgs) -> CliResult<()> {
    let g = load_source(&a.source)?;
    let rows = resistance_table(&g)?;
    with_output(a.out.as_ref(), |w| {
        writeln!(w, "i,j,omega,verdict")?;
        for row in &rows {
            writeln!(w, "{},{},{},{}", row.edge.0, row.edge.1, fmt_f64(row.omega), row.verdict)?;
        }
        Ok(())
    })
}

#[derive(Serialize)]
struct LiftedState {
    y: Vec<f64>,
    is_eigenstate: bool,
    /// `null` unless the state passed the check.
    mu: Option<f64>,
    trivial: bool,
    lifted: Vec<f64>,
    /// Max-norm of the node dynamics at the lifted state.
    residual: f64,
    /// Max-norm of `Q x - mu x` at the lifted state, when `mu` is known.
    eigen_residual: Option<f64>,
}

#[derive(Serialize)]
struct QuotientReport {
    quotient: QuotientFile,
    cell_sizes: Vec<usize>,
    r: f64,
    tolerance: f64,
    states: Vec<LiftedState>,
}

pub fn quotient(a: &QuotientArgs) -> CliResult<()> {
    check_finite("r", a.r)?;
    let g = load_source(&a.source)?;
    let p = SystemParams::new(a.r);
    let part_file: PartitionFile = load_json(&a.partition, "partition")?;
    let part = part_file.to_partition(g.node_count())?;
    let qg = validate_eep(&g, &part)?;
    let ys: Vec<Vec<f64>> = match &a.states {
        Some(path) => load_json(path, "quotient states")?,
        None => Vec::new(),
    };
    let q = laplacian(&g);
    let mut states = Vec::with_capacity(ys.len());
    for y in ys {
        let check = quotient_eigenstate_check(&qg, &y, p);
        let lifted = lift_state(&qg, &part, &y)?;
        let res = residual(&lifted, &g, p)?;
        let mu = check.is_eigenstate.then_some(check.mu);
        let eigen_residual = mu.map(|mu| eigen_residual(&q, &lifted, mu));
        states.push(LiftedState {
            y,
            is_eigenstate: check.is_eigenstate,
            mu,
            trivial: check.trivial,
            lifted: lifted.into_inner(),
            residual: res,
            eigen_residual,
        });
    }
    let report = QuotientReport {
        quotient: QuotientFile::from_quotient(&qg),
        cell_sizes: part.cell_sizes(),
        r: a.r,
        tolerance: EIGEN_TOLERANCE,
        states,
    };
    write_json(a.out.as_ref(), &report)
}

/// `max_i |(Q x)_i - mu x_i|`.
fn eigen_residual(q: &LaplacianMatrix, x: &[f64], mu: f64) -> f64 {
    let m = q.as_matrix();
    (0..x.len())
        .map(|i| {
            let qx: f64 = (0..x.len()).map(|j| m[(i, j)] * x[j]).sum();
            (qx - mu * x[i]).abs()
        })
        .fold(0.0, f64::max)
}
