//! Monte-Carlo sweeps producing plot-ready data tables and run manifests.
//!
//! Every drop draws its geometry and channels from streams keyed only by the
//! drop index, so all curves and x-points of a sweep see the same random
//! placements (common random numbers). Node-count sweeps use nested node
//! sets: the first `K` nodes of the largest placement.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::ao::run_ao;
use crate::baselines::mrt_baseline;
use crate::channel::{ChannelSet, Fading};
use crate::config::Config;
use crate::numerics::SeededRng;
use crate::scenario::{db_to_linear, place_nodes_uniform, SystemParams};

const PURPOSE_GEOMETRY: u64 = 0x6E0;
const PURPOSE_AO: u64 = 0xA0;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("table: {0}")]
    Table(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("drop {drop}: {message}")]
    Drop { drop: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    FeasibilityVsNodes,
    FeasibilityVsGamma,
    Convergence,
    Tradeoff,
    MrtCompare,
    /// Node-count experiment's BS-height curves swept over the communication
    /// SINR instead of the node count.
    FeasibilityHeightsVsGamma,
}

impl ExperimentKind {
    pub const ALL: [Self; 6] = [
        Self::FeasibilityVsNodes,
        Self::FeasibilityVsGamma,
        Self::Convergence,
        Self::Tradeoff,
        Self::MrtCompare,
        Self::FeasibilityHeightsVsGamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::FeasibilityVsNodes => "feasibility-vs-nodes",
            Self::FeasibilityVsGamma => "feasibility-vs-gamma",
            Self::Convergence => "convergence",
            Self::Tradeoff => "tradeoff",
            Self::MrtCompare => "mrt-compare",
            Self::FeasibilityHeightsVsGamma => "feasibility-heights-vs-gamma",
        }
    }

    pub fn table_name(self) -> &'static str {
        match self {
            Self::FeasibilityVsNodes => "data_node.txt",
            Self::FeasibilityVsGamma => "data_C.txt",
            Self::Convergence => "data_conv.txt",
            Self::Tradeoff => "data_SEHSEn.txt",
            Self::MrtCompare => "data_EC.txt",
            Self::FeasibilityHeightsVsGamma => "data_node_gamma.txt",
        }
    }

    fn metric(self) -> Metric {
        match self {
            Self::FeasibilityVsNodes | Self::FeasibilityVsGamma | Self::FeasibilityHeightsVsGamma => {
                Metric::Feasibility
            }
            Self::Convergence => Metric::Convergence,
            Self::Tradeoff | Self::MrtCompare => Metric::SumHe,
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            ExperimentError::Spec(format!(
                "unknown experiment `{s}` (expected one of {})",
                names.join(", ")
            ))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Metric {
    Feasibility,
    SumHe,
    Convergence,
}

/// Quantity varied along the table's first column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XAxis {
    Nodes,
    GammaDb,
    EtaDb,
    /// Outer AO iteration at full thresholds, starting from 1.
    Iteration,
}

impl XAxis {
    fn name(self) -> &'static str {
        match self {
            Self::Nodes => "nodes",
            Self::GammaDb => "gamma_db",
            Self::EtaDb => "eta_db",
            Self::Iteration => "iteration",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelModel {
    Los,
    Rician { kappa: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Ao,
    Mrt,
}

/// One table column: a method on a channel model with optional overrides of
/// the configured parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSpec {
    pub label: String,
    pub channel: ChannelModel,
    pub method: Method,
    pub bs_height_m: Option<f64>,
    pub gamma_db: Option<f64>,
    pub eta_db: Option<f64>,
}

impl CurveSpec {
    pub fn new(label: impl Into<String>, channel: ChannelModel) -> Self {
        Self {
            label: label.into(),
            channel,
            method: Method::Ao,
            bs_height_m: None,
            gamma_db: None,
            eta_db: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub x_axis: XAxis,
    pub x: Vec<f64>,
    pub curves: Vec<CurveSpec>,
    pub drops: usize,
    pub seed: u64,
    /// Worker threads; 0 picks the available parallelism.
    pub threads: usize,
}

fn range(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(f64::from).collect()
}

impl ExperimentSpec {
    /// The standard sweep for `kind`, on top of `config`.
    pub fn standard(kind: ExperimentKind, config: &Config) -> Self {
        let rician = ChannelModel::Rician {
            kappa: config.params.kappa,
        };
        let heights = || {
            [10.0, 20.0, 30.0]
                .map(|h| CurveSpec {
                    bs_height_m: Some(h),
                    ..CurveSpec::new(format!("bs_height_{h}m"), ChannelModel::Los)
                })
                .to_vec()
        };
        let (x_axis, x, curves) = match kind {
            ExperimentKind::FeasibilityVsNodes => (XAxis::Nodes, range(2, 10), heights()),
            ExperimentKind::FeasibilityHeightsVsGamma => (XAxis::GammaDb, range(1, 20), heights()),
            ExperimentKind::FeasibilityVsGamma => (
                XAxis::GammaDb,
                range(1, 30),
                [5.0, 15.0, 25.0]
                    .map(|e| CurveSpec {
                        eta_db: Some(e),
                        ..CurveSpec::new(format!("eta_{e}dB"), rician)
                    })
                    .to_vec(),
            ),
            ExperimentKind::Convergence => (
                XAxis::Iteration,
                range(1, 10),
                vec![
                    CurveSpec::new("los", ChannelModel::Los),
                    CurveSpec::new("kappa_10", ChannelModel::Rician { kappa: 10.0 }),
                    CurveSpec::new("kappa_5", ChannelModel::Rician { kappa: 5.0 }),
                    CurveSpec::new("kappa_1", ChannelModel::Rician { kappa: 1.0 }),
                ],
            ),
            ExperimentKind::Tradeoff => (
                XAxis::EtaDb,
                range(1, 10),
                [5.0, 10.0, 15.0]
                    .map(|g| CurveSpec {
                        gamma_db: Some(g),
                        ..CurveSpec::new(format!("gamma_{g}dB"), rician)
                    })
                    .to_vec(),
            ),
            ExperimentKind::MrtCompare => {
                let channels = [
                    ("los", ChannelModel::Los),
                    ("kappa_10", ChannelModel::Rician { kappa: 10.0 }),
                    ("kappa_5", ChannelModel::Rician { kappa: 5.0 }),
                ];
                let mut curves = Vec::new();
                for (method, tag) in [(Method::Ao, "proposed"), (Method::Mrt, "mrt")] {
                    for (name, ch) in channels {
                        curves.push(CurveSpec {
                            method,
                            ..CurveSpec::new(format!("{tag}_{name}"), ch)
                        });
                    }
                }
                (XAxis::GammaDb, range(1, 15), curves)
            }
        };
        Self {
            kind,
            x_axis,
            x,
            curves,
            drops: config.drops,
            seed: config.seed,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Spec(m.to_string()));
        if self.drops == 0 {
            return bad("drops must be >= 1");
        }
        if self.x.is_empty() || self.curves.is_empty() {
            return bad("sweep needs at least one x value and one curve");
        }
        if self.x.windows(2).any(|w| !(w[0] < w[1])) || self.x.iter().any(|x| !x.is_finite()) {
            return bad("x values must be finite and strictly increasing");
        }
        match self.x_axis {
            XAxis::Nodes | XAxis::Iteration => {
                if self.x.iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
                    return bad("node counts and iterations must be positive integers");
                }
            }
            XAxis::GammaDb | XAxis::EtaDb => {}
        }
        if (self.x_axis == XAxis::Iteration) != (self.kind.metric() == Metric::Convergence) {
            return bad("the iteration axis belongs to the convergence experiment");
        }
        for c in &self.curves {
            if let ChannelModel::Rician { kappa } = c.channel {
                if !(kappa >= 0.0 && kappa.is_finite()) {
                    return bad("Rician factor must be finite and >= 0");
                }
            }
            if c.bs_height_m.is_some_and(|h| !(h > 0.0)) {
                return bad("BS height must be > 0");
            }
        }
        Ok(())
    }

    fn n_points(&self) -> usize {
        if self.x_axis == XAxis::Iteration {
            1
        } else {
            self.x.len()
        }
    }

    fn max_nodes(&self, base: &SystemParams) -> usize {
        match self.x_axis {
            XAxis::Nodes => self.x.iter().fold(0.0f64, |a, &b| a.max(b)) as usize,
            _ => base.n_nodes,
        }
    }

    /// Parameters, BS height and fading of one (point, curve) cell.
    pub fn resolve(&self, config: &Config, point: usize, curve: usize) -> (SystemParams, f64, Fading) {
        let c = &self.curves[curve];
        let mut p = config.params.clone();
        if let Some(g) = c.gamma_db {
            p.gamma = db_to_linear(g);
        }
        if let Some(e) = c.eta_db {
            p.eta = db_to_linear(e);
        }
        if self.x_axis != XAxis::Iteration {
            let x = self.x[point];
            match self.x_axis {
                XAxis::Nodes => p.n_nodes = x as usize,
                XAxis::GammaDb => p.gamma = db_to_linear(x),
                XAxis::EtaDb => p.eta = db_to_linear(x),
                XAxis::Iteration => unreachable!(),
            }
        }
        let fading = match c.channel {
            ChannelModel::Los => Fading::LosOnly,
            ChannelModel::Rician { kappa } => {
                p.kappa = kappa;
                Fading::Rician
            }
        };
        (p, c.bs_height_m.unwrap_or(config.bs_height_m), fading)
    }
}

/// Result of one drop in one (point, curve) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct DropOutcome {
    pub feasible: bool,
    /// Sum harvested power in watts; NaN when infeasible.
    pub sum_he: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Best-so-far sum at each full-threshold iteration.
    pub best_sequence: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    /// Indexed `[point][curve][drop]`.
    pub outcomes: Vec<Vec<Vec<DropOutcome>>>,
    /// Column 0 is the x axis, then one column per curve.
    pub columns: Vec<Vec<f64>>,
    pub wall_time: f64,
}

fn run_drop(
    spec: &ExperimentSpec,
    config: &Config,
    point: usize,
    curve: usize,
    drop: usize,
) -> Result<DropOutcome, ExperimentError> {
    let (params, height, fading) = spec.resolve(config, point, curve);
    let fail = |message: String| ExperimentError::Drop { drop, message };
    params.validate().map_err(|e| fail(e.to_string()))?;
    let d = drop as u64;
    let mut geo_rng = SeededRng::for_parts(spec.seed, &[d, PURPOSE_GEOMETRY]);
    let full = place_nodes_uniform(
        &mut geo_rng,
        spec.max_nodes(&config.params),
        config.area_half_side_m,
        height,
    );
    let geo = full.truncated(params.n_nodes);
    let channels = ChannelSet::draw(&params, &geo, fading, spec.seed, &[d]).map_err(|e| fail(e.to_string()))?;

    Ok(match spec.curves[curve].method {
        Method::Mrt => {
            let r = mrt_baseline(&channels, &params);
            DropOutcome {
                feasible: r.feasible,
                sum_he: if r.feasible { r.sum_he } else { f64::NAN },
                converged: true,
                iterations: 0,
                best_sequence: Vec::new(),
            }
        }
        Method::Ao => {
            let mut rng = SeededRng::for_parts(spec.seed, &[d, PURPOSE_AO]);
            let trace = run_ao(&channels, &geo, &params, &mut rng);
            let best_sequence = trace
                .iterations
                .iter()
                .filter(|i| i.chi == 1.0 && i.best_sum_he.is_finite())
                .map(|i| i.best_sum_he)
                .collect();
            DropOutcome {
                feasible: trace.feasible_at_full_thresholds,
                sum_he: trace.sum_he().unwrap_or(f64::NAN),
                converged: trace.converged,
                iterations: trace.n_iterations(),
                best_sequence,
            }
        }
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values.iter().copied());
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

fn aggregate(spec: &ExperimentSpec, outcomes: &[Vec<Vec<DropOutcome>>]) -> Vec<Vec<f64>> {
    let mut columns = vec![spec.x.clone()];
    for c in 0..spec.curves.len() {
        let col = match spec.kind.metric() {
            Metric::Feasibility => outcomes
                .iter()
                .map(|p| p[c].iter().filter(|o| o.feasible).count() as f64 / p[c].len() as f64)
                .collect(),
            Metric::SumHe => outcomes
                .iter()
                .map(|p| mean(p[c].iter().filter(|o| o.feasible).map(|o| o.sum_he)))
                .collect(),
            Metric::Convergence => {
                let drops: Vec<&DropOutcome> = outcomes[0][c]
                    .iter()
                    .filter(|o| o.feasible && !o.best_sequence.is_empty())
                    .collect();
                spec.x
                    .iter()
                    .map(|&it| {
                        let i = it as usize - 1;
                        // Converged runs hold their final value.
                        mean(drops.iter().map(|o| o.best_sequence[i.min(o.best_sequence.len() - 1)]))
                    })
                    .collect()
            }
        };
        columns.push(col);
    }
    columns
}

/// Runs every (point, curve, drop) task of `spec` on a dedicated worker pool.
///
/// `progress` is called with `(done, total)` after each task. Results are
/// gathered in task order, so tables do not depend on the thread count.
pub fn run_experiment(
    spec: &ExperimentSpec,
    config: &Config,
    progress: Option<&(dyn Fn(usize, usize) + Sync)>,
) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    config.validate().map_err(|e| ExperimentError::Spec(e.to_string()))?;
    let start = Instant::now();
    let (np, nc, nd) = (spec.n_points(), spec.curves.len(), spec.drops);
    let tasks: Vec<(usize, usize, usize)> = (0..np)
        .flat_map(|p| (0..nc).flat_map(move |c| (0..nd).map(move |d| (p, c, d))))
        .collect();
    let total = tasks.len();
    let done = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let flat: Vec<DropOutcome> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, c, d)| {
                let out = run_drop(spec, config, p, c, d);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if let Some(f) = progress {
                    f(n, total);
                }
                out
            })
            .collect::<Result<_, _>>()
    })?;

    let mut it = flat.into_iter();
    let outcomes: Vec<Vec<Vec<DropOutcome>>> = (0..np)
        .map(|_| (0..nc).map(|_| it.by_ref().take(nd).collect()).collect())
        .collect();
    let columns = aggregate(spec, &outcomes);
    Ok(ExperimentResult {
        spec: spec.clone(),
        outcomes,
        columns,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

impl ExperimentResult {
    pub fn header(&self) -> String {
        let mut h = self.spec.x_axis.name().to_string();
        for c in &self.spec.curves {
            h.push(' ');
            h.push_str(&c.label);
        }
        h
    }

    /// `key = value` description of the run: configuration, sweep and
    /// per-cell statistics.
    pub fn manifest(&self, config: &Config) -> String {
        let spec = &self.spec;
        let mut out = String::new();
        let _ = writeln!(out, "experiment = {}", spec.kind.name());
        let _ = writeln!(out, "table = {}", spec.kind.table_name());
        let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "seed = {}", spec.seed);
        let _ = writeln!(out, "drops = {}", spec.drops);
        let _ = writeln!(out, "threads = {}", spec.threads);
        let _ = writeln!(out, "wall_time_s = {:.3}", self.wall_time);
        let _ = writeln!(out, "x_axis = {}", spec.x_axis.name());
        let xs: Vec<String> = spec.x.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "x = {}", xs.join(" "));
        for (i, c) in spec.curves.iter().enumerate() {
            let channel = match c.channel {
                ChannelModel::Los => "los".to_string(),
                ChannelModel::Rician { kappa } => format!("rician kappa={kappa}"),
            };
            let method = match c.method {
                Method::Ao => "ao",
                Method::Mrt => "mrt",
            };
            let mut line = format!("{} method={method} channel={channel}", c.label);
            for (k, v) in [
                ("bs_height_m", c.bs_height_m),
                ("gamma_db", c.gamma_db),
                ("eta_db", c.eta_db),
            ] {
                if let Some(v) = v {
                    let _ = write!(line, " {k}={v}");
                }
            }
            let _ = writeln!(out, "curve.{i} = {line}");
        }
        out.push_str("# configuration\n");
        for l in config.to_text().lines() {
            let _ = writeln!(out, "config.{l}");
        }
        out.push_str("# cells\n");
        for (p, point) in self.outcomes.iter().enumerate() {
            for (c, drops) in point.iter().enumerate() {
                let he: Vec<f64> = drops.iter().filter(|o| o.feasible).map(|o| o.sum_he).collect();
                let converged = drops.iter().filter(|o| o.feasible && o.converged).count();
                let iters = mean(drops.iter().filter(|o| o.feasible).map(|o| o.iterations as f64));
                let _ = writeln!(
                    out,
                    "cell.{p}.{c} = drops={} feasible={} converged={converged} mean_sum_he={:.8e} std_sum_he={:.8e} mean_iterations={:.3}",
                    drops.len(),
                    he.len(),
                    mean(he.iter().copied()),
                    std_dev(&he),
                    iters
                );
            }
        }
        out
    }

    /// Writes the data table and `<table>.manifest` into `dir`.
    pub fn write(&self, config: &Config, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let table = dir.join(self.spec.kind.table_name());
        write_table(&table, &self.columns, Some(&self.header()))?;
        let manifest = dir.join(format!("{}.manifest", self.spec.kind.table_name()));
        write_atomic(&manifest, self.manifest(config).as_bytes())?;
        Ok(vec![table, manifest])
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.8e}")
    }
}

/// Space-separated table text with 9 significant digits per value.
pub fn format_table(columns: &[Vec<f64>], header: Option<&str>) -> Result<String, ExperimentError> {
    let rows = columns.first().map_or(0, Vec::len);
    if columns.is_empty() || rows == 0 {
        return Err(ExperimentError::Table("no data".into()));
    }
    if columns.iter().any(|c| c.len() != rows) {
        return Err(ExperimentError::Table("columns differ in length".into()));
    }
    let mut out = String::new();
    if let Some(h) = header {
        let _ = writeln!(out, "# {h}");
    }
    for r in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| format_value(c[r])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    Ok(out)
}

/// Writes a table through a temporary file and rename, so a failed write
/// leaves no partial file behind.
pub fn write_table(path: &Path, columns: &[Vec<f64>], header: Option<&str>) -> Result<(), ExperimentError> {
    let text = format_table(columns, header)?;
    write_atomic(path, text.as_bytes())
}

/// Parses a table written by [`write_table`] into columns.
pub fn read_table(path: &Path) -> Result<Vec<Vec<f64>>, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_table(&text)
}

pub fn parse_table(text: &str) -> Result<Vec<Vec<f64>>, ExperimentError> {
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| ExperimentError::Parse { line: i + 1, message };
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
            .collect::<Result<_, _>>()?;
        if columns.is_empty() {
            columns = vec![Vec::new(); row.len()];
        } else if row.len() != columns.len() {
            return Err(err(format!("expected {} fields, got {}", columns.len(), row.len())));
        }
        for (c, v) in columns.iter_mut().zip(row) {
            c.push(v);
        }
    }
    Ok(columns)
}
