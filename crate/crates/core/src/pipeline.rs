//! End-to-end analysis: normalize counts, remove signaling, score, and
//! attach Poisson-bootstrap uncertainties. Also drives gamma sweeps of the
//! qutrit model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::{l1_distance, normalize_counts, signaling_deficit, BehaviorTable, CountsRecord, Dims};
use crate::bell::{i3, i3_coefficients, FitPoint};
use crate::capacity::{nonlocal_capacity_asym_with, CapacityOptions};
use crate::error::{Error, Result};
use crate::polytope::{distance_to_local_polytope_with, project_nonsignaling_with};
use crate::quantum::{born_behavior, QutritModel};
use crate::simplex::SimplexOptions;

/// Smallest resample count for a reported interval.
pub const MIN_BOOTSTRAP: usize = 100;
/// Largest tolerated fraction of failed resamples.
pub const MAX_FAILED_FRACTION: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    I3,
    DistLocal,
    DistNs,
    Capacity,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::I3 => "i3",
            Measure::DistLocal => "dist_local",
            Measure::DistNs => "dist_ns",
            Measure::Capacity => "capacity",
        }
    }

    /// Comma-separated list such as `i3,dist_local,capacity`.
    pub fn parse_list(s: &str) -> Result<Vec<Measure>> {
        let mut out: Vec<Measure> = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if out.is_empty() {
            return Err(Error::InvalidParameter("no measures requested".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i3" => Ok(Measure::I3),
            "dist_local" => Ok(Measure::DistLocal),
            "dist_ns" => Ok(Measure::DistNs),
            "capacity" => Ok(Measure::Capacity),
            other => Err(Error::InvalidParameter(format!(
                "unknown measure '{other}' (expected i3, dist_local, dist_ns, capacity)"
            ))),
        }
    }
}

/// Statistics that can be bootstrapped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    I3,
    DistLocal,
    Capacity,
}

impl Statistic {
    pub fn from_measure(m: Measure) -> Option<Self> {
        match m {
            Measure::I3 => Some(Statistic::I3),
            Measure::DistLocal => Some(Statistic::DistLocal),
            Measure::Capacity => Some(Statistic::Capacity),
            Measure::DistNs => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    PoissonBootstrap,
}

/// `center ± half_width`, with `half_width` two standard deviations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub half_width: f64,
    pub method: IntervalMethod,
    pub resamples: usize,
    pub failed: usize,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        (v - self.center).abs() <= self.half_width
    }
}

/// Numerical settings shared by every stage of the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Project onto the non-signaling polytope before scoring `I3` and the local distance.
    pub project_ns: bool,
    pub capacity: CapacityOptions,
    pub lp: SimplexOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            project_ns: false,
            capacity: CapacityOptions::default(),
            lp: SimplexOptions::default(),
        }
    }
}

/// Scores one normalized behavior. Capacity always runs on the projection.
pub fn evaluate_statistic(p: &BehaviorTable, statistic: Statistic, opts: &PipelineOptions) -> Result<f64> {
    let project = opts.project_ns || statistic == Statistic::Capacity;
    let projected;
    let q = if project {
        projected = project_nonsignaling_with(p, &opts.lp)?.nearest;
        &projected
    } else {
        p
    };
    match statistic {
        Statistic::I3 => Ok(i3(q)?.value),
        Statistic::DistLocal => Ok(distance_to_local_polytope_with(q, &opts.lp)?.distance),
        Statistic::Capacity => Ok(nonlocal_capacity_asym_with(q, &opts.capacity)?.value),
    }
}

fn poisson_resample(c: &CountsRecord, rng: &mut ChaCha8Rng) -> Result<CountsRecord> {
    let counts = c
        .counts()
        .iter()
        .map(|&n| {
            if n == 0 {
                0
            } else {
                Poisson::new(n as f64).expect("positive mean").sample(rng) as u64
            }
        })
        .collect();
    c.with_counts(counts)
}

/// Counts drawn as independent Poisson variables with means `p * per_block`.
pub fn sample_counts(p: &BehaviorTable, per_block: f64, seed: u64) -> Result<CountsRecord> {
    if !(per_block.is_finite() && per_block > 0.0) {
        return Err(Error::InvalidParameter(format!("counts per block must be positive, got {per_block}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = p
        .as_slice()
        .iter()
        .map(|&v| {
            let mean = v * per_block;
            if mean > 0.0 {
                Poisson::new(mean).expect("positive mean").sample(&mut rng) as u64
            } else {
                0
            }
        })
        .collect();
    CountsRecord::new(p.dims(), counts, None)
}

fn resample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn bootstrap_uncertainty(c: &CountsRecord, statistic: Statistic, n: usize, seed: u64) -> Result<Interval> {
    bootstrap_uncertainty_with(c, statistic, n, seed, &PipelineOptions::default())
}

/// Poisson bootstrap of `statistic`: every count is redrawn with its observed
/// value as mean, the background is held fixed, and the pipeline is rerun.
///
/// Resample `i` uses its own ChaCha stream, so the result does not depend on
/// thread scheduling.
pub fn bootstrap_uncertainty_with(
    c: &CountsRecord,
    statistic: Statistic,
    n: usize,
    seed: u64,
    opts: &PipelineOptions,
) -> Result<Interval> {
    if n < MIN_BOOTSTRAP {
        return Err(Error::InvalidParameter(format!("need at least {MIN_BOOTSTRAP} resamples, got {n}")));
    }
    let outcomes: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let resampled = poisson_resample(c, &mut resample_rng(seed, i))?;
            evaluate_statistic(&normalize_counts(&resampled)?, statistic, opts)
        })
        .collect();

    let mut values = Vec::with_capacity(n);
    let mut first_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(v) => values.push(v),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let failed = n - values.len();
    if failed > 0 {
        let first = first_error.map(|e| e.to_string()).unwrap_or_default();
        if failed as f64 > MAX_FAILED_FRACTION * n as f64 {
            return Err(Error::Bootstrap { failed, total: n, first });
        }
        log::warn!("{failed} of {n} bootstrap resamples failed: {first}");
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(Interval {
        center: mean,
        half_width: 2.0 * var.sqrt(),
        method: IntervalMethod::PoissonBootstrap,
        resamples: n,
        failed,
    })
}

/// Delta-method variance of `I3` estimated from Poisson counts.
///
/// Per block, `I3` contributes `sum_i c_i n_i / N`; its variance is
/// `sum_i (c_i - t)^2 n_i / N^2` with `t` the block contribution.
pub fn i3_count_variance(c: &CountsRecord) -> Result<f64> {
    let d = c.dims();
    if d != Dims::cglmp() {
        return Err(Error::shape(Dims::cglmp(), d));
    }
    let coeffs = i3_coefficients();
    let mut var = 0.0;
    for (x, y) in d.settings() {
        let off = d.block_offset(x, y);
        let range = off..off + d.block_len();
        let signal: Vec<f64> = range
            .clone()
            .map(|i| {
                let bg = c.background().map_or(0.0, |b| b[i]);
                (c.counts()[i] as f64 - bg).max(0.0)
            })
            .collect();
        let total: f64 = signal.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroBlock { x, y });
        }
        let t: f64 = signal.iter().zip(&coeffs[range.clone()]).map(|(s, c)| s * c).sum::<f64>() / total;
        var += range
            .map(|i| (coeffs[i] - t).powi(2) * c.counts()[i] as f64)
            .sum::<f64>()
            / (total * total);
    }
    Ok(var)
}

/// Fit input from one counts record: measured `I3` weighted by its inverse count variance.
pub fn fit_point_from_counts(gamma: f64, c: &CountsRecord) -> Result<FitPoint> {
    let measured = i3(&normalize_counts(c)?)?.signed;
    let var = i3_count_variance(c)?;
    if var <= 0.0 {
        return Err(Error::DegenerateFit(format!("zero count variance at gamma {gamma}")));
    }
    Ok(FitPoint { gamma, measured_i3: measured, weight: var.recip() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub dims: Dims,
    pub signaling_deficit: f64,
    pub projected: bool,
    pub measures: BTreeMap<String, f64>,
    pub intervals: BTreeMap<String, Interval>,
}

/// Bootstrap request: resample count and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BootstrapRequest {
    pub n: usize,
    pub seed: u64,
}

/// Normalizes a counts record and evaluates the requested measures.
pub fn analyze_counts(
    c: &CountsRecord,
    measures: &[Measure],
    opts: &PipelineOptions,
    bootstrap: Option<BootstrapRequest>,
) -> Result<Analysis> {
    let raw = normalize_counts(c)?;
    let deficit = signaling_deficit(&raw);
    let needs_projection = opts.project_ns || measures.contains(&Measure::DistNs);
    let projection = if needs_projection {
        Some(project_nonsignaling_with(&raw, &opts.lp)?)
    } else {
        None
    };
    let scored = match (&projection, opts.project_ns) {
        (Some(pr), true) => &pr.nearest,
        _ => &raw,
    };

    let mut values = BTreeMap::new();
    let mut intervals = BTreeMap::new();
    for &m in measures {
        match m {
            Measure::I3 => {
                values.insert(m.to_string(), i3(scored)?.value);
            }
            Measure::DistLocal => {
                values.insert(m.to_string(), distance_to_local_polytope_with(scored, &opts.lp)?.distance);
            }
            Measure::DistNs => {
                values.insert(m.to_string(), projection.as_ref().map_or(0.0, |p| p.distance));
            }
            Measure::Capacity => {
                let cert = nonlocal_capacity_asym_with(scored, &opts.capacity)?;
                values.insert(m.to_string(), cert.value);
                values.insert("capacity_gap".into(), cert.gap);
            }
        }
        if let (Some(req), Some(stat)) = (bootstrap, Statistic::from_measure(m)) {
            intervals.insert(m.to_string(), bootstrap_uncertainty_with(c, stat, req.n, req.seed, opts)?);
        }
    }
    Ok(Analysis {
        dims: c.dims(),
        signaling_deficit: deficit,
        projected: opts.project_ns,
        measures: values,
        intervals,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub gamma_grid: Vec<f64>,
    pub lambda: f64,
    /// Capacity tolerance in bits.
    pub tol: f64,
    pub lp_tol: f64,
    pub n_bootstrap: usize,
    pub seed: u64,
    pub measures: Vec<Measure>,
    /// Expected counts per block used to synthesize bootstrap data.
    pub counts_per_block: f64,
}

impl SweepConfig {
    pub fn new(gamma_grid: Vec<f64>, lambda: f64, measures: Vec<Measure>) -> Self {
        SweepConfig {
            gamma_grid,
            lambda,
            tol: CapacityOptions::default().tol,
            lp_tol: SimplexOptions::default().feasibility_tol,
            n_bootstrap: 0,
            seed: 0,
            measures,
            counts_per_block: 1000.0,
        }
    }

    /// `steps` evenly spaced points from `start` to `stop` inclusive.
    pub fn linear_grid(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>> {
        match steps {
            0 => Err(Error::InvalidParameter("grid needs at least one point".into())),
            1 => Ok(vec![start]),
            _ => Ok((0..steps)
                .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
                .collect()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_grid.is_empty() {
            return Err(Error::EmptyInput("gamma grid is empty".into()));
        }
        if let Some(g) = self.gamma_grid.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::InvalidParameter(format!("gamma must be finite and >= 0, got {g}")));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if !(self.tol > 0.0 && self.lp_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if self.measures.is_empty() {
            return Err(Error::InvalidParameter("no measures requested".into()));
        }
        if self.n_bootstrap > 0 && self.n_bootstrap < MIN_BOOTSTRAP {
            return Err(Error::InvalidParameter(format!(
                "need at least {MIN_BOOTSTRAP} resamples, got {}",
                self.n_bootstrap
            )));
        }
        Ok(())
    }

    pub fn options(&self) -> PipelineOptions {
        PipelineOptions {
            project_ns: true,
            capacity: CapacityOptions::with_tol(self.tol),
            lp: SimplexOptions { feasibility_tol: self.lp_tol, ..Default::default() },
        }
    }
}

/// One row of a sweep table. Unrequested measures are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub i3: Option<f64>,
    pub i3_ns: Option<f64>,
    pub dist_local_raw: Option<f64>,
    pub dist_local_ns: Option<f64>,
    pub dist_ns: Option<f64>,
    pub capacity_ns: Option<f64>,
    pub capacity_gap: Option<f64>,
    pub i3_half_width: Option<f64>,
    pub dist_local_half_width: Option<f64>,
    pub capacity_half_width: Option<f64>,
}

impl SweepRow {
    pub const COLUMNS: [&'static str; 11] = [
        "gamma",
        "i3",
        "i3_ns",
        "dist_local_raw",
        "dist_local_ns",
        "dist_ns",
        "capacity_ns",
        "capacity_gap",
        "i3_half_width",
        "dist_local_half_width",
        "capacity_half_width",
    ];

    fn empty(gamma: f64) -> Self {
        SweepRow {
            gamma,
            i3: None,
            i3_ns: None,
            dist_local_raw: None,
            dist_local_ns: None,
            dist_ns: None,
            capacity_ns: None,
            capacity_gap: None,
            i3_half_width: None,
            dist_local_half_width: None,
            capacity_half_width: None,
        }
    }
}

fn sweep_point(cfg: &SweepConfig, opts: &PipelineOptions, index: usize, gamma: f64) -> Result<SweepRow> {
    let raw = born_behavior(&QutritModel::new(gamma, cfg.lambda)?)?;
    let projection = project_nonsignaling_with(&raw, &opts.lp)?;
    let ns = &projection.nearest;
    let mut row = SweepRow::empty(gamma);
    let wants = |m| cfg.measures.contains(&m);

    if wants(Measure::I3) {
        row.i3 = Some(i3(&raw)?.value);
        row.i3_ns = Some(i3(ns)?.value);
    }
    if wants(Measure::DistLocal) {
        row.dist_local_raw = Some(distance_to_local_polytope_with(&raw, &opts.lp)?.distance);
        row.dist_local_ns = Some(distance_to_local_polytope_with(ns, &opts.lp)?.distance);
    }
    if wants(Measure::DistNs) {
        row.dist_ns = Some(l1_distance(&raw, ns)?);
    }
    if wants(Measure::Capacity) {
        let cert = nonlocal_capacity_asym_with(ns, &opts.capacity)?;
        row.capacity_ns = Some(cert.value);
        row.capacity_gap = Some(cert.gap);
    }

    if cfg.n_bootstrap > 0 {
        let counts = CountsRecord::from_behavior(&raw, cfg.counts_per_block)?;
        let seed = cfg.seed.wrapping_add(index as u64);
        let interval = |stat| bootstrap_uncertainty_with(&counts, stat, cfg.n_bootstrap, seed, opts);
        if wants(Measure::I3) {
            row.i3_half_width = Some(interval(Statistic::I3)?.half_width);
        }
        if wants(Measure::DistLocal) {
            row.dist_local_half_width = Some(interval(Statistic::DistLocal)?.half_width);
        }
        if wants(Measure::Capacity) {
            row.capacity_half_width = Some(interval(Statistic::Capacity)?.half_width);
        }
    }
    Ok(row)
}

/// Simulates the noisy qutrit model at every grid point and scores it.
///
/// Bootstrap half-widths, when requested, come from Poisson resampling of
/// the expected counts at `counts_per_block` per setting pair.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let opts = cfg.options();
    cfg.gamma_grid
        .par_iter()
        .enumerate()
        .map(|(k, &g)| sweep_point(cfg, &opts, k, g))
        .collect()
}

/// Provenance stored next to an output table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar<C> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: C,
    pub options: PipelineOptions,
}

impl<C: Serialize> Sidecar<C> {
    pub fn new(command: &str, config: C, options: PipelineOptions) -> Self {
        Sidecar {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            options,
        }
    }
}
