//! Seeded, parallel experiment runners and their shared plumbing.

pub mod environment;
pub mod inference;
pub mod mutuality;
pub mod profit;
pub mod transitivity;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{write_atomic, write_metrics, write_plot, write_trace, MetricsRow, PlotLabels, ReportBundle, RunLabel, Series, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Mutuality,
    Inference,
    Transitivity,
    Profit,
    Environment,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Mutuality,
        ExperimentKind::Inference,
        ExperimentKind::Transitivity,
        ExperimentKind::Profit,
        ExperimentKind::Environment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Mutuality => "mutuality",
            ExperimentKind::Inference => "inference",
            ExperimentKind::Transitivity => "transitivity",
            ExperimentKind::Profit => "profit",
            ExperimentKind::Environment => "environment",
        }
    }
}

/// How many runs, from which seed, on how many threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunSettings {
    pub runs: u32,
    pub master_seed: u64,
    /// Worker threads; 0 uses rayon's default.
    pub jobs: usize,
    /// Collect per-delegation traces of run 0.
    pub trace: bool,
}

impl RunSettings {
    pub fn new(runs: u32, master_seed: u64) -> Result<Self> {
        if runs == 0 {
            return Err(Error::param("runs", "must be at least 1"));
        }
        Ok(RunSettings { runs, master_seed, jobs: 0, trace: false })
    }
}

/// Rows, plots and traces produced by one experiment.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<MetricsRow>,
    pub plots: Vec<Plot>,
    /// One JSON value per delegation of run 0, when tracing.
    pub traces: Vec<serde_json::Value>,
    /// Effective configuration, echoed into the summary.
    pub parameters: serde_json::Value,
}

impl ExperimentOutput {
    /// Writes `metrics.csv`, `summary.json`, one SVG per plot and, when
    /// present, `trace.ndjson` into `dir`.
    pub fn write(&self, experiment: &str, dir: &Path, settings: &RunSettings) -> Result<ReportBundle> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut bundle = ReportBundle { metrics: dir.join("metrics.csv"), summary: dir.join("summary.json"), ..Default::default() };
        write_metrics(&self.rows, &bundle.metrics)?;
        let summary = Summary::from_rows(experiment, settings.master_seed, settings.runs, self.parameters.clone(), &self.rows);
        let mut json = serde_json::to_string_pretty(&summary)?;
        json.push('\n');
        write_atomic(&bundle.summary, json.as_bytes())?;
        for plot in &self.plots {
            let path = dir.join(format!("{}.svg", plot.name));
            write_plot(&plot.labels, &plot.series, &path)?;
            bundle.plots.push(path);
        }
        if !self.traces.is_empty() {
            let path = dir.join("trace.ndjson");
            write_trace(&self.traces, &path)?;
            bundle.trace = Some(path);
        }
        Ok(bundle)
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    /// File stem, without extension.
    pub name: String,
    pub labels: PlotLabels,
    pub series: Vec<Series>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for `(master, run)` and a purpose tag. Run `i` of master
/// seed `s` is seeded from `s + i`, so extending the run count leaves earlier
/// runs untouched.
pub fn derive_seed(master: u64, run: u32, purpose: u64) -> u64 {
    splitmix(splitmix(master.wrapping_add(u64::from(run))) ^ purpose.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn run_rng(master: u64, run: u32, purpose: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, run, purpose))
}

/// Calls `f` for runs `0..runs`, in parallel on at most `jobs` threads, and
/// returns the results in run order.
pub fn run_parallel<R, F>(settings: &RunSettings, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u32) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs)
        .build()
        .map_err(|e| Error::param("jobs", e.to_string()))?;
    Ok(pool.install(|| (0..settings.runs).into_par_iter().map(&f).collect()))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (0 for fewer than two values).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// `count / total`, or 0 when nothing was counted.
pub fn ratio(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// Per-run rows for every metric, plus `aggregate` mean rows and `<metric>_std` rows.
pub(crate) fn scalar_rows(experiment: &str, param: &str, per_run: &[Vec<(&str, f64)>]) -> Vec<MetricsRow> {
    let mut rows = Vec::new();
    let Some(first) = per_run.first() else { return rows };
    for (run, metrics) in per_run.iter().enumerate() {
        for &(m, v) in metrics {
            rows.push(MetricsRow::new(experiment, param, RunLabel::Run(run as u32), m, v));
        }
    }
    for (i, &(m, _)) in first.iter().enumerate() {
        let values: Vec<f64> = per_run.iter().map(|r| r[i].1).collect();
        rows.push(MetricsRow::new(experiment, param, RunLabel::Aggregate, m, mean(&values)));
        rows.push(MetricsRow::new(experiment, param, RunLabel::Aggregate, &format!("{m}_std"), std_dev(&values)));
    }
    rows
}

/// Aggregate value of `metric` at `param`, if present.
pub fn aggregate(rows: &[MetricsRow], param: &str, metric: &str) -> Option<f64> {
    rows.iter()
        .find(|r| r.run == RunLabel::Aggregate && r.param == param && r.metric == metric)
        .map(|r| r.value)
}
