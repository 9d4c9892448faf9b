//! Tracking runs and Monte-Carlo sweeps over window size and bandwidth.
//!
//! Error metric: each step records the closed-form ISE of the realized
//! estimator against the true density of the newest batch. A run's error is
//! the mean ISE over its steps after the first `T` (warm-up) steps; sweeps
//! report mean and standard deviation of that error across seeds.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mise::{closed_form_ise, exact_mise};
use crate::synth::{generate, Dataset, GeneratorConfig};
use crate::tracker::{ParamMode, Scheme, Tracker, TrackerConfig};
use crate::weights::WeightVector;

pub const DEFAULT_WINDOWS: [usize; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 10];
pub const DEFAULT_BANDWIDTHS: [f64; 6] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5];
pub const DEFAULT_SEEDS: usize = 20;
/// Bandwidth held fixed while sweeping window sizes.
pub const WINDOW_SWEEP_BANDWIDTH: f64 = 1.0;
/// Window held fixed while sweeping bandwidths.
pub const BANDWIDTH_SWEEP_WINDOW: usize = 5;

pub const STEP_CSV_HEADER: &str = "t,scheme,window,bandwidth,ise,exact_mise,wall_nanos";
pub const SUMMARY_CSV_HEADER: &str = "scheme,sweep_variable,sweep_value,mean_error,std_error,runs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub scheme: Scheme,
    pub window: usize,
    pub bandwidth: f64,
    /// Realized ISE against the true density, clamped at zero.
    pub ise: f64,
    /// Exact MISE at the chosen weights; oracle mode only.
    pub exact_mise: Option<f64>,
    pub alpha: WeightVector,
    pub wall_nanos: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Window,
    Bandwidth,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Window => "window",
            SweepVariable::Bandwidth => "bandwidth",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub scheme: Scheme,
    pub sweep_variable: SweepVariable,
    pub sweep_value: f64,
    pub mean_error: f64,
    pub std_error: f64,
    pub runs: usize,
}

/// Runs one tracker over a dataset, one record per batch.
pub fn run_tracking(dataset: &Dataset, cfg: &TrackerConfig) -> Result<Vec<StepRecord>> {
    if dataset.batches.is_empty() {
        return Err(Error::domain("dataset has no batches"));
    }
    let mut tracker = Tracker::new(*cfg)?;
    let mut records = Vec::with_capacity(dataset.batches.len());
    for batch in &dataset.batches {
        let t = batch.t();
        let mut step = || -> Result<StepRecord> {
            let start = Instant::now();
            let truth = *batch.true_params().ok_or(Error::MissingTrueParams { t })?;
            tracker.push(batch.clone())?;
            let target = tracker.default_target()?;
            let alpha = tracker.weights_for(&target)?;
            let ise = closed_form_ise(&tracker.current_mixture(&alpha)?, &truth).max(0.0);
            let exact = match cfg.param_mode {
                ParamMode::Oracle => {
                    Some(exact_mise(&tracker.components(&truth)?, &alpha)?.max(0.0))
                }
                ParamMode::Plugin => None,
            };
            Ok(StepRecord {
                t,
                scheme: cfg.scheme,
                window: cfg.window,
                bandwidth: cfg.bandwidth,
                ise,
                exact_mise: exact,
                alpha,
                wall_nanos: start.elapsed().as_nanos() as u64,
            })
        };
        records.push(step().map_err(|e| e.with_context(format!("batch t={t}")))?);
    }
    Ok(records)
}

/// Mean ISE over the records after the first `warmup` steps.
pub fn time_averaged_ise(records: &[StepRecord], warmup: usize) -> Result<f64> {
    let kept = records.get(warmup..).unwrap_or(&[]);
    if kept.is_empty() {
        return Err(Error::domain(format!(
            "no steps left after discarding {warmup} warm-up steps from {}",
            records.len()
        )));
    }
    Ok(kept.iter().map(|r| r.ise).sum::<f64>() / kept.len() as f64)
}

/// Shared settings for a sweep; the swept field is overwritten per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBase {
    pub generator: GeneratorConfig,
    pub tracker: TrackerConfig,
    pub schemes: Vec<Scheme>,
}

impl Default for SweepBase {
    fn default() -> Self {
        Self {
            generator: GeneratorConfig::default(),
            tracker: TrackerConfig::default(),
            schemes: Scheme::ALL.to_vec(),
        }
    }
}

/// `--seeds N --seed-base S` expansion.
pub fn seed_range(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|k| base + k).collect()
}

pub fn sweep_window(seeds: &[u64], windows: &[usize], base: &SweepBase) -> Result<Vec<SweepSummary>> {
    let values: Vec<f64> = windows.iter().map(|&w| w as f64).collect();
    sweep(seeds, SweepVariable::Window, &values, base, |cfg, v| {
        cfg.window = v as usize;
        cfg.bandwidth = base.tracker.bandwidth;
    })
}

pub fn sweep_bandwidth(
    seeds: &[u64],
    bandwidths: &[f64],
    base: &SweepBase,
) -> Result<Vec<SweepSummary>> {
    sweep(seeds, SweepVariable::Bandwidth, bandwidths, base, |cfg, v| {
        cfg.bandwidth = v;
        cfg.window = base.tracker.window;
    })
}

/// Per-run errors for every (scheme, value, seed) cell, in that nesting
/// order.
pub fn sweep_cells<F>(
    seeds: &[u64],
    values: &[f64],
    base: &SweepBase,
    apply: F,
) -> Result<Vec<Vec<Vec<f64>>>>
where
    F: Fn(&mut TrackerConfig, f64) + Sync,
{
    if seeds.is_empty() || values.is_empty() || base.schemes.is_empty() {
        return Err(Error::domain("sweep needs at least one seed, value and scheme"));
    }
    let datasets: Vec<Dataset> = seeds
        .par_iter()
        .map(|&seed| {
            generate(&GeneratorConfig {
                seed,
                ..base.generator
            })
            .map_err(|e| e.with_context(format!("seed {seed}")))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize, usize)> = (0..base.schemes.len())
        .flat_map(|s| (0..values.len()).flat_map(move |v| (0..seeds.len()).map(move |k| (s, v, k))))
        .collect();
    let errors: Vec<f64> = cells
        .par_iter()
        .map(|&(s, v, k)| {
            let mut cfg = TrackerConfig {
                scheme: base.schemes[s],
                ..base.tracker
            };
            apply(&mut cfg, values[v]);
            run_tracking(&datasets[k], &cfg)
                .and_then(|records| time_averaged_ise(&records, cfg.window))
                .map_err(|e| {
                    e.with_context(format!(
                        "seed {} scheme {} window {} bandwidth {}",
                        seeds[k], cfg.scheme, cfg.window, cfg.bandwidth
                    ))
                })
        })
        .collect::<Result<_>>()?;

    let mut it = errors.into_iter();
    Ok((0..base.schemes.len())
        .map(|_| {
            (0..values.len())
                .map(|_| it.by_ref().take(seeds.len()).collect())
                .collect()
        })
        .collect())
}

fn sweep<F>(
    seeds: &[u64],
    variable: SweepVariable,
    values: &[f64],
    base: &SweepBase,
    apply: F,
) -> Result<Vec<SweepSummary>>
where
    F: Fn(&mut TrackerConfig, f64) + Sync,
{
    let cells = sweep_cells(seeds, values, base, apply)?;
    let mut out = Vec::with_capacity(base.schemes.len() * values.len());
    for (scheme, per_value) in base.schemes.iter().zip(cells) {
        for (&value, runs) in values.iter().zip(per_value) {
            let (mean_error, std_error) = mean_std(&runs);
            out.push(SweepSummary {
                scheme: *scheme,
                sweep_variable: variable,
                sweep_value: value,
                mean_error,
                std_error,
                runs: runs.len(),
            });
        }
    }
    Ok(out)
}

/// Mean and sample standard deviation (zero for a single run).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::domain(format!("unknown output format `{s}`"))),
        }
    }
}

/// Rows that can be written by [`emit_results`].
pub trait Emit: Serialize {
    fn csv_header() -> &'static str;
    fn csv_row(&self, out: &mut String);
}

impl Emit for StepRecord {
    fn csv_header() -> &'static str {
        STEP_CSV_HEADER
    }

    fn csv_row(&self, out: &mut String) {
        let exact = self.exact_mise.map(|v| v.to_string()).unwrap_or_default();
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            self.t, self.scheme, self.window, self.bandwidth, self.ise, exact, self.wall_nanos
        );
    }
}

impl Emit for SweepSummary {
    fn csv_header() -> &'static str {
        SUMMARY_CSV_HEADER
    }

    fn csv_row(&self, out: &mut String) {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            self.scheme,
            self.sweep_variable.name(),
            self.sweep_value,
            self.mean_error,
            self.std_error,
            self.runs
        );
    }
}

/// Renders rows as CSV (header first, LF endings) or as a JSON array.
/// Floats use shortest round-trip formatting in both.
pub fn render<T: Emit>(rows: &[T], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut s = String::from(T::csv_header());
            s.push('\n');
            for r in rows {
                r.csv_row(&mut s);
                s.push('\n');
            }
            Ok(s)
        }
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows)
                .map_err(|e| Error::domain(format!("json encoding failed: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn emit_results<T: Emit>(rows: &[T], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let body = render(rows, format)?;
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}
