//! The sliding-window estimator: keeps the last `T` batches, summarizes
//! them, picks batch weights and evaluates the weighted KDE.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::gaussian::{phi_unchecked, GaussianParams};
use crate::mise::{build_components, BatchSummary, MiseComponents, MixtureDensity, MAX_WINDOW};
use crate::weights::{
    average_weights, current_weights, exponential_weights, solve_optimal_weights, WeightVector,
};

/// Floor applied to plug-in standard deviations.
pub const MIN_PLUGIN_STD: f64 = 1e-8;

/// One batch of observations taken at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    t: u64,
    values: Vec<f64>,
    true_params: Option<GaussianParams>,
}

impl Batch {
    pub fn new(t: u64, values: Vec<f64>, true_params: Option<GaussianParams>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain(format!("batch t={t} has no samples")));
        }
        for &v in &values {
            ensure_finite("sample value", v)?;
        }
        Ok(Self {
            t,
            values,
            true_params,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn true_params(&self) -> Option<&GaussianParams> {
        self.true_params.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Current,
    Average,
    Exponential,
    Dynamic,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Current,
        Scheme::Average,
        Scheme::Exponential,
        Scheme::Dynamic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Current => "current",
            Scheme::Average => "average",
            Scheme::Exponential => "exponential",
            Scheme::Dynamic => "dynamic",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown scheme `{s}`")))
    }
}

/// Where batch parameters come from: the generator's ground truth or the
/// samples themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamMode {
    Oracle,
    Plugin,
}

impl ParamMode {
    pub fn name(self) -> &'static str {
        match self {
            ParamMode::Oracle => "oracle",
            ParamMode::Plugin => "plugin",
        }
    }
}

impl fmt::Display for ParamMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(ParamMode::Oracle),
            "plugin" => Ok(ParamMode::Plugin),
            _ => Err(Error::domain(format!("unknown parameter mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub window: usize,
    pub bandwidth: f64,
    pub scheme: Scheme,
    pub beta: f64,
    pub param_mode: ParamMode,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            window: 5,
            bandwidth: 1.0,
            scheme: Scheme::Dynamic,
            beta: 0.1,
            param_mode: ParamMode::Plugin,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window > MAX_WINDOW {
            return Err(Error::domain(format!(
                "window must be in 1..={MAX_WINDOW}, got {}",
                self.window
            )));
        }
        ensure_positive("bandwidth", self.bandwidth)?;
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::domain(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        Ok(())
    }
}

/// `(mu, gamma, n)` for one batch, either passed through from the true
/// parameters or estimated (sample mean, Bessel-corrected std).
pub fn summarize_batch(b: &Batch, mode: ParamMode) -> Result<BatchSummary> {
    let n = b.len();
    match mode {
        ParamMode::Oracle => {
            let p = b.true_params.ok_or(Error::MissingTrueParams { t: b.t })?;
            BatchSummary::new(p.mu(), p.sigma(), n)
        }
        ParamMode::Plugin => {
            if n < 2 {
                return Err(Error::DegenerateBatch { t: b.t, n });
            }
            let mean = b.values.iter().sum::<f64>() / n as f64;
            let ss: f64 = b.values.iter().map(|x| (x - mean).powi(2)).sum();
            let std = (ss / (n - 1) as f64).sqrt().max(MIN_PLUGIN_STD);
            BatchSummary::new(mean, std, n)
        }
    }
}

/// Sliding window over the most recent batches, oldest first.
///
/// Pushes take `&mut self`; everything else is read-only and may run
/// concurrently between pushes.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    ring: VecDeque<(Batch, BatchSummary)>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            ring: VecDeque::with_capacity(config.window + 1),
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Number of batches currently held, `min(pushes, T)`.
    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn batches(&self) -> impl Iterator<Item = &Batch> {
        self.ring.iter().map(|(b, _)| b)
    }

    pub fn summaries(&self) -> Vec<BatchSummary> {
        self.ring.iter().map(|(_, s)| *s).collect()
    }

    pub fn latest(&self) -> Option<&Batch> {
        self.ring.back().map(|(b, _)| b)
    }

    /// Appends a batch, evicting the oldest once the window is full. On
    /// error the tracker is unchanged.
    pub fn push(&mut self, batch: Batch) -> Result<()> {
        if let Some(last) = self.latest() {
            if batch.t <= last.t {
                return Err(Error::OutOfOrder {
                    last: last.t,
                    got: batch.t,
                });
            }
        }
        let summary = summarize_batch(&batch, self.config.param_mode)?;
        self.ring.push_back((batch, summary));
        while self.ring.len() > self.config.window {
            self.ring.pop_front();
        }
        Ok(())
    }

    /// Density being tracked: true parameters of the newest batch in oracle
    /// mode, its plug-in summary otherwise.
    pub fn default_target(&self) -> Result<GaussianParams> {
        let (batch, summary) = self.ring.back().ok_or_else(|| Error::domain("tracker is empty"))?;
        match self.config.param_mode {
            ParamMode::Oracle => batch
                .true_params
                .ok_or(Error::MissingTrueParams { t: batch.t }),
            ParamMode::Plugin => GaussianParams::new(summary.mu(), summary.gamma()),
        }
    }

    /// MISE components of the current window against `target`.
    pub fn components(&self, target: &GaussianParams) -> Result<MiseComponents> {
        build_components(&self.summaries(), target, self.config.bandwidth)
    }

    /// Weights for the configured scheme over the batches currently held.
    /// During warm-up the baselines use the held length in place of `T`.
    pub fn weights_for(&self, target: &GaussianParams) -> Result<WeightVector> {
        let w = self.ring.len();
        if w == 0 {
            return Err(Error::domain("tracker is empty"));
        }
        match self.config.scheme {
            Scheme::Current => current_weights(w),
            Scheme::Average => average_weights(w),
            Scheme::Exponential => exponential_weights(w, self.config.beta),
            Scheme::Dynamic => Ok(solve_optimal_weights(&self.components(target)?)?.alpha),
        }
    }

    fn check_alpha(&self, alpha: &WeightVector) -> Result<()> {
        if alpha.len() != self.ring.len() {
            return Err(Error::DimensionMismatch {
                expected: self.ring.len(),
                got: alpha.len(),
            });
        }
        Ok(())
    }

    /// Weighted KDE at `x`: `sum_i alpha_i / n_i sum_j K(x - x_ij)`.
    pub fn estimate_density(&self, alpha: &WeightVector, x: f64) -> Result<f64> {
        self.check_alpha(alpha)?;
        let sigma = self.config.bandwidth;
        Ok(self
            .ring
            .iter()
            .zip(alpha.as_slice())
            .map(|((b, _), a)| {
                let inner: f64 = b.values.iter().map(|v| phi_unchecked(sigma, x - v)).sum();
                a / b.len() as f64 * inner
            })
            .sum())
    }

    /// The estimator as an explicit mixture with one component per sample.
    pub fn current_mixture(&self, alpha: &WeightVector) -> Result<MixtureDensity> {
        self.check_alpha(alpha)?;
        MixtureDensity::from_window(
            self.ring
                .iter()
                .zip(alpha.as_slice())
                .map(|((b, _), &a)| (b.values(), a)),
            self.config.bandwidth,
        )
    }
}
