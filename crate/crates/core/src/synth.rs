//! Synthetic evolving-Gaussian datasets.
//!
//! The mean follows a random walk with uniform increments on
//! `[-mu_step, mu_step]`; the standard deviation follows a random walk with
//! increments on `[-gamma_step, gamma_step]` that is floored at `gamma0`.
//! Batch sizes are uniform on `n_min..=n_max`.
//!
//! Randomness comes from ChaCha20 keyed by `seed` (expanded with
//! `SeedableRng::seed_from_u64`) with one stream per purpose:
//!
//! | stream | draws                         |
//! |--------|-------------------------------|
//! | 0      | mean increments               |
//! | 1      | standard deviation increments |
//! | 2      | batch sizes                   |
//! | 3      | samples                       |
//!
//! Uniforms take the top 53 bits of a `u64`. Gaussian samples use inverse
//! CDF on the open interval `(0, 1)`, so every sample costs exactly one
//! draw.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::gaussian::GaussianParams;
use crate::tracker::Batch;

pub const FORMAT_VERSION: u32 = 1;

pub const STREAM_MEAN: u64 = 0;
pub const STREAM_STD: u64 = 1;
pub const STREAM_SIZE: u64 = 2;
pub const STREAM_SAMPLE: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub num_batches: usize,
    pub mu0: f64,
    pub gamma0: f64,
    pub mu_step: f64,
    pub gamma_step: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// Sample batch 1 at `(mu0, gamma0)` instead of one walk step away.
    #[serde(default)]
    pub start_at_origin: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_batches: 100,
            mu0: 0.0,
            gamma0: 1.0,
            mu_step: 1.0,
            gamma_step: 0.2,
            n_min: 3,
            n_max: 20,
            start_at_origin: false,
        }
    }
}

impl GeneratorConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_batches == 0 {
            return Err(Error::domain("num_batches must be >= 1"));
        }
        ensure_finite("mu0", self.mu0)?;
        ensure_positive("gamma0", self.gamma0)?;
        ensure_positive("mu_step", self.mu_step)?;
        ensure_positive("gamma_step", self.gamma_step)?;
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::domain(format!(
                "batch size range {}..={} is invalid",
                self.n_min, self.n_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: GeneratorConfig,
    pub batches: Vec<Batch>,
}

/// One ChaCha20 stream.
struct Stream(ChaCha20Rng);

impl Stream {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Stream(rng)
    }

    /// Uniform on `[0, 1)`.
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1)`.
    fn open_unit(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    fn symmetric(&mut self, half_width: f64) -> f64 {
        half_width * (2.0 * self.unit() - 1.0)
    }

    fn size(&mut self, lo: usize, hi: usize) -> usize {
        let span = (hi - lo + 1) as f64;
        lo + ((self.unit() * span) as usize).min(hi - lo)
    }

    fn normal(&mut self, mu: f64, sigma: f64) -> f64 {
        mu + sigma * standard_normal_quantile(self.open_unit())
    }
}

/// Inverse of the standard normal CDF.
pub fn standard_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Draws a dataset. Pure function of `cfg`.
pub fn generate(cfg: &GeneratorConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut mean_rng = Stream::new(cfg.seed, STREAM_MEAN);
    let mut std_rng = Stream::new(cfg.seed, STREAM_STD);
    let mut size_rng = Stream::new(cfg.seed, STREAM_SIZE);
    let mut sample_rng = Stream::new(cfg.seed, STREAM_SAMPLE);

    let mut mu = cfg.mu0;
    let mut gamma = cfg.gamma0;
    let mut batches = Vec::with_capacity(cfg.num_batches);
    for t in 1..=cfg.num_batches as u64 {
        if !(cfg.start_at_origin && t == 1) {
            mu += mean_rng.symmetric(cfg.mu_step);
            gamma = (gamma + std_rng.symmetric(cfg.gamma_step)).max(cfg.gamma0);
        }
        let n = size_rng.size(cfg.n_min, cfg.n_max);
        let values = (0..n).map(|_| sample_rng.normal(mu, gamma)).collect();
        batches.push(Batch::new(t, values, Some(GaussianParams::new(mu, gamma)?))?);
    }
    Ok(Dataset {
        config: *cfg,
        batches,
    })
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    config: GeneratorConfig,
}

#[derive(Serialize, Deserialize)]
struct BatchLine {
    t: u64,
    true_mu: f64,
    true_gamma: f64,
    values: Vec<f64>,
}

/// Writes the dataset as JSON lines: a header, then one object per batch.
pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_dataset(d, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

fn write_dataset<W: Write>(d: &Dataset, out: &mut W) -> std::io::Result<()> {
    let header = Header {
        version: FORMAT_VERSION,
        config: d.config,
    };
    serde_json::to_writer(&mut *out, &header)?;
    out.write_all(b"\n")?;
    for b in &d.batches {
        let p = b.true_params().ok_or_else(|| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("batch t={} has no true parameters", b.t()),
            )
        })?;
        let line = BatchLine {
            t: b.t(),
            true_mu: p.mu(),
            true_gamma: p.sigma(),
            values: b.values().to_vec(),
        };
        serde_json::to_writer(&mut *out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut lines = BufReader::new(file).lines().enumerate();
    let header: Header = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| parse_err(1, e.to_string()))?
        }
        None => return Err(parse_err(1, "empty file: missing header".into())),
    };
    if header.version != FORMAT_VERSION {
        return Err(parse_err(
            1,
            format!("unsupported format version {}", header.version),
        ));
    }

    let mut batches = Vec::with_capacity(header.config.num_batches);
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: BatchLine =
            serde_json::from_str(&line).map_err(|e| parse_err(lineno, e.to_string()))?;
        let params = GaussianParams::new(raw.true_mu, raw.true_gamma)
            .map_err(|e| parse_err(lineno, e.to_string()))?;
        let batch = Batch::new(raw.t, raw.values, Some(params))
            .map_err(|e| parse_err(lineno, e.to_string()))?;
        if let Some(prev) = batches.last().map(Batch::t) {
            if batch.t() <= prev {
                return Err(parse_err(
                    lineno,
                    format!("batch index {} does not follow {prev}", batch.t()),
                ));
            }
        }
        batches.push(batch);
    }
    if batches.len() != header.config.num_batches {
        return Err(parse_err(
            batches.len() + 1,
            format!(
                "expected {} batches, found {}",
                header.config.num_batches,
                batches.len()
            ),
        ));
    }
    Ok(Dataset {
        config: header.config,
        batches,
    })
}
