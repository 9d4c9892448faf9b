//! Exact mean integrated squared error of the sliding-window Gaussian KDE.
//!
//! For batches with true parameters `(mu_i, gamma_i, n_i)`, bandwidth
//! `sigma` and target density `N(mu_t, gamma_t^2)`, the MISE of the weighted
//! estimator is the quadratic form
//!
//! ```text
//! MISE(alpha) = alpha' (Phi + D) alpha - 2 theta' alpha + c
//! ```
//!
//! where `Phi` is the Gram matrix of the kernel-smoothed batch densities,
//! `D` holds the per-batch integrated variances, `theta` the inner products
//! of smoothed densities with the target and `c` the target's squared L2
//! norm. `Phi`/`theta`/`c` make up the integrated squared bias and `D` the
//! integrated variance.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::gaussian::{cross_inner, l2_norm_sq, phi_unchecked, GaussianParams};
use crate::weights::WeightVector;

/// Largest window the dense matrix code accepts.
pub const MAX_WINDOW: usize = 64;

/// Parameters of one batch: location, spread and sample count.
///
/// `gamma` may be zero (a point mass); the kernel keeps every smoothed
/// density proper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    mu: f64,
    gamma: f64,
    n: usize,
}

impl BatchSummary {
    pub fn new(mu: f64, gamma: f64, n: usize) -> Result<Self> {
        ensure_finite("mu", mu)?;
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::domain(format!(
                "gamma must be finite and >= 0, got {gamma}"
            )));
        }
        if n == 0 {
            return Err(Error::domain("batch sample count must be >= 1"));
        }
        Ok(Self { mu, gamma, n })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// The quadratic form's pieces for one window and one target.
#[derive(Debug, Clone, PartialEq)]
pub struct MiseComponents {
    len: usize,
    /// Row-major `len x len`.
    phi: Vec<f64>,
    d_diag: Vec<f64>,
    theta: Vec<f64>,
    constant: f64,
    bandwidth: f64,
    target: GaussianParams,
}

/// Builds `Phi`, `diag(D)`, `theta` and `c` for the given window.
pub fn build_components(
    summaries: &[BatchSummary],
    target: &GaussianParams,
    bandwidth: f64,
) -> Result<MiseComponents> {
    let len = summaries.len();
    if len == 0 {
        return Err(Error::domain("window must contain at least one batch"));
    }
    if len > MAX_WINDOW {
        return Err(Error::domain(format!(
            "window of {len} batches exceeds the maximum of {MAX_WINDOW}"
        )));
    }
    ensure_positive("bandwidth", bandwidth)?;
    let s2 = bandwidth * bandwidth;
    let two_sqrt_pi = 2.0 * PI.sqrt();

    let mut phi = vec![0.0; len * len];
    for (i, a) in summaries.iter().enumerate() {
        for (j, b) in summaries.iter().enumerate().skip(i) {
            let scale = (2.0 * s2 + a.gamma * a.gamma + b.gamma * b.gamma).sqrt();
            let v = phi_unchecked(scale, a.mu - b.mu);
            phi[i * len + j] = v;
            phi[j * len + i] = v;
        }
    }

    let d_diag = summaries
        .iter()
        .map(|b| {
            let smoothed = (s2 + b.gamma * b.gamma).sqrt();
            (1.0 / bandwidth - 1.0 / smoothed) / (b.n as f64 * two_sqrt_pi)
        })
        .collect();

    let tv = target.variance();
    let theta = summaries
        .iter()
        .map(|b| phi_unchecked((s2 + b.gamma * b.gamma + tv).sqrt(), b.mu - target.mu()))
        .collect();

    Ok(MiseComponents {
        len,
        phi,
        d_diag,
        theta,
        constant: l2_norm_sq(target),
        bandwidth,
        target: *target,
    })
}

impl MiseComponents {
    /// Window length `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.phi[i * self.len + j]
    }

    /// `Phi` in row-major order.
    pub fn phi_matrix(&self) -> &[f64] {
        &self.phi
    }

    pub fn d_diag(&self) -> &[f64] {
        &self.d_diag
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn target(&self) -> &GaussianParams {
        &self.target
    }

    /// Entry of `Lambda = Phi + D`.
    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        let p = self.phi(i, j);
        if i == j {
            p + self.d_diag[i]
        } else {
            p
        }
    }

    /// `Lambda` in row-major order.
    pub fn lambda_matrix(&self) -> Vec<f64> {
        let mut m = self.phi.clone();
        for (i, d) in self.d_diag.iter().enumerate() {
            m[i * self.len + i] += d;
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.phi.iter().all(|v| v.is_finite())
            && self.d_diag.iter().all(|v| v.is_finite())
            && self.theta.iter().all(|v| v.is_finite())
            && self.constant.is_finite()
    }

    /// `alpha' Lambda alpha - 2 theta' alpha + c` for an arbitrary vector.
    /// No simplex or length checks; callers own those.
    pub fn objective(&self, alpha: &[f64]) -> f64 {
        self.quadratic(alpha, true) - 2.0 * dot(&self.theta, alpha) + self.constant
    }

    /// Gradient of [`objective`](Self::objective): `2 Lambda alpha - 2 theta`.
    pub fn gradient(&self, alpha: &[f64], out: &mut [f64]) {
        for i in 0..self.len {
            let row = &self.phi[i * self.len..(i + 1) * self.len];
            let mut acc = dot(row, alpha) + self.d_diag[i] * alpha[i];
            acc -= self.theta[i];
            out[i] = 2.0 * acc;
        }
    }

    fn quadratic(&self, alpha: &[f64], with_d: bool) -> f64 {
        let mut total = 0.0;
        for i in 0..self.len {
            let row = &self.phi[i * self.len..(i + 1) * self.len];
            let mut acc = dot(row, alpha);
            if with_d {
                acc += self.d_diag[i] * alpha[i];
            }
            total += alpha[i] * acc;
        }
        total
    }

    fn check_len(&self, alpha: &WeightVector) -> Result<()> {
        if alpha.len() != self.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                got: alpha.len(),
            });
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact MISE of the weighted estimator. May come out a hair below zero
/// from rounding; reporting code clamps, this does not.
pub fn exact_mise(c: &MiseComponents, alpha: &WeightVector) -> Result<f64> {
    c.check_len(alpha)?;
    Ok(c.objective(alpha.as_slice()))
}

/// Integrated squared bias, `alpha' Phi alpha - 2 theta' alpha + c`.
pub fn ib_squared(c: &MiseComponents, alpha: &WeightVector) -> Result<f64> {
    c.check_len(alpha)?;
    let a = alpha.as_slice();
    Ok(c.quadratic(a, false) - 2.0 * dot(&c.theta, a) + c.constant)
}

/// Integrated variance, `sum_i alpha_i^2 D_ii`.
pub fn iv(c: &MiseComponents, alpha: &WeightVector) -> Result<f64> {
    c.check_len(alpha)?;
    Ok(alpha
        .as_slice()
        .iter()
        .zip(&c.d_diag)
        .map(|(a, d)| a * a * d)
        .sum())
}

/// A finite weighted sum of Gaussian densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDensity {
    components: Vec<(f64, GaussianParams)>,
}

impl MixtureDensity {
    /// Rejects an empty component list and non-finite weights. Weights are
    /// not required to sum to one.
    pub fn new(components: Vec<(f64, GaussianParams)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("mixture needs at least one component"));
        }
        for (w, _) in &components {
            ensure_finite("mixture weight", *w)?;
        }
        Ok(Self { components })
    }

    pub fn single(params: GaussianParams) -> Self {
        Self {
            components: vec![(1.0, params)],
        }
    }

    /// Realized sliding-window estimator: one kernel of width `bandwidth`
    /// per sample, sample `j` of batch `i` weighted `alpha_i / n_i`.
    pub fn from_window<'a, I>(batches: I, bandwidth: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [f64], f64)>,
    {
        ensure_positive("bandwidth", bandwidth)?;
        let mut components = Vec::new();
        for (values, alpha) in batches {
            if values.is_empty() {
                return Err(Error::domain("batch without samples"));
            }
            let w = alpha / values.len() as f64;
            for &x in values {
                components.push((w, GaussianParams::new(x, bandwidth)?));
            }
        }
        Self::new(components)
    }

    pub fn components(&self) -> &[(f64, GaussianParams)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|(w, g)| w * g.pdf(x)).sum()
    }
}

/// Closed-form `integral (h - p)^2 dx` for a Gaussian mixture `h` and a
/// Gaussian `p`, expanded into pairwise inner products.
pub fn closed_form_ise(h: &MixtureDensity, target: &GaussianParams) -> f64 {
    let comps = h.components();
    let mut self_term = 0.0;
    for (k, (wk, gk)) in comps.iter().enumerate() {
        let mut off = 0.0;
        for (wl, gl) in &comps[k + 1..] {
            off += wl * cross_inner(gk, gl);
        }
        self_term += wk * (wk * cross_inner(gk, gk) + 2.0 * off);
    }
    let cross: f64 = comps.iter().map(|(w, g)| w * cross_inner(g, target)).sum();
    self_term - 2.0 * cross + l2_norm_sq(target)
}
