//! Batch weight sequences: the three fixed baselines and the MISE-optimal
//! weights from a simplex-constrained quadratic program.
//!
//! Index 0 is the oldest batch in the window, the last index the current
//! batch.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mise::MiseComponents;

/// Tolerance on `sum(alpha) == 1` accepted by [`WeightVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-10;
/// Most negative entry tolerated (and clamped to zero) by [`WeightVector::new`].
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// A weight sequence on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Validates simplex membership; entries within rounding of zero are
    /// clamped onto `[0, 1]`.
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::domain("weight vector must be non-empty"));
        }
        let mut sum = 0.0;
        for &a in &alpha {
            if !a.is_finite() || a < -NEGATIVE_TOLERANCE {
                return Err(Error::domain(format!("weight {a} is not a valid simplex entry")));
            }
            sum += a;
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(alpha.into_iter().map(|a| a.clamp(0.0, 1.0)).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 {
        Err(Error::domain("window length must be >= 1"))
    } else {
        Ok(())
    }
}

/// All mass on the most recent batch: a plain single-batch KDE.
pub fn current_weights(len: usize) -> Result<WeightVector> {
    check_len(len)?;
    let mut a = vec![0.0; len];
    a[len - 1] = 1.0;
    Ok(WeightVector(a))
}

/// Equal weight `1 / len` on every batch.
pub fn average_weights(len: usize) -> Result<WeightVector> {
    check_len(len)?;
    Ok(WeightVector(vec![1.0 / len as f64; len]))
}

/// Exponential decay with factor `beta`:
/// `alpha_1 = (1 - beta)^(T-1)` and `alpha_i = beta (1 - beta)^(T-i)` for
/// `i >= 2` (1-based). The oldest batch absorbs the geometric tail.
pub fn exponential_weights(len: usize, beta: f64) -> Result<WeightVector> {
    check_len(len)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    let keep = 1.0 - beta;
    let a = (0..len)
        .map(|i| {
            if i == 0 {
                keep.powi(len as i32 - 1)
            } else {
                keep.powi((len - 1 - i) as i32) * beta
            }
        })
        .collect();
    Ok(WeightVector(a))
}

/// Euclidean projection onto `{w : sum(w) = 1, w >= 0}` (sort and threshold).
pub fn project_to_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::domain("cannot project an empty vector"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("cannot project a non-finite vector"));
    }
    let mut out = vec![0.0; v.len()];
    project_into(v, &mut out, &mut Vec::with_capacity(v.len()));
    Ok(out)
}

/// Projection without validation, reusing `scratch` for the sort.
fn project_into(v: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    scratch.clear();
    scratch.extend_from_slice(v);
    scratch.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut cumsum = 0.0;
    let mut threshold = 0.0;
    for (k, &u) in scratch.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            threshold = t;
        } else {
            break;
        }
    }
    for (o, &x) in out.iter_mut().zip(v) {
        *o = (x - threshold).max(0.0);
    }
}

/// Outcome of [`solve_optimal_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct QpReport {
    pub alpha: WeightVector,
    /// `alpha' Lambda alpha - 2 theta' alpha + c` at the returned weights.
    pub objective: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}

/// Solver limits for [`solve_optimal_weights_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once the iterate moves less than this in the max norm...
    pub step_tolerance: f64,
    /// ...provided the KKT residual is at most this.
    pub kkt_accept: f64,
    /// Stop immediately once the KKT residual drops below this.
    pub kkt_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            step_tolerance: 1e-12,
            kkt_accept: 1e-8,
            kkt_tolerance: 1e-10,
        }
    }
}

/// KKT violation of `alpha` for `min f` over the simplex, given the gradient
/// `g` at `alpha`.
///
/// Optimality requires one multiplier `lambda` with `g_i = -lambda` on the
/// support and `g_i >= -lambda` off it. `-lambda` is taken as the midpoint
/// of the gradient range over the support; the residual is the worst
/// violation of either condition.
pub fn kkt_residual(alpha: &[f64], g: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&a, &gi) in alpha.iter().zip(g) {
        if a > 0.0 {
            lo = lo.min(gi);
            hi = hi.max(gi);
        }
    }
    if !lo.is_finite() {
        return f64::INFINITY;
    }
    let level = 0.5 * (lo + hi);
    let mut worst = 0.5 * (hi - lo);
    for (&a, &gi) in alpha.iter().zip(g) {
        if a <= 0.0 {
            worst = worst.max(level - gi);
        }
    }
    worst
}

/// MISE-optimal weights: minimizes the exact MISE over the simplex.
pub fn solve_optimal_weights(c: &MiseComponents) -> Result<QpReport> {
    solve_optimal_weights_with(c, &SolverOptions::default())
}

/// Nesterov-accelerated projected gradient with fixed step `1 / (2L)`,
/// `L = 2 max_i sum_j |Lambda_ij|`, warm-started at uniform weights.
/// Momentum resets whenever the accelerated step points uphill.
pub fn solve_optimal_weights_with(c: &MiseComponents, opts: &SolverOptions) -> Result<QpReport> {
    if !c.is_finite() {
        return Err(Error::domain("MISE components contain non-finite entries"));
    }
    let n = c.len();
    if n == 0 {
        return Err(Error::domain("empty window"));
    }
    if n == 1 {
        let alpha = WeightVector(vec![1.0]);
        let mut g = [0.0];
        c.gradient(alpha.as_slice(), &mut g);
        return Ok(QpReport {
            objective: c.objective(alpha.as_slice()),
            kkt_residual: kkt_residual(alpha.as_slice(), &g),
            alpha,
            iterations: 0,
        });
    }

    let lipschitz = 2.0
        * (0..n)
            .map(|i| (0..n).map(|j| c.lambda(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max);
    let step = 1.0 / (2.0 * lipschitz);

    let mut x = vec![1.0 / n as f64; n];
    let mut y = x.clone();
    let mut next = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut scratch = Vec::with_capacity(n);
    let mut momentum = 1.0f64;

    let mut best = x.clone();
    let mut best_f = c.objective(&x);
    let mut best_kkt = f64::INFINITY;

    for iter in 1..=opts.max_iterations {
        c.gradient(&y, &mut g);
        for i in 0..n {
            trial[i] = y[i] - step * g[i];
        }
        project_into(&trial, &mut next, &mut scratch);

        let change = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);

        // Gradient-based restart: drop momentum once it points uphill.
        let uphill: f64 = (0..n).map(|i| (y[i] - next[i]) * (next[i] - x[i])).sum();
        if uphill > 0.0 {
            momentum = 1.0;
            y.copy_from_slice(&next);
        } else {
            let momentum_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / momentum_next;
            for i in 0..n {
                y[i] = next[i] + beta * (next[i] - x[i]);
            }
            momentum = momentum_next;
        }
        std::mem::swap(&mut x, &mut next);
        let f_x = c.objective(&x);

        c.gradient(&x, &mut g);
        let kkt = kkt_residual(&x, &g);
        if kkt < best_kkt || (kkt == best_kkt && f_x < best_f) {
            best.copy_from_slice(&x);
            best_f = f_x;
            best_kkt = kkt;
        }

        if kkt < opts.kkt_tolerance || (change < opts.step_tolerance && kkt <= opts.kkt_accept) {
            return Ok(QpReport {
                alpha: normalized(&x),
                objective: f_x,
                iterations: iter,
                kkt_residual: kkt,
            });
        }
    }

    c.gradient(&best, &mut g);
    Err(Error::Convergence {
        iterations: opts.max_iterations,
        kkt_residual: kkt_residual(&best, &g),
        best: normalized(&best),
    })
}

/// Projection output sums to one up to rounding; renormalize the last ulps
/// away without touching exact zeros.
fn normalized(x: &[f64]) -> WeightVector {
    let s: f64 = x.iter().sum();
    WeightVector(x.iter().map(|v| (v / s).clamp(0.0, 1.0)).collect())
}
