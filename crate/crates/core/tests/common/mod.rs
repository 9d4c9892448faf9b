//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use kdetrack::mise::{build_components, BatchSummary, MiseComponents, MixtureDensity};
use kdetrack::{closed_form_ise, GaussianParams};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A window of `len` batches drawn from the synthetic walk: mean steps
/// U[-1, 1], std steps U[-0.2, 0.2] floored at 1, sizes uniform on 3..=20.
/// Returns the summaries oldest first.
pub fn walk_window(rng: &mut TestRng, len: usize) -> Vec<BatchSummary> {
    let burn_in = rng.gen_range(0..20);
    let (mut mu, mut gamma) = (0.0_f64, 1.0_f64);
    for _ in 0..burn_in {
        mu += rng.gen_range(-1.0..=1.0);
        gamma = (gamma + rng.gen_range(-0.2..=0.2)).max(1.0);
    }
    (0..len)
        .map(|_| {
            mu += rng.gen_range(-1.0..=1.0);
            gamma = (gamma + rng.gen_range(-0.2..=0.2)).max(1.0);
            BatchSummary::new(mu, gamma, rng.gen_range(3..=20)).unwrap()
        })
        .collect()
}

/// Random components over a walk window, targeting the newest batch.
pub fn random_components(rng: &mut TestRng, len: usize, bandwidth: f64) -> MiseComponents {
    let window = walk_window(rng, len);
    let last = window.last().unwrap();
    let target = GaussianParams::new(last.mu(), last.gamma()).unwrap();
    build_components(&window, &target, bandwidth).unwrap()
}

/// Uniform point on the simplex (normalized exponentials).
pub fn random_simplex(rng: &mut TestRng, len: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..len).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Smallest eigenvalue of a row-major symmetric matrix.
pub fn min_eigenvalue(matrix: &[f64], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, matrix);
    SymmetricEigen::new(m).eigenvalues.min()
}

/// Brute-force minimum of the objective over a simplex grid with spacing
/// `1/steps` (two or three coordinates).
pub fn grid_min(c: &MiseComponents, steps: usize) -> (f64, Vec<f64>) {
    let h = 1.0 / steps as f64;
    let mut best = (f64::INFINITY, Vec::new());
    let mut consider = |a: Vec<f64>| {
        let v = c.objective(&a);
        if v < best.0 {
            best = (v, a);
        }
    };
    match c.len() {
        2 => {
            for i in 0..=steps {
                let a = i as f64 * h;
                consider(vec![a, 1.0 - a]);
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let (a, b) = (i as f64 * h, j as f64 * h);
                    consider(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
        n => panic!("grid oracle supports 2 or 3 coordinates, got {n}"),
    }
    best
}

/// Monte-Carlo MISE: resample every batch from its true Gaussian, form the
/// weighted KDE, and average the closed-form ISE against `target`.
/// Returns (mean, standard error of the mean).
pub fn monte_carlo_mise(
    rng: &mut TestRng,
    window: &[BatchSummary],
    target: &GaussianParams,
    bandwidth: f64,
    alpha: &[f64],
    replicates: usize,
) -> (f64, f64) {
    let normals: Vec<Normal<f64>> = window
        .iter()
        .map(|b| Normal::new(b.mu(), b.gamma()).unwrap())
        .collect();
    let mut samples: Vec<Vec<f64>> = window.iter().map(|b| vec![0.0; b.n()]).collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..replicates {
        for (dist, xs) in normals.iter().zip(samples.iter_mut()) {
            for x in xs.iter_mut() {
                *x = dist.sample(rng);
            }
        }
        let h = MixtureDensity::from_window(
            samples.iter().zip(alpha).map(|(xs, &a)| (xs.as_slice(), a)),
            bandwidth,
        )
        .unwrap();
        let ise = closed_form_ise(&h, target);
        sum += ise;
        sum_sq += ise * ise;
    }
    let r = replicates as f64;
    let mean = sum / r;
    let var = (sum_sq - r * mean * mean) / (r - 1.0);
    (mean, (var.max(0.0) / r).sqrt())
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
