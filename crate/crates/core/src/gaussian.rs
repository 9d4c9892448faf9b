//! Univariate Gaussian densities and the closed-form identities used to
//! integrate products of them.
//!
//! Everything here is a pure function of `f64` inputs. `GaussianParams`
//! validates on construction so downstream code never sees a non-positive
//! scale.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// 1 / sqrt(2 pi)
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Location/scale pair naming the density `phi(sigma, x - mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    mu: f64,
    sigma: f64,
}

impl GaussianParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        ensure_finite("mu", mu)?;
        ensure_positive("sigma", sigma)?;
        Ok(Self { mu, sigma })
    }

    pub fn standard() -> Self {
        Self { mu: 0.0, sigma: 1.0 }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Density at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        phi_unchecked(self.sigma, x - self.mu)
    }
}

#[inline]
pub(crate) fn phi_unchecked(scale: f64, z: f64) -> f64 {
    let u = z / scale;
    INV_SQRT_2PI / scale * (-0.5 * u * u).exp()
}

/// Centered Gaussian pdf with standard deviation `scale`, evaluated at `z`.
pub fn phi(scale: f64, z: f64) -> Result<f64> {
    ensure_positive("scale", scale)?;
    ensure_finite("z", z)?;
    Ok(phi_unchecked(scale, z))
}

/// Product of two Gaussian densities as a scaled Gaussian density:
///
/// `phi_a(x - mu_a) * phi_b(x - mu_b) = s * phi_c(x - mu_c)`
///
/// with `s = phi(sqrt(a^2 + b^2), mu_a - mu_b)`, `c = ab / sqrt(a^2 + b^2)`
/// and `mu_c = (a^2 mu_b + b^2 mu_a) / (a^2 + b^2)`.
pub fn gaussian_product(a: &GaussianParams, b: &GaussianParams) -> (f64, GaussianParams) {
    let va = a.variance();
    let vb = b.variance();
    let total = va + vb;
    let root = total.sqrt();
    let scale_factor = phi_unchecked(root, a.mu - b.mu);
    let result = GaussianParams {
        mu: (va * b.mu + vb * a.mu) / total,
        sigma: a.sigma * b.sigma / root,
    };
    (scale_factor, result)
}

/// L2 inner product `integral phi_a(x - mu_a) phi_b(x - mu_b) dx`.
pub fn cross_inner(a: &GaussianParams, b: &GaussianParams) -> f64 {
    phi_unchecked((a.variance() + b.variance()).sqrt(), a.mu - b.mu)
}

/// Squared L2 norm, `1 / (2 sigma sqrt(pi))`. Evaluated through
/// [`cross_inner`] so the two agree bit for bit.
pub fn l2_norm_sq(g: &GaussianParams) -> f64 {
    cross_inner(g, g)
}

impl TryFrom<(f64, f64)> for GaussianParams {
    type Error = Error;

    fn try_from((mu, sigma): (f64, f64)) -> Result<Self> {
        Self::new(mu, sigma)
    }
}
