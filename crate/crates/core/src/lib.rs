//! Sliding-window Gaussian kernel density estimation for densities that
//! drift over time.
//!
//! Batches of samples arrive one at a time; the estimator is a weighted
//! average of per-batch KDEs over the last `T` batches. When the batches are
//! Gaussian, its mean integrated squared error is an exact quadratic form in
//! the batch weights, so the best weights come from a small quadratic
//! program over the probability simplex.
//!
//! - [`gaussian`]: Gaussian pdf and product/inner-product identities.
//! - [`mise`]: the quadratic form, its bias/variance split, closed-form ISE.
//! - [`weights`]: baseline schemes and the optimal-weight solver.
//! - [`tracker`]: the windowed estimator.
//! - [`synth`]: seeded synthetic datasets and their file format.
//! - [`bench`]: tracking runs, Monte-Carlo sweeps, CSV/JSON output.

pub mod bench;
pub mod error;
pub mod gaussian;
pub mod mise;
pub mod quadrature;
pub mod synth;
pub mod tracker;
pub mod weights;

pub use error::{Error, Result};
pub use gaussian::{cross_inner, gaussian_product, l2_norm_sq, phi, GaussianParams};
pub use mise::{
    build_components, closed_form_ise, exact_mise, ib_squared, iv, BatchSummary, MiseComponents,
    MixtureDensity,
};
pub use quadrature::quadrature_ise;
pub use synth::{generate, load_dataset, save_dataset, Dataset, GeneratorConfig};
pub use tracker::{summarize_batch, Batch, ParamMode, Scheme, Tracker, TrackerConfig};
pub use weights::{
    average_weights, current_weights, exponential_weights, project_to_simplex,
    solve_optimal_weights, QpReport, WeightVector,
};
