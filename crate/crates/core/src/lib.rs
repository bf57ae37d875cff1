//! Conditional-independence graph estimation for multi-attribute Gaussian
//! time series.
//!
//! The pipeline turns an `n x (m*p)` sample matrix into smoothed spectral
//! density estimates at `M` anchor frequencies, then minimizes a penalized
//! Whittle negative log-likelihood over the inverse spectral densities with a
//! sparse-group penalty (lasso, log-sum or SCAD). Non-convex penalties are
//! handled by local linear approximation around an ADMM core. An edge `{q, l}`
//! is reported when the `m x mM` block of the sparse estimate linking nodes
//! `q` and `l` is nonzero.
//!
//! ```no_run
//! use spectral_cig::{estimator::{fit, FitConfig}, penalty::PenaltySpec, synth};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let truth = synth::generate(&synth::ModelSpec::model1(8, 2), &mut rng).unwrap();
//! let series = synth::simulate_var(&truth.model, 1024, 100, &mut rng).unwrap();
//! let config = FitConfig::fixed(PenaltySpec::log_sum(0.05), 56);
//! let result = fit(&series, &config).unwrap();
//! println!("{} edges", result.edges.len());
//! ```

pub mod admm;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod estimator;
pub mod eval;
pub mod graph;
pub mod linalg;
pub mod penalty;
pub mod spectral;
pub mod synth;
pub mod tsio;

pub use error::{Error, Result};
pub use graph::EdgeSet;
