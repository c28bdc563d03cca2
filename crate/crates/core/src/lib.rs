//! Sparse kernel regression in ℓ¹-norm reproducing kernel Banach spaces.
//!
//! The crate covers
//!
//! * [`kernels`]: exponential, Brownian bridge and Gaussian kernels, Gram
//!   systems and cross-evaluation vectors;
//! * [`admissibility`]: the Lebesgue-function test that decides whether
//!   sample-centered expansions are minimal-norm interpolants;
//! * [`rkbs`]: finite expansions with the ℓ¹ norm, minimal-norm
//!   interpolation and the sampling/hypothesis/regularization error split;
//! * [`sparse_solver`]: coordinate-descent lasso with a duality-gap
//!   certificate, and a simplex basis-pursuit oracle;
//! * [`spectral`]: Mercer eigenpairs, source-condition regression functions,
//!   `L²(ρ)` quadrature and regularization-error candidates;
//! * [`experiments`]: seeded Monte Carlo learning-rate experiments;
//! * [`cli`]: the command-line front end.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```text
//! cargo run --example kernel_gram
//! cargo run --example check_admissibility
//! cargo run --example min_norm_interpolation
//! cargo run --example lasso_fit
//! cargo run --example mercer_spectrum
//! cargo run --example regularization_error
//! cargo run --release --example error_decomposition
//! cargo run --release --example learning_rate
//! ```
//!
//! ```
//! use l1rkbs::kernels::Kernel;
//! use l1rkbs::rkbs::min_norm_interpolant;
//!
//! let kernel = Kernel::brownian_bridge();
//! let f = min_norm_interpolant(&kernel, &[0.25, 0.5, 0.75], &[1.0, -1.0, 0.5]).unwrap();
//! assert!((f.expansion.evaluate(&kernel, 0.5).unwrap() + 1.0).abs() < 1e-12);
//! ```

pub mod admissibility;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod function;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod rkbs;
pub mod rng;
pub mod sparse_solver;
pub mod spectral;

pub use error::{Error, Result};
pub use function::{Hypothesis, RealFunction};
pub use kernels::{GramSystem, Kernel};
pub use rkbs::{DiscreteExpansion, SampleSet};
