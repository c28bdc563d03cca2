//! Solvers for the ℓ¹-regularized least-squares scheme and the basis-pursuit
//! oracle used to certify minimal-norm interpolation.

mod lasso;
mod simplex;

pub use lasso::{
    lambda_max, lasso_cd, lasso_duality_gap, lasso_objective, soft_threshold,
    subgradient_violation, LassoOptions, LassoSolution,
};
pub use simplex::{basis_pursuit_lp, LpSolution, LpStatus};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::{self, Kernel, MIN_CENTER_SEPARATION};
use crate::linalg::Matrix;
use crate::rkbs::{DiscreteExpansion, SampleSet};

/// Regressor `f_{z,λ} = K^x(·) c_{z,λ}` together with its solver certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedRegressor {
    pub expansion: DiscreteExpansion,
    pub solution: LassoSolution,
    pub lambda: f64,
}

pub fn fit_regressor(kernel: &Kernel, z: &SampleSet, lambda: f64) -> Result<FittedRegressor> {
    fit_regressor_with(kernel, z, lambda, &LassoOptions::default())
}

/// The Gram matrix in the lasso is `K[x]`, so `(Gc)_j = K^x(x_j) c`.
pub fn fit_regressor_with(
    kernel: &Kernel,
    z: &SampleSet,
    lambda: f64,
    opts: &LassoOptions,
) -> Result<FittedRegressor> {
    crate::rkbs::check_lambda(lambda)?;
    let gram = kernels::gram(kernel, z.points())?;
    let solution = lasso_cd(gram.matrix(), z.outputs(), lambda, opts)?;
    let expansion = DiscreteExpansion::new(z.points().to_vec(), solution.coefficients.clone())?;
    Ok(FittedRegressor {
        expansion,
        solution,
        lambda,
    })
}

/// Dictionary `t = centers ∪ grid` with `A_{j,k} = K(t_k, x_j)`; grid atoms
/// that collide with a center are dropped. The centers come first.
pub fn augmented_dictionary(
    kernel: &Kernel,
    centers: &[f64],
    grid_atoms: usize,
) -> (Vec<f64>, Matrix) {
    let mut atoms = centers.to_vec();
    let (a, b) = kernel.domain().scan_bounds();
    for i in 1..=grid_atoms {
        let t = a + (b - a) * i as f64 / (grid_atoms + 1) as f64;
        if atoms
            .iter()
            .all(|&s| (s - t).abs() >= MIN_CENTER_SEPARATION)
        {
            atoms.push(t);
        }
    }
    let matrix = Matrix::from_fn(centers.len(), atoms.len(), |j, k| {
        kernel.value(atoms[k], centers[j])
    });
    (atoms, matrix)
}
