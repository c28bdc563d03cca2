//! Fits the ℓ¹-regularized regressor to noisy samples along a λ path and
//! prints the solver certificate for each fit.
//!
//! ```bash
//! cargo run --example lasso_fit
//! ```

use l1rkbs::kernels::gram_matrix;
use l1rkbs::rng::CounterRng;
use l1rkbs::sparse_solver::{fit_regressor, lambda_max, subgradient_violation};
use l1rkbs::{Kernel, SampleSet};

fn main() -> l1rkbs::Result<()> {
    let kernel = Kernel::brownian_bridge();
    let rng = CounterRng::new(42, 0);
    let m = 200;
    let x: Vec<f64> = (0..m as u64).map(|j| rng.uniform(2 * j)).collect();
    let y: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            (std::f64::consts::PI * t).sin() + rng.uniform_in(2 * j as u64 + 1, -0.1, 0.1)
        })
        .collect();
    let z = SampleSet::new(x.clone(), y.clone())?;

    let g = gram_matrix(&kernel, &x);
    let lmax = lambda_max(&g, &y);
    println!("m = {m}, lambda_max = {lmax:.6}");
    println!(
        "{:>10} {:>8} {:>10} {:>12} {:>10}",
        "lambda", "support", "sweeps", "gap", "kkt"
    );
    for lambda in [lmax, lmax / 2.0, 1e-2, 1e-3, 1e-4] {
        let fit = fit_regressor(&kernel, &z, lambda)?;
        println!(
            "{lambda:>10.2e} {:>8} {:>10} {:>12.2e} {:>10.2e}",
            fit.solution.support.len(),
            fit.solution.iterations,
            fit.solution.duality_gap,
            subgradient_violation(&g, &y, lambda, &fit.solution.coefficients)
        );
    }

    let fit = fit_regressor(&kernel, &z, 1e-3)?;
    println!("atoms at lambda = 1e-3:");
    for (t, c) in fit.expansion.support() {
        println!("  {t:.5} {c:+.5}");
    }
    Ok(())
}
