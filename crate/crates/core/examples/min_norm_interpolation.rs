//! Minimal-norm interpolation: for admissible kernels the sample-centered
//! interpolant has the smallest ℓ¹ coefficient norm among all expansions over
//! a larger dictionary, which the basis-pursuit LP confirms.
//!
//! ```bash
//! cargo run --example min_norm_interpolation
//! ```

use l1rkbs::kernels::gram;
use l1rkbs::rkbs::min_norm_interpolant;
use l1rkbs::sparse_solver::{augmented_dictionary, basis_pursuit_lp};
use l1rkbs::Kernel;

fn main() -> l1rkbs::Result<()> {
    let centers = [0.1, 0.3, 0.45, 0.7, 0.9];
    let values = [0.4, -1.0, 0.2, 0.8, -0.3];

    for kernel in [Kernel::exponential(0.0, 1.0)?, Kernel::brownian_bridge()] {
        let interp = min_norm_interpolant(&kernel, &centers, &values)?;
        let (atoms, dictionary) = augmented_dictionary(&kernel, &centers, 50);
        let lp = basis_pursuit_lp(&dictionary, &values)?;
        println!(
            "{:?}: interpolant norm {:.12}, LP over {} atoms {:.12}",
            kernel.kind(),
            interp.norm,
            atoms.len(),
            lp.optimum
        );
        for (x, y) in centers.iter().zip(values) {
            println!(
                "  f({x}) = {:+.12} (target {y:+})",
                interp.expansion.evaluate(&kernel, *x)?
            );
        }
    }

    // Without admissibility a single off-center atom can beat the interpolant.
    let gauss = Kernel::gaussian(1.0, 0.0, 1.0)?;
    let x: Vec<f64> = (0..5).map(|i| i as f64 / 4.0).collect();
    let (atoms, dictionary) = augmented_dictionary(&gauss, &x, 50);
    let k = x.len() + 5;
    let y = dictionary.column(k);
    let direct: f64 = gram(&gauss, &x)?.solve(&y).iter().map(|c| c.abs()).sum();
    let lp = basis_pursuit_lp(&dictionary, &y)?;
    println!(
        "Gaussian, data from the atom at {:.4}: interpolant norm {direct:.6}, LP {:.6}",
        atoms[k], lp.optimum
    );
    Ok(())
}
