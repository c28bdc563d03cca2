//! Regularization error of the truncated source candidate against its
//! closed-form bound, for several smoothness levels.
//!
//! ```bash
//! cargo run --example regularization_error
//! ```

use std::sync::Arc;

use l1rkbs::spectral::{brownian_bridge_eigs, reg_error_bound, reg_error_candidate, SourceSpec};

fn main() -> l1rkbs::Result<()> {
    let eigs = Arc::new(brownian_bridge_eigs(10)?);
    let lambda_1 = eigs.eigenvalues()[0];
    let norm = (1..=10).map(|j| 1.0 / (j * j) as f64).sum::<f64>().sqrt();
    let h: Vec<f64> = (1..=10).map(|j| 1.0 / j as f64 / norm).collect();

    for s in [0.25, 0.5, 0.75, 1.0, 1.5] {
        let spec = SourceSpec::new(s, h.clone())?;
        println!("s = {s}");
        println!(
            "  {:>8} {:>10} {:>4} {:>14} {:>14}",
            "lambda", "branch", "N", "D", "bound"
        );
        for lambda in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5] {
            let cand = reg_error_candidate(&eigs, &spec, lambda)?;
            println!(
                "  {lambda:>8.0e} {:>10} {:>4} {:>14.6e} {:>14.6e}",
                format!("{:?}", cand.branch),
                cand.truncation,
                cand.regularization_error(),
                reg_error_bound(&spec, lambda, lambda_1)
            );
        }
    }
    Ok(())
}
