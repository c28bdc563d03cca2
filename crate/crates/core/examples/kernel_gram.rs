//! Gram matrices and cross vectors for the three built-in kernels.
//!
//! ```bash
//! cargo run --example kernel_gram
//! ```

use l1rkbs::kernels::{cross_col, gram, lipschitz_audit};
use l1rkbs::Kernel;

fn main() -> l1rkbs::Result<()> {
    let kernels = [
        Kernel::exponential(0.0, 1.0)?,
        Kernel::brownian_bridge(),
        Kernel::gaussian(1.0, 0.0, 1.0)?,
    ];
    let centers = [0.2, 0.5, 0.8];

    for kernel in &kernels {
        let system = gram(kernel, &centers)?;
        println!("{:?} on {}", kernel.kind(), kernel.domain());
        for j in 0..system.len() {
            let row: Vec<String> = system
                .matrix()
                .row(j)
                .iter()
                .map(|v| format!("{v:8.5}"))
                .collect();
            println!("  [{}]", row.join(" "));
        }
        println!("  condition estimate {:.3e}", system.condition_estimate());

        // K_x(t): the column that the admissibility check inverts
        let col = cross_col(kernel, &centers, 0.35)?;
        println!("  K_x(0.35) = {col:.5?}");

        let audit = lipschitz_audit(kernel, 256)?;
        println!(
            "  Lipschitz: declared {:.4}, observed {:.4} (alpha = {})",
            audit.declared_constant, audit.empirical_constant, audit.alpha
        );
    }

    // duplicate centers are rejected before any factorization
    match gram(&kernels[0], &[0.1, 0.1]) {
        Err(e) => println!("duplicate centers: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
