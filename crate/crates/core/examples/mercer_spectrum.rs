//! Eigenpairs of the integral operator: closed form for the Brownian bridge,
//! Nyström for the exponential kernel.
//!
//! ```bash
//! cargo run --example mercer_spectrum
//! ```

use l1rkbs::spectral::{brownian_bridge_eigs, nystrom_eigs};
use l1rkbs::Kernel;

fn main() -> l1rkbs::Result<()> {
    let analytic = brownian_bridge_eigs(10)?;
    let nystrom = nystrom_eigs(&Kernel::brownian_bridge(), 512, 10)?;
    println!("Brownian bridge: closed form vs Nystrom (512 nodes)");
    for (j, (a, n)) in analytic
        .eigenvalues()
        .iter()
        .zip(nystrom.eigenvalues())
        .enumerate()
    {
        println!(
            "  {:>2}  {a:.12}  {n:.12}  rel {:.1e}",
            j + 1,
            ((a - n) / a).abs()
        );
    }
    println!(
        "  orthonormality defect {:.1e}",
        nystrom.orthonormality_defect()
    );

    let exp = nystrom_eigs(&Kernel::exponential(0.0, 1.0)?, 512, 6)?;
    println!("exponential kernel on [0, 1]");
    for (j, l) in exp.eigenvalues().iter().enumerate() {
        let samples: Vec<String> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&x| format!("{:+.4}", exp.eigenfunction(j, x)))
            .collect();
        println!(
            "  {:>2}  {l:.10}  phi at 0, 1/4, 1/2, 3/4, 1: {}",
            j + 1,
            samples.join(" ")
        );
    }
    Ok(())
}
