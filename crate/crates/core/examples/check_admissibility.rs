//! Scans `t ↦ ‖K[x]⁻¹ K_x(t)‖₁` for admissible kernels and for the Gaussian,
//! which fails the condition and therefore loses the representer property.
//!
//! ```bash
//! cargo run --example check_admissibility
//! ```

use l1rkbs::admissibility::{check_h2, sup_attainment_gap, DEFAULT_GRID};
use l1rkbs::kernels::gram;
use l1rkbs::rng::CounterRng;
use l1rkbs::Kernel;

fn main() -> l1rkbs::Result<()> {
    let rng = CounterRng::new(7, 0);
    let mut centers: Vec<f64> = (0..8).map(|j| rng.uniform(j)).collect();
    centers.sort_by(f64::total_cmp);
    println!("centers {centers:.4?}");

    for kernel in [Kernel::exponential(0.0, 1.0)?, Kernel::brownian_bridge()] {
        let report = check_h2(&kernel, &centers, DEFAULT_GRID)?;
        println!(
            "{:?}: admissible = {}, max = {:.12} at t = {:.6}",
            kernel.kind(),
            report.admissible,
            report.max_value,
            report.argmax
        );

        // under the condition, sup |cᵀK_x(t)| is attained on the centers
        let system = gram(&kernel, &centers)?;
        let c: Vec<f64> = (0..centers.len() as u64)
            .map(|j| rng.uniform_in(100 + j, -1.0, 1.0))
            .collect();
        let sup = sup_attainment_gap(&system, &kernel, &c, 2048)?;
        println!(
            "  sup over grid {:.10}, max over centers {:.10}",
            sup.sup_grid, sup.max_at_centers
        );
    }

    let gauss = Kernel::gaussian(1.0, 0.0, 1.0)?;
    let equispaced: Vec<f64> = (0..5).map(|i| i as f64 / 4.0).collect();
    let report = check_h2(&gauss, &equispaced, DEFAULT_GRID)?;
    println!(
        "Gaussian: admissible = {}, {} violating points, worst {:.6} at t = {:.6}",
        report.admissible,
        report.violations.len(),
        report.max_value,
        report.argmax
    );
    Ok(())
}
