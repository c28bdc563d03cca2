//! Splits the excess risk of one fit into sampling, hypothesis and
//! regularization terms and checks that they add back up.
//!
//! ```bash
//! cargo run --release --example error_decomposition
//! ```

use l1rkbs::config::Config;
use l1rkbs::experiments::decompose_sample;

fn main() -> l1rkbs::Result<()> {
    let config = Config::from_json(include_str!("configs/rate.json"))?;
    let cfg = config.experiment_config()?;

    for m in [64, 256, 1024] {
        let record = decompose_sample(&cfg, None, m, None)?;
        let d = &record.decomposition;
        println!("m = {m}, lambda = {:.4}", record.lambda);
        println!("  excess risk     {:.10}", record.excess_risk);
        println!("  sampling S      {:+.10}", d.sampling);
        println!("  hypothesis P    {:+.10}", d.hypothesis);
        println!("  regularization  {:+.10}", d.regularization);
        println!("  lambda ||f||    {:+.10}", d.lambda * d.fit_norm);
        println!(
            "  S + P + D - lambda ||f|| - excess = {:.2e}",
            d.recombined() - record.excess_risk
        );
    }
    Ok(())
}
