//! Monte Carlo learning-rate experiment. Pass a config file to override the
//! built-in one, and optionally an output path for the CSV report.
//!
//! ```bash
//! cargo run --release --example learning_rate
//! cargo run --release --example learning_rate -- crates/core/examples/configs/rate.json /tmp/rate.csv
//! ```

use std::path::Path;

use l1rkbs::config::Config;
use l1rkbs::experiments::{emit_report, run_rate_experiment, ReportFormat};

const DEFAULT: &str = include_str!("configs/rate.json");

fn main() -> l1rkbs::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = match args.first() {
        Some(path) => Config::load(Path::new(path))?,
        None => Config::from_json(DEFAULT)?,
    };
    let cfg = config.experiment_config()?;
    println!(
        "{} trials per size, sigma = {}, seed = {}",
        cfg.trials, cfg.sigma, cfg.seed
    );

    let report = run_rate_experiment(&cfg)?;
    println!(
        "{:>6} {:>8} {:>12} {:>12} {:>12} {:>12}",
        "m", "lambda", "mean", "q10", "q90", "D"
    );
    for r in &report.records {
        println!(
            "{:>6} {:>8.4} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e}",
            r.m, r.lambda, r.mean_excess, r.q10, r.q90, r.d
        );
    }
    match report.fitted_slope {
        Some(slope) => println!(
            "fitted slope {slope:.4}, guaranteed exponent {:.4}",
            -report.gamma_theory
        ),
        None => println!("too few sizes to fit a slope"),
    }

    if let Some(out) = args.get(1) {
        emit_report(&report, ReportFormat::Csv, Path::new(out))?;
        println!("wrote {out}");
    }
    Ok(())
}
