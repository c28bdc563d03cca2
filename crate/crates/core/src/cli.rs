//! Command-line front end. Results go to standard output (or `--out`),
//! diagnostics to standard error. Exit codes: 0 success, 1 invalid input,
//! 2 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::admissibility::{check_h2_with_tol, DEFAULT_GRID};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::experiments::{decompose_sample, run_rate_experiment, write_report, ReportFormat};
use crate::kernels::Kernel;
use crate::rkbs::{min_norm_interpolant, SampleSet};
use crate::sparse_solver::fit_regressor_with;
use crate::spectral::{eigensystem_for, reg_error_bound, reg_error_candidate_with, L2Quadrature};

#[derive(Parser, Debug)]
#[command(
    name = "l1rkbs",
    version,
    about = "Sparse kernel regression in an l1-norm reproducing kernel Banach space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit a JSON document instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan the representer condition for a set of centers.
    CheckH2 {
        #[command(flatten)]
        common: Common,
        /// Centers as `a,b,c` or a file holding such a list.
        #[arg(long)]
        centers: String,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Minimal-norm interpolant of values at centers.
    Interpolate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        centers: String,
        #[arg(long)]
        values: String,
    },
    /// Fit the l1-regularized regressor to `x,y` data.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Regularization error of the source candidate against its bound.
    RegError {
        #[command(flatten)]
        common: Common,
        /// Overrides the source smoothness.
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        lambdas: String,
    },
    /// Monte Carlo learning-rate experiment.
    Rate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Error decomposition of a single fit.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// Use these `x,y` samples instead of drawing one.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        /// Sample size when drawing; defaults to the largest grid size.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Runs the command line and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() || matches!(e, Error::Experiment(_)) {
        2
    } else {
        1
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Err(Error::validation(
            "config",
            "--config is required for this command",
        )),
    }
}

/// Inline `a,b,c` or the path of a file holding comma/newline separated numbers.
fn parse_list(field: &str, text: &str) -> Result<Vec<f64>> {
    let path = Path::new(text);
    let body = if path.is_file() {
        std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?
    } else {
        text.to_string()
    };
    body.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::validation(field, format!("`{t}` is not a finite number")))
        })
        .collect()
}

#[derive(serde::Deserialize)]
struct DataRow {
    x: f64,
    y: f64,
}

fn read_data(path: &Path) -> Result<SampleSet> {
    let csv_err = |source| Error::Csv {
        context: path.display().to_string(),
        source,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["x", "y"] {
        return Err(Error::validation(
            "data",
            format!("{}: header must be `x,y`", path.display()),
        ));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for row in rdr.deserialize::<DataRow>() {
        let row = row.map_err(csv_err)?;
        xs.push(row.x);
        ys.push(row.y);
    }
    SampleSet::new(xs, ys)
}

fn write_output(out: Option<&Path>, body: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(body)
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn emit<T: Serialize>(common: &Common, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    let body = if common.json {
        let mut s = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
            context: "serializing output".into(),
            source,
        })?;
        s.push('\n');
        s
    } else {
        text()
    };
    write_output(common.out.as_deref(), body.as_bytes())
}

#[derive(Serialize)]
struct RegErrorRow {
    lambda: f64,
    d_measured: f64,
    bound: f64,
    truncation: usize,
}

#[derive(Serialize)]
struct RegErrorOutput {
    s: f64,
    lambda_1: f64,
    rows: Vec<RegErrorRow>,
}

#[derive(Serialize)]
struct InterpolateOutput<'a> {
    expansion: &'a crate::rkbs::DiscreteExpansion,
    norm: f64,
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::CheckH2 {
            common,
            centers,
            grid,
        } => {
            let config = load_config(common.config.as_deref())?;
            let kernel = config.kernel()?;
            let centers = parse_list("centers", &centers)?;
            let report = check_h2_with_tol(&kernel, &centers, grid, config.admissibility_tol())?;
            emit(&common, &report, || {
                format!(
                    "admissible={} max={:.12} argmax={} violations={}\n",
                    report.admissible,
                    report.max_value,
                    report.argmax,
                    report.violations.len()
                )
            })
        }
        Command::Interpolate {
            common,
            centers,
            values,
        } => {
            let kernel = match common.config.as_deref() {
                Some(p) => Config::load(p)?.kernel()?,
                None => Kernel::exponential(0.0, 1.0)?,
            };
            let centers = parse_list("centers", &centers)?;
            let values = parse_list("values", &values)?;
            let interp = min_norm_interpolant(&kernel, &centers, &values)?;
            let out = InterpolateOutput {
                expansion: &interp.expansion,
                norm: interp.norm,
            };
            emit(&common, &out, || {
                let mut s = format!("norm={}\ncenter,coefficient\n", interp.norm);
                for (x, c) in interp
                    .expansion
                    .centers()
                    .iter()
                    .zip(interp.expansion.coefficients())
                {
                    s.push_str(&format!("{x},{c}\n"));
                }
                s
            })
        }
        Command::Fit {
            common,
            data,
            lambda,
        } => {
            let config = load_config(common.config.as_deref())?;
            let kernel = config.kernel()?;
            let z = read_data(&data)?;
            let fit = fit_regressor_with(&kernel, &z, lambda, &config.lasso_options())?;
            emit(&common, &fit, || {
                let mut s = format!(
                    "objective={} gap={:e} sweeps={} support={}\ncenter,coefficient\n",
                    fit.solution.objective,
                    fit.solution.duality_gap,
                    fit.solution.iterations,
                    fit.solution.support.len()
                );
                for (x, c) in fit.expansion.support() {
                    s.push_str(&format!("{x},{c}\n"));
                }
                s
            })
        }
        Command::RegError { common, s, lambdas } => {
            let config = load_config(common.config.as_deref())?;
            let kernel = config.kernel()?;
            let mut spec = config.source()?.clone();
            if let Some(s) = s {
                spec = spec.with_s(s)?;
            }
            let lambdas = parse_list("lambdas", &lambdas)?;
            let count = spec.coefficients().len().max(1);
            let eigs = std::sync::Arc::new(eigensystem_for(&kernel, count, 512.max(4 * count))?);
            let lambda_1 = eigs.eigenvalues()[0];
            let quad = L2Quadrature::default();
            let rows = lambdas
                .iter()
                .map(|&lambda| {
                    let cand = reg_error_candidate_with(&eigs, &spec, lambda, &quad)?;
                    Ok(RegErrorRow {
                        lambda,
                        d_measured: cand.regularization_error(),
                        bound: reg_error_bound(&spec, lambda, lambda_1),
                        truncation: cand.truncation,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let out = RegErrorOutput {
                s: spec.s(),
                lambda_1,
                rows,
            };
            emit(&common, &out, || {
                let mut s = String::from("lambda,d_measured,bound\n");
                for r in &out.rows {
                    s.push_str(&format!("{},{},{}\n", r.lambda, r.d_measured, r.bound));
                }
                s
            })
        }
        Command::Rate {
            common,
            format,
            seed,
        } => {
            let config = load_config(common.config.as_deref())?;
            let mut cfg = config.experiment_config()?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let report = run_rate_experiment(&cfg)?;
            for f in &report.failures {
                eprintln!("trial {} at m = {} failed: {}", f.trial, f.m, f.error);
            }
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
            };
            let mut body = Vec::new();
            write_report(&report, format, &mut body)?;
            write_output(common.out.as_deref(), &body)
        }
        Command::Decompose {
            common,
            data,
            lambda,
            m,
            seed,
        } => {
            let config = load_config(common.config.as_deref())?;
            let mut cfg = config.experiment_config()?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let z = data.as_deref().map(read_data).transpose()?;
            let m = m.or_else(|| cfg.m_grid.last().copied()).unwrap_or(0);
            if z.is_none() && m == 0 {
                return Err(Error::validation(
                    "m",
                    "no sample size given and the m grid is empty",
                ));
            }
            let record = decompose_sample(&cfg, z, m, lambda)?;
            emit(&common, &record, || {
                let d = &record.decomposition;
                format!(
                    "m={} lambda={} excess_risk={}\nsampling={} hypothesis={} regularization={} penalty={}\n",
                    record.m,
                    record.lambda,
                    record.excess_risk,
                    d.sampling,
                    d.hypothesis,
                    d.regularization,
                    d.lambda * d.fit_norm
                )
            })
        }
    }
}
