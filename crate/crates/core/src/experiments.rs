//! Seeded Monte Carlo learning-rate experiments.
//!
//! For every sample size `m` the harness draws `trials` bounded-noise samples
//! from a source-condition regression function, fits the ℓ¹-regularized
//! regressor at `λ(m) = m^{-θ}`, measures the excess risk as an `L²(ρ)`
//! distance, and logs the sampling/hypothesis/regularization split against
//! the regularization-error candidate. Trials are independent and may run in
//! any order; all randomness is keyed by `(seed, trial, draw index)`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Hypothesis, RealFunction};
use crate::kernels::{Interval, Kernel, KernelSpec};
use crate::rkbs::{empirical_risk, error_decomposition, ErrorDecomposition, SampleSet};
use crate::rng::CounterRng;
use crate::sparse_solver::{fit_regressor_with, LassoOptions};
use crate::spectral::{
    eigensystem_for, l2_rho_distance_sq, reg_error_candidate_with, source_function, EigenExpansion,
    EigenSystem, L2Quadrature, SourceSpec,
};

/// Absolute duality-gap target for every lasso solve in an experiment.
pub const TRIAL_GAP_TOL: f64 = 1e-10;
/// Largest tolerated fraction of failed trials at any sample size.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

fn default_nystrom_nodes() -> usize {
    512
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub source: SourceSpec,
    /// Noise is uniform on `[-sigma, sigma]`.
    pub sigma: f64,
    /// `M`; defaults to `sup|f_ρ| + sigma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_bound: Option<f64>,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    /// Covering exponent; defaults to the interval's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Lipschitz exponent; defaults to the kernel's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub seed: u64,
    #[serde(default = "default_nystrom_nodes")]
    pub nystrom_nodes: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringExponent {
    pub eta: f64,
    pub constant: f64,
}

/// `N(X, r) ≤ ⌈L/(2r)⌉ ≤ (L/2 + 1)/r` for `r ≤ 1`.
pub fn covering_exponent(domain: Interval) -> CoveringExponent {
    CoveringExponent {
        eta: 1.0,
        constant: domain.length() / 2.0 + 1.0,
    }
}

/// `θ = ½ · 1/(1 + η/α) · (1+s)/(1+2s)`, with `s` capped at one.
pub fn schedule_exponent(s: f64, eta: f64, alpha: f64) -> f64 {
    let s = s.min(1.0);
    0.5 / (1.0 + eta / alpha) * (1.0 + s) / (1.0 + 2.0 * s)
}

pub fn lambda_schedule(m: usize, s: f64, eta: f64, alpha: f64) -> f64 {
    (m as f64).powf(-schedule_exponent(s, eta, alpha))
}

/// Exponent `γ` of the guaranteed rate `m^{-γ}`.
pub fn theoretical_exponent(s: f64, eta: f64, alpha: f64) -> f64 {
    let cover = 1.0 / (1.0 + eta / alpha);
    if s < 1.0 {
        s / (1.0 + 2.0 * s) * cover
    } else {
        cover / 3.0
    }
}

/// `x_j` uniform on the domain, `y_j = f_ρ(x_j) + ε_j` with `ε_j` uniform on
/// `[-sigma, sigma]`.
pub fn generate_sample(
    f_rho: &dyn RealFunction,
    domain: Interval,
    m: usize,
    sigma: f64,
    seed: u64,
    trial: u64,
) -> Result<SampleSet> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::validation(
            "sigma",
            format!("must be non-negative, got {sigma}"),
        ));
    }
    let rng = CounterRng::new(seed, trial);
    let mut points = Vec::with_capacity(m);
    let mut outputs = Vec::with_capacity(m);
    for j in 0..m as u64 {
        let x = rng.uniform_in(2 * j, domain.lo, domain.hi);
        let noise = if sigma > 0.0 {
            rng.uniform_in(2 * j + 1, -sigma, sigma)
        } else {
            0.0
        };
        points.push(x);
        outputs.push(f_rho.value(x) + noise);
    }
    SampleSet::new(points, outputs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub m: usize,
    pub trial: u64,
    pub lambda: f64,
    pub excess_risk: f64,
    pub decomposition: ErrorDecomposition,
    pub s1: f64,
    pub s2: f64,
    pub duality_gap: f64,
    pub sweeps: usize,
    pub support_size: usize,
    pub quadrature_converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub m: usize,
    pub trial: u64,
    pub error: String,
}

/// Per-sample-size summary; also the CSV row layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub m: usize,
    pub lambda: f64,
    pub mean_excess: f64,
    pub median_excess: f64,
    pub q10: f64,
    pub q90: f64,
    #[serde(rename = "S1")]
    pub s1: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub failures: usize,
}

const CSV_HEADER: [&str; 10] = [
    "m",
    "lambda",
    "mean_excess",
    "median_excess",
    "q10",
    "q90",
    "S1",
    "S2",
    "D",
    "failures",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub records: Vec<RateRecord>,
    /// Least-squares slope of `ln(mean excess)` against `ln m`.
    pub fitted_slope: Option<f64>,
    pub gamma_theory: f64,
    pub theta: f64,
    pub eta: f64,
    pub alpha: f64,
    pub output_bound: f64,
    pub trials: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Everything an experiment derives from its configuration before sampling.
pub struct ExperimentModel {
    pub kernel: Kernel,
    pub eigs: Arc<EigenSystem>,
    pub f_rho: EigenExpansion,
    pub output_bound: f64,
    pub eta: f64,
    pub alpha: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::validation(
                "sigma",
                format!("must be non-negative, got {}", self.sigma),
            ));
        }
        if self.trials == 0 {
            return Err(Error::validation("trials", "must be at least 1"));
        }
        if self.m_grid.contains(&0) {
            return Err(Error::validation("m_grid", "sample sizes must be positive"));
        }
        if self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("m_grid", "must be strictly increasing"));
        }
        for (name, v) in [
            ("eta", self.eta),
            ("alpha", self.alpha),
            ("output_bound", self.output_bound),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::validation(
                        name,
                        format!("must be positive, got {v}"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<ExperimentModel> {
        self.validate()?;
        let kernel = Kernel::from_spec(&self.kernel)?;
        let count = self.source.coefficients().len().max(1);
        let eigs = Arc::new(eigensystem_for(
            &kernel,
            count,
            self.nystrom_nodes.max(4 * count),
        )?);
        let f_rho = source_function(&eigs, &self.source)?;
        let sup = kernel
            .domain()
            .grid(4096)
            .iter()
            .fold(0.0f64, |acc, &x| acc.max(f_rho.value(x).abs()));
        let needed = sup + self.sigma;
        let output_bound = match self.output_bound {
            Some(m) if m < needed => {
                return Err(Error::validation(
                    "output_bound",
                    format!("{m} is below sup|f_rho| + sigma = {needed}"),
                ))
            }
            Some(m) => m,
            None => needed,
        };
        Ok(ExperimentModel {
            eta: self
                .eta
                .unwrap_or_else(|| covering_exponent(kernel.domain()).eta),
            alpha: self.alpha.unwrap_or_else(|| kernel.lipschitz().alpha),
            kernel,
            eigs,
            f_rho,
            output_bound,
        })
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Least-squares slope of `y` on `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run_rate_experiment(cfg: &ExperimentConfig) -> Result<RateReport> {
    let model = cfg.build_model()?;
    let s = cfg.source.s();
    let theta = schedule_exponent(s, model.eta, model.alpha);
    let quad = L2Quadrature::default();
    let domain = model.kernel.domain();

    let mut records = Vec::with_capacity(cfg.m_grid.len());
    let mut trials = Vec::new();
    let mut failures = Vec::new();

    for &m in &cfg.m_grid {
        let lambda = lambda_schedule(m, s, model.eta, model.alpha);
        let candidate = reg_error_candidate_with(&model.eigs, &cfg.source, lambda, &quad)?;
        let g = candidate.comparison();
        let excess = |h: &dyn RealFunction| l2_rho_distance_sq(h, &model.f_rho, domain, &quad);
        let g_excess = excess(g.as_real()).value;

        let outcomes: Vec<std::result::Result<TrialRecord, TrialFailure>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                run_trial(&model, cfg, m, trial, lambda, g, g_excess, &quad).map_err(|e| {
                    TrialFailure {
                        m,
                        trial,
                        error: e.to_string(),
                    }
                })
            })
            .collect();

        let mut ok = Vec::new();
        let mut failed = 0;
        for o in outcomes {
            match o {
                Ok(r) => ok.push(r),
                Err(f) => {
                    failed += 1;
                    failures.push(f);
                }
            }
        }
        if failed as f64 > MAX_FAILURE_FRACTION * cfg.trials as f64 {
            return Err(Error::Experiment(format!(
                "{failed} of {} trials failed at m = {m}",
                cfg.trials
            )));
        }
        let n_ok = ok.len() as f64;
        let mut sorted: Vec<f64> = ok.iter().map(|r| r.excess_risk).collect();
        let mean_excess = sorted.iter().sum::<f64>() / n_ok;
        sorted.sort_by(f64::total_cmp);
        records.push(RateRecord {
            m,
            lambda,
            mean_excess,
            median_excess: quantile(&sorted, 0.5),
            q10: quantile(&sorted, 0.1),
            q90: quantile(&sorted, 0.9),
            s1: ok.iter().map(|r| r.s1).sum::<f64>() / n_ok,
            s2: ok.iter().map(|r| r.s2).sum::<f64>() / n_ok,
            d: candidate.regularization_error(),
            failures: failed,
        });
        trials.extend(ok);
    }

    let (lx, ly): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| r.mean_excess > 0.0)
        .map(|r| ((r.m as f64).ln(), r.mean_excess.ln()))
        .unzip();
    Ok(RateReport {
        fitted_slope: fit_slope(&lx, &ly),
        gamma_theory: theoretical_exponent(s, model.eta, model.alpha),
        theta,
        eta: model.eta,
        alpha: model.alpha,
        output_bound: model.output_bound,
        records,
        trials,
        failures,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    model: &ExperimentModel,
    cfg: &ExperimentConfig,
    m: usize,
    trial: u64,
    lambda: f64,
    g: &dyn Hypothesis,
    g_excess: f64,
    quad: &L2Quadrature,
) -> Result<TrialRecord> {
    let z = generate_sample(
        &model.f_rho,
        model.kernel.domain(),
        m,
        cfg.sigma,
        cfg.seed,
        trial,
    )?
    .with_output_bound(model.output_bound)?;
    analyze_sample(model, &z, trial, lambda, g, g_excess, quad)
}

fn analyze_sample(
    model: &ExperimentModel,
    z: &SampleSet,
    trial: u64,
    lambda: f64,
    g: &dyn Hypothesis,
    g_excess: f64,
    quad: &L2Quadrature,
) -> Result<TrialRecord> {
    let domain = model.kernel.domain();
    let m = z.len();
    let f0 = z.outputs().iter().map(|y| y * y).sum::<f64>() / m as f64;
    let opts = LassoOptions {
        gap_tol: TRIAL_GAP_TOL / f0.max(1.0),
        ..LassoOptions::default()
    };
    let fit = fit_regressor_with(&model.kernel, z, lambda, &opts)?;
    let f = fit.expansion.bind(&model.kernel);
    let estimate = l2_rho_distance_sq(&f, &model.f_rho, domain, quad);

    let oracle = |h: &dyn RealFunction| -> f64 {
        if std::ptr::addr_eq(h, g.as_real()) {
            g_excess
        } else {
            l2_rho_distance_sq(h, &model.f_rho, domain, quad).value
        }
    };
    let decomposition = error_decomposition(&f, g, z, lambda, &oracle)?;

    let emp_rho = empirical_risk(&model.f_rho, z);
    let emp_g = empirical_risk(g.as_real(), z);
    let emp_f = empirical_risk(&f, z);
    Ok(TrialRecord {
        m,
        trial,
        lambda,
        excess_risk: estimate.value,
        s1: (emp_g - emp_rho) - g_excess,
        s2: estimate.value - (emp_f - emp_rho),
        decomposition,
        duality_gap: fit.solution.duality_gap,
        sweeps: fit.solution.iterations,
        support_size: fit.solution.support.len(),
        quadrature_converged: estimate.converged,
    })
}

/// Fits one sample at `lambda` and splits its excess risk against the
/// regularization-error candidate of the configured source. When `z` is
/// `None` a sample of size `m` is drawn as trial 0.
pub fn decompose_sample(
    cfg: &ExperimentConfig,
    z: Option<SampleSet>,
    m: usize,
    lambda: Option<f64>,
) -> Result<TrialRecord> {
    let model = cfg.build_model()?;
    let z = match z {
        Some(z) => z,
        None => generate_sample(
            &model.f_rho,
            model.kernel.domain(),
            m,
            cfg.sigma,
            cfg.seed,
            0,
        )?
        .with_output_bound(model.output_bound)?,
    };
    let lambda =
        lambda.unwrap_or_else(|| lambda_schedule(z.len(), cfg.source.s(), model.eta, model.alpha));
    let quad = L2Quadrature::default();
    let candidate = reg_error_candidate_with(&model.eigs, &cfg.source, lambda.min(1.0), &quad)?;
    let g = candidate.comparison();
    let g_excess =
        l2_rho_distance_sq(g.as_real(), &model.f_rho, model.kernel.domain(), &quad).value;
    analyze_sample(&model, &z, 0, lambda, g, g_excess, &quad)
}

trait AsReal {
    fn as_real(&self) -> &dyn RealFunction;
}

impl AsReal for dyn Hypothesis + '_ {
    fn as_real(&self) -> &dyn RealFunction {
        self
    }
}

pub fn emit_report(report: &RateReport, format: ReportFormat, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    write_report(report, format, &mut out)?;
    out.flush().map_err(io_err)
}

pub fn write_report(report: &RateReport, format: ReportFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report).map_err(|source| Error::Json {
                context: "writing rate report".into(),
                source,
            })?;
            writeln!(out).map_err(|source| Error::Io {
                path: "<report>".into(),
                source,
            })
        }
        ReportFormat::Csv => {
            let csv_err = |source| Error::Csv {
                context: "writing rate report".into(),
                source,
            };
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(out);
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for r in &report.records {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush().map_err(|source| Error::Io {
                path: "<report>".into(),
                source,
            })
        }
    }
}

pub fn read_report_csv(path: &Path) -> Result<Vec<RateRecord>> {
    let csv_err = |source| Error::Csv {
        context: path.display().to_string(),
        source,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err)?;
    rdr.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn read_report_json(path: &Path) -> Result<RateReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelId;

    #[test]
    fn schedule_values() {
        assert!((schedule_exponent(1.0, 1.0, 1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((lambda_schedule(64, 1.0, 1.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((schedule_exponent(0.5, 1.0, 1.0) - 3.0 / 16.0).abs() < 1e-15);
        assert_eq!(
            schedule_exponent(2.0, 1.0, 1.0),
            schedule_exponent(1.0, 1.0, 1.0)
        );
        let grid = [1, 2, 10, 100, 1000, 4096];
        assert!(grid
            .windows(2)
            .all(|w| lambda_schedule(w[1], 0.3, 1.0, 0.5) < lambda_schedule(w[0], 0.3, 1.0, 0.5)));
        assert!((theoretical_exponent(1.0, 1.0, 1.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    /// Greedy cover of `[0, L]` by open intervals of radius `r`.
    fn greedy_cover(length: f64, r: f64) -> usize {
        let mut covered = -f64::MIN_POSITIVE;
        let mut count = 0;
        while covered < length {
            // an open ball centered at covered + r reaches strictly below covered + 2r
            count += 1;
            covered += 2.0 * r;
            if covered == length {
                count += 1;
                break;
            }
        }
        count
    }

    #[test]
    fn covering_constants() {
        for (len, want) in [(1.0, 1.5), (2.0, 2.0)] {
            let c = covering_exponent(Interval::closed(0.0, len));
            assert_eq!(c.eta, 1.0);
            assert_eq!(c.constant, want);
            for k in 0..12 {
                let r = 0.5f64.powi(k);
                assert!(
                    greedy_cover(len, r) as f64 <= c.constant / r,
                    "L = {len}, r = {r}"
                );
            }
            assert!(greedy_cover(len, 1.0) as f64 <= c.constant);
        }
    }

    fn config(sigma: f64) -> ExperimentConfig {
        ExperimentConfig {
            kernel: KernelSpec {
                id: KernelId::BrownianBridge,
                width: None,
                domain: None,
            },
            source: SourceSpec::new(1.0, vec![20.0, 5.0]).unwrap(),
            sigma,
            output_bound: None,
            m_grid: vec![16, 32],
            trials: 2,
            eta: None,
            alpha: None,
            seed: 11,
            nystrom_nodes: 512,
        }
    }

    #[test]
    fn noiseless_sample_is_exact_and_reproducible() {
        let model = config(0.0).build_model().unwrap();
        let z = generate_sample(&model.f_rho, model.kernel.domain(), 50, 0.0, 3, 1).unwrap();
        for (x, y) in z.iter() {
            assert_eq!(y, model.f_rho.value(x));
        }
        let again = generate_sample(&model.f_rho, model.kernel.domain(), 50, 0.0, 3, 1).unwrap();
        assert_eq!(z, again);
    }

    #[test]
    fn noise_is_centered() {
        let zero = |_: f64| 0.0;
        let z = generate_sample(&zero, Interval::open(0.0, 1.0), 10_000, 0.1, 5, 0).unwrap();
        let mean = z.outputs().iter().sum::<f64>() / 1e4;
        assert!(mean.abs() <= 0.004, "{mean}");
        assert!(z.output_sup() <= 0.1);
    }

    #[test]
    fn config_validation() {
        let mut c = config(0.1);
        c.m_grid = vec![32, 16];
        assert!(c.validate().is_err());
        let mut c = config(0.1);
        c.output_bound = Some(1e-3);
        assert!(c.build_model().is_err());
        let mut c = config(-0.1);
        c.m_grid = vec![8];
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_experiment_runs() {
        let report = run_rate_experiment(&config(0.05)).unwrap();
        assert_eq!(report.records.len(), 2);
        assert_eq!(report.trials.len(), 4);
        assert!(report.records.iter().all(|r| r.mean_excess >= -1e-12));
        assert!(report.fitted_slope.is_some());
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert!((quantile(&v, 0.1) - 1.4).abs() < 1e-15);
        assert_eq!(fit_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]), Some(2.0));
        assert_eq!(fit_slope(&[1.0], &[1.0]), None);
    }
}
