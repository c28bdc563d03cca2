//! JSON configuration shared by the command-line workflows.
//!
//! ```json
//! {
//!   "kernel": {"id": "brownian_bridge"},
//!   "source": {"s": 1.0, "coefficients": [30.0]},
//!   "experiment": {"sigma": 0.1, "m_grid": [64, 128], "trials": 4, "seed": 7},
//!   "tolerances": {"gap_tol": 1e-10}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::admissibility::ADMISSIBILITY_TOL;
use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::kernels::{Kernel, KernelSpec};
use crate::sparse_solver::LassoOptions;
use crate::spectral::SourceSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub kernel: KernelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// The experiment fields other than the kernel and source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentBlock {
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_bound: Option<f64>,
    pub m_grid: Vec<usize>,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nystrom_nodes: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admissibility_tol: Option<f64>,
}

fn check_finite(value: &serde_json::Value, path: &str) -> Result<()> {
    match value {
        serde_json::Value::Number(n) => match n.as_f64() {
            Some(v) if v.is_finite() => Ok(()),
            _ => Err(Error::validation(path, "number is not finite")),
        },
        serde_json::Value::Array(items) => items
            .iter()
            .enumerate()
            .try_for_each(|(i, v)| check_finite(v, &format!("{path}[{i}]"))),
        serde_json::Value::Object(map) => map.iter().try_for_each(|(k, v)| {
            let sub = if path.is_empty() {
                k.clone()
            } else {
                format!("{path}.{k}")
            };
            check_finite(v, &sub)
        }),
        _ => Ok(()),
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let json_err = |source| Error::Json {
            context: "config".into(),
            source,
        };
        let raw: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
        check_finite(&raw, "")?;
        let config: Config = serde_json::from_value(raw).map_err(json_err)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                context: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        Kernel::from_spec(&self.kernel)?;
        if let Some(t) = &self.tolerances {
            for (name, v) in [
                ("tolerances.gap_tol", t.gap_tol),
                ("tolerances.admissibility_tol", t.admissibility_tol),
            ] {
                if let Some(v) = v {
                    if v.is_nan() || v <= 0.0 {
                        return Err(Error::validation(
                            name,
                            format!("must be positive, got {v}"),
                        ));
                    }
                }
            }
            if t.max_sweeps == Some(0) {
                return Err(Error::validation(
                    "tolerances.max_sweeps",
                    "must be at least 1",
                ));
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<Kernel> {
        Kernel::from_spec(&self.kernel)
    }

    pub fn source(&self) -> Result<&SourceSpec> {
        self.source
            .as_ref()
            .ok_or_else(|| Error::validation("source", "this command needs a source block"))
    }

    pub fn lasso_options(&self) -> LassoOptions {
        let defaults = LassoOptions::default();
        let t = self.tolerances.unwrap_or_default();
        LassoOptions {
            gap_tol: t.gap_tol.unwrap_or(defaults.gap_tol),
            max_sweeps: t.max_sweeps.unwrap_or(defaults.max_sweeps),
        }
    }

    pub fn admissibility_tol(&self) -> f64 {
        self.tolerances
            .and_then(|t| t.admissibility_tol)
            .unwrap_or(ADMISSIBILITY_TOL)
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let block = self.experiment.as_ref().ok_or_else(|| {
            Error::validation("experiment", "this command needs an experiment block")
        })?;
        let cfg = ExperimentConfig {
            kernel: self.kernel.clone(),
            source: self.source()?.clone(),
            sigma: block.sigma,
            output_bound: block.output_bound,
            m_grid: block.m_grid.clone(),
            trials: block.trials,
            eta: block.eta,
            alpha: block.alpha,
            seed: block.seed,
            nystrom_nodes: block.nystrom_nodes.unwrap_or(512),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
