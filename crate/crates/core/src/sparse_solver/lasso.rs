use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm_inf, norm_l1, LuFactorization, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoOptions {
    /// Stop once `gap ≤ gap_tol · max(1, F(0))`.
    pub gap_tol: f64,
    pub max_sweeps: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-10,
            max_sweeps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoSolution {
    pub coefficients: Vec<f64>,
    pub objective: f64,
    pub duality_gap: f64,
    /// Completed coordinate sweeps.
    pub iterations: usize,
    pub support: Vec<usize>,
    /// Objective after each sweep.
    pub objective_trace: Vec<f64>,
}

/// `sign(a) · max(|a| - τ, 0)`; a tie `|a| = τ` gives zero.
pub fn soft_threshold(a: f64, tau: f64) -> f64 {
    if a.abs() <= tau {
        0.0
    } else {
        a.signum() * (a.abs() - tau)
    }
}

/// Smallest λ for which `c = 0` is optimal: `(2/m) ‖Gᵀy‖_∞`.
pub fn lambda_max(g: &Matrix, y: &[f64]) -> f64 {
    let scale = 2.0 / g.rows() as f64;
    (0..g.cols())
        .map(|k| scale * dot(&g.column(k), y).abs())
        .fold(0.0, f64::max)
}

/// `F(c) = (1/m) ‖Gc - y‖² + λ ‖c‖₁`
pub fn lasso_objective(g: &Matrix, y: &[f64], lambda: f64, c: &[f64]) -> f64 {
    let r = residual(g, y, c);
    dot(&r, &r) / g.rows() as f64 + lambda * norm_l1(c)
}

fn residual(g: &Matrix, y: &[f64], c: &[f64]) -> Vec<f64> {
    g.mul_vec(c).iter().zip(y).map(|(gc, yi)| yi - gc).collect()
}

/// Primal objective minus the dual value at the rescaled residual
/// `ν = s (2/m) r`, where `s ≤ 1` makes `‖Gᵀν‖_∞ ≤ λ`.
pub fn lasso_duality_gap(g: &Matrix, y: &[f64], lambda: f64, c: &[f64]) -> f64 {
    let r = residual(g, y, c);
    let gtr = g.tr_mul_vec(&r);
    gap_from_parts(g.rows(), lambda, c, &r, &gtr)
}

/// With `ν = s(2/m) r` the gap expands to
/// `((1-s)²/m)‖r‖² + λ‖c‖₁ - (2s/m) cᵀGᵀr`, which avoids cancelling two
/// nearly equal objective values.
fn gap_from_parts(m: usize, lambda: f64, c: &[f64], r: &[f64], gtr: &[f64]) -> f64 {
    let m = m as f64;
    let dual_norm = 2.0 / m * norm_inf(gtr);
    let s = if dual_norm > lambda {
        lambda / dual_norm
    } else {
        1.0
    };
    let rr = dot(r, r);
    (1.0 - s).powi(2) / m * rr + (lambda * norm_l1(c) - 2.0 * s / m * dot(c, gtr))
}

/// Largest violation of the lasso optimality conditions:
/// `|(2/m) g_kᵀ(y - Gc)| ≤ λ` off the support and `= λ sign(c_k)` on it.
pub fn subgradient_violation(g: &Matrix, y: &[f64], lambda: f64, c: &[f64]) -> f64 {
    let r = residual(g, y, c);
    let scale = 2.0 / g.rows() as f64;
    g.tr_mul_vec(&r)
        .iter()
        .zip(c)
        .map(|(gr, ck)| {
            let corr = scale * gr;
            if *ck == 0.0 {
                (corr.abs() - lambda).max(0.0)
            } else {
                (corr - lambda * ck.signum()).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Moves `c` toward the minimizer of the smooth problem on the current
/// support and sign pattern, stopping where the first coefficient reaches
/// zero. On that segment the objective is a convex quadratic minimized at the
/// far end, so it cannot increase. Repeats on the reduced support until the
/// step is sign-consistent.
fn polish_support(cols: &[Vec<f64>], y: &[f64], tau: f64, c: &mut [f64]) -> bool {
    let mut moved = false;
    loop {
        let support: Vec<usize> = (0..c.len()).filter(|&k| c[k] != 0.0).collect();
        let k = support.len();
        if k == 0 || k > y.len() {
            return moved;
        }
        let normal = Matrix::from_fn(k, k, |i, j| dot(&cols[support[i]], &cols[support[j]]));
        let rhs: Vec<f64> = support
            .iter()
            .map(|&j| dot(&cols[j], y) - tau * c[j].signum())
            .collect();
        let Ok(lu) = LuFactorization::new(&normal) else {
            return moved;
        };
        let target = lu.solve(&rhs);
        if target.iter().any(|v| !v.is_finite()) {
            return moved;
        }
        let mut step = 1.0f64;
        let mut blocking = None;
        for (i, &j) in support.iter().enumerate() {
            if target[i].signum() != c[j].signum() {
                let t = c[j] / (c[j] - target[i]);
                if t < step {
                    step = t;
                    blocking = Some(j);
                }
            }
        }
        for (i, &j) in support.iter().enumerate() {
            c[j] += step * (target[i] - c[j]);
        }
        moved = true;
        match blocking {
            Some(j) => c[j] = 0.0,
            None => return true,
        }
    }
}

/// Cyclic coordinate descent for `min_c (1/m)‖Gc - y‖² + λ‖c‖₁`, with a
/// exact solve on the current support after every sweep.
pub fn lasso_cd(g: &Matrix, y: &[f64], lambda: f64, opts: &LassoOptions) -> Result<LassoSolution> {
    crate::rkbs::check_lambda(lambda)?;
    let (m, n) = (g.rows(), g.cols());
    if y.len() != m {
        return Err(Error::validation(
            "y",
            format!("expected {m} values, got {}", y.len()),
        ));
    }
    if m == 0 {
        return Err(Error::validation("y", "empty problem"));
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|k| g.column(k)).collect();
    let col_sq: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    if let Some(k) = col_sq.iter().position(|&s| s == 0.0) {
        return Err(Error::validation("G", format!("column {k} is zero")));
    }

    let tau = 0.5 * m as f64 * lambda;
    let scale = 2.0 / m as f64;
    let f0 = dot(y, y) / m as f64;
    let target = opts.gap_tol * f0.max(1.0);

    let mut c = vec![0.0; n];
    let mut r = y.to_vec();
    let mut trace = Vec::new();
    let mut gap = f64::INFINITY;

    for sweep in 1..=opts.max_sweeps {
        for k in 0..n {
            let gk = &cols[k];
            let a = dot(gk, &r) + col_sq[k] * c[k];
            // same arithmetic as `lambda_max`, so λ ≥ λ_max leaves c = 0 exactly
            let updated = if scale * a.abs() <= lambda {
                0.0
            } else {
                soft_threshold(a, tau) / col_sq[k]
            };
            let delta = updated - c[k];
            if delta != 0.0 {
                axpy(-delta, gk, &mut r);
                c[k] = updated;
            }
        }
        r = residual(g, y, &c);
        let mut objective = dot(&r, &r) / m as f64 + lambda * norm_l1(&c);
        let mut trial = c.clone();
        if polish_support(&cols, y, tau, &mut trial) {
            let rt = residual(g, y, &trial);
            let ft = dot(&rt, &rt) / m as f64 + lambda * norm_l1(&trial);
            if ft <= objective {
                c = trial;
                r = rt;
                objective = ft;
            }
        }
        trace.push(objective);
        let gtr = g.tr_mul_vec(&r);
        gap = gap_from_parts(m, lambda, &c, &r, &gtr);
        if gap <= target {
            let support = (0..n).filter(|&k| c[k] != 0.0).collect();
            return Ok(LassoSolution {
                coefficients: c,
                objective,
                duality_gap: gap.max(0.0),
                iterations: sweep,
                support,
                objective_trace: trace,
            });
        }
    }
    Err(Error::NonConvergence {
        solver: "lasso coordinate descent",
        iterations: opts.max_sweeps,
        last_gap: gap,
    })
}
