//! Basis pursuit `min ‖c‖₁ s.t. Ac = y` as a linear program over the split
//! variables `c = c⁺ - c⁻ ≥ 0`, solved by a two-phase dense-tableau simplex
//! with Bland's rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, norm_l1, LuFactorization, Matrix};

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub coefficients: Vec<f64>,
    /// `‖coefficients‖₁`
    pub optimum: f64,
    pub status: LpStatus,
    pub pivots: usize,
}

struct Tableau {
    m: usize,
    width: usize,
    /// `m` rows of `width` columns followed by the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width + 1;
        let p = self.t[r * w + c];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f != 0.0 {
                for (v, pv) in self.t[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.t[i * w + c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule simplex minimizing `cost · x` over the allowed columns.
    fn optimize(&mut self, cost: &[f64], allowed: impl Fn(usize) -> bool) -> Result<()> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::NonConvergence {
                    solver: "simplex",
                    iterations: self.pivots,
                    last_gap: f64::NAN,
                });
            }
            let entering = (0..self.width).find(|&j| {
                if !allowed(j) || self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - (0..self.m)
                        .map(|i| cost[self.basis[i]] * self.at(i, j))
                        .sum::<f64>();
                reduced < -PIVOT_TOL
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, j);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * br.abs().max(1.0);
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Numerical("basis pursuit LP is unbounded".into()));
            };
            self.pivot(r, j);
        }
    }
}

/// `min ‖c‖₁` subject to `A c = y`.
pub fn basis_pursuit_lp(a: &Matrix, y: &[f64]) -> Result<LpSolution> {
    let (m, n) = (a.rows(), a.cols());
    if y.len() != m {
        return Err(Error::validation(
            "y",
            format!("expected {m} values, got {}", y.len()),
        ));
    }
    if n < m {
        return Err(Error::validation(
            "A",
            format!("need at least as many atoms ({n}) as rows ({m})"),
        ));
    }
    // Columns: c⁺ (0..n), c⁻ (n..2n), artificials (2n..2n+m).
    let width = 2 * n + m;
    let mut t = vec![0.0; m * (width + 1)];
    for i in 0..m {
        let sign = if y[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t[i * (width + 1)..(i + 1) * (width + 1)];
        for k in 0..n {
            row[k] = sign * a[(i, k)];
            row[n + k] = -sign * a[(i, k)];
        }
        row[2 * n + i] = 1.0;
        row[width] = sign * y[i];
    }
    let mut tab = Tableau {
        m,
        width,
        t,
        basis: (2 * n..2 * n + m).collect(),
        pivots: 0,
    };

    let is_artificial = |j: usize| j >= 2 * n;
    let phase1: Vec<f64> = (0..width)
        .map(|j| if is_artificial(j) { 1.0 } else { 0.0 })
        .collect();
    tab.optimize(&phase1, |_| true)?;
    let infeasibility: f64 = (0..m)
        .filter(|&i| is_artificial(tab.basis[i]))
        .map(|i| tab.rhs(i))
        .sum();
    let scale = norm_inf(y).max(1.0);
    if infeasibility > 1e-9 * scale {
        return Ok(LpSolution {
            coefficients: vec![0.0; n],
            optimum: f64::NAN,
            status: LpStatus::Infeasible,
            pivots: tab.pivots,
        });
    }
    // Drive zero-level artificials out of the basis where possible.
    for i in 0..m {
        if is_artificial(tab.basis[i]) {
            if let Some(j) =
                (0..2 * n).find(|&j| tab.at(i, j).abs() > 1e-9 && !tab.basis.contains(&j))
            {
                tab.pivot(i, j);
            }
        }
    }

    let phase2: Vec<f64> = (0..width)
        .map(|j| if is_artificial(j) { 0.0 } else { 1.0 })
        .collect();
    tab.optimize(&phase2, |j| !is_artificial(j))?;

    let mut split = vec![0.0; 2 * n];
    for i in 0..m {
        if !is_artificial(tab.basis[i]) {
            split[tab.basis[i]] = tab.rhs(i);
        }
    }
    // Re-solve the final basis directly to shed accumulated pivoting error.
    if tab.basis.iter().all(|&j| !is_artificial(j)) {
        let basis_matrix = Matrix::from_fn(m, m, |i, r| {
            let j = tab.basis[r];
            if j < n {
                a[(i, j)]
            } else {
                -a[(i, j - n)]
            }
        });
        if let Ok(lu) = LuFactorization::new(&basis_matrix) {
            let xb = lu.solve(y);
            if xb.iter().all(|v| *v >= -1e-9 * scale) {
                for (r, &j) in tab.basis.iter().enumerate() {
                    split[j] = xb[r];
                }
            }
        }
    }
    let coefficients: Vec<f64> = (0..n).map(|k| split[k] - split[n + k]).collect();
    Ok(LpSolution {
        optimum: norm_l1(&coefficients),
        coefficients,
        status: LpStatus::Optimal,
        pivots: tab.pivots,
    })
}
