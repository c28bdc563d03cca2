//! Numerical check of the admissibility condition
//! `sup_t ‖K[x]⁻¹ K_x(t)‖₁ ≤ 1`, under which sample-centered expansions are
//! minimal-norm interpolants and regularized fits need no hypothesis error.
//!
//! The supremum is approximated by a uniform grid scan (centers included)
//! followed by golden-section refinement around the grid maximizer. The check
//! is sound up to the grid: the report always carries the grid size.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{self, cross_col, GramSystem, Kernel};
use crate::linalg::{dot, norm_inf, norm_l1};

pub const DEFAULT_GRID: usize = 4096;
pub const ADMISSIBILITY_TOL: f64 = 1e-8;
const REFINE_WIDTH: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub point: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H2Report {
    pub centers: Vec<f64>,
    pub grid_size: usize,
    pub max_value: f64,
    pub argmax: f64,
    pub violations: Vec<Violation>,
    pub admissible: bool,
    pub tolerance: f64,
}

/// Lebesgue function `‖K[x]⁻¹ K_x(t)‖₁` at `t`.
pub fn h2_value(gram: &GramSystem, kernel: &Kernel, t: f64) -> Result<f64> {
    let col = cross_col(kernel, gram.centers(), t)?;
    Ok(norm_l1(&gram.solve(&col)))
}

pub fn check_h2(kernel: &Kernel, centers: &[f64], grid_size: usize) -> Result<H2Report> {
    check_h2_with_tol(kernel, centers, grid_size, ADMISSIBILITY_TOL)
}

pub fn check_h2_with_tol(
    kernel: &Kernel,
    centers: &[f64],
    grid_size: usize,
    tolerance: f64,
) -> Result<H2Report> {
    if grid_size < 64 {
        return Err(Error::validation(
            "grid",
            format!("must be at least 64, got {grid_size}"),
        ));
    }
    let gram = kernels::gram(kernel, centers)?;
    let lebesgue = |t: f64| {
        let col: Vec<f64> = centers.iter().map(|&xj| kernel.value(t, xj)).collect();
        norm_l1(&gram.solve(&col))
    };

    let grid = kernel.domain().grid(grid_size);
    let values: Vec<f64> = grid.par_iter().map(|&t| lebesgue(t)).collect();
    let mut violations: Vec<Violation> = grid
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v > 1.0 + tolerance)
        .map(|(&point, &value)| Violation { point, value })
        .collect();

    let (imax, _) =
        values.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |b, (i, &v)| if v > b.1 { (i, v) } else { b },
        );
    let (refined_t, refined_v) = refine_max(&grid, imax, &lebesgue);
    if refined_v > 1.0 + tolerance && !violations.iter().any(|v| v.point == refined_t) {
        violations.push(Violation {
            point: refined_t,
            value: refined_v,
        });
    }

    let mut best = (refined_t, refined_v);
    for (&t, &v) in grid.iter().zip(&values) {
        if v > best.1 {
            best = (t, v);
        }
    }
    // The value is exactly one at every center.
    for &x in centers {
        let v = lebesgue(x);
        if v > best.1 {
            best = (x, v);
        }
    }

    Ok(H2Report {
        centers: centers.to_vec(),
        grid_size,
        max_value: best.1,
        argmax: best.0,
        admissible: violations.is_empty(),
        violations,
        tolerance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupAttainment {
    /// `sup_t |Σ_j c_j K(t, x_j)|` over the refined grid.
    pub sup_grid: f64,
    pub argmax: f64,
    /// `‖cᵀ K[x]‖_∞`
    pub max_at_centers: f64,
}

/// Compares the sup-norm of `t ↦ cᵀK_x(t)` with its maximum over the centers.
/// The two agree whenever the admissibility condition holds.
pub fn sup_attainment_gap(
    gram: &GramSystem,
    kernel: &Kernel,
    c: &[f64],
    grid_size: usize,
) -> Result<SupAttainment> {
    if grid_size < 64 {
        return Err(Error::validation(
            "grid",
            format!("must be at least 64, got {grid_size}"),
        ));
    }
    if c.len() != gram.len() {
        return Err(Error::validation(
            "c",
            format!("expected {} coefficients, got {}", gram.len(), c.len()),
        ));
    }
    let centers = gram.centers();
    let f = |t: f64| {
        let col: Vec<f64> = centers.iter().map(|&xj| kernel.value(t, xj)).collect();
        dot(c, &col).abs()
    };
    let max_at_centers = norm_inf(&gram.matrix().tr_mul_vec(c));

    let grid = kernel.domain().grid(grid_size);
    let values: Vec<f64> = grid.par_iter().map(|&t| f(t)).collect();
    let (imax, _) =
        values.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |b, (i, &v)| if v > b.1 { (i, v) } else { b },
        );
    let mut best = refine_max(&grid, imax, &f);
    if values[imax] > best.1 {
        best = (grid[imax], values[imax]);
    }
    for &x in centers {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(SupAttainment {
        sup_grid: best.1,
        argmax: best.0,
        max_at_centers,
    })
}

/// Golden-section maximization on the grid cell pair around `grid[i]`.
fn refine_max(grid: &[f64], i: usize, f: &impl Fn(f64) -> f64) -> (f64, f64) {
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    golden_section_max(lo, hi, f)
}

fn golden_section_max(mut a: f64, mut b: f64, f: &impl Fn(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > REFINE_WIDTH {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
