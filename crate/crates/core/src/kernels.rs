//! Univariate kernels, kernel matrices and cross-evaluation vectors.
//!
//! Matrix convention: the Gram matrix of centers `x` has entry
//! `(j, k) = K(x_k, x_j)`, so row `j` is the row vector `K^x(x_j)` and column
//! `i` is the column vector `K_x(x_i)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LuFactorization, Matrix};

/// Centers closer than this are treated as duplicates.
pub const MIN_CENTER_SEPARATION: f64 = 1e-9;
pub const DEFAULT_CONDITION_LIMIT: f64 = 1e12;
/// Inset used when scanning an open domain.
pub const OPEN_DOMAIN_INSET: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            open: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, open: true }
    }

    pub fn contains(&self, x: f64) -> bool {
        if self.open {
            x > self.lo && x < self.hi
        } else {
            x >= self.lo && x <= self.hi
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Closed interval actually scanned by grid searches.
    pub fn scan_bounds(&self) -> (f64, f64) {
        if self.open {
            (self.lo + OPEN_DOMAIN_INSET, self.hi - OPEN_DOMAIN_INSET)
        } else {
            (self.lo, self.hi)
        }
    }

    /// `n` equispaced points spanning the scan bounds.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (a, b) = self.scan_bounds();
        match n {
            0 => Vec::new(),
            1 => vec![0.5 * (a + b)],
            _ => {
                let h = (b - a) / (n - 1) as f64;
                (0..n)
                    .map(|i| if i + 1 == n { b } else { a + i as f64 * h })
                    .collect()
            }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.open {
            write!(f, "({}, {})", self.lo, self.hi)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    /// `exp(-|s - t|)`
    Exponential,
    /// `min(s, t) - s t` on `(0, 1)`
    BrownianBridge,
    /// `exp(-(s - t)² / w²)`. Fails the admissibility condition; kept as a control.
    Gaussian { width: f64 },
}

/// Hölder data `|K(x,t) - K(x,t')| ≤ constant · |t - t'|^alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lipschitz {
    pub alpha: f64,
    pub constant: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    domain: Interval,
}

/// Config form: `{"id": "...", "width": w?, "domain": [a, b]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub id: KernelId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelId {
    Exponential,
    BrownianBridge,
    Gaussian,
}

impl Kernel {
    pub fn exponential(lo: f64, hi: f64) -> Result<Self> {
        check_bounds(lo, hi)?;
        Ok(Self {
            kind: KernelKind::Exponential,
            domain: Interval::closed(lo, hi),
        })
    }

    /// Brownian bridge on `(lo, hi) ⊆ (0, 1)`; always an open interval.
    pub fn brownian_bridge_on(lo: f64, hi: f64) -> Result<Self> {
        check_bounds(lo, hi)?;
        if lo < 0.0 || hi > 1.0 {
            return Err(Error::validation(
                "kernel.domain",
                format!("brownian bridge needs a sub-interval of (0, 1), got [{lo}, {hi}]"),
            ));
        }
        Ok(Self {
            kind: KernelKind::BrownianBridge,
            domain: Interval::open(lo, hi),
        })
    }

    pub fn brownian_bridge() -> Self {
        Self {
            kind: KernelKind::BrownianBridge,
            domain: Interval::open(0.0, 1.0),
        }
    }

    pub fn gaussian(width: f64, lo: f64, hi: f64) -> Result<Self> {
        check_bounds(lo, hi)?;
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::validation(
                "kernel.width",
                format!("must be positive, got {width}"),
            ));
        }
        Ok(Self {
            kind: KernelKind::Gaussian { width },
            domain: Interval::closed(lo, hi),
        })
    }

    pub fn from_spec(spec: &KernelSpec) -> Result<Self> {
        let [lo, hi] = spec.domain.unwrap_or([0.0, 1.0]);
        match spec.id {
            KernelId::Exponential => Self::exponential(lo, hi),
            KernelId::BrownianBridge => Self::brownian_bridge_on(lo, hi),
            KernelId::Gaussian => {
                let width = spec.width.ok_or_else(|| {
                    Error::validation("kernel.width", "required for the gaussian kernel")
                })?;
                Self::gaussian(width, lo, hi)
            }
        }
    }

    pub fn spec(&self) -> KernelSpec {
        let (id, width) = match self.kind {
            KernelKind::Exponential => (KernelId::Exponential, None),
            KernelKind::BrownianBridge => (KernelId::BrownianBridge, None),
            KernelKind::Gaussian { width } => (KernelId::Gaussian, Some(width)),
        };
        KernelSpec {
            id,
            width,
            domain: Some([self.domain.lo, self.domain.hi]),
        }
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn is_symmetric(&self) -> bool {
        true
    }

    pub fn lipschitz(&self) -> Lipschitz {
        let constant = match self.kind {
            KernelKind::Exponential => 1.0,
            // |∂_t K| is 1 - s or s.
            KernelKind::BrownianBridge => 1.0,
            // max_u |d/du exp(-u²/w²)| = √2 / (w √e)
            KernelKind::Gaussian { width } => 2f64.sqrt() / (width * std::f64::consts::E.sqrt()),
        };
        Lipschitz {
            alpha: 1.0,
            constant,
        }
    }

    /// Closed-form value without the domain check.
    #[inline]
    pub fn value(&self, s: f64, t: f64) -> f64 {
        match self.kind {
            KernelKind::Exponential => (-(s - t).abs()).exp(),
            KernelKind::BrownianBridge => s.min(t) - s * t,
            KernelKind::Gaussian { width } => {
                let u = (s - t) / width;
                (-u * u).exp()
            }
        }
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        self.check_point(s)?;
        self.check_point(t)?;
        Ok(self.value(s, t))
    }

    pub fn check_point(&self, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                point: x,
                domain: self.domain.to_string(),
            })
        }
    }

    /// Points where `K(·, x)` may fail to be smooth.
    pub fn has_diagonal_kink(&self) -> bool {
        !matches!(self.kind, KernelKind::Gaussian { .. })
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            KernelKind::Exponential => write!(f, "exponential on {}", self.domain),
            KernelKind::BrownianBridge => write!(f, "brownian bridge on {}", self.domain),
            KernelKind::Gaussian { width } => {
                write!(f, "gaussian (width {width}) on {}", self.domain)
            }
        }
    }
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(Error::validation(
            "kernel.domain",
            format!("need finite a < b, got [{lo}, {hi}]"),
        ))
    }
}

/// Rejects out-of-domain points and pairs closer than [`MIN_CENTER_SEPARATION`].
pub fn validate_centers(kernel: &Kernel, centers: &[f64]) -> Result<()> {
    for &x in centers {
        if !x.is_finite() {
            return Err(Error::InvalidCenters(format!("non-finite center {x}")));
        }
        kernel.check_point(x)?;
    }
    let mut sorted = centers.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted
        .windows(2)
        .find(|w| w[1] - w[0] < MIN_CENTER_SEPARATION)
    {
        return Err(Error::InvalidCenters(format!(
            "centers {} and {} are closer than {MIN_CENTER_SEPARATION:e}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Kernel matrix of a center sequence together with its LU factorization.
#[derive(Clone, Debug)]
pub struct GramSystem {
    centers: Vec<f64>,
    matrix: Matrix,
    lu: LuFactorization,
    condition_estimate: f64,
}

pub fn gram(kernel: &Kernel, centers: &[f64]) -> Result<GramSystem> {
    gram_with_limit(kernel, centers, DEFAULT_CONDITION_LIMIT)
}

pub fn gram_with_limit(
    kernel: &Kernel,
    centers: &[f64],
    condition_limit: f64,
) -> Result<GramSystem> {
    if centers.is_empty() {
        return Err(Error::InvalidCenters("need at least one center".into()));
    }
    validate_centers(kernel, centers)?;
    let matrix = gram_matrix(kernel, centers);
    let lu = LuFactorization::new(&matrix).map_err(|_| Error::Conditioning {
        estimate: f64::INFINITY,
        limit: condition_limit,
    })?;
    let condition_estimate = matrix.norm_one() * lu.inverse_norm_one_estimate();
    if condition_estimate.is_nan() || condition_estimate > condition_limit {
        return Err(Error::Conditioning {
            estimate: condition_estimate,
            limit: condition_limit,
        });
    }
    Ok(GramSystem {
        centers: centers.to_vec(),
        matrix,
        lu,
        condition_estimate,
    })
}

/// `(j, k) = K(x_k, x_j)` without validation.
pub fn gram_matrix(kernel: &Kernel, centers: &[f64]) -> Matrix {
    Matrix::from_fn(centers.len(), centers.len(), |j, k| {
        kernel.value(centers[k], centers[j])
    })
}

impl GramSystem {
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// `K[x]⁻¹ b`
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.lu.solve(b)
    }

    pub fn lu(&self) -> &LuFactorization {
        &self.lu
    }
}

/// `K_x(t) = (K(t, x_j))_j`, a column vector.
pub fn cross_col(kernel: &Kernel, centers: &[f64], t: f64) -> Result<Vec<f64>> {
    kernel.check_point(t)?;
    Ok(centers.iter().map(|&xj| kernel.value(t, xj)).collect())
}

/// `K^x(t) = (K(x_j, t))_j`, a row vector.
pub fn cross_row(kernel: &Kernel, centers: &[f64], t: f64) -> Result<Vec<f64>> {
    kernel.check_point(t)?;
    Ok(centers.iter().map(|&xj| kernel.value(xj, t)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzAudit {
    pub alpha: f64,
    pub declared_constant: f64,
    /// Largest observed difference quotient on the grid.
    pub empirical_constant: f64,
}

/// Grid scan of `|K(x,t) - K(x,t')| / |t - t'|^α` over all grid triples.
pub fn lipschitz_audit(kernel: &Kernel, grid_size: usize) -> Result<LipschitzAudit> {
    if grid_size < 16 {
        return Err(Error::validation(
            "grid_size",
            format!("must be at least 16, got {grid_size}"),
        ));
    }
    let Lipschitz { alpha, constant } = kernel.lipschitz();
    let grid = kernel.domain().grid(grid_size);
    let mut c_hat: f64 = 0.0;
    for &x in &grid {
        let vals: Vec<f64> = grid.iter().map(|&t| kernel.value(x, t)).collect();
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                let q = (vals[i] - vals[j]).abs() / (grid[j] - grid[i]).powf(alpha);
                c_hat = c_hat.max(q);
            }
        }
    }
    Ok(LipschitzAudit {
        alpha,
        declared_constant: constant,
        empirical_constant: c_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let exp = Kernel::exponential(-5.0, 5.0).unwrap();
        assert_eq!(exp.eval(0.3, 0.3).unwrap(), 1.0);
        assert!((exp.eval(0.0, 1.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        let bb = Kernel::brownian_bridge();
        assert_eq!(bb.eval(0.5, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let bb = Kernel::brownian_bridge();
        assert!(matches!(bb.eval(0.0, 0.5), Err(Error::Domain { .. })));
        assert!(matches!(bb.eval(0.5, 1.0), Err(Error::Domain { .. })));
        let exp = Kernel::exponential(0.0, 1.0).unwrap();
        assert!(exp.eval(1.0, 0.0).is_ok());
        assert!(matches!(exp.eval(1.5, 0.0), Err(Error::Domain { .. })));
        assert!(cross_col(&exp, &[0.5], 2.0).is_err());
    }

    #[test]
    fn brownian_bridge_gram() {
        let g = gram(&Kernel::brownian_bridge(), &[1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let expect = [[2.0 / 9.0, 1.0 / 9.0], [1.0 / 9.0, 2.0 / 9.0]];
        for (j, row) in expect.iter().enumerate() {
            for (k, want) in row.iter().enumerate() {
                assert!((g.matrix()[(j, k)] - want).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn single_center_gram_and_duplicates() {
        let exp = Kernel::exponential(0.0, 1.0).unwrap();
        let g = gram(&exp, &[0.0]).unwrap();
        assert_eq!(g.matrix().as_slice(), &[1.0]);
        assert!(matches!(
            gram(&exp, &[0.1, 0.1]),
            Err(Error::InvalidCenters(_))
        ));
        assert!(matches!(
            gram(&exp, &[0.1, 0.1 + 1e-10]),
            Err(Error::InvalidCenters(_))
        ));
        assert!(matches!(gram(&exp, &[]), Err(Error::InvalidCenters(_))));
    }

    #[test]
    fn ill_conditioned_gram_is_rejected() {
        let gauss = Kernel::gaussian(1.0, 0.0, 1.0).unwrap();
        let centers: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        assert!(matches!(
            gram(&gauss, &centers),
            Err(Error::Conditioning { .. })
        ));
    }

    #[test]
    fn cross_vectors() {
        let bb = Kernel::brownian_bridge();
        assert_eq!(cross_col(&bb, &[0.5], 0.25).unwrap(), vec![0.125]);
        assert_eq!(cross_row(&bb, &[0.5], 0.5).unwrap(), vec![0.25]);
        let exp = Kernel::exponential(0.0, 1.0).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(cross_col(&exp, &[0.0, 1.0], 0.5).unwrap(), vec![e, e]);
        assert_eq!(
            cross_row(&exp, &[0.0, 1.0], 0.0).unwrap(),
            vec![1.0, (-1f64).exp()]
        );
    }

    #[test]
    fn cross_col_at_center_is_gram_column() {
        let exp = Kernel::exponential(0.0, 1.0).unwrap();
        let x = [0.1, 0.35, 0.8];
        let g = gram(&exp, &x).unwrap();
        for (i, &xi) in x.iter().enumerate() {
            assert_eq!(cross_col(&exp, &x, xi).unwrap(), g.matrix().column(i));
            assert_eq!(cross_row(&exp, &x, xi).unwrap(), g.matrix().row(i));
        }
    }

    #[test]
    fn lipschitz_audits() {
        let exp = Kernel::exponential(0.0, 1.0).unwrap();
        let a = lipschitz_audit(&exp, 256).unwrap();
        assert_eq!(a.alpha, 1.0);
        assert!(a.empirical_constant <= 1.0 + 1e-9);
        assert!(a.empirical_constant <= a.declared_constant + 1e-9);

        let bb = Kernel::brownian_bridge();
        let coarse = lipschitz_audit(&bb, 16).unwrap();
        let fine = lipschitz_audit(&bb, 256).unwrap();
        assert!(fine.empirical_constant <= 2.0);
        assert!(fine.empirical_constant <= fine.declared_constant + 1e-9);
        assert!(coarse.empirical_constant <= fine.empirical_constant + 1e-15);

        let gauss = Kernel::gaussian(0.5, 0.0, 1.0).unwrap();
        let g = lipschitz_audit(&gauss, 128).unwrap();
        assert!(g.empirical_constant <= g.declared_constant + 1e-9);
        assert!(lipschitz_audit(&gauss, 15).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec: KernelSpec =
            serde_json::from_str(r#"{"id": "gaussian", "width": 0.5, "domain": [0, 2]}"#).unwrap();
        let k = Kernel::from_spec(&spec).unwrap();
        assert_eq!(k.kind(), KernelKind::Gaussian { width: 0.5 });
        assert_eq!(Kernel::from_spec(&k.spec()).unwrap(), k);
        let missing: KernelSpec = serde_json::from_str(r#"{"id": "gaussian"}"#).unwrap();
        assert!(Kernel::from_spec(&missing).is_err());
        assert!(
            serde_json::from_str::<KernelSpec>(r#"{"id": "exponential", "bogus": 1}"#).is_err()
        );
    }
}
