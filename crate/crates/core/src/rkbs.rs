//! Finite kernel expansions `f = Σ_k d_k K(t_k, ·)` with the ℓ¹ norm `‖d‖₁`,
//! minimal-norm interpolation, empirical risks and the
//! sampling/hypothesis/regularization split of the excess risk.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Hypothesis, RealFunction};
use crate::kernels::{self, Kernel, MIN_CENTER_SEPARATION};
use crate::linalg::norm_l1;

/// Expansion on pairwise-distinct centers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteExpansion {
    centers: Vec<f64>,
    coefficients: Vec<f64>,
}

impl DiscreteExpansion {
    pub fn new(centers: Vec<f64>, coefficients: Vec<f64>) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::validation(
                "coefficients",
                format!(
                    "{} centers but {} coefficients",
                    centers.len(),
                    coefficients.len()
                ),
            ));
        }
        if let Some(c) = centers.iter().chain(&coefficients).find(|v| !v.is_finite()) {
            return Err(Error::validation(
                "expansion",
                format!("non-finite entry {c}"),
            ));
        }
        let mut sorted = centers.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted
            .windows(2)
            .any(|w| w[1] - w[0] < MIN_CENTER_SEPARATION)
        {
            return Err(Error::InvalidCenters(
                "expansion centers must be pairwise distinct".into(),
            ));
        }
        Ok(Self {
            centers,
            coefficients,
        })
    }

    /// Builds an expansion from possibly repeated centers, summing the
    /// coefficients of atoms closer than the separation threshold.
    pub fn merged(centers: &[f64], coefficients: &[f64]) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::validation("coefficients", "length mismatch"));
        }
        let mut atoms: Vec<(f64, f64)> = centers
            .iter()
            .copied()
            .zip(coefficients.iter().copied())
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (t, d) in atoms {
            match out.last_mut() {
                Some(last) if t - last.0 < MIN_CENTER_SEPARATION => last.1 += d,
                _ => out.push((t, d)),
            }
        }
        let (c, d) = out.into_iter().unzip();
        Self::new(c, d)
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// `‖d‖₁`
    pub fn b_norm(&self) -> f64 {
        norm_l1(&self.coefficients)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            centers: self.centers.clone(),
            coefficients: self.coefficients.iter().map(|d| alpha * d).collect(),
        }
    }

    /// Atoms with nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.centers
            .iter()
            .copied()
            .zip(self.coefficients.iter().copied())
            .filter(|(_, d)| *d != 0.0)
    }

    pub fn evaluate(&self, kernel: &Kernel, x: f64) -> Result<f64> {
        kernel.check_point(x)?;
        Ok(self.value_unchecked(kernel, x))
    }

    fn value_unchecked(&self, kernel: &Kernel, x: f64) -> f64 {
        self.support().map(|(t, d)| d * kernel.value(t, x)).sum()
    }

    pub fn bind<'a>(&'a self, kernel: &'a Kernel) -> BoundExpansion<'a> {
        BoundExpansion {
            expansion: self,
            kernel,
        }
    }
}

/// An expansion paired with its kernel, usable wherever a function is needed.
#[derive(Clone, Copy, Debug)]
pub struct BoundExpansion<'a> {
    pub expansion: &'a DiscreteExpansion,
    pub kernel: &'a Kernel,
}

impl RealFunction for BoundExpansion<'_> {
    fn value(&self, x: f64) -> f64 {
        self.expansion.value_unchecked(self.kernel, x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        if self.kernel.has_diagonal_kink() {
            self.expansion.support().map(|(t, _)| t).collect()
        } else {
            Vec::new()
        }
    }
}

impl Hypothesis for BoundExpansion<'_> {
    fn b_norm(&self) -> f64 {
        self.expansion.b_norm()
    }
}

/// Observations `(x_j, y_j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    points: Vec<f64>,
    outputs: Vec<f64>,
}

impl SampleSet {
    pub fn new(points: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        if points.len() != outputs.len() {
            return Err(Error::validation(
                "sample",
                format!("{} points but {} outputs", points.len(), outputs.len()),
            ));
        }
        if points.is_empty() {
            return Err(Error::validation("sample", "need at least one observation"));
        }
        if let Some(v) = points.iter().chain(&outputs).find(|v| !v.is_finite()) {
            return Err(Error::validation("sample", format!("non-finite value {v}")));
        }
        Ok(Self { points, outputs })
    }

    /// Rejects outputs with `|y| > bound`.
    pub fn with_output_bound(self, bound: f64) -> Result<Self> {
        if let Some(y) = self.outputs.iter().find(|y| y.abs() > bound) {
            return Err(Error::validation(
                "sample.outputs",
                format!("|{y}| exceeds bound {bound}"),
            ));
        }
        Ok(self)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.outputs.iter().copied())
    }

    /// Largest `|y_j|`.
    pub fn output_sup(&self) -> f64 {
        self.outputs.iter().fold(0.0, |a, y| a.max(y.abs()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interpolant {
    pub expansion: DiscreteExpansion,
    pub norm: f64,
}

/// `f₀ = K^x(·) K[x]⁻¹ y`. Of minimal norm among all interpolants when the
/// kernel is admissible on `x`.
pub fn min_norm_interpolant(
    kernel: &Kernel,
    centers: &[f64],
    values: &[f64],
) -> Result<Interpolant> {
    if centers.len() != values.len() {
        return Err(Error::validation(
            "values",
            format!("{} centers but {} values", centers.len(), values.len()),
        ));
    }
    let gram = kernels::gram(kernel, centers)?;
    let coefficients = gram.solve(values);
    let expansion = DiscreteExpansion::new(centers.to_vec(), coefficients)?;
    let norm = expansion.b_norm();
    Ok(Interpolant { expansion, norm })
}

/// `(1/m) Σ_j (f(x_j) - y_j)²`
pub fn empirical_risk(f: &(impl RealFunction + ?Sized), z: &SampleSet) -> f64 {
    let m = z.len() as f64;
    z.iter().map(|(x, y)| (f.value(x) - y).powi(2)).sum::<f64>() / m
}

/// `E_z(f) + λ ‖f‖_B`
pub fn regularized_objective(
    f: &DiscreteExpansion,
    kernel: &Kernel,
    z: &SampleSet,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(empirical_risk(&f.bind(kernel), z) + lambda * f.b_norm())
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            "lambda",
            format!("must be positive and finite, got {lambda}"),
        ))
    }
}

/// The three error terms for one fitted function and one comparison function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDecomposition {
    /// Sampling error `E(f) - E_z(f) + E_z(g) - E(g)`.
    pub sampling: f64,
    /// Hypothesis error; non-positive when `f` minimizes the regularized risk.
    pub hypothesis: f64,
    /// Regularization error `E(g) - E(f_ρ) + λ ‖g‖_B`.
    pub regularization: f64,
    /// `E(f) - E(f_ρ)` from the risk oracle.
    pub excess_risk: f64,
    pub lambda: f64,
    pub fit_norm: f64,
    pub comparison_norm: f64,
}

impl ErrorDecomposition {
    /// `S + P + D - λ‖f‖_B`, which must reproduce the excess risk.
    pub fn recombined(&self) -> f64 {
        self.sampling + self.hypothesis + self.regularization - self.lambda * self.fit_norm
    }

    pub fn identity_residual(&self) -> f64 {
        (self.recombined() - self.excess_risk).abs()
    }
}

/// `excess_risk` must return `E(h) - E(f_ρ)` for any function `h`.
pub fn error_decomposition(
    fit: &dyn Hypothesis,
    comparison: &dyn Hypothesis,
    z: &SampleSet,
    lambda: f64,
    excess_risk: &dyn Fn(&dyn RealFunction) -> f64,
) -> Result<ErrorDecomposition> {
    check_lambda(lambda)?;
    let fit_excess = excess_risk(fit);
    let cmp_excess = excess_risk(comparison);
    let emp_fit = empirical_risk(fit, z);
    let emp_cmp = empirical_risk(comparison, z);
    let fit_norm = fit.b_norm();
    let comparison_norm = comparison.b_norm();
    Ok(ErrorDecomposition {
        sampling: (fit_excess - emp_fit) + (emp_cmp - cmp_excess),
        hypothesis: (emp_fit + lambda * fit_norm) - (emp_cmp + lambda * comparison_norm),
        regularization: cmp_excess + lambda * comparison_norm,
        excess_risk: fit_excess,
        lambda,
        fit_norm,
        comparison_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Zero;

    fn bb() -> Kernel {
        Kernel::brownian_bridge()
    }

    #[test]
    fn evaluation_and_norm() {
        let empty = DiscreteExpansion::zero();
        assert_eq!(empty.evaluate(&bb(), 0.3).unwrap(), 0.0);
        assert_eq!(empty.b_norm(), 0.0);
        let atom = DiscreteExpansion::new(vec![0.5], vec![2.0]).unwrap();
        assert_eq!(atom.evaluate(&bb(), 0.5).unwrap(), 0.5);
        assert!(atom.evaluate(&bb(), 1.5).is_err());
        let f = DiscreteExpansion::new(vec![0.1, 0.2, 0.3], vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(f.b_norm(), 3.5);
    }

    #[test]
    fn duplicate_centers_rejected_or_merged() {
        assert!(matches!(
            DiscreteExpansion::new(vec![0.2, 0.2], vec![1.0, 1.0]),
            Err(Error::InvalidCenters(_))
        ));
        let m = DiscreteExpansion::merged(&[0.2, 0.7, 0.2 + 1e-12], &[1.0, 3.0, -0.25]).unwrap();
        assert_eq!(m.centers(), &[0.2, 0.7]);
        assert_eq!(m.coefficients(), &[0.75, 3.0]);
    }

    #[test]
    fn interpolant_special_cases() {
        let k = Kernel::exponential(0.0, 1.0).unwrap();
        let x = [0.1, 0.45, 0.9];
        let zero = min_norm_interpolant(&k, &x, &[0.0; 3]).unwrap();
        assert!(zero.expansion.coefficients().iter().all(|c| *c == 0.0));
        assert_eq!(zero.norm, 0.0);

        let g = kernels::gram(&k, &x).unwrap();
        let col = g.matrix().column(1);
        let unit = min_norm_interpolant(&k, &x, &col).unwrap();
        assert!((unit.norm - 1.0).abs() < 1e-12);
        assert!((unit.expansion.coefficients()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolates_the_data() {
        let k = bb();
        let x = [0.05, 0.3, 0.31, 0.77];
        let y = [1.0, -0.5, 0.2, 3.0];
        let f = min_norm_interpolant(&k, &x, &y).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((f.expansion.evaluate(&k, *xi).unwrap() - yi).abs() <= 1e-8 * 3.0);
        }
        let z = SampleSet::new(x.to_vec(), y.to_vec()).unwrap();
        assert!(empirical_risk(&f.expansion.bind(&k), &z) < 1e-20);
    }

    #[test]
    fn risks() {
        let z = SampleSet::new(vec![0.2, 0.6], vec![1.0, 1.0]).unwrap();
        assert_eq!(empirical_risk(&Zero, &z), 1.0);
        let obj = regularized_objective(&DiscreteExpansion::zero(), &bb(), &z, 0.3).unwrap();
        assert_eq!(obj, 1.0);
        assert!(regularized_objective(&DiscreteExpansion::zero(), &bb(), &z, 0.0).is_err());
        assert!(regularized_objective(&DiscreteExpansion::zero(), &bb(), &z, -1.0).is_err());
    }

    #[test]
    fn output_bound() {
        let z = SampleSet::new(vec![0.2], vec![1.5]).unwrap();
        assert!(z.clone().with_output_bound(2.0).is_ok());
        assert!(z.with_output_bound(1.0).is_err());
        assert!(SampleSet::new(vec![], vec![]).is_err());
    }

    #[test]
    fn decomposition_with_identical_functions() {
        let k = bb();
        let f = DiscreteExpansion::new(vec![0.3, 0.6], vec![1.0, -0.5]).unwrap();
        let z = SampleSet::new(vec![0.1, 0.5, 0.9], vec![0.2, -0.1, 0.05]).unwrap();
        let risk = |h: &dyn RealFunction| {
            crate::quadrature::GaussLegendre::new(20)
                .composite(0.0, 1.0, 40, |x| h.value(x).powi(2))
        };
        let bound = f.bind(&k);
        let d = error_decomposition(&bound, &bound, &z, 0.1, &risk).unwrap();
        assert_eq!(d.sampling, 0.0);
        assert_eq!(d.hypothesis, 0.0);
        assert!(d.identity_residual() <= 1e-15);
    }
}
