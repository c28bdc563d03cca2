//! Mercer eigen-machinery for the integral operator
//! `L_K f = ∫ K(t, ·) f(t) dρ_X(t)` with `ρ_X` uniform on the kernel domain.
//!
//! Brownian bridge eigenpairs on `(0, 1)` are analytic. Other kernels are
//! discretized on a Gauss–Legendre rule (Nyström). The diagonal kink of the
//! exponential and Brownian bridge kernels is handled by singularity
//! subtraction: the row integral `∫ K(t_i, s) dρ(s)` is computed accurately
//! and the quadrature's error on it is moved onto the diagonal, which keeps the
//! discretized operator symmetric in the weighted inner product.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{Hypothesis, RealFunction, Zero};
use crate::kernels::{Interval, Kernel, KernelKind};
use crate::linalg::{jacobi_eigen, Matrix};
use crate::quadrature::{segments, GaussLegendre};

pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EigenSource {
    Analytic,
    Nystrom { quadrature_size: usize },
}

#[derive(Clone, Debug)]
enum Basis {
    /// `φ_j(x) = √2 sin(jπx)`
    BrownianBridge,
    Nystrom {
        nodes: Vec<f64>,
        /// Probability weights (sum to one).
        weights: Vec<f64>,
        /// `values[j][i] = φ_j(nodes[i])`
        values: Vec<Vec<f64>>,
    },
}

/// Leading eigenpairs of `L_K`, eigenvalues non-increasing, eigenfunctions
/// orthonormal in `L²(ρ_X)`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    kernel: Kernel,
    eigenvalues: Vec<f64>,
    basis: Basis,
    source: EigenSource,
}

pub fn brownian_bridge_eigs(count: usize) -> Result<EigenSystem> {
    if count == 0 {
        return Err(Error::validation("count", "need at least one eigenpair"));
    }
    Ok(EigenSystem {
        kernel: Kernel::brownian_bridge(),
        eigenvalues: (1..=count).map(|j| 1.0 / (j as f64 * PI).powi(2)).collect(),
        basis: Basis::BrownianBridge,
        source: EigenSource::Analytic,
    })
}

/// `∫ K(x, s) dρ(s)` with the kink at `s = x` placed on a panel boundary.
pub fn kernel_row_mean(kernel: &Kernel, x: f64) -> f64 {
    let dom = kernel.domain();
    let rule = row_rule();
    let total = rule.composite_with_breaks(dom.lo, dom.hi, &[x], 8, |s| kernel.value(x, s));
    total / dom.length()
}

fn row_rule() -> &'static GaussLegendre {
    static RULE: std::sync::OnceLock<GaussLegendre> = std::sync::OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

pub fn nystrom_eigs(kernel: &Kernel, quadrature_size: usize, count: usize) -> Result<EigenSystem> {
    if count == 0 {
        return Err(Error::validation("count", "need at least one eigenpair"));
    }
    if quadrature_size < 4 * count {
        return Err(Error::validation(
            "n_quad",
            format!("need at least {} nodes for {count} eigenpairs", 4 * count),
        ));
    }
    if !kernel.is_symmetric() {
        return Err(Error::validation(
            "kernel",
            "Nyström discretization needs a symmetric kernel",
        ));
    }
    let dom = kernel.domain();
    let rule = GaussLegendre::new(quadrature_size);
    let (nodes, weights): (Vec<f64>, Vec<f64>) = rule
        .mapped(dom.lo, dom.hi)
        .map(|(x, w)| (x, w / dom.length()))
        .unzip();
    let n = nodes.len();
    let kmat = Matrix::from_fn(n, n, |i, j| kernel.value(nodes[i], nodes[j]));
    let correction: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let discrete: f64 = (0..n).map(|j| weights[j] * kmat[(i, j)]).sum();
            kernel_row_mean(kernel, nodes[i]) - discrete
        })
        .collect();
    let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut sym = Matrix::from_fn(n, n, |i, j| sqrt_w[i] * kmat[(i, j)] * sqrt_w[j]);
    for (i, d) in correction.iter().enumerate() {
        sym[(i, i)] += d;
    }
    let eig = jacobi_eigen(&sym, JACOBI_MAX_SWEEPS)?;
    let eigenvalues = eig.values[..count].to_vec();
    if let Some(v) = eigenvalues.iter().find(|v| **v <= 0.0) {
        return Err(Error::Numerical(format!(
            "non-positive leading eigenvalue {v}"
        )));
    }
    let values = eig.vectors[..count]
        .iter()
        .map(|u| {
            let (imax, _) =
                u.iter().enumerate().fold(
                    (0, 0.0),
                    |b, (i, v)| if v.abs() > b.1 { (i, v.abs()) } else { b },
                );
            let sign = u[imax].signum();
            u.iter()
                .zip(&sqrt_w)
                .map(|(ui, sw)| sign * ui / sw)
                .collect()
        })
        .collect();
    Ok(EigenSystem {
        kernel: *kernel,
        eigenvalues,
        basis: Basis::Nystrom {
            nodes,
            weights,
            values,
        },
        source: EigenSource::Nystrom { quadrature_size },
    })
}

/// Analytic pairs for the Brownian bridge on `(0, 1)`, Nyström otherwise.
pub fn eigensystem_for(
    kernel: &Kernel,
    count: usize,
    quadrature_size: usize,
) -> Result<EigenSystem> {
    let dom = kernel.domain();
    if matches!(kernel.kind(), KernelKind::BrownianBridge) && dom.lo == 0.0 && dom.hi == 1.0 {
        brownian_bridge_eigs(count)
    } else {
        nystrom_eigs(kernel, quadrature_size, count)
    }
}

impl EigenSystem {
    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn domain(&self) -> Interval {
        self.kernel.domain()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn source(&self) -> EigenSource {
        self.source
    }

    /// `φ_j(x)` for the zero-based index `j`.
    pub fn eigenfunction(&self, j: usize, x: f64) -> f64 {
        match &self.basis {
            Basis::BrownianBridge => SQRT_2 * ((j + 1) as f64 * PI * x).sin(),
            Basis::Nystrom { .. } => self.eigenfunctions_at(x, j + 1)[j],
        }
    }

    /// `(φ_0(x), …, φ_{count-1}(x))`
    pub fn eigenfunctions_at(&self, x: f64, count: usize) -> Vec<f64> {
        let count = count.min(self.len());
        match &self.basis {
            Basis::BrownianBridge => (1..=count)
                .map(|j| SQRT_2 * (j as f64 * PI * x).sin())
                .collect(),
            Basis::Nystrom {
                nodes,
                weights,
                values,
            } => {
                // λ φ(x) = Σ_i w_i K(x,t_i) φ(t_i) + φ(x) d(x)
                let kw: Vec<f64> = nodes
                    .iter()
                    .zip(weights)
                    .map(|(t, w)| w * self.kernel.value(x, *t))
                    .collect();
                let d = kernel_row_mean(&self.kernel, x) - kw.iter().sum::<f64>();
                (0..count)
                    .map(|j| {
                        let s: f64 = kw.iter().zip(&values[j]).map(|(a, b)| a * b).sum();
                        s / (self.eigenvalues[j] - d)
                    })
                    .collect()
            }
        }
    }

    /// Largest `|⟨φ_i, φ_j⟩ - δ_ij|` under the system's own quadrature.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.len();
        let gram = match &self.basis {
            Basis::BrownianBridge => {
                let rule = GaussLegendre::new(32);
                let mut g = Matrix::zeros(n, n);
                for p in 0..64 {
                    let (lo, hi) = (p as f64 / 64.0, (p + 1) as f64 / 64.0);
                    for (x, w) in rule.mapped(lo, hi) {
                        let phi = self.eigenfunctions_at(x, n);
                        for i in 0..n {
                            for j in 0..n {
                                g[(i, j)] += w * phi[i] * phi[j];
                            }
                        }
                    }
                }
                g
            }
            Basis::Nystrom {
                weights, values, ..
            } => Matrix::from_fn(n, n, |i, j| {
                weights
                    .iter()
                    .zip(&values[i])
                    .zip(&values[j])
                    .map(|((w, a), b)| w * a * b)
                    .sum()
            }),
        };
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// `Σ_j c_j φ_j`
#[derive(Clone, Debug)]
pub struct EigenExpansion {
    eigs: Arc<EigenSystem>,
    coefficients: Vec<f64>,
}

impl EigenExpansion {
    pub fn new(eigs: Arc<EigenSystem>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() > eigs.len() {
            return Err(Error::validation(
                "coefficients",
                format!(
                    "{} modes requested but only {} eigenpairs",
                    coefficients.len(),
                    eigs.len()
                ),
            ));
        }
        Ok(Self { eigs, coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eigensystem(&self) -> &Arc<EigenSystem> {
        &self.eigs
    }

    /// `‖Σ c_j φ_j‖_{L²} = ‖c‖₂` by orthonormality.
    pub fn l2_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Sign changes located by a grid scan plus bisection.
    pub fn zeros(&self, grid: usize) -> Vec<f64> {
        let dom = self.eigs.domain();
        let pts: Vec<f64> = (0..=grid)
            .map(|i| dom.lo + dom.length() * i as f64 / grid as f64)
            .collect();
        let vals: Vec<f64> = pts.iter().map(|&x| self.value(x)).collect();
        let mut out = Vec::new();
        for i in 0..grid {
            if vals[i] == 0.0 {
                out.push(pts[i]);
            } else if vals[i] * vals[i + 1] < 0.0 {
                let (mut a, mut b, fa) = (pts[i], pts[i + 1], vals[i]);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if self.value(mid) * fa > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
        out
    }

    /// `‖Σ c_j φ_j‖_{L¹(ρ)}` by quadrature, panels aligned to the zeros.
    pub fn l1_norm(&self) -> f64 {
        let dom = self.eigs.domain();
        let zeros = self.zeros(4096);
        let rule = GaussLegendre::new(20);
        let total = rule.composite_with_breaks(dom.lo, dom.hi, &zeros, 2, |x| self.value(x).abs());
        total / dom.length()
    }
}

impl RealFunction for EigenExpansion {
    fn value(&self, x: f64) -> f64 {
        let n = self.coefficients.len();
        if n == 0 {
            return 0.0;
        }
        self.eigs
            .eigenfunctions_at(x, n)
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| p * c)
            .sum()
    }
}

/// `h = Σ a_j φ_j` with `f_ρ = L_K^s h = Σ λ_j^s a_j φ_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SourceSpecFields", into = "SourceSpecFields")]
pub struct SourceSpec {
    s: f64,
    coefficients: Vec<f64>,
    h_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpecFields {
    pub s: f64,
    pub coefficients: Vec<f64>,
}

impl TryFrom<SourceSpecFields> for SourceSpec {
    type Error = Error;

    fn try_from(raw: SourceSpecFields) -> Result<Self> {
        SourceSpec::new(raw.s, raw.coefficients)
    }
}

impl From<SourceSpec> for SourceSpecFields {
    fn from(spec: SourceSpec) -> Self {
        Self {
            s: spec.s,
            coefficients: spec.coefficients,
        }
    }
}

impl SourceSpec {
    pub fn new(s: f64, coefficients: Vec<f64>) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::validation(
                "source.s",
                format!("must be positive, got {s}"),
            ));
        }
        if coefficients.iter().any(|a| !a.is_finite()) {
            return Err(Error::validation("source.coefficients", "must be finite"));
        }
        let h_norm = coefficients.iter().map(|a| a * a).sum::<f64>().sqrt();
        Ok(Self {
            s,
            coefficients,
            h_norm,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `‖h‖_{L²(ρ)} = ‖a‖₂`
    pub fn h_norm(&self) -> f64 {
        self.h_norm
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(s, self.coefficients.clone())
    }
}

/// The regression function `f_ρ = Σ λ_j^s a_j φ_j`.
pub fn source_function(eigs: &Arc<EigenSystem>, spec: &SourceSpec) -> Result<EigenExpansion> {
    let coefficients = spec
        .coefficients()
        .iter()
        .zip(eigs.eigenvalues())
        .map(|(a, l)| l.powf(spec.s()) * a)
        .collect();
    if spec.coefficients().len() > eigs.len() {
        return Err(Error::validation(
            "source.coefficients",
            format!(
                "{} modes but only {} eigenpairs",
                spec.coefficients().len(),
                eigs.len()
            ),
        ));
    }
    EigenExpansion::new(eigs.clone(), coefficients)
}

/// `L_K φ`, evaluated pointwise by quadrature of `∫ K(t, x) φ(t) dρ(t)`.
#[derive(Clone, Debug)]
pub struct OperatorImage {
    density: EigenExpansion,
    b_norm: f64,
}

impl OperatorImage {
    /// The norm of `L_K φ` in the ℓ¹ kernel space is the total variation of
    /// `φ dρ`, i.e. `‖φ‖_{L¹(ρ)}`.
    pub fn new(density: EigenExpansion) -> Self {
        let b_norm = density.l1_norm();
        Self { density, b_norm }
    }

    pub fn density(&self) -> &EigenExpansion {
        &self.density
    }
}

impl RealFunction for OperatorImage {
    fn value(&self, x: f64) -> f64 {
        let eigs = self.density.eigensystem();
        let kernel = eigs.kernel();
        let dom = kernel.domain();
        let rule = row_rule();
        rule.composite_with_breaks(dom.lo, dom.hi, &[x], 8, |t| {
            kernel.value(t, x) * self.density.value(t)
        }) / dom.length()
    }
}

impl Hypothesis for OperatorImage {
    fn b_norm(&self) -> f64 {
        self.b_norm
    }
}

/// Composite Gauss–Legendre settings for `L²(ρ)` distances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Quadrature {
    pub order: usize,
    /// Panels per segment on the first pass when no breakpoints are given.
    pub initial_panels: usize,
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl Default for L2Quadrature {
    fn default() -> Self {
        Self {
            order: 8,
            initial_panels: 4,
            rel_tol: 1e-10,
            max_nodes: 1 << 14,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2Estimate {
    pub value: f64,
    /// False when the node budget ran out before the relative tolerance held.
    pub converged: bool,
    pub nodes: usize,
}

/// `∫ (f - g)² dρ` for `ρ` uniform on `domain`; panels double until two
/// successive values agree to `rel_tol`.
pub fn l2_rho_distance_sq(
    f: &dyn RealFunction,
    g: &dyn RealFunction,
    domain: Interval,
    quad: &L2Quadrature,
) -> L2Estimate {
    let mut breaks = f.breakpoints();
    breaks.extend(g.breakpoints());
    let segs = segments(domain.lo, domain.hi, &breaks);
    let n_segs = segs.len() - 1;
    let rule = GaussLegendre::new(quad.order);
    let mut panels = if breaks.is_empty() {
        quad.initial_panels.max(1)
    } else {
        1
    };
    let budget = quad.max_nodes.max(4 * n_segs * panels * quad.order);

    let eval = |panels: usize| -> f64 {
        let total: f64 = segs
            .par_windows(2)
            .map(|s| rule.composite(s[0], s[1], panels, |x| (f.value(x) - g.value(x)).powi(2)))
            .sum();
        total / domain.length()
    };

    let mut value = eval(panels);
    let mut nodes = n_segs * panels * quad.order;
    loop {
        let next_nodes = 2 * nodes;
        if next_nodes > budget {
            return L2Estimate {
                value,
                converged: false,
                nodes,
            };
        }
        panels *= 2;
        let next = eval(panels);
        nodes = next_nodes;
        let diff = (next - value).abs();
        value = next;
        if diff <= quad.rel_tol * next.abs() {
            return L2Estimate {
                value,
                converged: true,
                nodes,
            };
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateBranch {
    /// `λ₁ ≤ λ^{1/(1+s)}`: the zero function.
    Zero,
    /// `φ = Σ_{j ≤ N} λ_j^{s-1} a_j φ_j` with `λ_{N+1} < λ^{1/(1+s)} ≤ λ_N`.
    Truncated,
    /// `s ≥ 1`: `f_ρ = L_K φ` itself, with `φ = Σ_j λ_j^{s-1} a_j φ_j`.
    Exact,
}

/// Comparison function `g = L_K φ` for the regularization error, with its
/// quadrature-measured certificate values.
#[derive(Clone, Debug)]
pub struct RegErrorCandidate {
    pub branch: CandidateBranch,
    pub lambda: f64,
    pub s: f64,
    /// `N`; zero on the zero branch.
    pub truncation: usize,
    pub phi_l2: f64,
    pub phi_l1: f64,
    /// `‖L_K φ - f_ρ‖²_{L²(ρ)}`
    pub fit_error_sq: f64,
    function: Option<OperatorImage>,
}

impl RegErrorCandidate {
    /// `D(λ, g) = ‖g - f_ρ‖² + λ ‖g‖_B`
    pub fn regularization_error(&self) -> f64 {
        self.fit_error_sq + self.lambda * self.phi_l1
    }

    /// The candidate `g` as a function with its space norm.
    pub fn comparison(&self) -> &dyn Hypothesis {
        match &self.function {
            Some(g) => g,
            None => &Zero,
        }
    }
}

/// Truncation index `N` with `λ_{N+1} < λ^{1/(1+s)} ≤ λ_N`, capped at the
/// number of available eigenvalues; zero when `λ₁` is below the threshold.
pub fn truncation_index(eigenvalues: &[f64], s: f64, lambda: f64) -> usize {
    let threshold = lambda.powf(1.0 / (1.0 + s));
    eigenvalues.iter().take_while(|&&l| l >= threshold).count()
}

pub fn reg_error_candidate(
    eigs: &Arc<EigenSystem>,
    spec: &SourceSpec,
    lambda: f64,
) -> Result<RegErrorCandidate> {
    reg_error_candidate_with(eigs, spec, lambda, &L2Quadrature::default())
}

pub fn reg_error_candidate_with(
    eigs: &Arc<EigenSystem>,
    spec: &SourceSpec,
    lambda: f64,
    quad: &L2Quadrature,
) -> Result<RegErrorCandidate> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::validation(
            "lambda",
            format!("must lie in (0, 1], got {lambda}"),
        ));
    }
    let s = spec.s();
    let f_rho = source_function(eigs, spec)?;
    let domain = eigs.domain();
    let (branch, truncation) = if s >= 1.0 {
        (CandidateBranch::Exact, spec.coefficients().len())
    } else {
        match truncation_index(eigs.eigenvalues(), s, lambda) {
            0 => (CandidateBranch::Zero, 0),
            n => (CandidateBranch::Truncated, n),
        }
    };
    if branch == CandidateBranch::Zero {
        let fit = l2_rho_distance_sq(&Zero, &f_rho, domain, quad);
        return Ok(RegErrorCandidate {
            branch,
            lambda,
            s,
            truncation: 0,
            phi_l2: 0.0,
            phi_l1: 0.0,
            fit_error_sq: fit.value,
            function: None,
        });
    }
    let n = truncation.min(spec.coefficients().len());
    let phi_coeffs: Vec<f64> = spec.coefficients()[..n]
        .iter()
        .zip(eigs.eigenvalues())
        .map(|(a, l)| l.powf(s - 1.0) * a)
        .collect();
    let phi = EigenExpansion::new(eigs.clone(), phi_coeffs)?;
    let phi_l2 = l2_rho_distance_sq(&phi, &Zero, domain, quad).value.sqrt();
    let image = OperatorImage::new(phi);
    let fit = l2_rho_distance_sq(&image, &f_rho, domain, quad);
    Ok(RegErrorCandidate {
        branch,
        lambda,
        s,
        truncation,
        phi_l2,
        phi_l1: image.b_norm(),
        fit_error_sq: fit.value,
        function: Some(image),
    })
}

/// `(‖h‖ + ‖h‖²) λ^{2s/(1+s)}` for `0 < s < 1`, `λ₁^{s-1} ‖h‖ λ` for `s ≥ 1`.
pub fn reg_error_bound(spec: &SourceSpec, lambda: f64, lambda_1: f64) -> f64 {
    let s = spec.s();
    let h = spec.h_norm();
    if s < 1.0 {
        (h + h * h) * lambda.powf(2.0 * s / (1.0 + s))
    } else {
        lambda_1.powf(s - 1.0) * h * lambda
    }
}
