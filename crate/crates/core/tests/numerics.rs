//! Numerical properties checked against independent oracles.

use std::sync::Arc;

use l1rkbs::admissibility::{check_h2, h2_value, sup_attainment_gap};
use l1rkbs::experiments::{
    emit_report, read_report_csv, read_report_json, run_rate_experiment, ExperimentConfig,
    RateRecord, RateReport, ReportFormat,
};
use l1rkbs::kernels::{
    cross_row, gram, gram_matrix, lipschitz_audit, Kernel, KernelId, KernelSpec,
};
use l1rkbs::linalg::jacobi_eigen;
use l1rkbs::rkbs::{empirical_risk, error_decomposition, min_norm_interpolant};
use l1rkbs::rng::CounterRng;
use l1rkbs::sparse_solver::{
    augmented_dictionary, basis_pursuit_lp, fit_regressor, lambda_max, lasso_cd, lasso_duality_gap,
    lasso_objective, LassoOptions,
};
use l1rkbs::spectral::{
    brownian_bridge_eigs, nystrom_eigs, reg_error_candidate, source_function, truncation_index,
    SourceSpec,
};
use l1rkbs::{DiscreteExpansion, RealFunction, SampleSet};

fn simpson(a: f64, b: f64, breaks: &[f64], panels: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let n = panels + panels % 2;
    pts.windows(2)
        .map(|w| {
            let h = (w[1] - w[0]) / n as f64;
            let mut acc = f(w[0]) + f(w[1]);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(w[0] + i as f64 * h);
            }
            acc * h / 3.0
        })
        .sum()
}

fn sorted_points(rng: &CounterRng, base: u64, m: usize, min_gap: f64) -> Vec<f64> {
    for attempt in 0.. {
        let mut x: Vec<f64> = (0..m as u64)
            .map(|j| rng.uniform(base + 1000 * attempt + j))
            .collect();
        x.sort_by(f64::total_cmp);
        if x.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return x;
        }
    }
    unreachable!()
}

fn admissible_kernels() -> [Kernel; 2] {
    [
        Kernel::exponential(0.0, 1.0).unwrap(),
        Kernel::brownian_bridge(),
    ]
}

#[test]
fn gram_matrices_are_positive_definite() {
    let rng = CounterRng::new(1, 0);
    for k in admissible_kernels() {
        for inst in 0..20u64 {
            let m = 2 + (rng.bits(inst) % 11) as usize;
            let x = sorted_points(&rng, 100_000 * (inst + 1), m, 1e-3);
            let g = gram_matrix(&k, &x);
            assert_eq!(g.max_asymmetry(), 0.0);
            let eig = jacobi_eigen(&g, 100).unwrap();
            assert!(eig.values.iter().all(|&v| v > 0.0), "{:?}", eig.values);
            for (j, &xj) in x.iter().enumerate() {
                assert_eq!(g.row(j), cross_row(&k, &x, xj).unwrap().as_slice());
            }
        }
    }
}

#[test]
fn lipschitz_constants_by_grid_scan() {
    let exp = lipschitz_audit(&Kernel::exponential(0.0, 1.0).unwrap(), 256).unwrap();
    assert!(exp.empirical_constant <= 1.0 + 1e-12);
    let bb = lipschitz_audit(&Kernel::brownian_bridge(), 256).unwrap();
    assert!(bb.empirical_constant <= 2.0);
    for k in admissible_kernels() {
        let coarse = lipschitz_audit(&k, 16).unwrap().empirical_constant;
        let fine = lipschitz_audit(&k, 256).unwrap().empirical_constant;
        assert!(coarse <= fine);
    }
}

#[test]
fn lebesgue_function_equals_one_at_every_center() {
    let kernels = [
        Kernel::exponential(0.0, 1.0).unwrap(),
        Kernel::brownian_bridge(),
        Kernel::gaussian(1.0, 0.0, 1.0).unwrap(),
    ];
    let x = [0.05, 0.3, 0.55, 0.8, 0.95];
    for k in &kernels {
        let g = gram(k, &x).unwrap();
        for &xi in &x {
            assert!((h2_value(&g, k, xi).unwrap() - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn sup_is_attained_on_the_centers() {
    let k = Kernel::exponential(0.0, 1.0).unwrap();
    let rng = CounterRng::new(2, 0);
    let x = sorted_points(&rng, 0, 7, 1e-2);
    let report = check_h2(&k, &x, 4096).unwrap();
    assert!(report.admissible);
    let g = gram(&k, &x).unwrap();
    for trial in 0..100u64 {
        let c: Vec<f64> = (0..7)
            .map(|j| rng.uniform_in(10_000 + 10 * trial + j, -1.0, 1.0))
            .collect();
        let s = sup_attainment_gap(&g, &k, &c, 1024).unwrap();
        assert!((s.sup_grid - s.max_at_centers).abs() <= 1e-8, "{s:?}");
    }
}

#[test]
fn interpolant_norm_matches_lp_over_centers_only() {
    let rng = CounterRng::new(3, 0);
    for k in admissible_kernels() {
        let x = sorted_points(&rng, 0, 6, 1e-2);
        let y: Vec<f64> = (0..6).map(|j| rng.uniform_in(500 + j, -1.0, 1.0)).collect();
        let interp = min_norm_interpolant(&k, &x, &y).unwrap();
        let (_, a) = augmented_dictionary(&k, &x, 0);
        let lp = basis_pursuit_lp(&a, &y).unwrap();
        assert!((lp.optimum - interp.norm).abs() <= 1e-9);
        let (_, a) = augmented_dictionary(&k, &x, 50);
        let column = a.column(9);
        assert!(basis_pursuit_lp(&a, &column).unwrap().optimum <= 1.0 + 1e-12);
    }
}

#[test]
fn constant_shift_of_empirical_risk() {
    let k = Kernel::brownian_bridge();
    let f = DiscreteExpansion::new(vec![0.3, 0.7], vec![1.5, -0.5]).unwrap();
    let bound = f.bind(&k);
    let x = vec![0.1, 0.25, 0.5, 0.9];
    let y = vec![0.3, -0.2, 0.8, 0.1];
    let shift = 0.7;
    let z = SampleSet::new(x.clone(), y.clone()).unwrap();
    let z_shift = SampleSet::new(x.clone(), y.iter().map(|v| v + shift).collect()).unwrap();
    let r = empirical_risk(&bound, &z);
    let mut mean_res = 0.0;
    for (xi, yi) in x.iter().zip(&y) {
        mean_res += (bound.value(*xi) - yi) / 4.0;
    }
    let expected = r - 2.0 * shift * mean_res + shift * shift;
    // independent summation, reverse order
    let direct: f64 = x
        .iter()
        .zip(&y)
        .rev()
        .map(|(xi, yi)| (bound.value(*xi) - yi - shift).powi(2))
        .sum::<f64>()
        / 4.0;
    assert!((empirical_risk(&bound, &z_shift) - direct).abs() <= 1e-14);
    assert!((direct - expected).abs() <= 1e-13);
}

#[test]
fn decomposition_against_itself_vanishes() {
    let k = Kernel::exponential(0.0, 1.0).unwrap();
    let z = SampleSet::new(vec![0.1, 0.4, 0.8], vec![0.5, -0.3, 0.2]).unwrap();
    let fit = fit_regressor(&k, &z, 1e-2).unwrap();
    let f = fit.expansion.bind(&k);
    let oracle = |h: &dyn RealFunction| {
        simpson(0.0, 1.0, fit.expansion.centers(), 4000, |x| {
            h.value(x).powi(2)
        })
    };
    let d = error_decomposition(&f, &f, &z, 1e-2, &oracle).unwrap();
    assert_eq!(d.sampling, 0.0);
    assert_eq!(d.hypothesis, 0.0);
    assert!(d.identity_residual() <= 1e-12 * d.excess_risk.abs().max(1.0));
}

fn sample(rng: &CounterRng, base: u64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let x = sorted_points(rng, base, m, 1e-3);
    let y = x
        .iter()
        .enumerate()
        .map(|(j, t)| (3.0 * t).cos() + rng.uniform_in(base + 777 + j as u64, -0.1, 0.1))
        .collect();
    (x, y)
}

#[test]
fn lasso_is_permutation_equivariant() {
    let rng = CounterRng::new(4, 0);
    for k in admissible_kernels() {
        let (x, y) = sample(&rng, 0, 15);
        let perm: Vec<usize> = (0..15).map(|i| (7 * i + 3) % 15).collect();
        let xp: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let opts = LassoOptions::default();
        let c = lasso_cd(&gram_matrix(&k, &x), &y, 1e-3, &opts)
            .unwrap()
            .coefficients;
        let cp = lasso_cd(&gram_matrix(&k, &xp), &yp, 1e-3, &opts)
            .unwrap()
            .coefficients;
        for (j, &i) in perm.iter().enumerate() {
            assert!((cp[j] - c[i]).abs() <= 1e-8, "{} vs {}", cp[j], c[i]);
        }
    }
}

#[test]
fn residual_vanishes_monotonically_as_lambda_shrinks() {
    let rng = CounterRng::new(5, 0);
    let k = Kernel::exponential(0.0, 1.0).unwrap();
    for inst in 0..5u64 {
        let x = sorted_points(&rng, 10_000 * inst, 8, 0.05);
        let y: Vec<f64> = (0..8u64)
            .map(|j| rng.uniform_in(10_000 * inst + 500 + j, -1.0, 1.0))
            .collect();
        let g = gram_matrix(&k, &x);
        let mut last = f64::INFINITY;
        for lambda in [1e-4, 1e-6, 1e-8] {
            let sol = lasso_cd(&g, &y, lambda, &LassoOptions::default()).unwrap();
            let res = g
                .mul_vec(&sol.coefficients)
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            // KKT gives r = (m/2) λ G⁻ᵀ sign(c): the residual is linear in λ
            assert!(res < last / 50.0, "lambda {lambda}: {res} vs {last}");
            last = res;
        }
    }
}

#[test]
fn stored_objective_and_gap_are_consistent() {
    let rng = CounterRng::new(6, 0);
    for k in admissible_kernels() {
        let (x, y) = sample(&rng, 0, 20);
        let g = gram_matrix(&k, &x);
        let sol = lasso_cd(&g, &y, 1e-3, &LassoOptions::default()).unwrap();
        let f = lasso_objective(&g, &y, 1e-3, &sol.coefficients);
        assert!((f - sol.objective).abs() <= 1e-12 * f);
        assert!(sol.duality_gap >= 0.0);
        assert!(lasso_duality_gap(&g, &y, 1e-3, &sol.coefficients) <= 1e-10);
        let lmax = lambda_max(&g, &y);
        assert!(lasso_duality_gap(&g, &y, lmax, &[0.0; 20]) <= 1e-14);
    }
}

#[test]
fn noiseless_two_atom_support_is_recovered() {
    let k = Kernel::exponential(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..12).map(|i| (i as f64 + 0.5) / 12.0).collect();
    let truth = DiscreteExpansion::new(vec![x[3], x[8]], vec![1.0, -0.7]).unwrap();
    let y: Vec<f64> = x.iter().map(|&t| truth.evaluate(&k, t).unwrap()).collect();
    let z = SampleSet::new(x.clone(), y.clone()).unwrap();
    let fit = fit_regressor(&k, &z, 1e-9).unwrap();
    let c = fit.expansion.coefficients();
    for (j, &cj) in c.iter().enumerate() {
        match j {
            3 => assert!((cj - 1.0).abs() < 1e-4),
            8 => assert!((cj + 0.7).abs() < 1e-4),
            _ => assert!(cj.abs() <= 1e-6, "atom {j}: {cj}"),
        }
    }
    let (_, a) = augmented_dictionary(&k, &x, 0);
    let lp = basis_pursuit_lp(&a, &y).unwrap();
    let lp_support: Vec<usize> = (0..12)
        .filter(|&j| lp.coefficients[j].abs() > 1e-9)
        .collect();
    assert_eq!(lp_support, vec![3, 8]);
}

#[test]
fn nystrom_exponential_eigen_residual() {
    let k = Kernel::exponential(0.0, 1.0).unwrap();
    let eigs = nystrom_eigs(&k, 512, 10).unwrap();
    assert!(eigs
        .eigenvalues()
        .windows(2)
        .all(|w| w[0] >= w[1] && w[1] > 0.0));
    let mut worst: f64 = 0.0;
    for j in 0..10 {
        let lambda = eigs.eigenvalues()[j];
        for i in 0..=64 {
            let x = i as f64 / 64.0;
            let image = simpson(0.0, 1.0, &[x], 4000, |t| {
                (-(x - t).abs()).exp() * eigs.eigenfunction(j, t)
            });
            worst = worst.max((image - lambda * eigs.eigenfunction(j, x)).abs());
        }
    }
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn brownian_bridge_eigenpairs_against_quadrature() {
    let eigs = brownian_bridge_eigs(10).unwrap();
    assert!((eigs.eigenvalues()[0] - 0.101321183642338).abs() < 1e-12);
    for j in 0..10 {
        for i in 0..=256 {
            let x = i as f64 / 256.0;
            let image = simpson(0.0, 1.0, &[x], 4000, |t| {
                (x.min(t) - x * t) * eigs.eigenfunction(j, t)
            });
            assert!((image - eigs.eigenvalues()[j] * eigs.eigenfunction(j, x)).abs() <= 1e-8);
        }
        let norm = simpson(0.0, 1.0, &[], 4000, |t| eigs.eigenfunction(j, t).powi(2));
        assert!((norm - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn source_with_unit_smoothness_is_the_operator_image() {
    let eigs = Arc::new(brownian_bridge_eigs(4).unwrap());
    let a = vec![0.5, -0.3, 0.2, 0.1];
    let spec = SourceSpec::new(1.0, a.clone()).unwrap();
    let f = source_function(&eigs, &spec).unwrap();
    let h = |t: f64| {
        a.iter()
            .enumerate()
            .map(|(j, aj)| aj * eigs.eigenfunction(j, t))
            .sum::<f64>()
    };
    for i in 1..20 {
        let x = i as f64 / 20.0;
        let lk_h = simpson(0.0, 1.0, &[x], 4000, |t| (t.min(x) - t * x) * h(t));
        assert!((f.value(x) - lk_h).abs() <= 1e-7);
    }
}

#[test]
fn truncation_follows_the_threshold() {
    let eigs = brownian_bridge_eigs(40).unwrap();
    let threshold = 1e-3f64.powf(2.0 / 3.0);
    let expected = (1..=40)
        .filter(|&j| 1.0 / (j as f64 * std::f64::consts::PI).powi(2) >= threshold)
        .count();
    assert_eq!(truncation_index(eigs.eigenvalues(), 0.5, 1e-3), expected);
}

#[test]
fn regularization_error_is_monotone_in_lambda() {
    let eigs = Arc::new(brownian_bridge_eigs(10).unwrap());
    let a: Vec<f64> = (1..=10).map(|j| 1.0 / j as f64).collect();
    for s in [0.25, 0.5, 0.75, 1.0, 1.5] {
        let spec = SourceSpec::new(s, a.clone()).unwrap();
        let d: Vec<f64> = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1]
            .iter()
            .map(|&l| {
                reg_error_candidate(&eigs, &spec, l)
                    .unwrap()
                    .regularization_error()
            })
            .collect();
        assert!(d.windows(2).all(|w| w[0] <= w[1]), "s = {s}: {d:?}");
    }
}

fn bb_config(
    s: f64,
    coefficients: Vec<f64>,
    sigma: f64,
    m_grid: Vec<usize>,
    trials: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        kernel: KernelSpec {
            id: KernelId::BrownianBridge,
            width: None,
            domain: None,
        },
        source: SourceSpec::new(s, coefficients).unwrap(),
        sigma,
        output_bound: None,
        m_grid,
        trials,
        eta: None,
        alpha: None,
        seed: 99,
        nystrom_nodes: 512,
    }
}

#[test]
fn noiseless_rate_is_strictly_decreasing() {
    let cfg = bb_config(0.5, vec![30.0], 0.0, vec![64, 128, 256, 512, 1024], 4);
    let report = run_rate_experiment(&cfg).unwrap();
    let means: Vec<f64> = report.records.iter().map(|r| r.mean_excess).collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}

#[test]
fn single_trial_reports_are_identical() {
    let cfg = bb_config(1.0, vec![30.0], 0.1, vec![32, 64], 1);
    let a = run_rate_experiment(&cfg).unwrap();
    let b = run_rate_experiment(&cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn pure_noise_fit_shrinks_with_more_data() {
    let cfg = bb_config(1.0, vec![0.0], 20.0, vec![16, 1024], 5);
    let report = run_rate_experiment(&cfg).unwrap();
    let (first, last) = (&report.records[0], &report.records[1]);
    assert!(first.mean_excess > 0.0);
    assert!(
        last.mean_excess < first.mean_excess,
        "{} vs {}",
        last.mean_excess,
        first.mean_excess
    );
}

fn synthetic_report(rows: usize) -> RateReport {
    RateReport {
        records: (0..rows)
            .map(|i| RateRecord {
                m: 64 << i,
                lambda: ((64u64 << i) as f64).powf(-1.0 / 6.0),
                mean_excess: 0.1 / (i as f64 + 1.0) + 1e-17,
                median_excess: std::f64::consts::PI / 7.0,
                q10: 1.0 / 3.0,
                q90: 2.0f64.sqrt(),
                s1: -1.234_567_890_123_456_7e-5,
                s2: 6.02214076e23,
                d: f64::MIN_POSITIVE,
                failures: i,
            })
            .collect(),
        fitted_slope: Some(-0.25),
        gamma_theory: 1.0 / 6.0,
        theta: 1.0 / 6.0,
        eta: 1.0,
        alpha: 1.0,
        output_bound: 3.1,
        trials: Vec::new(),
        failures: Vec::new(),
    }
}

#[test]
fn report_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let report = synthetic_report(3);
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.json");
    emit_report(&report, ReportFormat::Csv, &csv).unwrap();
    emit_report(&report, ReportFormat::Json, &json).unwrap();
    assert_eq!(read_report_csv(&csv).unwrap(), report.records);
    assert_eq!(read_report_json(&json).unwrap(), report);
}

#[test]
fn empty_report_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    emit_report(&synthetic_report(0), ReportFormat::Csv, &csv).unwrap();
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        "m,lambda,mean_excess,median_excess,q10,q90,S1,S2,D,failures\n"
    );
    assert!(read_report_csv(&csv).unwrap().is_empty());
}

#[test]
fn unwritable_path_is_reported() {
    let err = emit_report(
        &synthetic_report(1),
        ReportFormat::Csv,
        std::path::Path::new("/nonexistent/dir/r.csv"),
    )
    .unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/r.csv"));
}
