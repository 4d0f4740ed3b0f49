//! Cross-module invariants: optimality dominance, support certificates,
//! sandwich/route agreement between the transfinite-diameter routes, the
//! liminf domination of perturbation curves, and a generic-scalar smoke
//! test.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use optmeas::asymptotics::{
    diameter_estimate, perturbation_curve, sandwich_lower_slack,
};
use optmeas::design_solver::{solve_optimal, DesignResult, SolverConfig};
use optmeas::extremal_points::{brute_force_fekete, fekete_measure};
use optmeas::measures::{christoffel, gram, AdmissibleWeight, DiscreteMeasure};
use optmeas::poly_basis::{graded_basis, log_abs_vdm, GradedBasis, PointSet};

fn interval_setup(
    n: usize,
    points: usize,
) -> (GradedBasis, PointSet<f64>, AdmissibleWeight<f64>) {
    let basis = graded_basis(1, n).unwrap();
    let pts = PointSet::<f64>::interval_grid(-1.0, 1.0, points);
    let w = AdmissibleWeight::constant(points);
    (basis, pts, w)
}

#[test]
fn converged_design_dominates_random_measures_and_fekete() {
    let (basis, pts, w) = interval_setup(3, 101);
    let result = solve_optimal(&pts, &w, &basis, &SolverConfig::default()).unwrap();
    assert!(result.converged);
    let slack = result.kw_gap + 1e-9;

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..100 {
        let raw: Vec<f64> = (0..101).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mu = DiscreteMeasure::normalized(raw).unwrap();
        let fact = gram(&basis, &pts, &mu, &w).unwrap();
        assert!(
            fact.log_det() <= result.log_det + slack,
            "random measure beats the design: {} vs {}",
            fact.log_det(),
            result.log_det
        );
    }

    let sub_indices: Vec<usize> = (0..=20).map(|i| i * 5).collect();
    let sub = pts.select(&sub_indices, "sub");
    let wsub = AdmissibleWeight::constant(sub.len());
    let fam = brute_force_fekete(&sub, &wsub, &basis).unwrap();
    let global: Vec<usize> = fam.indices.iter().map(|&i| sub_indices[i]).collect();
    let mu = DiscreteMeasure::uniform_on(pts.len(), &global);
    let fact = gram(&basis, &pts, &mu, &w).unwrap();
    assert!(fact.log_det() <= result.log_det + slack);
}

#[test]
fn support_points_sit_on_the_kiefer_wolfowitz_level() {
    for n in [2usize, 4] {
        let (basis, pts, w) = interval_setup(n, 501);
        let result = solve_optimal(&pts, &w, &basis, &SolverConfig::default()).unwrap();
        assert!(result.converged, "n={n}");
        let fact = gram(&basis, &pts, &result.measure, &w).unwrap();
        let field = christoffel(&fact, &basis, &pts, &w).unwrap();
        let n_dim = basis.len() as f64;
        for (i, (&wt, &k)) in result
            .measure
            .weights()
            .iter()
            .zip(field.values())
            .enumerate()
        {
            if wt > 1e-7 {
                assert!(
                    ((k - n_dim) / n_dim).abs() <= 10.0 * 1e-6,
                    "n={n} support point {i}: K = {k}"
                );
            }
        }
    }
}

#[test]
fn diameter_routes_agree_within_sandwich_bounds() {
    let sub = PointSet::<f64>::interval_grid(-1.0, 1.0, 21);
    let wsub = AdmissibleWeight::constant(21);
    for n in 1..=5usize {
        let (basis, pts, w) = interval_setup(n, 201);
        let result = solve_optimal(&pts, &w, &basis, &SolverConfig::default()).unwrap();
        let fam = brute_force_fekete(&sub, &wsub, &basis).unwrap();
        let est = diameter_estimate(&fam, &result, &basis).unwrap();
        assert!(est.sandwich_holds(sandwich_lower_slack(&result), 1e-6), "n={n}");

        // Ratio bounds implied by the sandwich:
        // delta_gram/delta_points ∈ [N!^{-1/2m}, N^{-N/2m}]⁻¹-consistent.
        let two_m = 2.0 * basis.degree_sum() as f64;
        let n_dim = basis.len() as f64;
        let mut log_fact = 0.0;
        for k in 2..=basis.len() {
            log_fact += (k as f64).ln();
        }
        let ratio = (est.delta_from_gram / est.delta_from_points).ln();
        let lo = -n_dim * n_dim.ln() / two_m - 1e-6;
        let hi = -log_fact / two_m + 1e-6;
        assert!(
            ratio >= lo && ratio <= hi,
            "n={n}: log ratio {ratio} outside [{lo}, {hi}]"
        );
    }
}

#[test]
fn perturbed_curve_dominates_reoptimized_values() {
    // f_n(t) of the design solved for w must dominate the value of the
    // design re-solved for w_t, up to certificate slack.
    let (basis, pts, w) = interval_setup(2, 101);
    let base = solve_optimal(&pts, &w, &basis, &SolverConfig::default()).unwrap();
    let u: Vec<f64> = pts.iter_points().map(|p| p[0].re).collect();
    let t_grid = [-0.4, -0.2, 0.0, 0.2, 0.4];
    let curve = perturbation_curve(&base, &pts, &w, &u, &basis, &t_grid).unwrap();
    let two_m = 2.0 * basis.degree_sum() as f64;

    for (pos, &t) in t_grid.iter().enumerate() {
        let phi_t: Vec<f64> = w
            .phi()
            .iter()
            .zip(&u)
            .map(|(&p, &uv)| p + t * uv)
            .collect();
        let wt = AdmissibleWeight::from_phi(phi_t, "wt").unwrap();
        let reopt = solve_optimal(&pts, &wt, &basis, &SolverConfig::default()).unwrap();
        let f_reopt = -reopt.log_det / two_m;
        let slack = (reopt.kw_gap.max(0.0) + 1e-9) / two_m;
        assert!(
            curve.f_values[pos] >= f_reopt - slack,
            "t={t}: {} < {}",
            curve.f_values[pos],
            f_reopt
        );
    }
}

#[test]
fn gram_vdm_integral_identity_at_oracle_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 20 {
        let n = rng.gen_range(1..=2usize);
        let basis = graded_basis(1, n).unwrap();
        let dim = basis.len();
        let len = rng.gen_range(dim..=5usize);
        let coords: Vec<Complex<f64>> = (0..len)
            .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.4..0.4)))
            .collect();
        let pts = PointSet::new(1, coords, "oracle").unwrap();
        let mu =
            DiscreteMeasure::normalized((0..len).map(|_| rng.gen_range(0.1..1.0)).collect())
                .unwrap();
        let w = AdmissibleWeight::power(&pts, 0.2);
        let fact = gram(&basis, &pts, &mu, &w).unwrap();
        if fact.is_singular() {
            continue;
        }
        checked += 1;

        // Explicit N-fold sum of |VDM|²·Πw^{2n} dμ^{⊗N}.
        let mut tuple = vec![0usize; dim];
        let mut total = 0.0;
        'outer: loop {
            let sel = pts.select(&tuple, "tuple");
            let phi: Vec<f64> = tuple.iter().map(|&i| w.phi()[i]).collect();
            let wt = AdmissibleWeight::from_phi(phi, "tuple").unwrap();
            let log_v = log_abs_vdm(&basis, &sel, Some(&wt)).unwrap();
            if log_v.is_finite() {
                let mass: f64 = tuple.iter().map(|&i| mu.weights()[i]).product();
                total += (2.0 * log_v).exp() * mass;
            }
            let mut pos = 0;
            loop {
                if pos == dim {
                    break 'outer;
                }
                tuple[pos] += 1;
                if tuple[pos] < len {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
            }
        }
        let mut n_fact = 1.0;
        for k in 2..=dim {
            n_fact *= k as f64;
        }
        let via_det = n_fact * fact.log_det().exp();
        assert!(
            (total - via_det).abs() <= 1e-8 * via_det.abs(),
            "explicit {total} vs N!·det {via_det}"
        );
    }
}

#[test]
fn weighted_design_pulls_mass_inward() {
    // Gaussian weight w = exp(-x²) concentrates the design strictly inside
    // the interval endpoints.
    let (basis, pts, _) = interval_setup(2, 201);
    let w = AdmissibleWeight::gaussian(&pts, 1.0);
    let result = solve_optimal(&pts, &w, &basis, &SolverConfig::default()).unwrap();
    assert!(result.converged);
    assert!(result.measure.weights()[0] < 1e-7);
    assert!(result.measure.weights()[200] < 1e-7);
    let support = result.measure.support_indices(1e-3);
    assert!(!support.is_empty());
    for i in support {
        let x = pts.point(i)[0].re;
        assert!(x.abs() < 1.0, "support point at |x| = {}", x.abs());
    }
}

#[test]
fn pipeline_runs_in_single_precision() {
    let basis = graded_basis(1, 2).unwrap();
    let pts = PointSet::<f32>::interval_grid(-1.0f32, 1.0, 41);
    let w = AdmissibleWeight::constant(41);
    let config = SolverConfig::<f32> {
        tolerance: 1e-3,
        ..SolverConfig::default()
    };
    let result: DesignResult<f32> = solve_optimal(&pts, &w, &basis, &config).unwrap();
    assert!(result.converged);
    assert!((result.measure.total_mass() - 1.0).abs() < 1e-5);
    assert!((result.measure.weights()[0] - 1.0 / 3.0).abs() < 0.05);
}
