//! Subcommand implementations: design, points, diameter, converge, check.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use log::{debug, info};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use optmeas::asymptotics::{
    concavity_check, convergence_report, derivative_check, diameter_estimate,
    perturbation_curve, reference_equilibrium, sandwich_lower_slack, DiameterEstimate,
    ReferenceKind,
};
use optmeas::design_solver::{solve_optimal, Algorithm, DesignResult, SolverConfig};
use optmeas::extremal_points::{brute_force_fekete, leja_sequence, PointFamily};
use optmeas::io;
use optmeas::linalg::{self, ComplexMatrix};
use optmeas::measures::{
    christoffel, gram, gram_from_values, AdmissibleWeight, DiscreteMeasure,
};
use optmeas::poly_basis::{graded_basis, log_abs_vdm, vandermonde, GradedBasis, PointSet};

use crate::config::ExperimentConfig;
use crate::manifest::ManifestBuilder;
use crate::util::write_atomic;
use crate::RunError;

/// One finished per-degree job: files to register plus a soft-failure note.
struct StageOutput {
    key: String,
    files: Vec<String>,
    elapsed: Duration,
    soft_failure: Option<String>,
}

/// Runs one closure per degree with at most `workers` threads, preserving
/// degree order in the results. Output bytes per degree do not depend on
/// scheduling, so worker count never changes artifacts.
fn run_stages<F>(degrees: &[usize], workers: usize, job: F) -> Result<Vec<StageOutput>, RunError>
where
    F: Fn(usize) -> Result<StageOutput, RunError> + Sync,
{
    let workers = workers.max(1).min(degrees.len().max(1));
    if workers <= 1 {
        return degrees.iter().map(|&n| job(n)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<StageOutput, RunError>>>> =
        degrees.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= degrees.len() {
                    break;
                }
                let outcome = job(degrees[i]);
                *slots[i].lock().unwrap() = Some(outcome);
            });
        }
    });
    let mut outputs = Vec::with_capacity(degrees.len());
    for slot in slots {
        let outcome = slot
            .into_inner()
            .unwrap()
            .unwrap_or_else(|| Err(RunError::Usage("worker panicked".into())));
        outputs.push(outcome?);
    }
    Ok(outputs)
}

fn basis_for(config: &ExperimentConfig, candidates: &PointSet<f64>, n: usize) -> Result<GradedBasis, RunError> {
    let basis = graded_basis(candidates.dim(), n)?;
    if candidates.len() < basis.len() {
        return Err(RunError::Infeasible(format!(
            "{} candidate points cannot carry a degree-{n} design (need ≥ {})",
            candidates.len(),
            basis.len()
        )));
    }
    let _ = config;
    Ok(basis)
}

fn finish<I>(
    command: &'static str,
    config: &ExperimentConfig,
    out_dir: &Path,
    stages: I,
    started: Instant,
) -> Result<(), RunError>
where
    I: IntoIterator<Item = StageOutput>,
{
    let mut manifest = ManifestBuilder::new(command, config);
    let mut failures: Vec<String> = Vec::new();
    for stage in stages {
        manifest.stage(&stage.key, &stage.files, stage.elapsed);
        if let Some(note) = stage.soft_failure {
            failures.push(note);
        }
    }
    manifest.write(out_dir, started.elapsed())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(RunError::Soft(failures.join("; ")))
    }
}

/// `design`: one optimal-measure solve per degree, exported as JSON plus a
/// CSV iteration trace. Exit 0 iff every degree converged.
pub fn cmd_design(
    config: &ExperimentConfig,
    out_dir: &Path,
    workers: usize,
) -> Result<(), RunError> {
    let started = Instant::now();
    let candidates = config.candidate_set()?;
    let weight = config.weight_on(&candidates)?;
    let solver = config.solver_config();

    let stages = run_stages(&config.degrees, workers, |n| {
        let t = Instant::now();
        let basis = basis_for(config, &candidates, n)?;
        info!("design: solving degree {n} (N = {})", basis.len());
        let result = solve_optimal(&candidates, &weight, &basis, &solver)?;
        debug!(
            "design: degree {n} converged={} iterations={} gap={:e}",
            result.converged, result.iterations, result.kw_gap
        );

        let design_name = format!("design_n{n}.json");
        let trace_name = format!("trace_n{n}.csv");
        let json = io::render_json(&io::design_result_json(&result));
        write_atomic(&out_dir.join(&design_name), json.as_bytes())?;
        let mut trace = Vec::new();
        io::write_trace_csv(&result, &mut trace)?;
        write_atomic(&out_dir.join(&trace_name), &trace)?;

        Ok(StageOutput {
            key: format!("n={n}"),
            files: vec![design_name, trace_name],
            elapsed: t.elapsed(),
            soft_failure: (!result.converged)
                .then(|| format!("degree {n} did not converge (gap {:e})", result.kw_gap)),
        })
    })?;
    finish("design", config, out_dir, stages, started)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Fekete,
    Leja,
}

impl PointKind {
    pub fn parse(name: &str) -> Result<Self, RunError> {
        match name {
            "fekete" => Ok(Self::Fekete),
            "leja" => Ok(Self::Leja),
            other => Err(RunError::Usage(format!(
                "unknown point kind `{other}` (expected fekete or leja)"
            ))),
        }
    }
}

/// `points`: constructs a Fekete or Leja family per degree, exported as a
/// point CSV plus a JSON sidecar with the weighted Vandermonde modulus.
pub fn cmd_points(
    config: &ExperimentConfig,
    out_dir: &Path,
    workers: usize,
    kind: PointKind,
    count: Option<usize>,
) -> Result<(), RunError> {
    let started = Instant::now();
    let candidates = config.candidate_set()?;
    let weight = config.weight_on(&candidates)?;

    let stages = run_stages(&config.degrees, workers, |n| {
        let t = Instant::now();
        let basis = basis_for(config, &candidates, n)?;
        let family = match kind {
            PointKind::Fekete => {
                if count.is_some() {
                    return Err(RunError::Usage(
                        "--count only applies to leja families".into(),
                    ));
                }
                brute_force_fekete(&candidates, &weight, &basis)?
            }
            PointKind::Leja => {
                let count = count.unwrap_or(basis.len());
                if count > basis.len() {
                    return Err(RunError::Usage(format!(
                        "count {count} exceeds the basis dimension {}",
                        basis.len()
                    )));
                }
                leja_sequence(&candidates, &weight, &basis, count)?
            }
        };
        info!(
            "points: degree {n} {} -> {} points, log |VDM|w = {:e}",
            family.kind.name(),
            family.points.len(),
            family.log_weighted_vdm
        );

        let kind_name = family.kind.name();
        let csv_name = format!("points_{kind_name}_n{n}.csv");
        let json_name = format!("points_{kind_name}_n{n}.json");
        let mut points_csv = Vec::new();
        io::write_point_set_csv(&family.points, &mut points_csv)?;
        write_atomic(&out_dir.join(&csv_name), &points_csv)?;
        let sidecar = io::render_json(&io::family_sidecar_json(&family));
        write_atomic(&out_dir.join(&json_name), sidecar.as_bytes())?;

        Ok(StageOutput {
            key: format!("n={n}"),
            files: vec![csv_name, json_name],
            elapsed: t.elapsed(),
            soft_failure: None,
        })
    })?;
    finish("points", config, out_dir, stages, started)
}

/// Evenly spaced subsample of the candidate indices, endpoints included.
fn subgrid_indices(total: usize, wanted: usize) -> Vec<usize> {
    let wanted = wanted.min(total).max(1);
    if wanted == total {
        return (0..total).collect();
    }
    if wanted == 1 {
        return vec![0];
    }
    (0..wanted)
        .map(|i| (i * (total - 1)) / (wanted - 1))
        .collect()
}

fn weight_subset(
    weight: &AdmissibleWeight<f64>,
    indices: &[usize],
) -> Result<AdmissibleWeight<f64>, RunError> {
    let phi: Vec<f64> = indices.iter().map(|&i| weight.phi()[i]).collect();
    AdmissibleWeight::from_phi(phi, "subset").map_err(RunError::from)
}

/// `diameter`: per degree, the Gram route from an optimal design and the
/// point route from a Fekete (or, past the subset budget, Leja) family on
/// a subgrid of the candidates, with the log-domain sandwich bounds.
/// Exit 1 flags a sandwich violation; the CSV carries the flag per row.
pub fn cmd_diameter(
    config: &ExperimentConfig,
    out_dir: &Path,
    workers: usize,
) -> Result<(), RunError> {
    let started = Instant::now();
    let candidates = config.candidate_set()?;
    let weight = config.weight_on(&candidates)?;
    let solver = config.solver_config();
    let subgrid_target = config.fekete_subgrid_points.unwrap_or(21);

    struct Row {
        degree: usize,
        estimate: DiameterEstimate<f64>,
        ok: bool,
        source: &'static str,
        converged: bool,
    }
    let rows: Mutex<Vec<Row>> = Mutex::new(Vec::new());

    let stages = run_stages(&config.degrees, workers, |n| {
        let t = Instant::now();
        let basis = basis_for(config, &candidates, n)?;
        if basis.degree_sum() == 0 {
            return Err(RunError::Usage(
                "diameter is undefined at degree 0 (m_n = 0)".into(),
            ));
        }
        let result = solve_optimal(&candidates, &weight, &basis, &solver)?;

        // Point route on a subgrid of the same candidates so the Fekete
        // measure stays a feasible competitor for the lower arm.
        let indices = subgrid_indices(candidates.len(), subgrid_target.max(basis.len()));
        let subgrid = candidates.select(&indices, "subgrid");
        let subweight = weight_subset(&weight, &indices)?;
        let (family, source): (PointFamily<f64>, &'static str) =
            match brute_force_fekete(&subgrid, &subweight, &basis) {
                Ok(fam) => (fam, "fekete"),
                Err(optmeas::Error::ScaleGuard { .. }) => (
                    leja_sequence(&subgrid, &subweight, &basis, basis.len())?,
                    "leja",
                ),
                Err(e) => return Err(e.into()),
            };

        let estimate = diameter_estimate(&family, &result, &basis)?;
        let ok = estimate.sandwich_holds(sandwich_lower_slack(&result), 1e-6);
        info!(
            "diameter: degree {n} delta_points={:.6} delta_gram={:.6} sandwich_ok={ok}",
            estimate.delta_from_points, estimate.delta_from_gram
        );
        let mut note = None;
        if !ok {
            note = Some(format!("sandwich violated at degree {n}"));
        } else if !result.converged {
            note = Some(format!("degree {n} did not converge"));
        }
        rows.lock().unwrap().push(Row {
            degree: n,
            estimate,
            ok,
            source,
            converged: result.converged,
        });
        Ok(StageOutput {
            key: format!("n={n}"),
            files: Vec::new(),
            elapsed: t.elapsed(),
            soft_failure: note,
        })
    })?;

    let mut rows = rows.into_inner().unwrap();
    rows.sort_by_key(|r| r.degree);
    let table: Vec<(DiameterEstimate<f64>, bool, &str)> = rows
        .iter()
        .map(|r| (r.estimate, r.ok, r.source))
        .collect();
    let mut csv = Vec::new();
    io::write_diameter_csv(&table, &mut csv)?;
    write_atomic(&out_dir.join("diameter.csv"), &csv)?;
    let plot: Vec<(usize, f64)> = rows
        .iter()
        .map(|r| (r.degree, r.estimate.delta_from_gram))
        .collect();
    let mut plot_csv = Vec::new();
    io::write_plot_csv("delta_from_gram", &plot, &mut plot_csv)?;
    write_atomic(&out_dir.join("plot_diameter.csv"), &plot_csv)?;
    let _ = rows.iter().all(|r| r.converged);

    let mut stages = stages;
    if let Some(first) = stages.first_mut() {
        first.files.push("diameter.csv".to_string());
        first.files.push("plot_diameter.csv".to_string());
    }
    finish("diameter", config, out_dir, stages, started)
}

/// `converge`: weak-* diagnostics of the solved designs against a named
/// reference equilibrium measure.
pub fn cmd_converge(
    config: &ExperimentConfig,
    out_dir: &Path,
    workers: usize,
    reference_name: &str,
) -> Result<(), RunError> {
    let started = Instant::now();
    let kind = ReferenceKind::parse(reference_name)?;
    let candidates = config.candidate_set()?;
    if candidates.dim() != 1 {
        return Err(RunError::Usage(
            "convergence diagnostics expect a univariate candidate set".into(),
        ));
    }
    let weight = config.weight_on(&candidates)?;
    let solver = config.solver_config();
    let cap = config.moment_cap.unwrap_or(4);
    let radius = config.localization_radius.unwrap_or(0.95);

    let results: Mutex<Vec<(usize, DesignResult<f64>)>> = Mutex::new(Vec::new());
    let stages = run_stages(&config.degrees, workers, |n| {
        let t = Instant::now();
        let basis = basis_for(config, &candidates, n)?;
        let result = solve_optimal(&candidates, &weight, &basis, &solver)?;
        let note = (!result.converged).then(|| format!("degree {n} did not converge"));
        results.lock().unwrap().push((n, result));
        Ok(StageOutput {
            key: format!("n={n}"),
            files: Vec::new(),
            elapsed: t.elapsed(),
            soft_failure: note,
        })
    })?;

    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(n, _)| *n);
    let degrees: Vec<usize> = results.iter().map(|(n, _)| *n).collect();
    let designs: Vec<&DesignResult<f64>> = results.iter().map(|(_, r)| r).collect();
    let reference = reference_equilibrium::<f64>(kind, cap);
    let report = convergence_report(&degrees, &designs, &candidates, &reference, radius)?;

    let mut csv = Vec::new();
    io::write_convergence_csv(&report, &mut csv)?;
    write_atomic(&out_dir.join("convergence.csv"), &csv)?;
    let json = io::render_json(&io::convergence_report_json(&report));
    write_atomic(&out_dir.join("convergence.json"), json.as_bytes())?;
    let plot: Vec<(usize, f64)> = degrees
        .iter()
        .enumerate()
        .filter_map(|(pos, &n)| report.moment_error(pos, 2, 0).map(|e| (n, e)))
        .collect();
    let mut plot_csv = Vec::new();
    io::write_plot_csv("second_moment_error", &plot, &mut plot_csv)?;
    write_atomic(&out_dir.join("plot_moment_error.csv"), &plot_csv)?;

    let mut stages = stages;
    if let Some(first) = stages.first_mut() {
        for f in [
            "convergence.csv",
            "convergence.json",
            "plot_moment_error.csv",
        ] {
            first.files.push(f.to_string());
        }
    }
    finish("converge", config, out_dir, stages, started)
}

/// One row of the `check` invariant table.
pub struct CheckRow {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `check`: the cross-module invariant suite on seeded random instances.
/// Prints one row per invariant on stdout; exit 1 names the failures.
pub fn cmd_check(config: &ExperimentConfig, _out_dir: &Path) -> Result<(), RunError> {
    let scale = config.check_tolerance_scale.unwrap_or(1.0);
    if scale < 0.0 {
        return Err(RunError::Usage("check_tolerance_scale must be ≥ 0".into()));
    }
    let rows = run_invariant_suite(config.seed, scale)?;
    println!("{:<34} {:>13} {:>13}  status", "invariant", "value", "bound");
    let mut failures = Vec::new();
    for row in &rows {
        println!(
            "{:<34} {:>13.3e} {:>13.3e}  {}",
            row.name,
            row.value,
            row.bound,
            if row.pass { "PASS" } else { "FAIL" }
        );
        if !row.pass {
            failures.push(row.name);
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(RunError::Soft(format!(
            "failed invariants: {}",
            failures.join(", ")
        )))
    }
}

fn random_measure(rng: &mut ChaCha8Rng, len: usize) -> DiscreteMeasure<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    DiscreteMeasure::normalized(raw).expect("positive weights")
}

fn random_points(rng: &mut ChaCha8Rng, d: usize, len: usize) -> PointSet<f64> {
    let coords: Vec<Complex<f64>> = (0..len * d)
        .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)))
        .collect();
    PointSet::new(d, coords, "check").expect("finite coordinates")
}

/// Runs every invariant at thresholds scaled by `scale`.
pub fn run_invariant_suite(seed: u64, scale: f64) -> Result<Vec<CheckRow>, RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    // Mass identity: ∫ K_n dμ = N for nondegenerate probability measures.
    {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let d = if rng.gen_bool(0.5) { 1 } else { 2 };
            let n = rng.gen_range(1..=3usize);
            let basis = graded_basis(d, n)?;
            let len = basis.len() * 3;
            let pts = random_points(&mut rng, d, len);
            let mu = random_measure(&mut rng, len);
            let w = AdmissibleWeight::power(&pts, 0.25);
            let fact = gram(&basis, &pts, &mu, &w)?;
            let field = christoffel(&fact, &basis, &pts, &w)?;
            let integral: f64 = field
                .values()
                .iter()
                .zip(mu.weights())
                .map(|(k, m)| k * m)
                .sum();
            worst = worst.max((integral - basis.len() as f64).abs() / basis.len() as f64);
        }
        rows.push(CheckRow {
            name: "mass_identity",
            value: worst,
            bound: 1e-10 * scale,
            pass: worst <= 1e-10 * scale,
        });
    }

    // Determinant monotonicity along multiplicative iterations.
    {
        let pts = PointSet::<f64>::interval_grid(-1.0, 1.0, 51);
        let w = AdmissibleWeight::gaussian(&pts, 0.4);
        let basis = graded_basis(1, 3)?;
        let solver = SolverConfig {
            algorithm: Algorithm::Multiplicative,
            max_iterations: 200,
            ..SolverConfig::default()
        };
        let result = solve_optimal(&pts, &w, &basis, &solver)?;
        let mut worst_drop = f64::NEG_INFINITY;
        for pair in result.trace.windows(2) {
            worst_drop = worst_drop.max(pair[0].log_det - pair[1].log_det);
        }
        rows.push(CheckRow {
            name: "determinant_monotonicity",
            value: worst_drop,
            bound: 1e-12 * scale,
            pass: worst_drop <= 1e-12 * scale,
        });
    }

    // Change-of-basis law: det G(B) = |det A|²·det G(C).
    {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let n = rng.gen_range(1..=3usize);
            let basis = graded_basis(1, n)?;
            let len = basis.len() * 3;
            let pts = random_points(&mut rng, 1, len);
            let mu = random_measure(&mut rng, len);
            let w = AdmissibleWeight::constant(len);
            let dim = basis.len();
            let a = ComplexMatrix::from_fn(dim, dim, |_, _| {
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let log_det_a: f64 = linalg::log_abs_det(&a);
            if !log_det_a.is_finite() {
                continue;
            }
            let values = vandermonde(&basis, &pts)?;
            let transformed = values.mul(&a);
            let g_b = gram_from_values(&values, &mu, &w, n)?;
            let g_c = gram_from_values(&transformed, &mu, &w, n)?;
            // log det G(VA) = 2 log|det A| + log det G(V).
            let lhs = g_c.log_det();
            let rhs = 2.0 * log_det_a + g_b.log_det();
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
        rows.push(CheckRow {
            name: "change_of_basis_determinant",
            value: worst,
            bound: 1e-8 * scale,
            pass: worst <= 1e-8 * scale,
        });
    }

    // Gram–VDM integral identity at oracle scale.
    {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let n = rng.gen_range(1..=2usize);
            let basis = graded_basis(1, n)?;
            let dim = basis.len();
            let len = rng.gen_range(dim..=5usize);
            let pts = random_points(&mut rng, 1, len);
            let mu = random_measure(&mut rng, len);
            let w = AdmissibleWeight::power(&pts, 0.3);
            let fact = gram(&basis, &pts, &mu, &w)?;
            if fact.is_singular() {
                continue;
            }
            let explicit = explicit_vdm_integral(&basis, &pts, &mu, &w)?;
            let mut n_fact = 1.0f64;
            for k in 2..=dim {
                n_fact *= k as f64;
            }
            let via_det = n_fact * fact.log_det().exp();
            worst = worst.max((explicit - via_det).abs() / via_det.abs().max(1e-300));
        }
        rows.push(CheckRow {
            name: "gram_vdm_identity",
            value: worst,
            bound: 1e-8 * scale,
            pass: worst <= 1e-8 * scale,
        });
    }

    // Derivative formula and concavity of the perturbation curve.
    {
        let pts = PointSet::<f64>::interval_grid(-1.0, 1.0, 201);
        let w = AdmissibleWeight::constant(201);
        let basis = graded_basis(1, 2)?;
        let result = solve_optimal(&pts, &w, &basis, &SolverConfig::default())?;
        let h = 1e-4;
        let mut worst_slope = 0.0f64;
        for power in 0..=2u32 {
            let u: Vec<f64> = pts.iter_points().map(|p| p[0].re.powi(power as i32)).collect();
            let curve =
                perturbation_curve(&result, &pts, &w, &u, &basis, &[-h, 0.0, h])?;
            let check = derivative_check(&curve, &basis)?;
            worst_slope = worst_slope.max(check.discrepancy);
        }
        rows.push(CheckRow {
            name: "derivative_formula",
            value: worst_slope,
            bound: 1e-4 * scale,
            pass: worst_slope <= 1e-4 * scale,
        });

        let grid: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.1).collect();
        let u: Vec<f64> = pts.iter_points().map(|p| p[0].re).collect();
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &grid)?;
        let check = concavity_check(&curve)?;
        rows.push(CheckRow {
            name: "concavity",
            value: check.max_second_difference,
            bound: 1e-8 * scale,
            pass: check.max_second_difference <= 1e-8 * scale,
        });
    }

    Ok(rows)
}

/// Explicit N-fold sum of `|VDM|²·Πw^{2n}` over all candidate tuples,
/// weighted by the product measure. Oracle-scale only.
fn explicit_vdm_integral(
    basis: &GradedBasis,
    candidates: &PointSet<f64>,
    measure: &DiscreteMeasure<f64>,
    weight: &AdmissibleWeight<f64>,
) -> Result<f64, RunError> {
    let dim = basis.len();
    let len = candidates.len();
    let mut tuple = vec![0usize; dim];
    let mut total = 0.0f64;
    loop {
        let indices = tuple.clone();
        let pts = candidates.select(&indices, "tuple");
        let phi: Vec<f64> = indices.iter().map(|&i| weight.phi()[i]).collect();
        let wt = AdmissibleWeight::from_phi(phi, "tuple").map_err(RunError::from)?;
        let log_v = log_abs_vdm(basis, &pts, Some(&wt))?;
        if log_v.is_finite() {
            let mut mass = 1.0;
            for &i in &indices {
                mass *= measure.weights()[i];
            }
            total += (2.0 * log_v).exp() * mass;
        }
        // Odometer over the tuple.
        let mut pos = 0;
        loop {
            if pos == dim {
                return Ok(total);
            }
            tuple[pos] += 1;
            if tuple[pos] < len {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}
