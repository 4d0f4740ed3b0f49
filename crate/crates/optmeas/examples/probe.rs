use std::time::Instant;
use optmeas::design_solver::{solve_optimal, SolverConfig};
use optmeas::measures::AdmissibleWeight;
use optmeas::poly_basis::{graded_basis, PointSet};

fn main() {
    // Acceptance 1 scale: 2001-point interval grid, n = 1..8, tol 1e-6.
    let pts = PointSet::<f64>::interval_grid(-1.0, 1.0, 2001);
    let w = AdmissibleWeight::constant(2001);
    let t0 = Instant::now();
    for n in 1..=8usize {
        let basis = graded_basis(1, n).unwrap();
        let t = Instant::now();
        let r = solve_optimal(&pts, &w, &basis, &SolverConfig::default()).unwrap();
        println!("n={n} conv={} iters={} gap={:.2e} logdet={:.6} dt={:.2?}",
            r.converged, r.iterations, r.kw_gap, r.log_det, t.elapsed());
    }
    println!("interval total: {:.2?}", t0.elapsed());

    // Acceptance 11 scale: disk 25x64, n=8.
    let disk = PointSet::<f64>::disk_grid(25, 64);
    let wd = AdmissibleWeight::constant(disk.len());
    let basis = graded_basis(1, 8).unwrap();
    let t = Instant::now();
    let r = solve_optimal(&disk, &wd, &basis, &SolverConfig::default()).unwrap();
    let mass_outer: f64 = r.measure.weights().iter().enumerate()
        .filter(|(i, _)| disk.norm_sqr(*i).sqrt() >= 0.95)
        .map(|(_, w)| w).sum();
    let zmom: num_complex::Complex<f64> = r.measure.weights().iter().enumerate()
        .map(|(i, &w)| disk.point(i)[0] * w).sum();
    println!("disk n=8 conv={} iters={} gap={:.2e} mass(|z|>=0.95)={:.4} |int z|={:.2e} dt={:.2?}",
        r.converged, r.iterations, r.kw_gap, mass_outer, zmom.norm(), t.elapsed());

    // Acceptance 10 scale: degrees up to 20 on a 513 grid, tol 1e-5.
    let pts5 = PointSet::<f64>::interval_grid(-1.0, 1.0, 513);
    let w5 = AdmissibleWeight::constant(513);
    for n in [4usize, 8, 12, 16, 20] {
        let basis = graded_basis(1, n).unwrap();
        let config = SolverConfig { tolerance: 1e-5, ..Default::default() };
        let t = Instant::now();
        let r = solve_optimal(&pts5, &w5, &basis, &config).unwrap();
        let two_m = 2.0 * basis.degree_sum() as f64;
        println!("n={n} conv={} iters={} gap={:.2e} delta_gram={:.5} dt={:.2?}",
            r.converged, r.iterations, r.kw_gap, (r.log_det / two_m).exp(), t.elapsed());
    }
}
