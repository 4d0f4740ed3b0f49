use optmeas::design_solver::{solve_optimal, SolverConfig};
use optmeas::measures::{AdmissibleWeight, gram, christoffel};
use optmeas::poly_basis::{graded_basis, PointSet};

fn main() {
    let m = 201usize;
    let pts = PointSet::<f64>::interval_grid(-1.0, 1.0, m);
    let w = AdmissibleWeight::constant(m);
    let basis = graded_basis(1, 3).unwrap();
    let config = SolverConfig { max_iterations: 50_000, ..Default::default() };
    let r = solve_optimal(&pts, &w, &basis, &config).unwrap();
    println!("n=3 M={m} conv={} iters={} gap={:.3e}", r.converged, r.iterations, r.kw_gap);
    let k = r.trace.len();
    for t in r.trace[k.saturating_sub(8)..].iter() {
        println!("  iter {:6} gap {:+.6e}", t.iteration, t.kw_gap);
    }
    let fact = gram(&basis, &pts, &r.measure, &w).unwrap();
    let field = christoffel(&fact, &basis, &pts, &w).unwrap();
    let h = 2.0 / (m as f64 - 1.0);
    let mut rows: Vec<(usize, f64, f64)> = r.measure.weights().iter().enumerate()
        .filter(|(_, &wt)| wt > 1e-10)
        .map(|(i, &wt)| (i, wt, field.values()[i])).collect();
    rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    println!("support: {} nodes; N = {}", rows.len(), basis.len());
    for (i, wt, k) in rows.iter().take(12) {
        println!("  x={:+.4} w={:.3e} K={:.8} (K-N)/N={:+.2e}", -1.0 + *i as f64 * h, wt, k, (k - basis.len() as f64)/basis.len() as f64);
    }
    let (am, mk) = field.values().iter().enumerate().fold((0usize, 0.0f64), |acc, (i, &v)| if v > acc.1 {(i, v)} else {acc});
    println!("argmax x={:+.4} K={:.8} w={:.3e}", -1.0 + am as f64 * h, mk, r.measure.weights()[am]);
}
