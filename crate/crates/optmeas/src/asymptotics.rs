//! Transfinite-diameter estimation along two routes, perturbation curves of
//! the log-determinant functional with derivative and concavity checks, and
//! weak-* convergence diagnostics against reference equilibrium measures.

use num_complex::Complex;

use crate::design_solver::DesignResult;
use crate::error::{Error, Result};
use crate::measures::{gram_from_vandermonde, AdmissibleWeight, DiscreteMeasure};
use crate::poly_basis::{vandermonde, GradedBasis, PointSet};
use crate::scalar::{real, real_of_usize, Real};

/// Per-degree transfinite-diameter estimate. The two routes: `exp(log
/// weighted VDM / m_n)` from an extremal point family, and
/// `exp(log det G / (2 m_n))` from an optimal design. The sandwich fields
/// bound `log det G` between `2 m_n log δ̂ - N log N` and
/// `2 m_n log δ̂ - log N!` (kept in the log domain; raw determinants
/// overflow long before interesting degrees).
#[derive(Clone, Copy, Debug)]
pub struct DiameterEstimate<R> {
    pub degree: usize,
    pub delta_from_points: R,
    pub delta_from_gram: R,
    pub log_det: R,
    pub log_sandwich_lo: R,
    pub log_sandwich_hi: R,
}

impl<R: Real> DiameterEstimate<R> {
    /// Whether `log_sandwich_lo ≤ log_det ≤ log_sandwich_hi` holds.
    ///
    /// `lower_slack` absorbs the solver's suboptimality on the lower arm —
    /// the duality bound gives `log det(G_opt) - log det(G) ≤ kw_gap` in
    /// nats, so `kw_gap + 1e-9` is a certified choice. `upper_rel` is a
    /// multiplicative slack on the upper arm.
    pub fn sandwich_holds(&self, lower_slack: R, upper_rel: R) -> bool {
        self.log_sandwich_lo <= self.log_det + lower_slack
            && self.log_det <= self.log_sandwich_hi + upper_rel.ln_1p()
    }
}

/// Certified lower-arm slack for [`DiameterEstimate::sandwich_holds`].
pub fn sandwich_lower_slack<R: Real>(result: &DesignResult<R>) -> R {
    result.kw_gap.max(R::zero()) + real(1e-9)
}

/// `δ̂_n = exp(log_weighted_vdm / m_n)` from an extremal point family.
pub fn delta_n_from_points<R: Real>(
    family: &crate::extremal_points::PointFamily<R>,
    basis: &GradedBasis,
) -> Result<R> {
    if basis.degree_sum() == 0 {
        return Err(Error::ZeroDegreeSum);
    }
    if family.points.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: family.points.len(),
        });
    }
    let m = R::from_u64(basis.degree_sum()).unwrap();
    Ok((family.log_weighted_vdm / m).exp())
}

/// `δ̂_n = exp(log det G / (2 m_n))` from a solved optimal design, with the
/// standard monomial basis.
pub fn delta_n_from_gram<R: Real>(result: &DesignResult<R>, basis: &GradedBasis) -> Result<R> {
    if basis.degree_sum() == 0 {
        return Err(Error::ZeroDegreeSum);
    }
    let two_m = real::<R>(2.0) * R::from_u64(basis.degree_sum()).unwrap();
    Ok((result.log_det / two_m).exp())
}

/// Assembles the two routes and the sandwich bounds for one degree.
/// `family` supplies `δ̂_n` (brute-force Fekete when affordable, Leja
/// otherwise); `result` supplies the Gram determinant.
pub fn diameter_estimate<R: Real>(
    family: &crate::extremal_points::PointFamily<R>,
    result: &DesignResult<R>,
    basis: &GradedBasis,
) -> Result<DiameterEstimate<R>> {
    let delta_from_points = delta_n_from_points(family, basis)?;
    let delta_from_gram = delta_n_from_gram(result, basis)?;
    let n = basis.len();
    let n_real = real_of_usize::<R>(n);
    let mut log_factorial = R::zero();
    for k in 2..=n {
        log_factorial += real_of_usize::<R>(k).ln();
    }
    let two_log_vdm = family.log_weighted_vdm + family.log_weighted_vdm;
    Ok(DiameterEstimate {
        degree: basis.degree(),
        delta_from_points,
        delta_from_gram,
        log_det: result.log_det,
        log_sandwich_lo: two_log_vdm - n_real * n_real.ln(),
        log_sandwich_hi: two_log_vdm - log_factorial,
    })
}

/// Samples of `f_n(t) = -(1/2m_n)·log det G_n^{μ,w_t}` for the perturbed
/// weight `φ_t = φ + t·u`, at a fixed design measure. Entries where the
/// perturbed Gram is singular carry `+inf`.
#[derive(Clone, Debug)]
pub struct PerturbationCurve<R> {
    pub t_grid: Vec<R>,
    pub f_values: Vec<R>,
    pub u_values: Vec<R>,
    pub measure: DiscreteMeasure<R>,
    pub degree: usize,
    pub vars: usize,
}

/// Evaluates the perturbation curve of a fixed design along direction `u`
/// (tabulated on the candidates).
pub fn perturbation_curve<R: Real>(
    result: &DesignResult<R>,
    candidates: &PointSet<R>,
    weight: &AdmissibleWeight<R>,
    u_values: &[R],
    basis: &GradedBasis,
    t_grid: &[R],
) -> Result<PerturbationCurve<R>> {
    if basis.degree_sum() == 0 {
        return Err(Error::ZeroDegreeSum);
    }
    let m = candidates.len();
    if u_values.len() != m || weight.len() != m || result.measure.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: u_values.len().min(weight.len()).min(result.measure.len()),
        });
    }
    let vdm = vandermonde(basis, candidates)?;
    let two_m = real::<R>(2.0) * R::from_u64(basis.degree_sum()).unwrap();
    let mut f_values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let phi_t: Vec<R> = weight
            .phi()
            .iter()
            .zip(u_values)
            .map(|(&p, &u)| if p == R::infinity() { p } else { p + t * u })
            .collect();
        let wt = AdmissibleWeight::from_phi(phi_t, "perturbed")?;
        let fact = gram_from_vandermonde(basis, &vdm, &result.measure, &wt)?;
        f_values.push(-fact.log_det() / two_m);
    }
    Ok(PerturbationCurve {
        t_grid: t_grid.to_vec(),
        f_values,
        u_values: u_values.to_vec(),
        measure: result.measure.clone(),
        degree: basis.degree(),
        vars: basis.vars(),
    })
}

/// Central-difference slope of the curve at `t = 0` against the closed-form
/// slope `((d+1)/d)·∫u dμ` of an optimal design.
#[derive(Clone, Copy, Debug)]
pub struct DerivativeCheck<R> {
    pub fd_slope: R,
    pub formula_slope: R,
    pub discrepancy: R,
}

pub fn derivative_check<R: Real>(
    curve: &PerturbationCurve<R>,
    basis: &GradedBasis,
) -> Result<DerivativeCheck<R>> {
    if basis.vars() != curve.vars || basis.degree() != curve.degree {
        return Err(Error::InvalidArgument(
            "basis does not match the curve".into(),
        ));
    }
    let grid = &curve.t_grid;
    let scale = grid
        .iter()
        .fold(R::zero(), |acc, &t| acc.max(t.abs()))
        .max(R::one());
    let i0 = grid
        .iter()
        .position(|&t| t.abs() <= real::<R>(1e-12) * scale)
        .ok_or(Error::MissingStencil)?;
    if i0 == 0 || i0 + 1 >= grid.len() {
        return Err(Error::MissingStencil);
    }
    let h = grid[i0 + 1] - grid[i0];
    let h_back = grid[i0] - grid[i0 - 1];
    if (h - h_back).abs() > real::<R>(1e-9) * h.abs() {
        return Err(Error::MissingStencil);
    }
    let f_plus = curve.f_values[i0 + 1];
    let f_minus = curve.f_values[i0 - 1];
    if !f_plus.is_finite() || !f_minus.is_finite() {
        return Err(Error::MissingStencil);
    }
    let fd_slope = (f_plus - f_minus) / (h + h);

    let d = real_of_usize::<R>(curve.vars);
    let ratio = (d + R::one()) / d;
    let mean_u: R = curve
        .u_values
        .iter()
        .zip(curve.measure.weights())
        .map(|(&u, &mu)| u * mu)
        .sum();
    let formula_slope = ratio * mean_u;
    Ok(DerivativeCheck {
        fd_slope,
        formula_slope,
        discrepancy: (fd_slope - formula_slope).abs(),
    })
}

/// Largest centered second difference `(f(t-h) - 2f(t) + f(t+h))/h²` over
/// the interior of the grid; concavity of the curve makes it nonpositive up
/// to rounding.
#[derive(Clone, Copy, Debug)]
pub struct ConcavityCheck<R> {
    pub max_second_difference: R,
}

pub fn concavity_check<R: Real>(curve: &PerturbationCurve<R>) -> Result<ConcavityCheck<R>> {
    let grid = &curve.t_grid;
    if grid.len() < 3 {
        return Err(Error::InsufficientCurve);
    }
    let h = grid[1] - grid[0];
    if h <= R::zero() {
        return Err(Error::InsufficientCurve);
    }
    for w in grid.windows(2) {
        if ((w[1] - w[0]) - h).abs() > real::<R>(1e-9) * h {
            return Err(Error::InsufficientCurve);
        }
    }
    let mut max_second = R::neg_infinity();
    let mut seen = false;
    for i in 1..grid.len() - 1 {
        let (a, b, c) = (
            curve.f_values[i - 1],
            curve.f_values[i],
            curve.f_values[i + 1],
        );
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            continue;
        }
        seen = true;
        let second = (a - b - b + c) / (h * h);
        max_second = max_second.max(second);
    }
    if !seen {
        return Err(Error::InsufficientCurve);
    }
    Ok(ConcavityCheck {
        max_second_difference: max_second,
    })
}

/// Reference equilibrium measures with closed-form monomial moments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Arcsine density `(1/π)(1-x²)^{-1/2}` on `[-1, 1]`.
    ArcsineInterval,
    /// Normalized arclength on the unit circle (equilibrium measure of the
    /// closed unit disk — a classical potential-theory fact used as an
    /// external oracle here).
    UniformCircle,
}

impl ReferenceKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "arcsine_interval" => Ok(Self::ArcsineInterval),
            "uniform_circle" => Ok(Self::UniformCircle),
            other => Err(Error::UnsupportedReference(other.into())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ArcsineInterval => "arcsine_interval",
            Self::UniformCircle => "uniform_circle",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MomentEntry<R> {
    pub alpha: u32,
    pub beta: u32,
    pub value: Complex<R>,
}

/// Table of monomial moments `∫ z^α z̄^β dμ` of a univariate reference
/// measure, for all `α + β ≤ cap`.
#[derive(Clone, Debug)]
pub struct ReferenceMeasure<R> {
    pub kind: ReferenceKind,
    pub moments: Vec<MomentEntry<R>>,
}

pub fn reference_equilibrium<R: Real>(kind: ReferenceKind, cap: u32) -> ReferenceMeasure<R> {
    let mut moments = Vec::new();
    for total in 0..=cap {
        for alpha in (0..=total).rev() {
            let beta = total - alpha;
            let value = match kind {
                ReferenceKind::ArcsineInterval => {
                    // ∫ x^{α+β} dμ = C(α+β, (α+β)/2)/2^{α+β} for even sums.
                    if total % 2 == 0 {
                        let half = (total / 2) as u128;
                        let binom = binomial_u128(total as u128, half);
                        let value = R::from_u128(binom).unwrap()
                            / real::<R>(2.0).powi(total as i32);
                        Complex::new(value, R::zero())
                    } else {
                        Complex::new(R::zero(), R::zero())
                    }
                }
                ReferenceKind::UniformCircle => {
                    if alpha == beta {
                        Complex::new(R::one(), R::zero())
                    } else {
                        Complex::new(R::zero(), R::zero())
                    }
                }
            };
            moments.push(MomentEntry { alpha, beta, value });
        }
    }
    ReferenceMeasure { kind, moments }
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Moment `∫ z^α z̄^β dμ` of a discrete measure on a univariate candidate
/// set.
pub fn discrete_moment<R: Real>(
    measure: &DiscreteMeasure<R>,
    candidates: &PointSet<R>,
    alpha: u32,
    beta: u32,
) -> Result<Complex<R>> {
    if candidates.dim() != 1 {
        return Err(Error::InvalidArgument(
            "moment diagnostics are univariate".into(),
        ));
    }
    if measure.len() != candidates.len() {
        return Err(Error::LengthMismatch {
            expected: candidates.len(),
            got: measure.len(),
        });
    }
    let mut acc = Complex::new(R::zero(), R::zero());
    for (i, &mu) in measure.weights().iter().enumerate() {
        if mu == R::zero() {
            continue;
        }
        let z = candidates.point(i)[0];
        acc = acc + z.powu(alpha) * z.conj().powu(beta) * mu;
    }
    Ok(acc)
}

/// Weak-* convergence diagnostics: per degree, the deviation of every
/// tracked monomial moment from the reference value, plus the mass sitting
/// at `|z| ≥ localization_radius`.
#[derive(Clone, Debug)]
pub struct ConvergenceReport<R> {
    pub degrees: Vec<usize>,
    pub moment_indices: Vec<(u32, u32)>,
    /// `moment_errors[degree_position][moment_position]`.
    pub moment_errors: Vec<Vec<R>>,
    pub mass_outside_region: Vec<R>,
    pub localization_radius: R,
    pub reference_label: String,
}

impl<R: Real> ConvergenceReport<R> {
    pub fn moment_error(&self, degree_pos: usize, alpha: u32, beta: u32) -> Option<R> {
        let pos = self
            .moment_indices
            .iter()
            .position(|&(a, b)| a == alpha && b == beta)?;
        Some(self.moment_errors[degree_pos][pos])
    }
}

/// Builds the convergence report for designs sharing one candidate set.
pub fn convergence_report<R: Real>(
    degrees: &[usize],
    designs: &[&DesignResult<R>],
    candidates: &PointSet<R>,
    reference: &ReferenceMeasure<R>,
    localization_radius: R,
) -> Result<ConvergenceReport<R>> {
    if degrees.len() != designs.len() {
        return Err(Error::LengthMismatch {
            expected: degrees.len(),
            got: designs.len(),
        });
    }
    let moment_indices: Vec<(u32, u32)> = reference
        .moments
        .iter()
        .map(|m| (m.alpha, m.beta))
        .collect();
    let mut moment_errors = Vec::with_capacity(designs.len());
    let mut mass_outside = Vec::with_capacity(designs.len());
    for design in designs {
        let mut row = Vec::with_capacity(reference.moments.len());
        for entry in &reference.moments {
            let got = discrete_moment(&design.measure, candidates, entry.alpha, entry.beta)?;
            row.push((got - entry.value).norm());
        }
        moment_errors.push(row);

        let mut outside = R::zero();
        for (i, &mu) in design.measure.weights().iter().enumerate() {
            if candidates.norm_sqr(i).sqrt() >= localization_radius {
                outside += mu;
            }
        }
        mass_outside.push(outside);
    }
    Ok(ConvergenceReport {
        degrees: degrees.to_vec(),
        moment_indices,
        moment_errors,
        mass_outside_region: mass_outside,
        localization_radius,
        reference_label: reference.kind.name().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design_solver::{solve_optimal, SolverConfig};
    use crate::extremal_points::{brute_force_fekete, PointFamily};
    use crate::poly_basis::graded_basis;
    use num_complex::Complex;

    fn rc(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn real_set(xs: &[f64]) -> PointSet<f64> {
        PointSet::new(1, xs.iter().map(|&x| rc(x)).collect(), "t").unwrap()
    }

    fn family_on(xs: &[f64], degree: usize, log_vdm: f64) -> PointFamily<f64> {
        PointFamily {
            kind: crate::extremal_points::FamilyKind::Custom,
            points: real_set(xs),
            indices: (0..xs.len()).collect(),
            log_weighted_vdm: log_vdm,
            degree,
            increments: Vec::new(),
        }
    }

    #[test]
    fn delta_from_points_known_values() {
        let basis1 = graded_basis(1, 1).unwrap();
        let fam1 = family_on(&[-1.0, 1.0], 1, 2.0f64.ln());
        let d1 = delta_n_from_points(&fam1, &basis1).unwrap();
        assert!((d1 - 2.0).abs() < 1e-14);

        let basis2 = graded_basis(1, 2).unwrap();
        let fam2 = family_on(&[-1.0, 0.0, 1.0], 2, 2.0f64.ln());
        let d2 = delta_n_from_points(&fam2, &basis2).unwrap();
        assert!((d2 - 2.0f64.powf(1.0 / 3.0)).abs() < 1e-14);

        let degenerate = family_on(&[-1.0, -1.0, 1.0], 2, f64::NEG_INFINITY);
        assert_eq!(delta_n_from_points(&degenerate, &basis2).unwrap(), 0.0);
    }

    #[test]
    fn delta_undefined_at_degree_zero() {
        let basis0 = graded_basis(1, 0).unwrap();
        let fam = family_on(&[0.5], 0, 0.0);
        assert!(matches!(
            delta_n_from_points(&fam, &basis0),
            Err(Error::ZeroDegreeSum)
        ));
    }

    fn solve_interval(n: usize, points: usize) -> (GradedBasis, PointSet<f64>, AdmissibleWeight<f64>, DesignResult<f64>) {
        let basis = graded_basis(1, n).unwrap();
        let pts = PointSet::<f64>::interval_grid(-1.0, 1.0, points);
        let w = AdmissibleWeight::constant(points);
        let result = solve_optimal(&pts, &w, &basis, &SolverConfig::default()).unwrap();
        (basis, pts, w, result)
    }

    #[test]
    fn gram_route_for_degree_one_design() {
        let (basis, _pts, _w, result) = solve_interval(1, 201);
        let d = delta_n_from_gram(&result, &basis).unwrap();
        assert!((d - 1.0).abs() < 1e-4, "delta {d}");

        // Sandwich endpoints for this instance: 1 ≤ det G = 1 ≤ 2.
        let fam = family_on(&[-1.0, 1.0], 1, 2.0f64.ln());
        let est = diameter_estimate(&fam, &result, &basis).unwrap();
        assert!((est.log_sandwich_lo - 0.0).abs() < 1e-12);
        assert!((est.log_sandwich_hi - 2.0f64.ln()).abs() < 1e-12);
        assert!(est.sandwich_holds(sandwich_lower_slack(&result), 1e-6));
    }

    #[test]
    fn sandwich_holds_across_degrees() {
        let sub = PointSet::<f64>::interval_grid(-1.0, 1.0, 21);
        let wsub = AdmissibleWeight::constant(21);
        for n in 1..=4usize {
            let (basis, _pts, _w, result) = solve_interval(n, 201);
            let fam = brute_force_fekete(&sub, &wsub, &basis).unwrap();
            let est = diameter_estimate(&fam, &result, &basis).unwrap();
            assert!(
                est.sandwich_holds(sandwich_lower_slack(&result), 1e-6),
                "n={n}: lo {} det {} hi {} gap {}",
                est.log_sandwich_lo,
                est.log_det,
                est.log_sandwich_hi,
                result.kw_gap
            );
        }
    }

    #[test]
    fn constant_direction_gives_exact_linear_curve() {
        let (basis, pts, w, result) = solve_interval(2, 101);
        let c = 0.7;
        let u = vec![c; 101];
        let t_grid: Vec<f64> = (-5..=5).map(|k| k as f64 * 0.1).collect();
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
        let f0 = curve.f_values[5];
        for (i, &t) in t_grid.iter().enumerate() {
            let expect = f0 + t * c * 2.0; // (d+1)/d = 2 in one variable
            assert!(
                (curve.f_values[i] - expect).abs() < 1e-10,
                "t={t}: {} vs {expect}",
                curve.f_values[i]
            );
        }
    }

    #[test]
    fn zero_direction_gives_constant_curve() {
        let (basis, pts, w, result) = solve_interval(1, 51);
        let u = vec![0.0; 51];
        let t_grid = vec![-0.5, 0.0, 0.5];
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
        assert!((curve.f_values[0] - curve.f_values[1]).abs() < 1e-14);
        assert!((curve.f_values[2] - curve.f_values[1]).abs() < 1e-14);
    }

    #[test]
    fn odd_direction_has_zero_slope_for_symmetric_design() {
        let (basis, pts, w, result) = solve_interval(2, 101);
        let u: Vec<f64> = pts.iter_points().map(|p| p[0].re).collect();
        let h = 1e-4;
        let t_grid = vec![-h, 0.0, h];
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
        let check = derivative_check(&curve, &basis).unwrap();
        assert!(check.fd_slope.abs() < 1e-6, "fd {}", check.fd_slope);
        assert!(check.formula_slope.abs() < 1e-6);
    }

    #[test]
    fn squared_direction_slope_matches_design_moment() {
        // n = 2 optimal design is 1/3 at {-1, 0, 1}: ∫x² dμ = 2/3, so the
        // formula slope is 2·(2/3) = 4/3.
        let (basis, pts, w, result) = solve_interval(2, 201);
        let u: Vec<f64> = pts.iter_points().map(|p| p[0].re * p[0].re).collect();
        let h = 1e-4;
        let t_grid = vec![-h, 0.0, h];
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
        let check = derivative_check(&curve, &basis).unwrap();
        assert!(
            (check.formula_slope - 4.0 / 3.0).abs() < 1e-3,
            "formula {}",
            check.formula_slope
        );
        assert!(check.discrepancy < 1e-4, "fd {} formula {}", check.fd_slope, check.formula_slope);
    }

    #[test]
    fn constant_direction_slope_is_exact() {
        let (basis, pts, w, result) = solve_interval(1, 101);
        let u = vec![1.0; 101];
        let h = 1e-4;
        let t_grid = vec![-h, 0.0, h];
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
        let check = derivative_check(&curve, &basis).unwrap();
        assert!((check.formula_slope - 2.0).abs() < 1e-12);
        assert!(check.discrepancy < 1e-7);
    }

    #[test]
    fn missing_stencil_is_an_error() {
        let (basis, pts, w, result) = solve_interval(1, 51);
        let u = vec![1.0; 51];
        let t_grid = vec![0.0, 0.1, 0.2];
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
        assert!(matches!(
            derivative_check(&curve, &basis),
            Err(Error::MissingStencil)
        ));
    }

    #[test]
    fn concavity_of_linear_curve_is_exact_zero() {
        let (basis, pts, w, result) = solve_interval(1, 51);
        let u = vec![0.3; 51];
        let t_grid: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.1).collect();
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
        let check = concavity_check(&curve).unwrap();
        assert!(
            check.max_second_difference.abs() < 1e-8,
            "second difference {}",
            check.max_second_difference
        );
    }

    #[test]
    fn concavity_along_polynomial_directions() {
        let (basis, pts, w, result) = solve_interval(4, 201);
        let t_grid: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.1).collect();
        for power in [1u32, 2] {
            let u: Vec<f64> = pts.iter_points().map(|p| p[0].re.powi(power as i32)).collect();
            let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
            let check = concavity_check(&curve).unwrap();
            assert!(
                check.max_second_difference <= 1e-8,
                "u = x^{power}: {}",
                check.max_second_difference
            );
        }
    }

    #[test]
    fn concavity_needs_three_finite_samples() {
        let curve = PerturbationCurve {
            t_grid: vec![-0.1, 0.0, 0.1],
            f_values: vec![f64::INFINITY, 1.0, f64::INFINITY],
            u_values: vec![0.0],
            measure: DiscreteMeasure::uniform(1),
            degree: 1,
            vars: 1,
        };
        assert!(matches!(
            concavity_check(&curve),
            Err(Error::InsufficientCurve)
        ));
    }

    #[test]
    fn f_zero_matches_log_det_route() {
        let (basis, pts, w, result) = solve_interval(3, 101);
        let u: Vec<f64> = pts.iter_points().map(|p| p[0].re).collect();
        let t_grid = vec![-0.1, 0.0, 0.1];
        let curve = perturbation_curve(&result, &pts, &w, &u, &basis, &t_grid).unwrap();
        let two_m = 2.0 * basis.degree_sum() as f64;
        assert!((curve.f_values[1] - (-result.log_det / two_m)).abs() < 1e-12);
    }

    #[test]
    fn arcsine_moments_match_chebyshev_quadrature() {
        // Gauss–Chebyshev quadrature is exact on polynomials of degree
        // < 2K, so it is an independent oracle for the closed forms.
        let reference = reference_equilibrium::<f64>(ReferenceKind::ArcsineInterval, 6);
        let quad_nodes = 32usize;
        let quad = |p: u32| -> f64 {
            let mut acc = 0.0;
            for k in 0..quad_nodes {
                let theta = (2.0 * k as f64 + 1.0) * std::f64::consts::PI
                    / (2.0 * quad_nodes as f64);
                acc += theta.cos().powi(p as i32);
            }
            acc / quad_nodes as f64
        };
        for entry in &reference.moments {
            let expect = quad(entry.alpha + entry.beta);
            assert!(
                (entry.value.re - expect).abs() < 1e-14,
                "({},{}) closed {} vs quad {expect}",
                entry.alpha,
                entry.beta,
                entry.value.re
            );
            assert_eq!(entry.value.im, 0.0);
        }
        // Frozen values from the quadrature oracle.
        let get = |a: u32, b: u32| {
            reference
                .moments
                .iter()
                .find(|m| m.alpha == a && m.beta == b)
                .unwrap()
                .value
                .re
        };
        assert_eq!(get(2, 0), 0.5);
        assert_eq!(get(4, 0), 0.375);
        assert_eq!(get(3, 0), 0.0);
        assert_eq!(get(0, 0), 1.0);
    }

    #[test]
    fn circle_moments_are_kronecker() {
        let reference = reference_equilibrium::<f64>(ReferenceKind::UniformCircle, 4);
        for entry in &reference.moments {
            let expect = if entry.alpha == entry.beta { 1.0 } else { 0.0 };
            assert_eq!(entry.value.re, expect);
            assert_eq!(entry.value.im, 0.0);
        }
    }

    #[test]
    fn reference_kind_parsing() {
        assert_eq!(
            ReferenceKind::parse("arcsine_interval").unwrap(),
            ReferenceKind::ArcsineInterval
        );
        assert_eq!(
            ReferenceKind::parse("uniform_circle").unwrap(),
            ReferenceKind::UniformCircle
        );
        assert!(matches!(
            ReferenceKind::parse("lemniscate"),
            Err(Error::UnsupportedReference(_))
        ));
    }

    #[test]
    fn interval_moments_approach_arcsine() {
        let pts = PointSet::<f64>::interval_grid(-1.0, 1.0, 301);
        let w = AdmissibleWeight::constant(301);
        let reference = reference_equilibrium(ReferenceKind::ArcsineInterval, 4);
        let degrees = [2usize, 4, 8];
        let mut designs = Vec::new();
        for &n in &degrees {
            let basis = graded_basis(1, n).unwrap();
            designs.push(solve_optimal(&pts, &w, &basis, &SolverConfig::default()).unwrap());
        }
        let refs: Vec<&DesignResult<f64>> = designs.iter().collect();
        let report =
            convergence_report(&degrees, &refs, &pts, &reference, 0.95).unwrap();
        let errs: Vec<f64> = (0..degrees.len())
            .map(|i| report.moment_error(i, 2, 0).unwrap())
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        // Mass moment is exact for probability measures.
        for i in 0..degrees.len() {
            assert!(report.moment_error(i, 0, 0).unwrap() < 1e-12);
        }
    }
}
