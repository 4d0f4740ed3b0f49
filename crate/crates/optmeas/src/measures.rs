//! Discrete probability measures on candidate sets, admissible weights,
//! weighted Gram matrices with a stable factorization, and Christoffel
//! function evaluation.
//!
//! The weight enters every kernel as `phi = -log w`, with `w^{2n}` formed
//! per point in the log domain — raw powers of `w` underflow for moderate
//! degrees. Orthonormalization goes through a Householder triangularization
//! of the weighted, measure-scaled evaluation matrix rather than through a
//! factorization of the Gram matrix itself, which halves the condition
//! number exponent for monomial bases.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::poly_basis::{evaluate_basis, vandermonde, GradedBasis, PointSet};
use crate::scalar::{real, real_of_usize, Real};

/// Relative pivot floor below which a measure counts as degenerate.
const PIVOT_RELATIVE_FLOOR: f64 = 1e-13;
/// Candidate weights below this carry no mass when assembling the
/// evaluation matrix.
const SUPPORT_FLOOR: f64 = 1e-14;
/// Slack allowed on the total mass of a probability measure.
const MASS_SLACK: f64 = 1e-12;

/// Tabulated admissible weight: `phi(x_i) = -log w(x_i)` per candidate
/// point, with `+inf` encoding `w = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleWeight<R> {
    phi: Vec<R>,
    label: String,
}

impl<R: Real> AdmissibleWeight<R> {
    /// Builds a weight from tabulated `phi` values. `-inf` and NaN entries
    /// are rejected (`w` must be finite); `+inf` is allowed and encodes a
    /// zero weight.
    pub fn from_phi(phi: Vec<R>, label: impl Into<String>) -> Result<Self> {
        if phi
            .iter()
            .any(|p| p.is_nan() || *p == R::neg_infinity())
        {
            return Err(Error::InvalidWeight);
        }
        Ok(Self {
            phi,
            label: label.into(),
        })
    }

    /// `w ≡ 1`, i.e. `phi ≡ 0`.
    pub fn constant(len: usize) -> Self {
        Self {
            phi: vec![R::zero(); len],
            label: "constant".into(),
        }
    }

    /// Gaussian-type weight `phi = c·|z|²`.
    pub fn gaussian(points: &PointSet<R>, c: R) -> Self {
        let phi = (0..points.len()).map(|i| c * points.norm_sqr(i)).collect();
        Self {
            phi,
            label: format!("gaussian({c})"),
        }
    }

    /// Power-type weight `phi = a·log(1 + |z|²)`.
    pub fn power(points: &PointSet<R>, a: R) -> Self {
        let phi = (0..points.len())
            .map(|i| a * (R::one() + points.norm_sqr(i)).ln())
            .collect();
        Self {
            phi,
            label: format!("power({a})"),
        }
    }

    pub fn phi(&self) -> &[R] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `w(x_i)^{k·n} = exp(-k·n·phi_i)` with the convention `w^0 ≡ 1`.
    #[inline]
    pub fn weight_pow(&self, i: usize, n: usize, k: usize) -> R {
        weight_pow(self.phi[i], n, k)
    }
}

/// `exp(-k·n·phi)` with `w^0 ≡ 1` even where `w = 0`.
#[inline]
pub(crate) fn weight_pow<R: Real>(phi: R, n: usize, k: usize) -> R {
    if n == 0 || k == 0 {
        return R::one();
    }
    if phi == R::infinity() {
        return R::zero();
    }
    (-real_of_usize::<R>(n * k) * phi).exp()
}

/// Nonnegative probability weights over a candidate point set.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<R> {
    weights: Vec<R>,
}

impl<R: Real> DiscreteMeasure<R> {
    /// Validates nonnegativity and total mass 1 (within `1e-12`).
    pub fn new(weights: Vec<R>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < R::zero()) {
            return Err(Error::InvalidMeasure(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let mass: R = weights.iter().copied().sum();
        if (mass - R::one()).abs() > real(MASS_SLACK) {
            return Err(Error::InvalidMeasure(format!(
                "total mass {mass} is not 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Rescales arbitrary nonnegative weights to total mass 1.
    pub fn normalized(weights: Vec<R>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < R::zero()) {
            return Err(Error::InvalidMeasure(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let mass: R = weights.iter().copied().sum();
        if mass <= R::zero() {
            return Err(Error::InvalidMeasure("total mass is zero".into()));
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w / mass).collect(),
        })
    }

    pub fn uniform(len: usize) -> Self {
        let w = R::one() / real_of_usize(len);
        Self {
            weights: vec![w; len],
        }
    }

    /// Uniform mass over the given candidate indices, zero elsewhere.
    pub fn uniform_on(len: usize, indices: &[usize]) -> Self {
        let mut weights = vec![R::zero(); len];
        let w = R::one() / real_of_usize(indices.len());
        for &i in indices {
            weights[i] = weights[i] + w;
        }
        Self { weights }
    }

    pub fn dirac(len: usize, at: usize) -> Self {
        let mut weights = vec![R::zero(); len];
        weights[at] = R::one();
        Self { weights }
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> R {
        self.weights.iter().copied().sum()
    }

    /// Indices with weight strictly above `threshold`.
    pub fn support_indices(&self, threshold: R) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > threshold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Weighted Gram matrix of the basis with its stable factorization.
///
/// `ortho_coeffs` is the upper triangular `C` with `q_j = Σ_i C_ij p_i`
/// orthonormal in the weighted inner product; it is absent when the measure
/// is degenerate on the polynomial space, in which case `log_det` is `-inf`.
#[derive(Clone, Debug)]
pub struct GramFactorization<R> {
    gram: ComplexMatrix<R>,
    log_det: R,
    ortho_coeffs: Option<ComplexMatrix<R>>,
    degree: usize,
}

impl<R: Real> GramFactorization<R> {
    pub fn gram(&self) -> &ComplexMatrix<R> {
        &self.gram
    }

    pub fn log_det(&self) -> R {
        self.log_det
    }

    pub fn ortho_coeffs(&self) -> Option<&ComplexMatrix<R>> {
        self.ortho_coeffs.as_ref()
    }

    pub fn is_singular(&self) -> bool {
        self.ortho_coeffs.is_none()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis_len(&self) -> usize {
        self.gram.rows()
    }
}

/// Weighted inner product `Σ_i f_i · conj(g_i) · w^{2n}(x_i) · μ_i`.
/// Terms with `phi = +inf` contribute zero regardless of `f` and `g`.
pub fn weighted_inner_product<R: Real>(
    f_values: &[Complex<R>],
    g_values: &[Complex<R>],
    measure: &DiscreteMeasure<R>,
    weight: &AdmissibleWeight<R>,
    n: usize,
) -> Result<Complex<R>> {
    let len = measure.len();
    if f_values.len() != len || g_values.len() != len || weight.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: f_values.len().min(g_values.len()).min(weight.len()),
        });
    }
    let mut acc = Complex::new(R::zero(), R::zero());
    for i in 0..len {
        let mu = measure.weights()[i];
        if mu == R::zero() {
            continue;
        }
        let w2n = weight.weight_pow(i, n, 2);
        if w2n == R::zero() {
            continue;
        }
        acc = acc + f_values[i] * g_values[i].conj() * (w2n * mu);
    }
    Ok(acc)
}

/// Weighted Gram matrix of the basis under `measure`, via Householder
/// triangularization of the row-scaled Vandermonde matrix. Degeneracy is
/// encoded, not raised: a measure supported inside an algebraic variety of
/// the basis degree yields `log_det = -inf` and no orthonormalization.
pub fn gram<R: Real>(
    basis: &GradedBasis,
    candidates: &PointSet<R>,
    measure: &DiscreteMeasure<R>,
    weight: &AdmissibleWeight<R>,
) -> Result<GramFactorization<R>> {
    let vdm = vandermonde(basis, candidates)?;
    gram_from_vandermonde(basis, &vdm, measure, weight)
}

/// [`gram`] with a precomputed Vandermonde matrix over the candidates.
pub fn gram_from_vandermonde<R: Real>(
    basis: &GradedBasis,
    vdm: &ComplexMatrix<R>,
    measure: &DiscreteMeasure<R>,
    weight: &AdmissibleWeight<R>,
) -> Result<GramFactorization<R>> {
    if vdm.cols() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: vdm.cols(),
        });
    }
    gram_from_values(vdm, measure, weight, basis.degree())
}

/// Gram factorization of arbitrary function-value columns: row `i` of
/// `values` holds the functions evaluated at candidate `i`. This is the
/// general entry point behind [`gram`]; it also serves basis-change
/// experiments where the columns are not monomials.
pub fn gram_from_values<R: Real>(
    values: &ComplexMatrix<R>,
    measure: &DiscreteMeasure<R>,
    weight: &AdmissibleWeight<R>,
    degree: usize,
) -> Result<GramFactorization<R>> {
    let m = values.rows();
    let n = values.cols();
    if measure.len() != m || weight.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: measure.len().min(weight.len()),
        });
    }
    if measure.support_indices(R::zero()).is_empty() {
        return Err(Error::InvalidMeasure("measure has empty support".into()));
    }

    let support_floor = real::<R>(SUPPORT_FLOOR);
    let mut rows: Vec<usize> = Vec::new();
    let mut scales: Vec<R> = Vec::new();
    for i in 0..m {
        let mu = measure.weights()[i];
        if mu <= support_floor {
            continue;
        }
        let wn = weight.weight_pow(i, degree, 1);
        if wn == R::zero() {
            continue;
        }
        rows.push(i);
        scales.push(mu.sqrt() * wn);
    }

    let mut b = ComplexMatrix::zeros(rows.len(), n);
    for (r, (&i, &s)) in rows.iter().zip(&scales).enumerate() {
        for (out, &v) in b.row_mut(r).iter_mut().zip(values.row(i)) {
            *out = v * s;
        }
    }
    let gram = b.hermitian_gram();

    if rows.len() < n {
        return Ok(GramFactorization {
            gram,
            log_det: R::neg_infinity(),
            ortho_coeffs: None,
            degree,
        });
    }

    let r = linalg::householder_triangular(&b);
    let mut max_pivot = R::zero();
    let mut min_pivot = R::infinity();
    for k in 0..n {
        let p = r.get(k, k).re;
        max_pivot = max_pivot.max(p);
        min_pivot = min_pivot.min(p);
    }
    if min_pivot <= real::<R>(PIVOT_RELATIVE_FLOOR) * max_pivot {
        return Ok(GramFactorization {
            gram,
            log_det: R::neg_infinity(),
            ortho_coeffs: None,
            degree,
        });
    }

    let mut log_det = R::zero();
    for k in 0..n {
        log_det += r.get(k, k).re.ln();
    }
    let log_det = log_det + log_det;
    let coeffs = linalg::invert_upper_triangular(&r);
    Ok(GramFactorization {
        gram,
        log_det,
        ortho_coeffs: Some(coeffs),
        degree,
    })
}

/// Pointwise Christoffel function values over an evaluation set, with max
/// and argmax (ties resolved to the lowest index). `basis_len` is the
/// kernel dimension `N`.
#[derive(Clone, Debug)]
pub struct ChristoffelField<R> {
    values: Vec<R>,
    max_value: R,
    argmax_index: usize,
    basis_len: usize,
}

impl<R: Real> ChristoffelField<R> {
    pub(crate) fn from_values(values: Vec<R>, basis_len: usize) -> Self {
        let mut max_value = R::neg_infinity();
        let mut argmax_index = 0;
        for (i, &v) in values.iter().enumerate() {
            if v > max_value {
                max_value = v;
                argmax_index = i;
            }
        }
        Self {
            values,
            max_value,
            argmax_index,
            basis_len,
        }
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn max_value(&self) -> R {
        self.max_value
    }

    pub fn argmax_index(&self) -> usize {
        self.argmax_index
    }

    pub fn basis_len(&self) -> usize {
        self.basis_len
    }
}

/// Weighted Christoffel function `K_n(x) = Σ_j |q_j(x)|² w^{2n}(x)` over an
/// evaluation point set; `weight` must be tabulated on those points.
pub fn christoffel<R: Real>(
    fact: &GramFactorization<R>,
    basis: &GradedBasis,
    eval_points: &PointSet<R>,
    weight: &AdmissibleWeight<R>,
) -> Result<ChristoffelField<R>> {
    let vdm = vandermonde(basis, eval_points)?;
    christoffel_from_vandermonde(fact, &vdm, weight)
}

/// [`christoffel`] with a precomputed Vandermonde matrix of the evaluation
/// points.
pub fn christoffel_from_vandermonde<R: Real>(
    fact: &GramFactorization<R>,
    vdm: &ComplexMatrix<R>,
    weight: &AdmissibleWeight<R>,
) -> Result<ChristoffelField<R>> {
    let coeffs = fact.ortho_coeffs().ok_or(Error::DegenerateMeasure {
        degree: fact.degree(),
    })?;
    let n_basis = coeffs.rows();
    if vdm.cols() != n_basis {
        return Err(Error::LengthMismatch {
            expected: n_basis,
            got: vdm.cols(),
        });
    }
    if weight.len() != vdm.rows() {
        return Err(Error::LengthMismatch {
            expected: vdm.rows(),
            got: weight.len(),
        });
    }

    let mut values = vec![R::zero(); vdm.rows()];
    for (i, out) in values.iter_mut().enumerate() {
        let w2n = weight.weight_pow(i, fact.degree(), 2);
        if w2n == R::zero() {
            continue;
        }
        let row = vdm.row(i);
        let mut acc = R::zero();
        // q_j(x) = Σ_i C_ij p_i(x); C is upper triangular.
        for j in 0..n_basis {
            let mut q = Complex::new(R::zero(), R::zero());
            for (k, &p) in row.iter().enumerate().take(j + 1) {
                q = q + p * coeffs.get(k, j);
            }
            acc += q.norm_sqr();
        }
        *out = acc * w2n;
    }
    Ok(ChristoffelField::from_values(values, n_basis))
}

/// Cross-check route for the Christoffel function through the Gram inverse:
/// `w^{2n}(x) · P(x)^* G^{-1} P(x)`. Kept independent of the
/// orthonormalization path so the two can be tested against each other.
pub fn christoffel_via_inverse<R: Real>(
    fact: &GramFactorization<R>,
    basis: &GradedBasis,
    point: &[Complex<R>],
    phi_at_point: R,
) -> Result<R> {
    if fact.is_singular() {
        return Err(Error::DegenerateMeasure {
            degree: fact.degree(),
        });
    }
    let w2n = weight_pow(phi_at_point, fact.degree(), 2);
    if w2n == R::zero() {
        return Ok(R::zero());
    }
    let p = evaluate_basis(basis, point)?;
    let n = p.len();
    let rhs = ComplexMatrix::from_fn(n, 1, |i, _| p[i]);
    let lu = linalg::lu_decompose(fact.gram());
    let y = lu
        .solve(&rhs)
        .map_err(|_| Error::DegenerateMeasure {
            degree: fact.degree(),
        })?;
    let mut acc = Complex::new(R::zero(), R::zero());
    for i in 0..n {
        acc = acc + p[i].conj() * y.get(i, 0);
    }
    Ok(acc.re * w2n)
}

/// Best constant `C` with `‖p‖_K ≤ C·‖p‖_{L²(μ,w)}`: the square root of the
/// Christoffel max over the evaluation set.
pub fn bernstein_markov_factor<R: Real>(
    fact: &GramFactorization<R>,
    basis: &GradedBasis,
    eval_points: &PointSet<R>,
    weight: &AdmissibleWeight<R>,
) -> Result<R> {
    let field = christoffel(fact, basis, eval_points, weight)?;
    Ok(field.max_value().sqrt())
}
