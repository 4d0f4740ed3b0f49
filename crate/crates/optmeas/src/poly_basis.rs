//! Graded monomial bases of the polynomials of degree at most `n` in `d`
//! complex variables, point evaluation, and Vandermonde assembly.
//!
//! The basis is ordered by total degree, lexicographically within each
//! degree, so `deg p_i <= deg p_j` whenever `i <= j` and results are
//! reproducible across runs.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::measures::AdmissibleWeight;
use crate::scalar::Real;

/// Exponent vector of a monomial in `d` variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    total_degree: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let total_degree = exponents.iter().sum();
        Self {
            exponents,
            total_degree,
        }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn total_degree(&self) -> u32 {
        self.total_degree
    }

    pub fn vars(&self) -> usize {
        self.exponents.len()
    }

    /// Evaluates the monomial `z^alpha` at a point.
    pub fn evaluate<R: Real>(&self, point: &[Complex<R>]) -> Result<Complex<R>> {
        if point.len() != self.exponents.len() {
            return Err(Error::DimensionMismatch {
                expected: self.exponents.len(),
                got: point.len(),
            });
        }
        let mut acc = Complex::new(R::one(), R::zero());
        for (z, &e) in point.iter().zip(&self.exponents) {
            acc = acc * z.powu(e);
        }
        Ok(acc)
    }
}

/// Ordered monomial basis of the polynomials of degree at most `n` in `d`
/// variables. `len()` is the space dimension `N = C(d+n, n)`; `degree_sum()`
/// is `m_n = d·n·N/(d+1)`, the sum of the degrees of all `N` monomials.
#[derive(Clone, Debug)]
pub struct GradedBasis {
    vars: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    degree_sum: u64,
}

/// Builds the graded monomial basis for `d ≥ 1` variables and degree `n`.
pub fn graded_basis(d: usize, n: usize) -> Result<GradedBasis> {
    if d == 0 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    let dim = binomial(d as u128 + n as u128, n as u128)
        .ok_or(Error::BasisTooLarge { d, n })?;
    // Guard against pathological sizes before allocating d*N exponents.
    if dim > 1_000_000 {
        return Err(Error::BasisTooLarge { d, n });
    }
    let dim = dim as usize;

    let mut indices = Vec::with_capacity(dim);
    let mut scratch = vec![0u32; d];
    for k in 0..=n {
        push_degree_block(&mut indices, &mut scratch, 0, k as u32, d);
    }
    debug_assert_eq!(indices.len(), dim);

    let degree_sum: u128 = indices.iter().map(|ix| ix.total_degree() as u128).sum();
    // Closed form m_n = d n N / (d+1); the degree sum must match exactly.
    let closed = (d as u128) * (n as u128) * (dim as u128);
    debug_assert_eq!(closed % (d as u128 + 1), 0);
    debug_assert_eq!(degree_sum, closed / (d as u128 + 1));
    let degree_sum = u64::try_from(degree_sum).map_err(|_| Error::BasisTooLarge { d, n })?;

    Ok(GradedBasis {
        vars: d,
        degree: n,
        indices,
        degree_sum,
    })
}

/// Emits all exponent vectors of total degree `remaining` over coordinates
/// `from..d`, in ascending lexicographic order.
fn push_degree_block(
    out: &mut Vec<MultiIndex>,
    scratch: &mut Vec<u32>,
    from: usize,
    remaining: u32,
    d: usize,
) {
    if from == d - 1 {
        scratch[from] = remaining;
        out.push(MultiIndex::new(scratch.clone()));
        return;
    }
    for e in 0..=remaining {
        scratch[from] = e;
        push_degree_block(out, scratch, from + 1, remaining - e, d);
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

impl GradedBasis {
    /// Number of variables `d`.
    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Maximum total degree `n`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Space dimension `N`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Sum of the total degrees of all basis monomials, `m_n`.
    pub fn degree_sum(&self) -> u64 {
        self.degree_sum
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Evaluates all `N` basis monomials at a point, caching coordinate
    /// powers so a full sweep costs `O(d·n + N·d)` multiplies.
    pub fn evaluate_into<R: Real>(
        &self,
        point: &[Complex<R>],
        out: &mut [Complex<R>],
    ) -> Result<()> {
        if point.len() != self.vars {
            return Err(Error::DimensionMismatch {
                expected: self.vars,
                got: point.len(),
            });
        }
        if out.len() != self.indices.len() {
            return Err(Error::LengthMismatch {
                expected: self.indices.len(),
                got: out.len(),
            });
        }
        let one = Complex::new(R::one(), R::zero());
        // powers[j][k] = point[j]^k for k = 0..=n
        let mut powers = Vec::with_capacity(self.vars);
        for &z in point {
            let mut col = Vec::with_capacity(self.degree + 1);
            let mut p = one;
            for _ in 0..=self.degree {
                col.push(p);
                p = p * z;
            }
            powers.push(col);
        }
        for (slot, ix) in out.iter_mut().zip(&self.indices) {
            let mut acc = one;
            for (j, &e) in ix.exponents().iter().enumerate() {
                if e > 0 {
                    acc = acc * powers[j][e as usize];
                }
            }
            *slot = acc;
        }
        Ok(())
    }
}

/// Evaluates all basis monomials at one point.
pub fn evaluate_basis<R: Real>(
    basis: &GradedBasis,
    point: &[Complex<R>],
) -> Result<Vec<Complex<R>>> {
    let mut out = vec![Complex::new(R::zero(), R::zero()); basis.len()];
    basis.evaluate_into(point, &mut out)?;
    Ok(out)
}

/// A finite list of points in `ℂ^d`. Real domains embed with zero imaginary
/// parts.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet<R> {
    dim: usize,
    coords: Vec<Complex<R>>,
    label: String,
}

impl<R: Real> PointSet<R> {
    /// Builds a point set from flat coordinates (`dim` entries per point).
    pub fn new(dim: usize, coords: Vec<Complex<R>>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("point dimension must be ≥ 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinitePoint);
        }
        Ok(Self {
            dim,
            coords,
            label: label.into(),
        })
    }

    pub fn from_points(points: &[Vec<Complex<R>>], label: impl Into<String>) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords, label)
    }

    /// Univariate real grid of `count` equispaced points on `[a, b]`.
    pub fn interval_grid(a: R, b: R, count: usize) -> Self {
        assert!(count >= 1);
        let mut coords = Vec::with_capacity(count);
        if count == 1 {
            coords.push(Complex::new(a, R::zero()));
        } else {
            let step = (b - a) / R::from_usize(count - 1).unwrap();
            for i in 0..count {
                coords.push(Complex::new(a + step * R::from_usize(i).unwrap(), R::zero()));
            }
        }
        Self {
            dim: 1,
            coords,
            label: "interval".into(),
        }
    }

    /// Polar grid of the closed unit disk in `ℂ`: `radial × angular` points
    /// with radii `(i+1)/radial`, so the boundary circle is included.
    pub fn disk_grid(radial: usize, angular: usize) -> Self {
        assert!(radial >= 1 && angular >= 1);
        let mut coords = Vec::with_capacity(radial * angular);
        let tau = R::from_f64(std::f64::consts::TAU).unwrap();
        for i in 0..radial {
            let r = R::from_usize(i + 1).unwrap() / R::from_usize(radial).unwrap();
            for j in 0..angular {
                let theta = tau * R::from_usize(j).unwrap() / R::from_usize(angular).unwrap();
                coords.push(Complex::new(r * theta.cos(), r * theta.sin()));
            }
        }
        Self {
            dim: 1,
            coords,
            label: "disk".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn point(&self, i: usize) -> &[Complex<R>] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[Complex<R>]> {
        self.coords.chunks(self.dim)
    }

    /// New point set from a subset of indices, preserving order.
    pub fn select(&self, indices: &[usize], label: impl Into<String>) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self {
            dim: self.dim,
            coords,
            label: label.into(),
        }
    }

    /// Squared Euclidean norm of point `i`.
    pub fn norm_sqr(&self, i: usize) -> R {
        self.point(i).iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Vandermonde matrix: entry `(j, i)` is the `i`-th basis monomial evaluated
/// at the `j`-th point.
pub fn vandermonde<R: Real>(
    basis: &GradedBasis,
    points: &PointSet<R>,
) -> Result<ComplexMatrix<R>> {
    if points.dim() != basis.vars() {
        return Err(Error::DimensionMismatch {
            expected: basis.vars(),
            got: points.dim(),
        });
    }
    let n = basis.len();
    let mut m = ComplexMatrix::zeros(points.len(), n);
    for (j, pt) in points.iter_points().enumerate() {
        basis.evaluate_into(pt, m.row_mut(j))?;
    }
    Ok(m)
}

/// `log(|VDM(z_1,…,z_N)| · w^n(z_1)⋯w^n(z_N))`, computed entirely in the
/// log domain; `-inf` encodes a degenerate configuration. Requires exactly
/// `N` points. Pass `None` for the unweighted value.
pub fn log_abs_vdm<R: Real>(
    basis: &GradedBasis,
    points: &PointSet<R>,
    weight: Option<&AdmissibleWeight<R>>,
) -> Result<R> {
    if points.len() != basis.len() {
        return Err(Error::LengthMismatch {
            expected: basis.len(),
            got: points.len(),
        });
    }
    log_abs_vdm_prefix(basis, points, weight, basis.len())
}

/// Same as [`log_abs_vdm`] but on the leading `count × count` block: the
/// first `count` points against the first `count` basis monomials. Used to
/// cross-check Leja prefixes.
pub fn log_abs_vdm_prefix<R: Real>(
    basis: &GradedBasis,
    points: &PointSet<R>,
    weight: Option<&AdmissibleWeight<R>>,
    count: usize,
) -> Result<R> {
    if count > basis.len() || count > points.len() {
        return Err(Error::LengthMismatch {
            expected: count,
            got: basis.len().min(points.len()),
        });
    }
    if points.dim() != basis.vars() {
        return Err(Error::DimensionMismatch {
            expected: basis.vars(),
            got: points.dim(),
        });
    }
    if let Some(w) = weight {
        if w.len() != points.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                got: w.len(),
            });
        }
    }

    let mut square = ComplexMatrix::zeros(count, count);
    let mut row = vec![Complex::new(R::zero(), R::zero()); basis.len()];
    for j in 0..count {
        basis.evaluate_into(points.point(j), &mut row)?;
        square.row_mut(j).copy_from_slice(&row[..count]);
    }
    let log_det = linalg::log_abs_det(&square);
    if log_det == R::neg_infinity() {
        return Ok(R::neg_infinity());
    }

    let mut weight_term = R::zero();
    if let Some(w) = weight {
        let n = R::from_usize(basis.degree()).unwrap();
        for j in 0..count {
            let phi = w.phi()[j];
            if phi == R::infinity() {
                return Ok(R::neg_infinity());
            }
            weight_term += n * phi;
        }
    }
    Ok(log_det - weight_term)
}
