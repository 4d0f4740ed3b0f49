//! Dense complex linear algebra for small matrices.
//!
//! Everything here operates on row-major [`ComplexMatrix`] values. The two
//! factorizations the rest of the crate is built on:
//!
//! * Householder triangularization of a tall matrix, returning only the
//!   triangular factor with nonnegative real diagonal (the orthogonal factor
//!   is never formed);
//! * LU with partial pivoting, used for log-modulus determinants and for
//!   linear solves against square systems.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{real, Real};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> ComplexMatrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(R::zero(), R::zero()); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<R>>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged rows");
            data.extend(row);
        }
        Self {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex::new(R::one(), R::zero())
            } else {
                Complex::new(R::zero(), R::zero())
            }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<R> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<R>) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<R>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex<R>] {
        &self.data
    }

    /// `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.re == R::zero() && a.im == R::zero() {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Hermitian product `self^* self` (an `cols × cols` matrix).
    pub fn hermitian_gram(&self) -> Self {
        let n = self.cols;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex::new(R::zero(), R::zero());
                for k in 0..self.rows {
                    acc = acc + self.get(k, i).conj() * self.get(k, j);
                }
                out.set(i, j, acc);
                if i != j {
                    out.set(j, i, acc.conj());
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> R {
        self.data
            .iter()
            .map(|c| c.norm())
            .fold(R::zero(), R::max)
    }
}

/// Triangular factor of a Householder QR, with nonnegative real diagonal.
///
/// For `a` of shape `m × n` with `m ≥ n`, returns the `n × n` upper
/// triangular `R` with `a = Q R` for some matrix `Q` with orthonormal
/// columns. The diagonal is scaled to be real and nonnegative, which makes
/// the factor unique whenever `a` has full column rank.
pub fn householder_triangular<R: Real>(a: &ComplexMatrix<R>) -> ComplexMatrix<R> {
    let m = a.rows();
    let n = a.cols();
    assert!(m >= n, "householder_triangular expects a tall matrix");
    let zero = Complex::new(R::zero(), R::zero());
    let mut w = a.clone();

    for k in 0..n {
        // Column norm below the diagonal.
        let mut norm_sq = R::zero();
        for i in k..m {
            norm_sq += w.get(i, k).norm_sqr();
        }
        let norm = norm_sq.sqrt();
        if norm == R::zero() {
            continue;
        }
        let akk = w.get(k, k);
        let phase = if akk == zero {
            Complex::new(R::one(), R::zero())
        } else {
            akk / Complex::new(akk.norm(), R::zero())
        };
        let alpha = -phase * norm;

        // Reflector v = x - alpha e1, stored in place of the column.
        let vkk = akk - alpha;
        let mut vnorm_sq = vkk.norm_sqr();
        for i in (k + 1)..m {
            vnorm_sq += w.get(i, k).norm_sqr();
        }
        if vnorm_sq == R::zero() {
            w.set(k, k, alpha);
            continue;
        }
        w.set(k, k, vkk);

        let two = real::<R>(2.0);
        for j in (k + 1)..n {
            let mut dot = Complex::new(R::zero(), R::zero());
            for i in k..m {
                dot = dot + w.get(i, k).conj() * w.get(i, j);
            }
            let scale = dot * (two / vnorm_sq);
            for i in k..m {
                let v = w.get(i, k);
                let cur = w.get(i, j);
                w.set(i, j, cur - v * scale);
            }
        }
        w.set(k, k, alpha);
        for i in (k + 1)..m {
            w.set(i, k, zero);
        }
    }

    // Extract the leading n × n triangle and normalize the diagonal phase.
    let mut r = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let d = w.get(k, k);
        let dn = d.norm();
        let s = if dn == R::zero() {
            Complex::new(R::one(), R::zero())
        } else {
            d.conj() / Complex::new(dn, R::zero())
        };
        for j in k..n {
            r.set(k, j, w.get(k, j) * s);
        }
        r.set(k, k, Complex::new(dn, R::zero()));
    }
    r
}

/// LU factorization with partial pivoting, kept in packed form.
pub struct LuFactors<R> {
    lu: ComplexMatrix<R>,
    perm: Vec<usize>,
    /// Smallest and largest pivot modulus seen.
    pub min_pivot: R,
    pub max_pivot: R,
}

pub fn lu_decompose<R: Real>(a: &ComplexMatrix<R>) -> LuFactors<R> {
    assert_eq!(a.rows(), a.cols(), "LU expects a square matrix");
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_pivot = R::infinity();
    let mut max_pivot = R::zero();

    for k in 0..n {
        // Partial pivoting on modulus.
        let mut best = k;
        let mut best_abs = lu.get(k, k).norm();
        for i in (k + 1)..n {
            let v = lu.get(i, k).norm();
            if v > best_abs {
                best_abs = v;
                best = i;
            }
        }
        if best != k {
            perm.swap(k, best);
            for j in 0..n {
                let tmp = lu.get(k, j);
                lu.set(k, j, lu.get(best, j));
                lu.set(best, j, tmp);
            }
        }
        let pivot = lu.get(k, k);
        let pivot_abs = pivot.norm();
        min_pivot = min_pivot.min(pivot_abs);
        max_pivot = max_pivot.max(pivot_abs);
        if pivot_abs == R::zero() {
            continue;
        }
        for i in (k + 1)..n {
            let factor = lu.get(i, k) / pivot;
            lu.set(i, k, factor);
            if factor.re == R::zero() && factor.im == R::zero() {
                continue;
            }
            for j in (k + 1)..n {
                let cur = lu.get(i, j);
                lu.set(i, j, cur - factor * lu.get(k, j));
            }
        }
    }

    if n == 0 {
        min_pivot = R::zero();
    }
    LuFactors {
        lu,
        perm,
        min_pivot,
        max_pivot,
    }
}

impl<R: Real> LuFactors<R> {
    /// `log |det A|`; `-inf` when some pivot is exactly zero.
    pub fn log_abs_det(&self) -> R {
        let n = self.lu.rows();
        let mut acc = R::zero();
        for k in 0..n {
            let p = self.lu.get(k, k).norm();
            if p == R::zero() {
                return R::neg_infinity();
            }
            acc += p.ln();
        }
        acc
    }

    pub fn is_singular(&self) -> bool {
        self.min_pivot == R::zero()
            || (self.max_pivot > R::zero()
                && self.min_pivot < real::<R>(1e-13) * self.max_pivot)
    }

    /// Solves `A x = b` for each column of `b`.
    pub fn solve(&self, b: &ComplexMatrix<R>) -> Result<ComplexMatrix<R>> {
        if self.is_singular() {
            return Err(Error::SingularNodes);
        }
        let n = self.lu.rows();
        assert_eq!(b.rows(), n, "rhs row count differs");
        let ncols = b.cols();
        let mut x = ComplexMatrix::zeros(n, ncols);

        // Apply the permutation, then forward/back substitution.
        for c in 0..ncols {
            for i in 0..n {
                x.set(i, c, b.get(self.perm[i], c));
            }
            for i in 0..n {
                let mut acc = x.get(i, c);
                for j in 0..i {
                    acc = acc - self.lu.get(i, j) * x.get(j, c);
                }
                x.set(i, c, acc);
            }
            for i in (0..n).rev() {
                let mut acc = x.get(i, c);
                for j in (i + 1)..n {
                    acc = acc - self.lu.get(i, j) * x.get(j, c);
                }
                x.set(i, c, acc / self.lu.get(i, i));
            }
        }
        Ok(x)
    }
}

/// `log |det A|` of a square matrix; `-inf` for exactly singular input.
pub fn log_abs_det<R: Real>(a: &ComplexMatrix<R>) -> R {
    lu_decompose(a).log_abs_det()
}

/// Inverse of an upper triangular matrix with nonzero diagonal.
pub fn invert_upper_triangular<R: Real>(r: &ComplexMatrix<R>) -> ComplexMatrix<R> {
    let n = r.rows();
    assert_eq!(n, r.cols(), "triangular inverse expects a square matrix");
    let mut inv = ComplexMatrix::zeros(n, n);
    let one = Complex::new(R::one(), R::zero());
    for j in (0..n).rev() {
        inv.set(j, j, one / r.get(j, j));
        for i in (0..j).rev() {
            let mut acc = Complex::new(R::zero(), R::zero());
            for k in (i + 1)..=j {
                acc = acc + r.get(i, k) * inv.get(k, j);
            }
            inv.set(i, j, -acc / r.get(i, i));
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    fn approx(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn householder_reproduces_gram() {
        // Random-ish fixed 5x3 complex matrix; R^* R must equal A^* A.
        let a = ComplexMatrix::from_fn(5, 3, |i, j| {
            let x = ((i * 7 + j * 3 + 1) % 11) as f64 / 11.0;
            let y = ((i * 5 + j * 2 + 4) % 13) as f64 / 13.0 - 0.5;
            c(x, y)
        });
        let r = householder_triangular(&a);
        let g = a.hermitian_gram();
        let g2 = r.conj_transpose().mul(&r);
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    approx(g.get(i, j), g2.get(i, j), 1e-12),
                    "gram mismatch at ({i},{j}): {:?} vs {:?}",
                    g.get(i, j),
                    g2.get(i, j)
                );
            }
        }
        // Diagonal is real and nonnegative.
        for k in 0..3 {
            assert!(r.get(k, k).im == 0.0 && r.get(k, k).re >= 0.0);
        }
    }

    #[test]
    fn lu_det_of_known_matrix() {
        // det [[1, 2], [3, 4]] = -2
        let a = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(3.0, 0.0), c(4.0, 0.0)],
        ]);
        let lad = log_abs_det(&a);
        assert!((lad - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn lu_detects_exact_singularity() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(1.0, 0.0), c(2.0, 0.0)],
        ]);
        assert_eq!(log_abs_det(&a), f64::NEG_INFINITY);
    }

    #[test]
    fn lu_solve_round_trip() {
        let a = ComplexMatrix::from_rows(vec![
            vec![c(2.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
            vec![c(0.5, 0.0), c(3.0, 0.0), c(-1.0, 2.0)],
            vec![c(1.0, -1.0), c(0.0, 0.0), c(4.0, 0.0)],
        ]);
        let b = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0)],
            vec![c(0.0, 1.0)],
            vec![c(2.0, -1.0)],
        ]);
        let lu = lu_decompose(&a);
        let x = lu.solve(&b).unwrap();
        let back = a.mul(&x);
        for i in 0..3 {
            assert!(approx(back.get(i, 0), b.get(i, 0), 1e-12));
        }
    }

    #[test]
    fn triangular_inverse() {
        let r = ComplexMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(1.0, 1.0), c(0.0, -2.0)],
            vec![c(0.0, 0.0), c(1.5, 0.0), c(3.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        ]);
        let inv = invert_upper_triangular(&r);
        let prod = r.mul(&inv);
        let id = ComplexMatrix::identity(3);
        for i in 0..3 {
            for j in 0..3 {
                assert!(approx(prod.get(i, j), id.get(i, j), 1e-12));
            }
        }
    }
}
