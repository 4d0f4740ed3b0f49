//! Competing extremal point families: brute-force Fekete points (a
//! test-scale oracle), greedy Leja sequences, Lagrange bases, Lebesgue
//! constants, and Fejér sums.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::measures::{AdmissibleWeight, DiscreteMeasure};
use crate::poly_basis::{log_abs_vdm_prefix, vandermonde, GradedBasis, PointSet};
use crate::scalar::{real_of_usize, Real};

/// Subset budget for the exhaustive Fekete search.
pub const BRUTE_FORCE_BUDGET: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    FeketeBruteForce,
    Leja,
    Custom,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::FeketeBruteForce => "fekete_bruteforce",
            FamilyKind::Leja => "leja",
            FamilyKind::Custom => "custom",
        }
    }
}

/// A constructed point family with its weighted Vandermonde modulus in the
/// log domain. `indices` locate the points inside the generating candidate
/// set; `increments` holds the per-point log pivot gains for greedy
/// constructions (empty otherwise).
#[derive(Clone, Debug)]
pub struct PointFamily<R> {
    pub kind: FamilyKind,
    pub points: PointSet<R>,
    pub indices: Vec<usize>,
    pub log_weighted_vdm: R,
    pub degree: usize,
    pub increments: Vec<R>,
}

/// Exhaustively maximizes the weighted Vandermonde modulus over all
/// `N`-subsets of the candidates. Ties resolve to the lexicographically
/// smallest index tuple. Refuses to run past [`BRUTE_FORCE_BUDGET`]
/// subsets — this operation is an oracle, not a production path.
pub fn brute_force_fekete<R: Real>(
    candidates: &PointSet<R>,
    weight: &AdmissibleWeight<R>,
    basis: &GradedBasis,
) -> Result<PointFamily<R>> {
    let m = candidates.len();
    let n = basis.len();
    if weight.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: weight.len(),
        });
    }
    if m < n {
        return Err(Error::Admissibility(format!(
            "{m} candidates cannot yield {n} Fekete points"
        )));
    }
    let subsets = binomial_u128(m as u128, n as u128).unwrap_or(u128::MAX);
    if subsets > BRUTE_FORCE_BUDGET {
        return Err(Error::ScaleGuard {
            subsets,
            budget: BRUTE_FORCE_BUDGET,
        });
    }

    let vdm = vandermonde(basis, candidates)?;
    let deg = real_of_usize::<R>(basis.degree());
    // Per-point weighted log factor, -inf where w = 0.
    let log_w: Vec<R> = weight
        .phi()
        .iter()
        .map(|&p| {
            if p == R::infinity() {
                R::neg_infinity()
            } else {
                -deg * p
            }
        })
        .collect();

    let mut combo: Vec<usize> = (0..n).collect();
    let mut best_log = R::neg_infinity();
    let mut best: Option<Vec<usize>> = None;
    let mut square = ComplexMatrix::zeros(n, n);
    loop {
        let mut wsum = R::zero();
        for &i in &combo {
            wsum += log_w[i];
        }
        if wsum != R::neg_infinity() {
            for (r, &i) in combo.iter().enumerate() {
                square.row_mut(r).copy_from_slice(vdm.row(i));
            }
            let value = linalg::log_abs_det(&square) + wsum;
            if value > best_log {
                best_log = value;
                best = Some(combo.clone());
            }
        }
        if !next_combination(&mut combo, m) {
            break;
        }
    }

    let indices = best.ok_or(Error::Admissibility(
        "every candidate subset is degenerate".into(),
    ))?;
    if best_log == R::neg_infinity() {
        return Err(Error::Admissibility(
            "every candidate subset is degenerate".into(),
        ));
    }
    let points = candidates.select(&indices, "fekete");
    Ok(PointFamily {
        kind: FamilyKind::FeketeBruteForce,
        points,
        indices,
        log_weighted_vdm: best_log,
        degree: basis.degree(),
        increments: Vec::new(),
    })
}

fn next_combination(combo: &mut [usize], m: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] != i + m - k {
            combo[i] += 1;
            for j in (i + 1)..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// Greedy Leja sequence of `count ≤ N` points: each new point maximizes the
/// incremental weighted Vandermonde modulus. The increments come from a row
/// elimination sweep, never from re-formed determinants, so a step costs
/// `O(M·count)`.
///
/// The first point maximizes `w^n(x)`; ties there resolve to the larger
/// point modulus and then to the lexicographically larger coordinate tuple
/// (so `+1` beats `-1` on a symmetric grid). Later ties resolve to the
/// lowest candidate index.
pub fn leja_sequence<R: Real>(
    candidates: &PointSet<R>,
    weight: &AdmissibleWeight<R>,
    basis: &GradedBasis,
    count: usize,
) -> Result<PointFamily<R>> {
    let m = candidates.len();
    if weight.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: weight.len(),
        });
    }
    if count == 0 || count > basis.len() {
        return Err(Error::InvalidArgument(format!(
            "count {count} must lie in 1..=N ({})",
            basis.len()
        )));
    }
    if count > m {
        return Err(Error::Admissibility(format!(
            "{m} candidates cannot yield {count} Leja points"
        )));
    }

    let full = vandermonde(basis, candidates)?;
    let deg = basis.degree();
    // Row-scaled working matrix over the first `count` basis columns.
    let mut work = ComplexMatrix::zeros(m, count);
    for i in 0..m {
        let wn = weight.weight_pow(i, deg, 1);
        for (j, slot) in work.row_mut(i).iter_mut().enumerate() {
            *slot = full.get(i, j) * wn;
        }
    }

    let mut available = vec![true; m];
    let mut indices = Vec::with_capacity(count);
    let mut increments = Vec::with_capacity(count);
    let mut total = R::zero();

    for step in 0..count {
        let sel = if step == 0 {
            select_first_point(candidates, &work)
        } else {
            let mut best: Option<(usize, R)> = None;
            for i in 0..m {
                if !available[i] {
                    continue;
                }
                let v = work.get(i, step).norm();
                if best.map_or(true, |(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
            best.map(|(i, _)| i)
        };
        let Some(sel) = sel else {
            return Err(Error::DegenerateFamily);
        };
        let pivot = work.get(sel, step);
        let pivot_abs = pivot.norm();
        if pivot_abs == R::zero() {
            return Err(Error::DegenerateFamily);
        }
        available[sel] = false;
        indices.push(sel);
        increments.push(pivot_abs.ln());
        total += pivot_abs.ln();

        // Eliminate the pivot column from every remaining row.
        for i in 0..m {
            if !available[i] {
                continue;
            }
            let factor = work.get(i, step) / pivot;
            if factor.re == R::zero() && factor.im == R::zero() {
                continue;
            }
            for j in (step + 1)..count {
                let cur = work.get(i, j);
                work.set(i, j, cur - factor * work.get(sel, j));
            }
            work.set(i, step, Complex::new(R::zero(), R::zero()));
        }
    }

    let points = candidates.select(&indices, "leja");
    Ok(PointFamily {
        kind: FamilyKind::Leja,
        points,
        indices,
        log_weighted_vdm: total,
        degree: deg,
        increments,
    })
}

/// Argmax of `w^n(x)·|p_1(x)| = w^n(x)`, with deterministic tie-breaking:
/// larger squared point norm first, then the lexicographically larger
/// coordinate tuple.
fn select_first_point<R: Real>(
    candidates: &PointSet<R>,
    work: &ComplexMatrix<R>,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    for i in 0..candidates.len() {
        let v = work.get(i, 0).norm();
        let Some(b) = best else {
            best = Some(i);
            continue;
        };
        let bv = work.get(b, 0).norm();
        if v > bv {
            best = Some(i);
            continue;
        }
        if v < bv {
            continue;
        }
        let ni = candidates.norm_sqr(i);
        let nb = candidates.norm_sqr(b);
        if ni > nb {
            best = Some(i);
            continue;
        }
        if ni < nb {
            continue;
        }
        if lex_greater(candidates.point(i), candidates.point(b)) {
            best = Some(i);
        }
    }
    best
}

fn lex_greater<R: Real>(a: &[Complex<R>], b: &[Complex<R>]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x.re != y.re {
            return x.re > y.re;
        }
        if x.im != y.im {
            return x.im > y.im;
        }
    }
    false
}

/// Equal-weight measure `(1/len)·Σ δ` at the family's points, embedded back
/// into the candidate index space of `candidate_count` points.
pub fn fekete_measure<R: Real>(
    family: &PointFamily<R>,
    candidate_count: usize,
) -> Result<DiscreteMeasure<R>> {
    if family.indices.iter().any(|&i| i >= candidate_count) {
        return Err(Error::InvalidArgument(
            "family index outside the candidate set".into(),
        ));
    }
    Ok(DiscreteMeasure::uniform_on(candidate_count, &family.indices))
}

/// Fundamental Lagrange polynomials of a unisolvent node set, expressed in
/// the graded monomial basis: column `i` of `coefficients` holds `ℓ_i`.
#[derive(Clone, Debug)]
pub struct LagrangeBasis<R> {
    nodes: PointSet<R>,
    coefficients: ComplexMatrix<R>,
    basis: GradedBasis,
}

impl<R: Real> LagrangeBasis<R> {
    pub fn nodes(&self) -> &PointSet<R> {
        &self.nodes
    }

    pub fn coefficients(&self) -> &ComplexMatrix<R> {
        &self.coefficients
    }

    pub fn basis(&self) -> &GradedBasis {
        &self.basis
    }

    /// Values `ℓ_1(z), …, ℓ_N(z)` at one point.
    pub fn evaluate(&self, point: &[Complex<R>]) -> Result<Vec<Complex<R>>> {
        let p = crate::poly_basis::evaluate_basis(&self.basis, point)?;
        let n = self.coefficients.rows();
        let mut out = vec![Complex::new(R::zero(), R::zero()); n];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex::new(R::zero(), R::zero());
            for (k, &pk) in p.iter().enumerate() {
                acc = acc + pk * self.coefficients.get(k, j);
            }
            *slot = acc;
        }
        Ok(out)
    }

    /// `mesh.len() × N` matrix of Lagrange values over a mesh.
    pub fn evaluate_on(&self, mesh: &PointSet<R>) -> Result<ComplexMatrix<R>> {
        let vdm = vandermonde(&self.basis, mesh)?;
        Ok(vdm.mul(&self.coefficients))
    }
}

/// Solves `V·L = I` for the Lagrange coefficients of the given nodes.
pub fn lagrange_basis<R: Real>(
    nodes: &PointSet<R>,
    basis: &GradedBasis,
) -> Result<LagrangeBasis<R>> {
    let n = basis.len();
    if nodes.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: nodes.len(),
        });
    }
    let vdm = vandermonde(basis, nodes)?;
    let lu = linalg::lu_decompose(&vdm);
    if lu.is_singular() {
        return Err(Error::SingularNodes);
    }
    let coefficients = lu.solve(&ComplexMatrix::identity(n))?;
    Ok(LagrangeBasis {
        nodes: nodes.clone(),
        coefficients,
        basis: basis.clone(),
    })
}

/// Lebesgue constant estimate `max_{z ∈ mesh} Σ_k |ℓ_k(z)|`. The maximum is
/// taken over the supplied mesh only, so refinement studies stay
/// reproducible.
pub fn lebesgue_constant<R: Real>(lb: &LagrangeBasis<R>, mesh: &PointSet<R>) -> Result<R> {
    if mesh.is_empty() {
        return Err(Error::InvalidArgument("mesh must be nonempty".into()));
    }
    let values = lb.evaluate_on(mesh)?;
    let mut best = R::zero();
    for i in 0..values.rows() {
        let s: R = values.row(i).iter().map(|v| v.norm()).sum();
        best = best.max(s);
    }
    Ok(best)
}

/// Fejér objective `max_{z ∈ mesh} Σ_k |ℓ_k(z)|²`. Multiplying by `N` gives
/// the Christoffel max of the equal-weight node measure.
pub fn fejer_sum<R: Real>(lb: &LagrangeBasis<R>, mesh: &PointSet<R>) -> Result<R> {
    if mesh.is_empty() {
        return Err(Error::InvalidArgument("mesh must be nonempty".into()));
    }
    let values = lb.evaluate_on(mesh)?;
    let mut best = R::zero();
    for i in 0..values.rows() {
        let s: R = values.row(i).iter().map(|v| v.norm_sqr()).sum();
        best = best.max(s);
    }
    Ok(best)
}

/// One row of the Lebesgue growth table: `Λ_n` and `Λ_n^{1/n}` for a
/// family of degree `n` (the root column repeats `Λ_n` at degree 0).
#[derive(Clone, Copy, Debug)]
pub struct GrowthRow<R> {
    pub degree: usize,
    pub lebesgue: R,
    pub root: R,
}

/// Lebesgue-constant growth diagnostic over a family sequence. Report only:
/// no pass/fail is attached, since growth behavior of greedy sequences is
/// an open matter.
pub fn lebesgue_growth_diagnostic<R: Real>(
    families: &[PointFamily<R>],
    mesh: &PointSet<R>,
) -> Result<Vec<GrowthRow<R>>> {
    let mut rows = Vec::with_capacity(families.len());
    for family in families {
        let basis = crate::poly_basis::graded_basis(family.points.dim(), family.degree)?;
        if family.points.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: family.points.len(),
            });
        }
        let lb = lagrange_basis(&family.points, &basis)?;
        let lambda = lebesgue_constant(&lb, mesh)?;
        let root = if family.degree == 0 {
            lambda
        } else {
            lambda.powf(R::one() / real_of_usize(family.degree))
        };
        rows.push(GrowthRow {
            degree: family.degree,
            lebesgue: lambda,
            root,
        });
    }
    Ok(rows)
}

/// Consistency check used by tests and the CLI: recomputes the family's
/// weighted Vandermonde modulus from scratch.
pub fn recompute_log_weighted_vdm<R: Real>(
    family: &PointFamily<R>,
    weight_on_family: &AdmissibleWeight<R>,
    basis: &GradedBasis,
) -> Result<R> {
    log_abs_vdm_prefix(
        basis,
        &family.points,
        Some(weight_on_family),
        family.points.len(),
    )
}
