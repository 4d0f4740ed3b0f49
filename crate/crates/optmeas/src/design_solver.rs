//! Optimal-measure solver: determinant ascent over the probability simplex
//! on a candidate set, certified by the Kiefer–Wolfowitz gap
//! `max K_n - N`.
//!
//! The iteration schemes are standard design-of-experiments updates around
//! the fixed-point characterization `K_n ≡ N` on the support:
//! a multiplicative reweighting `μ'_i ∝ μ_i·K_n(x_i)`, a vertex exchange
//! step toward the Christoffel argmax with the closed-form step length, and
//! a rebalance transfer from the worst support point to the argmax. The
//! hybrid schedule interleaves an exchange step every 50 multiplicative
//! steps and switches to rebalance transfers once the gap is below
//! tolerance but some support point still sits away from `K_n = N`; on
//! fine grids the multiplicative update alone leaves slowly decaying mass
//! on near-support nodes, and the transfers remove it outright.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::measures::{
    christoffel, christoffel_from_vandermonde, gram, gram_from_vandermonde, AdmissibleWeight,
    ChristoffelField, DiscreteMeasure, GramFactorization,
};
use crate::poly_basis::{vandermonde, GradedBasis, PointSet};
use crate::scalar::{real, real_of_usize, Real};

/// Iteration scheme for the determinant ascent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Multiplicative,
    Exchange,
    Hybrid,
}

/// Interval between exchange steps in the hybrid schedule.
const HYBRID_EXCHANGE_PERIOD: usize = 50;
/// Window length for stall detection before pruning.
const STALL_WINDOW: usize = 100;
/// Relative gap improvement below which the iteration counts as stalled.
const STALL_RELATIVE_IMPROVEMENT: f64 = 1e-10;
/// Weight above which a candidate counts as support for the certificate.
const SUPPORT_CERT_THRESHOLD: f64 = 1e-7;
/// Support points must reach `|K_n - N|/N ≤ SUPPORT_CERT_FACTOR·tolerance`.
const SUPPORT_CERT_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug)]
pub struct SolverConfig<R> {
    /// KW gap threshold, relative to `N`.
    pub tolerance: R,
    pub max_iterations: usize,
    pub algorithm: Algorithm,
    /// Weights below this are dropped once the gap stalls.
    pub prune_threshold: R,
}

impl<R: Real> Default for SolverConfig<R> {
    fn default() -> Self {
        Self {
            tolerance: real(1e-6),
            max_iterations: 50_000,
            algorithm: Algorithm::Hybrid,
            prune_threshold: real(1e-12),
        }
    }
}

impl<R: Real> SolverConfig<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > R::zero()) {
            return Err(Error::InvalidArgument("tolerance must be > 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be ≥ 1".into(),
            ));
        }
        if !(self.prune_threshold >= R::zero()) {
            return Err(Error::InvalidArgument(
                "prune_threshold must be ≥ 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TracePoint<R> {
    pub iteration: usize,
    pub log_det: R,
    pub kw_gap: R,
}

/// Solved design: the measure, its certificate, and the iteration trace.
#[derive(Clone, Debug)]
pub struct DesignResult<R> {
    pub measure: DiscreteMeasure<R>,
    /// `max K_n - N` over the candidates at the final iterate.
    pub kw_gap: R,
    pub log_det: R,
    pub iterations: usize,
    pub trace: Vec<TracePoint<R>>,
    pub converged: bool,
}

/// One multiplicative reweighting `μ'_i = μ_i·K_n(x_i)/N`, renormalized so
/// the output is a probability measure exactly (the mass identity makes the
/// normalizer `N` up to rounding).
pub fn multiplicative_step<R: Real>(
    measure: &DiscreteMeasure<R>,
    field: &ChristoffelField<R>,
) -> Result<DiscreteMeasure<R>> {
    if field.values().len() != measure.len() {
        return Err(Error::LengthMismatch {
            expected: measure.len(),
            got: field.values().len(),
        });
    }
    let reweighted: Vec<R> = measure
        .weights()
        .iter()
        .zip(field.values())
        .map(|(&mu, &k)| mu * k)
        .collect();
    DiscreteMeasure::normalized(reweighted)
        .map_err(|_| Error::DegenerateMeasure { degree: 0 })
}

/// Vertex exchange toward the Christoffel argmax:
/// `μ' = (1-α)·μ + α·δ_{x*}` with `α = (M/N - 1)/(M - 1)` for
/// `M = max K_n`. Returns the input unchanged when `M ≤ N` or in the
/// `N = 1` corner where `M` cannot exceed 1.
pub fn exchange_step<R: Real>(
    measure: &DiscreteMeasure<R>,
    field: &ChristoffelField<R>,
) -> Result<DiscreteMeasure<R>> {
    if field.values().len() != measure.len() {
        return Err(Error::LengthMismatch {
            expected: measure.len(),
            got: field.values().len(),
        });
    }
    let n = real_of_usize::<R>(field.basis_len());
    let m = field.max_value();
    if m <= n || m <= R::one() {
        return Ok(measure.clone());
    }
    let alpha = (m / n - R::one()) / (m - R::one());
    let alpha = alpha.max(R::zero()).min(R::one() - real(1e-16));
    let mut weights: Vec<R> = measure
        .weights()
        .iter()
        .map(|&w| w * (R::one() - alpha))
        .collect();
    weights[field.argmax_index()] += alpha;
    DiscreteMeasure::normalized(weights)
        .map_err(|_| Error::DegenerateMeasure { degree: 0 })
}

/// One planned mass transfer out of a support-certificate violator.
struct Transfer<R> {
    donor: usize,
    receiver: usize,
    alpha: R,
}

/// `s_j(x) = w^n(x)·q_j(x)`, so `K(x) = ‖s(x)‖²` and the cross kernel is
/// `k(x, y) = Σ_j s_j(x)·conj(s_j(y))`.
fn scaled_kernel_row<R: Real>(
    fact: &GramFactorization<R>,
    vdm: &ComplexMatrix<R>,
    weight: &AdmissibleWeight<R>,
    idx: usize,
) -> Vec<Complex<R>> {
    let coeffs = fact.ortho_coeffs().expect("nonsingular factorization");
    let n_basis = coeffs.rows();
    let wn = weight.weight_pow(idx, fact.degree(), 1);
    let row = vdm.row(idx);
    (0..n_basis)
        .map(|j| {
            let mut q = Complex::new(R::zero(), R::zero());
            for (k, &p) in row.iter().enumerate().take(j + 1) {
                q = q + p * coeffs.get(k, j);
            }
            q * wn
        })
        .collect()
}

/// Plans the transfer `μ' = μ + α(δ_r - δ_d)` whose step maximizes the
/// rank-two determinant update `(1 + αK_r)(1 - αK_d) + α²|k(x_r,x_d)|²`,
/// clamped to `[0, μ(d)]`, over the candidate receivers. With the clamp
/// active the donor leaves the support entirely, which is what clears
/// near-support grid nodes the multiplicative update only drains
/// geometrically. Receivers close to the donor matter: within a cluster of
/// nearly coincident nodes the cross kernel is almost parallel and the
/// optimal step is a full merge, while a transfer toward a far-away argmax
/// moves nearly nothing.
fn plan_transfer<R: Real>(
    measure: &DiscreteMeasure<R>,
    field: &ChristoffelField<R>,
    fact: &GramFactorization<R>,
    vdm: &ComplexMatrix<R>,
    weight: &AdmissibleWeight<R>,
    donor: usize,
    receivers: &[usize],
) -> Option<Transfer<R>> {
    let cap = measure.weights()[donor];
    if cap == R::zero() {
        return None;
    }
    let s_donor = scaled_kernel_row(fact, vdm, weight, donor);
    let k_donor = field.values()[donor];
    let one = R::one();
    let mut best: Option<(Transfer<R>, R)> = None;
    for &receiver in receivers {
        if receiver == donor {
            continue;
        }
        let s_recv = scaled_kernel_row(fact, vdm, weight, receiver);
        let mut cross = Complex::new(R::zero(), R::zero());
        for (a, b) in s_recv.iter().zip(&s_donor) {
            cross = cross + *a * b.conj();
        }
        let k_recv = field.values()[receiver];
        let cross_sq = cross.norm_sqr();
        let denom = k_recv * k_donor - cross_sq;
        let alpha = if denom > R::zero() {
            ((k_recv - k_donor) / (denom + denom)).max(R::zero()).min(cap)
        } else if k_recv >= k_donor {
            cap
        } else {
            R::zero()
        };
        if alpha == R::zero() {
            continue;
        }
        let gain = (one + alpha * k_recv) * (one - alpha * k_donor) + alpha * alpha * cross_sq;
        if gain >= one && best.as_ref().map_or(true, |&(_, g)| gain > g) {
            best = Some((
                Transfer {
                    donor,
                    receiver,
                    alpha,
                },
                gain,
            ));
        }
    }
    best.map(|(t, _)| t)
}

/// Candidate receivers for a transfer out of `donor`: the Christoffel
/// argmax plus the nearest support points of the donor.
fn transfer_receivers<R: Real>(
    measure: &DiscreteMeasure<R>,
    field: &ChristoffelField<R>,
    candidates: &PointSet<R>,
    donor: usize,
) -> Vec<usize> {
    const NEAREST: usize = 4;
    let threshold = real::<R>(SUPPORT_CERT_THRESHOLD);
    let mut near: Vec<(R, usize)> = Vec::new();
    for (i, &w) in measure.weights().iter().enumerate() {
        if i == donor || w <= threshold {
            continue;
        }
        let mut dist = R::zero();
        for (a, b) in candidates.point(i).iter().zip(candidates.point(donor)) {
            dist += (*a - *b).norm_sqr();
        }
        near.push((dist, i));
    }
    near.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut receivers: Vec<usize> = near.iter().take(NEAREST).map(|&(_, i)| i).collect();
    if !receivers.contains(&field.argmax_index()) && field.argmax_index() != donor {
        receivers.push(field.argmax_index());
    }
    receivers
}

/// Drains every over-weighted support point at once, each into its own
/// best receiver, all planned against the same field snapshot. A donor is
/// any point carrying certifiable mass whose `K_n` sits more than half the
/// current gap below the Christoffel max — the threshold tightens as the
/// solve converges, so within-cluster splits keep equilibrating all the
/// way down. Batch application keeps mirror-symmetric states symmetric:
/// symmetric donors are processed in the same iteration with mirrored
/// receivers, where draining them one per iteration would freeze an
/// asymmetric split into the flat directions of the optimum.
fn drain_violators<R: Real>(
    measure: &DiscreteMeasure<R>,
    field: &ChristoffelField<R>,
    fact: &GramFactorization<R>,
    vdm: &ComplexMatrix<R>,
    weight: &AdmissibleWeight<R>,
    candidates: &PointSet<R>,
    kw_gap: R,
) -> Result<Option<DiscreteMeasure<R>>> {
    let half_gap = (kw_gap * real::<R>(0.5)).max(R::zero());
    let ceiling = field.max_value() - half_gap;
    let threshold = real::<R>(SUPPORT_CERT_THRESHOLD);
    let mut transfers: Vec<Transfer<R>> = Vec::new();
    for (i, (&w, &k)) in measure.weights().iter().zip(field.values()).enumerate() {
        if w > threshold && k < ceiling {
            let receivers = transfer_receivers(measure, field, candidates, i);
            if let Some(t) = plan_transfer(measure, field, fact, vdm, weight, i, &receivers) {
                transfers.push(t);
            }
        }
    }
    if transfers.is_empty() {
        return Ok(None);
    }
    let mut weights = measure.weights().to_vec();
    for t in &transfers {
        weights[t.donor] = weights[t.donor] - t.alpha;
        weights[t.receiver] = weights[t.receiver] + t.alpha;
        if weights[t.donor] < R::zero() {
            weights[t.donor] = R::zero();
        }
    }
    Ok(Some(DiscreteMeasure::normalized(weights).map_err(
        |_| Error::DegenerateMeasure { degree: 0 },
    )?))
}

/// Support certificate: every candidate carrying weight above `1e-7` has
/// `|K_n - N|/N` within `10·tolerance`.
fn support_certificate_holds<R: Real>(
    measure: &DiscreteMeasure<R>,
    field: &ChristoffelField<R>,
    tolerance: R,
) -> bool {
    let n_real = real_of_usize::<R>(field.basis_len());
    let bound = real::<R>(SUPPORT_CERT_FACTOR) * tolerance;
    let threshold = real::<R>(SUPPORT_CERT_THRESHOLD);
    measure
        .weights()
        .iter()
        .zip(field.values())
        .all(|(&w, &k)| w <= threshold || ((k - n_real) / n_real).abs() <= bound)
}

/// Deletes candidates that provably belong to no optimal support and
/// renormalizes. With relative gap `e = max K/N - 1`, a point with
/// `K(x) ≤ N·(1 + e/2 - sqrt(e(1 + e/4)))` cannot support any
/// determinant-maximizing measure, so zeroing it never discards the
/// optimum. Returns `None` when nothing qualifies. Should the threshold
/// ever overreach through rounding, the exchange step re-seeds the argmax,
/// so the iteration recovers.
fn safe_support_deletion<R: Real>(
    measure: &DiscreteMeasure<R>,
    field: &ChristoffelField<R>,
) -> Option<DiscreteMeasure<R>> {
    let n_real = real_of_usize::<R>(field.basis_len());
    let e = field.max_value() / n_real - R::one();
    if e <= R::zero() {
        return None;
    }
    let half = real::<R>(0.5);
    let quarter = real::<R>(0.25);
    let threshold = n_real * (R::one() + half * e - (e * (R::one() + quarter * e)).sqrt());
    if !(threshold > R::zero()) {
        return None;
    }
    let mut weights = measure.weights().to_vec();
    let mut hit = false;
    for (w, &k) in weights.iter_mut().zip(field.values()) {
        if *w > R::zero() && k < threshold {
            *w = R::zero();
            hit = true;
        }
    }
    if !hit {
        return None;
    }
    DiscreteMeasure::normalized(weights).ok()
}

/// Computes an optimal measure of degree `basis.degree()` for the candidate
/// set and weight. Starts from the uniform measure on admissible candidates
/// and iterates the configured step until both `kw_gap ≤ tolerance·N` and
/// the support certificate hold, or `max_iterations` runs out.
/// Non-convergence is a reported state, not an error.
pub fn solve_optimal<R: Real>(
    candidates: &PointSet<R>,
    weight: &AdmissibleWeight<R>,
    basis: &GradedBasis,
    config: &SolverConfig<R>,
) -> Result<DesignResult<R>> {
    config.validate()?;
    let m = candidates.len();
    if weight.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            got: weight.len(),
        });
    }
    let n_dim = basis.len();
    let admissible: Vec<usize> = (0..m)
        .filter(|&i| weight.phi()[i] < R::infinity())
        .collect();
    if admissible.len() < n_dim {
        return Err(Error::Admissibility(format!(
            "{} admissible candidates for a basis of dimension {}",
            admissible.len(),
            n_dim
        )));
    }

    let vdm = vandermonde(basis, candidates)?;
    let n_real = real_of_usize::<R>(n_dim);
    let gap_bound = config.tolerance * n_real;
    let mut measure = DiscreteMeasure::uniform_on(m, &admissible);
    let mut trace: Vec<TracePoint<R>> = Vec::new();
    let mut converged = false;
    let mut kw_gap = R::infinity();
    let mut log_det = R::neg_infinity();
    let mut last_prune = 0usize;

    for iteration in 0..=config.max_iterations {
        let fact = gram_from_vandermonde(basis, &vdm, &measure, weight)?;
        if fact.is_singular() {
            if iteration == 0 {
                return Err(Error::Admissibility(
                    "candidate set is rank-deficient for the requested degree".into(),
                ));
            }
            return Err(Error::DegenerateMeasure {
                degree: basis.degree(),
            });
        }
        let field = christoffel_from_vandermonde(&fact, &vdm, weight)?;
        log_det = fact.log_det();
        kw_gap = field.max_value() - n_real;
        trace.push(TracePoint {
            iteration,
            log_det,
            kw_gap,
        });

        let gap_ok = kw_gap <= gap_bound;
        if gap_ok && support_certificate_holds(&measure, &field, config.tolerance) {
            converged = true;
            break;
        }
        if iteration == config.max_iterations {
            break;
        }

        // Prune once progress stalls; keeps a canonical small-support
        // representative when the optimum is not unique.
        if iteration >= STALL_WINDOW && iteration - last_prune >= STALL_WINDOW {
            let back = &trace[trace.len() - 1 - STALL_WINDOW];
            let improvement = back.kw_gap - kw_gap;
            if improvement < real::<R>(STALL_RELATIVE_IMPROVEMENT) * back.kw_gap.abs() {
                let pruned: Vec<R> = measure
                    .weights()
                    .iter()
                    .map(|&w| if w < config.prune_threshold { R::zero() } else { w })
                    .collect();
                if let Ok(p) = DiscreteMeasure::normalized(pruned) {
                    measure = p;
                }
                last_prune = iteration;
            }
        }

        measure = match config.algorithm {
            Algorithm::Multiplicative => multiplicative_step(&measure, &field)?,
            Algorithm::Exchange => exchange_step(&measure, &field)?,
            Algorithm::Hybrid => {
                // Transfers start once the gap is within a factor 100 of
                // the bound; before that, multiplicative reweighting
                // carries the bulk, with an exchange step every 50
                // iterations.
                let cleanup_active = kw_gap <= real::<R>(100.0) * gap_bound;
                let mut next = None;
                if let Some(pruned) = safe_support_deletion(&measure, &field) {
                    next = Some(pruned);
                } else if cleanup_active && iteration % 2 == 1 {
                    next = drain_violators(
                        &measure,
                        &field,
                        &fact,
                        &vdm,
                        weight,
                        candidates,
                        kw_gap,
                    )?;
                }
                match next {
                    Some(next) => next,
                    None if (iteration + 1) % HYBRID_EXCHANGE_PERIOD == 0 && !gap_ok => {
                        exchange_step(&measure, &field)?
                    }
                    None => multiplicative_step(&measure, &field)?,
                }
            }
        };
    }

    let iterations = trace.len().saturating_sub(1);
    Ok(DesignResult {
        measure,
        kw_gap,
        log_det,
        iterations,
        trace,
        converged,
    })
}

/// Re-evaluates the Christoffel field of a solved design on an independent
/// (typically finer) mesh and returns `max K_n - N` there. This certifies
/// optimality relative to the continuum set rather than just the training
/// candidates. `cand_weight` must be tabulated on the solver candidates,
/// `mesh_weight` on the mesh.
pub fn kw_certificate<R: Real>(
    result: &DesignResult<R>,
    basis: &GradedBasis,
    candidates: &PointSet<R>,
    cand_weight: &AdmissibleWeight<R>,
    fine_mesh: &PointSet<R>,
    mesh_weight: &AdmissibleWeight<R>,
) -> Result<R> {
    let fact = gram(basis, candidates, &result.measure, cand_weight)?;
    let field = christoffel(&fact, basis, fine_mesh, mesh_weight)?;
    Ok(field.max_value() - real_of_usize::<R>(basis.len()))
}

/// Internal helper for tests and reports: the Christoffel field of a
/// measure over its own candidates.
pub fn christoffel_of_measure<R: Real>(
    measure: &DiscreteMeasure<R>,
    candidates: &PointSet<R>,
    weight: &AdmissibleWeight<R>,
    basis: &GradedBasis,
) -> Result<ChristoffelField<R>> {
    let fact = gram(basis, candidates, measure, weight)?;
    christoffel(&fact, basis, candidates, weight)
}
