//! Weighted optimal measures of degree `n` on discretized compact sets
//! `K ⊂ ℂ^d`.
//!
//! The library computes discrete probability measures maximizing the Gram
//! determinant of the degree-`n` polynomial space (equivalently, minimizing
//! the max of the Christoffel function, which certifies optimality through
//! `max K_n = N`), builds the competing extremal point families (brute-force
//! Fekete, greedy Leja), evaluates Lagrange bases, Lebesgue constants and
//! Fejér sums, estimates the weighted transfinite diameter along two routes,
//! and runs weak-* convergence diagnostics against reference equilibrium
//! measures.
//!
//! All numerical kernels are generic over the real scalar type through
//! [`scalar::Real`]; `f64` aliases for the main types live at the crate
//! root. Points are complex throughout — real domains embed with zero
//! imaginary parts.

pub mod asymptotics;
pub mod design_solver;
pub mod error;
pub mod extremal_points;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod poly_basis;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{real, Real};

/// Complex scalar over the working real type.
pub type Cplx<R> = num_complex::Complex<R>;

// Concrete `f64` aliases for the main domain types.
pub type PointSet64 = poly_basis::PointSet<f64>;
pub type AdmissibleWeight64 = measures::AdmissibleWeight<f64>;
pub type DiscreteMeasure64 = measures::DiscreteMeasure<f64>;
pub type GramFactorization64 = measures::GramFactorization<f64>;
pub type ChristoffelField64 = measures::ChristoffelField<f64>;
pub type SolverConfig64 = design_solver::SolverConfig<f64>;
pub type DesignResult64 = design_solver::DesignResult<f64>;
pub type PointFamily64 = extremal_points::PointFamily<f64>;
pub type LagrangeBasis64 = extremal_points::LagrangeBasis<f64>;
pub type DiameterEstimate64 = asymptotics::DiameterEstimate<f64>;
pub type PerturbationCurve64 = asymptotics::PerturbationCurve<f64>;
pub type ConvergenceReport64 = asymptotics::ConvergenceReport<f64>;
pub type ReferenceMeasure64 = asymptotics::ReferenceMeasure<f64>;

// `f32` aliases; the whole pipeline is generic, lower precision is mostly
// useful for quick sweeps.
pub type PointSet32 = poly_basis::PointSet<f32>;
pub type DiscreteMeasure32 = measures::DiscreteMeasure<f32>;
pub type DesignResult32 = design_solver::DesignResult<f32>;
