//! Scalar abstraction: every numerical kernel is generic over the real
//! floating type (`f32` or `f64` in practice).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the library is generic over.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum<Self>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("constant not representable in scalar type")
}

/// Converts a count into the working scalar type.
#[inline]
pub fn real_of_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("count not representable in scalar type")
}
