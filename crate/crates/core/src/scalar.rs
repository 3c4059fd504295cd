//! Real scalar abstraction.
//!
//! Everything numerical in this crate is generic over [`Scalar`], which is
//! satisfied by `f32`, `f64`, and [`crate::dual::Dual`]. Instantiating a
//! computation with a dual scalar threads one forward-mode derivative through
//! it unchanged.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub trait Scalar:
    Float
    + FloatConst
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` constant; panics only on NaN-free exotic types.
    fn real(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must convert to Scalar")
    }

    /// The value part as `f64`, discarding any derivative payload.
    fn value(self) -> f64 {
        self.to_f64().expect("Scalar value must convert to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
