//! Floating-point abstraction the numerical core is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::num::ParseFloatError;
use std::str::FromStr;

use ndarray::ScalarOperand;
use num_traits::{Float, NumAssignOps};

/// Scalar type accepted by datasets, models and the optimizer.
///
/// `Display`/`FromStr` are required so values render with shortest
/// round-trip precision in the CSV and checkpoint formats and parse back
/// bit-for-bit.
pub trait Scalar:
    Float
    + NumAssignOps
    + ScalarOperand
    + Sum
    + Display
    + Debug
    + Default
    + FromStr<Err = ParseFloatError>
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

macro_rules! impl_scalar {
    ($($t:ty)*) => {$(
        impl Scalar for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    )*};
}

impl_scalar!(f32 f64);
