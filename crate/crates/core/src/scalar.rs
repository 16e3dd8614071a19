use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::Float;

/// Floating-point type the pipeline can run in.
///
/// `Display` must print the shortest string that parses back to the same bits;
/// the CSV and weights writers rely on it for exact round trips.
pub trait Scalar: Float + FromStr + Display + Debug + Default + Send + Sync + 'static {
    /// Significand width in bits, including the implicit bit.
    const SIGNIFICAND_BITS: u32;

    /// Converts an `f64` literal into this type.
    fn lit(v: f64) -> Self {
        <Self as num_traits::NumCast>::from(v).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {
    const SIGNIFICAND_BITS: u32 = f32::MANTISSA_DIGITS;
}

impl Scalar for f64 {
    const SIGNIFICAND_BITS: u32 = f64::MANTISSA_DIGITS;
}

/// Sums left to right. Kept explicit so the evaluation order never depends on
/// iterator adaptors.
pub(crate) fn ordered_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut acc = T::zero();
    for v in values {
        acc = acc + v;
    }
    acc
}
