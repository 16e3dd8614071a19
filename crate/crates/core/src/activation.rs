//! The logistic sigmoid and its saturation point in finite precision.
//!
//! In binary floating point `1 + e^(-t)` rounds to exactly `1` once `e^(-t)`
//! drops to half an ulp of one, so the sigmoid returns exactly `1.0` for every
//! `t` at or past a fixed threshold (about 36.7368 for `f64`, 16.6355 for `f32`).
//! A district whose output sigmoid reaches that value has zero relative error on
//! every variable, which is how training terminates.

use crate::{Error, Result, Scalar};

/// Bisection stops once the bracket is this narrow.
pub const SATURATION_TOLERANCE: f64 = 1e-6;

/// `1 / (1 + e^(-t))`, rejecting non-finite input.
pub fn sigmoid<T: Scalar>(t: T) -> Result<T> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("sigmoid of non-finite input {t}")));
    }
    Ok(logistic(t))
}

/// Unchecked sigmoid. Uses `e^t / (1 + e^t)` for negative `t` so that large raw
/// magnitudes never overflow the exponential.
#[inline]
pub fn logistic<T: Scalar>(t: T) -> T {
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// Smallest `t` (to within [`SATURATION_TOLERANCE`]) for which the sigmoid
/// compares equal to `1.0` in `T`. The returned value itself saturates.
pub fn saturation_threshold<T: Scalar>() -> T {
    let saturated = |t: T| logistic(t) == T::one();

    let mut lo = T::zero();
    let mut hi = T::one();
    while !saturated(hi) {
        lo = hi;
        hi = hi + hi;
    }

    let tol = T::lit(SATURATION_TOLERANCE);
    let two = T::lit(2.0);
    while hi - lo > tol {
        let mid = lo + (hi - lo) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if saturated(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
