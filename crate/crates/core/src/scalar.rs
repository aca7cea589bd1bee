//! Scalar abstraction shared by the geometry, occlusion and BEV code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        f64::from(self)
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_to_pi<T: Real>(angle: T) -> T {
    let two_pi = T::PI() + T::PI();
    let wrapped = angle - two_pi * ((angle + T::PI()) / two_pi).floor();
    // floor rounding can land exactly on +pi
    if wrapped >= T::PI() {
        wrapped - two_pi
    } else {
        wrapped
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_keeps_in_range_values() {
        assert_eq!(wrap_to_pi(0.0_f64), 0.0);
        assert!((wrap_to_pi(1.0_f64) - 1.0).abs() < 1e-15);
        assert!((wrap_to_pi(-PI) + PI).abs() < 1e-15);
    }

    #[test]
    fn wrap_folds_large_angles() {
        assert!((wrap_to_pi(5.0 * PI / 4.0) + 3.0 * PI / 4.0).abs() < 1e-12);
        assert!((wrap_to_pi(PI) + PI).abs() < 1e-12);
        assert!((wrap_to_pi(-7.0 * PI) + PI).abs() < 1e-9);
        for i in -200..200 {
            let a = f64::from(i) * 0.37;
            let w = wrap_to_pi(a);
            assert!((-PI..PI).contains(&w), "{a} -> {w}");
            let k = ((a - w) / (2.0 * PI)).round();
            assert!((a - w - 2.0 * PI * k).abs() < 1e-9);
        }
    }

    #[test]
    fn lit_round_trips_for_both_widths() {
        assert_eq!(f32::lit(0.5), 0.5_f32);
        assert_eq!(f64::lit(0.1), 0.1_f64);
        assert_eq!(<f32 as Real>::of_usize(7), 7.0);
    }
}
