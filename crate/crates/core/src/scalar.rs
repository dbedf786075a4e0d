use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{FromPrimitive, NumAssign, Signed, ToPrimitive};

/// Loss value type. Implemented for `f32`, `f64` and `Ratio<i64>`.
pub trait Scalar:
    NumAssign
    + Signed
    + PartialOrd
    + Clone
    + Debug
    + Display
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance for identity checks. Zero for exact types.
    fn tolerance() -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_i64(num).expect("integer fits scalar") / Self::from_i64(den).expect("integer fits scalar")
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("integer fits scalar")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= Self::tolerance()
    }

    fn approx_le(&self, other: &Self) -> bool {
        *self <= other.clone() + Self::tolerance()
    }

    fn is_exact() -> bool {
        Self::tolerance().is_zero()
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
}

impl Scalar for Ratio<i64> {
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratio_construction() {
        let q = <Ratio<i64> as Scalar>::from_ratio(3, 12);
        assert_eq!(q, Ratio::new(1, 4));
        assert!(<Ratio<i64> as Scalar>::is_exact());
        assert!(!<f64 as Scalar>::is_exact());
    }

    #[test]
    fn float_tolerance_comparisons() {
        let a = 0.1 + 0.2;
        assert!(a.approx_eq(&0.3));
        assert!(a.approx_le(&0.3));
        assert!(!(0.31f64).approx_le(&0.3));
    }
}
