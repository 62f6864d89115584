use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Floating point scalar used throughout the crate: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ceil(frac * count)`, treating products within a few ulps of an integer
/// as that integer, so `0.1 * 30` selects 3 rather than 4.
pub fn ceil_fraction<T: Scalar>(frac: T, count: usize) -> usize {
    let p = frac.to_f64_lossy() * count as f64;
    let r = p.round();
    let tol = 8.0 * T::epsilon().to_f64_lossy() * r.abs().max(1.0);
    if (p - r).abs() <= tol {
        r.max(0.0) as usize
    } else {
        p.ceil().max(0.0) as usize
    }
}
