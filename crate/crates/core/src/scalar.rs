//! Scalar abstractions shared by every numeric routine in the crate.
//!
//! Timing, reward and linear-programming code only needs field arithmetic and
//! an ordering, so it is written against [`Scalar`], which is implemented for
//! `f32`, `f64` and the exact rational type [`Exact`]. Pose geometry and
//! entropy need square roots and logarithms and use [`Real`] instead.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

/// Exact rational scalar. Useful as an oracle for boundary comparisons.
pub type Exact = Ratio<i64>;

pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + PartialOrd + Copy + Debug + Display + Send + Sync + 'static
{
    /// Absolute slack used when comparing derived quantities (times, pivots).
    /// Zero for exact types.
    fn tolerance() -> Self;

    fn is_finite_value(self) -> bool;

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar")
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `|self - other| <= tolerance`.
    fn approx_eq(self, other: Self) -> bool {
        (self - other).abs() <= Self::tolerance()
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-10
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }

    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Exact {
    fn tolerance() -> Self {
        Ratio::from_integer(0)
    }

    fn is_finite_value(self) -> bool {
        true
    }
}

/// Floating-point scalars.
pub trait Real: Scalar + Float {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`, panicking only for values no scalar
/// type in this crate can represent.
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar")
}
