//! Scalar abstractions.
//!
//! Closed-form quantities that only need field operations (thresholds, the
//! phase function, first fundamental form) are generic over [`Scalar`], so
//! they can be evaluated in exact rational arithmetic as well as in floating
//! point. Everything that needs square roots or trigonometry is generic over
//! [`Real`].

use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, Num, ToPrimitive};

/// An ordered field element: `f32`, `f64`, or an exact rational.
pub trait Scalar: Num + Copy + PartialOrd + Neg<Output = Self> + Debug + Send + Sync + 'static {
    /// Small integer literal.
    fn lit(n: i32) -> Self;

    /// Nearest `f64`, used for tolerance checks and reporting.
    fn as_f64(self) -> f64;

    /// False for NaN and infinities. Exact types are always finite.
    fn finite(self) -> bool;

    fn ratio(num: i32, den: i32) -> Self {
        Self::lit(num) / Self::lit(den)
    }

    fn abs_val(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }
}

/// A floating-point scalar.
pub trait Real: Scalar + Float + FloatConst + Display + LowerExp {
    /// Converts an `f64` constant (tolerances, tableau coefficients).
    fn of(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("f64 constant representable")
    }

    fn of_usize(n: usize) -> Self {
        <Self as num_traits::NumCast>::from(n).expect("count representable")
    }

    /// Relative accuracy of arithmetic and elementary functions, the unit
    /// for convergence tolerances.
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }
}

macro_rules! impl_float_scalar {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn lit(n: i32) -> Self {
                n as $t
            }
            fn as_f64(self) -> f64 {
                self as f64
            }
            fn finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
        impl Real for $t {}
    )*};
}

impl_float_scalar!(f32, f64);

/// Double-double arithmetic (about 32 significant digits), used where
/// round-off in `f64` would mask a discretization error being measured.
impl Scalar for twofloat::TwoFloat {
    fn lit(n: i32) -> Self {
        Self::from(n)
    }
    fn as_f64(self) -> f64 {
        self.hi()
    }
    fn finite(self) -> bool {
        self.is_valid()
    }
}

impl Real for twofloat::TwoFloat {
    // Arithmetic is exact to about 1e-32, but the transcendental functions
    // are only accurate to roughly 1e-17 relative, and `epsilon()` reports
    // the smallest positive value rather than a spacing.
    fn unit_roundoff() -> Self {
        Self::from(1e-17)
    }
}

macro_rules! impl_ratio_scalar {
    ($($i:ty),*) => {$(
        impl Scalar for Ratio<$i> {
            fn lit(n: i32) -> Self {
                Ratio::from_integer(n as $i)
            }
            fn as_f64(self) -> f64 {
                self.to_f64().unwrap_or(f64::NAN)
            }
            fn finite(self) -> bool {
                true
            }
        }
    )*};
}

impl_ratio_scalar!(i64, i128);
