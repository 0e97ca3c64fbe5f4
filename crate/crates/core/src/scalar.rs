//! Scalar abstractions.
//!
//! Geometry, sensing and metrics are generic over [`Real`] (`f32` or `f64`).
//! The occupancy accumulator is generic over [`LogOdds`], which additionally
//! admits the exact rational type [`Exact`] so that additive updates can be
//! checked without rounding.

use std::fmt::Debug;
use std::ops::Add;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive, Zero};

/// Floating point scalar used for continuous quantities (meters, radians).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only on non-representable input.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact rational log-odds accumulator.
pub type Exact = Ratio<i64>;

/// Value type of a log-odds occupancy cell.
pub trait LogOdds: Copy + PartialOrd + Debug + Send + Sync + 'static + Add<Output = Self> + Zero {
    /// Converts a configured decimal constant into this representation.
    fn from_decimal(v: f64) -> Self;

    fn to_f64(self) -> f64;

    fn clamp_to(self, lo: Self, hi: Self) -> Self {
        if self < lo {
            lo
        } else if self > hi {
            hi
        } else {
            self
        }
    }
}

impl LogOdds for f32 {
    fn from_decimal(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl LogOdds for f64 {
    fn from_decimal(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl LogOdds for Exact {
    /// Parses the shortest round-trip decimal form of `v`, so `2.2` becomes
    /// exactly `11/5` rather than the binary approximation.
    fn from_decimal(v: f64) -> Self {
        assert!(v.is_finite(), "log-odds constant must be finite");
        let text = format!("{v}");
        let (mantissa, exponent) = match text.split_once(['e', 'E']) {
            Some((m, e)) => (m.to_string(), e.parse::<i32>().expect("float exponent")),
            None => (text.clone(), 0),
        };
        let negative = mantissa.starts_with('-');
        let digits_part = mantissa.trim_start_matches('-');
        let (int_part, frac_part) = digits_part.split_once('.').unwrap_or((digits_part, ""));
        let digits: i64 = format!("{int_part}{frac_part}")
            .parse()
            .expect("decimal digits fit in i64");
        let scale = exponent - frac_part.len() as i32;
        let pow = 10i64.pow(scale.unsigned_abs());
        let value = if scale >= 0 {
            Ratio::from_integer(digits * pow)
        } else {
            Ratio::new(digits, pow)
        };
        if negative {
            -value
        } else {
            value
        }
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
