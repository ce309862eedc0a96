//! Reals extended with an explicit negative-infinity marker.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};

use crate::scalar::Scalar;

/// A finite real or negative infinity. Used for log-domain values where a
/// zero factor (log 0) must stay distinguishable from any finite number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal<T> {
    Finite(T),
    NegInfinity,
}

/// Logarithm of a (weighted) Nash social welfare value.
pub type LogNsw<T> = ExtendedReal<T>;

impl<T: Scalar> ExtendedReal<T> {
    /// Natural log of a nonnegative value; `log 0` is `NegInfinity`.
    pub fn ln_of(x: T) -> Self {
        if x > T::zero() {
            Self::Finite(x.ln())
        } else {
            Self::NegInfinity
        }
    }

    /// Wraps an already-logged value, mapping IEEE `-inf` to the marker.
    pub fn from_log(x: T) -> Self {
        if x == T::neg_infinity() {
            Self::NegInfinity
        } else {
            Self::Finite(x)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            Self::Finite(x) => Some(x),
            Self::NegInfinity => None,
        }
    }

    /// The value as a float, with `NegInfinity` mapped to IEEE `-inf`.
    pub fn value(&self) -> T {
        self.finite().unwrap_or_else(T::neg_infinity)
    }

    /// `exp` of the log value; zero for `NegInfinity`.
    pub fn exp(&self) -> T {
        self.finite().map_or(T::zero(), T::exp)
    }

    pub fn scale(self, w: T) -> Self {
        match self {
            Self::Finite(x) => Self::Finite(x * w),
            Self::NegInfinity => Self::NegInfinity,
        }
    }
}

impl<T: Scalar> Add for ExtendedReal<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a + b),
            _ => Self::NegInfinity,
        }
    }
}

impl<T: Scalar> PartialOrd for ExtendedReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Self::NegInfinity, Self::NegInfinity) => Some(Ordering::Equal),
            (Self::NegInfinity, Self::Finite(_)) => Some(Ordering::Less),
            (Self::Finite(_), Self::NegInfinity) => Some(Ordering::Greater),
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl<T: Scalar> fmt::Display for ExtendedReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(x) => write!(f, "{x}"),
            Self::NegInfinity => f.write_str("-inf"),
        }
    }
}

/// Serialized as a JSON number, or the string `"-inf"`.
impl<T: Serialize> Serialize for ExtendedReal<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(x) => x.serialize(s),
            Self::NegInfinity => s.serialize_str("-inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_places_neg_infinity_below_everything() {
        let lo = ExtendedReal::<f64>::NegInfinity;
        let hi = ExtendedReal::Finite(-1e300);
        assert!(lo < hi);
        assert_eq!(lo.partial_cmp(&lo), Some(Ordering::Equal));
        assert_eq!((hi + lo), lo);
    }

    #[test]
    fn ln_of_zero_is_marker() {
        assert_eq!(ExtendedReal::ln_of(0.0f64), ExtendedReal::NegInfinity);
        assert_eq!(ExtendedReal::ln_of(1.0f32), ExtendedReal::Finite(0.0));
        assert_eq!(ExtendedReal::<f64>::from_log(f64::NEG_INFINITY), ExtendedReal::NegInfinity);
        assert_eq!(ExtendedReal::<f64>::NegInfinity.exp(), 0.0);
    }

    #[test]
    fn serializes_marker_as_string() {
        let v = serde_json::to_string(&ExtendedReal::<f64>::NegInfinity).unwrap();
        assert_eq!(v, "\"-inf\"");
        assert_eq!(serde_json::to_string(&ExtendedReal::Finite(1.5f64)).unwrap(), "1.5");
    }
}
