//! Linear-domain quantities. Decibels only appear at parse and print
//! boundaries; every formula in the crate works on linear values.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// A level or ratio expressed in decibels.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
pub struct Decibel(pub f64);

impl Decibel {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_linear(self) -> LinearRatio {
        LinearRatio(db_to_linear(self.0))
    }
}

impl fmt::Display for Decibel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dB", self.0)
    }
}

/// A strictly positive dimensionless ratio (gain, loss, waste factor).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct LinearRatio(f64);

impl LinearRatio {
    pub const ONE: LinearRatio = LinearRatio(1.0);

    /// `+inf` is accepted; it stands for a fully lossy link.
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::NonPositive {
                what: "linear ratio",
                value,
            })
        }
    }

    pub fn from_db(db: f64) -> Self {
        Decibel(db).to_linear()
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_db(self) -> Decibel {
        Decibel(linear_to_db(self.0))
    }
}

/// Power in watts.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Power(f64);

impl Power {
    pub const ZERO: Power = Power(0.0);

    pub fn from_watts(watts: f64) -> Result<Self> {
        if watts >= 0.0 && watts.is_finite() {
            Ok(Self(watts))
        } else {
            Err(Error::InvalidArgument(format!(
                "power must be finite and non-negative, got {watts} W"
            )))
        }
    }

    pub fn from_dbm(dbm: f64) -> Self {
        Self(db_to_linear(dbm - 30.0))
    }

    pub fn from_dbw(dbw: f64) -> Self {
        Self(db_to_linear(dbw))
    }

    pub fn watts(self) -> f64 {
        self.0
    }

    pub fn dbm(self) -> f64 {
        linear_to_db(self.0) + 30.0
    }

    pub fn dbw(self) -> f64 {
        linear_to_db(self.0)
    }

    pub(crate) fn raw(watts: f64) -> Self {
        debug_assert!(watts >= 0.0, "negative power {watts}");
        Self(watts)
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} W", self.0)
    }
}

impl std::ops::Add for Power {
    type Output = Power;
    fn add(self, rhs: Power) -> Power {
        Power(self.0 + rhs.0)
    }
}

impl std::iter::Sum for Power {
    fn sum<I: Iterator<Item = Power>>(iter: I) -> Power {
        Power(iter.map(|p| p.0).sum())
    }
}
