//! Integer and half-integer quantum numbers.
//!
//! Every angular momentum and magnetic quantum number in the crate is stored
//! as twice its value, so that `3/2` is `HalfInt(3)` and arithmetic stays in
//! the integers.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QnError {
    #[error("`{0}` is not an integer or half-integer")]
    NotHalfInteger(String),
}

/// A quantum number `j`, stored as `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(v: i32) -> Self {
        HalfInt(2 * v)
    }

    /// Converts a float that must sit on the half-integer lattice.
    pub fn from_f64(v: f64) -> Result<Self, QnError> {
        let twice = 2.0 * v;
        if !twice.is_finite() || (twice - twice.round()).abs() > 1e-9 || twice.abs() > 1e6 {
            return Err(QnError::NotHalfInteger(v.to_string()));
        }
        Ok(HalfInt(twice.round() as i32))
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// `2j + 1`, the multiplicity of level `j`.
    pub const fn multiplicity(self) -> usize {
        (self.0 + 1) as usize
    }

    /// The integer `self - other`, when it is one.
    pub fn int_diff(self, other: HalfInt) -> Option<i64> {
        let d = self.0 - other.0;
        (d % 2 == 0).then_some((d / 2) as i64)
    }

    /// Magnetic sublevels `-j, -j+1, ..., +j` in ascending order.
    ///
    /// This is the basis order used by every matrix in the crate.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let j = self.0;
        (0..self.multiplicity()).map(move |k| HalfInt(-j + 2 * k as i32))
    }

    /// Row/column index of sublevel `m` inside the `2j+1` ascending basis.
    pub fn index_of(self, m: HalfInt) -> Option<usize> {
        if m.0.abs() > self.0 || (self.0 - m.0) % 2 != 0 {
            return None;
        }
        Some(((m.0 + self.0) / 2) as usize)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Accepts `3`, `-1`, `3/2`, `1.5`.
impl FromStr for HalfInt {
    type Err = QnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || QnError::NotHalfInteger(s.to_string());
        if let Some((num, den)) = t.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "1" => Ok(HalfInt(2 * num)),
                "2" => Ok(HalfInt(num)),
                _ => Err(bad()),
            }
        } else if let Ok(v) = t.parse::<i32>() {
            Ok(HalfInt(2 * v))
        } else {
            let v: f64 = t.parse().map_err(|_| bad())?;
            HalfInt::from_f64(v).map_err(|_| bad())
        }
    }
}
