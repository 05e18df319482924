//! Exact arithmetic on signed square roots of rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `sign * sqrt(magnitude_squared)` held exactly.
///
/// Every Clebsch–Gordan coefficient has this form, as does every ratio or
/// product of them, so the algebra on coefficients never rounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactCg {
    sign: i8,
    magnitude_squared: BigRational,
}

impl ExactCg {
    pub fn zero() -> Self {
        ExactCg { sign: 0, magnitude_squared: BigRational::zero() }
    }

    pub fn one() -> Self {
        ExactCg { sign: 1, magnitude_squared: BigRational::one() }
    }

    /// Builds `sign * sqrt(sq)`. A zero `sq` forces sign 0; a zero sign with
    /// non-zero `sq` is normalised to zero as well.
    pub fn new(sign: i8, magnitude_squared: BigRational) -> Self {
        assert!(!magnitude_squared.is_negative(), "negative magnitude squared");
        if sign == 0 || magnitude_squared.is_zero() {
            return Self::zero();
        }
        ExactCg { sign: sign.signum(), magnitude_squared }
    }

    /// The exact value of a rational number `q`.
    pub fn from_rational(q: &BigRational) -> Self {
        let sign = match q.cmp(&BigRational::zero()) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        };
        Self::new(sign, q * q)
    }

    /// `sqrt(q)` for non-negative `q`.
    pub fn sqrt_of(q: BigRational) -> Self {
        Self::new(1, q)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn magnitude_squared(&self) -> &BigRational {
        &self.magnitude_squared
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// `value²`, which is always rational.
    pub fn square(&self) -> BigRational {
        self.magnitude_squared.clone()
    }

    /// The value as a rational, when the square root is exact.
    pub fn as_rational(&self) -> Option<BigRational> {
        let root = rational_sqrt(&self.magnitude_squared)?;
        Some(if self.sign < 0 { -root } else { root })
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let mag = rational_to_f64(&self.magnitude_squared).sqrt();
        if self.sign < 0 { -mag } else { mag }
    }

    pub fn checked_div(&self, rhs: &ExactCg) -> Option<ExactCg> {
        if rhs.is_zero() {
            return None;
        }
        Some(ExactCg::new(self.sign * rhs.sign, &self.magnitude_squared / &rhs.magnitude_squared))
    }

    /// Sum of two surds with commensurate radicands, `None` otherwise.
    pub fn checked_add(&self, rhs: &ExactCg) -> Option<ExactCg> {
        let mut acc = SurdSum::default();
        acc.push(self);
        acc.push(rhs);
        acc.as_single()
    }
}

impl Mul for &ExactCg {
    type Output = ExactCg;
    fn mul(self, rhs: &ExactCg) -> ExactCg {
        ExactCg::new(self.sign * rhs.sign, &self.magnitude_squared * &rhs.magnitude_squared)
    }
}

impl Mul for ExactCg {
    type Output = ExactCg;
    fn mul(self, rhs: ExactCg) -> ExactCg {
        &self * &rhs
    }
}

impl Div for &ExactCg {
    type Output = ExactCg;
    fn div(self, rhs: &ExactCg) -> ExactCg {
        self.checked_div(rhs).expect("division by a zero surd")
    }
}

impl Neg for ExactCg {
    type Output = ExactCg;
    fn neg(self) -> ExactCg {
        ExactCg { sign: -self.sign, magnitude_squared: self.magnitude_squared }
    }
}

impl fmt::Display for ExactCg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => {
                let sign = if s < 0 { "-" } else { "" };
                match rational_sqrt(&self.magnitude_squared) {
                    Some(root) => write!(f, "{sign}{root}"),
                    None => write!(f, "{sign}sqrt({})", self.magnitude_squared),
                }
            }
        }
    }
}

/// An exact sum `Σ c_g sqrt(r_g)` with pairwise incommensurate radicands.
///
/// Square roots of rationals that are not rational multiples of each other
/// are linearly independent over Q, so the sum is zero exactly when every
/// group coefficient is zero.
#[derive(Debug, Clone, Default)]
pub struct SurdSum {
    groups: Vec<(BigRational, BigRational)>,
}

impl SurdSum {
    pub fn push(&mut self, term: &ExactCg) {
        if term.is_zero() {
            return;
        }
        let q = term.magnitude_squared();
        let s = BigRational::from_integer(BigInt::from(term.sign()));
        for (base, coeff) in &mut self.groups {
            if let Some(ratio) = rational_sqrt(&(q / &*base)) {
                *coeff += s * ratio;
                return;
            }
        }
        self.groups.push((q.clone(), s));
    }

    pub fn is_zero(&self) -> bool {
        self.groups.iter().all(|(_, c)| c.is_zero())
    }

    /// The sum as a single surd, if it collapsed to one radicand.
    pub fn as_single(&self) -> Option<ExactCg> {
        let mut live = self.groups.iter().filter(|(_, c)| !c.is_zero());
        match (live.next(), live.next()) {
            (None, _) => Some(ExactCg::zero()),
            (Some((base, coeff)), None) => {
                let sign = if coeff.is_negative() { -1 } else { 1 };
                Some(ExactCg::new(sign, coeff * coeff * base))
            }
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.groups.iter().map(|(base, coeff)| rational_to_f64(coeff) * rational_to_f64(base).sqrt()).sum()
    }
}

/// Exact square root of a non-negative rational, if it is rational.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = exact_isqrt(q.numer())?;
    let d = exact_isqrt(q.denom())?;
    Some(BigRational::new(n, d))
}

fn exact_isqrt(v: &BigInt) -> Option<BigInt> {
    if v.sign() == Sign::Minus {
        return None;
    }
    let r = v.sqrt();
    (&r * &r == *v).then_some(r)
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Fallback for magnitudes beyond f64 range; never hit for j <= 50.
        q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
    })
}
