//! Clebsch–Gordan coefficients by ladder-operator recursion.
//!
//! This is a second, independent route to the same numbers as the Racah
//! formula. For each total `j` (from `j1 + j2` downwards) the highest-weight
//! state is fixed by `J+ |j j> = 0`, normalised, and phased so that
//! `<j1 j1; j2 j-j1 | j j> > 0`; the remaining states of the multiplet
//! follow from repeated application of `J-`. All arithmetic is exact.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::surd::{ExactCg, SurdSum};
use super::CgError;
use crate::qn::HalfInt;

/// `j(j+1) - m(m+1)` for twice-valued `j`, `m`, as an exact rational.
fn ladder_sq(tj: i32, tm: i32) -> BigRational {
    // (tj(tj+2) - tm(tm+2)) / 4
    BigRational::new(BigInt::from(tj * (tj + 2) - tm * (tm + 2)), BigInt::from(4))
}

/// Every coefficient `<j1 m1; j2 m2 | j m>` for a fixed pair `(j1, j2)`.
#[derive(Debug, Clone)]
pub struct LadderTable {
    j1: HalfInt,
    j2: HalfInt,
    // (2j, 2m, 2m1) -> coefficient
    entries: HashMap<(i32, i32, i32), ExactCg>,
}

impl LadderTable {
    pub fn j1(&self) -> HalfInt {
        self.j1
    }

    pub fn j2(&self) -> HalfInt {
        self.j2
    }

    pub fn get(&self, m1: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> ExactCg {
        if m1 + m2 != m {
            return ExactCg::zero();
        }
        self.entries.get(&(j.twice(), m.twice(), m1.twice())).cloned().unwrap_or_else(ExactCg::zero)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Builds the full coefficient table for `j1 ⊗ j2`.
pub fn ladder_table(j1: HalfInt, j2: HalfInt) -> Result<LadderTable, CgError> {
    if j1.twice() < 0 || j2.twice() < 0 {
        return Err(CgError::Inconsistent(format!("negative angular momentum in {j1} x {j2}")));
    }
    let (t1, t2) = (j1.twice(), j2.twice());
    let mut entries = HashMap::new();

    let mut tj = t1 + t2;
    while tj >= (t1 - t2).abs() {
        // Highest weight: coefficients c(m1) with m2 = j - m1, from m1 = j1 down.
        let lo_m1 = (-t1).max(tj - t2);
        let mut top: Vec<(i32, ExactCg)> = vec![(t1, ExactCg::one())];
        let mut tm1 = t1;
        while tm1 - 2 >= lo_m1 {
            // a c(m1-1) + b c(m1) = 0 from the J+ component at (m1, j+1-m1)
            let tm2_target = tj + 2 - tm1;
            let a = ladder_sq(t1, tm1 - 2);
            let b = ladder_sq(t2, tm2_target - 2);
            let prev = &top.last().expect("seeded").1;
            let next = -(prev * &ExactCg::sqrt_of(b)).checked_div(&ExactCg::sqrt_of(a)).ok_or_else(|| {
                CgError::Inconsistent(format!("vanishing ladder element at j={}", HalfInt::from_twice(tj)))
            })?;
            top.push((tm1 - 2, next));
            tm1 -= 2;
        }
        let norm: BigRational = top.iter().map(|(_, c)| c.square()).sum();
        let inv_norm = ExactCg::sqrt_of(norm.recip());
        let mut state: HashMap<i32, ExactCg> = top.into_iter().map(|(m1, c)| (m1, &c * &inv_norm)).collect();

        let mut tm = tj;
        loop {
            for (&m1, c) in &state {
                entries.insert((tj, tm, m1), c.clone());
            }
            if tm == -tj {
                break;
            }
            // |j, m-1> = J- |j, m> / sqrt(j(j+1) - m(m-1))
            let norm = ExactCg::sqrt_of(ladder_sq(tj, tm - 2));
            let mut next: HashMap<i32, SurdSum> = HashMap::new();
            for (&m1, c) in &state {
                let m2 = tm - m1;
                if m1 - 2 >= -t1 {
                    let step = ExactCg::sqrt_of(ladder_sq(t1, m1 - 2));
                    next.entry(m1 - 2).or_default().push(&(c * &step));
                }
                if m2 - 2 >= -t2 {
                    let step = ExactCg::sqrt_of(ladder_sq(t2, m2 - 2));
                    next.entry(m1).or_default().push(&(c * &step));
                }
            }
            let mut lowered = HashMap::with_capacity(next.len());
            for (m1, sum) in next {
                let value = sum.as_single().ok_or_else(|| {
                    CgError::Inconsistent("ladder recursion produced incommensurate surds".to_string())
                })?;
                let value = value.checked_div(&norm).unwrap_or_else(ExactCg::zero);
                if !value.magnitude_squared().is_zero() {
                    lowered.insert(m1, value);
                }
            }
            state = lowered;
            tm -= 2;
        }
        tj -= 2;
    }
    Ok(LadderTable { j1, j2, entries })
}
