//! Exact Clebsch–Gordan coefficients and the dark-state weights built from
//! them.
//!
//! Coefficients follow the Condon–Shortley phase convention:
//! `<j1 j1; j2 (j - j1) | j j> > 0`. The relative signs of the `R_m` ratios
//! depend on this choice, and the half-period partial revival
//! `(Σ R_m R_{-m} / Σ R_m²)²` depends on those relative signs.

mod ladder;
mod surd;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::qn::HalfInt;

pub use ladder::{ladder_table, LadderTable};
pub use surd::{rational_sqrt, rational_to_f64, ExactCg, SurdSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CgError {
    #[error("inconsistent quantum numbers: {0}")]
    Inconsistent(String),
    #[error("levels F={from} -> F'={to} are not connected by an electric dipole transition")]
    NotDipoleAllowed { from: HalfInt, to: HalfInt },
    #[error("only sigma+ (helicity +1) signal and control are supported, got {0}")]
    UnsupportedPolarization(i32),
    #[error("unconnected lambda configuration: R_m is infinite for m in {0:?}")]
    Unconnected(Vec<String>),
}

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `(a ± b ± c) / 2` for twice-valued inputs, which must be an integer.
fn half_sum(twice: i32) -> i64 {
    debug_assert!(twice % 2 == 0);
    (twice / 2) as i64
}

fn check_projection(j: HalfInt, m: HalfInt, label: &str) -> Result<(), CgError> {
    if j.twice() < 0 {
        return Err(CgError::Inconsistent(format!("{label} = {j} is negative")));
    }
    if (j.twice() - m.twice()) % 2 != 0 {
        return Err(CgError::Inconsistent(format!("{label} = {j} with projection {m}")));
    }
    if m.twice().abs() > j.twice() {
        return Err(CgError::Inconsistent(format!("|{m}| exceeds {label} = {j}")));
    }
    Ok(())
}

/// `<j1 m1; j2 m2 | j m>` via the Racah closed form, exactly.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<ExactCg, CgError> {
    check_projection(j1, m1, "j1")?;
    check_projection(j2, m2, "j2")?;
    check_projection(j, m, "j")?;
    if (j1.twice() + j2.twice() + j.twice()) % 2 != 0 {
        return Err(CgError::Inconsistent(format!("j1 + j2 + j = {j1} + {j2} + {j} is not an integer")));
    }
    if m1 + m2 != m {
        return Ok(ExactCg::zero());
    }
    let (tj1, tj2, tj) = (j1.twice(), j2.twice(), j.twice());
    if tj > tj1 + tj2 || tj < (tj1 - tj2).abs() {
        return Ok(ExactCg::zero());
    }
    let (tm1, tm2, tm) = (m1.twice(), m2.twice(), m.twice());

    let a = half_sum(tj1 + tj2 - tj);
    let b = half_sum(tj1 - tj2 + tj);
    let c = half_sum(-tj1 + tj2 + tj);
    let d = half_sum(tj1 + tj2 + tj) + 1;

    let prefactor = BigRational::new(
        BigInt::from(tj + 1) * factorial(a) * factorial(b) * factorial(c),
        factorial(d),
    ) * BigRational::from_integer(
        factorial(half_sum(tj + tm))
            * factorial(half_sum(tj - tm))
            * factorial(half_sum(tj1 - tm1))
            * factorial(half_sum(tj1 + tm1))
            * factorial(half_sum(tj2 - tm2))
            * factorial(half_sum(tj2 + tm2)),
    );

    // Σ_k (-1)^k / [k! (j1+j2-j-k)! (j1-m1-k)! (j2+m2-k)! (j-j2+m1+k)! (j-j1-m2+k)!]
    let e = half_sum(tj1 - tm1);
    let f = half_sum(tj2 + tm2);
    let g = half_sum(tj - tj2 + tm1);
    let h = half_sum(tj - tj1 - tm2);
    let k_min = 0.max(-g).max(-h);
    let k_max = a.min(e).min(f);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k) * factorial(a - k) * factorial(e - k) * factorial(f - k) * factorial(g + k) * factorial(h + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let sign = if sum.is_zero() {
        0
    } else if sum > BigRational::zero() {
        1
    } else {
        -1
    };
    Ok(ExactCg::new(sign, prefactor * &sum * &sum))
}

/// One row of [`DarkStateWeights`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightEntry {
    /// Ground sublevel `m` of level `b`; the signal drives `|b,m> -> |c,m+1>`.
    pub m: HalfInt,
    /// `R_m` exactly; `None` when the control leg is missing and `R_m` is infinite.
    pub ratio: Option<ExactCg>,
    /// `w_m = R_m² / Σ R²`, present only for connected configurations.
    pub weight: Option<BigRational>,
}

impl WeightEntry {
    pub fn r(&self) -> f64 {
        self.ratio.as_ref().map_or(f64::INFINITY, ExactCg::to_f64)
    }

    pub fn w(&self) -> f64 {
        self.weight.as_ref().map_or(f64::NAN, rational_to_f64)
    }
}

/// The `R_m` ratios for a sigma+/sigma+ lambda system and their normalised
/// weights.
///
/// Rows cover every `m` of level `b` with a non-vanishing signal coupling
/// `<F_b m; 1 1 | F_c m+1>`. For such an `m`, the control coupling
/// `<F_a m; 1 1 | F_c m+1>` either exists and is non-zero, or `|a,m>` does not
/// exist and the lambda is unconnected.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkStateWeights {
    pub f_a: HalfInt,
    pub f_b: HalfInt,
    pub f_c: HalfInt,
    pub polarization: i32,
    pub entries: Vec<WeightEntry>,
    pub connected: bool,
}

impl DarkStateWeights {
    pub fn unconnected_projections(&self) -> Vec<HalfInt> {
        self.entries.iter().filter(|e| e.ratio.is_none()).map(|e| e.m).collect()
    }

    pub fn require_connected(&self) -> Result<(), CgError> {
        if self.connected {
            Ok(())
        } else {
            Err(CgError::Unconnected(self.unconnected_projections().iter().map(ToString::to_string).collect()))
        }
    }

    pub fn entry(&self, m: HalfInt) -> Option<&WeightEntry> {
        self.entries.iter().find(|e| e.m == m)
    }

    /// `R_m` as a float; zero for sublevels without a signal transition.
    pub fn r(&self, m: HalfInt) -> f64 {
        self.entry(m).map_or(0.0, WeightEntry::r)
    }

    /// `(m, R_m)` over the finite entries.
    pub fn ratios(&self) -> impl Iterator<Item = (HalfInt, f64)> + '_ {
        self.entries.iter().filter(|e| e.ratio.is_some()).map(|e| (e.m, e.r()))
    }

    /// `Σ R_m²` exactly over the finite entries.
    pub fn sum_r_squared(&self) -> BigRational {
        self.entries.iter().filter_map(|e| e.ratio.as_ref()).map(ExactCg::square).sum()
    }

    /// `1 / (2 F_b + 1)`, the initial population per ground sublevel.
    pub fn population_per_sublevel(&self) -> f64 {
        1.0 / self.f_b.multiplicity() as f64
    }

    /// Short stable identifier of the weight set, used in output metadata.
    pub fn fingerprint(&self) -> String {
        let body: Vec<String> = self
            .entries
            .iter()
            .map(|e| match &e.weight {
                Some(w) => format!("{}:{}", e.m, w),
                None => format!("{}:inf", e.m),
            })
            .collect();
        format!("Fa={} Fb={} Fc={} [{}]", self.f_a, self.f_b, self.f_c, body.join(" "))
    }
}

fn dipole_allowed(from: HalfInt, to: HalfInt) -> bool {
    match to.int_diff(from) {
        Some(d) => d.abs() <= 1 && !(from.twice() == 0 && to.twice() == 0),
        None => false,
    }
}

/// Computes `R_m = <F_b m; 1 1|F_c m+1> / <F_a m; 1 1|F_c m+1>` for a sigma+
/// signal on `b <-> c` and a sigma+ control on `a <-> c`.
pub fn dark_state_weights(f_a: HalfInt, f_b: HalfInt, f_c: HalfInt, polarization: i32) -> Result<DarkStateWeights, CgError> {
    if polarization != 1 {
        return Err(CgError::UnsupportedPolarization(polarization));
    }
    for (label, f) in [("F_a", f_a), ("F_b", f_b), ("F_c", f_c)] {
        if f.twice() < 0 {
            return Err(CgError::Inconsistent(format!("{label} = {f} is negative")));
        }
    }
    if !dipole_allowed(f_b, f_c) {
        return Err(CgError::NotDipoleAllowed { from: f_b, to: f_c });
    }
    if !dipole_allowed(f_a, f_c) {
        return Err(CgError::NotDipoleAllowed { from: f_a, to: f_c });
    }
    let one = HalfInt::ONE;
    let mut entries = Vec::new();
    for m in f_b.projections() {
        let m_up = m + one;
        if m_up.twice().abs() > f_c.twice() {
            continue;
        }
        let signal = clebsch_gordan(f_b, m, one, one, f_c, m_up)?;
        if signal.is_zero() {
            continue;
        }
        let control = if m.twice().abs() <= f_a.twice() {
            clebsch_gordan(f_a, m, one, one, f_c, m_up)?
        } else {
            ExactCg::zero()
        };
        entries.push(WeightEntry { m, ratio: signal.checked_div(&control), weight: None });
    }
    let connected = entries.iter().all(|e| e.ratio.is_some());
    if connected {
        let total: BigRational = entries.iter().filter_map(|e| e.ratio.as_ref()).map(ExactCg::square).sum();
        for e in &mut entries {
            e.weight = e.ratio.as_ref().map(|r| r.square() / &total);
        }
    }
    Ok(DarkStateWeights { f_a, f_b, f_c, polarization, entries, connected })
}

/// `(Σ_m R_m R_{-m} / Σ_m R_m²)²` as an exact rational, when the numerator sum
/// collapses onto a single radicand (always the case for physical levels
/// seen so far, but not assumed).
pub fn exact_partial_revival_amplitude(weights: &DarkStateWeights) -> Result<Option<BigRational>, CgError> {
    weights.require_connected()?;
    let overlap = reflection_overlap(weights);
    let total = weights.sum_r_squared();
    Ok(overlap.as_single().map(|s| s.square() / (&total * &total)))
}

/// The half-Larmor-period retrieval efficiency for a field perpendicular to
/// the signal wavevector, `(Σ_m R_m R_{-m} / Σ_m R_m²)²`.
pub fn partial_revival_amplitude(weights: &DarkStateWeights) -> Result<f64, CgError> {
    if let Some(exact) = exact_partial_revival_amplitude(weights)? {
        return Ok(rational_to_f64(&exact));
    }
    let overlap = reflection_overlap(weights).to_f64();
    let total = rational_to_f64(&weights.sum_r_squared());
    Ok((overlap / total).powi(2))
}

fn reflection_overlap(weights: &DarkStateWeights) -> SurdSum {
    let by_m: BTreeMap<HalfInt, &ExactCg> =
        weights.entries.iter().filter_map(|e| e.ratio.as_ref().map(|r| (e.m, r))).collect();
    let mut sum = SurdSum::default();
    for (m, r) in &by_m {
        if let Some(r_neg) = by_m.get(&-*m) {
            sum.push(&(*r * *r_neg));
        }
    }
    sum
}
