//! Exact heaviness thresholds.
//!
//! A threshold is a positive rational, optionally multiplied by a rational
//! power `base^exponent` of a rational base. The power form carries the
//! `K^(1/2-δ)` growth factors of the weak-growth process without rounding:
//! comparisons raise both sides to the exponent's denominator and compare
//! integers.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalPower {
    pub base: BigRational,
    pub exponent: BigRational,
}

/// `λ = scale · base^exponent` with `scale > 0`, `base > 0`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeavinessThreshold {
    scale: BigRational,
    power: Option<RationalPower>,
}

impl HeavinessThreshold {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Result<Self> {
        let den = denominator.into();
        if den.is_zero() {
            return Err(LabError::InvalidParams(
                "threshold denominator is zero".into(),
            ));
        }
        Self::from_rational(BigRational::new(numerator.into(), den))
    }

    pub fn from_rational(scale: BigRational) -> Result<Self> {
        if !scale.is_positive() {
            return Err(LabError::InvalidParams(format!(
                "threshold {scale} is not positive"
            )));
        }
        Ok(HeavinessThreshold { scale, power: None })
    }

    pub fn from_integer(v: impl Into<BigInt>) -> Result<Self> {
        Self::from_rational(BigRational::from_integer(v.into()))
    }

    pub fn one() -> Self {
        HeavinessThreshold {
            scale: BigRational::one(),
            power: None,
        }
    }

    /// The rational value, when there is no irrational power factor.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.power {
            None => Some(&self.scale),
            Some(p) if p.exponent.is_zero() => Some(&self.scale),
            Some(_) => None,
        }
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    pub fn power(&self) -> Option<&RationalPower> {
        self.power.as_ref()
    }

    /// Multiply by a positive rational.
    pub fn scaled(&self, factor: &BigRational) -> Result<Self> {
        if !factor.is_positive() {
            return Err(LabError::InvalidParams(
                "scale factor must be positive".into(),
            ));
        }
        Ok(HeavinessThreshold {
            scale: &self.scale * factor,
            power: self.power.clone(),
        })
    }

    pub fn half(&self) -> Self {
        self.div_pow2(1)
    }

    pub fn div_pow2(&self, k: u32) -> Self {
        HeavinessThreshold {
            scale: &self.scale / BigRational::from_integer(BigInt::one() << k),
            power: self.power.clone(),
        }
    }

    pub fn mul_pow2(&self, k: u32) -> Self {
        HeavinessThreshold {
            scale: &self.scale * BigRational::from_integer(BigInt::one() << k),
            power: self.power.clone(),
        }
    }

    /// Multiply by `base^exponent`. Powers of the same base accumulate.
    pub fn times_power(&self, base: &BigRational, exponent: &BigRational) -> Result<Self> {
        if !base.is_positive() {
            return Err(LabError::InvalidParams(
                "power base must be positive".into(),
            ));
        }
        let power = match &self.power {
            None => RationalPower {
                base: base.clone(),
                exponent: exponent.clone(),
            },
            Some(p) if p.base == *base => RationalPower {
                base: base.clone(),
                exponent: &p.exponent + exponent,
            },
            Some(p) if p.exponent.is_zero() => RationalPower {
                base: base.clone(),
                exponent: exponent.clone(),
            },
            Some(_) => {
                return Err(LabError::InvalidParams(
                    "threshold already carries a power of a different base".into(),
                ))
            }
        };
        Ok(HeavinessThreshold {
            scale: self.scale.clone(),
            power: Some(power),
        })
    }

    /// Order of `|v|` relative to the threshold.
    pub fn cmp_abs(&self, v: &BigInt) -> Ordering {
        let abs = v.abs();
        let (cn, cd) = (self.scale.numer(), self.scale.denom());
        let power = match &self.power {
            Some(p) if !p.exponent.is_zero() => p,
            _ => return (&abs * cd).cmp(cn),
        };
        if abs.is_zero() {
            return Ordering::Less;
        }
        let t = exp_u32(power.exponent.denom());
        let s = power.exponent.numer();
        let s_abs = exp_u32(&s.abs());
        let (bn, bd) = (power.base.numer(), power.base.denom());
        // |v|^t · cd^t · (bd^s | bn^|s|)  vs  cn^t · (bn^s | bd^|s|)
        let (b_left, b_right) = if s.is_positive() { (bd, bn) } else { (bn, bd) };
        let lhs = Pow::pow(&abs, t) * Pow::pow(cd, t) * Pow::pow(b_left, s_abs);
        let rhs = Pow::pow(cn, t) * Pow::pow(b_right, s_abs);
        lhs.cmp(&rhs)
    }

    /// `|v| ≥ λ`.
    pub fn admits(&self, v: &BigInt) -> bool {
        self.cmp_abs(v) != Ordering::Less
    }

    /// Smallest non-negative integer `v` with `v ≥ λ`.
    pub fn min_admitted(&self) -> BigInt {
        if let Some(r) = self.as_rational() {
            return r.ceil().to_integer();
        }
        let mut hi = BigInt::one();
        while !self.admits(&hi) {
            hi <<= 1u32;
        }
        let mut lo = BigInt::zero();
        // invariant: lo not admitted, hi admitted
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1u32;
            if self.admits(&mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// `min_admitted` as a machine integer, saturating.
    pub fn min_admitted_u128(&self) -> u128 {
        self.min_admitted().to_u128().unwrap_or(u128::MAX)
    }

    /// Natural logarithm, for reporting only.
    pub fn ln(&self) -> f64 {
        let mut out = ln_rational(&self.scale);
        if let Some(p) = &self.power {
            out += p.exponent.to_f64().unwrap_or(f64::NAN) * ln_rational(&p.base);
        }
        out
    }
}

impl fmt::Display for HeavinessThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scale)?;
        if let Some(p) = &self.power {
            if !p.exponent.is_zero() {
                write!(f, "*({})^({})", p.base, p.exponent)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for HeavinessThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "λ={self}")
    }
}

fn exp_u32(v: &BigInt) -> u32 {
    v.to_u32().expect("threshold exponent parts fit in 32 bits")
}

/// `ln |x|` for arbitrarily large integers.
pub fn ln_bigint(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits < 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x.abs() >> shift).to_f64().expect("64-bit mantissa");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_rational(x: &BigRational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}
