//! Nonnegative binary fixed-point arithmetic on big integers.
//!
//! A value is `mantissa * 2^-scale`. Addition is exact; multiplication and
//! division truncate toward zero, so every operation is within one ulp
//! (`2^-scale`) of the exact result and all rounding is one-sided. Error
//! budgets elsewhere in the crate count ulps per operation against this
//! contract.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FixnumError {
    #[error("certified error {error} is not below 10^-{digits}; refusing to print {digits} digits")]
    ErrorTooLarge { digits: u32, error: String },
}

/// `mantissa * 2^-scale`, mantissa an arbitrary-size nonnegative integer.
///
/// All operands of a binary operation must share the scale; mixing scales is
/// a logic error and panics.
#[derive(Clone, PartialEq, Eq)]
pub struct FixedReal {
    mantissa: BigUint,
    scale: u32,
}

impl FixedReal {
    pub fn zero(scale: u32) -> Self {
        FixedReal { mantissa: BigUint::zero(), scale }
    }

    pub fn one(scale: u32) -> Self {
        FixedReal { mantissa: BigUint::one() << scale, scale }
    }

    pub fn from_mantissa(mantissa: BigUint, scale: u32) -> Self {
        FixedReal { mantissa, scale }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Truncation of `p/q`; within one ulp, exact when `q` divides `p << scale`.
    pub fn from_rational(p: &BigUint, q: &BigUint, scale: u32) -> Self {
        assert!(!q.is_zero(), "denominator must be positive");
        FixedReal { mantissa: (p << scale) / q, scale }
    }

    /// Truncation of a nonnegative big rational.
    pub fn from_big_rational(r: &BigRational, scale: u32) -> Self {
        assert!(!r.is_negative(), "fixed-point values are nonnegative");
        Self::from_rational(
            &r.numer().magnitude().clone(),
            &r.denom().magnitude().clone(),
            scale,
        )
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            self.mantissa.clone().into(),
            (BigUint::one() << self.scale).into(),
        )
    }

    /// Exact.
    pub fn add(&self, other: &FixedReal) -> FixedReal {
        assert_eq!(self.scale, other.scale, "scale mismatch");
        FixedReal { mantissa: &self.mantissa + &other.mantissa, scale: self.scale }
    }

    /// Exact; panics on underflow, which signals a logic error (all hot-path
    /// quantities are nonnegative and never subtracted below zero).
    pub fn sub(&self, other: &FixedReal) -> FixedReal {
        self.checked_sub(other).expect("fixed-point subtraction underflow")
    }

    pub fn checked_sub(&self, other: &FixedReal) -> Option<FixedReal> {
        assert_eq!(self.scale, other.scale, "scale mismatch");
        if self.mantissa < other.mantissa {
            None
        } else {
            Some(FixedReal { mantissa: &self.mantissa - &other.mantissa, scale: self.scale })
        }
    }

    /// Truncates the `2*scale`-bit product back to `scale` bits; one ulp.
    pub fn mul(&self, other: &FixedReal) -> FixedReal {
        assert_eq!(self.scale, other.scale, "scale mismatch");
        FixedReal { mantissa: (&self.mantissa * &other.mantissa) >> self.scale, scale: self.scale }
    }

    /// Multiplication by a nonnegative integer; exact.
    pub fn mul_int(&self, k: &BigUint) -> FixedReal {
        FixedReal { mantissa: &self.mantissa * k, scale: self.scale }
    }

    pub fn mul_u64(&self, k: u64) -> FixedReal {
        FixedReal { mantissa: &self.mantissa * k, scale: self.scale }
    }

    /// Truncated division by a positive integer; one ulp.
    pub fn div_int(&self, n: &BigUint) -> FixedReal {
        assert!(!n.is_zero(), "division by zero");
        FixedReal { mantissa: &self.mantissa / n, scale: self.scale }
    }

    pub fn div_u64(&self, n: u64) -> FixedReal {
        assert!(n != 0, "division by zero");
        FixedReal { mantissa: &self.mantissa / n, scale: self.scale }
    }

    /// Rescale. Widening is exact; narrowing truncates (one ulp at the new
    /// scale).
    pub fn to_scale(&self, scale: u32) -> FixedReal {
        let mantissa = if scale >= self.scale {
            &self.mantissa << (scale - self.scale)
        } else {
            &self.mantissa >> (self.scale - scale)
        };
        FixedReal { mantissa, scale }
    }

    /// `min(self, 1)`; used to keep quantities that are provably <= 1 inside
    /// [0, 1] after one-sided rounding slack.
    pub fn clamp_one(self) -> FixedReal {
        let one = BigUint::one() << self.scale;
        if self.mantissa > one {
            FixedReal { mantissa: one, scale: self.scale }
        } else {
            self
        }
    }

    pub fn cmp_value(&self, other: &FixedReal) -> std::cmp::Ordering {
        assert_eq!(self.scale, other.scale, "scale mismatch");
        self.mantissa.cmp(&other.mantissa)
    }
}

impl fmt::Debug for FixedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedReal({} / 2^{})", self.mantissa, self.scale)
    }
}

/// One multiplicative step of the central binomial reciprocal:
/// from `1/C(2n-2, n-1)` to `1/C(2n, n)` via `prev * n / (2(2n-1))`.
/// The integer multiply is exact, the division truncates, so each step costs
/// at most one ulp on top of `prev`'s error scaled by `n/(4n-2) <= 1/2`; the
/// accumulated error therefore stays below two ulps at every index.
pub fn binom_recip_step(prev: &FixedReal, n: u64) -> FixedReal {
    assert!(n >= 1);
    prev.mul_u64(n).div_u64(2 * (2 * n - 1))
}

/// Prints `digits` digits after the decimal point by truncating the value.
/// Requires `certified_error < 10^-digits`; the printed string is then within
/// two units in the last printed place of the true value.
pub fn to_decimal(x: &FixedReal, digits: u32, certified_error: &BigRational) -> Result<String, FixnumError> {
    let bound = BigRational::new(1.into(), pow10(digits).into());
    if certified_error >= &bound {
        return Err(FixnumError::ErrorTooLarge {
            digits,
            error: ratio_to_sci(certified_error, 3),
        });
    }
    let shifted = (x.mantissa() * pow10(digits)) >> x.scale();
    let ten_d = pow10(digits);
    let int_part = &shifted / &ten_d;
    let frac_part = &shifted % &ten_d;
    let mut frac = frac_part.to_str_radix(10);
    while (frac.len() as u32) < digits {
        frac.insert(0, '0');
    }
    Ok(format!("{}.{}", int_part, frac))
}

pub fn pow10(d: u32) -> BigUint {
    BigUint::from(10u32).pow(d)
}

/// Short scientific-notation rendering of a nonnegative rational, for
/// reporting certified error bounds. Rounds the mantissa up so the printed
/// bound is still a bound.
pub fn ratio_to_sci(r: &BigRational, sig: u32) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    assert!(!r.is_negative());
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    // exponent e with 10^e <= r < 10^{e+1}
    let mut e: i64 = num.bits() as i64 - den.bits() as i64;
    e = (e * 30103) / 100000 - 1;
    let scale_up = |e: i64| -> BigUint {
        // floor(r / 10^e) as an integer, for moderate |e|
        if e >= 0 {
            num / (den * pow10(e as u32))
        } else {
            (num * pow10((-e) as u32)) / den
        }
    };
    while scale_up(e).bits() == 0 {
        e -= 1;
    }
    while scale_up(e + 1).bits() > 0 {
        e += 1;
    }
    // now 10^e <= r < 10^{e+1}
    let shift = sig as i64 - 1;
    let m = scale_up(e - shift);
    let rem_exact = if e - shift >= 0 {
        (num % (den * pow10((e - shift) as u32))).is_zero()
    } else {
        ((num * pow10((shift - e) as u32)) % den).is_zero()
    };
    let m = if rem_exact { m } else { m + 1u32 };
    let s = m.to_str_radix(10);
    let (head, tail) = s.split_at(1);
    let e_adj = e + (s.len() as i64 - sig as i64);
    if tail.is_empty() {
        format!("{}e{}", head, e_adj)
    } else {
        format!("{}.{}e{}", head, tail, e_adj)
    }
}

/// Scale and per-step rounding budget for a target decimal precision.
#[derive(Clone, Debug)]
pub struct PrecisionPlan {
    pub digits: u32,
    pub scale: u32,
    /// Bound on the rounding error of one full recurrence step, `8 * 2^-scale`.
    pub step_alpha: BigRational,
}

impl PrecisionPlan {
    /// `scale = ceil(digits * log2(10)) + 3 * ceil(log2(n_iters + 1)) + 16`
    /// guard bits, enough to absorb the cubic-in-N rounding amplification of
    /// the descending recurrence.
    pub fn new(digits: u32, n_iters: u64) -> Self {
        let base = pow10(digits).bits() as u32;
        let scale = base + 3 * bits_of(n_iters + 1) + 16;
        PrecisionPlan { digits, scale, step_alpha: step_alpha(scale) }
    }

    pub fn target(&self) -> BigRational {
        BigRational::new(1.into(), pow10(self.digits).into())
    }
}

pub fn step_alpha(scale: u32) -> BigRational {
    BigRational::new(8.into(), (BigUint::one() << scale).into())
}

pub fn bits_of(n: u64) -> u32 {
    64 - n.leading_zeros()
}

/// `2^-scale` as a rational.
pub fn ulp(scale: u32) -> BigRational {
    BigRational::new(1.into(), (BigUint::one() << scale).into())
}
