//! Double tails `zeta(w)_{m,n}`: base cases, series oracle, single-step
//! recurrences, duality and bounds.
//!
//! The series oracle sums the defining nested series directly and returns a
//! value together with a certified error (truncation remainder plus tracked
//! fixed-point rounding). It is deliberately independent of the recurrence
//! and central-binomial algorithms it is used to check.

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::consts::ln2_upper;
use crate::fixnum::{bits_of, FixedReal};
use crate::words::{decompose, Composition, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TailError {
    #[error("composition/word must be non-empty and admissible")]
    NotAdmissible,
    #[error("index (m={m}, n={n}) is invalid for word {word}")]
    InvalidIndex { word: String, m: u64, n: u64 },
    #[error("target error must be positive")]
    BadTarget,
    #[error("cannot certify target {target} within the summation cap (achievable about {achievable})")]
    TargetTooTight { target: String, achievable: String },
    #[error("recurrence hypothesis violated for word {word} at (m={m}, n={n})")]
    Hypothesis { word: String, m: u64, n: u64 },
    #[error("missing table entry for word {0}")]
    MissingEntry(String),
}

/// A computed value together with a proved bound on its distance from the
/// true value.
#[derive(Clone, Debug)]
pub struct Certified {
    pub value: BigRational,
    pub error: BigRational,
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn ratio(p: u64, q: u64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn ratio_big(p: BigUint, q: BigUint) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// Def. 2 hypotheses: `m >= 1` when the word starts with 1, `n >= 1` when it
/// ends with 0. The empty word is valid at every index.
pub fn index_valid(w: &Word, m: u64, n: u64) -> bool {
    (!w.starts_with_one() || m >= 1) && (!w.ends_with_zero() || n >= 1)
}

/// `zeta(empty)_{m,n} = m! n! / (m+n)! = 1 / C(m+n, m)`.
pub fn base_empty(m: u64, n: u64) -> BigRational {
    ratio_big(BigUint::one(), binomial(big(m + n), big(m.min(n))))
}

/// `zeta(0)_{m,n} = m! (n-1)! / (m+n)!`; requires `n >= 1`.
pub fn base_zero(m: u64, n: u64) -> Result<BigRational, TailError> {
    if n == 0 {
        return Err(TailError::InvalidIndex { word: "0".into(), m, n });
    }
    Ok(base_empty(m, n) / BigRational::new(n.into(), 1.into()))
}

/// `zeta(1)_{m,n} = (m-1)! n! / (m+n)!`; requires `m >= 1`.
pub fn base_one(m: u64, n: u64) -> Result<BigRational, TailError> {
    if m == 0 {
        return Err(TailError::InvalidIndex { word: "1".into(), m, n });
    }
    Ok(base_empty(m, n) / BigRational::new(m.into(), 1.into()))
}

/// `c_{m,n} = m^m n^n / (m+n)^{m+n}` with `0^0 = 1`; the sup of
/// `(1-t)^m t^n` on [0,1]. Equals `4^-n` on the diagonal.
pub fn bound_c(m: u64, n: u64) -> BigRational {
    assert!(m + n >= 1, "bound_c needs m + n >= 1");
    let pw = |x: u64| -> BigUint {
        if x == 0 {
            BigUint::one()
        } else {
            big(x).pow(x.try_into().expect("exponent fits u32"))
        }
    };
    ratio_big(pw(m) * pw(n), pw(m + n))
}

/// Closed-form equivalent of the plain n-tail `zeta(c)_{0,n}` as n grows:
/// `n^{r-k} / ((a_1 - 1)(a_1 + a_2 - 2) ... (a_1 + ... + a_r - r))`.
pub fn ntail_asymptotic(c: &Composition, n: u64) -> Result<BigRational, TailError> {
    if c.is_empty() || !c.is_admissible() {
        return Err(TailError::NotAdmissible);
    }
    assert!(n >= 1);
    let k = c.weight();
    let r = c.depth() as u64;
    let mut denom = BigUint::one();
    let mut partial = 0u64;
    for (j, &a) in c.parts().iter().enumerate() {
        partial += a;
        denom *= big(partial - (j as u64 + 1));
    }
    let power = big(n).pow((k - r).try_into().expect("weight fits u32"));
    Ok(ratio_big(BigUint::one(), denom * power))
}

/// `zeta(w)_{m,n} = zeta(dual(w))_{n,m}`.
pub fn dual_index(w: &Word, m: u64, n: u64) -> (Word, u64, u64) {
    (w.dual(), n, m)
}

/// A reference to one double tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailRef {
    pub word: Word,
    pub m: u64,
    pub n: u64,
}

/// One recurrence identity: the left-hand tail expressed as a rational
/// combination of other tails.
#[derive(Clone, Debug)]
pub struct TailExpr {
    pub lhs: TailRef,
    pub terms: Vec<(BigRational, TailRef)>,
}

fn hypothesis_err(w: &Word, m: u64, n: u64) -> TailError {
    TailError::Hypothesis { word: w.to_string(), m, n }
}

/// `zeta(w0)_{m,n} = n^-1 zeta(w)_{m,n}` for `n >= 1`, `m >= 1` or `w` not
/// starting with 1.
pub fn append_zero(w: &Word, m: u64, n: u64) -> Result<TailExpr, TailError> {
    if n < 1 || (m < 1 && w.starts_with_one()) {
        return Err(hypothesis_err(w, m, n));
    }
    let lhs = TailRef { word: w.concat(&"0".parse().unwrap()), m, n };
    Ok(TailExpr {
        lhs,
        terms: vec![(ratio(1, n), TailRef { word: w.clone(), m, n })],
    })
}

/// `zeta(w1)_{m,n-1} = zeta(w1)_{m,n} + n^-1 zeta(w)_{m,n}` for `n >= 1`,
/// `m >= 1` or `w` starting with 0.
pub fn append_one(w: &Word, m: u64, n: u64) -> Result<TailExpr, TailError> {
    let starts_zero = !w.is_empty() && !w.starts_with_one();
    if n < 1 || (m < 1 && !starts_zero) {
        return Err(hypothesis_err(w, m, n));
    }
    let w1 = w.concat(&"1".parse().unwrap());
    Ok(TailExpr {
        lhs: TailRef { word: w1.clone(), m, n: n - 1 },
        terms: vec![
            (BigRational::one(), TailRef { word: w1, m, n }),
            (ratio(1, n), TailRef { word: w.clone(), m, n }),
        ],
    })
}

/// `zeta(1w)_{m,n} = m^-1 zeta(w)_{m,n}` for `m >= 1`, `n >= 1` or `w` not
/// ending with 0.
pub fn prepend_one(w: &Word, m: u64, n: u64) -> Result<TailExpr, TailError> {
    if m < 1 || (n < 1 && w.ends_with_zero()) {
        return Err(hypothesis_err(w, m, n));
    }
    let lhs = TailRef { word: "1".parse::<Word>().unwrap().concat(w), m, n };
    Ok(TailExpr {
        lhs,
        terms: vec![(ratio(1, m), TailRef { word: w.clone(), m, n })],
    })
}

/// `zeta(0w)_{m-1,n} = zeta(0w)_{m,n} + m^-1 zeta(w)_{m,n}` for `m >= 1`,
/// `n >= 1` or `w` ending with 1.
pub fn prepend_zero(w: &Word, m: u64, n: u64) -> Result<TailExpr, TailError> {
    let ends_one = !w.is_empty() && !w.ends_with_zero();
    if m < 1 || (n < 1 && !ends_one) {
        return Err(hypothesis_err(w, m, n));
    }
    let w0 = "0".parse::<Word>().unwrap().concat(w);
    Ok(TailExpr {
        lhs: TailRef { word: w0.clone(), m: m - 1, n },
        terms: vec![
            (BigRational::one(), TailRef { word: w0, m, n }),
            (ratio(1, m), TailRef { word: w.clone(), m, n }),
        ],
    })
}

/// Strips leading 1-bits and trailing 0-bits, each contributing a factor
/// `m^-1` resp. `n^-1`, leaving an admissible-or-empty core:
/// `zeta(w)_{m,n} = coeff * zeta(core)_{m,n}`.
pub fn reduce_to_admissible(w: &Word, m: u64, n: u64) -> Result<(BigRational, Word), TailError> {
    if !index_valid(w, m, n) {
        return Err(TailError::InvalidIndex { word: w.to_string(), m, n });
    }
    let bits = w.bits();
    let lead = bits.iter().take_while(|&&b| b).count();
    let trail = bits[lead..].iter().rev().take_while(|&&b| !b).count();
    let mut coeff = BigRational::one();
    for _ in 0..lead {
        coeff /= BigRational::new(m.into(), 1.into());
    }
    for _ in 0..trail {
        coeff /= BigRational::new(n.into(), 1.into());
    }
    let core = w.subword(lead, bits.len() - trail);
    debug_assert!(core.is_admissible());
    Ok((coeff, core))
}

/// Evaluates any valid double tail through the oracle, reducing a
/// non-admissible word to its admissible core first.
pub fn eval_tail(w: &Word, m: u64, n: u64, target: &BigRational) -> Result<Certified, TailError> {
    let (coeff, core) = reduce_to_admissible(w, m, n)?;
    if core.is_empty() {
        return Ok(Certified { value: coeff * base_empty(m, n), error: BigRational::zero() });
    }
    let c = core.to_composition().expect("core is admissible");
    let inner = tail_series_oracle(&c, m, n, &(target / &coeff))?;
    Ok(Certified { value: &coeff * inner.value, error: coeff * inner.error })
}

fn part_value(part: &Word, m: u64, n: u64, table: &dyn Fn(&Word) -> Option<BigRational>) -> Result<BigRational, TailError> {
    match part.bits() {
        [] => Ok(base_empty(m, n)),
        [false] => base_zero(m, n),
        [true] => base_one(m, n),
        _ => table(part).ok_or_else(|| TailError::MissingEntry(part.to_string())),
    }
}

/// One step of the rectangular recurrence: returns the `(m-1, n-1)` tail
/// from the `(m, n)` tails of `w` and its parts:
/// `zeta(w)_{m-1,n-1} = zeta(w)_{m,n} + n^-a zeta(w_init)_{m,n}
///     + m^-b zeta(w_fin)_{m,n} + n^-a m^-b zeta(w_mid)_{m,n}`.
/// The lookup supplies `(m, n)` values; atoms resolve to the base cases.
pub fn step_rect(
    w: &Word,
    m: u64,
    n: u64,
    table: &dyn Fn(&Word) -> Option<BigRational>,
) -> Result<BigRational, TailError> {
    assert!(m >= 1 && n >= 1);
    let d = decompose(w).map_err(|_| TailError::NotAdmissible)?;
    let head = table(w).ok_or_else(|| TailError::MissingEntry(w.to_string()))?;
    let na = big(n).pow(d.a);
    let mb = big(m).pow(d.b);
    let init = part_value(&d.init, m, n, table)? / ratio_big(na.clone(), BigUint::one());
    let fin = part_value(&d.fin, m, n, table)? / ratio_big(mb.clone(), BigUint::one());
    let mid = part_value(&d.mid, m, n, table)? / ratio_big(na * mb, BigUint::one());
    Ok(head + init + fin + mid)
}

/// Diagonal specialization of [`step_rect`]: the `(n-1, n-1)` tail from the
/// `(n, n)` generation.
pub fn step_diag(
    w: &Word,
    n: u64,
    table: &dyn Fn(&Word) -> Option<BigRational>,
) -> Result<BigRational, TailError> {
    step_rect(w, n, n, table)
}

// ---------------------------------------------------------------------------
// Series oracle
// ---------------------------------------------------------------------------

/// Truncated sum `sum_{y > t} y^-q` for `q >= 2`, estimated by the midpoint
/// integral `int_{t+1/2}^inf x^-q dx` whose error is controlled by the
/// midpoint-rule second-derivative bound. Returns (estimate, error bound).
fn power_tail(q: u32, t: u64) -> (BigRational, BigRational) {
    assert!(q >= 2);
    // x0 = t + 1/2; I = x0^{1-q} / (q-1)
    let two_t1 = big(2 * t + 1);
    let x0_pow = |e: u32| -> BigRational {
        // x0^{-e}
        ratio_big(big(2).pow(e), two_t1.pow(e))
    };
    let integral = x0_pow(q - 1) / BigRational::new((q as u64 - 1).into(), 1.into());
    // midpoint-rule error on each unit cell is at most f''max / 24;
    // sum of cell suprema of f'' is at most f''(x0) + int_{x0} f''
    let q_r = BigRational::new((q as u64).into(), 1.into());
    let q1_r = BigRational::new((q as u64 + 1).into(), 1.into());
    let fpp_sum = &q_r * &q1_r * x0_pow(q + 2) + &q_r * x0_pow(q + 1);
    let delta = fpp_sum / BigRational::new(24.into(), 1.into());
    let half = BigRational::new(1.into(), 2.into());
    (integral - &half * &delta, half * delta)
}

/// Truncated sum `F = sum_{y > t} C(y+m, m)^-1 y^-a1`, sandwiched between
/// `m! sum (y+m)^-(a1+m)` and `m! sum y^-(a1+m)`. Returns (estimate, error).
fn binom_weighted_tail(m: u64, a1: u64, t: u64) -> (BigRational, BigRational) {
    let q: u32 = (a1 + m).try_into().expect("exponent fits u32");
    if m == 0 {
        return power_tail(q, t);
    }
    let mfact: BigUint = (1..=m).map(big).product();
    let mfact = ratio_big(mfact, BigUint::one());
    let (hi_est, hi_err) = power_tail(q, t);
    let (lo_est, lo_err) = power_tail(q, t + m);
    let hi = &mfact * (hi_est + hi_err);
    let lo = &mfact * (lo_est - lo_err);
    let half = BigRational::new(1.into(), 2.into());
    ((&hi + &lo) * &half, (hi - lo) * half)
}

/// Rational upper bound on `1 + ln(t / p0)`.
fn log_factor_upper(t: u64, p0: u64) -> BigRational {
    let ratio_bits = bits_of(t / p0.max(1) + 1) as u64;
    BigRational::one() + ln2_upper() * BigRational::new(ratio_bits.into(), 1.into())
}

/// Upper bound on `sum_{x > t} x^-aa (1 + ln(x / p0))^h` via the descending
/// integral recursion; requires the integrand to be decreasing at `t`,
/// which `t >= p0 * 4^h` guarantees for `aa >= 1`.
fn log_power_tail(aa: u32, h: u32, p0: u64, t: u64) -> BigRational {
    assert!(aa >= 2);
    let lam = log_factor_upper(t, p0);
    let t_pow = ratio_big(BigUint::one(), big(t).pow(aa - 1));
    let a1_inv = BigRational::new(1.into(), (aa as u64 - 1).into());
    let mut j_val = &t_pow * &a1_inv; // J(aa, 0)
    let mut lam_pow = BigRational::one();
    for j in 1..=h {
        lam_pow *= &lam;
        j_val = (&t_pow * &lam_pow + BigRational::new((j as u64).into(), 1.into()) * j_val) * &a1_inv;
    }
    j_val
}

struct RestProfile {
    /// number of parts equal to 1 (each contributes a log factor)
    h: u32,
    /// product of the constant caps of the parts >= 2
    c0: BigRational,
}

/// Per-part bounds on `sum_{j > n} j^-a`: `n^{1-a}/(a-1)` for `n >= 1`,
/// `1 + 1/(a-1)` for `n = 0`; parts equal to 1 are deferred to log factors.
fn rest_profile(parts: &[u64], n: u64) -> RestProfile {
    let mut h = 0u32;
    let mut c0 = BigRational::one();
    for &a in parts {
        if a == 1 {
            h += 1;
        } else if n >= 1 {
            let a_u32: u32 = a.try_into().unwrap();
            c0 *= ratio_big(BigUint::one(), big(n).pow(a_u32 - 1) * big(a - 1));
        } else {
            c0 *= BigRational::one() + BigRational::new(1.into(), (a - 1).into());
        }
    }
    RestProfile { h, c0 }
}

fn factorial(m: u64) -> BigRational {
    ratio_big((1..=m).map(big).product(), BigUint::one())
}

/// Upper bound on the inner interval sum `zeta_{]n,t]}(a_2..a_r)`.
fn inner_sum_bound(rest: &[u64], n: u64, t: u64) -> BigRational {
    let prof = rest_profile(rest, n);
    let p0 = n.max(1);
    let mut b = prof.c0;
    let lam = log_factor_upper(t, p0);
    for _ in 0..prof.h {
        b *= &lam;
    }
    b
}

/// Bound on `sum_{n1 > t} f(n1) (P(n1-1) - P(t))`, the part of the remainder
/// not captured by freezing the inner sum at `t`.
fn cross_bound(parts: &[u64], m: u64, n: u64, t: u64) -> BigRational {
    if parts.len() == 1 {
        return BigRational::zero();
    }
    let a1 = parts[0];
    let a2 = parts[1];
    let deeper = &parts[2..];
    let prof = rest_profile(deeper, n);
    let p0 = n.max(1);
    let aa: u32 = (a1 + m).try_into().unwrap();
    let mfact = factorial(m);
    if a2 >= 2 {
        let a2_u32: u32 = a2.try_into().unwrap();
        let factor2 = ratio_big(BigUint::one(), big(t).pow(a2_u32 - 1) * big(a2 - 1));
        mfact * prof.c0 * factor2 * log_power_tail(aa, prof.h, p0, t)
    } else {
        mfact * prof.c0 * log_power_tail(aa, prof.h + 1, p0, t)
    }
}

/// Remainder bound used to pick the summation cutoff before streaming.
fn selection_bound(parts: &[u64], m: u64, n: u64, t: u64) -> BigRational {
    let (_, f_err) = binom_weighted_tail(m, parts[0], t);
    if parts.len() == 1 {
        return f_err;
    }
    inner_sum_bound(&parts[1..], n, t) * f_err + cross_bound(parts, m, n, t)
}

/// Minimal cutoff for which the log-tail bounds are valid.
fn min_cutoff(parts: &[u64], n: u64) -> u64 {
    let p0 = n.max(1);
    let h = if parts.len() >= 2 {
        rest_profile(&parts[1..], n).h + 1
    } else {
        0
    };
    let shift = (2 * h).min(40);
    64u64.max(2 * (n + 1)).max(p0 << shift)
}

const ORACLE_CAP: u64 = 1 << 26;

/// Computes `zeta(c)_{m,n}` from the defining series, truncated at a cutoff
/// chosen so the certified remainder (plus tracked rounding) is below
/// `target`. Errs with `TargetTooTight` when the cutoff cap cannot certify
/// the target.
pub fn tail_series_oracle(
    c: &Composition,
    m: u64,
    n: u64,
    target: &BigRational,
) -> Result<Certified, TailError> {
    oracle_with_cap(c, m, n, target, ORACLE_CAP, false)
}

/// Like [`tail_series_oracle`] but returns the best certificate achievable
/// within `cap` instead of failing when `target` is out of reach.
pub fn tail_series_oracle_best_effort(
    c: &Composition,
    m: u64,
    n: u64,
    target: &BigRational,
    cap: u64,
) -> Result<Certified, TailError> {
    oracle_with_cap(c, m, n, target, cap, true)
}

fn oracle_with_cap(
    c: &Composition,
    m: u64,
    n: u64,
    target: &BigRational,
    cap: u64,
    best_effort: bool,
) -> Result<Certified, TailError> {
    if c.is_empty() || !c.is_admissible() {
        return Err(TailError::NotAdmissible);
    }
    if target <= &BigRational::zero() {
        return Err(TailError::BadTarget);
    }
    let parts = c.parts();
    let half_target = target / BigRational::new(2.into(), 1.into());

    let t_min = min_cutoff(parts, n);
    if t_min > cap {
        return Err(TailError::TargetTooTight {
            target: crate::fixnum::ratio_to_sci(target, 3),
            achievable: "(cutoff floor exceeds cap)".into(),
        });
    }
    let mut t = t_min;
    loop {
        let sel = selection_bound(parts, m, n, t);
        if sel <= half_target || t >= cap {
            if sel > half_target && !best_effort {
                return Err(TailError::TargetTooTight {
                    target: crate::fixnum::ratio_to_sci(target, 3),
                    achievable: crate::fixnum::ratio_to_sci(&sel, 3),
                });
            }
            break;
        }
        t = (t * 2).min(cap);
    }

    Ok(stream_oracle(parts, m, n, t, target))
}

/// Single streaming pass over `n+1 ..= t` with certified remainder assembly.
fn stream_oracle(parts: &[u64], m: u64, n: u64, t: u64, target: &BigRational) -> Certified {
    let r = parts.len();
    let a1 = parts[0];

    // Rounding budget: with P2 <= pb and per-level ulp recurrences
    // e_r <= T, e_j <= T e_{j+1} + 2T, e_1 <= T((pb+1) T + e_2 + 3),
    // the total is below (pb+1) T^2 + 3 T^r + 3T ulps.
    let pb = if r >= 2 {
        inner_sum_bound(&parts[1..], n, t)
    } else {
        BigRational::one()
    };
    let t_r = BigRational::new(t.into(), 1.into());
    let mut t_pow_r = BigRational::one();
    for _ in 0..r {
        t_pow_r *= &t_r;
    }
    let three = BigRational::new(3.into(), 1.into());
    let rounding_ulps = (&pb + BigRational::one()) * &t_r * &t_r + &three * t_pow_r + three * &t_r;
    // scale: enough bits that rounding_ulps * 2^-scale <= target / 128
    let ulps_bits = rounding_ulps.ceil().to_integer().magnitude().bits() as u32;
    let target_bits = (target.recip().ceil().to_integer().magnitude().bits() as u32) + 1;
    let scale = ulps_bits + target_bits + 8;

    let one = FixedReal::one(scale);
    let mut acc = FixedReal::zero(scale);
    // inner[j] holds the level-(j+2) prefix sum P_{j+2}(x-1)
    let mut inner: Vec<FixedReal> = vec![FixedReal::zero(scale); r - 1];

    // 1/C(x+m, m), advanced by x/(x+m) per step
    let mut binr = FixedReal::from_rational(
        &BigUint::one(),
        &binomial(big(n + 1 + m), big(m.min(n + 1))),
        scale,
    );

    let pow_of = |x: u64, a: u64| -> BigUint { big(x).pow(a.try_into().expect("exponent fits u32")) };

    for x in n + 1..=t {
        if x > n + 1 && m > 0 {
            binr = binr.mul_u64(x).div_u64(x + m);
        }
        // level 1 consumes P_2(x-1)
        let t1 = if r == 1 {
            one.div_int(&pow_of(x, a1))
        } else {
            inner[0].div_int(&pow_of(x, a1))
        };
        acc = acc.add(&if m == 0 { t1 } else { t1.mul(&binr) });
        // levels 2..r, each consuming the next level's old prefix
        for j in 0..r.saturating_sub(1) {
            let a_j = parts[j + 1];
            let term = if j + 1 < r - 1 {
                inner[j + 1].div_int(&pow_of(x, a_j))
            } else {
                one.div_int(&pow_of(x, a_j))
            };
            inner[j] = inner[j].add(&term);
        }
    }

    let rounding = rounding_ulps * crate::fixnum::ulp(scale);
    let (f_est, f_err) = binom_weighted_tail(m, a1, t);

    if r == 1 {
        return Certified { value: acc.to_rational() + f_est, error: rounding + f_err };
    }

    let p2 = inner[0].to_rational();
    // e_2 <= 3 T^{r-1} ulps
    let p2_err = three_pow(t, r - 1) * crate::fixnum::ulp(scale);
    let cross = cross_bound(parts, m, n, t);
    let half = BigRational::new(1.into(), 2.into());
    let value = acc.to_rational() + &p2 * &f_est + &half * &cross;
    let f_hi = &f_est + &f_err;
    let error = rounding + p2_err * f_hi + p2 * f_err + half * cross;
    Certified { value, error }
}

fn three_pow(t: u64, e: usize) -> BigRational {
    let mut v = BigRational::new(3.into(), 1.into());
    for _ in 0..e {
        v *= BigRational::new(t.into(), 1.into());
    }
    v
}
