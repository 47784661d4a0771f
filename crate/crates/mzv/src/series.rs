//! The central-binomial series algorithms and their supporting machinery:
//! `zeta(a) = sum_m psi_m(a) C(2m,m)^-1` with
//! `psi_m(a) = sum_i lambda(e_i, e_{i+1}) phi_m(a_i) phi_m(b_i)`,
//! its generalization to arbitrary double tails, the finite-iteration
//! identity used as a test harness, and the polylog-at-1/2 baseline.
//!
//! `a_i` is the composition of the suffix `e_{i+1}..e_k` and `b_i` the
//! composition of the dual of the prefix `e_1..e_i`; the b-side values are
//! produced by running the same suffix recurrence on the dual word, since
//! the word of `b_i` is exactly the length-(k-i) suffix of the dual.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::fixnum::{binom_recip_step, bits_of, pow10, ulp, FixedReal};
use crate::tails::{tail_series_oracle_best_effort, Certified, TailError};
use crate::words::{composition_of_word, word_of_composition, Composition, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("composition/word must be non-empty and admissible")]
    NotAdmissible,
    #[error("rounding exceeded its budget (internal accounting error)")]
    Budget,
    #[error(transparent)]
    Tail(#[from] TailError),
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn rat(p: u64, q: u64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// `lambda(e, e') = 1, 2, 2, 3` for `(1,0), (0,0), (1,1), (0,1)`.
pub fn lambda(e: bool, ep: bool) -> u32 {
    match (e, ep) {
        (true, false) => 1,
        (false, false) | (true, true) => 2,
        (false, true) => 3,
    }
}

/// `lambda_{m,n}(e, e') = 1 + [e = 0] m/n + [e' = 1] n/m`; reduces to
/// [`lambda`] on the diagonal.
pub fn lambda_mn(e: bool, ep: bool, m: u64, n: u64) -> BigRational {
    assert!(m >= 1 && n >= 1);
    let mut v = BigRational::one();
    if !e {
        v += rat(m, n);
    }
    if ep {
        v += rat(n, m);
    }
    v
}

/// `zeta_{]p,q]}(a) = sum_{q >= n_1 > ... > n_r > p} prod n_i^{-a_i}`,
/// exactly; 1 for the empty composition.
pub fn zeta_interval(c: &Composition, p: u64, q: u64) -> BigRational {
    fn go(
        parts: &[u64],
        idx: usize,
        upper: u64,
        p: u64,
        memo: &mut BTreeMap<(usize, u64), BigRational>,
    ) -> BigRational {
        if idx == parts.len() {
            return BigRational::one();
        }
        if upper <= p {
            return BigRational::zero();
        }
        if let Some(v) = memo.get(&(idx, upper)) {
            return v.clone();
        }
        let mut acc = BigRational::zero();
        for x in p + 1..=upper {
            let a: u32 = parts[idx].try_into().expect("part fits u32");
            let pw = big(x).pow(a);
            acc += go(parts, idx + 1, x - 1, p, memo) / BigRational::new(pw.into(), 1.into());
        }
        memo.insert((idx, upper), acc.clone());
        acc
    }
    let mut memo = BTreeMap::new();
    go(c.parts(), 0, q, p, &mut memo)
}

/// `phi_{p,q}(a) = q^{-a_1} zeta_{]p,q-1]}(a_2,...,a_r)` for `0 <= p < q`,
/// exactly; `q^{-a_1}` when the depth is 1.
pub fn phi_interval(c: &Composition, p: u64, q: u64) -> BigRational {
    assert!(!c.is_empty(), "phi needs a non-empty composition");
    assert!(p < q);
    let a1: u32 = c.parts()[0].try_into().expect("part fits u32");
    let rest = Composition::new(c.parts()[1..].to_vec()).expect("parts stay positive");
    zeta_interval(&rest, p, q - 1) / BigRational::new(big(q).pow(a1).into(), 1.into())
}

/// `phi_m(a) = m^{-a_1} sum_{m > n_2 > ... > n_r > 0} prod n_i^{-a_i}`,
/// exactly (the `p = 0` interval value).
pub fn phi_direct(c: &Composition, m: u64) -> BigRational {
    assert!(m >= 1);
    phi_interval(c, 0, m)
}

// ---------------------------------------------------------------------------
// The phi generation recurrence (fixed-point and exact)
// ---------------------------------------------------------------------------

/// One fixed-point entry with its rounding bound in ulps.
#[derive(Clone, Debug)]
struct Tracked {
    val: FixedReal,
    err: u64,
}

/// Advances one generation of suffix values: entry `i` (1-based, stored at
/// `i-1`) is `phi_{p,q}(a_i)` where `a_i` is the composition of the suffix
/// `e_{i+1}..e_k` and `q = p + step`. `is_first` marks `step = 1`, `prev` is
/// the `q - 1` generation (ignored when `is_first`). Entries are clamped to
/// `[0, 1]`, which the exact values never leave.
fn phi_advance(bits: &[bool], is_first: bool, q: u64, prev: &[Tracked], scale: u32) -> Vec<Tracked> {
    let k = bits.len();
    let mut cur: Vec<Tracked> = vec![Tracked { val: FixedReal::zero(scale), err: 0 }; k - 1];
    let one = BigUint::one();
    for i in (1..k).rev() {
        let idx = i - 1;
        let entry = if i == k - 1 {
            Tracked { val: FixedReal::from_rational(&one, &big(q), scale), err: 1 }
        } else if !bits[i] {
            // e_{i+1} = 0: head exponent grows by one
            let next = &cur[idx + 1];
            Tracked { val: next.val.div_u64(q), err: next.err + 1 }
        } else if is_first {
            Tracked { val: FixedReal::zero(scale), err: 0 }
        } else {
            // e_{i+1} = 1: two-generation mix (1 - 1/q) prev_i + (1/q) prev_{i+1}
            let same = &prev[idx];
            let next = &prev[idx + 1];
            let d_same = same.val.div_u64(q);
            let d_next = next.val.div_u64(q);
            Tracked {
                val: same.val.sub(&d_same).add(&d_next),
                err: same.err.max(next.err) + 2,
            }
        };
        cur[idx] = Tracked { val: entry.val.clamp_one(), err: entry.err };
    }
    cur
}

/// Exact-rational version of [`phi_advance`], for cross-checking the
/// recurrence against the defining finite sums.
pub fn phi_advance_exact(bits: &[bool], is_first: bool, q: u64, prev: &[BigRational]) -> Vec<BigRational> {
    let k = bits.len();
    let mut cur = vec![BigRational::zero(); k - 1];
    for i in (1..k).rev() {
        let idx = i - 1;
        cur[idx] = if i == k - 1 {
            rat(1, q)
        } else if !bits[i] {
            &cur[idx + 1] / rat(q, 1)
        } else if is_first {
            BigRational::zero()
        } else {
            (BigRational::one() - rat(1, q)) * &prev[idx] + rat(1, q) * &prev[idx + 1]
        };
    }
    cur
}

/// The `phi_m(a_i)` / `phi_m(b_i)` table for `m = 1..=limit`.
#[derive(Clone, Debug)]
pub struct PhiTable {
    word: Word,
    limit: u64,
    phi_a: Vec<Vec<Tracked>>,
    phi_b: Vec<Vec<Tracked>>,
    scale: u32,
}

impl PhiTable {
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// `phi_m(a_i)`, `1 <= i <= k-1`.
    pub fn phi_a(&self, m: u64, i: usize) -> &FixedReal {
        &self.phi_a[(m - 1) as usize][i - 1].val
    }

    /// `phi_m(b_i)`, read from the dual word's suffix table at `k - i`.
    pub fn phi_b(&self, m: u64, i: usize) -> &FixedReal {
        let k = self.word.weight();
        &self.phi_b[(m - 1) as usize][(k - i) - 1].val
    }

    /// Worst rounding bound over all entries, in ulps of the table scale.
    pub fn max_err_ulps(&self) -> u64 {
        self.phi_a
            .iter()
            .chain(self.phi_b.iter())
            .flat_map(|g| g.iter().map(|t| t.err))
            .max()
            .unwrap_or(0)
    }
}

/// Builds the full table by running the suffix recurrence on the word (a
/// side) and on its dual (b side).
pub fn build_phi_table(w: &Word, limit: u64, scale: u32) -> Result<PhiTable, SeriesError> {
    if w.is_empty() || !w.is_admissible() {
        return Err(SeriesError::NotAdmissible);
    }
    let bits_a = w.bits().to_vec();
    let bits_b = w.dual().bits().to_vec();
    let mut phi_a: Vec<Vec<Tracked>> = Vec::with_capacity(limit as usize);
    let mut phi_b: Vec<Vec<Tracked>> = Vec::with_capacity(limit as usize);
    for m in 1..=limit {
        let prev_a: &[Tracked] = if m == 1 { &[] } else { &phi_a[(m - 2) as usize] };
        let prev_b: &[Tracked] = if m == 1 { &[] } else { &phi_b[(m - 2) as usize] };
        let next_a = phi_advance(&bits_a, m == 1, m, prev_a, scale);
        let next_b = phi_advance(&bits_b, m == 1, m, prev_b, scale);
        phi_a.push(next_a);
        phi_b.push(next_b);
    }
    Ok(PhiTable { word: w.clone(), limit, phi_a, phi_b, scale })
}

/// `psi_m = sum_i lambda(e_i, e_{i+1}) phi_m(a_i) phi_m(b_i)`; lies in
/// `[0, 3(k-1)]`.
pub fn psi(w: &Word, m: u64, table: &PhiTable) -> FixedReal {
    assert_eq!(w, table.word());
    assert!(m >= 1 && m <= table.limit());
    let bits = w.bits();
    let mut acc = FixedReal::zero(table.scale());
    for i in 1..w.weight() {
        let lam = lambda(bits[i - 1], bits[i]);
        acc = acc.add(&table.phi_a(m, i).mul(table.phi_b(m, i)).mul_u64(lam as u64));
    }
    acc
}

/// A certified series evaluation.
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: FixedReal,
    pub error: BigRational,
    /// Outer summation length (the step count of the algorithm).
    pub outer_terms: u64,
    pub digits: u32,
}

fn series_target(digits: u32) -> BigRational {
    BigRational::new(1.into(), pow10(digits).into())
}

/// Smallest `N >= 1` with `6 (k-1) 2^-2N N` below `half`.
fn series_cutoff(k: usize, half: &BigRational) -> u64 {
    let mut pow4 = BigUint::from(4u32);
    let mut n = 1u64;
    loop {
        let bound = rat(6 * (k as u64 - 1) * n, 1) / BigRational::new(pow4.clone().into(), 1.into());
        if &bound < half {
            return n;
        }
        n += 1;
        pow4 <<= 2;
    }
}

/// Evaluates `zeta(c)` by the accelerated central-binomial series, truncated
/// where the proved remainder `6(k-1) 2^-2N N` plus tracked rounding drops
/// below `10^-digits`.
pub fn zeta_series(c: &Composition, digits: u32) -> Result<SeriesValue, SeriesError> {
    if c.is_empty() || !c.is_admissible() {
        return Err(SeriesError::NotAdmissible);
    }
    let w = word_of_composition(c);
    let k = w.weight();
    let target = series_target(digits);
    let half = &target / rat(2, 1);
    let n_terms = series_cutoff(k, &half);
    let scale = pow10(digits).bits() as u32 + 3 * bits_of(n_terms + 1) + 24;

    let bits_a = w.bits().to_vec();
    let bits_b = w.dual().bits().to_vec();
    let mut gen_a: Vec<Tracked> = Vec::new();
    let mut gen_b: Vec<Tracked> = Vec::new();
    let mut binr = FixedReal::one(scale);
    let mut acc = FixedReal::zero(scale);
    let mut rounding_ulps: u128 = 0;
    let lam_total: u64 = (1..k).map(|i| lambda(bits_a[i - 1], bits_a[i]) as u64).sum();

    for m in 1..=n_terms {
        gen_a = phi_advance(&bits_a, m == 1, m, &gen_a, scale);
        gen_b = phi_advance(&bits_b, m == 1, m, &gen_b, scale);
        binr = binom_recip_step(&binr, m); // error stays below 2 ulps
        let mut psi_m = FixedReal::zero(scale);
        let mut psi_err: u128 = 0;
        for i in 1..k {
            let lam = lambda(bits_a[i - 1], bits_a[i]) as u64;
            let a = &gen_a[i - 1];
            let b = &gen_b[(k - i) - 1];
            psi_m = psi_m.add(&a.val.mul(&b.val).mul_u64(lam));
            // factors are clamped to [0,1]: product error <= e_a + e_b + 1
            psi_err += lam as u128 * (a.err as u128 + b.err as u128 + 1);
        }
        acc = acc.add(&psi_m.mul(&binr));
        // psi <= 3(k-1) = lam_total and binr <= 1/2
        rounding_ulps += lam_total as u128 * 2 + psi_err + 1;
    }

    let trunc = rat(6 * (k as u64 - 1) * n_terms, 1)
        / BigRational::new((BigUint::one() << (2 * n_terms as usize)).into(), 1.into());
    let error = trunc + BigRational::new(rounding_ulps.into(), 1.into()) * ulp(scale);
    if error >= target {
        return Err(SeriesError::Budget);
    }
    Ok(SeriesValue { value: acc, error, outer_terms: n_terms, digits })
}

/// `sum_{m=1}^M m^-exponent C(2m,m)^-1` with remainder below `2^{1-2M} M`;
/// the right-hand side of the Euler-type bridge identities, computed without
/// any phi machinery.
pub fn central_binomial_sum(exponent: u32, digits: u32) -> SeriesValue {
    let target = series_target(digits);
    let half = &target / rat(2, 1);
    // remainder <= sum_{m>M} C(2m,m)^-1 <= 2^{1-2M} M for M >= 1
    let mut n_terms = 1u64;
    let mut pow4 = BigUint::from(4u32);
    while rat(2 * n_terms, 1) / BigRational::new(pow4.clone().into(), 1.into()) >= half {
        n_terms += 1;
        pow4 <<= 2;
    }
    let scale = pow10(digits).bits() as u32 + bits_of(n_terms + 1) + 16;
    let mut binr = FixedReal::one(scale);
    let mut acc = FixedReal::zero(scale);
    for m in 1..=n_terms {
        binr = binom_recip_step(&binr, m);
        acc = acc.add(&binr.div_int(&big(m).pow(exponent)));
    }
    let trunc = rat(2 * n_terms, 1) / BigRational::new(pow4.into(), 1.into());
    // per-term: binr error below 2 ulps scaled by m^-e, plus one division ulp
    let rounding = BigRational::new((3 * n_terms).into(), 1.into()) * ulp(scale);
    SeriesValue { value: acc, error: trunc + rounding, outer_terms: n_terms, digits }
}

/// Evaluates the double tail `zeta(w)_{m,n}` by the generalized series
/// `sum_M C(m+n+2M, m+M)^-1 sum_i phi_{m,m+M}(b_i) phi_{n,n+M}(a_i)
/// lambda_{m+M,n+M}(e_i, e_{i+1})`.
pub fn general_tail_series(w: &Word, m: u64, n: u64, digits: u32) -> Result<SeriesValue, SeriesError> {
    if w.is_empty() || !w.is_admissible() {
        return Err(SeriesError::NotAdmissible);
    }
    let k = w.weight();
    let target = series_target(digits);
    let half = &target / rat(2, 1);

    // Truncation: C(m+n+2M, m+M) >= C(2M, M) and phi <= 1 bound the tail
    // beyond N by (k-1) Lambda(N) 2^{1-2N} N with
    // Lambda(N) = 3 + |m-n| (1/(m+N) + 1/(n+N)).
    let lam_cap = |nn: u64| -> BigRational {
        let diff = m.abs_diff(n);
        rat(3, 1) + rat(diff, m + nn) + rat(diff, n + nn)
    };
    let mut n_terms = 1u64;
    let mut pow4 = BigUint::from(4u32);
    while rat((k as u64 - 1) * 2 * n_terms, 1) * lam_cap(n_terms)
        / BigRational::new(pow4.clone().into(), 1.into())
        >= half
    {
        n_terms += 1;
        pow4 <<= 2;
    }

    let scale = pow10(digits).bits() as u32
        + 3 * bits_of(n_terms + 1)
        + bits_of((m + 2) * (n + 2))
        + 24;

    let bits_a = w.bits().to_vec();
    let bits_b = w.dual().bits().to_vec();
    let mut gen_a: Vec<Tracked> = Vec::new();
    let mut gen_b: Vec<Tracked> = Vec::new();
    // B_M = 1/C(m+n+2M, m+M); B_0 exact up to one truncation
    let mut bin = FixedReal::from_rational(&BigUint::one(), &binomial(big(m + n), big(m.min(n))), scale);
    let mut acc = FixedReal::zero(scale);
    let mut rounding_ulps: u128 = 0;
    // integer cap on sum_i lambda_{m+M,n+M} phi phi over M >= 1
    let lam_int_cap: u128 = (3 + (m + 1) + (n + 1)) as u128 * (k as u128 - 1);

    for mm in 1..=n_terms {
        let (qa, qb) = (n + mm, m + mm);
        gen_a = phi_advance(&bits_a, mm == 1, qa, &gen_a, scale);
        gen_b = phi_advance(&bits_b, mm == 1, qb, &gen_b, scale);
        // B_M = B_{M-1} (m+M)(n+M) / ((m+n+2M-1)(m+n+2M)); ratio <= 1/2
        bin = bin
            .mul_u64(qb)
            .mul_u64(qa)
            .div_u64(m + n + 2 * mm - 1)
            .div_u64(m + n + 2 * mm);
        let mut inner = FixedReal::zero(scale);
        let mut inner_err: u128 = 0;
        for i in 1..k {
            let a = &gen_a[i - 1];
            let b = &gen_b[(k - i) - 1];
            let t = a.val.mul(&b.val);
            let t_err = a.err as u128 + b.err as u128 + 1;
            let mut term = t.clone();
            let mut term_err = t_err;
            if !bits_a[i - 1] {
                // + (m+M)/(n+M) t
                term = term.add(&t.mul_u64(qb).div_u64(qa));
                term_err += t_err * qb.div_ceil(qa) as u128 + 1;
            }
            if bits_a[i] {
                // + (n+M)/(m+M) t
                term = term.add(&t.mul_u64(qa).div_u64(qb));
                term_err += t_err * qa.div_ceil(qb) as u128 + 1;
            }
            inner = inner.add(&term);
            inner_err += term_err;
        }
        acc = acc.add(&inner.mul(&bin));
        // bin error stays below 2 ulps and bin <= 1/2; inner <= lam_int_cap
        rounding_ulps += 2 * lam_int_cap + inner_err + 1;
    }

    let trunc = rat((k as u64 - 1) * 2 * n_terms, 1) * lam_cap(n_terms)
        / BigRational::new((BigUint::one() << (2 * n_terms as usize)).into(), 1.into());
    let error = trunc + BigRational::new(rounding_ulps.into(), 1.into()) * ulp(scale);
    if error >= target {
        return Err(SeriesError::Budget);
    }
    Ok(SeriesValue { value: acc, error, outer_terms: n_terms, digits })
}

/// [`general_tail_series`] extended to any index-valid word: leading 1-bits
/// and trailing 0-bits strip off as exact `1/m` resp. `1/n` factors before
/// the series runs on the admissible core.
pub fn tail_value(w: &Word, m: u64, n: u64, digits: u32) -> Result<SeriesValue, SeriesError> {
    let (coeff, core) = crate::tails::reduce_to_admissible(w, m, n)?;
    if core.is_empty() {
        let exact = coeff * crate::tails::base_empty(m, n);
        let scale = pow10(digits).bits() as u32 + 16;
        return Ok(SeriesValue {
            value: FixedReal::from_big_rational(&exact, scale),
            error: ulp(scale),
            outer_terms: 0,
            digits,
        });
    }
    let inner = general_tail_series(&core, m, n, digits)?;
    if coeff.is_one() {
        return Ok(inner);
    }
    let scale = inner.value.scale();
    let coeff_fixed = FixedReal::from_big_rational(&coeff, scale);
    // coeff <= 1 and the value is below 2, so scaling costs under 3 ulps
    let value = inner.value.mul(&coeff_fixed);
    let error = coeff * inner.error + BigRational::new(3.into(), 1.into()) * ulp(scale);
    Ok(SeriesValue { value, error, outer_terms: inner.outer_terms, digits })
}

// ---------------------------------------------------------------------------
// Subword splits and the finite identity (test harness)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitKind {
    /// inner word in 0W1
    Admissible,
    /// inner word is the single bit 0
    Zero,
    /// inner word is the single bit 1
    One,
    /// empty inner word strictly inside
    Empty,
}

/// One split `w = dual-word(b_s) . w_s . word(a_s)` at the pair `s = (i, j)`.
#[derive(Clone, Debug)]
pub struct SubwordSplit {
    pub start: usize,
    pub end: usize,
    pub kind: SplitKind,
    pub inner: Word,
    /// composition of the suffix `e_{j+1}..e_k`
    pub a: Composition,
    /// composition of the dual of the prefix `e_1..e_i`
    pub b: Composition,
}

/// All pairs `(i, j)` whose inner word is admissible, a single bit, or empty
/// strictly inside.
pub fn subword_splits(w: &Word) -> Vec<SubwordSplit> {
    let k = w.weight();
    let mut out = Vec::new();
    for i in 0..=k {
        for j in i..=k {
            let inner = w.subword(i, j);
            let kind = match inner.bits() {
                [] if i > 0 && j < k => SplitKind::Empty,
                [] => continue,
                [false] => SplitKind::Zero,
                [true] => SplitKind::One,
                _ if inner.is_admissible() => SplitKind::Admissible,
                _ => continue,
            };
            let a = composition_of_word(&w.subword(j, k)).expect("suffix ends in 1 or is empty");
            let b = composition_of_word(&w.subword(0, i).dual())
                .expect("dual prefix ends in 1 or is empty");
            out.push(SubwordSplit { start: i, end: j, kind, inner, a, b });
        }
    }
    out
}

/// Both sides of the finite-iteration identity, evaluated independently: the
/// left side is the oracle at `(m, n)`, the right side combines exact
/// interval sums with oracle tails at `(m+N, n+N)`.
#[derive(Clone, Debug)]
pub struct FiniteIdentity {
    pub lhs: Certified,
    pub rhs_value: BigRational,
    pub rhs_error: BigRational,
}

impl FiniteIdentity {
    pub fn residual(&self) -> BigRational {
        num_traits::Signed::abs(&(&self.lhs.value - &self.rhs_value))
    }

    pub fn combined_error(&self) -> BigRational {
        &self.lhs.error + &self.rhs_error
    }
}

pub fn finite_identity_check(w: &Word, m: u64, n: u64, iters: u64) -> Result<FiniteIdentity, SeriesError> {
    if w.is_empty() || !w.is_admissible() {
        return Err(SeriesError::NotAdmissible);
    }
    assert!(iters >= 1);
    let k = w.weight();
    let bits = w.bits().to_vec();
    let oracle_cap = 1 << 22;
    let tight = BigRational::new(1.into(), pow10(14).into());

    let mut rhs = BigRational::zero();
    let mut rhs_err = BigRational::zero();
    for s in subword_splits(w) {
        if s.kind != SplitKind::Admissible {
            continue;
        }
        let zb = zeta_interval(&s.b, m, m + iters);
        let za = zeta_interval(&s.a, n, n + iters);
        if zb.is_zero() || za.is_zero() {
            continue;
        }
        let inner_c = s.inner.to_composition().expect("admissible inner");
        let tail = tail_series_oracle_best_effort(&inner_c, m + iters, n + iters, &tight, oracle_cap)?;
        let coeff = zb * za;
        rhs += &coeff * &tail.value;
        rhs_err += coeff * tail.error;
    }

    for big_m in 1..=iters {
        let (qa, qb) = (n + big_m, m + big_m);
        let recip = BigRational::new(
            BigUint::one().into(),
            binomial(big(m + n + 2 * big_m), big(qb.min(qa))).into(),
        );
        let mut inner = BigRational::zero();
        for i in 1..k {
            let a_i = composition_of_word(&w.subword(i, k)).expect("suffix ends in 1");
            let b_i = composition_of_word(&w.subword(0, i).dual()).expect("dual prefix ends in 1");
            inner += phi_interval(&b_i, m, qb)
                * phi_interval(&a_i, n, qa)
                * lambda_mn(bits[i - 1], bits[i], qb, qa);
        }
        rhs += recip * inner;
    }

    let lhs_target = BigRational::new(1.into(), pow10(10).into());
    let c = w.to_composition().expect("admissible word");
    let lhs = tail_series_oracle_best_effort(&c, m, n, &lhs_target, oracle_cap)?;
    Ok(FiniteIdentity { lhs, rhs_value: rhs, rhs_error: rhs_err })
}

// ---------------------------------------------------------------------------
// Baseline: Chasles splitting at 1/2
// ---------------------------------------------------------------------------

/// A certified baseline evaluation with its step count.
#[derive(Clone, Debug)]
pub struct BaselineValue {
    pub value: FixedReal,
    pub error: BigRational,
    /// Outer summation length shared by all polylog factors.
    pub outer_terms: u64,
    /// Number of polylog series evaluated.
    pub li_evals: u32,
    pub digits: u32,
}

/// `Li_c(1/2)` truncated at `n_1 <= cutoff`, with rounding tracked in ulps.
/// The discarded tail is below `2^-cutoff (cutoff + 2)`.
fn li_half(parts: &[u64], cutoff: u64, scale: u32) -> (FixedReal, u128) {
    let r = parts.len();
    let one = FixedReal::one(scale);
    let mut acc = FixedReal::zero(scale);
    // inner[j] = level-(j+2) prefix sum; only the outer level carries 2^-x
    let mut inner: Vec<FixedReal> = vec![FixedReal::zero(scale); r.saturating_sub(1)];
    let mut inner_err: Vec<u128> = vec![0; r.saturating_sub(1)];
    let mut err: u128 = 0;
    for x in 1..=cutoff {
        let pow2 = if x <= scale as u64 {
            FixedReal::from_mantissa(BigUint::one() << (scale as u64 - x) as usize, scale)
        } else {
            FixedReal::zero(scale)
        };
        let xp = |a: u64| big(x).pow(u32::try_from(a).expect("part fits u32"));
        let t1 = if r == 1 {
            pow2.div_int(&xp(parts[0]))
        } else {
            inner[0].div_int(&xp(parts[0])).mul(&pow2)
        };
        acc = acc.add(&t1);
        err += inner_err.first().copied().unwrap_or(0) + 3;
        for j in 0..r.saturating_sub(1) {
            let (term, carried) = if j + 1 < r - 1 {
                (inner[j + 1].div_int(&xp(parts[j + 1])), inner_err[j + 1])
            } else {
                (one.div_int(&xp(parts[j + 1])), 0)
            };
            inner[j] = inner[j].add(&term);
            inner_err[j] += carried + 1;
        }
    }
    (acc.clamp_one(), err)
}

/// Evaluates `zeta(c)` by the Chasles splitting
/// `zeta(a) = sum_{i=0}^k Li_{a_i}(1/2) Li_{b_i}(1/2)` (empty factors are 1),
/// each polylog by its defining series.
pub fn baseline_chasles(c: &Composition, digits: u32) -> Result<BaselineValue, SeriesError> {
    if c.is_empty() || !c.is_admissible() {
        return Err(SeriesError::NotAdmissible);
    }
    let w = word_of_composition(c);
    let k = w.weight();
    let target = series_target(digits);
    let half_target = &target / rat(2, 1);

    // total truncation <= 2(k+1) 2^-N (N+2)
    let mut n_terms = 1u64;
    loop {
        let bound = rat(2 * (k as u64 + 1) * (n_terms + 2), 1)
            / BigRational::new((BigUint::one() << n_terms as usize).into(), 1.into());
        if bound < half_target {
            break;
        }
        n_terms += 1;
    }
    let scale = pow10(digits).bits() as u32 + 3 * bits_of(n_terms + 1) + 24;

    let mut acc = FixedReal::zero(scale);
    let mut rounding_ulps: u128 = 0;
    let mut li_evals = 0u32;
    for i in 0..=k {
        let a_i = composition_of_word(&w.subword(i, k)).expect("suffix ends in 1 or empty");
        let b_i = composition_of_word(&w.subword(0, i).dual()).expect("dual prefix ok");
        let (va, ea) = if a_i.is_empty() {
            (FixedReal::one(scale), 0u128)
        } else {
            li_evals += 1;
            li_half(a_i.parts(), n_terms, scale)
        };
        let (vb, eb) = if b_i.is_empty() {
            (FixedReal::one(scale), 0u128)
        } else {
            li_evals += 1;
            li_half(b_i.parts(), n_terms, scale)
        };
        acc = acc.add(&va.mul(&vb));
        // factors clamped to [0,1]
        rounding_ulps += ea + eb + 1;
    }

    let trunc = rat(2 * (k as u64 + 1) * (n_terms + 2), 1)
        / BigRational::new((BigUint::one() << n_terms as usize).into(), 1.into());
    let error = trunc + BigRational::new(rounding_ulps.into(), 1.into()) * ulp(scale);
    if error >= target {
        return Err(SeriesError::Budget);
    }
    Ok(BaselineValue { value: acc, error, outer_terms: n_terms, li_evals, digits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    fn comp(parts: &[u64]) -> Composition {
        Composition::new(parts.to_vec()).unwrap()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn lambda_table() {
        assert_eq!(lambda(true, false), 1);
        assert_eq!(lambda(false, false), 2);
        assert_eq!(lambda(true, true), 2);
        assert_eq!(lambda(false, true), 3);
        for nn in 1u64..=10 {
            for (e, ep) in [(false, false), (false, true), (true, false), (true, true)] {
                assert_eq!(lambda_mn(e, ep, nn, nn), rat(lambda(e, ep) as u64, 1));
            }
        }
    }

    #[test]
    fn phi_direct_examples() {
        assert_eq!(phi_direct(&comp(&[1]), 5), rat(1, 5));
        assert_eq!(phi_direct(&comp(&[2, 1]), 2), rat(1, 4));
        assert_eq!(phi_direct(&comp(&[1, 1]), 1), BigRational::zero());
    }

    #[test]
    fn interval_identities_hold_exactly() {
        let samples = [
            (comp(&[2, 1]), 0u64, 7u64),
            (comp(&[1, 1, 2]), 1, 9),
            (comp(&[3]), 2, 12),
            (comp(&[1, 2, 1]), 0, 6),
        ];
        for (c, p, q) in samples {
            // zeta_{]p,q]} = sum_{p < q' <= q} phi_{p,q'}
            let mut total = BigRational::zero();
            for qp in p + 1..=q {
                total += phi_interval(&c, p, qp);
            }
            assert_eq!(total, zeta_interval(&c, p, q));

            // phi_{p,q} = q^{-a_1} zeta_{]p,q-1]}(tail)
            let rest = Composition::new(c.parts()[1..].to_vec()).unwrap();
            let a1: u32 = c.parts()[0] as u32;
            assert_eq!(
                phi_interval(&c, p, q),
                zeta_interval(&rest, p, q - 1) / BigRational::new(big(q).pow(a1).into(), 1.into())
            );
        }
    }

    #[test]
    fn prop7_bounds() {
        for c in [comp(&[1]), comp(&[2, 1]), comp(&[1, 1, 1]), comp(&[3, 2]), comp(&[1, 4, 1])] {
            for p in 0u64..4 {
                for q in p + 1..=12 {
                    let phi = phi_interval(&c, p, q);
                    assert!(phi >= BigRational::zero() && phi <= BigRational::one());
                    let z = zeta_interval(&c, p, q);
                    assert!(z >= BigRational::zero() && z <= rat(q - p, 1));
                }
            }
        }
    }

    #[test]
    fn phi_recurrence_matches_direct_sums() {
        for word in ["01", "0011", "0101", "001011", "010011"] {
            let word = w(word);
            let bits = word.bits().to_vec();
            let k = bits.len();
            let mut gen: Vec<BigRational> = Vec::new();
            for m in 1..=8u64 {
                gen = phi_advance_exact(&bits, m == 1, m, &gen);
                for i in 1..k {
                    let a_i = composition_of_word(&word.subword(i, k)).unwrap();
                    assert_eq!(gen[i - 1], phi_direct(&a_i, m), "word {} i {} m {}", word, i, m);
                }
            }
        }
    }

    #[test]
    fn phi_table_tracks_direct_values() {
        let word = w("0011");
        let scale = 64;
        let table = build_phi_table(&word, 8, scale).unwrap();
        // m = 1: phi_1(a_3) = 1 (i = k-1 case), phi_1(a_2) = 0 (e_3 = 1 case)
        assert_eq!(table.phi_a(1, 3).to_rational(), BigRational::one());
        assert!(table.phi_a(1, 2).is_zero());
        let allowed = BigRational::new((table.max_err_ulps() + 1).into(), 1.into()) * ulp(scale);
        for m in 1..=8u64 {
            for i in 1..4usize {
                let a_i = composition_of_word(&word.subword(i, 4)).unwrap();
                let got = table.phi_a(m, i).to_rational();
                assert!((got - phi_direct(&a_i, m)).abs() <= allowed);
                let b_i = composition_of_word(&word.subword(0, i).dual()).unwrap();
                let got_b = table.phi_b(m, i).to_rational();
                assert!((got_b - phi_direct(&b_i, m)).abs() <= allowed);
            }
        }
    }

    #[test]
    fn psi_weight_two_is_three_over_m_squared() {
        let word = w("01");
        let scale = 80;
        let table = build_phi_table(&word, 10, scale).unwrap();
        for m in 1..=10u64 {
            let got = psi(&word, m, &table).to_rational();
            assert!((got - rat(3, m * m)).abs() <= rat(16, 1) * ulp(scale));
        }
    }

    #[test]
    fn psi_bounded_by_three_k_minus_one() {
        for word in ["0011", "010101", "001101"] {
            let word = w(word);
            let table = build_phi_table(&word, 12, 64).unwrap();
            let cap = FixedReal::one(64).mul_u64(3 * (word.weight() as u64 - 1));
            for m in 1..=12u64 {
                assert!(psi(&word, m, &table).cmp_value(&cap) != std::cmp::Ordering::Greater);
            }
        }
    }

    #[test]
    fn splits_reconstruct_the_word() {
        for word in ["01", "0011", "010011"] {
            let word = w(word);
            for s in subword_splits(&word) {
                let rebuilt = word_of_composition(&s.b)
                    .dual()
                    .concat(&s.inner)
                    .concat(&word_of_composition(&s.a));
                assert_eq!(rebuilt, word);
            }
        }
    }

    #[test]
    fn zeta_series_weight_two_matches_euler() {
        let v = zeta_series(&comp(&[2]), 20).unwrap();
        let printed = crate::fixnum::to_decimal(&v.value, 20, &v.error).unwrap();
        assert!(printed.starts_with("1.6449340668"), "{}", printed);
    }

    #[test]
    fn general_series_at_origin_matches_zeta_series() {
        for (word, parts) in [(w("01"), comp(&[2])), (w("0011"), comp(&[3, 1]))] {
            let a = zeta_series(&parts, 25).unwrap();
            let b = general_tail_series(&word, 0, 0, 25).unwrap();
            let diff = (a.value.to_rational() - b.value.to_rational()).abs();
            assert!(diff <= &a.error + &b.error);
        }
    }

    #[test]
    fn baseline_weight_two() {
        let b = baseline_chasles(&comp(&[2]), 20).unwrap();
        let s = zeta_series(&comp(&[2]), 20).unwrap();
        let diff = (b.value.to_rational() - s.value.to_rational()).abs();
        assert!(diff <= &b.error + &s.error);
        assert!(b.li_evals >= 2);
    }
}
