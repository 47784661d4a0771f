//! Simultaneous computation of all MZVs for a closed word set by the
//! descending diagonal recurrence
//! `u_{n-1}(v) = u_n(v) + n^-a u_n(v_init) + n^-b u_n(v_fin) + n^-a-b u_n(v_mid)`
//! starting from `u_N = 0`, with the certified error budget
//! `2^-2N (N+1)^2 pi^2/6 + N(N+1)(2N+1)/6 * alpha`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::consts::pi2_over_6_upper;
use crate::fixnum::{binom_recip_step, FixedReal, PrecisionPlan};
use crate::words::{decompose, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DpError {
    #[error("plan needs at least one admissible word")]
    EmptyPlan,
    #[error("word {0} is not admissible")]
    NotAdmissible(String),
    #[error("no iteration count can reach 10^-{digits} with the given step accuracy")]
    Unattainable { digits: u32 },
    #[error("snapshot level {0} exceeds the iteration count")]
    BadSnapshot(u64),
}

/// Prop-6-style total error bound after `n_iters` descending steps, each
/// computed to accuracy `alpha`.
pub fn error_bound(n_iters: u64, alpha: &BigRational) -> BigRational {
    error_bound_partial(n_iters, 0, alpha)
}

/// Bound on `|zeta(v)_{level,level} - u_level(v)|`: the same descending
/// induction stopped at `level`, namely
/// `(2^-2N (N+1)^2 pi^2/6 + alpha * sum_{j=level+1}^N j^2) / (level+1)^2`.
pub fn error_bound_partial(n_iters: u64, level: u64, alpha: &BigRational) -> BigRational {
    assert!(level <= n_iters);
    let n = n_iters;
    let theo = pi2_over_6_upper()
        * BigRational::new(((n + 1) * (n + 1)).into(), 1.into())
        * BigRational::new(BigUint::one().into(), (BigUint::one() << (2 * n as usize)).into());
    let sum_sq = |x: u64| -> BigUint { big(x) * big(x + 1) * big(2 * x + 1) / big(6) };
    let alpha_units = sum_sq(n) - sum_sq(level);
    let total = theo + alpha * BigRational::new(alpha_units.into(), 1.into());
    total / BigRational::new(((level + 1) * (level + 1)).into(), 1.into())
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

/// Smallest `N` whose total bound is below `10^-digits`, or `None` when the
/// `alpha` term alone makes the target unreachable.
pub fn choose_n(digits: u32, alpha: &BigRational) -> Option<u64> {
    let target = BigRational::new(1.into(), crate::fixnum::pow10(digits).into());
    let c = pi2_over_6_upper();
    let mut pow4 = BigUint::from(4u32);
    for n in 1u64..=100_000_000 {
        let theo = &c * BigRational::new(((n + 1) * (n + 1)).into(), 1.into())
            / BigRational::new(pow4.clone().into(), 1.into());
        let alpha_term = alpha * BigRational::new((big(n) * big(n + 1) * big(2 * n + 1) / big(6)).into(), 1.into());
        if &theo + &alpha_term < target {
            return Some(n);
        }
        if alpha_term >= target {
            // grows with n while theo only shrinks: no later n can work
            return None;
        }
        pow4 <<= 2;
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PartRef {
    Table(usize),
    AtomZero,
    AtomOne,
    AtomEmpty,
}

#[derive(Clone, Debug)]
struct StepMeta {
    /// (part, exponent): init with a, fin with b, mid with a+b.
    parts: [(PartRef, u32); 3],
}

/// A validated plan: the closed word set, iteration count and precision.
#[derive(Clone, Debug)]
pub struct DpPlan {
    words: Vec<Word>,
    steps: Vec<StepMeta>,
    pub n_iters: u64,
    pub precision: PrecisionPlan,
}

/// Closure of a word set under taking init/fin/mid parts (atoms excluded),
/// in weight-major lexicographic order.
pub fn closure(requested: &[Word]) -> Result<Vec<Word>, DpError> {
    let mut set: BTreeSet<Word> = BTreeSet::new();
    let mut stack: Vec<Word> = Vec::new();
    for w in requested {
        if w.is_empty() || !w.is_admissible() {
            return Err(DpError::NotAdmissible(w.to_string()));
        }
        if set.insert(w.clone()) {
            stack.push(w.clone());
        }
    }
    while let Some(w) = stack.pop() {
        let d = decompose(&w).expect("closure members are admissible");
        for part in [d.init, d.fin, d.mid] {
            if part.weight() >= 2 && set.insert(part.clone()) {
                stack.push(part);
            }
        }
    }
    let mut words: Vec<Word> = set.into_iter().collect();
    words.sort_by_key(|w| (w.weight(), w.clone()));
    Ok(words)
}

fn build_steps(words: &[Word]) -> Vec<StepMeta> {
    let index: BTreeMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let classify = |part: &Word| -> PartRef {
        match part.bits() {
            [] => PartRef::AtomEmpty,
            [false] => PartRef::AtomZero,
            [true] => PartRef::AtomOne,
            _ => PartRef::Table(*index.get(part).expect("plan words are closed")),
        }
    };
    words
        .iter()
        .map(|w| {
            let d = decompose(w).expect("plan words are admissible");
            StepMeta {
                parts: [
                    (classify(&d.init), d.a),
                    (classify(&d.fin), d.b),
                    (classify(&d.mid), d.a + d.b),
                ],
            }
        })
        .collect()
}

impl DpPlan {
    /// Plan for the closure of the requested words at the given precision.
    /// Iteration count and scale are fixed together: the scale's guard bits
    /// depend on N, and N depends on the per-step accuracy `8 * 2^-scale`.
    pub fn for_words(requested: &[Word], digits: u32) -> Result<DpPlan, DpError> {
        let words = closure(requested)?;
        if words.is_empty() {
            return Err(DpError::EmptyPlan);
        }
        // slightly above N ~ d ln10/ln4 so the scale guess is an upper bound
        let mut n_guess = (digits as u64 * 16610).div_ceil(10000) + 64;
        loop {
            let precision = PrecisionPlan::new(digits, n_guess);
            let n = choose_n(digits, &precision.step_alpha)
                .ok_or(DpError::Unattainable { digits })?;
            if n <= n_guess {
                let steps = build_steps(&words);
                return Ok(DpPlan { words, steps, n_iters: n, precision });
            }
            n_guess = n;
        }
    }

    /// Plan covering every admissible word of weight at most `k`.
    pub fn for_weight(k: usize, digits: u32) -> Result<DpPlan, DpError> {
        DpPlan::for_words(&crate::words::enumerate_admissible(k), digits)
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Forces a different iteration count (keeping the scale); the
    /// certificate widens accordingly and downstream printing refuses when
    /// the requested digits are no longer reachable.
    pub fn override_iterations(&mut self, n: u64) {
        self.n_iters = n;
    }
}

/// `u_0` values with the split error certificate.
#[derive(Clone, Debug)]
pub struct DpResult {
    pub words: Vec<Word>,
    pub values: Vec<FixedReal>,
    pub theoretical_error: BigRational,
    pub rounding_error: BigRational,
    pub n_iters: u64,
    pub digits: u32,
}

impl DpResult {
    pub fn value(&self, w: &Word) -> Option<&FixedReal> {
        self.words.binary_search_by_key(&(w.weight(), w.clone()), |v| (v.weight(), v.clone()))
            .ok()
            .map(|i| &self.values[i])
    }

    pub fn total_error(&self) -> BigRational {
        &self.theoretical_error + &self.rounding_error
    }
}

pub fn run(plan: &DpPlan) -> DpResult {
    run_with_snapshots(plan, &[]).0
}

/// Runs the descent; additionally returns the `u_level` generations for the
/// requested levels (level `n_iters` is the all-zero start).
pub fn run_with_snapshots(
    plan: &DpPlan,
    snapshot_levels: &[u64],
) -> (DpResult, BTreeMap<u64, Vec<FixedReal>>) {
    let f = plan.precision.scale;
    let fe = f + 3;
    let n_iters = plan.n_iters;
    let want: BTreeSet<u64> = snapshot_levels.iter().copied().collect();
    assert!(want.iter().all(|&l| l <= n_iters), "snapshot level beyond start");

    // central binomial reciprocals at 3 guard bits: the step contraction
    // n/(4n-2) <= 1/2 keeps their error below 2 ulps at scale fe, i.e.
    // 1/4 ulp at scale f
    let mut bins = Vec::with_capacity(n_iters as usize + 1);
    bins.push(FixedReal::one(fe));
    for x in 1..=n_iters {
        bins.push(binom_recip_step(&bins[(x - 1) as usize], x));
    }

    let mut u: Vec<FixedReal> = vec![FixedReal::zero(f); plan.words.len()];
    let mut snaps = BTreeMap::new();
    if want.contains(&n_iters) {
        snaps.insert(n_iters, u.clone());
    }

    for x in (1..=n_iters).rev() {
        let bin_x = &bins[x as usize];
        let next: Vec<FixedReal> = plan
            .steps
            .iter()
            .enumerate()
            .map(|(i, meta)| {
                let mut acc = u[i].clone();
                for &(part, e) in &meta.parts {
                    // Atom terms divide the guarded binomial value once and
                    // truncate, staying within 1.375 ulp; table terms cost one
                    // ulp. A full step stays within alpha = 8 ulp.
                    let term = match part {
                        PartRef::Table(j) => u[j].div_int(&pow_u64(x, e)),
                        PartRef::AtomEmpty => bin_x.div_int(&pow_u64(x, e)).to_scale(f),
                        PartRef::AtomZero | PartRef::AtomOne => {
                            bin_x.div_int(&pow_u64(x, e + 1)).to_scale(f)
                        }
                    };
                    acc = acc.add(&term);
                }
                acc
            })
            .collect();
        u = next;
        if want.contains(&(x - 1)) {
            snaps.insert(x - 1, u.clone());
        }
    }

    let result = DpResult {
        words: plan.words.clone(),
        values: u,
        theoretical_error: error_bound_partial(n_iters, 0, &BigRational::zero()),
        rounding_error: &error_bound(n_iters, &plan.precision.step_alpha)
            - &error_bound_partial(n_iters, 0, &BigRational::zero()),
        n_iters,
        digits: plan.precision.digits,
    };
    (result, snaps)
}

fn pow_u64(x: u64, e: u32) -> BigUint {
    big(x).pow(e)
}

/// Exact-rational engine (alpha = 0): same descent over `BigRational`.
#[derive(Clone, Debug)]
pub struct ExactRun {
    pub words: Vec<Word>,
    pub values: Vec<BigRational>,
    pub snapshots: BTreeMap<u64, Vec<BigRational>>,
}

impl ExactRun {
    pub fn value(&self, w: &Word) -> Option<&BigRational> {
        self.words.iter().position(|v| v == w).map(|i| &self.values[i])
    }
}

pub fn run_exact(requested: &[Word], n_iters: u64, snapshot_levels: &[u64]) -> Result<ExactRun, DpError> {
    let words = closure(requested)?;
    if words.is_empty() {
        return Err(DpError::EmptyPlan);
    }
    if let Some(&bad) = snapshot_levels.iter().find(|&&l| l > n_iters) {
        return Err(DpError::BadSnapshot(bad));
    }
    let steps = build_steps(&words);
    let want: BTreeSet<u64> = snapshot_levels.iter().copied().collect();

    let binr = |x: u64| -> BigRational {
        BigRational::new(BigUint::one().into(), binomial(big(2 * x), big(x)).into())
    };

    let mut u: Vec<BigRational> = vec![BigRational::zero(); words.len()];
    let mut snapshots = BTreeMap::new();
    if want.contains(&n_iters) {
        snapshots.insert(n_iters, u.clone());
    }
    for x in (1..=n_iters).rev() {
        let bx = binr(x);
        let next: Vec<BigRational> = steps
            .iter()
            .enumerate()
            .map(|(i, meta)| {
                let mut acc = u[i].clone();
                for &(part, e) in &meta.parts {
                    let denom = BigRational::new(pow_u64(x, e).into(), 1.into());
                    let val = match part {
                        PartRef::Table(j) => u[j].clone(),
                        PartRef::AtomEmpty => bx.clone(),
                        PartRef::AtomZero | PartRef::AtomOne => {
                            &bx / BigRational::new(x.into(), 1.into())
                        }
                    };
                    acc += val / denom;
                }
                acc
            })
            .collect();
        u = next;
        if want.contains(&(x - 1)) {
            snapshots.insert(x - 1, u.clone());
        }
    }
    Ok(ExactRun { words, values: u, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixnum::pow10;
    use crate::words::enumerate_admissible;
    use num_traits::Signed;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn alpha_pow10(neg: u32) -> BigRational {
        BigRational::new(1.into(), pow10(neg).into())
    }

    #[test]
    fn closure_examples() {
        let c = closure(&[w("0011")]).unwrap();
        assert_eq!(c, vec![w("01"), w("001"), w("011"), w("0011")]);
        let c = closure(&[w("0101")]).unwrap();
        assert_eq!(c, vec![w("01"), w("0101")]);
        // closure of all weight <= k equals the full enumeration
        let c = closure(&enumerate_admissible(6)).unwrap();
        assert_eq!(c, enumerate_admissible(6));
        assert!(closure(&[w("10")]).is_err());
    }

    #[test]
    fn exact_weight2_partial_sum() {
        // V = {01}, N = 3: u_0 = 3(1/2 + 1/24 + 1/180) = 197/120
        let run = run_exact(&[w("01")], 3, &[]).unwrap();
        assert_eq!(run.values[0], BigRational::new(197.into(), 120.into()));
    }

    #[test]
    fn error_bound_examples() {
        // N = 0, alpha = 0: the bound is the pi^2/6 over-estimate itself
        assert_eq!(error_bound(0, &BigRational::zero()), pi2_over_6_upper());
        // N = 10, alpha = 10^-20: 121 C / 2^20 + 385e-20, about 1.898e-4
        let b = error_bound(10, &alpha_pow10(20));
        assert!(b > BigRational::new(1898.into(), pow10(7).into()));
        assert!(b < BigRational::new(1899.into(), pow10(7).into()));
        // alpha = 0 keeps only the 4^-N (N+1)^2 term
        let b = error_bound(7, &BigRational::zero());
        assert_eq!(b, pi2_over_6_upper() * BigRational::new(64.into(), (1u64 << 14).into()));
    }

    #[test]
    fn choose_n_small() {
        // smallest N with 2^-2N (N+1)^2 pi^2/6 < 10^-10 (alpha = 0):
        // N = 21 gives 1.81e-10, N = 22 gives 4.95e-11
        assert_eq!(choose_n(10, &BigRational::zero()), Some(22));
        // an alpha too large for the target is detected
        assert_eq!(choose_n(10, &alpha_pow10(9)), None);
    }

    #[test]
    fn choose_n_paper_example() {
        assert_eq!(choose_n(1000, &alpha_pow10(1010)), Some(1673));
    }

    #[test]
    fn doubling_n_quarters_the_bound() {
        let zero = BigRational::zero();
        for n in [5u64, 10, 20, 40] {
            let b1 = error_bound(n, &zero);
            let b2 = error_bound(2 * n, &zero);
            assert!(b2 * BigRational::new(4.into(), 1.into()) <= b1);
        }
    }

    #[test]
    fn run_is_deterministic_and_total_error_certifies() {
        let plan = DpPlan::for_words(&[w("0011")], 12).unwrap();
        let r1 = run(&plan);
        let r2 = run(&plan);
        assert_eq!(r1.values, r2.values);
        assert!(r1.total_error() < BigRational::new(1.into(), pow10(12).into()));
    }

    #[test]
    fn fixed_point_matches_exact_engine_within_alpha_budget() {
        let words = [w("0101"), w("0011")];
        let plan = DpPlan::for_words(&words, 15).unwrap();
        let n = plan.n_iters;
        let fixed = run(&plan);
        let exact = run_exact(&words, n, &[]).unwrap();
        for (i, word) in fixed.words.iter().enumerate() {
            let ex = exact.value(word).unwrap();
            let diff = (fixed.values[i].to_rational() - ex).abs();
            assert!(
                diff <= fixed.rounding_error,
                "word {} diff {} exceeds rounding budget {}",
                word,
                diff,
                fixed.rounding_error
            );
        }
    }

    #[test]
    fn snapshots_are_the_intermediate_generations() {
        let words = [w("01")];
        let run = run_exact(&words, 3, &[0, 1, 2, 3]).unwrap();
        assert_eq!(run.snapshots[&3][0], BigRational::zero());
        // u_2 = 3 * 3^-2 * 1/20
        assert_eq!(run.snapshots[&2][0], BigRational::new(1.into(), 60.into()));
        assert_eq!(run.snapshots[&0][0], run.values[0]);
    }

    #[test]
    fn diagonal_tails_strictly_decrease() {
        // u_n(v) = zeta(v)_{n,n} under exact arithmetic decreases in n
        let run = run_exact(&[w("0011")], 12, &[0, 2, 4, 6, 8, 10]).unwrap();
        for i in 0..run.words.len() {
            let mut prev: Option<BigRational> = None;
            for level in [10u64, 8, 6, 4, 2, 0] {
                let v = run.snapshots[&level][i].clone();
                if let Some(p) = prev {
                    assert!(v > p, "u_{}({}) not increasing as n decreases", level, run.words[i]);
                }
                prev = Some(v);
            }
        }
    }
}
