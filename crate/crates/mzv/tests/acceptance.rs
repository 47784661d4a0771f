//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mzv::consts::pi2_over_6_upper;
use mzv::fixnum::pow10;
use mzv::series;
use mzv::tails;
use mzv::words::{enumerate_admissible, Composition, Word};
use mzv::{dp, relations};

fn rat(p: u64, q: u64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn neg_pow10(d: u32) -> BigRational {
    BigRational::new(1.into(), pow10(d).into())
}

fn comp(parts: &[u64]) -> Composition {
    Composition::new(parts.to_vec()).unwrap()
}

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

fn report(criterion: u32, ok: bool, detail: &str) {
    println!(
        "acceptance criterion {:>2}: {} - {}",
        criterion,
        if ok { "PASS" } else { "FAIL" },
        detail
    );
    assert!(ok, "criterion {} failed: {}", criterion, detail);
}

fn within(elapsed: Duration, ceiling_s: u64) -> bool {
    elapsed <= Duration::from_secs(ceiling_s)
}

#[test]
fn criterion_01_euler_formula() {
    let start = Instant::now();
    let d = 50;
    let s = series::zeta_series(&comp(&[2]), d).unwrap();
    let plan = dp::DpPlan::for_words(&[w("01")], d).unwrap();
    let r = dp::run(&plan);
    let dp_val = r.value(&w("01")).unwrap().to_rational();
    let series_val = s.value.to_rational();

    let algo_diff = (&series_val - &dp_val).abs();
    let ok_algos = algo_diff <= neg_pow10(48);

    // the Euler sum itself: 3 sum m^-2 C(2m,m)^-1 carries its own certificate
    let euler = series::central_binomial_sum(2, d);
    let euler_val = euler.value.to_rational() * rat(3, 1);
    let euler_err = &euler.error * rat(3, 1);
    let ok_euler = (&series_val - &euler_val).abs() <= &euler_err + &s.error;

    // both agree with the independent oracle within its certificate
    let oracle = tails::tail_series_oracle(&comp(&[2]), 0, 0, &neg_pow10(10)).unwrap();
    let ok_oracle = (&series_val - &oracle.value).abs() <= &oracle.error + &s.error
        && (&dp_val - &oracle.value).abs() <= &oracle.error + r.total_error();

    let ok_time = within(start.elapsed(), 1);
    report(
        1,
        ok_algos && ok_euler && ok_oracle && ok_time,
        &format!(
            "series/dp diff {:.3e}, Euler-sum and oracle checks {} in {:?}",
            algo_diff.to_f64(),
            ok_euler && ok_oracle,
            start.elapsed()
        ),
    );
}

trait ToF64 {
    fn to_f64(&self) -> f64;
}

impl ToF64 for BigRational {
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[test]
fn criterion_02_zeta4_identity() {
    let start = Instant::now();
    let d = 30;
    let z4 = series::zeta_series(&comp(&[4]), d).unwrap();
    let indep = series::central_binomial_sum(4, d);
    let lhs = z4.value.to_rational() * rat(17, 36);
    let diff = (&lhs - &indep.value.to_rational()).abs();
    let ok = diff <= neg_pow10(28) && within(start.elapsed(), 1);
    report(2, ok, &format!("|17/36 zeta(4) - sum| = {:.3e} in {:?}", diff.to_f64(), start.elapsed()));
}

#[test]
fn criterion_03_known_ratios() {
    let start = Instant::now();
    let d = 30;
    let plan = dp::DpPlan::for_weight(4, d).unwrap();
    let r = dp::run(&plan);
    let z4 = r.value(&w("0001")).unwrap().to_rational();
    let z31 = r.value(&w("0011")).unwrap().to_rational();
    let z22 = r.value(&w("0101")).unwrap().to_rational();
    let tol = neg_pow10(d - 2);
    let d31 = (z31 / &z4 - rat(1, 4)).abs();
    let d22 = (z22 / &z4 - rat(3, 4)).abs();
    let ok = d31 <= tol && d22 <= tol && within(start.elapsed(), 1);
    report(
        3,
        ok,
        &format!(
            "zeta(3,1)/zeta(4) off by {:.3e}, zeta(2,2)/zeta(4) off by {:.3e} in {:?}",
            d31.to_f64(),
            d22.to_f64(),
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_04_duality_suite() {
    let start = Instant::now();
    let d = 30;
    let plan = dp::DpPlan::for_weight(8, d).unwrap();
    let r = dp::run(&plan);
    let tol = neg_pow10(28);
    let mut worst = BigRational::zero();
    let mut count = 0usize;
    for word in enumerate_admissible(8) {
        let v = r.value(&word).unwrap().to_rational();
        let dv = r.value(&word.dual()).unwrap().to_rational();
        let diff = (v - dv).abs();
        if diff > worst {
            worst = diff;
        }
        count += 1;
    }
    let ok = count == 127 && worst <= tol && within(start.elapsed(), 30);
    report(
        4,
        ok,
        &format!("{} words, worst |zeta(w) - zeta(dual)| = {:.3e} in {:?}", count, worst.to_f64(), start.elapsed()),
    );
}

#[test]
fn criterion_05_prop6_bound_and_iteration_count() {
    let start = Instant::now();
    // exact-arithmetic descent against the oracle at the stated bound
    let words = [("01", &[2u64][..]), ("001", &[3]), ("0011", &[3, 1]), ("0101", &[2, 2])];
    let mut worst_margin = f64::MIN;
    for (word, parts) in words {
        let word = w(word);
        let target = neg_pow10(11) * rat(4, 1); // 4e-11, within every bound below
        let oracle = tails::tail_series_oracle(&comp(parts), 0, 0, &target).unwrap();
        for n_iters in [5u64, 10, 20] {
            let bound = pi2_over_6_upper() * rat((n_iters + 1) * (n_iters + 1), 1)
                / BigRational::new((BigUint::one() << (2 * n_iters as usize)).into(), 1.into());
            assert!(
                &oracle.error <= &(&bound / rat(10, 1)),
                "oracle certificate must stay well inside the Prop-6 tolerance"
            );
            let run = dp::run_exact(&[word.clone()], n_iters, &[]).unwrap();
            let u0 = run.value(&word).unwrap();
            let diff = (u0 - &oracle.value).abs();
            let margin = (diff.to_f64() / bound.to_f64()).log10();
            if margin > worst_margin {
                worst_margin = margin;
            }
            assert!(diff <= bound, "word {} N {}: {} > {}", word, n_iters, diff.to_f64(), bound.to_f64());
        }
    }
    // the worked iteration-count example
    let alpha = BigRational::new(1.into(), pow10(1010).into());
    let n = dp::choose_n(1000, &alpha);
    let ok = n == Some(1673) && within(start.elapsed(), 10);
    report(
        5,
        ok,
        &format!(
            "exact-descent error within bound (worst log10 margin {:.2}), choose_N(1000, 1e-1010) = {:?} in {:?}",
            worst_margin,
            n,
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_06_weight8_table_at_100_digits() {
    let start = Instant::now();
    let plan = dp::DpPlan::for_weight(8, 100).unwrap();
    let r = dp::run(&plan);
    let elapsed = start.elapsed();
    let ok = r.words.len() == 127
        && r.total_error() < neg_pow10(100)
        && within(elapsed, 60);
    report(6, ok, &format!("127 values at 100 digits in {:?} (ceiling 60 s)", elapsed));
}

#[test]
fn criterion_07_relations() {
    let start = Instant::now();
    let a4 = relations::build_matrix(4);
    let ok_a4 = a4.entries == vec![vec![1, 0, 2], vec![2, 1, 0], vec![0, 2, 1]];

    // (4, -2, 1) A = (0, 0, 9)
    let l = [BigInt::from(4), BigInt::from(-2), BigInt::from(1)];
    let prod: Vec<BigInt> = (0..3)
        .map(|c| l.iter().zip(&a4.entries).map(|(li, row)| li * BigInt::from(row[c])).sum())
        .collect();
    let ok_bridge4 = prod == vec![BigInt::zero(), BigInt::zero(), BigInt::from(9)];

    let a6 = relations::build_matrix(6);
    let paper_a6: Vec<Vec<i64>> = vec![
        vec![1, 0, 0, 0, 0, 0, 0, 0, 0, 2],
        vec![1, 1, 0, 0, 1, 0, 0, 0, 0, 0],
        vec![0, 0, 1, 0, 1, 0, 0, 1, 0, 0],
        vec![0, 2, 0, 0, 0, 1, 0, 0, 0, 0],
        vec![0, 0, 0, 1, 0, 0, 0, 1, 1, 0],
        vec![0, 0, 2, 0, 0, 0, 1, 0, 0, 0],
        vec![0, 0, 0, 1, 0, 1, 0, 1, 0, 0],
        vec![0, 0, 0, 0, 1, 0, 0, 0, 1, 1],
        vec![0, 0, 0, 0, 0, 0, 2, 0, 1, 0],
        vec![0, 0, 0, 0, 0, 0, 0, 2, 0, 1],
    ];
    let ok_a6 = a6.entries == paper_a6;

    let chain = relations::kernel_chain(10);
    let dk: Vec<usize> = chain.iter().map(|r| r.d_k).collect();
    let ok_dk = dk == vec![0, 0, 0, 0, 1, 0, 4, 2, 14];
    let k6 = &chain[4];
    let ok_rank6 = k6.rank == 9;
    let expected_l6: Vec<BigInt> =
        [2i64, -2, 4, 1, 1, -2, -1, -2, 1, -2].iter().map(|&x| BigInt::from(x)).collect();
    let ok_l6 = k6.basis == vec![expected_l6];

    let elapsed = start.elapsed();
    let ok = ok_a4 && ok_bridge4 && ok_a6 && ok_dk && ok_rank6 && ok_l6 && within(elapsed, 60);
    report(
        7,
        ok,
        &format!(
            "A4 {}, bridge {}, A6 {}, rank(A6)=9 {}, d_k table {}, L6 {} in {:?}",
            ok_a4, ok_bridge4, ok_a6, ok_rank6, ok_dk, ok_l6, elapsed
        ),
    );
}

#[test]
fn criterion_08_vanishing_certification() {
    let start = Instant::now();
    let k6 = relations::kernel(6);
    let report_ = relations::certify_vanishing(&k6.basis[0], 6, 5, 30).unwrap();
    let ok = report_.passes();
    report(
        8,
        ok && within(start.elapsed(), 30),
        &format!(
            "max |L . X_n| = {:.3e} over n <= 5 at 30 digits in {:?}",
            report_.max_residual().to_f64(),
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_09_finite_identity_random_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d7a76);
    let pool: Vec<Word> = enumerate_admissible(5);
    let mut worst_ratio = 0f64;
    for i in 0..20 {
        let word = pool[rng.gen_range(0..pool.len())].clone();
        let m = rng.gen_range(0..=3u64);
        let n = rng.gen_range(0..=3u64);
        let iters = rng.gen_range(1..=6u64);
        let fi = series::finite_identity_check(&word, m, n, iters).unwrap();
        let residual = fi.residual();
        let combined = fi.combined_error();
        assert!(
            residual <= combined,
            "sample {} ({}, m={}, n={}, N={}): residual {} > combined {}",
            i,
            word,
            m,
            n,
            iters,
            residual.to_f64(),
            combined.to_f64()
        );
        if combined.to_f64() > 0.0 {
            worst_ratio = worst_ratio.max(residual.to_f64() / combined.to_f64());
        }
    }
    report(
        9,
        true,
        &format!(
            "20 samples, worst residual/certificate ratio {:.3e} in {:?}",
            worst_ratio,
            start.elapsed()
        ),
    );
}

#[test]
fn criterion_10_bound_suites() {
    let start = Instant::now();
    // Thm-3 style bound on sampled double tails
    let cap_budget = neg_pow10(4);
    let mut checked = 0usize;
    for word in enumerate_admissible(5) {
        let c = word.to_composition().unwrap();
        for m in 0..=2u64 {
            for n in 0..=2u64 {
                let v =
                    tails::tail_series_oracle_best_effort(&c, m, n, &cap_budget, 1 << 16).unwrap();
                if m + n == 0 {
                    // bound_c needs m + n >= 1; the weight-0 factor is 1
                    assert!(v.value <= pi2_over_6_upper() + &v.error);
                } else {
                    let cap = tails::bound_c(m, n) * pi2_over_6_upper();
                    assert!(
                        v.value <= &cap + &v.error,
                        "{} at ({},{}) exceeds its bound",
                        word,
                        m,
                        n
                    );
                }
                checked += 1;
            }
        }
    }
    // Prop 7 exhaustively over all compositions of weight <= 6, q <= 12
    let mut phi_checked = 0usize;
    for weight in 1..=6u64 {
        for c in all_compositions(weight) {
            for p in 0..12u64 {
                for q in p + 1..=12 {
                    let phi = series::phi_interval(&c, p, q);
                    assert!(phi >= BigRational::zero() && phi <= BigRational::one());
                    let z = series::zeta_interval(&c, p, q);
                    assert!(z >= BigRational::zero() && z <= rat(q - p, 1));
                    phi_checked += 1;
                }
            }
        }
    }
    report(
        10,
        true,
        &format!(
            "{} tail bounds and {} interval bounds checked in {:?}",
            checked,
            phi_checked,
            start.elapsed()
        ),
    );
}

fn all_compositions(weight: u64) -> Vec<Composition> {
    if weight == 0 {
        return vec![Composition::empty()];
    }
    let mut out = Vec::new();
    for first in 1..=weight {
        for rest in all_compositions(weight - first) {
            let mut parts = vec![first];
            parts.extend_from_slice(rest.parts());
            out.push(Composition::new(parts).unwrap());
        }
    }
    out
}

#[test]
fn criterion_11_step_count_and_wall_clock() {
    let target = comp(&[2, 1, 3, 2]);
    let d = 100;

    let t0 = Instant::now();
    let s = series::zeta_series(&target, d).unwrap();
    let series_wall = t0.elapsed();

    let t1 = Instant::now();
    let b = series::baseline_chasles(&target, d).unwrap();
    let baseline_wall = t1.elapsed();

    let agree = (s.value.to_rational() - b.value.to_rational()).abs() <= &s.error + &b.error;
    let ratio = s.outer_terms as f64 / b.outer_terms as f64;
    let ok = agree && ratio <= 0.55 && series_wall < baseline_wall;
    report(
        11,
        ok,
        &format!(
            "outer terms {}/{} = {:.3} (<= 0.55), series {:?} vs baseline {:?}, values agree {}",
            s.outer_terms, b.outer_terms, ratio, series_wall, baseline_wall, agree
        ),
    );
}

#[test]
fn criterion_12_asymptotics() {
    let start = Instant::now();
    let n = 10_000u64;
    let cases: [(&[u64], u32); 3] = [(&[2], 7), (&[3, 1], 11), (&[2, 2], 11)];
    let mut worst = 0f64;
    for (parts, tgt) in cases {
        let c = comp(parts);
        let v = tails::tail_series_oracle(&c, 0, n, &neg_pow10(tgt)).unwrap();
        let asym = tails::ntail_asymptotic(&c, n).unwrap();
        let ratio = (&v.value / &asym).to_f64();
        assert!(
            (0.99..=1.01).contains(&ratio),
            "{:?}: oracle/asymptotic = {}",
            parts,
            ratio
        );
        worst = worst.max((ratio - 1.0).abs());
    }
    report(
        12,
        true,
        &format!("worst |ratio - 1| = {:.2e} at n = 10^4 in {:?}", worst, start.elapsed()),
    );
}
