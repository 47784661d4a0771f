//! The weight-k recurrence matrix over the integers and its left kernel.
//!
//! For a weight class k, the diagonal-tail recurrences of the duality
//! representatives assemble into `X_{n-1} = X_n + A Y_n`, where `Y_n` lists
//! the lower-weight representatives (with their forced `n^{w-k}` factors
//! kept in `Y`, never in `A`) and a final column for the empty word. Both
//! 0- and 1-atoms fold into the empty column because
//! `zeta(0)_{n,n} = zeta(1)_{n,n} = n^-1 zeta(empty)_{n,n}`, and a term
//! landing on a non-representative word is credited to its duality
//! representative (diagonal tails are duality-invariant).
//!
//! Integer vectors `L` with `L A = 0` make `L X_n` constant in n, hence
//! identically zero; their lattice rank is `d_k`. Vectors with `L A`
//! supported on the empty column alone yield Euler-type closed forms
//! `L X_0 = c sum n^-k C(2n,n)^-1`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dp::{self, DpPlan};
use crate::fixnum::ulp;
use crate::words::{decompose, representatives, Word};

/// Column label: a duality representative or the final empty-word column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColLabel {
    Word(Word),
    Empty,
}

impl ColLabel {
    pub fn text(&self) -> String {
        match self {
            ColLabel::Word(w) => w
                .to_composition()
                .expect("representatives are admissible")
                .to_string(),
            ColLabel::Empty => "()".to_string(),
        }
    }
}

/// The integer matrix `A` of `X_{n-1} = X_n + A Y_n` for one weight class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailMatrix {
    pub weight: u32,
    pub row_words: Vec<Word>,
    pub col_labels: Vec<ColLabel>,
    pub entries: Vec<Vec<i64>>,
}

impl TailMatrix {
    pub fn rows(&self) -> usize {
        self.row_words.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    /// Row labels as composition strings.
    pub fn row_labels(&self) -> Vec<String> {
        self.row_words
            .iter()
            .map(|w| w.to_composition().expect("admissible").to_string())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "weight": self.weight,
            "rows": self.row_labels(),
            "cols": self.col_labels.iter().map(|c| c.text()).collect::<Vec<_>>(),
            "entries": self.entries,
        })
    }
}

impl fmt::Display for TailMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels = self.row_labels();
        let label_w = labels.iter().map(|l| l.len()).max().unwrap_or(1);
        let col_texts: Vec<String> = self.col_labels.iter().map(|c| c.text()).collect();
        let cell_w = col_texts.iter().map(|t| t.len()).max().unwrap_or(1).max(2);
        write!(f, "{:label_w$} |", "")?;
        for t in &col_texts {
            write!(f, " {:>cell_w$}", t)?;
        }
        writeln!(f)?;
        for (label, row) in labels.iter().zip(&self.entries) {
            write!(f, "{:label_w$} |", label)?;
            for e in row {
                write!(f, " {:>cell_w$}", e)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Builds the weight-k matrix: rows are the weight-k representatives in
/// enumeration order, columns the lower-weight representatives by descending
/// weight (then enumeration order) with the empty column last.
pub fn build_matrix(k: u32) -> TailMatrix {
    assert!(k >= 2);
    let row_words = representatives(k as usize);
    let mut col_labels: Vec<ColLabel> = Vec::new();
    let mut col_index: BTreeMap<Word, usize> = BTreeMap::new();
    for j in (2..k).rev() {
        for rep in representatives(j as usize) {
            col_index.insert(rep.clone(), col_labels.len());
            col_labels.push(ColLabel::Word(rep));
        }
    }
    let empty_col = col_labels.len();
    col_labels.push(ColLabel::Empty);

    let entries = row_words
        .iter()
        .map(|w| {
            let mut row = vec![0i64; col_labels.len()];
            let d = decompose(w).expect("representatives are admissible");
            for part in [d.init, d.fin, d.mid] {
                if part.weight() >= 2 {
                    row[col_index[&part.canonical_rep()]] += 1;
                } else {
                    row[empty_col] += 1;
                }
            }
            row
        })
        .collect();

    TailMatrix { weight: k, row_words, col_labels, entries }
}

// ---------------------------------------------------------------------------
// Exact integer linear algebra
// ---------------------------------------------------------------------------

/// Fraction-free (Bareiss) row echelon form. Returns the pivot positions.
fn bareiss_echelon(m: &mut [Vec<BigInt>]) -> Vec<(usize, usize)> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let num = &m[i][j] * &m[r][c] - &m[i][c] * &m[r][j];
                m[i][j] = num / &prev; // exact by the Bareiss identity
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push((r, c));
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Nullspace basis of an integer matrix, as content-one integer vectors with
/// positive leading entry, one per free column in column order.
fn nullspace(mat: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let mut m = mat;
    let pivots = bareiss_echelon(&mut m);
    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivot_cols.contains(c)) {
        let mut x = vec![BigRational::zero(); cols];
        x[free] = BigRational::one();
        for &(pr, pc) in pivots.iter().rev() {
            let mut s = BigRational::zero();
            for j in pc + 1..cols {
                if !x[j].is_zero() && !m[pr][j].is_zero() {
                    s += BigRational::from(m[pr][j].clone()) * &x[j];
                }
            }
            x[pc] = -s / BigRational::from(m[pr][pc].clone());
        }
        basis.push(clear_denominators(&x));
    }
    basis
}

fn clear_denominators(x: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for v in x {
        if !v.is_zero() {
            lcm = lcm.lcm(v.denom());
        }
    }
    let mut out: Vec<BigInt> = x
        .iter()
        .map(|v| (v * BigRational::from(lcm.clone())).to_integer())
        .collect();
    let mut content = BigInt::zero();
    for v in &out {
        content = content.gcd(v);
    }
    if !content.is_zero() && !content.is_one() {
        for v in &mut out {
            *v /= &content;
        }
    }
    if let Some(first) = out.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            for v in &mut out {
                *v = -v.clone();
            }
        }
    }
    out
}

fn transpose_entries(entries: &[Vec<i64>], cols: usize) -> Vec<Vec<BigInt>> {
    (0..cols)
        .map(|c| entries.iter().map(|row| BigInt::from(row[c])).collect())
        .collect()
}

/// Rank of `A` and the vanishing module of the weight class: integer
/// combinations `L` of the row labels with `L X_n = 0` for every n, i.e.
/// `L A` lands in the span of the lower-weight vanishing modules (embedded
/// in their column blocks). `d_k` is the module's rank; the basis vectors
/// have content one and positive leading entry.
#[derive(Clone, Debug)]
pub struct KernelReport {
    pub weight: u32,
    pub rank: usize,
    pub d_k: usize,
    pub basis: Vec<Vec<BigInt>>,
}

pub fn kernel(k: u32) -> KernelReport {
    kernel_chain(k).pop().expect("k >= 2")
}

/// The reports for every weight `2..=k_max`, computed bottom-up because each
/// level's module feeds the next levels' column blocks.
pub fn kernel_chain(k_max: u32) -> Vec<KernelReport> {
    assert!(k_max >= 2);
    let mut reports: Vec<KernelReport> = Vec::new();
    for k in 2..=k_max {
        let a = build_matrix(k);
        let rows = a.rows();

        let mut ech = transpose_entries(&a.entries, a.cols());
        let rank = bareiss_echelon(&mut ech).len();

        // Stack A on top of the embedded lower-weight kernel vectors; a left
        // kernel row (L, mu) of the stack has L A = -mu B, exactly the
        // membership condition. The projection to L is injective because the
        // embedded rows are independent.
        let mut stacked: Vec<Vec<BigInt>> = a
            .entries
            .iter()
            .map(|row| row.iter().map(|&e| BigInt::from(e)).collect())
            .collect();
        let mut offset = 0usize;
        for j in (2..k).rev() {
            let block = representatives(j as usize).len();
            let lower = &reports[(j - 2) as usize];
            for vec in &lower.basis {
                let mut row = vec![BigInt::zero(); a.cols()];
                row[offset..offset + block].clone_from_slice(vec);
                stacked.push(row);
            }
            offset += block;
        }

        let total_rows = stacked.len();
        let m = (0..a.cols())
            .map(|c| stacked.iter().map(|row| row[c].clone()).collect())
            .collect::<Vec<Vec<BigInt>>>();
        let full = nullspace(m, total_rows);
        let basis: Vec<Vec<BigInt>> = full
            .into_iter()
            .map(|v| {
                let rats: Vec<BigRational> =
                    v[..rows].iter().map(|x| BigRational::from(x.clone())).collect();
                clear_denominators(&rats)
            })
            .collect();
        reports.push(KernelReport { weight: k, rank, d_k: basis.len(), basis });
    }
    reports
}

/// An integer combination whose product with `A` is supported on the empty
/// column only: `L A = c e_last` with `c > 0`.
#[derive(Clone, Debug)]
pub struct BridgeResult {
    pub weight: u32,
    pub combination: Vec<BigInt>,
    pub constant: BigInt,
}

/// Looks for a bridge vector by solving against `A` without its empty
/// column; exists exactly when that kernel is larger than the full kernel.
pub fn bridge(k: u32) -> Option<BridgeResult> {
    let a = build_matrix(k);
    let rows = a.rows();
    let stripped: Vec<Vec<BigInt>> = (0..a.cols() - 1)
        .map(|c| a.entries.iter().map(|row| BigInt::from(row[c])).collect())
        .collect();
    let basis = nullspace(stripped, rows);
    let empty_dot = |l: &[BigInt]| -> BigInt {
        l.iter()
            .zip(&a.entries)
            .map(|(li, row)| li * BigInt::from(row[a.cols() - 1]))
            .sum()
    };
    let mut found = basis.into_iter().find(|l| !empty_dot(l).is_zero())?;
    let mut c = empty_dot(&found);
    if c.is_negative() {
        for v in &mut found {
            *v = -v.clone();
        }
        c = -c;
    }
    Some(BridgeResult { weight: k, combination: found, constant: c })
}

/// Numerical certificate that `L X_n` vanishes: the residual of the integer
/// combination of computed diagonal tails at every `n <= n_max`, against the
/// partial error budget of the descent.
#[derive(Clone, Debug)]
pub struct CertifyReport {
    pub weight: u32,
    pub digits: u32,
    /// (level, |residual|, tolerance) per checked level.
    pub levels: Vec<(u64, BigRational, BigRational)>,
}

impl CertifyReport {
    pub fn max_residual(&self) -> BigRational {
        self.levels.iter().map(|(_, r, _)| r.clone()).max().unwrap_or_else(BigRational::zero)
    }

    pub fn passes(&self) -> bool {
        self.levels.iter().all(|(_, r, t)| r <= t)
    }
}

pub fn certify_vanishing(l: &[BigInt], k: u32, n_max: u64, digits: u32) -> Result<CertifyReport, dp::DpError> {
    let reps = representatives(k as usize);
    assert_eq!(l.len(), reps.len(), "combination length must match the representative count");
    let plan = DpPlan::for_words(&reps, digits)?;
    let levels: Vec<u64> = (0..=n_max.min(plan.n_iters)).collect();
    let (result, snaps) = dp::run_with_snapshots(&plan, &levels);
    let rep_idx: Vec<usize> = reps
        .iter()
        .map(|r| result.words.iter().position(|w| w == r).expect("closure contains the reps"))
        .collect();
    let scale = result.values[0].scale();
    let mut rows = Vec::new();
    for level in levels {
        let gen = &snaps[&level];
        let mut dot = BigInt::zero();
        for (li, &idx) in l.iter().zip(&rep_idx) {
            dot += li * BigInt::from(gen[idx].mantissa().clone());
        }
        let residual = BigRational::from(dot.abs()) * ulp(scale);
        let beta = dp::error_bound_partial(plan.n_iters, level, &plan.precision.step_alpha);
        let tolerance: BigRational = l
            .iter()
            .map(|li| BigRational::from(li.abs()) * &beta)
            .sum();
        rows.push((level, residual, tolerance));
    }
    Ok(CertifyReport { weight: k, digits, levels: rows })
}
