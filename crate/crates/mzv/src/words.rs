//! Compositions, binary words, duality and the unique `0 {1}^{b-1} v {0}^{a-1} 1`
//! decomposition that drives the diagonal-tail recurrences.
//!
//! A composition `(a_1, ..., a_r)` is encoded as the binary word
//! `{0}^{a_1-1} 1 ... {0}^{a_r-1} 1`; the map is a bijection onto words not
//! ending in `0`. Admissible means `a_1 >= 2` on the composition side and
//! "starts with 0, ends with 1" on the word side (the empty object is
//! admissible in both pictures).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("composition parts must be >= 1")]
    ZeroPart,
    #[error("word ends in 0 and does not encode a composition")]
    EndsInZero,
    #[error("word {0:?} is not admissible (must be empty or start with 0 and end with 1)")]
    NotAdmissible(String),
    #[error("the empty word has no (v, a, b) decomposition")]
    EmptyWord,
    #[error("invalid character {0:?} in word literal (expected '0' or '1')")]
    BadChar(char),
    #[error("invalid composition literal {0:?}")]
    BadComposition(String),
}

/// A binary word; bit `true` is `1`. Lexicographic order with `0 < 1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    bits: Vec<bool>,
}

impl Word {
    pub fn new(bits: Vec<bool>) -> Self {
        Word { bits }
    }

    pub fn empty() -> Self {
        Word { bits: Vec::new() }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Number of bits.
    pub fn weight(&self) -> usize {
        self.bits.len()
    }

    /// Number of bits equal to 1.
    pub fn depth(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_admissible(&self) -> bool {
        self.is_empty() || (!self.bits[0] && *self.bits.last().unwrap())
    }

    pub fn starts_with_one(&self) -> bool {
        self.bits.first().copied().unwrap_or(false)
    }

    pub fn ends_with_zero(&self) -> bool {
        self.bits.last().map(|&b| !b).unwrap_or(false)
    }

    /// Reverse-and-complement. An involution that preserves admissibility
    /// and weight and sends depth to weight - depth.
    pub fn dual(&self) -> Word {
        Word {
            bits: self.bits.iter().rev().map(|&b| !b).collect(),
        }
    }

    /// The lexicographically smaller of `self` and its dual. Idempotent and
    /// shared by a word and its dual, so it labels duality classes.
    pub fn canonical_rep(&self) -> Word {
        let d = self.dual();
        if d < *self {
            d
        } else {
            self.clone()
        }
    }

    pub fn subword(&self, start: usize, end: usize) -> Word {
        Word {
            bits: self.bits[start..end].to_vec(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Word { bits }
    }

    pub fn to_composition(&self) -> Result<Composition, WordError> {
        composition_of_word(self)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({})", self)
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(WordError::BadChar(other)),
            }
        }
        Ok(Word { bits })
    }
}

/// A finite sequence of positive integers `(a_1, ..., a_r)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    parts: Vec<u64>,
}

impl Composition {
    pub fn new(parts: Vec<u64>) -> Result<Self, WordError> {
        if parts.iter().any(|&p| p == 0) {
            return Err(WordError::ZeroPart);
        }
        Ok(Composition { parts })
    }

    pub fn empty() -> Self {
        Composition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn weight(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_admissible(&self) -> bool {
        self.parts.first().map(|&a| a >= 2).unwrap_or(true)
    }

    pub fn to_word(&self) -> Word {
        word_of_composition(self)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", p)?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Composition{}", self)
    }
}

impl FromStr for Composition {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| WordError::BadComposition(s.to_string()))?;
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(Composition::empty());
        }
        let mut parts = Vec::new();
        for piece in inner.split(',') {
            let p: u64 = piece
                .trim()
                .parse()
                .map_err(|_| WordError::BadComposition(s.to_string()))?;
            parts.push(p);
        }
        Composition::new(parts)
    }
}

/// `(a_1, ..., a_r) -> {0}^{a_1-1} 1 ... {0}^{a_r-1} 1`.
pub fn word_of_composition(c: &Composition) -> Word {
    let mut bits = Vec::with_capacity(c.weight() as usize);
    for &a in c.parts() {
        for _ in 0..a - 1 {
            bits.push(false);
        }
        bits.push(true);
    }
    Word { bits }
}

/// Inverse of [`word_of_composition`]; defined on words not ending in 0.
pub fn composition_of_word(w: &Word) -> Result<Composition, WordError> {
    if w.ends_with_zero() {
        return Err(WordError::EndsInZero);
    }
    let mut parts = Vec::new();
    let mut zeros = 0u64;
    for &b in w.bits() {
        if b {
            parts.push(zeros + 1);
            zeros = 0;
        } else {
            zeros += 1;
        }
    }
    Ok(Composition { parts })
}

/// The unique `(v, a, b)` with `w = 0 {1}^{b-1} v {0}^{a-1} 1` and `v`
/// admissible or empty, together with the three derived parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// `w^mid = v`
    pub mid: Word,
    /// `w^init = 0 {1}^{b-1} v`, i.e. `w` minus its last `a` bits.
    pub init: Word,
    /// `w^fin = v {0}^{a-1} 1`, i.e. `w` minus its first `b` bits.
    pub fin: Word,
    pub a: u32,
    pub b: u32,
}

impl Decomposition {
    /// Rebuilds `0 {1}^{b-1} v {0}^{a-1} 1`.
    pub fn reconstruct(&self) -> Word {
        let mut bits = vec![false];
        bits.extend(std::iter::repeat(true).take(self.b as usize - 1));
        bits.extend_from_slice(self.mid.bits());
        bits.extend(std::iter::repeat(false).take(self.a as usize - 1));
        bits.push(true);
        Word { bits }
    }
}

/// Strips the outer `0 ... 1`, then reads `b - 1` as the number of leading
/// 1-bits and `a - 1` as the number of trailing 0-bits of the remainder.
pub fn decompose(w: &Word) -> Result<Decomposition, WordError> {
    if w.is_empty() {
        return Err(WordError::EmptyWord);
    }
    if !w.is_admissible() {
        return Err(WordError::NotAdmissible(w.to_string()));
    }
    let k = w.weight();
    let inner = &w.bits()[1..k - 1];
    let lead_ones = inner.iter().take_while(|&&b| b).count();
    let trail_zeros = inner.iter().rev().take_while(|&&b| !b).count();
    let b = lead_ones as u32 + 1;
    let a = trail_zeros as u32 + 1;
    let mid = Word {
        bits: inner[lead_ones..inner.len() - trail_zeros].to_vec(),
    };
    let init = w.subword(0, k - a as usize);
    let fin = w.subword(b as usize, k);
    debug_assert!(mid.is_admissible());
    Ok(Decomposition { mid, init, fin, a, b })
}

/// All admissible words of exactly the given weight, lexicographically.
pub fn admissible_of_weight(weight: usize) -> Vec<Word> {
    if weight < 2 {
        return Vec::new();
    }
    let free = weight - 2;
    let count = 1usize << free;
    let mut out = Vec::with_capacity(count);
    for mask in 0..count {
        let mut bits = Vec::with_capacity(weight);
        bits.push(false);
        for pos in (0..free).rev() {
            bits.push(mask >> pos & 1 == 1);
        }
        bits.push(true);
        out.push(Word { bits });
    }
    out
}

/// All non-empty admissible words of weight `2..=max_weight`, weight-major
/// then lexicographic. Contains `2^{max_weight-1} - 1` words.
pub fn enumerate_admissible(max_weight: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for k in 2..=max_weight {
        out.extend(admissible_of_weight(k));
    }
    out
}

/// Duality-class representatives (lex-min of `{w, dual(w)}`) of the given
/// weight, lexicographically.
pub fn representatives(weight: usize) -> Vec<Word> {
    admissible_of_weight(weight)
        .into_iter()
        .filter(|w| *w <= w.dual())
        .collect()
}

/// The contiguous subwords `e_i ... e_j` with `e_i = 0` and `e_j = 1`,
/// deduplicated. Always contains `w` itself.
pub fn admissible_subwords(w: &Word) -> BTreeSet<Word> {
    let bits = w.bits();
    let k = bits.len();
    let mut out = BTreeSet::new();
    for i in 0..k {
        if bits[i] {
            continue;
        }
        for j in i + 1..k {
            if bits[j] {
                out.insert(w.subword(i, j + 1));
            }
        }
    }
    out
}
