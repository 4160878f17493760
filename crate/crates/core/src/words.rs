//! Free-group words on a set of named generators, their abelianization and the
//! degree-2 part of the Magnus expansion.
//!
//! A [`Word`] is always kept freely reduced. The Magnus map sends a generator
//! `x_i` to `1 + X_i` in the ring of non-commuting power series; truncating at
//! total degree two gives the coordinates used to separate elements of the
//! second lower-central quotient.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown generator index {0} (rank {1})")]
    UnknownGenerator(usize, usize),
    #[error("unknown generator name `{0}`")]
    UnknownName(String),
    #[error("malformed token `{0}`")]
    BadToken(String),
    #[error("generator names must be distinct and nonempty")]
    BadGeneratorSet,
    #[error("word has nonzero abelianization {0:?}; the degree-2 class is undefined")]
    NonzeroAbelianization(Vec<i64>),
    #[error("vector length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorSet {
    names: Vec<String>,
}

impl GeneratorSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, WordError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() || names.iter().any(|n| n.is_empty() || n.contains(char::is_whitespace)) {
            return Err(WordError::BadGeneratorSet);
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(WordError::BadGeneratorSet);
            }
        }
        Ok(Self { names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Parses whitespace-separated tokens `a`, `a^-1`, `a^3`.
    pub fn parse(&self, text: &str) -> Result<Word, WordError> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "e" && self.index_of("e").is_none() {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (n, e.parse::<i64>().map_err(|_| WordError::BadToken(tok.into()))?),
                None => (tok, 1),
            };
            let gen = self
                .index_of(name)
                .ok_or_else(|| WordError::UnknownName(name.to_string()))?;
            for _ in 0..exp.unsigned_abs() {
                letters.push(Letter { gen, inverse: exp < 0 });
            }
        }
        reduce_word(self.rank(), letters)
    }

    pub fn format(&self, w: &Word) -> String {
        if w.is_empty() {
            return "e".to_string();
        }
        w.letters
            .iter()
            .map(|l| {
                if l.inverse {
                    format!("{}^-1", self.names[l.gen])
                } else {
                    self.names[l.gen].clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, sign: i32) -> Self {
        Self { gen, inverse: sign < 0 }
    }

    pub fn inv(self) -> Self {
        Self { gen: self.gen, inverse: !self.inverse }
    }

    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
}

/// Free reduction of a raw letter sequence.
pub fn reduce_word(rank: usize, letters: impl IntoIterator<Item = Letter>) -> Result<Word, WordError> {
    let mut out: Vec<Letter> = Vec::new();
    for l in letters {
        if l.gen >= rank {
            return Err(WordError::UnknownGenerator(l.gen, rank));
        }
        push_reduced(&mut out, l);
    }
    Ok(Word { letters: out })
}

fn push_reduced(out: &mut Vec<Letter>, l: Letter) {
    if out.last() == Some(&l.inv()) {
        out.pop();
    } else {
        out.push(l);
    }
}

impl Word {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn generator(gen: usize) -> Self {
        Self { letters: vec![Letter { gen, inverse: false }] }
    }

    pub fn letter(l: Letter) -> Self {
        Self { letters: vec![l] }
    }

    /// Builds a word from letters already known to be valid; reduces freely.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out = Vec::new();
        for l in letters {
            push_reduced(&mut out, l);
        }
        Self { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn max_gen(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.gen).max()
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut out, l);
        }
        Word { letters: out }
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn commutator(u: &Word, v: &Word) -> Word {
        u.mul(v).mul(&u.inverse()).mul(&v.inverse())
    }

    /// Cyclic reduction: strips matching inverse letters from both ends.
    pub fn cyclically_reduced(&self) -> Word {
        let mut l = self.letters.as_slice();
        while l.len() >= 2 && l[0] == l[l.len() - 1].inv() {
            l = &l[1..l.len() - 1];
        }
        Word { letters: l.to_vec() }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| if l.inverse { format!("g{}^-1", l.gen) } else { format!("g{}", l.gen) })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Exponent sums per generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbelianVector(pub Vec<i64>);

impl AbelianVector {
    pub fn zero(rank: usize) -> Self {
        Self(vec![0; rank])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|a| -a).collect())
    }
}

pub fn abelianize(rank: usize, w: &Word) -> AbelianVector {
    let mut v = vec![0i64; rank];
    for l in w.letters() {
        v[l.gen] += l.sign();
    }
    AbelianVector(v)
}

/// Number of unordered generator pairs `i < j`.
pub fn pair_count(rank: usize) -> usize {
    rank * rank.saturating_sub(1) / 2
}

/// Position of the pair `(i, j)`, `i < j`, in row-major order.
pub fn pair_index(rank: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < rank);
    i * (2 * rank - i - 1) / 2 + (j - i - 1)
}

pub fn pair_of_index(rank: usize, idx: usize) -> (usize, usize) {
    let mut k = idx;
    for i in 0..rank {
        let row = rank - i - 1;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
    }
    panic!("pair index {idx} out of range for rank {rank}")
}

/// Coordinates of a word in the free nilpotent quotient of class two: the
/// degree-1 Magnus coefficients and the degree-2 coefficients `c_ij`, `i < j`.
/// The remaining degree-2 coefficients are determined by these.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NilCoords {
    pub linear: Vec<i64>,
    pub quadratic: Vec<i64>,
}

impl NilCoords {
    pub fn identity(rank: usize) -> Self {
        Self { linear: vec![0; rank], quadratic: vec![0; pair_count(rank)] }
    }

    pub fn rank(&self) -> usize {
        self.linear.len()
    }

    pub fn of_word(rank: usize, w: &Word) -> Self {
        let mut c = Self::identity(rank);
        for &l in w.letters() {
            c.push_letter(l);
        }
        c
    }

    /// Right-multiplies by one letter.
    pub fn push_letter(&mut self, l: Letter) {
        let n = self.rank();
        let s = l.sign();
        let j = l.gen;
        for i in 0..j {
            self.quadratic[pair_index(n, i, j)] += self.linear[i] * s;
        }
        self.linear[j] += s;
    }

    /// Group product in the class-two quotient:
    /// `c_ij(uv) = c_ij(u) + c_ij(v) + c_i(u) c_j(v)`.
    pub fn mul(&self, other: &Self) -> Self {
        let n = self.rank();
        let mut out = Self {
            linear: self.linear.iter().zip(&other.linear).map(|(a, b)| a + b).collect(),
            quadratic: self.quadratic.iter().zip(&other.quadratic).map(|(a, b)| a + b).collect(),
        };
        for i in 0..n {
            if self.linear[i] == 0 {
                continue;
            }
            for j in (i + 1)..n {
                out.quadratic[pair_index(n, i, j)] += self.linear[i] * other.linear[j];
            }
        }
        out
    }

    /// `c_ij(u^-1) = -c_ij(u) + c_i(u) c_j(u)`.
    pub fn inverse(&self) -> Self {
        let n = self.rank();
        let mut out = Self {
            linear: self.linear.iter().map(|a| -a).collect(),
            quadratic: self.quadratic.iter().map(|a| -a).collect(),
        };
        for i in 0..n {
            for j in (i + 1)..n {
                out.quadratic[pair_index(n, i, j)] += self.linear[i] * self.linear[j];
            }
        }
        out
    }

    pub fn abelian(&self) -> AbelianVector {
        AbelianVector(self.linear.clone())
    }
}

/// Antisymmetrized degree-2 Magnus coefficients of a word in the kernel of
/// abelianization, indexed by pairs `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Degree2Class {
    pub pairs: Vec<i64>,
    pub quotient_relation: Option<Vec<i64>>,
}

impl Degree2Class {
    pub fn is_zero(&self) -> bool {
        self.pairs.iter().all(|&c| c == 0)
    }
}

/// Canonical representative of `v` modulo the rank-one lattice spanned by `r`.
///
/// `r` is first normalized to have a positive leading entry; the coefficient of
/// `v` at that pivot is then reduced into `[0, r[pivot])`.
pub fn reduce_mod_relation(v: &[i64], r: &[i64]) -> Vec<i64> {
    let Some(pivot) = r.iter().position(|&c| c != 0) else {
        return v.to_vec();
    };
    let sign = r[pivot].signum();
    let rp = r[pivot] * sign;
    let q = v[pivot].div_euclid(rp);
    v.iter().zip(r).map(|(a, b)| a - q * sign * b).collect()
}

pub fn magnus_degree2(
    rank: usize,
    w: &Word,
    quotient_relation: Option<&[i64]>,
) -> Result<Degree2Class, WordError> {
    let c = NilCoords::of_word(rank, w);
    if c.linear.iter().any(|&x| x != 0) {
        return Err(WordError::NonzeroAbelianization(c.linear));
    }
    let pairs = match quotient_relation {
        Some(r) => {
            if r.len() != pair_count(rank) {
                return Err(WordError::LengthMismatch { expected: pair_count(rank), got: r.len() });
            }
            reduce_mod_relation(&c.quadratic, r)
        }
        None => c.quadratic,
    };
    Ok(Degree2Class { pairs, quotient_relation: quotient_relation.map(<[i64]>::to_vec) })
}
