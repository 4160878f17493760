//! Minimal dyadic embeddings of ordered groups, their piecewise-linear
//! extensions to actions on the line, and collapse maps between embeddings.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebraic::format_rational;
use crate::orders::{Comparison, OrderError, OrderKey, OrderOracle};
use crate::words::{Letter, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("products missing from the table: {0:?}")]
    InsufficientSupport(Vec<String>),
    #[error("tables disagree on word `{0}`")]
    TableMismatch(String),
    #[error("values are not strictly order-preserving at `{0}` and `{1}`")]
    NotOrderPreserving(String, String),
    #[error("blow-up point {0} coincides with an embedded value")]
    BlowUpOnValue(String),
    #[error("blow-up width must be positive")]
    NonPositiveWidth,
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// A dyadic rational `num / 2^exp`, kept in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn from_int(i: i64) -> Self {
        Dyadic { num: BigInt::from(i), exp: 0 }
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        while self.exp > 0 && self.num.is_even() {
            self.num >>= 1;
            self.exp -= 1;
        }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    fn aligned(&self, other: &Dyadic) -> (BigInt, BigInt, u32) {
        let e = self.exp.max(other.exp);
        (&self.num << (e - self.exp), &other.num << (e - other.exp), e)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a - b, e)
    }

    pub fn midpoint(&self, other: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(other);
        Dyadic::new(a + b, e + 1)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    /// Exact conversion of a rational whose denominator is a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Dyadic> {
        let d = r.denom();
        let bits = d.bits();
        if bits == 0 || *d != (BigInt::one() << (bits - 1)) {
            return None;
        }
        Some(Dyadic::new(r.numer().clone(), (bits - 1) as u32))
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64().unwrap_or(f64::NAN) / 2f64.powi(self.exp as i32)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Increasing continuous piecewise-affine map of the line, slope 1 outside
/// its knots.
#[derive(Clone, Debug, PartialEq)]
pub struct PLMap {
    knots: Vec<(BigRational, BigRational)>,
}

impl PLMap {
    pub fn identity() -> Self {
        PLMap { knots: Vec::new() }
    }

    /// Builds the map through the given points; both coordinates must be
    /// strictly increasing after sorting by the first.
    pub fn from_points(mut pts: Vec<(BigRational, BigRational)>) -> Option<Self> {
        pts.sort_by(|a, b| a.0.cmp(&b.0));
        pts.dedup();
        for w in pts.windows(2) {
            if w[0].0 >= w[1].0 || w[0].1 >= w[1].1 {
                return None;
            }
        }
        Some(PLMap { knots: pts })
    }

    pub fn knots(&self) -> &[(BigRational, BigRational)] {
        &self.knots
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        eval_knots(&self.knots, x)
    }

    pub fn eval_inverse(&self, y: &BigRational) -> BigRational {
        let k = &self.knots;
        if k.is_empty() {
            return y.clone();
        }
        let i = k.partition_point(|(_, b)| b <= y);
        if i == 0 {
            return y + &k[0].0 - &k[0].1;
        }
        if i == k.len() {
            let (a, b) = &k[k.len() - 1];
            return y + a - b;
        }
        let ((x0, y0), (x1, y1)) = (&k[i - 1], &k[i]);
        if y == y0 {
            return x0.clone();
        }
        x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let k = &self.knots;
        if k.is_empty() {
            return x;
        }
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        let i = k.partition_point(|(a, _)| f(a) <= x);
        if i == 0 {
            return x + f(&k[0].1) - f(&k[0].0);
        }
        if i == k.len() {
            let (a, b) = &k[k.len() - 1];
            return x + f(b) - f(a);
        }
        let ((x0, y0), (x1, y1)) = (&k[i - 1], &k[i]);
        let t = (x - f(x0)) / (f(x1) - f(x0));
        f(y0) + t * (f(y1) - f(y0))
    }

    pub fn inverse(&self) -> PLMap {
        PLMap { knots: self.knots.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PLMap) -> PLMap {
        let inv = other.inverse();
        let mut xs: Vec<BigRational> = other.knots.iter().map(|(a, _)| a.clone()).collect();
        xs.extend(self.knots.iter().map(|(a, _)| inv.eval(a)));
        xs.sort();
        xs.dedup();
        let knots = xs.into_iter().map(|x| {
            let y = self.eval(&other.eval(&x));
            (x, y)
        });
        PLMap { knots: simplify(knots.collect()) }
    }
}

fn eval_knots(k: &[(BigRational, BigRational)], x: &BigRational) -> BigRational {
    if k.is_empty() {
        return x.clone();
    }
    let i = k.partition_point(|(a, _)| a <= x);
    if i == 0 {
        return x + &k[0].1 - &k[0].0;
    }
    if i == k.len() {
        let (a, b) = &k[k.len() - 1];
        return x + b - a;
    }
    let ((x0, y0), (x1, y1)) = (&k[i - 1], &k[i]);
    if x == x0 {
        return y0.clone();
    }
    y0 + (x - x0) * (y1 - y0) / (x1 - x0)
}

/// Drops knots where the map is affine across the knot.
fn simplify(k: Vec<(BigRational, BigRational)>) -> Vec<(BigRational, BigRational)> {
    let one = BigRational::one();
    let slope = |a: &(BigRational, BigRational), b: &(BigRational, BigRational)| (&b.1 - &a.1) / (&b.0 - &a.0);
    let mut out: Vec<(BigRational, BigRational)> = Vec::with_capacity(k.len());
    for i in 0..k.len() {
        let left = if i == 0 { one.clone() } else { slope(&k[i - 1], &k[i]) };
        let right = if i + 1 == k.len() { one.clone() } else { slope(&k[i], &k[i + 1]) };
        if left != right {
            out.push(k[i].clone());
        }
    }
    if out.is_empty() && !k.is_empty() && k[0].0 != k[0].1 {
        out.push(k[0].clone());
    }
    out
}

/// Monotone non-decreasing continuous surjection of the line, slope 1 outside
/// its knots.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseMap {
    knots: Vec<(BigRational, BigRational)>,
}

impl CollapseMap {
    pub fn knots(&self) -> &[(BigRational, BigRational)] {
        &self.knots
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        eval_knots(&self.knots, x)
    }

    /// Maximal intervals mapped to a single point.
    pub fn collapsed_intervals(&self) -> Vec<(BigRational, BigRational)> {
        let mut out: Vec<(BigRational, BigRational)> = Vec::new();
        for w in self.knots.windows(2) {
            if w[0].1 == w[1].1 {
                match out.last_mut() {
                    Some(last) if last.1 == w[0].0 => last.1 = w[1].0.clone(),
                    _ => out.push((w[0].0.clone(), w[1].0.clone())),
                }
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.knots.iter().all(|(a, b)| a == b)
    }
}

/// Finite order-preserving map from words to dyadic rationals.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    oracle: Arc<OrderOracle>,
    entries: Vec<(Word, Dyadic)>,
    insertion_order: Vec<Word>,
    sorted: Vec<usize>,
    by_word: HashMap<Word, usize>,
    by_key: HashMap<OrderKey, usize>,
    gaps: Vec<(BigRational, BigRational)>,
}

impl EmbeddingTable {
    fn empty(oracle: Arc<OrderOracle>) -> Self {
        EmbeddingTable {
            oracle,
            entries: Vec::new(),
            insertion_order: Vec::new(),
            sorted: Vec::new(),
            by_word: HashMap::new(),
            by_key: HashMap::new(),
            gaps: Vec::new(),
        }
    }

    pub fn oracle(&self) -> &Arc<OrderOracle> {
        &self.oracle
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Representative words with their values, in insertion order.
    pub fn entries(&self) -> &[(Word, Dyadic)] {
        &self.entries
    }

    /// Every word presented during construction, duplicates included.
    pub fn insertion_order(&self) -> &[Word] {
        &self.insertion_order
    }

    /// Strips inserted by `blow_up`, in this table's coordinates.
    pub fn gaps(&self) -> &[(BigRational, BigRational)] {
        &self.gaps
    }

    /// Entry indices sorted by value.
    pub fn sorted_indices(&self) -> &[usize] {
        &self.sorted
    }

    pub fn min_value(&self) -> Option<&Dyadic> {
        self.sorted.first().map(|&i| &self.entries[i].1)
    }

    pub fn max_value(&self) -> Option<&Dyadic> {
        self.sorted.last().map(|&i| &self.entries[i].1)
    }

    /// Position in `sorted` where `w` belongs, or the index of an equivalent
    /// entry.
    fn locate(&self, w: &Word) -> Result<Result<usize, usize>, OrderError> {
        if let Some(&i) = self.by_word.get(w) {
            return Ok(Err(i));
        }
        if let Some(k) = self.oracle.key(w) {
            if let Some(&i) = self.by_key.get(&k) {
                return Ok(Err(i));
            }
            if self.oracle.key_is_complete() {
                return self.bisect(w, false).map(Ok);
            }
        }
        match self.bisect(w, true)? {
            pos if pos < self.sorted.len() => {
                let i = self.sorted[pos];
                if self.oracle.compare(w, &self.entries[i].0)? == Comparison::Equivalent {
                    Ok(Err(i))
                } else {
                    Ok(Ok(pos))
                }
            }
            pos => Ok(Ok(pos)),
        }
    }

    /// First sorted position whose entry is not below `w` (or strictly above
    /// it when `inclusive` is false).
    fn bisect(&self, w: &Word, inclusive: bool) -> Result<usize, OrderError> {
        let (mut lo, mut hi) = (0, self.sorted.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            let c = self.oracle.compare(&self.entries[self.sorted[mid]].0, w)?;
            let below = match c {
                Comparison::Less => true,
                Comparison::Equivalent => !inclusive,
                Comparison::Greater => false,
            };
            if below {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Entry index of an element equivalent to `w`, if embedded.
    pub fn index_of(&self, w: &Word) -> Result<Option<usize>, OrderError> {
        Ok(self.locate(w)?.err())
    }

    pub fn value(&self, w: &Word) -> Result<Option<Dyadic>, OrderError> {
        Ok(self.index_of(w)?.map(|i| self.entries[i].1.clone()))
    }

    fn insert_at(&mut self, pos: usize, w: Word, v: Dyadic) {
        let idx = self.entries.len();
        if let Some(k) = self.oracle.key(&w) {
            self.by_key.insert(k, idx);
        }
        self.by_word.insert(w.clone(), idx);
        self.entries.push((w, v));
        self.sorted.insert(pos, idx);
    }

    /// Table with explicitly chosen values; checks strict order preservation.
    pub fn from_values(oracle: Arc<OrderOracle>, values: Vec<(Word, Dyadic)>) -> Result<Self, EmbedError> {
        let mut t = EmbeddingTable::empty(oracle);
        for (w, v) in values {
            t.insertion_order.push(w.clone());
            match t.locate(&w)? {
                Err(i) => return Err(EmbedError::NotOrderPreserving(w.to_string(), t.entries[i].0.to_string())),
                Ok(pos) => {
                    let prev = pos.checked_sub(1).map(|p| &t.entries[t.sorted[p]]);
                    let next = t.sorted.get(pos).map(|&i| &t.entries[i]);
                    for (n, ok) in [(prev, prev.is_none_or(|p| p.1 < v)), (next, next.is_none_or(|p| v < p.1))] {
                        if !ok {
                            return Err(EmbedError::NotOrderPreserving(w.to_string(), n.unwrap().0.to_string()));
                        }
                    }
                    t.insert_at(pos, w, v);
                }
            }
        }
        Ok(t)
    }

    /// Inserts a strip of the given width at `at`: every value above `at` is
    /// shifted up by `width`.
    pub fn blow_up(&self, at: &BigRational, width: &Dyadic) -> Result<EmbeddingTable, EmbedError> {
        if *width <= Dyadic::zero() {
            return Err(EmbedError::NonPositiveWidth);
        }
        if self.entries.iter().any(|(_, v)| v.to_rational() == *at) {
            return Err(EmbedError::BlowUpOnValue(format_rational(at)));
        }
        let w = width.to_rational();
        let shift = |x: &BigRational| if x > at { x + &w } else { x.clone() };
        let mut t = self.clone();
        for (_, v) in t.entries.iter_mut() {
            if v.to_rational() > *at {
                *v = v.add(width);
            }
        }
        t.gaps = self.gaps.iter().map(|(a, b)| (shift(a), shift(b))).collect();
        t.gaps.push((at.clone(), at + &w));
        t.gaps.sort();
        // A strip inserted inside or next to an existing one widens it.
        let mut merged: Vec<(BigRational, BigRational)> = Vec::with_capacity(t.gaps.len());
        for (a, b) in t.gaps.drain(..) {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = std::cmp::max(last.1.clone(), b),
                _ => merged.push((a, b)),
            }
        }
        t.gaps = merged;
        Ok(t)
    }

    pub fn to_json(&self) -> Value {
        let names = self.oracle.generators();
        json!({
            "entries": self.sorted.iter().map(|&i| {
                let (w, v) = &self.entries[i];
                json!({"word": names.format(w), "num": v.num.to_string(), "exp": v.exp})
            }).collect::<Vec<_>>(),
            "gaps": self.gaps.iter().map(|(a, b)| [format_rational(a), format_rational(b)]).collect::<Vec<_>>(),
        })
    }
}

impl OrderOracle {
    /// True when equal keys characterize equivalence and every word has a
    /// key, so key lookups need no comparison fallback.
    pub fn key_is_complete(&self) -> bool {
        self.key(&Word::identity()).is_some() && !matches!(self.backend(), crate::orders::OrderBackend::UserTable(_))
    }
}

/// Builds `i_0` from the enumeration: new maximum gets max+1, new minimum
/// min-1, anything else the midpoint of its embedded neighbours. Equivalent
/// words share the entry of the first representative.
pub fn minimal_embed(o: Arc<OrderOracle>, seq: &[Word]) -> Result<EmbeddingTable, EmbedError> {
    let mut t = EmbeddingTable::empty(o);
    let e = Word::identity();
    if seq.first() != Some(&e) {
        t.insertion_order.push(e.clone());
        t.insert_at(0, e, Dyadic::zero());
    }
    for w in seq {
        t.insertion_order.push(w.clone());
        let pos = match t.locate(w)? {
            Err(_) => continue,
            Ok(pos) => pos,
        };
        let v = if t.is_empty() {
            Dyadic::zero()
        } else if pos == t.sorted.len() {
            t.max_value().unwrap().add(&Dyadic::from_int(1))
        } else if pos == 0 {
            t.min_value().unwrap().sub(&Dyadic::from_int(1))
        } else {
            let a = &t.entries[t.sorted[pos - 1]].1;
            let b = &t.entries[t.sorted[pos]].1;
            a.midpoint(b)
        };
        t.insert_at(pos, w.clone(), v);
    }
    Ok(t)
}

/// Letters in enumeration order: generator index, then positive before
/// inverse.
pub fn letters(rank: usize) -> Vec<Letter> {
    (0..rank).flat_map(|g| [Letter::new(g, 1), Letter::new(g, -1)]).collect()
}

/// Breadth-first enumeration of group elements of word length at most
/// `radius`, one representative per order class when the oracle supplies
/// keys, otherwise one per reduced word.
pub fn enumerate_ball(o: &OrderOracle, radius: usize) -> Vec<Word> {
    let ls = letters(o.rank());
    let mut seen_words: HashSet<Word> = HashSet::new();
    let mut seen_keys: HashSet<OrderKey> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    queue.push_back((Word::identity(), 0usize));
    seen_words.insert(Word::identity());
    if let Some(k) = o.key(&Word::identity()) {
        seen_keys.insert(k);
    }
    while let Some((w, d)) = queue.pop_front() {
        out.push(w.clone());
        if d == radius {
            continue;
        }
        for l in &ls {
            let nw = w.mul(&Word::letter(*l));
            if nw.len() <= w.len() || !seen_words.insert(nw.clone()) {
                continue;
            }
            if let Some(k) = o.key(&nw) {
                if !seen_keys.insert(k) {
                    continue;
                }
            }
            queue.push_back((nw, d + 1));
        }
    }
    out
}

/// The map `i(h) -> i(gh)` on supported `h`, with the products missing from
/// the table.
pub fn extend_action_partial(t: &EmbeddingTable, g: &Word) -> Result<(PLMap, Vec<Word>), EmbedError> {
    let mut pts = Vec::new();
    let mut missing = Vec::new();
    for (h, v) in &t.entries {
        let gh = g.mul(h);
        match t.index_of(&gh)? {
            Some(j) => pts.push((v.to_rational(), t.entries[j].1.to_rational())),
            None => missing.push(gh),
        }
    }
    let map = PLMap::from_points(pts).ok_or_else(|| EmbedError::NotOrderPreserving(g.to_string(), "action".into()))?;
    Ok((map, missing))
}

pub fn extend_action(t: &EmbeddingTable, g: &Word) -> Result<PLMap, EmbedError> {
    let (map, missing) = extend_action_partial(t, g)?;
    if !missing.is_empty() {
        let names = t.oracle.generators();
        return Err(EmbedError::InsufficientSupport(missing.iter().map(|w| names.format(w)).collect()));
    }
    Ok(map)
}

/// The monotone map `f` with `f(j(g)) = i0(g)`, collapsing the strips that
/// `j` carries.
pub fn collapse_between(j: &EmbeddingTable, i0: &EmbeddingTable) -> Result<CollapseMap, EmbedError> {
    if j.len() != i0.len() {
        return Err(EmbedError::TableMismatch(format!("{} vs {} entries", j.len(), i0.len())));
    }
    // Collapse the recorded strips first.
    let mut gap_knots: Vec<(BigRational, BigRational)> = Vec::new();
    let mut removed = BigRational::zero();
    for (a, b) in &j.gaps {
        gap_knots.push((a.clone(), a - &removed));
        removed += b - a;
        gap_knots.push((b.clone(), b - &removed));
    }
    let c = |x: &BigRational| eval_knots(&gap_knots, x);
    let mut pts = Vec::with_capacity(j.len());
    for (w, v) in &j.entries {
        let target = i0.value(w)?.ok_or_else(|| EmbedError::TableMismatch(w.to_string()))?;
        pts.push((v.to_rational(), c(&v.to_rational()), target.to_rational()));
    }
    pts.sort_by(|a, b| a.0.cmp(&b.0));
    for w in pts.windows(2) {
        if w[0].2 >= w[1].2 {
            return Err(EmbedError::TableMismatch("order differs between tables".into()));
        }
    }
    let interp: Vec<(BigRational, BigRational)> = pts.iter().map(|(_, cx, y)| (cx.clone(), y.clone())).collect();
    let mut xs: Vec<BigRational> = pts.iter().map(|p| p.0.clone()).collect();
    for (a, b) in &j.gaps {
        xs.push(a.clone());
        xs.push(b.clone());
    }
    xs.sort();
    xs.dedup();
    let knots = xs
        .into_iter()
        .map(|x| {
            let y = eval_knots(&interp, &c(&x));
            (x, y)
        })
        .collect();
    Ok(CollapseMap { knots: simplify_collapse(knots) })
}

fn simplify_collapse(k: Vec<(BigRational, BigRational)>) -> Vec<(BigRational, BigRational)> {
    if k.iter().all(|(a, b)| a == b) {
        return Vec::new();
    }
    k
}

/// Exact `Dyadic` for a rational that is known to be dyadic.
pub fn dyadic(r: &BigRational) -> Dyadic {
    Dyadic::from_rational(r).expect("dyadic value")
}

pub fn is_dyadic(r: &BigRational) -> bool {
    Dyadic::from_rational(r).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraic::rat;
    use crate::orders::{OrderBackend, UserTable};
    use crate::words::GeneratorSet;

    fn powers_oracle() -> Arc<OrderOracle> {
        let g = GeneratorSet::new(["a"]).unwrap();
        let a = g.parse("a").unwrap();
        let t = UserTable::new((-3..=3).map(|k| (a.pow(k), k))).unwrap();
        Arc::new(OrderOracle::new(g, OrderBackend::UserTable(t)).unwrap())
    }

    fn vals(t: &EmbeddingTable) -> Vec<Dyadic> {
        t.entries().iter().map(|(_, v)| v.clone()).collect()
    }

    #[test]
    fn minimal_embed_examples() {
        let o = powers_oracle();
        let a = o.generators().parse("a").unwrap();
        let t = minimal_embed(o.clone(), &[Word::identity(), a.clone(), a.pow(2), a.pow(-1)]).unwrap();
        assert_eq!(vals(&t), vec![Dyadic::from_int(0), Dyadic::from_int(1), Dyadic::from_int(2), Dyadic::from_int(-1)]);
        let t = minimal_embed(o.clone(), &[Word::identity(), a.pow(2), a.clone()]).unwrap();
        assert_eq!(vals(&t), vec![Dyadic::from_int(0), Dyadic::from_int(1), Dyadic::new(BigInt::from(1), 1)]);
        let t = minimal_embed(o, &[Word::identity()]).unwrap();
        assert_eq!(vals(&t), vec![Dyadic::zero()]);
    }

    #[test]
    fn extend_action_examples() {
        let o = powers_oracle();
        let a = o.generators().parse("a").unwrap();
        let t = minimal_embed(o, &[Word::identity(), a.clone(), a.pow(2), a.pow(-1)]).unwrap();
        let (m, missing) = extend_action_partial(&t, &a).unwrap();
        assert_eq!(missing, vec![a.pow(3)]);
        assert_eq!(m.eval(&rat(0)), rat(1));
        assert_eq!(m.eval(&rat(-1)), rat(0));
        assert_eq!(m.eval(&BigRational::new(1.into(), 2.into())), BigRational::new(3.into(), 2.into()));
        assert!(matches!(extend_action(&t, &a), Err(EmbedError::InsufficientSupport(_))));
        assert_eq!(extend_action(&t, &Word::identity()).unwrap().knots().len(), 4);
    }

    #[test]
    fn plmap_compose_and_inverse() {
        let f = PLMap::from_points(vec![(rat(0), rat(1)), (rat(1), rat(3))]).unwrap();
        let id = f.compose(&f.inverse());
        for x in -3..5 {
            assert_eq!(id.eval(&rat(x)), rat(x));
        }
        assert!(id.knots().is_empty());
        assert!(PLMap::from_points(vec![(rat(0), rat(1)), (rat(1), rat(0))]).is_none());
    }

    #[test]
    fn collapse_examples() {
        let o = powers_oracle();
        let a = o.generators().parse("a").unwrap();
        let seq = [Word::identity(), a.clone(), a.pow(2)];
        let i0 = minimal_embed(o.clone(), &seq).unwrap();
        let j = EmbeddingTable::from_values(
            o.clone(),
            vec![(Word::identity(), Dyadic::from_int(0)), (a.clone(), Dyadic::from_int(10)), (a.pow(2), Dyadic::from_int(11))],
        )
        .unwrap();
        let f = collapse_between(&j, &i0).unwrap();
        assert_eq!(f.eval(&rat(0)), rat(0));
        assert_eq!(f.eval(&rat(10)), rat(1));
        assert_eq!(f.eval(&rat(11)), rat(2));
        assert!(collapse_between(&i0, &i0).unwrap().is_identity());
        let half = BigRational::new(1.into(), 2.into());
        let b = i0.blow_up(&half, &Dyadic::from_int(3)).unwrap();
        let f = collapse_between(&b, &i0).unwrap();
        assert_eq!(f.collapsed_intervals(), vec![(half.clone(), &half + rat(3))]);
        assert_eq!(f.eval(&rat(4)), rat(1));
    }

    #[test]
    fn dyadic_arithmetic() {
        let x = Dyadic::new(BigInt::from(6), 3);
        assert_eq!(x, Dyadic::new(BigInt::from(3), 2));
        assert_eq!(x.midpoint(&Dyadic::from_int(1)).to_rational(), BigRational::new(7.into(), 8.into()));
        assert_eq!(Dyadic::from_rational(&BigRational::new(3.into(), 8.into())), Some(Dyadic::new(3.into(), 3)));
        assert_eq!(Dyadic::from_rational(&BigRational::new(1.into(), 3.into())), None);
    }
}
