//! Shared oracles for integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use floiation::orders::{OrderBackend, OrderOracle, UserTable};
use floiation::words::{GeneratorSet, Word};
use num_rational::BigRational;

/// Straight re-implementation of the insertion rules on a plain list of
/// (rank, value) pairs.
pub fn reference(ranks: &[i64], seq: &[usize], identity_rank: i64) -> Vec<(i64, BigRational)> {
    let mut placed: Vec<(i64, BigRational)> = Vec::new();
    let push = |r: i64, placed: &mut Vec<(i64, BigRational)>| {
        if placed.iter().any(|p| p.0 == r) {
            return;
        }
        let below = placed.iter().filter(|p| p.0 < r).map(|p| p.1.clone()).max();
        let above = placed.iter().filter(|p| p.0 > r).map(|p| p.1.clone()).min();
        let v = match (below, above) {
            (None, None) => BigRational::from_integer(0.into()),
            (Some(b), None) => b + BigRational::from_integer(1.into()),
            (None, Some(a)) => a - BigRational::from_integer(1.into()),
            (Some(b), Some(a)) => (b + a) / BigRational::from_integer(2.into()),
        };
        placed.push((r, v));
    };
    if seq.first() != Some(&0) {
        push(identity_rank, &mut placed);
    }
    for &i in seq {
        push(ranks[i], &mut placed);
    }
    placed
}

pub fn is_dyadic(r: &BigRational) -> bool {
    let d = r.denom();
    d.magnitude().count_ones() == 1
}

pub struct Case {
    pub oracle: Arc<OrderOracle>,
    pub words: Vec<Word>,
    pub ranks: Vec<i64>,
    pub seq: Vec<usize>,
}

pub fn case(ranks: Vec<i64>, seq: Vec<usize>) -> Case {
    let g = GeneratorSet::new(["a"]).unwrap();
    let a = g.parse("a").unwrap();
    // Word k is a^(k - n/2); index 0 is reserved for the identity.
    let n = ranks.len() as i64;
    let mut words: Vec<Word> = vec![Word::identity()];
    for k in 1..n {
        let e = if k % 2 == 1 { (k + 1) / 2 } else { -(k / 2) };
        words.push(a.pow(e));
    }
    let table = UserTable::new(words.iter().cloned().zip(ranks.iter().copied())).unwrap();
    let oracle = Arc::new(OrderOracle::new(g, OrderBackend::UserTable(table)).unwrap());
    Case { oracle, words, ranks, seq }
}

