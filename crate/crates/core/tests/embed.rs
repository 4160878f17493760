mod common;

use common::{case, is_dyadic, reference};
use floiation::embed::{collapse_between, minimal_embed, Dyadic, EmbeddingTable};
use floiation::words::Word;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn strategy() -> impl Strategy<Value = (Vec<i64>, Vec<usize>)> {
    (2usize..12).prop_flat_map(|n| (prop::collection::vec(-6i64..6, n), prop::collection::vec(0..n, 1..24)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn minimal_embedding_laws((ranks, seq) in strategy()) {
        let c = case(ranks, seq);
        let seq: Vec<Word> = c.seq.iter().map(|&i| c.words[i].clone()).collect();
        let t = minimal_embed(c.oracle.clone(), &seq).unwrap();
        let again = minimal_embed(c.oracle.clone(), &seq).unwrap();
        prop_assert_eq!(t.entries(), again.entries());

        let expect = reference(&c.ranks, &c.seq, c.ranks[0]);
        prop_assert_eq!(t.len(), expect.len());
        for (r, v) in &expect {
            let i = c.ranks.iter().position(|x| x == r).unwrap();
            let got = t.value(&c.words[i]).unwrap().unwrap().to_rational();
            prop_assert!(is_dyadic(&got));
            prop_assert_eq!(&got, v);
        }
        for (w1, v1) in t.entries() {
            for (w2, v2) in t.entries() {
                let (r1, r2) = (c.oracle.key(w1), c.oracle.key(w2));
                prop_assert_eq!(r1 < r2, v1 < v2);
            }
        }
    }

    #[test]
    fn blow_ups_collapse_back((ranks, seq) in strategy(), cuts in prop::collection::vec((0u32..64, 1i64..4), 1..4)) {
        let c = case(ranks, seq);
        let seq: Vec<Word> = c.seq.iter().map(|&i| c.words[i].clone()).collect();
        let i0 = minimal_embed(c.oracle.clone(), &seq).unwrap();
        let mut j: EmbeddingTable = i0.clone();
        for (k, w) in cuts {
            // Odd multiples of 1/128 never coincide with coarser dyadic values.
            let at = BigRational::new(BigInt::from(2 * k as i64 - 63), BigInt::from(128));
            if j.entries().iter().any(|(_, v)| v.to_rational() == at) {
                continue;
            }
            j = j.blow_up(&at, &Dyadic::from_int(w)).unwrap();
        }
        let f = collapse_between(&j, &i0).unwrap();
        for (w, v) in j.entries() {
            prop_assert_eq!(f.eval(&v.to_rational()), i0.value(w).unwrap().unwrap().to_rational());
        }
    }
}
