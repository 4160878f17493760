use floiation::complex::{bundled, Complex, Direction, Triangulation3};
use floiation::floation3::*;
use floiation::orders::{OrderOracle, OrderSpec};
use floiation::words::abelianize;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cube() -> Triangulation3 {
    let Complex::Solid(t) = bundled("T3CUBE").unwrap() else { panic!() };
    t
}

fn zn(field: &str, functionals: &str) -> OrderOracle {
    OrderSpec::from_json(&format!(r#"{{"backend":"zn","field":"{field}","functionals":{functionals}}}"#), 128).unwrap()
}

fn lex() -> OrderOracle {
    zn("Q", "[[0,0,1],[0,1,0],[1,0,0]]")
}

/// Brute-force search for a directed 3-cycle among a tetrahedron's corners.
fn has_three_cycle(t: &Triangulation3, d: &Direction, tet: usize) -> bool {
    let up = |u: usize, v: usize| {
        let (c, s) = t.oriented_sign(tet, u, v);
        s * d.0[c] > 0
    };
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                if a != b && b != c && a != c && up(a, b) && up(b, c) && up(c, a) {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn positive_functional_makes_every_edge_positive() {
    let t = cube();
    let d = order_induced_direction(&t, &zn("lambda6", "[[1,[0,1],[0,0,1]]]")).unwrap();
    assert!(d.0.iter().all(|&s| s == 1));
}

#[test]
fn unit_edge_is_rejected() {
    let t = cube();
    // x is in the kernel of the only functional.
    assert!(order_induced_direction(&t, &zn("Q", "[[0,1,1]]")).is_err());
}

#[test]
fn tet_validity_matches_cycle_search() {
    let t = cube();
    for mask in 0..128u64 {
        let d = Direction::from_mask(7, mask);
        for s in validate_direction(&t, &d).unwrap() {
            assert_eq!(s.total, !has_three_cycle(&t, &d, s.tet), "mask {mask} tet {}", s.tet);
            if let Some(r) = s.ranks {
                let mut sorted = r;
                sorted.sort_unstable();
                assert_eq!(sorted, [0, 1, 2, 3]);
            }
        }
    }
    assert!(validate_direction(&t, &Direction(vec![1; 6])).is_err());
    assert!(parse_direction("1,-1,2,1,1,1,1", 7).is_err());
    assert_eq!(parse_direction("+ - + + + + +", 7).unwrap().0, vec![1, -1, 1, 1, 1, 1, 1]);
}

#[test]
fn some_direction_has_a_cyclic_tet() {
    let t = cube();
    let found = (0..128u64).any(|m| {
        let d = Direction::from_mask(7, m);
        validate_direction(&t, &d).unwrap().iter().any(|s| !s.total && has_three_cycle(&t, &d, s.tet))
    });
    assert!(found);
}

#[test]
fn lex_direction_is_regular() {
    let t = cube();
    let d = order_induced_direction(&t, &lex()).unwrap();
    assert!(validate_direction(&t, &d).unwrap().iter().all(|s| s.total));
    let r = decide_regularity(&t, &d).unwrap();
    assert!(r.o_nonempty && r.i_nonempty && r.recurrence);
    assert_eq!((r.blue, r.black, r.red_arcs, r.red_components), (24, 12, 12, 1));
    assert_eq!(r.complement_components, 2);
    assert!(r.is_local_orientation && r.is_regular && r.abelian_feasible);
    assert_eq!(r.realizability, "unknown");

    // A generic functional close to the lex order induces the same direction.
    let near = order_induced_direction(&t, &zn("Q", r#"[["1/10000","1/100",1]]"#)).unwrap();
    assert_eq!(near, d);
}

#[test]
fn corners_and_red_arcs_sit_where_expected() {
    let t = cube();
    let link = t.link();
    for mask in 0..128u64 {
        let d = Direction::from_mask(7, mask);
        let tets = validate_direction(&t, &d).unwrap();
        if !tets.iter().all(|s| s.total) {
            continue;
        }
        let out = outgoing_germs(link, &d);
        let (col, red) = colour_and_trace_red(&t, &d).unwrap();
        assert_eq!((col.blue_count, col.black_count, red.arcs.len()), (24, 12, 12));
        for s in &tets {
            let ranks = s.ranks.unwrap();
            for v in 0..4 {
                let lt = 4 * s.tet + v;
                let germs: Vec<bool> = (0..4).filter(|&w| w != v).map(|w| out[link.triangles[lt][w]]).collect();
                match ranks[v] {
                    0 => assert!(germs.iter().all(|&g| g)),
                    3 => assert!(germs.iter().all(|&g| !g)),
                    _ => assert!(red.arcs.iter().any(|a| a.0 == lt)),
                }
                let arcs_here = red.arcs.iter().filter(|a| a.0 == lt).count();
                assert_eq!(arcs_here, usize::from(ranks[v] == 1 || ranks[v] == 2));
            }
        }
    }
}

#[test]
fn outgoing_only_marking_fails() {
    let t = cube();
    let link = t.link();
    let all_out = vec![true; link.vertex_ends.len()];
    let g = germ_conditions(link, &all_out);
    assert_eq!((g.o_components, g.i_components), (1, 0));
    assert!(!g.holds());
}

#[test]
fn exhaustive_enumeration_agrees() {
    let t = cube();
    let s = enumerate_directions(&t, false).unwrap();
    assert_eq!((s.candidates, s.reports.len()), (128, 128));
    assert_eq!(s.regularity_mismatches, 0);
    assert_eq!(s.colour_count_failures, 0);
    assert_eq!(s.link_euler_characteristic, 2);
    assert_eq!(s.valid, s.reports.iter().filter(|r| r.all_tets_total).count());
    for r in s.reports.iter().filter(|r| r.all_tets_total) {
        assert_eq!((r.blue, r.black), (24, 12));
        assert_eq!(r.is_regular, r.is_local_orientation);
    }
    let filtered = enumerate_directions(&t, true).unwrap();
    assert_eq!(filtered.reports.len(), s.valid);
}

#[test]
fn fourier_motzkin_small_systems() {
    use floiation::algebraic::rat;
    let row = |a: &[i64], b: i64| (a.iter().map(|&x| rat(x)).collect::<Vec<_>>(), rat(b));
    // x >= 1 and -x >= 1
    assert!(!fourier_motzkin_feasible(vec![row(&[1], 1), row(&[-1], 1)], 1));
    // x - y >= 1, y >= 1
    assert!(fourier_motzkin_feasible(vec![row(&[1, -1], 1), row(&[0, 1], 1)], 2));
    // x >= 1, y >= 1, -x - y >= 1
    assert!(!fourier_motzkin_feasible(vec![row(&[1, 0], 1), row(&[0, 1], 1), row(&[-1, -1], 1)], 2));
    // Single unknown: both signs of one edge are feasible.
    assert!(fourier_motzkin_feasible(vec![row(&[1], 1)], 1));
    assert!(fourier_motzkin_feasible(vec![row(&[-1], 1)], 1));
}

#[test]
fn signed_lex_orders_on_the_cube() {
    let t = cube();
    let orders: Vec<(String, OrderOracle)> = signed_lex_orders(3)
        .into_iter()
        .map(|(label, rows)| (label, zn("Q", &serde_json::to_string(&rows).unwrap())))
        .collect();
    assert_eq!(orders.len(), 48);
    let e = bi_invariant_experiment(&t, &orders).unwrap();
    assert_eq!(e.orders.len(), 48);
    assert!(e.distinct_directions <= 48);
    // Every bi-invariant lex order on Z^3 yields a local orientation here.
    assert!(e.subset_of_local_orientations);
}

#[test]
fn directed_loops_have_nonzero_abelianization() {
    let t = cube();
    let d = order_induced_direction(&t, &lex()).unwrap();
    let pres = t.presentation();
    let vecs: Vec<Vec<i64>> = pres
        .edge_words
        .iter()
        .zip(&d.0)
        .map(|(w, &s)| abelianize(3, w).0.iter().map(|&x| x * i64::from(s)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let coeffs: Vec<i64> = (0..vecs.len()).map(|_| rng.gen_range(0..4)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let sum: Vec<i64> = (0..3).map(|k| vecs.iter().zip(&coeffs).map(|(v, c)| v[k] * c).sum()).collect();
        assert_ne!(sum, vec![0, 0, 0]);
    }
}
