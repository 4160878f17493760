use std::sync::Arc;

use floiation::algebraic::rat2;
use floiation::complex::{bundled, Complex, Triangulation2};
use floiation::embed::{enumerate_ball, minimal_embed};
use floiation::floation2::{
    build_ball, detect_closed_leaf, holonomy_check, holonomy_support, ClosedLeafCaps, ClosedLeafOutcome, Label,
    LevelSource, SurfaceLift, TableSource, TraceStatus, Tracer,
};
use floiation::orders::{OrderOracle, OrderSpec};
use num_rational::BigRational;

fn surface(name: &str) -> Triangulation2 {
    match bundled(name).unwrap() {
        Complex::Surface(t) => t,
        _ => unreachable!(),
    }
}

fn torus_order(f: &str) -> Arc<OrderOracle> {
    let text = format!(r#"{{"backend":"zn","generators":["a","b"],"field":"sqrt2","functionals":{f}}}"#);
    Arc::new(OrderSpec::from_json(&text, 128).unwrap())
}

fn oct8_order() -> Arc<OrderOracle> {
    Arc::new(
        OrderSpec::from_json(
            r#"{"backend":"surface_lex","generators":["a","b","c","d"],"field":"lambda6",
                "h1":[1,[0,1],[0,0,1],[0,0,0,1]],
                "depth2":[1,[0,1],[0,0,1],[0,0,0,1],[0,0,0,0,1],-1],"relator":[1,0,0,0,0,1]}"#,
            128,
        )
        .unwrap(),
    )
}

#[test]
fn neighbor_is_an_involution() {
    for name in ["TOR2", "OCT8"] {
        let t = surface(name);
        let lift = SurfaceLift::with_flips(&t, vec![1; t.num_edges()]);
        let h = Label::of_word(lift.rank(), &t.presentation().generators.parse("a b^-1").unwrap());
        for tri in 0..t.num_triangles() {
            for k in 0..3 {
                let (t2, h2, k2) = lift.neighbor(tri, &h, k);
                let (t3, h3, k3) = lift.neighbor(t2, &h2, k2);
                assert_eq!((t3, k3), (tri, k));
                assert_eq!(lift.key(&h3), lift.key(&h));
                // The shared side has the same endpoints.
                let a = lift.side_edge(tri, &lift.corners(tri, &h), k);
                let b = lift.side_edge(t2, &lift.corners(t2, &h2), k2);
                assert_eq!(a.0, b.0);
                assert_eq!(lift.key(&a.1), lift.key(&b.1));
                assert_eq!(lift.key(&a.2), lift.key(&b.2));
            }
        }
    }
}

#[test]
fn torus_ball_values_follow_the_embedding() {
    let t = surface("TOR2");
    let o = torus_order("[[1,[0,1]]]");
    let table = Arc::new(minimal_embed(o.clone(), &enumerate_ball(&o, 3)).unwrap());
    let lift = SurfaceLift::new(&t, &o).unwrap();
    let src = TableSource::new(table.clone());
    let ball = build_ball(&lift, &src, 1).unwrap();
    assert!(!ball.is_empty());
    for tr in &ball.triangles {
        for (c, v) in tr.corners.iter().zip(&tr.values) {
            assert_eq!(*v, table.value(&c.word).unwrap().unwrap().to_rational());
        }
    }
    assert!(ball.degenerate_triangles(|a, b| a.cmp(b)).is_empty());
}

#[test]
fn irrational_torus_leaf_stays_open() {
    let t = surface("TOR2");
    let o = torus_order("[[1,[0,1]]]");
    let table = Arc::new(minimal_embed(o.clone(), &enumerate_ball(&o, 10)).unwrap());
    let lift = SurfaceLift::new(&t, &o).unwrap();
    let src = TableSource::new(table);
    let tracer = Tracer::new(&lift, &src);
    let h = Label::identity(2);
    let y = tracer.level_in(0, &h, &rat2(1, 7)).unwrap();
    let tr = tracer.trace(0, &h, &y, 40).unwrap();
    assert_ne!(tr.forward_status, TraceStatus::ClosedCandidate);
    assert!(tr.num_crossings() > 0);
    match detect_closed_leaf(&t, o, ClosedLeafCaps { radius: 10, max_crossings: 200 }).unwrap() {
        ClosedLeafOutcome::NoneFound { .. } => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn rational_torus_closed_leaves() {
    let t = surface("TOR2");
    for (f, class) in [("[[0,1],[1,0]]", vec![1, 0]), ("[[1,1],[1,0]]", vec![1, -1])] {
        let o = torus_order(f);
        match detect_closed_leaf(&t, o, ClosedLeafCaps::default()).unwrap() {
            ClosedLeafOutcome::Certificate(c) => {
                assert!(c.kernel_check);
                assert_eq!(c.period_class, class, "functionals {f}");
            }
            other => panic!("no certificate for {f}: {other:?}"),
        }
    }
}

fn holonomy_tracer_table(t: &Triangulation2, o: Arc<OrderOracle>, radius: usize) -> (SurfaceLift, TableSource) {
    let lift = SurfaceLift::new(t, &o).unwrap();
    let mut seq = enumerate_ball(&o, radius);
    seq.extend(holonomy_support(&lift));
    let table = Arc::new(minimal_embed(o, &seq).unwrap());
    (lift, TableSource::new(table))
}

#[test]
fn holonomy_matches_on_torus_and_genus_two() {
    for (name, o, r) in [("TOR2", torus_order("[[1,[0,1]]]"), 3), ("OCT8", oct8_order(), 2)] {
        let t = surface(name);
        let (lift, src) = holonomy_tracer_table(&t, o, r);
        let tracer = Tracer::new(&lift, &src);
        for tri in 0..t.num_triangles() {
            let rep = holonomy_check(&tracer, tri).unwrap();
            assert!(rep.passed(), "{name} triangle {tri}: {:?}", rep.failures);
            assert_eq!(rep.levels, 100);
        }
    }
}

#[test]
fn holonomy_detects_a_corrupted_vertex() {
    let t = surface("TOR2");
    let o = torus_order("[[1,[0,1]]]");
    let (lift, src) = holonomy_tracer_table(&t, o, 3);
    let id = Label::identity(2);
    let c = lift.corners(0, &id);
    // Move the middle corner of the max-at-base lift.
    let mut vals: Vec<(usize, BigRational)> =
        c.iter().enumerate().map(|(k, l)| (k, src.vertex(l).unwrap().unwrap())).collect();
    vals.sort_by(|a, b| a.1.cmp(&b.1));
    let h = c[vals[2].0].inverse();
    let mid = lift.corners(0, &h)[vals[1].0].word.clone();
    let old = src.value(&mid).unwrap().unwrap();
    let src = src.with_vertex_override(&mid, old * rat2(1, 2)).unwrap();
    let tracer = Tracer::new(&lift, &src);
    let rep = holonomy_check(&tracer, 0).unwrap();
    assert!(!rep.passed());
}
