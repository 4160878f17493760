//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every tolerance and size is pinned below.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use floiation::algebraic::rat2;
use floiation::complex::{bundled, Complex, Triangulation2, Triangulation3};
use floiation::embed::{collapse_between, enumerate_ball, minimal_embed, Dyadic};
use floiation::floation2::{
    detect_closed_leaf, holonomy_check, holonomy_support, ClosedLeafCaps, ClosedLeafOutcome, Floation2Error,
    FunctionalSource, Label, LevelSource, SurfaceLift, TableSource, Tracer, HOLONOMY_LEVELS,
};
use floiation::floation3::{
    bi_invariant_experiment, decide_regularity, enumerate_directions, order_induced_direction, signed_lex_orders,
};
use floiation::hyperbolic::HyperbolicModel;
use floiation::orders::{is_archimedean, OrderBackend, OrderOracle, OrderSpec};
use floiation::straighten::{
    compare_laminations, perturb_and_compare, sample_starts, straighten_lamination, trace_samples, Developer,
    GeodesicLamination,
};
use floiation::words::{abelianize, Word};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TORUS_RUNTIME: Duration = Duration::from_secs(10);
const TORUS_CORPUS_MIN: usize = 12;
const EMBED_CASES: usize = 10_000;
const MIN_TRACES: usize = 1000;
const TRACE_CAP: usize = 200;
const EPS: f64 = 1e-3;
const SAMPLES: usize = 50;
const SEED: u64 = 7;
const CAP: usize = 200;
const STRAIGHTEN_RUNTIME: Duration = Duration::from_secs(60);
const BLOWUP_TOLERANCE: f64 = 2.0 * EPS;
const CONTINUITY_NOISE: f64 = 2.0 * EPS;
const CUBE_TETS: usize = 6;

const DEPTH2_A: &str = "[1,[0,1],[0,0,1],[0,0,0,1],[0,0,0,0,1],-1]";
const DEPTH2_B: &str = "[-1,[0,-1],[0,0,-1],[0,0,0,-1],[0,0,0,0,-1],1]";

struct Outcome {
    pass: bool,
    detail: String,
}

fn surface(name: &str) -> Triangulation2 {
    match bundled(name).unwrap() {
        Complex::Surface(t) => t,
        _ => unreachable!(),
    }
}

fn cube() -> Triangulation3 {
    match bundled("T3CUBE").unwrap() {
        Complex::Solid(t) => t,
        _ => unreachable!(),
    }
}

fn order(text: &str) -> Arc<OrderOracle> {
    Arc::new(OrderSpec::from_json(text, 128).unwrap())
}

fn torus_zn(field: &str, functionals: &str) -> Arc<OrderOracle> {
    order(&format!(r#"{{"backend":"zn","generators":["a","b"],"field":"{field}","functionals":{functionals}}}"#))
}

fn oct8_lex(depth2: &str) -> Arc<OrderOracle> {
    order(&format!(
        r#"{{"backend":"surface_lex","generators":["a","b","c","d"],"field":"lambda6",
            "h1":[1,[0,1],[0,0,1],[0,0,0,1]],"depth2":{depth2},"relator":[1,0,0,0,0,1]}}"#
    ))
}

/// Primitive kernel vector of an integer functional `(p, q)` on `Z^2`,
/// signed positive for the refinement `(r, s)`.
fn expected_kernel(p: i64, q: i64, r: i64, s: i64) -> Vec<i64> {
    let g = p.gcd(&q);
    let (x, y) = (q / g, -p / g);
    if r * x + s * y > 0 {
        vec![x, y]
    } else {
        vec![-x, -y]
    }
}

fn criterion_1() -> Outcome {
    let t = surface("TOR2");
    // (field, chain, Archimedean by construction, expected kernel class)
    let mut corpus: Vec<(&str, String, bool, Option<Vec<i64>>)> = vec![
        ("sqrt2", "[[1,[0,1]]]".into(), true, None),
        ("sqrt2", "[[[0,1],-1]]".into(), true, None),
        ("sqrt2", "[[1,[0,-1]]]".into(), true, None),
        ("sqrt2", "[[-1,[0,1]]]".into(), true, None),
        ("lambda6", "[[1,[0,1]]]".into(), true, None),
        ("lambda6", "[[[0,1],-1]]".into(), true, None),
    ];
    for (p, q) in [(0, 1), (1, 0), (1, 1), (1, -2)] {
        for (r, s) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            // A refinement must be independent of the leading functional.
            if p * s - q * r == 0 || corpus.iter().filter(|c| c.1.starts_with(&format!("[[{p},{q}]"))).count() == 2 {
                continue;
            }
            corpus.push(("Q", format!("[[{p},{q}],[{r},{s}]]"), false, Some(expected_kernel(p, q, r, s))));
        }
    }
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut certificates = 0;
    for (field, chain, archimedean, kernel) in &corpus {
        let o = torus_zn(field, chain);
        let OrderBackend::Zn(c) = o.backend() else { unreachable!() };
        let arch = is_archimedean(c).unwrap();
        let outcome = detect_closed_leaf(&t, o.clone(), ClosedLeafCaps::default()).unwrap();
        let found = match &outcome {
            ClosedLeafOutcome::Certificate(cert) => {
                certificates += 1;
                let w = o.generators().parse(&cert.period_word).unwrap();
                if abelianize(2, &w).0 != cert.period_class {
                    bad.push(format!("{chain}: period word does not match its class"));
                }
                if Some(&cert.period_class) != kernel.as_ref() {
                    bad.push(format!("{chain}: period {:?}, kernel {kernel:?}", cert.period_class));
                }
                true
            }
            ClosedLeafOutcome::NoneFound { .. } => false,
        };
        if arch != *archimedean || found == arch {
            bad.push(format!("{chain}: archimedean {arch}, closed leaf {found}"));
        }
    }
    let took = start.elapsed();
    Outcome {
        pass: bad.is_empty() && corpus.len() >= TORUS_CORPUS_MIN && took < TORUS_RUNTIME,
        detail: format!(
            "{} orders, {certificates} certificates, {:.2} s (limit {} s){}",
            corpus.len(),
            took.as_secs_f64(),
            TORUS_RUNTIME.as_secs(),
            if bad.is_empty() { String::new() } else { format!("; {bad:?}") }
        ),
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for _ in 0..EMBED_CASES {
        let n = rng.gen_range(2..12);
        let ranks: Vec<i64> = (0..n).map(|_| rng.gen_range(-6..6)).collect();
        let seq: Vec<usize> = (0..rng.gen_range(1..24)).map(|_| rng.gen_range(0..n)).collect();
        let c = common::case(ranks, seq);
        let words: Vec<Word> = c.seq.iter().map(|&i| c.words[i].clone()).collect();
        let t = minimal_embed(c.oracle.clone(), &words).unwrap();
        let again = minimal_embed(c.oracle.clone(), &words).unwrap();
        let mut ok = t.entries() == again.entries();
        let expect = common::reference(&c.ranks, &c.seq, c.ranks[0]);
        ok &= t.len() == expect.len();
        for (r, v) in &expect {
            let i = c.ranks.iter().position(|x| x == r).unwrap();
            let got = t.value(&c.words[i]).unwrap().unwrap().to_rational();
            ok &= common::is_dyadic(&got) && &got == v;
        }
        for (w1, v1) in t.entries() {
            for (w2, v2) in t.entries() {
                ok &= (c.oracle.key(w1) < c.oracle.key(w2)) == (v1 < v2);
            }
        }
        // Collapse after up to three blow-ups.
        let mut j = t.clone();
        for _ in 0..rng.gen_range(1..4) {
            let at = BigRational::new(BigInt::from(2 * rng.gen_range(0i64..64) - 63), BigInt::from(128));
            if j.entries().iter().all(|(_, v)| v.to_rational() != at) {
                j = j.blow_up(&at, &Dyadic::from_int(rng.gen_range(1..4))).unwrap();
            }
        }
        let f = collapse_between(&j, &t).unwrap();
        for (w, v) in j.entries() {
            ok &= f.eval(&v.to_rational()) == t.value(w).unwrap().unwrap().to_rational();
        }
        failures += usize::from(!ok);
    }
    Outcome { pass: failures == 0, detail: format!("{EMBED_CASES} random tables, {failures} failures") }
}

struct TraceTally {
    traces: usize,
    walls_twice: usize,
    other_errors: Vec<String>,
}

fn tally<S: LevelSource>(tracer: &Tracer<'_, S>, triangles: usize, n: usize, seed: u64, tally: &mut TraceTally) {
    let id = Label::identity(tracer.lift().rank());
    for s in sample_starts(triangles, n, seed) {
        let u = rat2(s.fraction.0, s.fraction.1);
        let result = tracer.level_in(s.triangle, &id, &u).and_then(|y| tracer.trace(s.triangle, &id, &y, TRACE_CAP));
        match result {
            Ok(_) => tally.traces += 1,
            Err(Floation2Error::WallCrossedTwice { .. }) => {
                tally.traces += 1;
                tally.walls_twice += 1;
            }
            Err(e) => tally.other_errors.push(e.to_string()),
        }
    }
}

fn criterion_3() -> Outcome {
    let mut t = TraceTally { traces: 0, walls_twice: 0, other_errors: Vec::new() };
    let tor = surface("TOR2");
    for (field, chain) in [("sqrt2", "[[1,[0,1]]]"), ("lambda6", "[[[0,1],-1]]"), ("Q", "[[1,-2],[1,0]]")] {
        let o = torus_zn(field, chain);
        let lift = SurfaceLift::new(&tor, &o).unwrap();
        let src = FunctionalSource::from_oracle(&o).unwrap();
        tally(&Tracer::new(&lift, &src), tor.num_triangles(), 200, 31, &mut t);
    }
    let o = torus_zn("sqrt2", "[[1,[0,1]]]");
    let lift = SurfaceLift::new(&tor, &o).unwrap();
    let src = TableSource::new(Arc::new(minimal_embed(o.clone(), &enumerate_ball(&o, 8)).unwrap()));
    tally(&Tracer::new(&lift, &src), tor.num_triangles(), 100, 32, &mut t);
    let oct = surface("OCT8");
    for d2 in [DEPTH2_A, DEPTH2_B] {
        let o = oct8_lex(d2);
        let lift = SurfaceLift::new(&oct, &o).unwrap();
        let src = FunctionalSource::from_oracle(&o).unwrap();
        tally(&Tracer::new(&lift, &src), oct.num_triangles(), 250, 33, &mut t);
    }
    Outcome {
        pass: t.traces >= MIN_TRACES && t.walls_twice == 0 && t.other_errors.is_empty(),
        detail: format!(
            "{} traces on TOR2 and OCT8 (minimum {MIN_TRACES}), {} walls crossed twice, {} other errors{}",
            t.traces,
            t.walls_twice,
            t.other_errors.len(),
            t.other_errors.first().map(|e| format!(" ({e})")).unwrap_or_default()
        ),
    }
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    let cases: Vec<(&str, Arc<OrderOracle>, usize)> = vec![
        ("TOR2", torus_zn("sqrt2", "[[1,[0,1]]]"), 3),
        ("TOR2", torus_zn("Q", "[[0,1],[1,0]]"), 3),
        ("OCT8", oct8_lex(DEPTH2_A), 2),
    ];
    for (name, o, radius) in cases {
        let t = surface(name);
        let lift = SurfaceLift::new(&t, &o).unwrap();
        let mut seq = enumerate_ball(&o, radius);
        seq.extend(holonomy_support(&lift));
        let src = TableSource::new(Arc::new(minimal_embed(o.clone(), &seq).unwrap()));
        let tracer = Tracer::new(&lift, &src);
        for tri in 0..t.num_triangles() {
            match holonomy_check(&tracer, tri) {
                Ok(r) if r.passed() && r.levels == HOLONOMY_LEVELS => checked += 1,
                Ok(r) => failures.push(format!("{name}/{tri}: {} levels, {:?}", r.levels, r.failures.first())),
                Err(e) => failures.push(format!("{name}/{tri}: {e}")),
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("{checked} triangles at {HOLONOMY_LEVELS} exact levels each{}", if failures.is_empty() { String::new() } else { format!("; {failures:?}") }),
    }
}

struct Oct8 {
    t: Triangulation2,
    lift: SurfaceLift,
    dev: Developer,
    src: FunctionalSource,
}

fn oct8(depth2: &str) -> Oct8 {
    let t = surface("OCT8");
    let o = oct8_lex(depth2);
    let lift = SurfaceLift::new(&t, &o).unwrap();
    let dev = Developer::new(HyperbolicModel::build(&t).unwrap(), &lift);
    let src = FunctionalSource::from_oracle(&o).unwrap();
    Oct8 { t, lift, dev, src }
}

fn lamination(s: &Oct8) -> GeodesicLamination {
    let tracer = Tracer::new(&s.lift, &s.src);
    let starts = sample_starts(s.t.num_triangles(), SAMPLES, SEED);
    straighten_lamination(&s.dev, &tracer, &starts, EPS, CAP, "lex").unwrap()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let s = oct8(DEPTH2_A);
    let lam = lamination(&s);
    let took = start.elapsed();
    let tracer = Tracer::new(&s.lift, &s.src);
    let starts = sample_starts(s.t.num_triangles(), SAMPLES, SEED);
    let a = trace_samples(&s.dev, &tracer, &starts, EPS, CAP).unwrap();
    let b = trace_samples(&s.dev, &tracer, &starts, EPS, 2 * CAP).unwrap();
    let mut drift: f64 = 0.0;
    let mut unconverged = lam.not_converged.len();
    for (x, y) in a.iter().zip(&b) {
        match (&x.estimate, &y.estimate) {
            (Ok(ex), Ok(ey)) => drift = drift.max(ex.geodesic.distance(&ey.geodesic)),
            _ => unconverged += 1,
        }
    }
    Outcome {
        pass: lam.is_lamination() && unconverged == 0 && drift < EPS && took < STRAIGHTEN_RUNTIME,
        detail: format!(
            "{} geodesics from {SAMPLES} samples, non-crossing {}, unconverged {unconverged}, drift at doubled cap {drift:.2e} (limit {EPS:.0e}), {:.2} s (limit {} s)",
            lam.len(),
            lam.is_lamination(),
            took.as_secs_f64(),
            STRAIGHTEN_RUNTIME.as_secs()
        ),
    }
}

fn criterion_6() -> Outcome {
    let (a, b) = (lamination(&oct8(DEPTH2_A)), lamination(&oct8(DEPTH2_B)));
    let d = compare_laminations(&a.geodesics, &b.geodesics).unwrap();
    Outcome { pass: d < BLOWUP_TOLERANCE, detail: format!("Hausdorff distance {d:.3e} (limit {BLOWUP_TOLERANCE:.0e})") }
}

fn criterion_7() -> Outcome {
    let s = oct8(DEPTH2_A);
    let starts = sample_starts(s.t.num_triangles(), SAMPLES, SEED);
    let sizes = [rat2(1, 10), rat2(1, 100), rat2(1, 1000)];
    let (_, rows) = perturb_and_compare(&s.dev, &s.lift, s.src.functional(), &sizes, &starts, EPS, CAP).unwrap();
    let d: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    let monotone = d.windows(2).all(|w| w[1] <= w[0] + CONTINUITY_NOISE);
    Outcome {
        pass: monotone && rows.iter().all(|r| r.not_converged == 0),
        detail: format!("distances at 1/10, 1/100, 1/1000: {d:.4?} (noise {CONTINUITY_NOISE:.0e})"),
    }
}

fn criterion_8() -> Outcome {
    let t = cube();
    let s = enumerate_directions(&t, false).unwrap();
    let counts_ok = s.reports.iter().filter(|r| r.all_tets_total).all(|r| r.blue == 4 * CUBE_TETS && r.black == 2 * CUBE_TETS);
    Outcome {
        pass: s.candidates == 128 && s.regularity_mismatches == 0 && s.colour_count_failures == 0 && counts_ok
            && s.link_euler_characteristic == 2,
        detail: format!(
            "{} directions, {} valid, {} local orientations, {} regular, {} disagreements, colour counts 24/12 {counts_ok}, link chi {}",
            s.candidates, s.valid, s.local_orientations, s.regular, s.regularity_mismatches, s.link_euler_characteristic
        ),
    }
}

fn criterion_9() -> Outcome {
    let t = cube();
    let lex = order(r#"{"backend":"zn","field":"Q","functionals":[[0,0,1],[0,1,0],[1,0,0]]}"#);
    let d = order_induced_direction(&t, &lex).unwrap();
    let r = decide_regularity(&t, &d).unwrap();
    // A generic functional close to the lex order gives a linear level-set
    // function with the same edge signs.
    let near = order(r#"{"backend":"zn","field":"Q","functionals":[["1/10000","1/100",1]]}"#);
    let same = order_induced_direction(&t, &near).unwrap() == d;
    let orders: Vec<(String, OrderOracle)> = signed_lex_orders(3)
        .into_iter()
        .map(|(label, rows)| {
            let text = serde_json::json!({"backend": "zn", "field": "Q", "functionals": rows}).to_string();
            (label, OrderSpec::from_json(&text, 128).unwrap())
        })
        .collect();
    let e = bi_invariant_experiment(&t, &orders).unwrap();
    Outcome {
        pass: r.red_components == 1 && r.is_regular && r.is_local_orientation && same,
        detail: format!(
            "lex direction {:?}: local orientation {}, red components {}, matches generic functional {same}; \
             {} signed lex orders give {} directions, all local orientations: {}",
            d.0,
            r.is_local_orientation,
            r.red_components,
            e.orders.len(),
            e.distinct_directions,
            e.subset_of_local_orientations
        ),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("torus classification", criterion_1),
        ("minimal embedding laws", criterion_2),
        ("wall-crossing uniqueness", criterion_3),
        ("holonomy check", criterion_4),
        ("straightening", criterion_5),
        ("blow-up insensitivity", criterion_6),
        ("continuity under perturbation", criterion_7),
        ("regularity vs local orientation", criterion_8),
        ("lex order on Z^3", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!("{} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
