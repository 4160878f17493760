//! The level-set function `F` on lifted triangles of a surface, leaf tracing,
//! the per-triangle holonomy description, and closed-leaf detection on the
//! torus.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::algebraic::{format_rational, rat, rat2, AlgebraicNumber};
use crate::complex::{ComplexError, Triangulation2};
use crate::embed::{enumerate_ball, extend_action_partial, minimal_embed, EmbedError, EmbeddingTable, PLMap};
use crate::orders::{check_edges_positive_or_flip, kernel_generator, Functional, OrderBackend, OrderError, OrderOracle};
use crate::words::{abelianize, reduce_mod_relation, NilCoords, Word};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Floation2Error {
    #[error("level {0} equals a corner value")]
    SingularLevel(String),
    #[error("leaf crossed lifted edge {edge} at `{tail}` twice")]
    WallCrossedTwice { edge: usize, tail: String },
    #[error("bad start: {0}")]
    BadStart(String),
    #[error("closed-leaf detection needs a torus with a functional-chain order: {0}")]
    NotATorus(String),
    #[error("missing table support: {0}")]
    MissingSupport(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A group element carried as a word together with its class-two nilpotent
/// coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub word: Word,
    pub nil: NilCoords,
}

pub type LabelKey = (Vec<i64>, Vec<i64>);

impl Label {
    pub fn identity(rank: usize) -> Self {
        Label { word: Word::identity(), nil: NilCoords::identity(rank) }
    }

    pub fn of_word(rank: usize, w: &Word) -> Self {
        Label { word: w.clone(), nil: NilCoords::of_word(rank, w) }
    }

    pub fn mul(&self, w: &Word, n: &NilCoords) -> Label {
        Label { word: self.word.mul(w), nil: self.nil.mul(n) }
    }

    pub fn inverse(&self) -> Label {
        Label { word: self.word.inverse(), nil: self.nil.inverse() }
    }
}

/// Combinatorics of the universal cover: lifted triangles are `(t, h)` with
/// corner labels `h`, `h s0`, `h s0 s1`.
#[derive(Clone, Debug)]
pub struct SurfaceLift {
    tri: Triangulation2,
    rank: usize,
    side_words: Vec<[(Word, NilCoords); 3]>,
    edge_words: Vec<Word>,
    flips: Vec<i8>,
    relator: Option<Vec<i64>>,
}

impl SurfaceLift {
    /// Fails when an edge is equivalent to the identity under the order.
    pub fn new(t: &Triangulation2, o: &OrderOracle) -> Result<Self, Floation2Error> {
        let flips = check_edges_positive_or_flip(o, &t.presentation().edge_words)?;
        Ok(Self::with_flips(t, flips))
    }

    pub fn with_flips(t: &Triangulation2, flips: Vec<i8>) -> Self {
        let pres = t.presentation();
        let rank = pres.rank();
        let side_words = t
            .triangles()
            .iter()
            .map(|tr| {
                tr.sides.map(|s| {
                    let w = pres.side_word(s);
                    let n = NilCoords::of_word(rank, &w);
                    (w, n)
                })
            })
            .collect();
        let relator = pres.relators.first().map(|r| NilCoords::of_word(rank, r).quadratic);
        SurfaceLift { tri: t.clone(), rank, side_words, edge_words: pres.edge_words.clone(), flips, relator }
    }

    pub fn triangulation(&self) -> &Triangulation2 {
        &self.tri
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Sign making each edge word positive in the order.
    pub fn flips(&self) -> &[i8] {
        &self.flips
    }

    /// Labels in abelian groups (rank two) are determined by their key.
    pub fn exact_keys(&self) -> bool {
        self.rank <= 2
    }

    pub fn key(&self, l: &Label) -> LabelKey {
        let q = match &self.relator {
            Some(r) if r.iter().any(|&x| x != 0) => reduce_mod_relation(&l.nil.quadratic, r),
            _ => l.nil.quadratic.clone(),
        };
        (l.nil.linear.clone(), q)
    }

    pub fn corners(&self, t: usize, h: &Label) -> [Label; 3] {
        let s = &self.side_words[t];
        let c1 = h.mul(&s[0].0, &s[0].1);
        let c2 = c1.mul(&s[1].0, &s[1].1);
        [h.clone(), c1, c2]
    }

    /// `(edge, tail, head)` of side `k`, with tail and head taken along the
    /// edge class orientation.
    pub fn side_edge(&self, t: usize, corners: &[Label; 3], k: usize) -> (usize, Label, Label) {
        let s = self.tri.triangles()[t].sides[k];
        let (a, b) = (corners[k].clone(), corners[(k + 1) % 3].clone());
        if s.sign > 0 {
            (s.edge, a, b)
        } else {
            (s.edge, b, a)
        }
    }

    /// Lifted triangle across side `k`, with the side index it enters by.
    pub fn neighbor(&self, t: usize, h: &Label, k: usize) -> (usize, Label, usize) {
        let corners = self.corners(t, h);
        let (_, tail, _) = self.side_edge(t, &corners, k);
        let (t2, k2) = self.tri.neighbor(t, k);
        let s2 = self.tri.triangles()[t2].sides[k2];
        let j = if s2.sign > 0 { k2 } else { (k2 + 1) % 3 };
        let sw = &self.side_words[t2];
        let h2 = match j {
            0 => tail,
            1 => tail.mul(&sw[0].0.inverse(), &sw[0].1.inverse()),
            _ => {
                let w = sw[0].0.mul(&sw[1].0);
                let n = sw[0].1.mul(&sw[1].1);
                tail.mul(&w.inverse(), &n.inverse())
            }
        };
        (t2, h2, k2)
    }

    /// Positive generator of an edge and whether the tail is its lower end.
    pub fn positive_edge(&self, e: usize) -> (Word, bool) {
        if self.flips[e] > 0 {
            (self.edge_words[e].clone(), true)
        } else {
            (self.edge_words[e].inverse(), false)
        }
    }
}

/// Position of a crossing along an edge, as an exact value in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum EdgeParam {
    Exact(BigRational),
    /// `num / den` evaluated by the leading functional on `Q^n` vectors.
    Linear(Vec<BigRational>, Vec<BigRational>),
}

impl EdgeParam {
    pub fn complement(&self) -> EdgeParam {
        match self {
            EdgeParam::Exact(t) => EdgeParam::Exact(BigRational::one() - t),
            EdgeParam::Linear(n, d) => EdgeParam::Linear(d.iter().zip(n).map(|(a, b)| a - b).collect(), d.clone()),
        }
    }
}

/// Vertex and edge values of `F`.
pub trait LevelSource {
    type Value: Clone + fmt::Debug;

    /// `F` at a lifted vertex; `None` outside the supported region.
    fn vertex(&self, h: &Label) -> Result<Option<Self::Value>, Floation2Error>;

    fn compare(&self, a: &Self::Value, b: &Self::Value) -> Ordering;

    /// Parameter from `lower` to `upper = lower g` where `F = y`, with its
    /// floating approximation.
    fn crossing(
        &self,
        lower: &Label,
        upper: &Label,
        g: &Word,
        values: (&Self::Value, &Self::Value),
        y: &Self::Value,
    ) -> Result<Option<(EdgeParam, f64)>, Floation2Error>;

    fn lerp(&self, a: &Self::Value, b: &Self::Value, u: &BigRational) -> Self::Value;

    fn to_f64(&self, v: &Self::Value) -> f64;

    fn describe(&self, v: &Self::Value) -> String;
}

/// `F` built from a dyadic embedding: `F(gv_0) = i(g)` and on an edge from
/// `p` to `q = pg`, `F(t) = rho(q)((1 - t) i(g^-1))`.
pub struct TableSource {
    table: Arc<EmbeddingTable>,
    actions: Mutex<HashMap<usize, Arc<PLMap>>>,
    overrides: HashMap<usize, BigRational>,
}

impl TableSource {
    pub fn new(table: Arc<EmbeddingTable>) -> Self {
        TableSource { table, actions: Mutex::new(HashMap::new()), overrides: HashMap::new() }
    }

    pub fn table(&self) -> &Arc<EmbeddingTable> {
        &self.table
    }

    /// Replaces the vertex value of one embedded element; used to build
    /// negative controls.
    pub fn with_vertex_override(mut self, w: &Word, value: BigRational) -> Result<Self, Floation2Error> {
        let i = self.table.index_of(w)?.ok_or_else(|| Floation2Error::MissingSupport(w.to_string()))?;
        self.overrides.insert(i, value);
        Ok(self)
    }

    pub fn value(&self, w: &Word) -> Result<Option<BigRational>, Floation2Error> {
        Ok(self.table.value(w)?.map(|d| d.to_rational()))
    }

    fn action(&self, idx: usize) -> Result<Arc<PLMap>, Floation2Error> {
        if let Some(m) = self.actions.lock().expect("action cache").get(&idx) {
            return Ok(m.clone());
        }
        let q = self.table.entries()[idx].0.clone();
        let (m, _) = extend_action_partial(&self.table, &q)?;
        let m = Arc::new(m);
        self.actions.lock().expect("action cache").insert(idx, m.clone());
        Ok(m)
    }
}

impl LevelSource for TableSource {
    type Value = BigRational;

    fn vertex(&self, h: &Label) -> Result<Option<BigRational>, Floation2Error> {
        Ok(match self.table.index_of(&h.word)? {
            Some(i) => Some(self.overrides.get(&i).cloned().unwrap_or_else(|| self.table.entries()[i].1.to_rational())),
            None => None,
        })
    }

    fn compare(&self, a: &BigRational, b: &BigRational) -> Ordering {
        a.cmp(b)
    }

    fn crossing(
        &self,
        _lower: &Label,
        upper: &Label,
        g: &Word,
        _values: (&BigRational, &BigRational),
        y: &BigRational,
    ) -> Result<Option<(EdgeParam, f64)>, Floation2Error> {
        let Some(ig) = self.value(&g.inverse())? else { return Ok(None) };
        let Some(q) = self.table.index_of(&upper.word)? else { return Ok(None) };
        let rho = self.action(q)?;
        let s = rho.eval_inverse(y);
        let t = BigRational::one() - s / ig;
        if t.is_negative() || t > BigRational::one() {
            return Ok(None);
        }
        let f = t.to_f64().unwrap_or(f64::NAN);
        Ok(Some((EdgeParam::Exact(t), f)))
    }

    fn lerp(&self, a: &BigRational, b: &BigRational, u: &BigRational) -> BigRational {
        a + (b - a) * u
    }

    fn to_f64(&self, v: &BigRational) -> f64 {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn describe(&self, v: &BigRational) -> String {
        format_rational(v)
    }
}

/// `F` equal to a linear functional on `H_1`, linear on every edge. Values
/// are kept as rational vectors in `Q^n` and compared through the functional.
#[derive(Clone, Debug)]
pub struct FunctionalSource {
    functional: Functional,
    approx: Vec<f64>,
}

impl FunctionalSource {
    pub fn new(functional: Functional) -> Self {
        let approx = functional.to_f64();
        FunctionalSource { functional, approx }
    }

    pub fn from_oracle(o: &OrderOracle) -> Option<Self> {
        o.leading_functional().cloned().map(Self::new)
    }

    pub fn functional(&self) -> &Functional {
        &self.functional
    }

    pub fn evaluate(&self, v: &[BigRational]) -> AlgebraicNumber {
        self.functional.eval_rational(v)
    }

    pub fn approx(&self, v: &[BigRational]) -> f64 {
        v.iter().zip(&self.approx).map(|(x, c)| x.to_f64().unwrap_or(f64::NAN) * c).sum()
    }

    /// Exact sign of the functional on a rational vector.
    pub fn sign(&self, v: &[BigRational]) -> Ordering {
        let mut sum = 0.0;
        let mut mag = 0.0;
        for (x, c) in v.iter().zip(&self.approx) {
            let xf = x.to_f64().unwrap_or(f64::NAN);
            sum += xf * c;
            mag += (xf * c).abs();
        }
        if sum.is_finite() && sum.abs() > 1e-9 * mag {
            return sum.partial_cmp(&0.0).expect("finite");
        }
        let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled: Option<Vec<i64>> =
            v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer().to_i64()).collect();
        match scaled {
            Some(ints) => self.functional.eval(&ints).sign(),
            None => self.functional.eval_rational(v).sign(),
        }
    }

    fn diff(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }
}

impl LevelSource for FunctionalSource {
    type Value = Vec<BigRational>;

    fn vertex(&self, h: &Label) -> Result<Option<Vec<BigRational>>, Floation2Error> {
        Ok(Some(h.nil.linear.iter().map(|&x| rat(x)).collect()))
    }

    fn compare(&self, a: &Vec<BigRational>, b: &Vec<BigRational>) -> Ordering {
        self.sign(&Self::diff(a, b))
    }

    fn crossing(
        &self,
        _lower: &Label,
        _upper: &Label,
        _g: &Word,
        values: (&Vec<BigRational>, &Vec<BigRational>),
        y: &Vec<BigRational>,
    ) -> Result<Option<(EdgeParam, f64)>, Floation2Error> {
        let num = Self::diff(y, values.0);
        let den = Self::diff(values.1, values.0);
        let f = self.approx(&num) / self.approx(&den);
        Ok(Some((EdgeParam::Linear(num, den), f)))
    }

    fn lerp(&self, a: &Vec<BigRational>, b: &Vec<BigRational>, u: &BigRational) -> Vec<BigRational> {
        a.iter().zip(b).map(|(x, y)| x + (y - x) * u).collect()
    }

    fn to_f64(&self, v: &Vec<BigRational>) -> f64 {
        self.approx(v)
    }

    fn describe(&self, v: &Vec<BigRational>) -> String {
        let parts: Vec<String> = v.iter().map(format_rational).collect();
        format!("phi({})", parts.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TraceStatus {
    Open,
    ClosedCandidate,
    HitBallBoundary,
}

/// One passage of a leaf through a lifted edge.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub edge: usize,
    pub tail: Label,
    /// Position measured from the tail along the edge class orientation.
    pub param: EdgeParam,
    pub param_f64: f64,
    /// Triangle left and its exit side.
    pub from: (usize, Label, usize),
    /// Triangle entered and its entry side.
    pub into: (usize, Label, usize),
}

#[derive(Clone, Debug)]
pub struct LeafTrace<V> {
    pub start: (usize, Label),
    pub level: V,
    /// Crossings in the direction with larger values on the left.
    pub forward: Vec<Crossing>,
    pub backward: Vec<Crossing>,
    pub forward_status: TraceStatus,
    pub backward_status: TraceStatus,
}

impl<V> LeafTrace<V> {
    pub fn num_crossings(&self) -> usize {
        self.forward.len() + self.backward.len()
    }

    /// Lifted triangles met by the leaf, in order from the backward end.
    pub fn triangles(&self) -> Vec<(usize, Label)> {
        let mut out: Vec<(usize, Label)> = self.backward.iter().rev().map(|c| (c.into.0, c.into.1.clone())).collect();
        out.push(self.start.clone());
        out.extend(self.forward.iter().map(|c| (c.into.0, c.into.1.clone())));
        out
    }

    /// Crossings in order from the backward end to the forward end.
    pub fn ordered_crossings(&self) -> Vec<&Crossing> {
        self.backward.iter().rev().chain(self.forward.iter()).collect()
    }
}

type SameElement<'a> = Box<dyn Fn(&Label, &Label) -> bool + Send + Sync + 'a>;

/// Leaf follower over a lazily explored universal cover.
pub struct Tracer<'a, S: LevelSource> {
    lift: &'a SurfaceLift,
    src: &'a S,
    same_element: Option<SameElement<'a>>,
}

/// A crossed side of a lifted triangle at a level.
#[derive(Clone, Debug)]
pub struct SideCrossing {
    pub side: usize,
    pub edge: usize,
    pub tail: Label,
    pub head: Label,
    pub from_lower: EdgeParam,
    pub from_tail: EdgeParam,
    pub from_tail_f64: f64,
    pub ascending: bool,
}

impl<'a, S: LevelSource> Tracer<'a, S> {
    pub fn new(lift: &'a SurfaceLift, src: &'a S) -> Self {
        Tracer { lift, src, same_element: None }
    }

    /// Decides whether two labels with equal nilpotent keys are the same group
    /// element; needed only beyond the torus.
    pub fn with_identity(mut self, f: SameElement<'a>) -> Self {
        self.same_element = Some(f);
        self
    }

    pub fn lift(&self) -> &SurfaceLift {
        self.lift
    }

    pub fn source(&self) -> &S {
        self.src
    }

    pub fn corner_values(&self, t: usize, h: &Label) -> Result<Option<[S::Value; 3]>, Floation2Error> {
        let c = self.lift.corners(t, h);
        let mut out = Vec::with_capacity(3);
        for l in &c {
            match self.src.vertex(l)? {
                Some(v) => out.push(v),
                None => return Ok(None),
            }
        }
        Ok(Some([out[0].clone(), out[1].clone(), out[2].clone()]))
    }

    /// Sides of `(t, h)` crossed by the level `y`, with exact parameters.
    /// `None` when the triangle leaves the supported region.
    pub fn segment(&self, t: usize, h: &Label, y: &S::Value) -> Result<Option<Vec<SideCrossing>>, Floation2Error> {
        let Some(vals) = self.corner_values(t, h)? else { return Ok(None) };
        let corners = self.lift.corners(t, h);
        let signs: Vec<Ordering> = vals.iter().map(|v| self.src.compare(v, y)).collect();
        if signs.contains(&Ordering::Equal) {
            return Err(Floation2Error::SingularLevel(self.src.describe(y)));
        }
        let mut out = Vec::new();
        for k in 0..3 {
            let (a, b) = (signs[k], signs[(k + 1) % 3]);
            if a == b {
                continue;
            }
            let (edge, tail, head) = self.lift.side_edge(t, &corners, k);
            let (g, tail_lower) = self.lift.positive_edge(edge);
            let (lower, upper) = if tail_lower { (&tail, &head) } else { (&head, &tail) };
            let (vl, vu) = {
                let tail_is_k = self.lift.triangulation().triangles()[t].sides[k].sign > 0;
                let (vt, vh) = if tail_is_k { (&vals[k], &vals[(k + 1) % 3]) } else { (&vals[(k + 1) % 3], &vals[k]) };
                if tail_lower {
                    (vt, vh)
                } else {
                    (vh, vt)
                }
            };
            let Some((p, pf)) = self.src.crossing(lower, upper, &g, (vl, vu), y)? else { return Ok(None) };
            let (from_tail, ff) = if tail_lower { (p.clone(), pf) } else { (p.complement(), 1.0 - pf) };
            out.push(SideCrossing {
                side: k,
                edge,
                tail,
                head,
                from_lower: p,
                from_tail,
                from_tail_f64: ff,
                ascending: a == Ordering::Less,
            });
        }
        Ok(Some(out))
    }

    /// Follows the leaf at level `y` through `(t, h)` in both directions.
    pub fn trace(&self, t: usize, h: &Label, y: &S::Value, max_crossings: usize) -> Result<LeafTrace<S::Value>, Floation2Error> {
        let seg = self
            .segment(t, h, y)?
            .ok_or_else(|| Floation2Error::BadStart("start triangle outside the supported region".into()))?;
        if seg.len() != 2 {
            return Err(Floation2Error::BadStart(format!("level {} misses the triangle", self.src.describe(y))));
        }
        let mut seen: HashMap<(usize, LabelKey), Vec<Label>> = HashMap::new();
        let asc = seg.iter().find(|s| s.ascending).expect("one ascending side").side;
        let desc = seg.iter().find(|s| !s.ascending).expect("one descending side").side;
        let (forward, fs) = self.walk(t, h, asc, y, max_crossings, &mut seen)?;
        let (backward, bs) = self.walk(t, h, desc, y, max_crossings, &mut seen)?;
        Ok(LeafTrace {
            start: (t, h.clone()),
            level: y.clone(),
            forward,
            backward,
            forward_status: fs,
            backward_status: bs,
        })
    }

    fn walk(
        &self,
        t0: usize,
        h0: &Label,
        exit0: usize,
        y: &S::Value,
        max: usize,
        seen: &mut HashMap<(usize, LabelKey), Vec<Label>>,
    ) -> Result<(Vec<Crossing>, TraceStatus), Floation2Error> {
        let mut out = Vec::new();
        let (mut t, mut h, mut exit) = (t0, h0.clone(), exit0);
        let mut seg = match self.segment(t, &h, y)? {
            Some(s) => s,
            None => return Ok((out, TraceStatus::HitBallBoundary)),
        };
        loop {
            if out.len() >= max {
                return Ok((out, TraceStatus::Open));
            }
            let cross = seg.iter().find(|s| s.side == exit).expect("exit side is crossed").clone();
            let (t2, h2, k2) = self.lift.neighbor(t, &h, exit);
            let seg2 = match self.segment(t2, &h2, y)? {
                Some(s) => s,
                None => return Ok((out, TraceStatus::HitBallBoundary)),
            };
            let key = (cross.edge, self.lift.key(&cross.tail));
            let prior = seen.entry(key).or_default();
            for p in prior.iter() {
                let same = self.lift.exact_keys()
                    || p.word == cross.tail.word
                    || self.same_element.as_ref().is_some_and(|f| f(p, &cross.tail));
                if same {
                    return Err(Floation2Error::WallCrossedTwice {
                        edge: cross.edge,
                        tail: self.lift.triangulation().presentation().generators.format(&cross.tail.word),
                    });
                }
            }
            prior.push(cross.tail.clone());
            let next_exit = seg2
                .iter()
                .find(|s| s.side != k2)
                .ok_or_else(|| Floation2Error::SingularLevel(self.src.describe(y)))?
                .side;
            out.push(Crossing {
                edge: cross.edge,
                tail: cross.tail,
                param: cross.from_tail,
                param_f64: cross.from_tail_f64,
                from: (t, h.clone(), exit),
                into: (t2, h2.clone(), k2),
            });
            t = t2;
            h = h2;
            exit = next_exit;
            seg = seg2;
        }
    }

    /// Start level `lo + (hi - lo) u` in a lifted triangle, where `lo`, `hi`
    /// are its extreme corner values.
    pub fn level_in(&self, t: usize, h: &Label, u: &BigRational) -> Result<S::Value, Floation2Error> {
        let vals = self
            .corner_values(t, h)?
            .ok_or_else(|| Floation2Error::BadStart("triangle outside the supported region".into()))?;
        let mut v: Vec<&S::Value> = vals.iter().collect();
        v.sort_by(|a, b| self.src.compare(a, b));
        Ok(self.src.lerp(v[0], v[2], u))
    }
}

/// Finite patch of the lifted triangulation with corner values.
#[derive(Clone, Debug)]
pub struct LiftedBall<V> {
    pub triangles: Vec<LiftedTriangle<V>>,
    pub adjacency: Vec<[Option<usize>; 3]>,
}

#[derive(Clone, Debug)]
pub struct LiftedTriangle<V> {
    pub base: usize,
    pub label: Label,
    pub corners: [Label; 3],
    pub values: [V; 3],
}

/// Every lifted triangle reachable through neighbours whose base label has
/// word length at most `radius`.
pub fn build_ball<S: LevelSource>(lift: &SurfaceLift, src: &S, radius: usize) -> Result<LiftedBall<S::Value>, Floation2Error> {
    let tracer = Tracer::new(lift, src);
    let mut index: HashMap<(usize, LabelKey, Word), usize> = HashMap::new();
    let mut tris: Vec<LiftedTriangle<S::Value>> = Vec::new();
    let mut queue = VecDeque::new();
    let n = lift.triangulation().num_triangles();
    let id = Label::identity(lift.rank());
    let ident = |l: &Label| -> (LabelKey, Word) {
        if lift.exact_keys() {
            (lift.key(l), Word::identity())
        } else {
            (lift.key(l), l.word.clone())
        }
    };
    for t in 0..n {
        queue.push_back((t, id.clone()));
    }
    while let Some((t, h)) = queue.pop_front() {
        let (k, w) = ident(&h);
        if h.word.len() > radius || index.contains_key(&(t, k.clone(), w.clone())) {
            continue;
        }
        let Some(values) = tracer.corner_values(t, &h)? else { continue };
        index.insert((t, k, w), tris.len());
        tris.push(LiftedTriangle { base: t, label: h.clone(), corners: lift.corners(t, &h), values });
        for side in 0..3 {
            let (t2, h2, _) = lift.neighbor(t, &h, side);
            queue.push_back((t2, h2));
        }
    }
    let adjacency = tris
        .iter()
        .map(|tr| {
            let mut a = [None; 3];
            for (side, slot) in a.iter_mut().enumerate() {
                let (t2, h2, _) = lift.neighbor(tr.base, &tr.label, side);
                let (k, w) = ident(&h2);
                *slot = index.get(&(t2, k, w)).copied();
            }
            a
        })
        .collect();
    Ok(LiftedBall { triangles: tris, adjacency })
}

impl<V> LiftedBall<V> {
    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Triangles with two equal corner values under `cmp`.
    pub fn degenerate_triangles(&self, cmp: impl Fn(&V, &V) -> Ordering) -> Vec<usize> {
        self.triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| (0..3).any(|k| cmp(&t.values[k], &t.values[(k + 1) % 3]) == Ordering::Equal))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Outcome of the per-triangle holonomy comparison.
#[derive(Clone, Debug, Serialize)]
pub struct HolonomyReport {
    pub triangle: usize,
    pub levels: usize,
    pub failures: Vec<String>,
}

impl HolonomyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that following leaves through triangle `t` identifies `beta` with
/// an initial segment of `gamma` by the identity and `alpha` with the rest by
/// `x -> -beta^-1(-x)`, in the parameterization `-F` on the lift ending at the
/// base vertex. Sampled at 100 exact levels.
/// Levels sampled per triangle by `holonomy_check`.
pub const HOLONOMY_LEVELS: usize = 100;

pub fn holonomy_check(tracer: &Tracer<'_, TableSource>, t: usize) -> Result<HolonomyReport, Floation2Error> {
    let lift = tracer.lift();
    let src = tracer.source();
    let table = src.table();
    let id = Label::identity(lift.rank());
    let c = lift.corners(t, &id);
    let mut order: Vec<(usize, BigRational)> = Vec::new();
    for (k, l) in c.iter().enumerate() {
        let v = src.value(&l.word)?.ok_or_else(|| Floation2Error::MissingSupport(l.word.to_string()))?;
        order.push((k, v));
    }
    order.sort_by(|a, b| a.1.cmp(&b.1));
    let (kmin, kmid, kmax) = (order[0].0, order[1].0, order[2].0);
    // Lift with the largest corner at the base vertex.
    let h = c[kmax].inverse();
    let c2 = lift.corners(t, &h);
    let gamma_inv = c2[kmin].word.clone();
    let beta_inv = c2[kmid].word.clone();
    let alpha_inv = beta_inv.inverse().mul(&gamma_inv);
    let need = |w: &Word| -> Result<BigRational, Floation2Error> {
        src.value(w)?.ok_or_else(|| Floation2Error::MissingSupport(lift.triangulation().presentation().generators.format(w)))
    };
    let i_g = need(&gamma_inv)?;
    let i_b = need(&beta_inv)?;
    let i_a = need(&alpha_inv)?;
    let (rho_b, _) = extend_action_partial(table, &beta_inv)?;
    let side_between = |p: usize, q: usize| (0..3).find(|&k| (k == p && (k + 1) % 3 == q) || (k == q && (k + 1) % 3 == p)).expect("two corners span a side");
    let s_alpha = side_between(kmin, kmid);
    let s_beta = side_between(kmid, kmax);
    let s_gamma = side_between(kmin, kmax);
    let mut failures = Vec::new();
    let mut levels = 0;
    for k in 0..101i64 {
        let y = &i_g * rat2(2 * k + 1, 203);
        if y == i_b || levels == HOLONOMY_LEVELS {
            continue;
        }
        levels += 1;
        let seg = match tracer.segment(t, &h, &y) {
            Ok(Some(s)) => s,
            Ok(None) => {
                failures.push(format!("level {}: outside support", format_rational(&y)));
                continue;
            }
            Err(e) => {
                failures.push(format!("level {}: {e}", format_rational(&y)));
                continue;
            }
        };
        let sides: HashSet<usize> = seg.iter().map(|s| s.side).collect();
        let param = |side: usize| -> Option<BigRational> {
            seg.iter().find(|s| s.side == side).and_then(|s| match &s.from_lower {
                EdgeParam::Exact(p) => Some(p.clone()),
                EdgeParam::Linear(..) => None,
            })
        };
        let upper_branch = y > i_b;
        let expected: HashSet<usize> = if upper_branch { [s_beta, s_gamma].into() } else { [s_alpha, s_gamma].into() };
        if sides != expected {
            failures.push(format!("level {}: crossed sides {sides:?}, expected {expected:?}", format_rational(&y)));
            continue;
        }
        let ok_gamma = param(s_gamma).is_some_and(|p| (BigRational::one() - p) * &i_g == y);
        let ok_other = if upper_branch {
            param(s_beta).is_some_and(|p| (BigRational::one() - p) * &i_b == y)
        } else {
            param(s_alpha).is_some_and(|p| rho_b.eval(&((BigRational::one() - p) * &i_a)) == y)
        };
        if !ok_gamma || !ok_other {
            failures.push(format!(
                "level {}: identification fails on the {} branch",
                format_rational(&y),
                if upper_branch { "beta" } else { "alpha" }
            ));
        }
    }
    Ok(HolonomyReport { triangle: t, levels, failures })
}

/// Words whose values the holonomy check needs, for seeding an embedding.
pub fn holonomy_support(lift: &SurfaceLift) -> Vec<Word> {
    let id = Label::identity(lift.rank());
    let mut out = Vec::new();
    for t in 0..lift.triangulation().num_triangles() {
        let c = lift.corners(t, &id);
        for k in 0..3 {
            let h = c[k].inverse();
            for l in lift.corners(t, &h) {
                out.push(l.word.clone());
            }
            for a in 0..3 {
                for b in 0..3 {
                    let h2 = lift.corners(t, &h);
                    out.push(h2[a].word.inverse().mul(&h2[b].word));
                }
            }
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.letters().cmp(b.letters())));
    out.dedup();
    out
}

#[derive(Clone, Copy, Debug)]
pub struct ClosedLeafCaps {
    pub radius: usize,
    pub max_crossings: usize,
}

impl Default for ClosedLeafCaps {
    fn default() -> Self {
        ClosedLeafCaps { radius: 12, max_crossings: 2000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedLeafCertificate {
    pub period_word: String,
    pub period_class: Vec<i64>,
    pub period_crossings: usize,
    pub kernel_check: bool,
    pub start_triangle: usize,
    pub start_level: String,
}

#[derive(Clone, Debug, Serialize)]
pub enum ClosedLeafOutcome {
    Certificate(ClosedLeafCertificate),
    NoneFound { traces: usize, max_crossings: usize },
}

/// Smallest period `p` of the edge sequence: every crossing repeats the
/// one `p` steps earlier, over at least three periods. Parameters are not
/// compared since the finite table is only approximately deck invariant.
pub fn find_period(c: &[Crossing]) -> Option<usize> {
    let n = c.len();
    (1..=n / 3).find(|&p| {
        (p..n).all(|i| {
            let (a, b) = (&c[i], &c[i - p]);
            a.edge == b.edge && a.from.0 == b.from.0 && a.into.0 == b.into.0
        })
    })
}

/// Class-separating levels tried by `detect_closed_leaf`.
const GAP_LEVELS: usize = 64;

/// Searches for a closed leaf of the torus fLOiation of a functional-chain
/// order and certifies its class exactly against the kernel generator.
pub fn detect_closed_leaf(
    t: &Triangulation2,
    o: Arc<OrderOracle>,
    caps: ClosedLeafCaps,
) -> Result<ClosedLeafOutcome, Floation2Error> {
    if t.genus() != 1 {
        return Err(Floation2Error::NotATorus(format!("genus {}", t.genus())));
    }
    let OrderBackend::Zn(chain) = o.backend() else {
        return Err(Floation2Error::NotATorus("order is not a functional chain".into()));
    };
    let kgen = kernel_generator(chain);
    let table = Arc::new(minimal_embed(o.clone(), &enumerate_ball(&o, caps.radius))?);
    let lift = SurfaceLift::new(t, &o)?;
    let src = TableSource::new(table.clone());
    let tracer = Tracer::new(&lift, &src);
    let gens = t.presentation().generators.clone();
    let mut starts = Vec::new();
    for h in enumerate_ball(&o, 2) {
        for tri in 0..t.num_triangles() {
            let (tri, h) = (tri, Label::of_word(lift.rank(), &h));
            if let Some(v) = tracer.corner_values(tri, &h)? {
                let lo = v.iter().min().cloned().expect("three corners");
                let hi = v.iter().max().cloned().expect("three corners");
                starts.push((tri, h, lo, hi));
            }
        }
    }
    let mut levels: Vec<(usize, Label, BigRational)> = Vec::new();
    for (tri, h, lo, hi) in &starts {
        for u in [rat2(1, 3), rat2(2, 3)] {
            levels.push((*tri, h.clone(), lo + (hi - lo) * u));
        }
    }
    // Levels between consecutive values whose leading-functional classes
    // differ, nearest to the identity first.
    let phi = chain.leading();
    let rank = lift.rank();
    let sorted: Vec<&(Word, crate::embed::Dyadic)> = table.sorted_indices().iter().map(|&i| &table.entries()[i]).collect();
    let mut gaps: Vec<BigRational> = sorted
        .windows(2)
        .filter(|w| phi.eval(&abelianize(rank, &w[0].0).0) != phi.eval(&abelianize(rank, &w[1].0).0))
        .map(|w| (w[0].1.to_rational() + w[1].1.to_rational()) / rat(2))
        .collect();
    gaps.sort_by(|a, b| a.abs().cmp(&b.abs()));
    for y in gaps.into_iter().take(GAP_LEVELS) {
        if let Some((tri, h, _, _)) = starts.iter().find(|(_, _, lo, hi)| *lo < y && y < *hi) {
            levels.push((*tri, h.clone(), y));
        }
    }
    let mut traces = 0;
    for (tri, h, y) in &levels {
        // Starts on a level through some vertex are skipped.
        let trace = match tracer.trace(*tri, h, y, caps.max_crossings) {
            Ok(tr) => tr,
            Err(Floation2Error::SingularLevel(_)) => continue,
            Err(e) => return Err(e),
        };
        traces += 1;
        for dir in [&trace.forward, &trace.backward] {
            let Some(p) = find_period(dir) else { continue };
            let n = dir.len();
            let (a, b) = (&dir[n - 1].tail, &dir[n - 1 - p].tail);
            let mut class: Vec<i64> = a.nil.linear.iter().zip(&b.nil.linear).map(|(x, y)| x - y).collect();
            let mut word = b.word.inverse().mul(&a.word);
            if let Some(k) = &kgen {
                if class.iter().zip(k).all(|(x, y)| *x == -y) {
                    class = k.clone();
                    word = word.inverse();
                }
            }
            let kernel_check = kgen.as_ref() == Some(&class);
            if kernel_check {
                return Ok(ClosedLeafOutcome::Certificate(ClosedLeafCertificate {
                    period_word: gens.format(&word),
                    period_class: class,
                    period_crossings: p,
                    kernel_check,
                    start_triangle: *tri,
                    start_level: format_rational(y),
                }));
            }
        }
    }
    Ok(ClosedLeafOutcome::NoneFound { traces, max_crossings: caps.max_crossings })
}
