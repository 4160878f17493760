//! Exact order oracles on fundamental groups presented on basis generators.
//!
//! Three backends are provided: functional-chain orders on `Z^n` (compared
//! through the abelianization), lexicographic orders on surface groups that
//! break `H_1` ties with a functional on the degree-2 Magnus class, and
//! explicit finite tables used to test the embedding code in isolation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebraic::{format_rational, parse_rational, rat, AlgebraicNumber, Field, FieldError, Poly};
use crate::words::{abelianize, pair_count, reduce_mod_relation, GeneratorSet, NilCoords, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("rank mismatch: order has rank {expected}, word uses generator {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("functional has {got} coefficients, expected {expected}")]
    BadFunctional { expected: usize, got: usize },
    #[error("functional chain is empty or contains a zero functional")]
    DegenerateChain,
    #[error("chain is not total; common kernel spanned by {0:?}")]
    NotTotal(Vec<Vec<i64>>),
    #[error("depth-2 functional does not vanish on the relator class")]
    Depth2NotWellDefined,
    #[error("edge {0} is equivalent to the identity under this order")]
    EdgeEquivalentToUnit(usize),
    #[error("word `{0}` is not in the explicit order table")]
    NotInTable(String),
    #[error("explicit order table lists `{0}` twice")]
    DuplicateTableWord(String),
    #[error("order specification: {0}")]
    Spec(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparison {
    Less,
    Equivalent,
    Greater,
}

impl Comparison {
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Comparison::Less,
            Ordering::Equal => Comparison::Equivalent,
            Ordering::Greater => Comparison::Greater,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Comparison::Less => Comparison::Greater,
            Comparison::Equivalent => Comparison::Equivalent,
            Comparison::Greater => Comparison::Less,
        }
    }
}

/// A linear functional on `Z^n` with coefficients in a real number field.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional(pub Vec<AlgebraicNumber>);

impl Functional {
    pub fn from_ints(field: &Arc<Field>, c: &[i64]) -> Self {
        Functional(c.iter().map(|&x| AlgebraicNumber::from_int(field, x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(AlgebraicNumber::is_zero)
    }

    pub fn field(&self) -> &Arc<Field> {
        self.0[0].field()
    }

    pub fn eval(&self, v: &[i64]) -> AlgebraicNumber {
        let mut acc = AlgebraicNumber::zero(self.field());
        for (c, &x) in self.0.iter().zip(v) {
            if x != 0 {
                acc = acc.add(&c.scale_int(x));
            }
        }
        acc
    }

    pub fn eval_rational(&self, v: &[BigRational]) -> AlgebraicNumber {
        let mut acc = AlgebraicNumber::zero(self.field());
        for (c, x) in self.0.iter().zip(v) {
            if !x.is_zero() {
                acc = acc.add(&c.scale(x));
            }
        }
        acc
    }

    /// Rational basis of `{v in Q^n : f(v) = 0}`, scaled to primitive integer
    /// vectors.
    pub fn kernel(&self) -> Vec<Vec<i64>> {
        kernel_of_rows(&self.coordinate_rows())
    }

    fn coordinate_rows(&self) -> Vec<Vec<BigRational>> {
        let d = self.field().degree();
        (0..d).map(|k| self.0.iter().map(|c| c.coords()[k].clone()).collect()).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(AlgebraicNumber::to_f64).collect()
    }
}

/// Integer kernel basis of a rational matrix, by reduced row echelon form.
pub fn kernel_of_rows(rows: &[Vec<BigRational>]) -> Vec<Vec<i64>> {
    let n = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let lead = m[r][c].clone();
        for x in m[r].iter_mut() {
            *x /= &lead;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..n {
                    let t = &m[r][j] * &f;
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![BigRational::zero(); n];
            v[fc] = rat(1);
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][fc].clone();
            }
            primitive_integer(&v)
        })
        .collect()
}

fn primitive_integer(v: &[BigRational]) -> Vec<i64> {
    let lcm = v.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.iter()
        .map(|x| if g.is_zero() { 0 } else { (x / &g).to_i64().expect("kernel entry fits in i64") })
        .collect()
}

/// Ordered list of functionals on `Z^n`, evaluated lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalChain {
    rank: usize,
    functionals: Vec<Functional>,
}

impl FunctionalChain {
    pub fn new(rank: usize, functionals: Vec<Functional>) -> Result<Self, OrderError> {
        if functionals.is_empty() || functionals.iter().any(Functional::is_zero) {
            return Err(OrderError::DegenerateChain);
        }
        for f in &functionals {
            if f.len() != rank {
                return Err(OrderError::BadFunctional { expected: rank, got: f.len() });
            }
        }
        Ok(Self { rank, functionals })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    pub fn leading(&self) -> &Functional {
        &self.functionals[0]
    }

    pub fn field(&self) -> &Arc<Field> {
        self.functionals[0].field()
    }

    pub fn sign(&self, v: &[i64]) -> Comparison {
        for f in &self.functionals {
            match f.eval(v).sign() {
                Ordering::Equal => continue,
                o => return Comparison::from_ordering(o),
            }
        }
        Comparison::Equivalent
    }

    /// Basis of the common kernel of all functionals.
    pub fn common_kernel(&self) -> Vec<Vec<i64>> {
        let rows: Vec<Vec<BigRational>> =
            self.functionals.iter().flat_map(Functional::coordinate_rows).collect();
        kernel_of_rows(&rows)
    }

    pub fn is_total(&self) -> bool {
        self.common_kernel().is_empty()
    }
}

/// True iff the leading functional alone is injective on `Z^n`.
pub fn is_archimedean(c: &FunctionalChain) -> Result<bool, OrderError> {
    let common = c.common_kernel();
    if !common.is_empty() {
        return Err(OrderError::NotTotal(common));
    }
    Ok(c.leading().kernel().is_empty())
}

/// Primitive generator of the kernel of the leading functional, signed so that
/// it is positive in the order. `None` when the functional is injective.
pub fn kernel_generator(c: &FunctionalChain) -> Option<Vec<i64>> {
    let ker = c.leading().kernel();
    let mut k = ker.into_iter().next()?;
    let positive = match c.sign(&k) {
        Comparison::Greater => true,
        Comparison::Less => false,
        Comparison::Equivalent => k.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0),
    };
    if !positive {
        k.iter_mut().for_each(|x| *x = -*x);
    }
    Some(k)
}

/// Lexicographic order on a surface group: the `H_1` functional first, then a
/// functional on the degree-2 class of `v^-1 u` when the abelianizations agree.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceLexOrder {
    rank: usize,
    h1: Functional,
    depth2: Option<Functional>,
    relator: Option<Vec<i64>>,
}

impl SurfaceLexOrder {
    pub fn new(
        rank: usize,
        h1: Functional,
        depth2: Option<Functional>,
        relator: Option<Vec<i64>>,
    ) -> Result<Self, OrderError> {
        if h1.len() != rank {
            return Err(OrderError::BadFunctional { expected: rank, got: h1.len() });
        }
        if h1.is_zero() {
            return Err(OrderError::DegenerateChain);
        }
        let pc = pair_count(rank);
        if let Some(r) = &relator {
            if r.len() != pc {
                return Err(OrderError::BadFunctional { expected: pc, got: r.len() });
            }
        }
        if let Some(d) = &depth2 {
            if d.len() != pc {
                return Err(OrderError::BadFunctional { expected: pc, got: d.len() });
            }
            if let Some(r) = &relator {
                if !d.eval(r).is_zero() {
                    return Err(OrderError::Depth2NotWellDefined);
                }
            }
        }
        Ok(Self { rank, h1, depth2, relator })
    }

    pub fn h1(&self) -> &Functional {
        &self.h1
    }

    pub fn depth2(&self) -> Option<&Functional> {
        self.depth2.as_ref()
    }

    pub fn relator(&self) -> Option<&[i64]> {
        self.relator.as_deref()
    }

    pub fn h1_injective(&self) -> bool {
        self.h1.kernel().is_empty()
    }

    /// Injective on the degree-2 lattice modulo the relator.
    pub fn depth2_injective(&self) -> bool {
        let Some(d) = &self.depth2 else { return false };
        let ker = d.kernel();
        match (&self.relator, ker.len()) {
            (_, 0) => true,
            (Some(r), 1) => {
                let k = &ker[0];
                let rr = primitive_i64(r);
                *k == rr || k.iter().zip(&rr).all(|(a, b)| *a == -b)
            }
            _ => false,
        }
    }
}

fn primitive_i64(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g == 0 {
        v.to_vec()
    } else {
        v.iter().map(|x| x / g).collect()
    }
}

/// Explicit order on finitely many words; equal ranks are equivalent.
#[derive(Clone, Debug, PartialEq)]
pub struct UserTable {
    ranks: HashMap<Word, i64>,
}

impl UserTable {
    pub fn new(entries: impl IntoIterator<Item = (Word, i64)>) -> Result<Self, OrderError> {
        let mut ranks = HashMap::new();
        for (w, r) in entries {
            if ranks.insert(w.clone(), r).is_some() {
                return Err(OrderError::DuplicateTableWord(w.to_string()));
            }
        }
        Ok(Self { ranks })
    }

    pub fn rank_of(&self, w: &Word) -> Result<i64, OrderError> {
        self.ranks.get(w).copied().ok_or_else(|| OrderError::NotInTable(w.to_string()))
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.ranks.keys()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OrderBackend {
    Zn(FunctionalChain),
    SurfaceLex(SurfaceLexOrder),
    UserTable(UserTable),
}

/// Hashable representative of an equivalence class of the order, available
/// when the backend can produce one without comparisons.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrderKey {
    Abelian(Vec<i64>),
    Nilpotent(Vec<i64>, Vec<i64>),
    Rank(i64),
}

#[derive(Clone, Debug)]
pub struct OrderOracle {
    generators: GeneratorSet,
    backend: OrderBackend,
}

impl OrderOracle {
    pub fn new(generators: GeneratorSet, backend: OrderBackend) -> Result<Self, OrderError> {
        let rank = match &backend {
            OrderBackend::Zn(c) => Some(c.rank()),
            OrderBackend::SurfaceLex(s) => Some(s.rank),
            OrderBackend::UserTable(_) => None,
        };
        if let Some(r) = rank {
            if r != generators.rank() {
                return Err(OrderError::RankMismatch { expected: r, got: generators.rank() });
            }
        }
        Ok(Self { generators, backend })
    }

    pub fn zn(chain: FunctionalChain) -> Self {
        let names: Vec<String> = (0..chain.rank()).map(default_name).collect();
        Self { generators: GeneratorSet::new(names).expect("default names"), backend: OrderBackend::Zn(chain) }
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.rank()
    }

    pub fn backend(&self) -> &OrderBackend {
        &self.backend
    }

    pub fn field(&self) -> Arc<Field> {
        match &self.backend {
            OrderBackend::Zn(c) => c.field().clone(),
            OrderBackend::SurfaceLex(s) => s.h1.field().clone(),
            OrderBackend::UserTable(_) => Field::rationals(),
        }
    }

    /// True when `compare` never returns `Equivalent` for distinct group
    /// elements that the backend can distinguish.
    pub fn is_total(&self) -> bool {
        match &self.backend {
            OrderBackend::Zn(c) => c.is_total(),
            OrderBackend::SurfaceLex(_) => false,
            OrderBackend::UserTable(_) => true,
        }
    }

    fn check_rank(&self, w: &Word) -> Result<(), OrderError> {
        match w.max_gen() {
            Some(g) if g >= self.rank() && !matches!(self.backend, OrderBackend::UserTable(_)) => {
                Err(OrderError::RankMismatch { expected: self.rank(), got: g })
            }
            _ => Ok(()),
        }
    }

    pub fn compare(&self, u: &Word, v: &Word) -> Result<Comparison, OrderError> {
        self.check_rank(u)?;
        self.check_rank(v)?;
        let n = self.rank();
        Ok(match &self.backend {
            OrderBackend::Zn(c) => {
                let d = abelianize(n, u).sub(&abelianize(n, v));
                c.sign(&d.0)
            }
            OrderBackend::SurfaceLex(s) => {
                let diff = v.inverse().mul(u);
                let c = NilCoords::of_word(n, &diff);
                match s.h1.eval(&c.linear).sign() {
                    Ordering::Equal => {}
                    o => return Ok(Comparison::from_ordering(o)),
                }
                if c.linear.iter().any(|&x| x != 0) {
                    return Ok(Comparison::Equivalent);
                }
                match &s.depth2 {
                    None => Comparison::Equivalent,
                    Some(d) => {
                        let q = match &s.relator {
                            Some(r) => reduce_mod_relation(&c.quadratic, r),
                            None => c.quadratic,
                        };
                        Comparison::from_ordering(d.eval(&q).sign())
                    }
                }
            }
            OrderBackend::UserTable(t) => Comparison::from_ordering(t.rank_of(u)?.cmp(&t.rank_of(v)?)),
        })
    }

    /// Class key such that `key(u) == key(v)` iff `compare(u, v)` is
    /// `Equivalent`.
    pub fn key(&self, w: &Word) -> Option<OrderKey> {
        let n = self.rank();
        match &self.backend {
            OrderBackend::Zn(c) if c.is_total() => Some(OrderKey::Abelian(abelianize(n, w).0)),
            OrderBackend::Zn(_) => None,
            OrderBackend::SurfaceLex(s) => {
                if !s.h1_injective() {
                    return None;
                }
                match &s.depth2 {
                    None => Some(OrderKey::Abelian(abelianize(n, w).0)),
                    Some(_) if s.depth2_injective() => {
                        let c = NilCoords::of_word(n, w);
                        let q = match &s.relator {
                            Some(r) => reduce_mod_relation(&c.quadratic, r),
                            None => c.quadratic,
                        };
                        Some(OrderKey::Nilpotent(c.linear, q))
                    }
                    Some(_) => None,
                }
            }
            OrderBackend::UserTable(t) => t.rank_of(w).ok().map(OrderKey::Rank),
        }
    }

    /// The functional on `H_1` that orders first, if the backend has one.
    pub fn leading_functional(&self) -> Option<&Functional> {
        match &self.backend {
            OrderBackend::Zn(c) => Some(c.leading()),
            OrderBackend::SurfaceLex(s) => Some(&s.h1),
            OrderBackend::UserTable(_) => None,
        }
    }

    /// Leading real-valued level of a word: the leading functional on its
    /// abelianization.
    pub fn leading_value(&self, c: &NilCoords) -> Option<AlgebraicNumber> {
        match &self.backend {
            OrderBackend::Zn(ch) => Some(ch.leading().eval(&c.linear)),
            OrderBackend::SurfaceLex(s) => Some(s.h1.eval(&c.linear)),
            OrderBackend::UserTable(_) => None,
        }
    }

    /// Secondary level used to separate elements the leading value ties.
    pub fn secondary_value(&self, c: &NilCoords) -> Option<AlgebraicNumber> {
        match &self.backend {
            OrderBackend::Zn(ch) => ch.functionals().get(1).map(|f| f.eval(&c.linear)),
            OrderBackend::SurfaceLex(s) => s.depth2.as_ref().map(|d| d.eval(&c.quadratic)),
            OrderBackend::UserTable(_) => None,
        }
    }

    pub fn describe(&self) -> Value {
        let names = self.generators.names();
        match &self.backend {
            OrderBackend::Zn(c) => {
                let arch = is_archimedean(c);
                json!({
                    "backend": "zn",
                    "rank": c.rank(),
                    "generators": names,
                    "field": c.field().name(),
                    "functionals": c.functionals().iter().map(Functional::to_f64).collect::<Vec<_>>(),
                    "total": c.is_total(),
                    "archimedean": arch.as_ref().ok(),
                    "kernel_generator": kernel_generator(c),
                    "common_kernel": c.common_kernel(),
                })
            }
            OrderBackend::SurfaceLex(s) => json!({
                "backend": "surface_lex",
                "rank": s.rank,
                "generators": names,
                "field": s.h1.field().name(),
                "h1": s.h1.to_f64(),
                "h1_injective": s.h1_injective(),
                "depth2": s.depth2.as_ref().map(Functional::to_f64),
                "depth2_injective_mod_relator": s.depth2_injective(),
                "relator": s.relator,
            }),
            OrderBackend::UserTable(t) => json!({
                "backend": "user_table",
                "entries": t.ranks.len(),
            }),
        }
    }
}

fn default_name(i: usize) -> String {
    const N: [&str; 6] = ["a", "b", "c", "d", "e1", "f"];
    N.get(i).map_or_else(|| format!("g{i}"), |s| s.to_string())
}

/// Signs making every edge word positive; fails on an edge equivalent to the
/// identity.
pub fn check_edges_positive_or_flip(o: &OrderOracle, edge_words: &[Word]) -> Result<Vec<i8>, OrderError> {
    let e = Word::identity();
    edge_words
        .iter()
        .enumerate()
        .map(|(i, w)| match o.compare(w, &e)? {
            Comparison::Greater => Ok(1),
            Comparison::Less => Ok(-1),
            Comparison::Equivalent => Err(OrderError::EdgeEquivalentToUnit(i)),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// JSON order specifications

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Int(i64),
    Text(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Scalar(ScalarSpec),
    Coords(Vec<ScalarSpec>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Named(String),
    Explicit { polynomial: Vec<ScalarSpec>, interval: [ScalarSpec; 2], name: Option<String> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderSpec {
    pub backend: String,
    #[serde(default)]
    pub rank: Option<usize>,
    #[serde(default)]
    pub generators: Option<Vec<String>>,
    #[serde(default)]
    pub field: Option<FieldSpec>,
    #[serde(default)]
    pub functionals: Option<Vec<Vec<CoefficientSpec>>>,
    #[serde(default)]
    pub h1: Option<Vec<CoefficientSpec>>,
    #[serde(default)]
    pub depth2: Option<Vec<CoefficientSpec>>,
    #[serde(default)]
    pub relator: Option<Vec<i64>>,
    #[serde(default)]
    pub table: Option<Vec<(String, i64)>>,
}

fn scalar(s: &ScalarSpec) -> Result<BigRational, OrderError> {
    match s {
        ScalarSpec::Int(i) => Ok(rat(*i)),
        ScalarSpec::Text(t) => Ok(parse_rational(t)?),
    }
}

pub fn scalar_spec(r: &BigRational) -> ScalarSpec {
    if r.is_integer() {
        if let Some(i) = r.to_integer().to_i64() {
            return ScalarSpec::Int(i);
        }
    }
    ScalarSpec::Text(format_rational(r))
}

pub fn coefficient_spec(x: &AlgebraicNumber) -> CoefficientSpec {
    if x.is_rational() {
        CoefficientSpec::Scalar(scalar_spec(&x.coords()[0]))
    } else {
        let mut c: Vec<BigRational> = x.coords().to_vec();
        while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        CoefficientSpec::Coords(c.iter().map(scalar_spec).collect())
    }
}

impl FieldSpec {
    pub fn build(&self, precision_bits: u32) -> Result<Arc<Field>, OrderError> {
        let f = match self {
            FieldSpec::Named(n) => match n.as_str() {
                "Q" | "rational" => Field::rationals(),
                "sqrt2" => Field::sqrt2(),
                "lambda6" => Field::lambda6(),
                other => return Err(OrderError::Spec(format!("unknown field `{other}`"))),
            },
            FieldSpec::Explicit { polynomial, interval, name } => {
                let p = Poly::new(polynomial.iter().map(scalar).collect::<Result<_, _>>()?);
                Field::new(
                    name.clone().unwrap_or_else(|| "custom".into()),
                    p,
                    scalar(&interval[0])?,
                    scalar(&interval[1])?,
                    precision_bits,
                )?
            }
        };
        if precision_bits > 128 {
            return Ok(f.with_precision(precision_bits)?);
        }
        Ok(f)
    }
}

fn coefficient(field: &Arc<Field>, c: &CoefficientSpec) -> Result<AlgebraicNumber, OrderError> {
    match c {
        CoefficientSpec::Scalar(s) => Ok(AlgebraicNumber::from_rational(field, scalar(s)?)),
        CoefficientSpec::Coords(v) => {
            Ok(AlgebraicNumber::new(field, v.iter().map(scalar).collect::<Result<_, _>>()?)?)
        }
    }
}

fn functional(field: &Arc<Field>, v: &[CoefficientSpec]) -> Result<Functional, OrderError> {
    Ok(Functional(v.iter().map(|c| coefficient(field, c)).collect::<Result<_, _>>()?))
}

impl OrderSpec {
    pub fn build(&self, precision_bits: u32) -> Result<OrderOracle, OrderError> {
        let field = match &self.field {
            Some(f) => f.build(precision_bits)?,
            None => Field::lambda6(),
        };
        let gens = |rank: usize| -> Result<GeneratorSet, OrderError> {
            match &self.generators {
                Some(g) => Ok(GeneratorSet::new(g.clone())?),
                None => Ok(GeneratorSet::new((0..rank).map(default_name))?),
            }
        };
        match self.backend.as_str() {
            "zn" => {
                let fs = self.functionals.as_ref().ok_or_else(|| OrderError::Spec("zn needs `functionals`".into()))?;
                let rank = self.rank.or_else(|| fs.first().map(Vec::len)).unwrap_or(0);
                let chain = FunctionalChain::new(
                    rank,
                    fs.iter().map(|f| functional(&field, f)).collect::<Result<_, _>>()?,
                )?;
                OrderOracle::new(gens(rank)?, OrderBackend::Zn(chain))
            }
            "surface_lex" => {
                let h1 = self.h1.as_ref().ok_or_else(|| OrderError::Spec("surface_lex needs `h1`".into()))?;
                let rank = self.rank.unwrap_or(h1.len());
                let d2 = self.depth2.as_ref().map(|d| functional(&field, d)).transpose()?;
                let s = SurfaceLexOrder::new(rank, functional(&field, h1)?, d2, self.relator.clone())?;
                OrderOracle::new(gens(rank)?, OrderBackend::SurfaceLex(s))
            }
            "user_table" => {
                let g = gens(self.rank.unwrap_or(1))?;
                let entries = self
                    .table
                    .as_ref()
                    .ok_or_else(|| OrderError::Spec("user_table needs `table`".into()))?
                    .iter()
                    .map(|(w, r)| Ok((g.parse(w)?, *r)))
                    .collect::<Result<Vec<_>, OrderError>>()?;
                OrderOracle::new(g, OrderBackend::UserTable(UserTable::new(entries)?))
            }
            other => Err(OrderError::Spec(format!("unknown backend `{other}`"))),
        }
    }

    pub fn from_json(text: &str, precision_bits: u32) -> Result<OrderOracle, OrderError> {
        let spec: OrderSpec = serde_json::from_str(text).map_err(|e| OrderError::Spec(e.to_string()))?;
        spec.build(precision_bits)
    }
}

/// Checks whether an oracle's leading functional is positive on a vector.
pub fn leading_sign(o: &OrderOracle, v: &[i64]) -> Option<Ordering> {
    let c = NilCoords { linear: v.to_vec(), quadratic: vec![0; pair_count(v.len())] };
    o.leading_value(&c).map(|x| x.sign())
}

pub fn vector_is_positive_integer(v: &[i64]) -> bool {
    v.iter().any(|&x| x != 0) && v.iter().all(|&x| x >= 0)
}

/// Nonnegative rational check helper used by feasibility code.
pub fn is_nonneg(r: &BigRational) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebraic::rat;

    fn sqrt2_chain() -> FunctionalChain {
        let f = Field::sqrt2();
        FunctionalChain::new(
            2,
            vec![Functional(vec![AlgebraicNumber::from_int(&f, 1), AlgebraicNumber::generator_power(&f, 1)])],
        )
        .unwrap()
    }

    fn int_chain(rows: &[&[i64]]) -> FunctionalChain {
        let f = Field::rationals();
        FunctionalChain::new(rows[0].len(), rows.iter().map(|r| Functional::from_ints(&f, r)).collect()).unwrap()
    }

    #[test]
    fn zn_compare_examples() {
        let o = OrderOracle::zn(sqrt2_chain());
        let g = o.generators().clone();
        let a = g.parse("a").unwrap();
        let b = g.parse("b").unwrap();
        assert_eq!(o.compare(&a, &b).unwrap(), Comparison::Less);
        let lex = OrderOracle::zn(int_chain(&[&[0, 1], &[1, 0]]));
        assert_eq!(lex.compare(&a.pow(5), &b).unwrap(), Comparison::Less);
    }

    #[test]
    fn archimedean_and_kernel_examples() {
        assert_eq!(is_archimedean(&sqrt2_chain()), Ok(true));
        assert_eq!(kernel_generator(&sqrt2_chain()), None);
        let c = int_chain(&[&[0, 1], &[1, 0]]);
        assert_eq!(is_archimedean(&c), Ok(false));
        assert_eq!(kernel_generator(&c), Some(vec![1, 0]));
        let c = int_chain(&[&[1, 1], &[1, 0]]);
        assert_eq!(is_archimedean(&c), Ok(false));
        assert_eq!(kernel_generator(&c), Some(vec![1, -1]));
        let partial = int_chain(&[&[1, 1]]);
        assert!(matches!(is_archimedean(&partial), Err(OrderError::NotTotal(_))));
    }

    #[test]
    fn kernel_of_rows_finds_rational_kernel() {
        let rows = vec![vec![rat(2), rat(4), rat(-2)]];
        let k = kernel_of_rows(&rows);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(2 * v[0] + 4 * v[1] - 2 * v[2], 0);
        }
    }

    #[test]
    fn edge_positivity_flips_negative_edges() {
        let o = OrderOracle::zn(sqrt2_chain());
        let g = o.generators().clone();
        let words = vec![g.parse("a").unwrap(), g.parse("b^-1").unwrap(), g.parse("a b").unwrap()];
        assert_eq!(check_edges_positive_or_flip(&o, &words).unwrap(), vec![1, -1, 1]);
        let bad = vec![g.parse("a b a^-1 b^-1").unwrap()];
        assert_eq!(check_edges_positive_or_flip(&o, &bad), Err(OrderError::EdgeEquivalentToUnit(0)));
    }

    #[test]
    fn spec_parsing() {
        let o = OrderSpec::from_json(
            r#"{"backend":"zn","field":"sqrt2","functionals":[[1,[0,1]]]}"#,
            128,
        )
        .unwrap();
        assert_eq!(o.rank(), 2);
        assert!(OrderSpec::from_json(r#"{"backend":"nope"}"#, 128).is_err());
        let t = OrderSpec::from_json(
            r#"{"backend":"user_table","generators":["a"],"table":[["e",0],["a",1],["a^-1",-1]]}"#,
            128,
        )
        .unwrap();
        let a = t.generators().parse("a").unwrap();
        assert_eq!(t.compare(&a, &Word::identity()).unwrap(), Comparison::Greater);
        assert!(matches!(t.compare(&a.pow(2), &a), Err(OrderError::NotInTable(_))));
    }
}
