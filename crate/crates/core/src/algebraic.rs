//! Exact arithmetic in a real number field `Q(λ)`, where `λ` is a real root of
//! a monic rational polynomial singled out by an isolating interval.
//!
//! Elements are stored in the power basis `1, λ, ..., λ^(n-1)`. Signs are
//! decided exactly: a floating-point filter handles the easy cases, a
//! gcd/Sturm test detects exact zeros, and rational interval bisection settles
//! everything else.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("defining polynomial must be monic of degree >= 1")]
    NotMonic,
    #[error("defining polynomial has a rational root {0}")]
    RationalRoot(String),
    #[error("defining polynomial is not squarefree")]
    NotSquarefree,
    #[error("interval [{0}, {1}] isolates {2} roots, expected exactly one")]
    NotIsolating(String, String, usize),
    #[error("element is not invertible in this field")]
    NotInvertible,
    #[error("coordinate vector has length {got}, field degree is {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("cannot parse rational `{0}`")]
    BadRational(String),
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat2(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<BigRational, FieldError> {
    let s = s.trim();
    let bad = || FieldError::BadRational(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Dense univariate polynomial over Q, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<BigRational>);

impl Poly {
    pub fn new(mut c: Vec<BigRational>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly(c)
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&x| rat(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("zero polynomial has no leading coefficient")
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        Poly::new((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(vec![]);
        }
        let mut out = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: &BigRational) -> Poly {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (Poly(vec![]), Poly::new(r));
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        let lead = d.lead().clone();
        for k in (0..q.len()).rev() {
            let coef = &r[k + dd] / &lead;
            if !coef.is_zero() {
                for (i, c) in d.0.iter().enumerate() {
                    r[k + i] -= &coef * c;
                }
            }
            q[k] = coef;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead().clone();
        self.scale(&(BigRational::one() / l))
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i64))
                .collect(),
        )
    }

    /// Sturm sequence of a squarefree polynomial.
    fn sturm(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq.retain(|p| !p.is_zero());
        seq
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots(&self, lo: &BigRational, hi: &BigRational) -> usize {
        if self.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let sq = {
            let g = self.gcd(&self.derivative());
            if g.degree() == Some(0) {
                self.clone()
            } else {
                self.divrem(&g).0
            }
        };
        let seq = sq.sturm();
        let changes = |x: &BigRational| {
            let mut last = 0i32;
            let mut n = 0;
            for p in &seq {
                let v = p.eval(x);
                let s = if v.is_positive() { 1 } else if v.is_negative() { -1 } else { 0 };
                if s != 0 {
                    if last != 0 && s != last {
                        n += 1;
                    }
                    last = s;
                }
            }
            n
        };
        let (a, b): (usize, usize) = (changes(lo), changes(hi));
        a.saturating_sub(b)
    }
}

/// Closed rational interval.
#[derive(Clone, Debug)]
struct Interval {
    lo: BigRational,
    hi: BigRational,
}

impl Interval {
    fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        Interval { lo, hi }
    }
}

/// A real number field `Q[x]/(f)` with a chosen real embedding.
#[derive(Debug)]
pub struct Field {
    name: String,
    poly: Poly,
    lo: BigRational,
    hi: BigRational,
    approx_powers: Vec<f64>,
}

impl PartialEq for Field {
    fn eq(&self, o: &Self) -> bool {
        self.poly == o.poly && self.lo <= o.hi && o.lo <= self.hi
    }
}

impl Field {
    /// Builds the field and refines the isolating interval to the requested
    /// number of bits.
    pub fn new(
        name: impl Into<String>,
        poly: Poly,
        lo: BigRational,
        hi: BigRational,
        precision_bits: u32,
    ) -> Result<Arc<Field>, FieldError> {
        let deg = poly.degree().ok_or(FieldError::NotMonic)?;
        if deg == 0 || !poly.lead().is_one() {
            return Err(FieldError::NotMonic);
        }
        if deg > 1 {
            if let Some(r) = rational_root(&poly) {
                return Err(FieldError::RationalRoot(format_rational(&r)));
            }
            if poly.gcd(&poly.derivative()).degree() != Some(0) {
                return Err(FieldError::NotSquarefree);
            }
        }
        let roots = poly.count_roots(&lo, &hi);
        if roots != 1 || poly.eval(&lo).is_zero() {
            return Err(FieldError::NotIsolating(format_rational(&lo), format_rational(&hi), roots));
        }
        let mut field = Field { name: name.into(), poly, lo, hi, approx_powers: vec![] };
        let target = BigRational::new(BigInt::one(), BigInt::one() << precision_bits.max(8) as usize);
        while &field.hi - &field.lo > target {
            field.bisect();
        }
        let mid = rat_to_f64(&((&field.lo + &field.hi) / rat(2)));
        field.approx_powers = (0..deg).map(|k| mid.powi(k as i32)).collect();
        Ok(Arc::new(field))
    }

    /// `Q` itself, presented as `Q[x]/(x)`.
    pub fn rationals() -> Arc<Field> {
        Field::new("Q", Poly::from_ints(&[0, 1]), rat(-1), rat(1), 8).expect("x has a root in (-1, 1]")
    }

    /// `Q(√2)`.
    pub fn sqrt2() -> Arc<Field> {
        Field::new("sqrt2", Poly::from_ints(&[-2, 0, 1]), rat(1), rat(2), 128).expect("valid field")
    }

    /// `Q(λ)` with `λ^6 = λ + 1`, `λ ∈ (1, 2)`.
    pub fn lambda6() -> Arc<Field> {
        Field::new("lambda6", Poly::from_ints(&[-1, -1, 0, 0, 0, 0, 1]), rat(1), rat(2), 128)
            .expect("valid field")
    }

    pub fn with_precision(&self, bits: u32) -> Result<Arc<Field>, FieldError> {
        Field::new(self.name.clone(), self.poly.clone(), self.lo.clone(), self.hi.clone(), bits)
    }

    fn bisect(&mut self) {
        let mid = (&self.lo + &self.hi) / rat(2);
        let fm = self.poly.eval(&mid);
        if fm.is_zero() {
            // only for degree one: the root is rational
            self.lo = &mid - BigRational::new(BigInt::one(), BigInt::one() << 400);
            self.hi = mid;
            return;
        }
        let flo = self.poly.eval(&self.lo);
        if flo.is_positive() == fm.is_positive() {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degree(&self) -> usize {
        self.poly.0.len() - 1
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn interval(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn approx_root(&self) -> f64 {
        self.approx_powers.get(1).copied().unwrap_or_else(|| rat_to_f64(&self.lo))
    }

    fn reduce(&self, p: &Poly) -> Vec<BigRational> {
        let r = if p.0.len() > self.degree() { p.rem(&self.poly) } else { p.clone() };
        let mut c = r.0;
        c.resize(self.degree(), BigRational::zero());
        c
    }

    /// Exact sign of `p(λ)` for a polynomial of degree below the field degree.
    fn sign_of(&self, coords: &[BigRational]) -> Ordering {
        if coords.iter().all(Zero::is_zero) {
            return Ordering::Equal;
        }
        // floating-point filter
        let mut v = 0.0f64;
        let mut mag = 0.0f64;
        let mut ok = true;
        for (c, m) in coords.iter().zip(&self.approx_powers) {
            let cf = rat_to_f64(c);
            if !cf.is_finite() {
                ok = false;
                break;
            }
            v += cf * m;
            mag += cf.abs() * m.abs();
        }
        if ok && mag.is_finite() && v.abs() > 1e-9 * mag {
            return if v > 0.0 { Ordering::Greater } else { Ordering::Less };
        }
        let p = Poly::new(coords.to_vec());
        if p.degree() == Some(0) {
            return p.0[0].cmp(&BigRational::zero());
        }
        let g = p.gcd(&self.poly);
        if g.degree().unwrap_or(0) >= 1 && g.count_roots(&self.lo, &self.hi) >= 1 {
            return Ordering::Equal;
        }
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        let flo_pos = self.poly.eval(&lo).is_positive();
        loop {
            let iv = eval_interval(&p, &Interval { lo: lo.clone(), hi: hi.clone() });
            if iv.lo.is_positive() {
                return Ordering::Greater;
            }
            if iv.hi.is_negative() {
                return Ordering::Less;
            }
            let mid = (&lo + &hi) / rat(2);
            let fm = self.poly.eval(&mid);
            if fm.is_zero() {
                return p.eval(&mid).cmp(&BigRational::zero());
            }
            if fm.is_positive() == flo_pos {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
}

fn eval_interval(p: &Poly, x: &Interval) -> Interval {
    let mut acc = Interval::point(BigRational::zero());
    for c in p.0.iter().rev() {
        acc = acc.mul(x).add(&Interval::point(c.clone()));
    }
    acc
}

/// Any rational root of a monic polynomial (rational root theorem after
/// clearing denominators).
fn rational_root(p: &Poly) -> Option<BigRational> {
    use num_integer::Integer;
    let lcm = p.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.0.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    if ints[0].is_zero() {
        return Some(BigRational::zero());
    }
    let divisors = |n: &BigInt| -> Vec<BigInt> {
        let n = n.abs();
        let small = n.to_u64().filter(|&v| v <= 1_000_000);
        match small {
            Some(v) => (1..=v).filter(|d| v % d == 0).map(BigInt::from).collect(),
            None => vec![BigInt::one()],
        }
    };
    for a in divisors(&ints[0]) {
        for b in divisors(ints.last().unwrap()) {
            for s in [1i64, -1] {
                let r = BigRational::new(&a * BigInt::from(s), b.clone());
                if p.eval(&r).is_zero() {
                    return Some(r);
                }
            }
        }
    }
    None
}

/// An element of a [`Field`].
#[derive(Clone)]
pub struct AlgebraicNumber {
    field: Arc<Field>,
    coords: Vec<BigRational>,
}

impl fmt::Debug for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (≈{})", self, self.to_f64())
    }
}

impl fmt::Display for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = format_rational(c);
            terms.push(match k {
                0 => c,
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{k}"),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl AlgebraicNumber {
    pub fn new(field: &Arc<Field>, coords: Vec<BigRational>) -> Result<Self, FieldError> {
        if coords.len() > field.degree() {
            return Err(FieldError::BadLength { expected: field.degree(), got: coords.len() });
        }
        let mut coords = coords;
        coords.resize(field.degree(), BigRational::zero());
        Ok(Self { field: field.clone(), coords })
    }

    pub fn zero(field: &Arc<Field>) -> Self {
        Self { field: field.clone(), coords: vec![BigRational::zero(); field.degree()] }
    }

    pub fn from_rational(field: &Arc<Field>, r: BigRational) -> Self {
        let mut x = Self::zero(field);
        x.coords[0] = r;
        x
    }

    pub fn from_int(field: &Arc<Field>, n: i64) -> Self {
        Self::from_rational(field, rat(n))
    }

    /// `λ^k` reduced into the power basis.
    pub fn generator_power(field: &Arc<Field>, k: usize) -> Self {
        let mut c = vec![BigRational::zero(); k + 1];
        c[k] = BigRational::one();
        Self { field: field.clone(), coords: field.reduce(&Poly::new(c)) }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coords.iter().skip(1).all(Zero::is_zero)
    }

    pub fn sign(&self) -> Ordering {
        self.field.sign_of(&self.coords)
    }

    pub fn to_f64(&self) -> f64 {
        self.coords
            .iter()
            .zip(&self.field.approx_powers)
            .map(|(c, m)| rat_to_f64(c) * m)
            .sum()
    }

    fn check(&self, o: &Self) {
        assert!(
            Arc::ptr_eq(&self.field, &o.field) || *self.field == *o.field,
            "mixing elements of different fields"
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        Self {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.check(o);
        Self {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self { field: self.field.clone(), coords: self.coords.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self { field: self.field.clone(), coords: self.coords.iter().map(|a| a * s).collect() }
    }

    pub fn scale_int(&self, s: i64) -> Self {
        self.scale(&rat(s))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let p = Poly::new(self.coords.clone()).mul(&Poly::new(o.coords.clone()));
        Self { field: self.field.clone(), coords: self.field.reduce(&p) }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inverse(&self) -> Result<Self, FieldError> {
        let p = Poly::new(self.coords.clone());
        if p.is_zero() {
            return Err(FieldError::NotInvertible);
        }
        // invariant: r_i = s_i * p (mod f)
        let (mut r0, mut r1) = (self.field.poly.clone(), p);
        let (mut s0, mut s1) = (Poly(vec![]), Poly::from_ints(&[1]));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() != Some(0) {
            return Err(FieldError::NotInvertible);
        }
        let inv = s0.scale(&(BigRational::one() / &r0.0[0]));
        Ok(Self { field: self.field.clone(), coords: self.field.reduce(&inv) })
    }

    pub fn div(&self, o: &Self) -> Result<Self, FieldError> {
        Ok(self.mul(&o.inverse()?))
    }
}

impl PartialEq for AlgebraicNumber {
    fn eq(&self, o: &Self) -> bool {
        self.coords == o.coords
    }
}

impl Eq for AlgebraicNumber {}

impl PartialOrd for AlgebraicNumber {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for AlgebraicNumber {
    fn cmp(&self, o: &Self) -> Ordering {
        if self.coords == o.coords {
            return Ordering::Equal;
        }
        self.sub(o).sign()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_squares_to_two() {
        let f = Field::sqrt2();
        let s = AlgebraicNumber::generator_power(&f, 1);
        assert_eq!(s.mul(&s), AlgebraicNumber::from_int(&f, 2));
        assert!((s.to_f64() - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn lambda6_relation_and_root_location() {
        let f = Field::lambda6();
        let l = AlgebraicNumber::generator_power(&f, 1);
        let l6 = AlgebraicNumber::generator_power(&f, 6);
        assert_eq!(l6, l.add(&AlgebraicNumber::from_int(&f, 1)));
        let x = l.to_f64();
        assert!(x > 1.0 && x < 2.0);
        assert!((x.powi(6) - x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_sign_beyond_float_resolution() {
        // 577/408 approximates √2 to about 2e-6; 665857/470832 to 1.6e-12.
        let f = Field::sqrt2();
        let s = AlgebraicNumber::generator_power(&f, 1);
        let a = AlgebraicNumber::from_rational(&f, rat2(665857, 470832));
        assert_eq!(s.cmp(&a), Ordering::Less);
        let tiny = s.sub(&a).scale(&rat(1_000_000));
        assert_eq!(tiny.sign(), Ordering::Less);
        // λ-field element near zero: 1 + λ - λ^6 == 0
        let g = Field::lambda6();
        let z = AlgebraicNumber::from_int(&g, 1)
            .add(&AlgebraicNumber::generator_power(&g, 1))
            .sub(&AlgebraicNumber::generator_power(&g, 6));
        assert_eq!(z.sign(), Ordering::Equal);
    }

    #[test]
    fn inverse_round_trips() {
        let f = Field::lambda6();
        let x = AlgebraicNumber::new(&f, vec![rat(3), rat(-1), rat2(1, 2), rat(0), rat(2)]).unwrap();
        let y = x.inverse().unwrap();
        assert_eq!(x.mul(&y), AlgebraicNumber::from_int(&f, 1));
        assert!(AlgebraicNumber::zero(&f).inverse().is_err());
    }

    #[test]
    fn rejects_bad_fields() {
        assert_eq!(
            Field::new("x", Poly::from_ints(&[-4, 0, 1]), rat(1), rat(3), 64).unwrap_err(),
            FieldError::RationalRoot("2".into())
        );
        assert!(matches!(
            Field::new("x", Poly::from_ints(&[-2, 0, 1]), rat(-2), rat(2), 64),
            Err(FieldError::NotIsolating(..))
        ));
        assert!(matches!(
            Field::new("x", Poly::from_ints(&[-2, 0, 2]), rat(1), rat(2), 64),
            Err(FieldError::NotMonic)
        ));
    }

    #[test]
    fn sturm_counts_roots() {
        let p = Poly::from_ints(&[-2, 0, 1]);
        assert_eq!(p.count_roots(&rat(-2), &rat(2)), 2);
        assert_eq!(p.count_roots(&rat(0), &rat(2)), 1);
        let q = Poly::from_ints(&[-1, -1, 0, 0, 0, 0, 1]);
        assert_eq!(q.count_roots(&rat(-10), &rat(10)), 2);
    }
}
