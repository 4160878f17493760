//! Poincaré disk geometry and the regular `4g`-gon model of a surface.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::complex::Triangulation2;
use crate::words::Word;

pub type Point = Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("a hyperbolic model needs genus at least 2, got {0}")]
    NotHyperbolic(i64),
    #[error("the triangulation has no usable polygon layout: {0}")]
    Layout(String),
    #[error("side-pairing relations fail: residual {0:e}")]
    Residual(f64),
}

/// Orientation-preserving disk isometry `z -> (a z + b) / (conj(b) z + conj(a))`
/// with `|a|^2 - |b|^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub b: Complex64,
}

impl Mobius {
    pub fn identity() -> Self {
        Mobius { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0) }
    }

    /// Hyperbolic translation taking `0` to `p`.
    pub fn translation(p: Point) -> Self {
        let s = (1.0 - p.norm_sqr()).sqrt();
        Mobius { a: Complex64::new(1.0 / s, 0.0), b: p / s }
    }

    pub fn rotation(theta: f64) -> Self {
        Mobius { a: Complex64::from_polar(1.0, theta / 2.0), b: Complex64::new(0.0, 0.0) }
    }

    pub fn apply(&self, z: Point) -> Point {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &Mobius) -> Mobius {
        Mobius { a: self.a * o.a + self.b * o.b.conj(), b: self.a * o.b + self.b * o.a.conj() }
    }

    pub fn inverse(&self) -> Mobius {
        Mobius { a: self.a.conj(), b: -self.b }
    }

    /// Rescales to unit determinant; left alone at large norms, where the
    /// determinant cancels catastrophically.
    pub fn normalized(&self) -> Mobius {
        if self.a.norm() > 1e4 {
            return *self;
        }
        let d = (self.a.norm_sqr() - self.b.norm_sqr()).sqrt();
        Mobius { a: self.a / d, b: self.b / d }
    }

    pub fn norm(&self) -> f64 {
        self.a.norm().max(self.b.norm())
    }

    /// Distance to `o` as projective maps.
    pub fn distance(&self, o: &Mobius) -> f64 {
        let plus = (self.a - o.a).norm() + (self.b - o.b).norm();
        let minus = (self.a + o.a).norm() + (self.b + o.b).norm();
        plus.min(minus)
    }

    /// The isometry taking `p -> p2` and `q -> q2`; the two pairs must be at
    /// equal distance.
    pub fn two_point(p: Point, q: Point, p2: Point, q2: Point) -> Mobius {
        let t1 = Mobius::translation(p);
        let t2 = Mobius::translation(p2);
        let u = t1.inverse().apply(q);
        let u2 = t2.inverse().apply(q2);
        let theta = (u2 / u).arg();
        t2.compose(&Mobius::rotation(theta)).compose(&t1.inverse())
    }

    /// Fixed points on the circle of a hyperbolic element.
    pub fn fixed_points(&self) -> Option<(Point, Point)> {
        let (a, b) = (self.a, self.b);
        let trace = 2.0 * a.re;
        if trace.abs() <= 2.0 + 1e-12 || b.norm() == 0.0 {
            return None;
        }
        // conj(b) z^2 + (conj(a) - a) z - b = 0
        let qa = b.conj();
        let qb = a.conj() - a;
        let qc = -b;
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        Some(((-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)))
    }
}

pub fn distance(z: Point, w: Point) -> f64 {
    let r = (z - w).norm() / (Complex64::new(1.0, 0.0) - z.conj() * w).norm();
    2.0 * r.min(1.0 - 1e-16).atanh()
}

/// Point a fraction `s` of the way from `z` to `w` along their geodesic.
pub fn interpolate(z: Point, w: Point, s: f64) -> Point {
    let t = Mobius::translation(z);
    let w1 = t.inverse().apply(w);
    let r = w1.norm();
    if r == 0.0 {
        return z;
    }
    let p = w1 / r * (s * r.min(1.0 - 1e-16).atanh()).tanh();
    t.apply(p)
}

/// Angle in `[0, 2π)`.
pub fn normalize_angle(x: f64) -> f64 {
    x.rem_euclid(2.0 * PI)
}

/// Length of the counterclockwise arc from `a` to `b`.
pub fn ccw(a: f64, b: f64) -> f64 {
    normalize_angle(b - a)
}

pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = ccw(a, b);
    d.min(2.0 * PI - d)
}

/// Whether `z` lies on the side of the geodesic `(u, v)` facing the
/// counterclockwise arc from `u` to `v`.
pub fn on_ccw_side(u: f64, v: f64, z: Point) -> bool {
    let t = Mobius::translation(z).inverse();
    let u1 = t.apply(Complex64::from_polar(1.0, u)).arg();
    let v1 = t.apply(Complex64::from_polar(1.0, v)).arg();
    ccw(u1, v1) > PI
}

/// Side-pairing model of a surface with a fan layout in its `4g`-gon.
#[derive(Clone, Debug)]
pub struct HyperbolicModel {
    genus: i64,
    vertices: Vec<Point>,
    corner_positions: Vec<[Point; 3]>,
    generators: Vec<Mobius>,
    pairings: Vec<Mobius>,
    residual: f64,
}

const TOLERANCE: f64 = 1e-9;

impl HyperbolicModel {
    pub fn build(t: &Triangulation2) -> Result<Self, ModelError> {
        let g = t.genus();
        if g < 2 {
            return Err(ModelError::NotHyperbolic(g));
        }
        let poly = t.polygon().ok_or_else(|| ModelError::Layout("no polygon section".into()))?;
        let n = poly.sides.len();
        if n as i64 != 4 * g {
            return Err(ModelError::Layout(format!("{n} sides for genus {g}")));
        }
        // Regular n-gon with interior angle 2π/n: cosh R = cot(π/n) cot(π/n).
        let cot = 1.0 / (PI / n as f64).tan();
        let big_r = (cot * cot).acosh();
        let r = (big_r / 2.0).tanh();
        let vertices: Vec<Point> = (0..n).map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect();
        // Pairing across side k: the isometry taking the partner side onto it.
        let mut pairings = vec![Mobius::identity(); n];
        for k in 0..n {
            let s = poly.sides[k];
            let j = (0..n)
                .find(|&j| j != k && poly.sides[j] == s.reversed())
                .ok_or_else(|| ModelError::Layout(format!("side {k} has no partner")))?;
            pairings[k] = Mobius::two_point(vertices[(j + 1) % n], vertices[j], vertices[k], vertices[(k + 1) % n]);
        }
        // Tiles within four pairings of the base polygon; the one with its
        // corner 0 at polygon vertex k is the image under the label of k.
        let mut tiles = vec![Mobius::identity()];
        let mut seen: HashSet<(i64, i64)> = HashSet::new();
        seen.insert((0, 0));
        let mut frontier = tiles.clone();
        for _ in 0..4 {
            let mut next = Vec::new();
            for m in &frontier {
                for p in &pairings {
                    let m2 = m.compose(p).normalized();
                    let c = m2.apply(Complex64::new(0.0, 0.0));
                    let key = ((c.re * 1e7).round() as i64, (c.im * 1e7).round() as i64);
                    if seen.insert(key) {
                        next.push(m2);
                    }
                }
            }
            tiles.extend(next.iter().copied());
            frontier = next;
        }
        let mut labels = Vec::with_capacity(n + 1);
        for k in 0..n {
            let m = tiles
                .iter()
                .find(|m| (m.apply(vertices[0]) - vertices[k]).norm() < 1e-7)
                .ok_or_else(|| ModelError::Layout(format!("no tile with corner 0 at vertex {k}")))?;
            labels.push(*m);
        }
        labels.push(Mobius::identity());
        let pres = t.presentation();
        let mut generators: Vec<Option<Mobius>> = vec![None; pres.rank()];
        let mut residual: f64 = 0.0;
        for k in 0..n {
            let step = labels[k].inverse().compose(&labels[k + 1]);
            let w = pres.side_word(poly.sides[k]);
            if w.len() != 1 {
                return Err(ModelError::Layout(format!("polygon side {k} is not a generator")));
            }
            let l = w.letters()[0];
            let m = if l.inverse { step.inverse() } else { step };
            match generators[l.gen] {
                Some(prev) => residual = residual.max(prev.distance(&m)),
                None => generators[l.gen] = Some(m),
            }
        }
        let generators: Vec<Mobius> = generators
            .into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| ModelError::Layout(format!("generator {i} is not a polygon side"))))
            .collect::<Result<_, _>>()?;
        let mut model = HyperbolicModel { genus: g, vertices, corner_positions: Vec::new(), generators, pairings, residual };
        for rel in &pres.relators {
            residual = residual.max(model.rho(rel).distance(&Mobius::identity()));
        }
        for (k, p) in model.pairings.iter().enumerate() {
            let j = (0..n).find(|&j| j != k && poly.sides[j] == poly.sides[k].reversed()).expect("partner");
            residual = residual.max(p.compose(&model.pairings[j]).distance(&Mobius::identity()));
        }
        let corner_positions: Vec<[Point; 3]> =
            poly.corners.iter().map(|c| [model.vertices[c[0]], model.vertices[c[1]], model.vertices[c[2]]]).collect();
        // Corner labels of the base lifts must sit at the laid-out vertices.
        for (ti, tri) in t.triangles().iter().enumerate() {
            let mut w = Word::identity();
            for c in 0..3 {
                let p = model.rho(&w).apply(model.vertices[0]);
                residual = residual.max((p - corner_positions[ti][c]).norm());
                w = w.mul(&pres.side_word(tri.sides[c]));
            }
        }
        model.corner_positions = corner_positions;
        model.residual = residual;
        if residual > TOLERANCE {
            return Err(ModelError::Residual(residual));
        }
        Ok(model)
    }

    pub fn genus(&self) -> i64 {
        self.genus
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn pairings(&self) -> &[Mobius] {
        &self.pairings
    }

    pub fn generators(&self) -> &[Mobius] {
        &self.generators
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Position of corner `c` of base triangle `t`.
    pub fn corner(&self, t: usize, c: usize) -> Point {
        self.corner_positions[t][c]
    }

    /// Holonomy of a word.
    pub fn rho(&self, w: &Word) -> Mobius {
        let mut m = Mobius::identity();
        for l in w.letters() {
            let g = self.generators[l.gen];
            m = m.compose(&if l.inverse { g.inverse() } else { g });
        }
        m.normalized()
    }
}
