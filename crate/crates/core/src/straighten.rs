//! Straightening: develop leaves into the disk, read off their endpoints at
//! infinity through the walls they cross, and compare the resulting
//! geodesic laminations.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebraic::{rat2, AlgebraicNumber};
use crate::floation2::{Crossing, Floation2Error, FunctionalSource, Label, LeafTrace, LevelSource, SurfaceLift, Tracer};
use crate::hyperbolic::{
    angular_distance, ccw, distance, interpolate, normalize_angle, on_ccw_side, HyperbolicModel, ModelError, Mobius,
    Point,
};
use crate::orders::Functional;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StraightenError {
    #[error("endpoint not within tolerance after {0} crossings")]
    NotConverged(usize),
    #[error("leaf endpoints coincide at angle {0}")]
    Degenerate(f64),
    #[error("empty lamination")]
    EmptyLamination,
    #[error("perturbed functional is not injective on the lattice")]
    InvalidPerturbation,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Floation(#[from] Floation2Error),
}

/// Holonomies needed to place lifted triangles.
#[derive(Clone, Debug)]
pub struct Developer {
    model: HyperbolicModel,
    /// Isometry from a triangle's placement to its neighbour's, per side.
    steps: Vec<[Mobius; 3]>,
    corner_rho: Vec<[Mobius; 3]>,
    edge_rho: Vec<Mobius>,
}

impl Developer {
    pub fn new(model: HyperbolicModel, lift: &SurfaceLift) -> Self {
        let tri = lift.triangulation();
        let id = Label::identity(lift.rank());
        let steps = (0..tri.num_triangles())
            .map(|t| [0, 1, 2].map(|k| model.rho(&lift.neighbor(t, &id, k).1.word)))
            .collect();
        let corner_rho =
            (0..tri.num_triangles()).map(|t| lift.corners(t, &id).map(|c| model.rho(&c.word))).collect();
        let edge_rho = tri.presentation().edge_words.iter().map(|w| model.rho(w)).collect();
        Developer { model, steps, corner_rho, edge_rho }
    }

    pub fn model(&self) -> &HyperbolicModel {
        &self.model
    }
}

/// A crossing placed in the disk, with the endpoints of its wall.
#[derive(Clone, Debug, Serialize)]
pub struct DevelopedCrossing {
    pub edge: usize,
    pub point: (f64, f64),
    pub wall: Option<(f64, f64)>,
}

/// Polyline of a developed leaf: `k` crossings give `k + 2` points and
/// `k + 1` segments, ordered from the backward end.
#[derive(Clone, Debug, Serialize)]
pub struct DevelopedLeaf {
    pub points: Vec<(f64, f64)>,
    pub crossings: Vec<DevelopedCrossing>,
    pub backward_crossings: usize,
    /// Whether the polyline starts (ends) at an exit point beyond the last
    /// backward (forward) crossing.
    pub backward_end: bool,
    pub forward_end: bool,
    /// Crossings placed precisely enough to resolve their walls.
    pub depth: usize,
    /// Hyperbolic length of the polyline over the distance between its ends.
    pub quasigeodesic_ratio: f64,
}

impl DevelopedLeaf {
    pub fn num_segments(&self) -> usize {
        self.points.len().saturating_sub(1)
    }
}

/// Placements beyond this norm overflow soon; development stops.
const MAX_NORM: f64 = 1e150;
/// Wall elements are conjugated by the placement, so their fixed points lose
/// about `norm^2` ulps; past this norm
/// walls are no longer resolved.
const PRECISE_NORM: f64 = 1e3;

fn pt(z: Point) -> (f64, f64) {
    (z.re, z.im)
}

fn to_point(p: (f64, f64)) -> Point {
    Point::new(p.0, p.1)
}

struct Ray {
    crossings: Vec<DevelopedCrossing>,
    end: Option<Point>,
    truncated: bool,
}

fn develop_ray<S: LevelSource>(
    dev: &Developer,
    tracer: &Tracer<'_, S>,
    trace: &LeafTrace<S::Value>,
    crossings: &[Crossing],
    forward: bool,
) -> Result<Ray, StraightenError> {
    let lift = tracer.lift();
    let tris = lift.triangulation().triangles();
    let mut m = dev.model.rho(&trace.start.1.word);
    let mut out = Vec::with_capacity(crossings.len());
    let place = |m: &Mobius, t: usize, k: usize, s: f64| {
        let side = tris[t].sides[k];
        let (tc, hc) = if side.sign > 0 { (k, (k + 1) % 3) } else { ((k + 1) % 3, k) };
        // Interpolate in the base polygon, where the corners are well inside
        // the disk, then place.
        let p = interpolate(dev.model.corner(t, tc), dev.model.corner(t, hc), s);
        (m.apply(p), tc)
    };
    for c in crossings {
        if m.norm() > MAX_NORM {
            return Ok(Ray { crossings: out, end: None, truncated: true });
        }
        let (t, _, k) = &c.from;
        let (p, tc) = place(&m, *t, *k, c.param_f64);
        let wall = if m.norm() < PRECISE_NORM {
            let rho_tail = m.compose(&dev.corner_rho[*t][tc]);
            let w = rho_tail.compose(&dev.edge_rho[c.edge]).compose(&rho_tail.inverse());
            w.fixed_points().map(|(u, v)| (normalize_angle(u.arg()), normalize_angle(v.arg())))
        } else {
            None
        };
        out.push(DevelopedCrossing { edge: c.edge, point: pt(p), wall });
        m = m.compose(&dev.steps[*t][*k]).normalized();
    }
    // Exit point of the last triangle reached.
    let (t, h, entry) = match crossings.last() {
        Some(c) => (c.into.0, c.into.1.clone(), Some(c.into.2)),
        None => (trace.start.0, trace.start.1.clone(), None),
    };
    let end = match tracer.segment(t, &h, &trace.level)? {
        Some(seg) => seg
            .iter()
            .find(|s| match entry {
                Some(e) => s.side != e,
                None => s.ascending == forward,
            })
            .map(|s| place(&m, t, s.side, s.from_tail_f64).0),
        None => None,
    };
    Ok(Ray { crossings: out, end, truncated: false })
}

/// Places every lifted triangle of the trace in the disk.
pub fn develop_leaf<S: LevelSource>(
    dev: &Developer,
    tracer: &Tracer<'_, S>,
    trace: &LeafTrace<S::Value>,
) -> Result<DevelopedLeaf, StraightenError> {
    let f = develop_ray(dev, tracer, trace, &trace.forward, true)?;
    let b = develop_ray(dev, tracer, trace, &trace.backward, false)?;
    let mut points = Vec::new();
    let mut crossings = Vec::new();
    let backward_end = b.end.is_some() && !b.truncated;
    let forward_end = f.end.is_some() && !f.truncated;
    if let Some(e) = b.end.filter(|_| backward_end) {
        points.push(pt(e));
    }
    for c in b.crossings.iter().rev() {
        points.push(c.point);
        crossings.push(c.clone());
    }
    for c in &f.crossings {
        points.push(c.point);
        crossings.push(c.clone());
    }
    if let Some(e) = f.end.filter(|_| forward_end) {
        points.push(pt(e));
    }
    let precise: Vec<Point> = crossings.iter().filter(|c| c.wall.is_some()).map(|c| to_point(c.point)).collect();
    let length: f64 = precise.windows(2).map(|w| distance(w[0], w[1])).sum();
    let span = match (precise.first(), precise.last()) {
        (Some(a), Some(z)) => distance(*a, *z),
        _ => 0.0,
    };
    Ok(DevelopedLeaf {
        points,
        backward_crossings: b.crossings.len(),
        backward_end,
        forward_end,
        depth: crossings.iter().filter(|c| c.wall.is_some()).count(),
        crossings,
        quasigeodesic_ratio: if span > 0.0 { length / span } else { 1.0 },
    })
}

/// Counterclockwise arc `[start, start + len]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundaryArc {
    pub start: f64,
    pub len: f64,
}

impl BoundaryArc {
    pub fn contains_angle(&self, x: f64, tol: f64) -> bool {
        ccw(self.start, x) <= self.len + tol || ccw(x, self.start) <= tol
    }

    pub fn contains(&self, inner: &BoundaryArc, tol: f64) -> bool {
        ccw(self.start, inner.start) + inner.len <= self.len + tol || (inner.len <= tol && self.contains_angle(inner.start, tol))
    }

    pub fn midpoint(&self) -> f64 {
        normalize_angle(self.start + self.len / 2.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RayEstimate {
    pub angle: f64,
    /// Half-width of the smallest wall arc containing the endpoint.
    pub uncertainty: f64,
    pub walls: usize,
    pub depth: usize,
    pub nesting_violations: usize,
    pub containment_violations: usize,
}

/// Walls closer than this many crossings to the reference point are not used:
/// a wall is a chain of edges, not its axis, so points just past it may still
/// lie on the near side of the axis.
const SIDE_MARGIN: usize = 4;

fn estimate_ray(crossings: &[DevelopedCrossing], eps: f64) -> Result<RayEstimate, StraightenError> {
    let precise: Vec<usize> = (0..crossings.len()).filter(|&i| crossings[i].wall.is_some()).collect();
    let reference = precise.last().map(|&i| to_point(crossings[i].point));
    let mut arcs: Vec<(usize, BoundaryArc)> = Vec::new();
    if let (Some(r), Some(&last)) = (reference, precise.last()) {
        for &i in precise.iter().filter(|&&i| i + SIDE_MARGIN <= last) {
            let (u, v) = crossings[i].wall.expect("precise crossing");
            let arc = if on_ccw_side(u, v, r) {
                BoundaryArc { start: u, len: ccw(u, v) }
            } else {
                BoundaryArc { start: v, len: ccw(v, u) }
            };
            arcs.push((crossings[i].edge, arc));
        }
    }
    let best = arcs
        .iter()
        .map(|a| a.1)
        .min_by(|a, b| a.len.partial_cmp(&b.len).expect("finite arcs"))
        .ok_or(StraightenError::NotConverged(crossings.len()))?;
    if best.len >= eps {
        return Err(StraightenError::NotConverged(crossings.len()));
    }
    let angle = best.midpoint();
    let tol = 1e-9;
    let mut nesting = 0;
    for (i, (e, a)) in arcs.iter().enumerate() {
        if let Some((_, prev)) = arcs[..i].iter().rev().find(|(e2, _)| e2 == e) {
            if !prev.contains(a, tol) {
                nesting += 1;
            }
        }
    }
    let containment = arcs.iter().filter(|(_, a)| !a.contains_angle(angle, tol + best.len)).count();
    Ok(RayEstimate {
        angle,
        uncertainty: best.len / 2.0,
        walls: arcs.len(),
        depth: crossings.len(),
        nesting_violations: nesting,
        containment_violations: containment,
    })
}

/// Unordered pair of endpoint angles in `[0, 2π)`, stored with `a <= b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub a: f64,
    pub b: f64,
}

impl Geodesic {
    pub fn new(x: f64, y: f64) -> Self {
        let (x, y) = (normalize_angle(x), normalize_angle(y));
        if x <= y {
            Geodesic { a: x, b: y }
        } else {
            Geodesic { a: y, b: x }
        }
    }

    pub fn rotated(&self, delta: f64) -> Self {
        Geodesic::new(self.a + delta, self.b + delta)
    }

    /// Angular distance between endpoint pairs, minimized over matchings.
    pub fn distance(&self, o: &Geodesic) -> f64 {
        let straight = angular_distance(self.a, o.a).max(angular_distance(self.b, o.b));
        let swapped = angular_distance(self.a, o.b).max(angular_distance(self.b, o.a));
        straight.min(swapped)
    }

    /// Transverse crossing; pairs sharing an endpoint within `tol` do not
    /// cross.
    pub fn crosses(&self, o: &Geodesic, tol: f64) -> bool {
        for x in [self.a, self.b] {
            for y in [o.a, o.b] {
                if angular_distance(x, y) <= tol {
                    return false;
                }
            }
        }
        let inside = |x: f64| ccw(self.a, x) < ccw(self.a, self.b);
        inside(o.a) != inside(o.b)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointEstimate {
    pub geodesic: Geodesic,
    pub forward: RayEstimate,
    pub backward: RayEstimate,
}

/// Endpoints at infinity of a traced leaf, certified by nested wall arcs.
pub fn endpoint_estimate<S: LevelSource>(
    dev: &Developer,
    tracer: &Tracer<'_, S>,
    trace: &LeafTrace<S::Value>,
    eps: f64,
) -> Result<(EndpointEstimate, DevelopedLeaf), StraightenError> {
    let leaf = develop_leaf(dev, tracer, trace)?;
    let nb = leaf.backward_crossings;
    let fwd: Vec<DevelopedCrossing> = leaf.crossings[nb..].to_vec();
    let bwd: Vec<DevelopedCrossing> = leaf.crossings[..nb].iter().rev().cloned().collect();
    let forward = estimate_ray(&fwd, eps)?;
    let backward = estimate_ray(&bwd, eps)?;
    if angular_distance(forward.angle, backward.angle) < eps {
        return Err(StraightenError::Degenerate(forward.angle));
    }
    Ok((EndpointEstimate { geodesic: Geodesic::new(forward.angle, backward.angle), forward, backward }, leaf))
}

/// Start of a sampled leaf: base triangle and relative level between its
/// lowest and highest corner values.
#[derive(Clone, Debug, Serialize)]
pub struct SampleStart {
    pub triangle: usize,
    pub fraction: (i64, i64),
}

/// Deterministic starts at levels `m / 1009`, which avoid vertex values.
pub fn sample_starts(num_triangles: usize, n: usize, seed: u64) -> Vec<SampleStart> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| SampleStart { triangle: i % num_triangles, fraction: (rng.gen_range(1..1009), 1009) }).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicLamination {
    pub geodesics: Vec<Geodesic>,
    pub samples: usize,
    pub eps: f64,
    pub max_crossings: usize,
    pub source: String,
    /// Samples whose endpoints did not converge, with the reason.
    pub not_converged: Vec<(usize, String)>,
    /// Index pairs of geodesics with linked endpoints.
    pub crossing_pairs: Vec<(usize, usize)>,
    pub estimates: Vec<Option<EndpointEstimate>>,
    pub max_quasigeodesic_ratio: f64,
    pub total_crossings: usize,
}

impl GeodesicLamination {
    pub fn is_lamination(&self) -> bool {
        self.crossing_pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.geodesics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geodesics.is_empty()
    }
}

/// Per-sample outcome kept for rendering.
#[derive(Clone, Debug)]
pub struct SampleResult {
    pub leaf: Option<DevelopedLeaf>,
    pub estimate: Result<EndpointEstimate, StraightenError>,
    pub crossings: usize,
}

pub fn trace_samples<S>(
    dev: &Developer,
    tracer: &Tracer<'_, S>,
    starts: &[SampleStart],
    eps: f64,
    max_crossings: usize,
) -> Result<Vec<SampleResult>, StraightenError>
where
    S: LevelSource + Sync,
    S::Value: Send + Sync,
{
    let id = Label::identity(tracer.lift().rank());
    starts
        .par_iter()
        .map(|s| {
            let u = rat2(s.fraction.0, s.fraction.1);
            let y = tracer.level_in(s.triangle, &id, &u)?;
            let trace = tracer.trace(s.triangle, &id, &y, max_crossings)?;
            let n = trace.num_crossings();
            Ok(match endpoint_estimate(dev, tracer, &trace, eps) {
                Ok((e, leaf)) => SampleResult { leaf: Some(leaf), estimate: Ok(e), crossings: n },
                Err(e @ (StraightenError::NotConverged(_) | StraightenError::Degenerate(_))) => {
                    SampleResult { leaf: develop_leaf(dev, tracer, &trace).ok(), estimate: Err(e), crossings: n }
                }
                Err(e) => return Err(e),
            })
        })
        .collect()
}

/// Assembles converged samples into a lamination, merging duplicates and
/// recording linked pairs.
pub fn assemble(results: &[SampleResult], eps: f64, max_crossings: usize, source: &str) -> GeodesicLamination {
    let mut geodesics: Vec<Geodesic> = Vec::new();
    let mut not_converged = Vec::new();
    let mut ratio: f64 = 1.0;
    for (i, r) in results.iter().enumerate() {
        match &r.estimate {
            Ok(e) => {
                if !geodesics.iter().any(|g| g.distance(&e.geodesic) < eps) {
                    geodesics.push(e.geodesic);
                }
                if let Some(l) = &r.leaf {
                    ratio = ratio.max(l.quasigeodesic_ratio);
                }
            }
            Err(e) => not_converged.push((i, e.to_string())),
        }
    }
    geodesics.sort_by(|x, y| (x.a, x.b).partial_cmp(&(y.a, y.b)).expect("finite angles"));
    let mut crossing_pairs = Vec::new();
    for i in 0..geodesics.len() {
        for j in i + 1..geodesics.len() {
            if geodesics[i].crosses(&geodesics[j], eps) {
                crossing_pairs.push((i, j));
            }
        }
    }
    GeodesicLamination {
        geodesics,
        samples: results.len(),
        eps,
        max_crossings,
        source: source.to_string(),
        not_converged,
        crossing_pairs,
        estimates: results.iter().map(|r| r.estimate.as_ref().ok().cloned()).collect(),
        max_quasigeodesic_ratio: ratio,
        total_crossings: results.iter().map(|r| r.crossings).sum(),
    }
}

pub fn straighten_lamination<S>(
    dev: &Developer,
    tracer: &Tracer<'_, S>,
    starts: &[SampleStart],
    eps: f64,
    max_crossings: usize,
    source: &str,
) -> Result<GeodesicLamination, StraightenError>
where
    S: LevelSource + Sync,
    S::Value: Send + Sync,
{
    let r = trace_samples(dev, tracer, starts, eps, max_crossings)?;
    Ok(assemble(&r, eps, max_crossings, source))
}

/// Symmetric Hausdorff distance between endpoint-pair sets.
pub fn compare_laminations(l1: &[Geodesic], l2: &[Geodesic]) -> Result<f64, StraightenError> {
    if l1.is_empty() || l2.is_empty() {
        return Err(StraightenError::EmptyLamination);
    }
    let one_way = |x: &[Geodesic], y: &[Geodesic]| {
        x.iter().map(|g| y.iter().map(|h| g.distance(h)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    Ok(one_way(l1, l2).max(one_way(l2, l1)))
}

/// Adds `t` to the first coefficient of a functional.
pub fn perturb_functional(f: &Functional, t: &BigRational) -> Result<Functional, StraightenError> {
    let mut c = f.0.clone();
    let field = c[0].field().clone();
    c[0] = c[0].add(&AlgebraicNumber::from_rational(&field, t.clone()));
    let g = Functional(c);
    if !g.kernel().is_empty() {
        return Err(StraightenError::InvalidPerturbation);
    }
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationRow {
    pub size: f64,
    pub distance: f64,
    pub geodesics: usize,
    pub not_converged: usize,
}

/// Hausdorff distance between the base lamination and laminations of
/// perturbed functionals, one row per perturbation size.
pub fn perturb_and_compare(
    dev: &Developer,
    lift: &SurfaceLift,
    base: &Functional,
    sizes: &[BigRational],
    starts: &[SampleStart],
    eps: f64,
    max_crossings: usize,
) -> Result<(GeodesicLamination, Vec<PerturbationRow>), StraightenError> {
    let run = |f: Functional| -> Result<GeodesicLamination, StraightenError> {
        let src = FunctionalSource::new(f);
        let tracer = Tracer::new(lift, &src);
        straighten_lamination(dev, &tracer, starts, eps, max_crossings, "functional")
    };
    let base_lam = run(base.clone())?;
    let mut rows = Vec::new();
    for t in sizes {
        let lam = run(perturb_functional(base, t)?)?;
        rows.push(PerturbationRow {
            size: t.to_f64().unwrap_or(f64::NAN),
            distance: compare_laminations(&base_lam.geodesics, &lam.geodesics)?,
            geodesics: lam.len(),
            not_converged: lam.not_converged.len(),
        });
    }
    Ok((base_lam, rows))
}
