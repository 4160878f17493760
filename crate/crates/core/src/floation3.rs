//! Edge directions on one-vertex 3-dimensional triangulations: per-tetrahedron
//! order checks, link colouring, red curves and the regularity decision.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebraic::rat;
use crate::complex::{Direction, LinkSphere, Triangulation3};
use crate::orders::{check_edges_positive_or_flip, OrderError, OrderOracle};
use crate::words::abelianize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Floation3Error {
    #[error("direction has {got} entries for {want} edge classes")]
    WrongLength { got: usize, want: usize },
    #[error("direction entries must be +1 or -1")]
    BadSign,
    #[error("regularity ({regular}) and local orientation ({local}) disagree")]
    RegularityMismatch { regular: bool, local: bool },
    #[error("link colouring has {blue} blue and {black} black edges for {n} tetrahedra")]
    ColourCount { blue: usize, black: usize, n: usize },
    #[error("{red} red curves but {complement} complementary regions")]
    ComplementMismatch { red: usize, complement: usize },
    #[error("{edges} edge classes exceed the enumeration guard of {guard}")]
    GuardExceeded { edges: usize, guard: usize },
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// Orients each edge class so that its word is positive.
pub fn order_induced_direction(t: &Triangulation3, o: &OrderOracle) -> Result<Direction, Floation3Error> {
    Ok(Direction(check_edges_positive_or_flip(o, &t.presentation().edge_words)?))
}

/// Parses a `±1` vector such as `"1,-1,1"` or `"+ - +"`.
pub fn parse_direction(spec: &str, edges: usize) -> Result<Direction, Floation3Error> {
    let v: Vec<i8> = spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| match s {
            "1" | "+1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            _ => Err(Floation3Error::BadSign),
        })
        .collect::<Result<_, _>>()?;
    let d = Direction(v);
    check_shape(&d, edges)?;
    Ok(d)
}

fn check_shape(d: &Direction, edges: usize) -> Result<(), Floation3Error> {
    if d.0.len() != edges {
        return Err(Floation3Error::WrongLength { got: d.0.len(), want: edges });
    }
    if d.0.iter().any(|&s| s != 1 && s != -1) {
        return Err(Floation3Error::BadSign);
    }
    Ok(())
}

/// Corner ranks of a tetrahedron under a direction: `ranks[v]` is the number
/// of corners below `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TetStatus {
    pub tet: usize,
    pub total: bool,
    pub ranks: Option<[u8; 4]>,
}

/// Whether `u -> v` inside tetrahedron `tet` points up.
fn points_up(t: &Triangulation3, d: &Direction, tet: usize, u: usize, v: usize) -> bool {
    let (c, s) = t.oriented_sign(tet, u, v);
    s * d.0[c] > 0
}

/// The tournament on each tetrahedron's corners must be transitive.
pub fn validate_direction(t: &Triangulation3, d: &Direction) -> Result<Vec<TetStatus>, Floation3Error> {
    check_shape(d, t.num_edges())?;
    Ok((0..t.num_tetrahedra())
        .map(|tet| {
            let out: Vec<u8> =
                (0..4).map(|u| (0..4).filter(|&v| v != u && points_up(t, d, tet, u, v)).count() as u8).collect();
            let mut sorted = out.clone();
            sorted.sort_unstable();
            let total = sorted == [0, 1, 2, 3];
            TetStatus { tet, total, ranks: total.then(|| [3 - out[0], 3 - out[1], 3 - out[2], 3 - out[3]]) }
        })
        .collect())
}

/// Whether each link vertex is an outgoing germ.
pub fn outgoing_germs(link: &LinkSphere, d: &Direction) -> Vec<bool> {
    link.vertex_ends.iter().map(|&(c, head)| if d.0[c] > 0 { !head } else { head }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkColouring {
    /// `true` for blue.
    pub blue: Vec<bool>,
    pub blue_count: usize,
    pub black_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RedCurves {
    /// Link triangle carrying each arc and its two black link edges.
    pub arcs: Vec<(usize, [usize; 2])>,
    pub components: usize,
}

pub fn colour_link(link: &LinkSphere, d: &Direction) -> LinkColouring {
    let out = outgoing_germs(link, d);
    let blue: Vec<bool> = link.edges.iter().map(|&(x, y)| out[x] == out[y]).collect();
    let blue_count = blue.iter().filter(|&&b| b).count();
    LinkColouring { black_count: blue.len() - blue_count, blue, blue_count }
}

/// Colours the link and joins the red arcs of the mixed triangles across
/// black edges.
pub fn colour_and_trace_red(t: &Triangulation3, d: &Direction) -> Result<(LinkColouring, RedCurves), Floation3Error> {
    check_shape(d, t.num_edges())?;
    let link = t.link();
    let col = colour_link(link, d);
    let n = t.num_tetrahedra();
    if col.blue_count != 4 * n || col.black_count != 2 * n {
        return Err(Floation3Error::ColourCount { blue: col.blue_count, black: col.black_count, n });
    }
    let mut arcs = Vec::new();
    for (lt, tri_edges) in link.triangle_edges.iter().enumerate() {
        let v = lt % 4;
        let black: Vec<usize> = (0..4).filter(|&f| f != v).map(|f| tri_edges[f]).filter(|&e| !col.blue[e]).collect();
        match black.len() {
            0 => {}
            2 => arcs.push((lt, [black[0], black[1]])),
            _ => return Err(Floation3Error::ColourCount { blue: col.blue_count, black: col.black_count, n }),
        }
    }
    // Arcs meeting at a black edge belong to the same curve.
    let mut uf = UnionFind::<usize>::new(arcs.len());
    let mut at_edge: Vec<Option<usize>> = vec![None; link.edges.len()];
    for (i, (_, es)) in arcs.iter().enumerate() {
        for &e in es {
            match at_edge[e] {
                Some(j) => {
                    uf.union(i, j);
                }
                None => at_edge[e] = Some(i),
            }
        }
    }
    let components = count_roots(&uf, arcs.len());
    Ok((col, RedCurves { arcs, components }))
}

fn count_roots(uf: &UnionFind<usize>, n: usize) -> usize {
    let mut r: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    r.sort_unstable();
    r.dedup();
    r.len()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GermConditions {
    pub o_components: usize,
    pub i_components: usize,
}

impl GermConditions {
    pub fn holds(&self) -> bool {
        self.o_components == 1 && self.i_components == 1
    }
}

/// Components of `o(v)` and `i(v)` for an arbitrary outgoing-germ marking.
pub fn germ_conditions(link: &LinkSphere, out: &[bool]) -> GermConditions {
    let inc: Vec<bool> = out.iter().map(|&o| !o).collect();
    GermConditions { o_components: induced_components(link, out), i_components: induced_components(link, &inc) }
}

/// Components of the subgraph of the link induced on germs of one kind.
fn induced_components(link: &LinkSphere, keep: &[bool]) -> usize {
    let mut uf = UnionFind::<usize>::new(keep.len());
    for &(x, y) in &link.edges {
        if keep[x] && keep[y] {
            uf.union(x, y);
        }
    }
    let mut r: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).map(|i| uf.find(i)).collect();
    r.sort_unstable();
    r.dedup();
    r.len()
}

/// Components of the sphere cut along the red arcs: vertices joined by blue
/// edges, by all-blue triangles, and by the blue side of each mixed triangle.
fn complement_components(link: &LinkSphere, col: &LinkColouring) -> usize {
    let nv = link.vertex_ends.len();
    let mut uf = UnionFind::<usize>::new(nv);
    for (lt, tri) in link.triangles.iter().enumerate() {
        let v = lt % 4;
        for f in (0..4).filter(|&f| f != v) {
            let e = link.triangle_edges[lt][f];
            if col.blue[e] {
                let ws: Vec<usize> = (0..4).filter(|&w| w != v && w != f).collect();
                uf.union(tri[ws[0]], tri[ws[1]]);
            }
        }
    }
    count_roots(&uf, nv)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub direction: Vec<i8>,
    pub tets: Vec<TetStatus>,
    pub all_tets_total: bool,
    pub o_nonempty: bool,
    pub i_nonempty: bool,
    pub o_connected: bool,
    pub i_connected: bool,
    pub o_components: usize,
    pub i_components: usize,
    /// Vacuous with a single vertex.
    pub recurrence: bool,
    pub blue: usize,
    pub black: usize,
    pub red_arcs: usize,
    pub red_components: usize,
    pub complement_components: usize,
    pub is_local_orientation: bool,
    pub is_regular: bool,
    /// A functional on `H_1` is positive on every directed edge class.
    pub abelian_feasible: bool,
    /// Realizability by an order on the full group is not decided.
    pub realizability: &'static str,
}

/// Full audit of a direction. Directions failing the per-tetrahedron check
/// get only that part.
pub fn audit(t: &Triangulation3, d: &Direction) -> Result<AuditReport, Floation3Error> {
    let tets = validate_direction(t, d)?;
    let all_tets_total = tets.iter().all(|s| s.total);
    let link = t.link();
    let GermConditions { o_components, i_components } = germ_conditions(link, &outgoing_germs(link, d));
    let (o_nonempty, i_nonempty) = (o_components > 0, i_components > 0);
    let (o_connected, i_connected) = (o_components == 1, i_components == 1);
    let abelian_feasible = abelian_feasible(t, d);
    let mut r = AuditReport {
        direction: d.0.clone(),
        tets,
        all_tets_total,
        o_nonempty,
        i_nonempty,
        o_connected,
        i_connected,
        o_components,
        i_components,
        // Every increasing path starts and ends at the only vertex.
        recurrence: true,
        blue: 0,
        black: 0,
        red_arcs: 0,
        red_components: 0,
        complement_components: 0,
        is_local_orientation: false,
        is_regular: false,
        abelian_feasible,
        realizability: "unknown",
    };
    if !all_tets_total {
        return Ok(r);
    }
    let (col, red) = colour_and_trace_red(t, d)?;
    r.blue = col.blue_count;
    r.black = col.black_count;
    r.red_arcs = red.arcs.len();
    r.red_components = red.components;
    r.complement_components = complement_components(link, &col);
    if (red.components >= 2) != (r.complement_components >= 3) {
        return Err(Floation3Error::ComplementMismatch { red: red.components, complement: r.complement_components });
    }
    r.is_local_orientation = o_nonempty && i_nonempty && o_connected && i_connected && r.recurrence;
    r.is_regular = red.components == 1;
    Ok(r)
}

/// Audit that fails hard when the regularity and local-orientation verdicts
/// disagree.
pub fn decide_regularity(t: &Triangulation3, d: &Direction) -> Result<AuditReport, Floation3Error> {
    let r = audit(t, d)?;
    if r.all_tets_total && r.is_regular != r.is_local_orientation {
        return Err(Floation3Error::RegularityMismatch { regular: r.is_regular, local: r.is_local_orientation });
    }
    Ok(r)
}

/// Exact feasibility of `phi(v_c) >= 1` over all directed edge classes, by
/// Fourier-Motzkin elimination.
pub fn abelian_feasible(t: &Triangulation3, d: &Direction) -> bool {
    let pres = t.presentation();
    let rank = pres.rank();
    let rows: Vec<(Vec<BigRational>, BigRational)> = pres
        .edge_words
        .iter()
        .zip(&d.0)
        .map(|(w, &s)| (abelianize(rank, w).0.iter().map(|&x| rat(x * i64::from(s))).collect(), rat(1)))
        .collect();
    fourier_motzkin_feasible(rows, rank)
}

/// Whether `{x : a . x >= b}` is nonempty.
pub fn fourier_motzkin_feasible(mut rows: Vec<(Vec<BigRational>, BigRational)>, vars: usize) -> bool {
    for k in 0..vars {
        let (mut pos, mut neg, mut keep) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.0[k].is_positive() {
                pos.push(r);
            } else if r.0[k].is_negative() {
                neg.push(r);
            } else {
                keep.push(r);
            }
        }
        for p in &pos {
            for q in &neg {
                let (cp, cq) = (-q.0[k].clone(), p.0[k].clone());
                let a: Vec<BigRational> = p.0.iter().zip(&q.0).map(|(x, y)| x * &cp + y * &cq).collect();
                let b = &p.1 * &cp + &q.1 * &cq;
                keep.push((a, b));
            }
        }
        keep.dedup();
        rows = keep;
    }
    rows.iter().all(|(_, b)| !b.is_positive() || b.is_zero())
}

#[derive(Clone, Debug, Serialize)]
pub struct EnumerationSummary {
    pub edges: usize,
    pub candidates: usize,
    pub valid: usize,
    pub local_orientations: usize,
    pub regular: usize,
    pub regularity_mismatches: usize,
    pub colour_count_failures: usize,
    pub abelian_feasible: usize,
    pub link_euler_characteristic: i64,
    pub reports: Vec<AuditReport>,
}

pub const ENUMERATION_GUARD: usize = 24;

/// Audits all `2^E` directions. With `valid_only`, directions failing the
/// per-tetrahedron check are left out of `reports`.
pub fn enumerate_directions(t: &Triangulation3, valid_only: bool) -> Result<EnumerationSummary, Floation3Error> {
    let e = t.num_edges();
    if e > ENUMERATION_GUARD {
        return Err(Floation3Error::GuardExceeded { edges: e, guard: ENUMERATION_GUARD });
    }
    let results: Vec<Result<AuditReport, Floation3Error>> =
        (0..1u64 << e).into_par_iter().map(|mask| audit(t, &Direction::from_mask(e, mask))).collect();
    let mut s = EnumerationSummary {
        edges: e,
        candidates: results.len(),
        valid: 0,
        local_orientations: 0,
        regular: 0,
        regularity_mismatches: 0,
        colour_count_failures: 0,
        abelian_feasible: 0,
        link_euler_characteristic: t.link().euler_characteristic(),
        reports: Vec::new(),
    };
    for r in results {
        let r = match r {
            Ok(r) => r,
            Err(Floation3Error::ColourCount { .. }) => {
                s.colour_count_failures += 1;
                continue;
            }
            Err(err) => return Err(err),
        };
        if !r.all_tets_total {
            if !valid_only {
                s.reports.push(r);
            }
            continue;
        }
        s.valid += 1;
        s.local_orientations += usize::from(r.is_local_orientation);
        s.regular += usize::from(r.is_regular);
        s.regularity_mismatches += usize::from(r.is_regular != r.is_local_orientation);
        s.abelian_feasible += usize::from(r.abelian_feasible);
        s.reports.push(r);
    }
    Ok(s)
}

/// The `2^n n!` lexicographic orders on `Z^n` built from signed coordinate
/// permutations, labelled like `+z,-x,+y` (most significant first).
pub fn signed_lex_orders(rank: usize) -> Vec<(String, Vec<Vec<i64>>)> {
    const NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..rank {
        perms = perms
            .into_iter()
            .flat_map(|p| {
                (0..rank).filter(|i| !p.contains(i)).map(|i| [p.clone(), vec![i]].concat()).collect::<Vec<_>>()
            })
            .collect();
    }
    let mut out = Vec::new();
    for p in perms {
        for signs in 0..1u32 << rank {
            let rows: Vec<Vec<i64>> = p
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    let mut r = vec![0; rank];
                    r[i] = if signs >> k & 1 == 1 { -1 } else { 1 };
                    r
                })
                .collect();
            let label = p
                .iter()
                .enumerate()
                .map(|(k, &i)| format!("{}{}", if signs >> k & 1 == 1 { '-' } else { '+' }, NAMES.get(i).copied().unwrap_or("?")))
                .collect::<Vec<_>>()
                .join(",");
            out.push((label, rows));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledOrder {
    pub label: String,
    pub direction: Vec<i8>,
    pub is_local_orientation: bool,
    pub is_regular: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BiInvariantExperiment {
    pub orders: Vec<SampledOrder>,
    pub distinct_directions: usize,
    /// Every sampled direction is a local orientation.
    pub subset_of_local_orientations: bool,
}

/// Audits the directions induced by the given orders.
pub fn bi_invariant_experiment(
    t: &Triangulation3,
    orders: &[(String, OrderOracle)],
) -> Result<BiInvariantExperiment, Floation3Error> {
    let rows = orders
        .iter()
        .map(|(label, o)| {
            let d = order_induced_direction(t, o)?;
            let r = decide_regularity(t, &d)?;
            Ok(SampledOrder {
                label: label.clone(),
                direction: d.0,
                is_local_orientation: r.is_local_orientation,
                is_regular: r.is_regular,
            })
        })
        .collect::<Result<Vec<_>, Floation3Error>>()?;
    let mut dirs: Vec<&Vec<i8>> = rows.iter().map(|r| &r.direction).collect();
    dirs.sort();
    dirs.dedup();
    Ok(BiInvariantExperiment {
        distinct_directions: dirs.len(),
        subset_of_local_orientations: rows.iter().all(|r| r.is_local_orientation),
        orders: rows,
    })
}
