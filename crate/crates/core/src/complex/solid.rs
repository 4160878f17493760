use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{eliminate, ComplexError, Presentation, Side};

/// Tetrahedron edge slots as vertex pairs `(u, v)` with `u < v`.
pub const EDGE_SLOTS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

pub fn slot_of(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    EDGE_SLOTS.iter().position(|&p| p == (a, b)).expect("distinct vertices")
}

/// File form of a 3-dimensional triangulation. Face `f` of a tetrahedron is
/// the face opposite vertex `f`; `gluings[f] = (tet, perm)` maps vertex `v` of
/// this tetrahedron to vertex `perm[v]` of `tet`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolidDoc {
    pub kind: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<GeneratorDoc>>,
    pub tetrahedra: Vec<[(usize, [usize; 4]); 4]>,
}

/// A basis edge, named and oriented by a tetrahedron edge `tet: u -> v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDoc {
    pub name: String,
    pub tet: usize,
    pub edge: [usize; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tetrahedron {
    pub gluings: [(usize, [usize; 4]); 4],
}

/// Orientation of every edge class relative to its reference orientation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction(pub Vec<i8>);

impl Direction {
    pub fn all_positive(n: usize) -> Self {
        Direction(vec![1; n])
    }

    /// Directions indexed by the bits of `mask`; bit `k` set means class `k`
    /// is reversed.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Direction((0..n).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect())
    }
}

#[derive(Clone, Debug)]
pub struct Triangulation3 {
    name: String,
    tets: Vec<Tetrahedron>,
    edge_names: Vec<String>,
    /// Per tetrahedron and edge slot: class and sign of `u -> v` against the
    /// class reference orientation.
    slot_class: Vec<[(usize, i8); 6]>,
    face_relations: Vec<Vec<Side>>,
    presentation: Presentation,
    link: LinkSphere,
}

fn is_perm(p: &[usize; 4]) -> bool {
    let mut seen = [false; 4];
    p.iter().all(|&x| x < 4 && !std::mem::replace(&mut seen[x], true))
}

fn inverse_perm(p: &[usize; 4]) -> [usize; 4] {
    let mut q = [0; 4];
    for (i, &x) in p.iter().enumerate() {
        q[x] = i;
    }
    q
}

fn perm_is_even(p: &[usize; 4]) -> bool {
    let mut inv = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 0
}

impl Triangulation3 {
    pub fn from_doc(d: &SolidDoc) -> Result<Self, ComplexError> {
        let n = d.tetrahedra.len();
        if n == 0 {
            return Err(ComplexError::NotClosed("no tetrahedra".into()));
        }
        let tets: Vec<Tetrahedron> = d.tetrahedra.iter().map(|g| Tetrahedron { gluings: *g }).collect();
        for (i, t) in tets.iter().enumerate() {
            for f in 0..4 {
                let (j, p) = t.gluings[f];
                if j >= n || !is_perm(&p) {
                    return Err(ComplexError::GluingNotInvolutive { tet: i, face: f });
                }
                let (back_t, back_p) = tets[j].gluings[p[f]];
                if back_t != i || back_p != inverse_perm(&p) || (j == i && p[f] == f) {
                    return Err(ComplexError::GluingNotInvolutive { tet: i, face: f });
                }
            }
        }
        // Orientability: an even gluing joins oppositely oriented tetrahedra.
        let mut flip: Vec<Option<bool>> = vec![None; n];
        flip[0] = Some(false);
        let mut stack = vec![0];
        while let Some(i) = stack.pop() {
            for &(j, p) in &tets[i].gluings {
                let want = flip[i].unwrap() ^ perm_is_even(&p);
                match flip[j] {
                    Some(x) if x != want => return Err(ComplexError::NotOrientable),
                    Some(_) => {}
                    None => {
                        flip[j] = Some(want);
                        stack.push(j);
                    }
                }
            }
        }
        if flip.iter().any(Option::is_none) {
            return Err(ComplexError::NotClosed("tetrahedra are not connected".into()));
        }
        // Edge classes with reference orientation from the lowest slot.
        let mut slot_class: Vec<[Option<(usize, i8)>; 6]> = vec![[None; 6]; n];
        let mut classes = 0;
        for t0 in 0..n {
            for s0 in 0..6 {
                if slot_class[t0][s0].is_some() {
                    continue;
                }
                let c = classes;
                classes += 1;
                slot_class[t0][s0] = Some((c, 1));
                let mut stack = vec![(t0, s0)];
                while let Some((t, s)) = stack.pop() {
                    let sign = slot_class[t][s].unwrap().1;
                    let (u, v) = EDGE_SLOTS[s];
                    for f in (0..4).filter(|&f| f != u && f != v) {
                        let (j, p) = tets[t].gluings[f];
                        let (pu, pv) = (p[u], p[v]);
                        let ns = slot_of(pu, pv);
                        let nsign = if pu < pv { sign } else { -sign };
                        match slot_class[j][ns] {
                            Some((_, x)) if x != nsign => {
                                return Err(ComplexError::LinkNotSphere("edge identified with its reverse".into()))
                            }
                            Some(_) => {}
                            None => {
                                slot_class[j][ns] = Some((c, nsign));
                                stack.push((j, ns));
                            }
                        }
                    }
                }
            }
        }
        let slot_class: Vec<[(usize, i8); 6]> =
            slot_class.into_iter().map(|a| a.map(|x| x.expect("every slot classified"))).collect();
        // One vertex.
        let mut uf = UnionFind::<usize>::new(4 * n);
        for (i, t) in tets.iter().enumerate() {
            for f in 0..4 {
                let (j, p) = t.gluings[f];
                for v in (0..4).filter(|&v| v != f) {
                    uf.union(4 * i + v, 4 * j + p[v]);
                }
            }
        }
        let mut reps: Vec<usize> = (0..4 * n).map(|x| uf.find(x)).collect();
        reps.sort_unstable();
        reps.dedup();
        if reps.len() != 1 {
            return Err(ComplexError::NotOneVertex(reps.len()));
        }
        let link = link_from(&tets, &slot_class)?;
        let faces = 2 * n;
        let chi = 1 - classes as i64 + faces as i64 - n as i64;
        if chi != 0 {
            return Err(ComplexError::EulerMismatch { got: chi, what: "3-manifold" });
        }
        // Face relations, one per glued pair.
        let mut face_relations = Vec::new();
        for (i, t) in tets.iter().enumerate() {
            for f in 0..4 {
                let (j, p) = t.gluings[f];
                if (j, p[f]) < (i, f) {
                    continue;
                }
                let vs: Vec<usize> = (0..4).filter(|&v| v != f).collect();
                let side = |a: usize, b: usize| {
                    let (c, s) = slot_class[i][slot_of(a, b)];
                    Side::new(c, s)
                };
                face_relations.push(vec![side(vs[0], vs[1]), side(vs[1], vs[2]), side(vs[0], vs[2]).reversed()]);
            }
        }
        let mut edge_names: Vec<String> = (0..classes).map(|k| format!("e{k}")).collect();
        let preferred = match &d.generators {
            Some(gs) => {
                let mut out = Vec::new();
                for g in gs {
                    let [u, v] = g.edge;
                    if g.tet >= n || u >= 4 || v >= 4 || u == v {
                        return Err(ComplexError::Parse(format!("generator `{}` names no edge", g.name)));
                    }
                    let (c, s) = slot_class[g.tet][slot_of(u, v)];
                    let along = if u < v { s } else { -s };
                    if along < 0 {
                        return Err(ComplexError::Parse(format!(
                            "generator `{}` runs against its class reference orientation",
                            g.name
                        )));
                    }
                    edge_names[c] = g.name.clone();
                    out.push(c);
                }
                Some(out)
            }
            None => None,
        };
        let presentation = eliminate(&edge_names, &face_relations, preferred.as_deref())?;
        Ok(Triangulation3 { name: d.name.clone(), tets, edge_names, slot_class, face_relations, presentation, link })
    }

    pub fn from_json(text: &str) -> Result<Self, ComplexError> {
        let d: SolidDoc = serde_json::from_str(text).map_err(|e| ComplexError::Parse(e.to_string()))?;
        Self::from_doc(&d)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tetrahedra(&self) -> &[Tetrahedron] {
        &self.tets
    }

    pub fn num_tetrahedra(&self) -> usize {
        self.tets.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_names.len()
    }

    pub fn num_faces(&self) -> usize {
        2 * self.tets.len()
    }

    pub fn edge_names(&self) -> &[String] {
        &self.edge_names
    }

    /// Class and reference sign of the tetrahedron edge `u -> v` for `u < v`.
    pub fn slot(&self, tet: usize, slot: usize) -> (usize, i8) {
        self.slot_class[tet][slot]
    }

    /// Sign of the directed tetrahedron edge `u -> v` against the class
    /// reference orientation.
    pub fn oriented_sign(&self, tet: usize, u: usize, v: usize) -> (usize, i8) {
        let (c, s) = self.slot_class[tet][slot_of(u, v)];
        (c, if u < v { s } else { -s })
    }

    pub fn face_relations(&self) -> &[Vec<Side>] {
        &self.face_relations
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn link(&self) -> &LinkSphere {
        &self.link
    }

    pub fn euler_characteristic(&self) -> i64 {
        1 - self.num_edges() as i64 + self.num_faces() as i64 - self.num_tetrahedra() as i64
    }

    pub fn report(&self) -> Value {
        json!({
            "kind": "solid",
            "name": self.name,
            "V": 1,
            "E": self.num_edges(),
            "F": self.num_faces(),
            "T": self.num_tetrahedra(),
            "chi": self.euler_characteristic(),
            "link": {
                "triangles": self.link.triangles.len(),
                "edges": self.link.edges.len(),
                "vertices": self.link.vertex_ends.len(),
                "chi": self.link.euler_characteristic(),
            },
        })
    }
}

/// Triangulated link of the vertex. Link triangle `4t + v` is the corner of
/// tetrahedron `t` at vertex `v`; its corners are link vertices, each the end
/// of an edge class.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSphere {
    /// Per link triangle, the link vertex at the tetrahedron edge towards each
    /// other vertex `w` (indexed by `w`; the entry at `v` itself is unused).
    pub triangles: Vec<[usize; 4]>,
    /// Link edges as unordered pairs of link vertices.
    pub edges: Vec<(usize, usize)>,
    /// Per link triangle, the link edge lying in each face `f` of the
    /// tetrahedron (the entry at `v` itself is unused).
    pub triangle_edges: Vec<[usize; 4]>,
    /// `(edge class, is_head)` for each link vertex.
    pub vertex_ends: Vec<(usize, bool)>,
}

impl LinkSphere {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_ends.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// The link vertex where edge class `c` ends with the given end.
    pub fn vertex_of(&self, c: usize, head: bool) -> Option<usize> {
        self.vertex_ends.iter().position(|&x| x == (c, head))
    }
}

pub fn build_link_sphere(t: &Triangulation3) -> Result<LinkSphere, ComplexError> {
    link_from(&t.tets, &t.slot_class)
}

fn link_from(tets: &[Tetrahedron], slot_class: &[[(usize, i8); 6]]) -> Result<LinkSphere, ComplexError> {
    let n = tets.len();
    let oriented_sign = |tet: usize, u: usize, v: usize| {
        let (c, s) = slot_class[tet][slot_of(u, v)];
        (c, if u < v { s } else { -s })
    };
    let idx = |tet: usize, v: usize, w: usize| 16 * tet + 4 * v + w;
    let mut corners = UnionFind::<usize>::new(16 * n);
    let mut sides = UnionFind::<usize>::new(16 * n);
    let mut tris = UnionFind::<usize>::new(4 * n);
    for (i, tet) in tets.iter().enumerate() {
        for f in 0..4 {
            let (j, p) = tet.gluings[f];
            for v in (0..4).filter(|&v| v != f) {
                sides.union(idx(i, v, f), idx(j, p[v], p[f]));
                tris.union(4 * i + v, 4 * j + p[v]);
                for w in (0..4).filter(|&w| w != f && w != v) {
                    corners.union(idx(i, v, w), idx(j, p[v], p[w]));
                }
            }
        }
    }
    let mut vertex_ids = std::collections::BTreeMap::new();
    let mut vertex_ends = Vec::new();
    let mut triangles = Vec::with_capacity(4 * n);
    for i in 0..n {
        for v in 0..4 {
            let mut tri = [usize::MAX; 4];
            for w in (0..4).filter(|&w| w != v) {
                let root = corners.find(idx(i, v, w));
                let (c, s) = oriented_sign(i, v, w);
                // `v -> w` along the reference means this corner is the tail.
                let end = (c, s < 0);
                let id = *vertex_ids.entry(root).or_insert_with(|| {
                    vertex_ends.push(end);
                    vertex_ends.len() - 1
                });
                if vertex_ends[id] != end {
                    return Err(ComplexError::LinkNotSphere("both ends of an edge meet in the link".into()));
                }
                tri[w] = id;
            }
            triangles.push(tri);
        }
    }
    let mut edge_ids = std::collections::BTreeMap::new();
    let mut edges = Vec::new();
    let mut triangle_edges = vec![[usize::MAX; 4]; 4 * n];
    for i in 0..n {
        for v in 0..4 {
            for f in (0..4).filter(|&f| f != v) {
                let id = *edge_ids.entry(sides.find(idx(i, v, f))).or_insert_with(|| {
                    let ws: Vec<usize> = (0..4).filter(|&w| w != v && w != f).collect();
                    let tri = &triangles[4 * i + v];
                    edges.push((tri[ws[0]], tri[ws[1]]));
                    edges.len() - 1
                });
                triangle_edges[4 * i + v][f] = id;
            }
        }
    }
    let link = LinkSphere { triangles, edges, triangle_edges, vertex_ends };
    let mut comps: Vec<usize> = (0..4 * n).map(|x| tris.find(x)).collect();
    comps.sort_unstable();
    comps.dedup();
    if comps.len() != 1 {
        return Err(ComplexError::LinkNotSphere(format!("{} components", comps.len())));
    }
    if link.edges.len() != 6 * n || link.euler_characteristic() != 2 {
        return Err(ComplexError::LinkNotSphere(format!(
            "V={} E={} F={}",
            link.vertex_ends.len(),
            link.edges.len(),
            link.triangles.len()
        )));
    }
    Ok(link)
}
