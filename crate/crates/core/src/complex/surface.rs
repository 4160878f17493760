use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{eliminate, ComplexError, Presentation, Side};

/// File form of a surface triangulation. Side `k` of a triangle runs from
/// corner `k` to corner `k+1`; a sign of `-1` means the edge points the other
/// way.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDoc {
    pub kind: String,
    pub name: String,
    pub edges: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    pub triangles: Vec<[(String, i8); 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<PolygonDoc>,
}

/// Fundamental polygon: its sides in order (side `k` runs from polygon vertex
/// `k` to `k+1`) and the polygon vertex at each triangle corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonDoc {
    pub sides: Vec<(String, i8)>,
    pub corners: Vec<[usize; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolygonLayout {
    pub sides: Vec<Side>,
    pub corners: Vec<[usize; 3]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triangle {
    pub sides: [Side; 3],
}

#[derive(Clone, Debug)]
pub struct Triangulation2 {
    name: String,
    edge_names: Vec<String>,
    triangles: Vec<Triangle>,
    /// `(triangle, side)` across each side.
    neighbors: Vec<[(usize, usize); 3]>,
    presentation: Presentation,
    polygon: Option<PolygonLayout>,
    reoriented: Vec<usize>,
}

fn side_of(names: &[String], s: &(String, i8)) -> Result<Side, ComplexError> {
    let e = names.iter().position(|n| *n == s.0).ok_or_else(|| ComplexError::UnknownEdge(s.0.clone()))?;
    if s.1 != 1 && s.1 != -1 {
        return Err(ComplexError::Parse(format!("side sign {} for `{}`", s.1, s.0)));
    }
    Ok(Side::new(e, s.1))
}

impl Triangulation2 {
    pub fn from_doc(d: &SurfaceDoc) -> Result<Self, ComplexError> {
        let names = d.edges.clone();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(ComplexError::Parse(format!("duplicate edge `{n}`")));
            }
        }
        let mut triangles = d
            .triangles
            .iter()
            .map(|t| Ok(Triangle { sides: [side_of(&names, &t[0])?, side_of(&names, &t[1])?, side_of(&names, &t[2])?] }))
            .collect::<Result<Vec<_>, ComplexError>>()?;
        let e = names.len();
        let f = triangles.len();
        // Every edge in exactly two side slots.
        let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); e];
        for (ti, t) in triangles.iter().enumerate() {
            for (k, s) in t.sides.iter().enumerate() {
                occ[s.edge].push((ti, k));
            }
        }
        if let Some(bad) = occ.iter().position(|o| o.len() != 2) {
            return Err(ComplexError::NotClosed(format!("edge `{}` used {} times", names[bad], occ[bad].len())));
        }
        // Coherent orientation: the two uses of an edge must have opposite
        // signs; flip triangles when needed.
        let mut flip: Vec<Option<bool>> = vec![None; f];
        for start in 0..f {
            if flip[start].is_some() {
                continue;
            }
            flip[start] = Some(false);
            let mut stack = vec![start];
            while let Some(t) = stack.pop() {
                for s in triangles[t].sides {
                    let o = &occ[s.edge];
                    let (a, b) = (o[0], o[1]);
                    let sa = triangles[a.0].sides[a.1].sign;
                    let sb = triangles[b.0].sides[b.1].sign;
                    let need = flip[a.0].zip(flip[b.0]);
                    let want_diff = sa == sb;
                    match need {
                        Some((fa, fb)) => {
                            if (fa != fb) != want_diff {
                                return Err(ComplexError::NotOrientable);
                            }
                        }
                        None => {
                            let (known, other) = if flip[a.0].is_some() { (a.0, b.0) } else { (b.0, a.0) };
                            flip[other] = Some(flip[known].unwrap() ^ want_diff);
                            stack.push(other);
                        }
                    }
                }
            }
        }
        let reoriented: Vec<usize> = (0..f).filter(|&t| flip[t] == Some(true)).collect();
        if !reoriented.is_empty() && d.polygon.is_some() {
            return Err(ComplexError::Layout("triangles with a polygon layout must be coherently oriented".into()));
        }
        for &t in &reoriented {
            let s = triangles[t].sides;
            triangles[t].sides = [s[2].reversed(), s[1].reversed(), s[0].reversed()];
        }
        let mut occ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); e];
        for (ti, t) in triangles.iter().enumerate() {
            for (k, s) in t.sides.iter().enumerate() {
                occ[s.edge].push((ti, k));
            }
        }
        let mut neighbors = vec![[(0, 0); 3]; f];
        for o in &occ {
            neighbors[o[0].0][o[0].1] = o[1];
            neighbors[o[1].0][o[1].1] = o[0];
        }
        // One vertex: identify tails with tails and heads with heads.
        let mut uf = UnionFind::<usize>::new(3 * f);
        let ends = |t: &Triangle, k: usize, ti: usize| {
            let (p, q) = (3 * ti + k, 3 * ti + (k + 1) % 3);
            if t.sides[k].sign > 0 {
                (p, q)
            } else {
                (q, p)
            }
        };
        for o in &occ {
            let (t0, h0) = ends(&triangles[o[0].0], o[0].1, o[0].0);
            let (t1, h1) = ends(&triangles[o[1].0], o[1].1, o[1].0);
            uf.union(t0, t1);
            uf.union(h0, h1);
        }
        let mut reps: Vec<usize> = (0..3 * f).map(|i| uf.find(i)).collect();
        reps.sort_unstable();
        reps.dedup();
        if reps.len() != 1 {
            return Err(ComplexError::NotOneVertex(reps.len()));
        }
        let chi = 1 - e as i64 + f as i64;
        if chi > 2 || chi % 2 != 0 {
            return Err(ComplexError::EulerMismatch { got: chi, what: "orientable surface" });
        }
        let preferred = match &d.generators {
            Some(g) => Some(
                g.iter()
                    .map(|n| names.iter().position(|m| m == n).ok_or_else(|| ComplexError::UnknownEdge(n.clone())))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        let relations: Vec<Vec<Side>> = triangles.iter().map(|t| t.sides.to_vec()).collect();
        let presentation = eliminate(&names, &relations, preferred.as_deref())?;
        let polygon = d.polygon.as_ref().map(|p| layout(&names, &triangles, p)).transpose()?;
        Ok(Triangulation2 { name: d.name.clone(), edge_names: names, triangles, neighbors, presentation, polygon, reoriented })
    }

    pub fn from_json(text: &str) -> Result<Self, ComplexError> {
        let d: SurfaceDoc = serde_json::from_str(text).map_err(|e| ComplexError::Parse(e.to_string()))?;
        Self::from_doc(&d)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn edge_names(&self) -> &[String] {
        &self.edge_names
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn polygon(&self) -> Option<&PolygonLayout> {
        self.polygon.as_ref()
    }

    /// Triangles whose stored orientation was reversed on load.
    pub fn reoriented(&self) -> &[usize] {
        &self.reoriented
    }

    /// The `(triangle, side)` glued to side `k` of triangle `t`.
    pub fn neighbor(&self, t: usize, k: usize) -> (usize, usize) {
        self.neighbors[t][k]
    }

    pub fn num_edges(&self) -> usize {
        self.edge_names.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        1 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic()) / 2
    }

    pub fn report(&self) -> Value {
        json!({
            "kind": "surface",
            "name": self.name,
            "V": 1,
            "E": self.num_edges(),
            "F": self.num_triangles(),
            "chi": self.euler_characteristic(),
            "genus": self.genus(),
            "reoriented_triangles": self.reoriented,
            "polygon_layout": self.polygon.is_some(),
        })
    }
}

fn layout(names: &[String], triangles: &[Triangle], p: &PolygonDoc) -> Result<PolygonLayout, ComplexError> {
    let sides = p.sides.iter().map(|s| side_of(names, s)).collect::<Result<Vec<_>, _>>()?;
    let n = sides.len();
    if p.corners.len() != triangles.len() {
        return Err(ComplexError::Layout("one corner triple per triangle required".into()));
    }
    for (t, (tri, c)) in triangles.iter().zip(&p.corners).enumerate() {
        for k in 0..3 {
            let (a, b) = (c[k], c[(k + 1) % 3]);
            if a >= n || b >= n {
                return Err(ComplexError::Layout(format!("corner out of range in triangle {t}")));
            }
            let s = tri.sides[k];
            let ok = if b == (a + 1) % n {
                sides[a] == s
            } else if a == (b + 1) % n {
                sides[b] == s.reversed()
            } else {
                true
            };
            if !ok {
                return Err(ComplexError::Layout(format!("triangle {t} side {k} disagrees with the polygon")));
            }
        }
    }
    Ok(PolygonLayout { sides, corners: p.corners.clone() })
}
