//! Example complexes. The JSON files under `data/` are generated by the
//! constructions below; a test keeps the two in sync.

use super::solid::GeneratorDoc;
use super::{Complex, ComplexError, PolygonDoc, SolidDoc, SurfaceDoc};

const TOR2_JSON: &str = include_str!("../../data/tor2.json");
const OCT8_JSON: &str = include_str!("../../data/oct8.json");
const T3CUBE_JSON: &str = include_str!("../../data/t3cube.json");

pub fn bundled_names() -> &'static [&'static str] {
    &["TOR2", "OCT8", "T3CUBE"]
}

/// Loads a bundled complex by name (case-insensitive).
pub fn bundled(name: &str) -> Result<Complex, ComplexError> {
    let text = match name.to_ascii_uppercase().as_str() {
        "TOR2" => TOR2_JSON,
        "OCT8" => OCT8_JSON,
        "T3CUBE" => T3CUBE_JSON,
        _ => return Err(ComplexError::Parse(format!("no bundled complex `{name}`"))),
    };
    Complex::from_json(text)
}

fn side(name: &str, sign: i8) -> (String, i8) {
    (name.to_string(), sign)
}

/// Unit square with its diagonal `c` from the origin to `(1,1)`; `a` is
/// horizontal and `b` vertical.
pub fn tor2() -> SurfaceDoc {
    SurfaceDoc {
        kind: "surface".into(),
        name: "TOR2".into(),
        edges: vec!["a".into(), "b".into(), "c".into()],
        generators: Some(vec!["a".into(), "b".into()]),
        triangles: vec![[side("a", 1), side("b", 1), side("c", -1)], [side("b", 1), side("a", 1), side("c", -1)]],
        polygon: None,
    }
}

/// Octagon `a b a^-1 b^-1 c d c^-1 d^-1` triangulated by the fan of diagonals
/// `dk` from polygon vertex 0 to vertex `k`.
pub fn oct8() -> SurfaceDoc {
    let poly = [side("a", 1), side("b", 1), side("a", -1), side("b", -1), side("c", 1), side("d", 1), side("c", -1), side("d", -1)];
    let diag = |k: usize| format!("d{k}");
    let mut edges: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    edges.extend((2..=6).map(diag));
    let mut triangles = Vec::new();
    let mut corners = Vec::new();
    for k in 1..=6 {
        let first = if k == 1 { poly[0].clone() } else { (diag(k), 1) };
        let last = if k == 6 { poly[7].clone() } else { (diag(k + 1), -1) };
        triangles.push([first, poly[k].clone(), last]);
        corners.push([0, k, k + 1]);
    }
    SurfaceDoc {
        kind: "surface".into(),
        name: "OCT8".into(),
        edges,
        generators: Some(vec!["a".into(), "b".into(), "c".into(), "d".into()]),
        triangles,
        polygon: Some(PolygonDoc { sides: poly.to_vec(), corners }),
    }
}

/// Unit cube with opposite faces identified, cut into six tetrahedra around
/// the main diagonal. Tetrahedron `σ` has vertices `0, e_σ0, e_σ0 + e_σ1,
/// (1,1,1)`; faces are glued to their lattice translates.
pub fn t3cube() -> SolidDoc {
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let pos: Vec<[[i64; 3]; 4]> = perms
        .iter()
        .map(|s| {
            let mut v = [[0i64; 3]; 4];
            v[1][s[0]] = 1;
            v[2] = v[1];
            v[2][s[1]] = 1;
            v[3] = [1, 1, 1];
            v
        })
        .collect();
    let face = |t: usize, f: usize| -> Vec<(usize, [i64; 3])> {
        let mut vs: Vec<(usize, [i64; 3])> = (0..4).filter(|&v| v != f).map(|v| (v, pos[t][v])).collect();
        vs.sort_by_key(|x| x.1);
        vs
    };
    let mut tetrahedra = Vec::new();
    for t in 0..6 {
        let mut gl = [(0usize, [0usize; 4]); 4];
        for f in 0..4 {
            let a = face(t, f);
            let mut found = None;
            'search: for u in 0..6 {
                for g in 0..4 {
                    if (u, g) == (t, f) {
                        continue;
                    }
                    let b = face(u, g);
                    let d: Vec<i64> = (0..3).map(|k| b[0].1[k] - a[0].1[k]).collect();
                    let translate = |p: [i64; 3]| [p[0] + d[0], p[1] + d[1], p[2] + d[2]];
                    if (0..3).all(|i| translate(a[i].1) == b[i].1) {
                        let mut perm = [0usize; 4];
                        perm[f] = g;
                        for i in 0..3 {
                            perm[a[i].0] = b[i].0;
                        }
                        found = Some((u, perm));
                        break 'search;
                    }
                }
            }
            gl[f] = found.expect("every face has a translate");
        }
        tetrahedra.push(gl);
    }
    let generator = |name: &str, axis: usize| GeneratorDoc {
        name: name.into(),
        tet: perms.iter().position(|p| p[0] == axis).expect("axis first"),
        edge: [0, 1],
    };
    SolidDoc {
        kind: "solid".into(),
        name: "T3CUBE".into(),
        generators: Some(vec![generator("x", 0), generator("y", 1), generator("z", 2)]),
        tetrahedra,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(path: &str, generated: String, shipped: &str) {
        if std::env::var_os("FLOIATION_REGEN_DATA").is_some() {
            std::fs::write(format!("{}/data/{path}", env!("CARGO_MANIFEST_DIR")), &generated).unwrap();
            return;
        }
        assert_eq!(generated.trim(), shipped.trim(), "data/{path} is stale; regenerate with FLOIATION_REGEN_DATA=1");
    }

    #[test]
    fn data_files_match_constructions() {
        check("tor2.json", serde_json::to_string_pretty(&tor2()).unwrap(), TOR2_JSON);
        check("oct8.json", serde_json::to_string_pretty(&oct8()).unwrap(), OCT8_JSON);
        check("t3cube.json", serde_json::to_string_pretty(&t3cube()).unwrap(), T3CUBE_JSON);
    }
}
