//! One-vertex triangulations of surfaces and 3-manifolds: file format,
//! validation, edge-class words and the vertex link.

mod bundled;
pub mod snf;
mod solid;
mod surface;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::orders::{Comparison, OrderOracle};
use crate::words::{abelianize, GeneratorSet, Letter, Word, WordError};

pub use bundled::{bundled, bundled_names, oct8, t3cube, tor2};
pub use snf::{smith_normal_form, SmithForm};
pub use solid::{build_link_sphere, Direction, GeneratorDoc, LinkSphere, SolidDoc, Tetrahedron, Triangulation3};
pub use surface::{PolygonDoc, PolygonLayout, SurfaceDoc, Triangle, Triangulation2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("gluing is not an involution at tetrahedron {tet} face {face}")]
    GluingNotInvolutive { tet: usize, face: usize },
    #[error("complex is not closed: {0}")]
    NotClosed(String),
    #[error("Euler characteristic {got} does not fit a closed {what}")]
    EulerMismatch { got: i64, what: &'static str },
    #[error("vertex link is not a sphere: {0}")]
    LinkNotSphere(String),
    #[error("triangulation has {0} vertices, expected one")]
    NotOneVertex(usize),
    #[error("complex is not orientable")]
    NotOrientable,
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("chosen generators do not determine edge `{0}`")]
    Underdetermined(String),
    #[error("polygon layout: {0}")]
    Layout(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// One side of a cell boundary: an edge class traversed with a sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Side {
    pub edge: usize,
    pub sign: i8,
}

impl Side {
    pub fn new(edge: usize, sign: i8) -> Self {
        Side { edge, sign }
    }

    pub fn reversed(self) -> Self {
        Side { edge: self.edge, sign: -self.sign }
    }
}

/// Fundamental-group presentation on a basis of edge classes, with every
/// edge expressed as a word in that basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Presentation {
    pub generators: GeneratorSet,
    pub basis_edges: Vec<usize>,
    pub edge_words: Vec<Word>,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn rank(&self) -> usize {
        self.generators.rank()
    }

    pub fn side_word(&self, s: Side) -> Word {
        if s.sign > 0 {
            self.edge_words[s.edge].clone()
        } else {
            self.edge_words[s.edge].inverse()
        }
    }

    pub fn path_word(&self, sides: &[Side]) -> Word {
        sides.iter().fold(Word::identity(), |w, &s| w.mul(&self.side_word(s)))
    }
}

/// Solves relations `s_0 s_1 ... = 1` for edge words. Preferred basis edges
/// come first; without them the lowest undetermined edge becomes a new
/// generator whenever no relation has a single unknown.
pub fn eliminate(
    edge_names: &[String],
    relations: &[Vec<Side>],
    preferred: Option<&[usize]>,
) -> Result<Presentation, ComplexError> {
    let n = edge_names.len();
    let mut known: Vec<Option<Word>> = vec![None; n];
    let mut basis = Vec::new();
    if let Some(p) = preferred {
        for &e in p {
            known[e] = Some(Word::generator(basis.len()));
            basis.push(e);
        }
    }
    let mut done = vec![false; relations.len()];
    let mut relators = Vec::new();
    let side_word = |known: &[Option<Word>], s: &Side| {
        let w = known[s.edge].clone().expect("known edge");
        if s.sign > 0 {
            w
        } else {
            w.inverse()
        }
    };
    loop {
        let mut progress = false;
        for (ri, rel) in relations.iter().enumerate() {
            if done[ri] {
                continue;
            }
            let unknown: Vec<usize> = (0..rel.len()).filter(|&i| known[rel[i].edge].is_none()).collect();
            if unknown.is_empty() {
                let w = rel.iter().fold(Word::identity(), |acc, s| acc.mul(&side_word(&known, s)));
                if !w.is_empty() {
                    relators.push(w);
                }
                done[ri] = true;
                progress = true;
            } else if unknown.len() == 1 {
                let i = unknown[0];
                let before = rel[..i].iter().fold(Word::identity(), |acc, s| acc.mul(&side_word(&known, s)));
                let after = rel[i + 1..].iter().fold(Word::identity(), |acc, s| acc.mul(&side_word(&known, s)));
                let val = before.inverse().mul(&after.inverse());
                known[rel[i].edge] = Some(if rel[i].sign > 0 { val } else { val.inverse() });
                progress = true;
            }
        }
        if progress {
            continue;
        }
        match known.iter().position(Option::is_none) {
            None => break,
            Some(e) if preferred.is_some() => return Err(ComplexError::Underdetermined(edge_names[e].clone())),
            Some(e) => {
                known[e] = Some(Word::generator(basis.len()));
                basis.push(e);
            }
        }
    }
    let generators = GeneratorSet::new(basis.iter().map(|&e| edge_names[e].clone()))?;
    Ok(Presentation {
        generators,
        basis_edges: basis,
        edge_words: known.into_iter().map(|w| w.expect("all edges solved")).collect(),
        relators,
    })
}

/// Relation matrix of signed edge counts, one row per relation.
pub fn relation_matrix(n_edges: usize, relations: &[Vec<Side>]) -> Vec<Vec<i64>> {
    relations
        .iter()
        .map(|r| {
            let mut row = vec![0i64; n_edges];
            for s in r {
                row[s.edge] += i64::from(s.sign);
            }
            row
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Essentiality {
    Essential,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub edge: String,
    pub word: String,
    pub status: Essentiality,
    pub reason: String,
}

/// Per-edge essentiality: a nonzero homology class suffices, otherwise an
/// order that separates the edge word from the identity.
pub fn check_essential(
    names: &[String],
    relations: &[Vec<Side>],
    pres: &Presentation,
    oracle: Option<&OrderOracle>,
) -> Vec<EdgeReport> {
    let snf = smith_normal_form(&relation_matrix(names.len(), relations), names.len());
    (0..names.len())
        .map(|e| {
            let word = pres.edge_words[e].clone();
            let mut unit = vec![0i64; names.len()];
            unit[e] = 1;
            let (status, reason) = if !snf.in_row_lattice(&unit) {
                (Essentiality::Essential, "nonzero homology class".to_string())
            } else {
                match oracle.map(|o| o.compare(&word, &Word::identity())) {
                    Some(Ok(Comparison::Less | Comparison::Greater)) => {
                        (Essentiality::Essential, "order separates it from the identity".to_string())
                    }
                    _ => (Essentiality::Unknown, "null-homologous; no order resolves it".to_string()),
                }
            };
            EdgeReport { edge: names[e].clone(), word: pres.generators.format(&word), status, reason }
        })
        .collect()
}

/// Abelianization of an edge word on the presentation basis.
pub fn edge_homology(pres: &Presentation, e: usize) -> Vec<i64> {
    abelianize(pres.rank(), &pres.edge_words[e]).0
}

pub fn letter_side(l: Letter) -> i8 {
    if l.inverse {
        -1
    } else {
        1
    }
}

/// A validated complex of either dimension.
#[derive(Clone, Debug)]
pub enum Complex {
    Surface(Triangulation2),
    Solid(Triangulation3),
}

impl Complex {
    pub fn from_json(text: &str) -> Result<Complex, ComplexError> {
        let v: Value = serde_json::from_str(text).map_err(|e| ComplexError::Parse(e.to_string()))?;
        match v.get("kind").and_then(Value::as_str) {
            Some("surface") => {
                let d: SurfaceDoc = serde_json::from_value(v).map_err(|e| ComplexError::Parse(e.to_string()))?;
                Ok(Complex::Surface(Triangulation2::from_doc(&d)?))
            }
            Some("solid") => {
                let d: SolidDoc = serde_json::from_value(v).map_err(|e| ComplexError::Parse(e.to_string()))?;
                Ok(Complex::Solid(Triangulation3::from_doc(&d)?))
            }
            other => Err(ComplexError::Parse(format!("unknown kind {other:?}"))),
        }
    }

    pub fn load(path: &std::path::Path) -> Result<Complex, ComplexError> {
        let text = std::fs::read_to_string(path).map_err(|e| ComplexError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn name(&self) -> &str {
        match self {
            Complex::Surface(t) => t.name(),
            Complex::Solid(t) => t.name(),
        }
    }

    pub fn presentation(&self) -> &Presentation {
        match self {
            Complex::Surface(t) => t.presentation(),
            Complex::Solid(t) => t.presentation(),
        }
    }

    pub fn edge_names(&self) -> &[String] {
        match self {
            Complex::Surface(t) => t.edge_names(),
            Complex::Solid(t) => t.edge_names(),
        }
    }

    pub fn relations(&self) -> Vec<Vec<Side>> {
        match self {
            Complex::Surface(t) => t.triangles().iter().map(|tr| tr.sides.to_vec()).collect(),
            Complex::Solid(t) => t.face_relations().to_vec(),
        }
    }

    /// Single-letter word of an edge class, expressed in the presentation
    /// basis.
    pub fn edge_word(&self, name: &str) -> Result<Word, ComplexError> {
        let e = self
            .edge_names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ComplexError::UnknownEdge(name.to_string()))?;
        Ok(self.presentation().edge_words[e].clone())
    }

    pub fn check_essential(&self, oracle: Option<&OrderOracle>) -> Vec<EdgeReport> {
        check_essential(self.edge_names(), &self.relations(), self.presentation(), oracle)
    }

    pub fn homology(&self) -> SmithForm {
        let n = self.edge_names().len();
        smith_normal_form(&relation_matrix(n, &self.relations()), n)
    }

    /// Invariant report printed by `validate`.
    pub fn report(&self) -> Value {
        let h = self.homology();
        let pres = self.presentation();
        let mut v = match self {
            Complex::Surface(t) => t.report(),
            Complex::Solid(t) => t.report(),
        };
        v["h1_free_rank"] = h.free_rank().into();
        v["h1_torsion"] = h.torsion().into();
        v["generators"] = pres.generators.names().into();
        v["relators"] = pres.relators.iter().map(|w| pres.generators.format(w)).collect::<Vec<_>>().into();
        v["edge_words"] = self
            .edge_names()
            .iter()
            .zip(&pres.edge_words)
            .map(|(n, w)| (n.clone(), Value::from(pres.generators.format(w))))
            .collect::<serde_json::Map<_, _>>()
            .into();
        v
    }
}
