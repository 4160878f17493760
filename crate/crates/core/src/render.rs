//! SVG output for Poincaré-disk scenes.

use std::fmt::Write;

use thiserror::Error;

use crate::straighten::Geodesic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenderError {
    #[error("nothing to draw")]
    EmptyScene,
}

/// Contents of a disk picture. Points are in the unit disk.
#[derive(Clone, Debug, Default)]
pub struct DiskScene {
    pub polygon: Vec<(f64, f64)>,
    pub polylines: Vec<Vec<(f64, f64)>>,
    pub geodesics: Vec<Geodesic>,
}

const SIZE: f64 = 400.0;

fn screen(p: (f64, f64)) -> (f64, f64) {
    let h = SIZE / 2.0;
    (h + h * p.0, h - h * p.1)
}

/// Hyperbolic segment between two points of the closed disk, as an SVG
/// element: a circular arc orthogonal to the boundary, or a line through the
/// centre.
pub fn segment_element(p: (f64, f64), q: (f64, f64), style: &str) -> String {
    // The centre c solves 2 c.p = |p|^2 + 1 and 2 c.q = |q|^2 + 1.
    let det = 2.0 * (p.0 * q.1 - p.1 * q.0);
    let (sp, sq) = (screen(p), screen(q));
    let (np, nq) = (p.0 * p.0 + p.1 * p.1 + 1.0, q.0 * q.0 + q.1 * q.1 + 1.0);
    let scale = np.max(nq);
    if det.abs() < 1e-9 * scale {
        return format!(
            r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" {style}/>"#,
            sp.0, sp.1, sq.0, sq.1
        );
    }
    let cx = (np * q.1 - nq * p.1) / det;
    let cy = (p.0 * nq - q.0 * np) / det;
    let r = ((cx - p.0).powi(2) + (cy - p.1).powi(2)).sqrt() * SIZE / 2.0;
    // Arcs orthogonal to the boundary bend away from their circle's centre,
    // which in screen coordinates decides the sweep direction.
    let sc = screen((cx, cy));
    let cross = (sp.0 - sc.0) * (sq.1 - sc.1) - (sp.1 - sc.1) * (sq.0 - sc.0);
    let sweep = u8::from(cross > 0.0);
    format!(
        r#"<path d="M {:.6} {:.6} A {r:.6} {r:.6} 0 0 {sweep} {:.6} {:.6}" {style}/>"#,
        sp.0, sp.1, sq.0, sq.1
    )
}

fn on_circle(t: f64) -> (f64, f64) {
    (t.cos(), t.sin())
}

/// Deterministic SVG document; geodesics are drawn in sorted order.
pub fn render_disk(scene: &DiskScene) -> Result<String, RenderError> {
    if scene.polygon.is_empty() && scene.polylines.is_empty() && scene.geodesics.is_empty() {
        return Err(RenderError::EmptyScene);
    }
    let h = SIZE / 2.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<circle cx="{h}" cy="{h}" r="{h}" fill="none" stroke="black" stroke-width="1"/>"#);
    let n = scene.polygon.len();
    for i in 0..n {
        let e = segment_element(scene.polygon[i], scene.polygon[(i + 1) % n], r#"fill="none" stroke="gray" stroke-width="1""#);
        let _ = writeln!(s, r#"{e}"#);
    }
    for line in &scene.polylines {
        let pts: Vec<String> = line
            .iter()
            .map(|&p| {
                let q = screen(p);
                format!("{:.6},{:.6}", q.0, q.1)
            })
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="0.5"/>"#, pts.join(" "));
    }
    let mut gs = scene.geodesics.clone();
    gs.sort_by(|x, y| x.a.total_cmp(&y.a).then(x.b.total_cmp(&y.b)));
    for g in gs {
        let e = segment_element(on_circle(g.a), on_circle(g.b), r#"fill="none" stroke="crimson" stroke-width="1""#);
        let _ = writeln!(s, "{e}");
    }
    s.push_str("</svg>\n");
    Ok(s)
}
