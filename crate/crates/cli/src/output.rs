//! CSV, SVG and OBJ emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use berger_cgc::mesh::{stereographic, SurfaceMesh};
use berger_cgc::profile::ProfileState;

/// 17 significant digits, enough to round-trip an f64.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// File stem fragment for a parameter pair.
pub fn tag(tau: f64, k: f64) -> String {
    format!("tau{tau}_K{k}")
}

/// A polyline with its level and emphasis.
pub struct Polyline {
    pub level: f64,
    pub bold: bool,
    pub points: Vec<(f64, f64)>,
}

const SIZE: f64 = 600.0;

fn path_data(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.enumerate() {
        let _ = write!(d, "{}{:.3},{:.3}", if i == 0 { "M" } else { " L" }, x, y);
    }
    d
}

/// Phase rectangle `[0, 1] x [-1, 1]` mapped onto a 600 x 600 canvas.
pub fn phase_svg(title: &str, curves: &[Polyline]) -> String {
    let map = |(x, y): (f64, f64)| (x * SIZE, (1.0 - y) / 2.0 * SIZE);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <title>{title}</title>\n\
         <rect x=\"0\" y=\"0\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\" stroke=\"black\"/>\n"
    );
    for c in curves {
        let width = if c.bold { 2.5 } else { 0.8 };
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{width}\" data-level=\"{}\"/>",
            path_data(c.points.iter().copied().map(map)),
            num(c.level)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Profile in the `(y, x)` plane with equal aspect ratio.
pub fn profile_svg(title: &str, states: &[ProfileState<f64>]) -> String {
    let (mut y0, mut y1, mut x1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for st in states {
        y0 = y0.min(st.y);
        y1 = y1.max(st.y);
        x1 = x1.max(st.x);
    }
    let margin = 20.0;
    let span = (y1 - y0).max(x1).max(1e-12);
    let scale = (SIZE - 2.0 * margin) / span;
    let height = x1 * scale + 2.0 * margin;
    let map = |st: &ProfileState<f64>| (margin + (st.y - y0) * scale, height - margin - st.x * scale);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{height:.3}\" viewBox=\"0 0 {SIZE} {height:.3}\">\n\
         <title>{title}</title>\n\
         <path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n</svg>\n",
        path_data(states.iter().map(map))
    )
}

/// Polylines in the `(tau, K)` plane scaled into a 600 x 600 canvas.
pub fn plane_svg(title: &str, lines: &[Vec<(f64, f64)>], points: &[(f64, f64, bool)]) -> String {
    let all = lines.iter().flatten().copied().chain(points.iter().map(|p| (p.0, p.1)));
    let (mut a0, mut a1, mut b0, mut b1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (a, b) in all {
        a0 = a0.min(a);
        a1 = a1.max(a);
        b0 = b0.min(b);
        b1 = b1.max(b);
    }
    let margin = 20.0;
    let sa = (SIZE - 2.0 * margin) / (a1 - a0).max(1e-12);
    let sb = (SIZE - 2.0 * margin) / (b1 - b0).max(1e-12);
    let map = |(a, b): (f64, f64)| (margin + (a - a0) * sa, SIZE - margin - (b - b0) * sb);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n\
         <title>{title}</title>\n"
    );
    for &(a, b, filled) in points {
        let (x, y) = map((a, b));
        let _ = writeln!(
            s,
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2\" fill=\"{}\"/>",
            if filled { "gray" } else { "none" }
        );
    }
    for l in lines {
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
            path_data(l.iter().copied().map(map))
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Wavefront OBJ of a mesh after stereographic projection.
pub fn obj(mesh: &SurfaceMesh<f64>, tau: f64, k: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# berger-cgc {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# tau = {}, K = {}", num(tau), num(k));
    let _ = writeln!(s, "# stereographic projection from (0, 0, 0, -1): (p0, p1, p2) / (1 + p3)");
    let _ = writeln!(s, "# {} vertices, {} faces", mesh.vertices.len(), mesh.triangles.len());
    for v in &mesh.vertices {
        let [a, b, c] = stereographic(&v.point);
        let _ = writeln!(s, "v {} {} {}", num(a), num(b), num(c));
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}
