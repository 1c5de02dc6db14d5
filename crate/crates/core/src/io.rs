//! File emission: CSV (12 significant digits), JSON, JSON lines and SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::continuation::BranchTable;
use crate::error::Result;
use crate::evolution::ContourState;
use crate::geometry::{eval_map, FourierBoundary, UnitGrid};
use crate::kernels::ResidualField;
use crate::linearization::MultiplierSpectrum;

pub const OUTPUT_DIR_ENV: &str = "VSTATE_OUTPUT_DIR";
pub const SVG_SAMPLES: usize = 512;

/// `VSTATE_OUTPUT_DIR` if set, else `./vstates-out`.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("vstates-out"))
}

pub fn fmt_csv(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|&x| fmt_csv(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text)?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_text(path, &csv_string(header, rows))
}

pub fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &json_string(value))
}

pub fn jsonl_string(states: &[ContourState]) -> String {
    let mut out = String::new();
    for s in states {
        out.push_str(&serde_json::to_string(s).expect("serializable"));
        out.push('\n');
    }
    out
}

pub fn residual_csv(field: &ResidualField) -> String {
    let rows: Vec<Vec<f64>> = field.rows().into_iter().map(|(a, v)| vec![a, v]).collect();
    csv_string(&["angle", "residual"], &rows)
}

pub fn spectrum_csv(spec: &MultiplierSpectrum) -> String {
    let rows: Vec<Vec<f64>> = spec.mult.iter().enumerate().map(|(n, &v)| vec![n as f64, v]).collect();
    csv_string(&["n", "multiplier"], &rows)
}

/// s, Ω, residual and the first `lead` coefficients a_{m−1}, a_{2m−1}, ...
pub fn branch_csv(table: &BranchTable, lead: usize) -> String {
    let m = table.m;
    let names: Vec<String> = (1..=lead).map(|k| format!("a{}", k * m - 1)).collect();
    let mut header = vec!["s", "omega", "residual"];
    header.extend(names.iter().map(String::as_str));
    let rows: Vec<Vec<f64>> = table
        .solutions
        .iter()
        .map(|x| {
            let mut r = vec![x.s, x.omega, x.residual_norm];
            r.extend((0..lead).map(|k| x.boundary.coeffs.get(k).copied().unwrap_or(0.0)));
            r
        })
        .collect();
    csv_string(&header, &rows)
}

/// Boundary sampled at the SVG resolution.
pub fn boundary_samples(bnd: &FourierBoundary) -> Vec<Complex64> {
    eval_map(bnd, &UnitGrid { size: SVG_SAMPLES, offset: false })
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn new(points: impl Iterator<Item = (f64, f64)>, size: f64) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let pad = 0.05 * span;
        Self { x0: x0 - pad, y1: y1 + pad, scale: size / (span + 2.0 * pad) }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, (self.y1 - y) * self.scale)
    }
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

// closed Catmull-Rom spline through the points as cubic Béziers
fn closed_path(p: &[(f64, f64)]) -> String {
    let n = p.len();
    let mut d = format!("M{:.3} {:.3}", p[0].0, p[0].1);
    for i in 0..n {
        let a = p[(i + n - 1) % n];
        let b = p[i];
        let c = p[(i + 1) % n];
        let e = p[(i + 2) % n];
        let c1 = (b.0 + (c.0 - a.0) / 6.0, b.1 + (c.1 - a.1) / 6.0);
        let c2 = (c.0 - (e.0 - b.0) / 6.0, c.1 - (e.1 - b.1) / 6.0);
        let _ = write!(d, " C{:.3} {:.3} {:.3} {:.3} {:.3} {:.3}", c1.0, c1.1, c2.0, c2.1, c.0, c.1);
    }
    d.push('Z');
    d
}

/// Closed curves drawn with cubic segments, one colour per curve.
pub fn svg_curves(curves: &[Vec<Complex64>]) -> String {
    let size = 600.0;
    let frame = Frame::new(curves.iter().flatten().map(|z| (z.re, z.im)), size);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    );
    for (k, c) in curves.iter().enumerate() {
        if c.len() < 3 {
            continue;
        }
        let pts: Vec<(f64, f64)> = c.iter().map(|z| frame.map(z.re, z.im)).collect();
        let _ = writeln!(
            out,
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>",
            closed_path(&pts),
            COLORS[k % COLORS.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn svg_boundaries(bnds: &[FourierBoundary]) -> String {
    let curves: Vec<Vec<Complex64>> = bnds.iter().map(boundary_samples).collect();
    svg_curves(&curves)
}

/// Line chart of y against x with axis labels.
pub fn svg_chart(points: &[(f64, f64)], xlabel: &str, ylabel: &str) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n");
    let _ = writeln!(
        out,
        "<path d=\"M{pad} {} H{} M{pad} {} V{pad}\" stroke=\"black\" fill=\"none\"/>",
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>", w / 2.0, h - 15.0);
    let _ = writeln!(out, "<text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">{ylabel}</text>", h / 2.0, h / 2.0);
    for (v, y) in [(y0, py(y0)), (y1, py(y1))] {
        let _ = writeln!(out, "<text x=\"{}\" y=\"{y:.2}\" text-anchor=\"end\" font-size=\"10\">{v:.6}</text>", pad - 4.0);
    }
    for (v, x) in [(x0, px(x0)), (x1, px(x1))] {
        let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{v:.4}</text>", h - pad + 14.0);
    }
    if let Some((&first, rest)) = points.split_first() {
        let mut d = format!("M{:.3} {:.3}", px(first.0), py(first.1));
        for &(x, y) in rest {
            let _ = write!(d, " L{:.3} {:.3}", px(x), py(y));
        }
        let _ = writeln!(out, "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>", COLORS[0]);
        for &(x, y) in points {
            let _ = writeln!(out, "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"3\" fill=\"{}\"/>", px(x), py(y), COLORS[1]);
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_twelve_digits() {
        assert_eq!(fmt_csv(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(csv_string(&["a", "b"], &[vec![1.0, -2.5]]), "a,b\n1.00000000000e0,-2.50000000000e0\n");
    }

    #[test]
    fn svg_uses_cubic_segments() {
        let s = svg_boundaries(&[FourierBoundary::ellipse(0.2, 1)]);
        assert_eq!(s.matches(" C").count(), SVG_SAMPLES);
        assert!(s.starts_with("<svg"));
    }
}
