//! Data-first figure emission: CSV layers, plus a thin optional SVG
//! renderer so nothing in the primary pipeline depends on graphics.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{CrouzeixError, Result};
use crate::fov::{build_boundary, z_eps_set, BoundaryApproximant};
use crate::linalg::eigenvalues;
use crate::point::{FieldMode, StructuredMatrixPoint};
use crate::ratio::RatioOptions;

/// Layered figure data for one configuration: boundary polyline segments,
/// eigenvalues of A, finite roots of p, and the attainment points.
#[derive(Debug, Clone)]
pub struct ConfigFigure {
    /// Polylines; each inner vector is one connected stretch (theta kept
    /// for the CSV output where it is known).
    pub boundary: Vec<Vec<(Option<f64>, Complex64)>>,
    pub segments: Vec<(Complex64, Complex64)>,
    pub eigenvalues: Vec<Complex64>,
    pub roots: Vec<Complex64>,
    pub roots_at_infinity: usize,
    pub attainment: Vec<Complex64>,
}

impl ConfigFigure {
    /// Collects all figure layers for a structured pair.
    pub fn from_point(pt: &StructuredMatrixPoint, epsilon: f64, opts: &RatioOptions) -> Result<Self> {
        let b = build_boundary(&pt.a, pt.field_mode, &opts.boundary)?;
        let ats = z_eps_set(&pt.p, &b, epsilon)?;
        let eigs = eigenvalues(&pt.a)?;
        let roots = pt.p.roots()?;
        Ok(ConfigFigure {
            boundary: boundary_polylines(&b),
            segments: b.segments.iter().map(|s| (s.start, s.end)).collect(),
            eigenvalues: eigs,
            roots: roots.finite,
            roots_at_infinity: roots.at_infinity,
            attainment: ats.points.iter().map(|p| p.z).collect(),
        })
    }
}

fn boundary_polylines(b: &BoundaryApproximant) -> Vec<Vec<(Option<f64>, Complex64)>> {
    if let Some(mu) = b.degenerate {
        return vec![vec![(None, mu)]];
    }
    let mut lines = Vec::new();
    for arc in &b.arcs {
        let line: Vec<(Option<f64>, Complex64)> =
            arc.samples.iter().map(|s| (Some(s.theta), s.z)).collect();
        if !line.is_empty() {
            lines.push(line);
        }
    }
    if b.mode == FieldMode::Real {
        // mirror across the real axis to complete the curve
        let mirrored: Vec<Vec<(Option<f64>, Complex64)>> = lines
            .iter()
            .map(|line| line.iter().rev().map(|(_, z)| (None, z.conj())).collect())
            .collect();
        lines.extend(mirrored);
    }
    lines
}

/// Writes the layered figure CSV: columns layer,theta,re,im. Boundary rows
/// carry theta where known; the roots-at-infinity count goes into a
/// leading comment line.
pub fn emit_figure_csv(fig: &ConfigFigure, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# roots_at_infinity={}\n", fig.roots_at_infinity));
    out.push_str("layer,theta,re,im\n");
    for (k, line) in fig.boundary.iter().enumerate() {
        for (theta, z) in line {
            let tstr = theta.map(|t| format!("{t:.12}")).unwrap_or_default();
            out.push_str(&format!("boundary{k},{tstr},{:.16e},{:.16e}\n", z.re, z.im));
        }
    }
    for (a, b) in &fig.segments {
        out.push_str(&format!("segment,,{:.16e},{:.16e}\n", a.re, a.im));
        out.push_str(&format!("segment,,{:.16e},{:.16e}\n", b.re, b.im));
    }
    for z in &fig.eigenvalues {
        out.push_str(&format!("eigenvalue,,{:.16e},{:.16e}\n", z.re, z.im));
    }
    for z in &fig.roots {
        out.push_str(&format!("root,,{:.16e},{:.16e}\n", z.re, z.im));
    }
    for z in &fig.attainment {
        out.push_str(&format!("attainment,,{:.16e},{:.16e}\n", z.re, z.im));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Sorted-final-values scatter data.
pub fn emit_sorted_values_csv(sorted: &[(usize, f64, usize)], path: &Path) -> Result<()> {
    let mut out = String::from("rank,f,run_index\n");
    for (rank, f, idx) in sorted {
        out.push_str(&format!("{rank},{f:.16e},{idx}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

const SVG_SIZE: f64 = 640.0;
const SVG_MARGIN: f64 = 40.0;

struct Mapper {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Mapper {
    fn new(points: &[Complex64]) -> Mapper {
        let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for z in points {
            xlo = xlo.min(z.re);
            xhi = xhi.max(z.re);
            ylo = ylo.min(z.im);
            yhi = yhi.max(z.im);
        }
        if !xlo.is_finite() || xhi <= xlo {
            xlo = -1.0;
            xhi = 1.0;
        }
        if !ylo.is_finite() || yhi <= ylo {
            ylo = -1.0;
            yhi = 1.0;
        }
        let span = (xhi - xlo).max(yhi - ylo).max(1e-12);
        let scale = (SVG_SIZE - 2.0 * SVG_MARGIN) / span;
        Mapper {
            x0: 0.5 * (xlo + xhi),
            y0: 0.5 * (ylo + yhi),
            scale,
        }
    }

    fn map(&self, z: Complex64) -> (f64, f64) {
        (
            SVG_SIZE / 2.0 + (z.re - self.x0) * self.scale,
            SVG_SIZE / 2.0 - (z.im - self.y0) * self.scale,
        )
    }
}

/// Minimal SVG rendering of the configuration figure: blue boundary,
/// blue asterisks for eigenvalues, red circles for roots, black diamonds
/// for attainment points.
pub fn emit_figure_svg(fig: &ConfigFigure, path: &Path) -> Result<()> {
    let mut all: Vec<Complex64> = Vec::new();
    for line in &fig.boundary {
        all.extend(line.iter().map(|(_, z)| *z));
    }
    all.extend(fig.eigenvalues.iter().copied());
    all.extend(fig.attainment.iter().copied());
    // roots can be far outside; include only the ones near the boundary box
    let mapper = Mapper::new(&all);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        SVG_SIZE
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for line in &fig.boundary {
        if line.len() == 1 {
            let (x, y) = mapper.map(line[0].1);
            svg.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"blue\"/>\n"
            ));
            continue;
        }
        let pts: Vec<String> = line
            .iter()
            .map(|(_, z)| {
                let (x, y) = mapper.map(*z);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"blue\" stroke-width=\"1.5\"/>\n",
            pts.join(" ")
        ));
    }
    for (a, b) in &fig.segments {
        let (x1, y1) = mapper.map(*a);
        let (x2, y2) = mapper.map(*b);
        svg.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"blue\" stroke-width=\"1.5\"/>\n"
        ));
    }
    for z in &fig.eigenvalues {
        let (x, y) = mapper.map(*z);
        for (dx, dy) in [(4.0, 0.0), (0.0, 4.0), (2.8, 2.8), (2.8, -2.8)] {
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"blue\" stroke-width=\"1.2\"/>\n",
                x - dx,
                y - dy,
                x + dx,
                y + dy
            ));
        }
    }
    for z in &fig.roots {
        let (x, y) = mapper.map(*z);
        if x < -SVG_SIZE || x > 2.0 * SVG_SIZE || y < -SVG_SIZE || y > 2.0 * SVG_SIZE {
            continue; // far-away root, off the canvas
        }
        svg.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"none\" stroke=\"red\" stroke-width=\"1.5\"/>\n"
        ));
    }
    for z in &fig.attainment {
        let (x, y) = mapper.map(*z);
        svg.push_str(&format!(
            "<path d=\"M {x:.2} {:.2} L {:.2} {y:.2} L {x:.2} {:.2} L {:.2} {y:.2} Z\" fill=\"black\"/>\n",
            y - 5.0,
            x + 5.0,
            y + 5.0,
            x - 5.0
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}

/// Sorted-values scatter as SVG.
pub fn emit_sorted_values_svg(sorted: &[(usize, f64, usize)], path: &Path) -> Result<()> {
    if sorted.is_empty() {
        return Err(CrouzeixError::EmptyInput("emit_sorted_values_svg"));
    }
    let n = sorted.len() as f64;
    let fmin = sorted.first().unwrap().1;
    let fmax = sorted.last().unwrap().1;
    let span = (fmax - fmin).max(1e-12);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        SVG_SIZE
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (rank, f, _) in sorted {
        let x = SVG_MARGIN + (SVG_SIZE - 2.0 * SVG_MARGIN) * (*rank as f64 - 1.0) / (n - 1.0).max(1.0);
        let y = SVG_SIZE - SVG_MARGIN - (SVG_SIZE - 2.0 * SVG_MARGIN) * (f - fmin) / span;
        svg.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"1.5\" fill=\"blue\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}
