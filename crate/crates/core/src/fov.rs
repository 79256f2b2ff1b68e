//! Field-of-values boundary approximation.
//!
//! The boundary of W(A) is parameterized by the support angle theta: z_theta
//! = v* A v where v is a unit top eigenvector of H_theta = (e^{i theta} A +
//! e^{-i theta} A*)/2, and Re(e^{i theta} z_theta) is the largest eigenvalue
//! of H_theta. The approximant samples a dense theta grid, locates line
//! segments (angles where the top eigenvalue is multiple, visible as jumps
//! of z_theta), records corners, and optionally fits adaptive Chebyshev
//! interpolants to the smooth arcs in between.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cheb::{lobatto_nodes, ChebPiece};
use crate::error::{CrouzeixError, Result};
use crate::linalg::{hermitian_eig, CMat};
use crate::point::FieldMode;
use crate::poly::Polynomial;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundaryOptions {
    /// Dense pre-grid resolution per full turn.
    pub pregrid_per_two_pi: usize,
    /// Arc interpolation tolerance, relative to 1 + ||A||_F.
    pub interp_tol: f64,
    /// Fit Chebyshev interpolants to the smooth arcs. The optimizer's inner
    /// loop turns this off; the search path then works on refined samples
    /// with direct eigensolves only.
    pub fit_interpolant: bool,
    /// Top-eigenvalue gap below gap_rtol * (1 + ||A||_F) flags a multiple
    /// eigenvalue, i.e. a boundary line segment.
    pub gap_rtol: f64,
    /// Relative variation of |p| under which the polynomial is considered
    /// constant on the boundary.
    pub const_rtol: f64,
    /// Degree of each Chebyshev piece.
    pub piece_degree: usize,
    /// Theta tolerance for maximizer refinement.
    pub theta_tol: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions {
            pregrid_per_two_pi: 1024,
            interp_tol: 1e-10,
            fit_interpolant: true,
            gap_rtol: 1e-8,
            const_rtol: 1e-8,
            piece_degree: 16,
            theta_tol: 1e-10,
        }
    }
}

impl BoundaryOptions {
    /// Configuration used inside the optimization loop: same grid, no
    /// interpolant fitting.
    pub fn fast() -> Self {
        BoundaryOptions {
            fit_interpolant: false,
            ..BoundaryOptions::default()
        }
    }
}

/// One boundary point from a direct eigensolve.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub theta: f64,
    pub z: Complex64,
    pub v: Vec<Complex64>,
    /// lambda_1 - lambda_2 of H_theta.
    pub gap: f64,
    /// largest eigenvalue of H_theta.
    pub lambda: f64,
}

/// Sampled boundary value without the eigenvector (kept lean: the pre-grid
/// in the optimizer's hot loop is allocation free for n = 2).
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub theta: f64,
    pub z: Complex64,
    pub gap: f64,
    pub lambda: f64,
}

/// Straight segment of the boundary at support angle `theta`.
#[derive(Debug, Clone)]
pub struct Segment {
    pub theta: f64,
    /// Endpoint adjacent to the arc approaching from below in theta.
    pub start: Complex64,
    /// Endpoint adjacent to the arc leaving above in theta.
    pub end: Complex64,
    pub v_start: Vec<Complex64>,
    pub v_end: Vec<Complex64>,
    /// Orthonormal basis of the (near-)degenerate top eigenspace, n x k.
    basis: CMat,
    w_start: Vec<Complex64>,
    w_end: Vec<Complex64>,
    pub lambda: f64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    /// Point and attaining unit vector at chord parameter t in [0, 1].
    pub fn point_at(&self, a: &CMat, t: f64) -> (Complex64, Vec<Complex64>) {
        let t = t.clamp(0.0, 1.0);
        // the s-coordinate is linear along the chord; rotate inside the
        // eigenspace between the endpoint vectors
        let c = (1.0 - t).sqrt();
        let s = t.sqrt();
        let k = self.w_start.len();
        let mut w = vec![Complex64::new(0.0, 0.0); k];
        for i in 0..k {
            w[i] = self.w_start[i] * c + self.w_end[i] * s;
        }
        let mut v = self.basis.matvec(&w);
        crate::linalg::normalize(&mut v);
        let z = a.quadratic_form(&v);
        (z, v)
    }
}

/// Corner of the boundary: a segment junction or a vertex where z_theta
/// stalls over a theta interval.
#[derive(Debug, Clone)]
pub struct Corner {
    pub z: Complex64,
    pub theta: f64,
}

/// A smooth arc: refined samples plus an optional piecewise Chebyshev
/// interpolant of theta -> z_theta.
#[derive(Debug, Clone)]
pub struct Arc {
    pub samples: Vec<BoundarySample>,
    pub pieces: Vec<ChebPiece>,
    /// Set when the arc wraps the full periodic domain.
    pub closed: bool,
}

impl Arc {
    pub fn theta_lo(&self) -> f64 {
        self.samples.first().map(|s| s.theta).unwrap_or(0.0)
    }

    pub fn theta_hi(&self) -> f64 {
        self.samples.last().map(|s| s.theta).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryApproximant {
    pub a: CMat,
    pub mode: FieldMode,
    /// 1 + ||A||_F, the scale used by the tolerances.
    pub scale: f64,
    /// Estimated diameter of W(A).
    pub diameter: f64,
    pub arcs: Vec<Arc>,
    pub segments: Vec<Segment>,
    pub corners: Vec<Corner>,
    /// Single-point boundary when A is (numerically) a multiple of I.
    pub degenerate: Option<Complex64>,
    pub domain: (f64, f64),
    pub periodic: bool,
    pub opts: BoundaryOptions,
}

/// H_theta = (e^{i theta} A + e^{-i theta} A*)/2, with Hermiticity enforced
/// by explicit symmetrization.
pub fn hermitian_sweep_matrix(a: &CMat, theta: f64) -> CMat {
    let n = a.nrows();
    let w = Complex64::from_polar(1.0, theta);
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = (w * a[(i, j)] + w.conj() * a[(j, i)].conj()) * 0.5;
        }
    }
    for i in 0..n {
        h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            h[(i, j)] = avg;
            h[(j, i)] = avg.conj();
        }
    }
    h
}

/// Boundary point at angle theta: unit top eigenvector v of H_theta,
/// z = v* A v, and the eigenvalue gap as a multiplicity diagnostic.
pub fn boundary_point(a: &CMat, theta: f64) -> Result<BoundaryPoint> {
    if !a.is_square() {
        return Err(CrouzeixError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(solve_at(a, theta))
}

/// Closed-form top eigenpair of a 3x3 Hermitian matrix (trigonometric
/// solution of the characteristic cubic, bilinear cross-product
/// eigenvector). Returns None when the configuration is too ill
/// conditioned for the closed form; callers then fall back to Jacobi.
#[allow(clippy::too_many_arguments)]
fn herm3_top(
    h11: f64,
    h22: f64,
    h33: f64,
    h12: Complex64,
    h13: Complex64,
    h23: Complex64,
) -> Option<(f64, f64, [Complex64; 3])> {
    let q = (h11 + h22 + h33) / 3.0;
    let a11 = h11 - q;
    let a22 = h22 - q;
    let a33 = h33 - q;
    let p2 = a11 * a11 + a22 * a22 + a33 * a33
        + 2.0 * (h12.norm_sqr() + h13.norm_sqr() + h23.norm_sqr());
    let scale = p2.sqrt().max(1e-300);
    if !p2.is_finite() {
        return None;
    }
    if p2 <= 0.0 {
        return Some((q, 0.0, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]));
    }
    let p = (p2 / 6.0).sqrt();
    // det(A - qI) via expansion, all terms real for Hermitian input
    let det = a11 * (a22 * a33 - h23.norm_sqr())
        - (h12 * (h12.conj() * a33 - h23 * h13.conj())).re
        + (h13 * (h12.conj() * h23.conj() - a22 * h13.conj())).re;
    let r = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3 * 2.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    let (top, second) = if l2 > l1 { (l2, l1) } else { (l1, l2.max(l3)) };
    let gap = top - second;
    if gap <= 1e-5 * scale {
        return None; // near-degenerate: let Jacobi handle it
    }
    // rows of H - top*I; eigenvector is bilinearly orthogonal to any two
    let r1 = [Complex64::new(h11 - top, 0.0), h12, h13];
    let r2 = [h12.conj(), Complex64::new(h22 - top, 0.0), h23];
    let r3 = [h13.conj(), h23.conj(), Complex64::new(h33 - top, 0.0)];
    let cross = |u: &[Complex64; 3], w: &[Complex64; 3]| -> [Complex64; 3] {
        [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ]
    };
    let cands = [cross(&r1, &r2), cross(&r1, &r3), cross(&r2, &r3)];
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (i, c) in cands.iter().enumerate() {
        let nn = c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr();
        if nn > best_norm {
            best_norm = nn;
            best = i;
        }
    }
    let nn = best_norm.sqrt();
    if !(nn > 1e-8 * scale * scale) {
        return None;
    }
    let v = [cands[best][0] / nn, cands[best][1] / nn, cands[best][2] / nn];
    // residual guard keeps the closed form honest
    let res0 = r1[0] * v[0] + r1[1] * v[1] + r1[2] * v[2];
    let res1 = r2[0] * v[0] + r2[1] * v[1] + r2[2] * v[2];
    let res2 = r3[0] * v[0] + r3[1] * v[1] + r3[2] * v[2];
    let res = (res0.norm_sqr() + res1.norm_sqr() + res2.norm_sqr()).sqrt();
    if res > 1e-12 * scale {
        return None;
    }
    Some((top, gap, v))
}

/// Allocation-light sample (no eigenvector) for the dense scan.
fn sample_at(a: &CMat, theta: f64) -> BoundarySample {
    let n = a.nrows();
    if n == 3 {
        let w = Complex64::from_polar(1.0, theta);
        let hd = |i: usize| (w * a[(i, i)] + w.conj() * a[(i, i)].conj()).re * 0.5;
        let ho = |i: usize, j: usize| (w * a[(i, j)] + w.conj() * a[(j, i)].conj()) * 0.5;
        if let Some((lambda, gap, v)) = herm3_top(hd(0), hd(1), hd(2), ho(0, 1), ho(0, 2), ho(1, 2)) {
            let mut z = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                let mut row = Complex64::new(0.0, 0.0);
                for j in 0..3 {
                    row += a[(i, j)] * v[j];
                }
                z += v[i].conj() * row;
            }
            return BoundarySample { theta, z, gap, lambda };
        }
        let p = solve_at(a, theta);
        return BoundarySample {
            theta,
            z: p.z,
            gap: p.gap,
            lambda: p.lambda,
        };
    }
    if n == 2 {
        let w = Complex64::from_polar(1.0, theta);
        let h11 = (w * a[(0, 0)] + w.conj() * a[(0, 0)].conj()).re * 0.5;
        let h22 = (w * a[(1, 1)] + w.conj() * a[(1, 1)].conj()).re * 0.5;
        let b = (w * a[(0, 1)] + w.conj() * a[(1, 0)].conj()) * 0.5;
        let delta = 0.5 * (h11 - h22);
        let r = (delta * delta + b.norm_sqr()).sqrt();
        let lambda = 0.5 * (h11 + h22) + r;
        let gap = 2.0 * r;
        // top eigenvector, stable branch
        let (v1, v2) = if delta >= 0.0 {
            (Complex64::new(r + delta, 0.0), b.conj())
        } else {
            (b, Complex64::new(r - delta, 0.0))
        };
        let nn = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
        if nn == 0.0 {
            // H is a multiple of I at this angle; pick e1
            let z = a[(0, 0)];
            return BoundarySample { theta, z, gap, lambda };
        }
        let (v1, v2) = (v1 / nn, v2 / nn);
        let z = v1.conj() * (a[(0, 0)] * v1 + a[(0, 1)] * v2)
            + v2.conj() * (a[(1, 0)] * v1 + a[(1, 1)] * v2);
        BoundarySample { theta, z, gap, lambda }
    } else {
        let p = solve_at(a, theta);
        BoundarySample {
            theta,
            z: p.z,
            gap: p.gap,
            lambda: p.lambda,
        }
    }
}

fn solve_at(a: &CMat, theta: f64) -> BoundaryPoint {
    let h = hermitian_sweep_matrix(a, theta);
    let eig = hermitian_eig(&h);
    let v = eig.vector(0);
    let z = a.quadratic_form(&v);
    BoundaryPoint {
        theta,
        z,
        v,
        gap: eig.top_gap(),
        lambda: eig.values[0],
    }
}

impl BoundaryApproximant {
    /// Direct eigensolve at theta (the map theta -> (z, v)).
    pub fn solve(&self, theta: f64) -> BoundaryPoint {
        solve_at(&self.a, theta)
    }

    /// Interpolated boundary value when an interpolant covers theta,
    /// otherwise a direct eigensolve.
    pub fn eval(&self, theta: f64) -> Complex64 {
        for arc in &self.arcs {
            for piece in &arc.pieces {
                if piece.contains(theta) {
                    return piece.eval(theta);
                }
            }
        }
        sample_at(&self.a, theta).z
    }

    /// All sampled boundary points; in Real mode the conjugates are
    /// appended so the full curve is covered.
    pub fn full_boundary_samples(&self) -> Vec<Complex64> {
        if let Some(mu) = self.degenerate {
            return vec![mu];
        }
        let mut out: Vec<Complex64> = Vec::new();
        for arc in &self.arcs {
            out.extend(arc.samples.iter().map(|s| s.z));
        }
        for seg in &self.segments {
            out.push(seg.start);
            out.push(seg.end);
        }
        if self.mode == FieldMode::Real {
            let mirrored: Vec<Complex64> = out.iter().map(|z| z.conj()).collect();
            out.extend(mirrored);
        }
        out
    }
}

const SEG_THETA_RESOLUTION: f64 = 1e-12;
const ENDPOINT_OFFSET: f64 = 1e-9;

/// Builds the boundary approximant of W(A).
pub fn build_boundary(a: &CMat, mode: FieldMode, opts: &BoundaryOptions) -> Result<BoundaryApproximant> {
    if !a.is_square() {
        return Err(CrouzeixError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    let scale = 1.0 + a.frobenius_norm();
    if !scale.is_finite() {
        return Err(CrouzeixError::Overflow(f64::INFINITY));
    }

    // degenerate: A a multiple of the identity (single-point boundary)
    let mut mu = Complex64::new(0.0, 0.0);
    for i in 0..n {
        mu += a[(i, i)];
    }
    mu /= n as f64;
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { a[(i, j)] - mu } else { a[(i, j)] };
            dev = dev.max(d.norm());
        }
    }
    let domain = match mode {
        FieldMode::Real => (std::f64::consts::PI, TWO_PI),
        FieldMode::Complex => (0.0, TWO_PI),
    };
    if n == 1 || dev <= 1e-13 * scale {
        return Ok(BoundaryApproximant {
            a: a.clone(),
            mode,
            scale,
            diameter: 0.0,
            arcs: vec![],
            segments: vec![],
            corners: vec![Corner { z: mu, theta: domain.0 }],
            degenerate: Some(mu),
            domain,
            periodic: mode == FieldMode::Complex,
            opts: opts.clone(),
        });
    }

    let periodic = mode == FieldMode::Complex;
    let steps = match mode {
        FieldMode::Real => (opts.pregrid_per_two_pi / 2).max(16),
        FieldMode::Complex => opts.pregrid_per_two_pi.max(32),
    };
    let h_step = (domain.1 - domain.0) / steps as f64;
    let count = if periodic { steps } else { steps + 1 };
    let samples: Vec<BoundarySample> = (0..count)
        .map(|i| sample_at(a, domain.0 + h_step * i as f64))
        .collect();

    // geometry scales
    let (mut re_lo, mut re_hi, mut im_lo, mut im_hi) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for s in &samples {
        re_lo = re_lo.min(s.z.re);
        re_hi = re_hi.max(s.z.re);
        im_lo = im_lo.min(s.z.im);
        im_hi = im_hi.max(s.z.im);
    }
    let diameter = ((re_hi - re_lo).powi(2) + (im_hi - im_lo).powi(2)).sqrt().max(1e-300);
    let gap_tol = opts.gap_rtol * scale;

    let mut steps_abs: Vec<f64> = Vec::with_capacity(samples.len());
    let pair_count = if periodic { samples.len() } else { samples.len() - 1 };
    for i in 0..pair_count {
        let zn = samples[(i + 1) % samples.len()].z;
        steps_abs.push((zn - samples[i].z).norm());
    }
    let mut sorted_steps = steps_abs.clone();
    sorted_steps.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let median_step = sorted_steps[sorted_steps.len() / 2];
    let jump_tol = (6.0 * median_step).max(1e-3 * diameter);

    // suspicious intervals: a jump of z or a (near-)multiple top eigenvalue
    let mut suspicious = vec![false; pair_count];
    for i in 0..pair_count {
        let gnext = samples[(i + 1) % samples.len()].gap;
        if steps_abs[i] > jump_tol || samples[i].gap <= gap_tol || gnext <= gap_tol {
            suspicious[i] = true;
        }
    }

    // group into maximal runs and resolve each to zero or more segments
    let mut segments: Vec<Segment> = Vec::new();
    let mut i = 0;
    while i < pair_count {
        if !suspicious[i] {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < pair_count && suspicious[i] {
            i += 1;
        }
        let run_end = i; // exclusive interval index
        let left = samples[run_start];
        let right = samples[run_end % samples.len()];
        let mut right_theta = right.theta;
        if periodic && run_end == pair_count {
            right_theta = domain.1; // wrapped neighbor is theta=0 == 2pi
        }
        resolve_segments(
            a,
            left.theta,
            left.z,
            right_theta,
            right.z,
            gap_tol,
            diameter,
            scale,
            0,
            6,
            &mut segments,
        );
    }
    segments.sort_by(|s, t| s.theta.partial_cmp(&t.theta).unwrap());
    segments.dedup_by(|s, t| (s.theta - t.theta).abs() < 4.0 * SEG_THETA_RESOLUTION);

    // corners: segment junctions first, then vertices (flat stretches)
    let mut corners: Vec<Corner> = Vec::new();
    for seg in &segments {
        corners.push(Corner { z: seg.start, theta: seg.theta });
        corners.push(Corner { z: seg.end, theta: seg.theta });
    }
    let flat_tol = 1e-8 * scale;
    let mut run = 0usize;
    for idx in 1..samples.len() {
        if (samples[idx].z - samples[run].z).norm() > flat_tol {
            if idx - run >= 3 {
                let mid = (run + idx - 1) / 2;
                corners.push(Corner {
                    z: samples[mid].z,
                    theta: samples[mid].theta,
                });
            }
            run = idx;
        }
    }
    if samples.len() - run >= 3 {
        let mid = (run + samples.len() - 1) / 2;
        corners.push(Corner {
            z: samples[mid].z,
            theta: samples[mid].theta,
        });
    }
    let corner_dedup = 1e-7 * scale;
    let mut kept: Vec<Corner> = Vec::new();
    for c in corners {
        if kept.iter().all(|k| (k.z - c.z).norm() > corner_dedup) {
            kept.push(c);
        }
    }
    let corners = kept;

    // split samples into arcs between segment angles
    let cuts: Vec<f64> = segments.iter().map(|s| s.theta).collect();
    let mut arcs: Vec<Arc> = Vec::new();
    if cuts.is_empty() {
        arcs.push(Arc {
            samples: samples.clone(),
            pieces: vec![],
            closed: periodic,
        });
    } else {
        let bounds: Vec<(f64, f64)> = if periodic {
            let mut b = Vec::new();
            for w in cuts.windows(2) {
                b.push((w[0], w[1]));
            }
            b.push((cuts[cuts.len() - 1], cuts[0] + TWO_PI));
            b
        } else {
            let mut b = Vec::new();
            let mut prev = domain.0;
            for &c in &cuts {
                b.push((prev, c));
                prev = c;
            }
            b.push((prev, domain.1));
            b
        };
        for (lo, hi) in bounds {
            if hi - lo <= 4.0 * ENDPOINT_OFFSET {
                continue;
            }
            let mut arc_samples: Vec<BoundarySample> = Vec::new();
            let interior = |theta: f64| theta > lo + ENDPOINT_OFFSET && theta < hi - ENDPOINT_OFFSET;
            // synthesized one-sided endpoint samples
            let lo_eff = if cuts.iter().any(|c| (c - lo).abs() < 1e-9) {
                lo + ENDPOINT_OFFSET
            } else {
                lo
            };
            let hi_eff = if cuts.iter().any(|c| (c - (hi % TWO_PI)).abs() < 1e-9 || (c - hi).abs() < 1e-9) {
                hi - ENDPOINT_OFFSET
            } else {
                hi
            };
            arc_samples.push(sample_at(a, lo_eff));
            for s in &samples {
                for shift in [0.0, TWO_PI] {
                    let th = s.theta + shift;
                    if interior(th) {
                        let mut s2 = *s;
                        s2.theta = th;
                        arc_samples.push(s2);
                    }
                }
            }
            arc_samples.push(sample_at(a, hi_eff));
            arc_samples.sort_by(|x, y| x.theta.partial_cmp(&y.theta).unwrap());
            arc_samples.dedup_by(|x, y| (x.theta - y.theta).abs() < 1e-13);
            arcs.push(Arc {
                samples: arc_samples,
                pieces: vec![],
                closed: false,
            });
        }
    }

    // arc-length refinement: bound how far z can move between neighbors so
    // the search grid cannot skip a feature of |p|
    let motion_tol = (2.0 * median_step).max(diameter / 256.0);
    let budget = 4 * samples.len();
    let mut extra = 0usize;
    for arc in &mut arcs {
        let mut k = 0usize;
        while k + 1 < arc.samples.len() && extra < budget {
            let d = (arc.samples[k + 1].z - arc.samples[k].z).norm();
            let w = arc.samples[k + 1].theta - arc.samples[k].theta;
            if d > motion_tol && w > 1e-11 {
                let tm = 0.5 * (arc.samples[k].theta + arc.samples[k + 1].theta);
                arc.samples.insert(k + 1, sample_at(a, tm));
                extra += 1;
            } else {
                k += 1;
            }
        }
    }

    let mut boundary = BoundaryApproximant {
        a: a.clone(),
        mode,
        scale,
        diameter,
        arcs,
        segments,
        corners,
        degenerate: None,
        domain,
        periodic,
        opts: opts.clone(),
    };

    if opts.fit_interpolant {
        fit_arcs(&mut boundary)?;
    }
    Ok(boundary)
}

#[allow(clippy::too_many_arguments)]
fn resolve_segments(
    a: &CMat,
    t_lo: f64,
    z_lo: Complex64,
    t_hi: f64,
    z_hi: Complex64,
    gap_tol: f64,
    diameter: f64,
    scale: f64,
    depth: usize,
    both_budget: usize,
    out: &mut Vec<Segment>,
) {
    let floor = (1e-9 * diameter).max(1e-14 * scale);
    let d_total = (z_hi - z_lo).norm();
    if d_total <= floor {
        return;
    }
    if t_hi - t_lo <= SEG_THETA_RESOLUTION || depth > 48 {
        let theta = 0.5 * (t_lo + t_hi);
        if let Some(seg) = make_segment(a, theta, z_lo, z_hi, scale) {
            out.push(seg);
        }
        return;
    }
    let tm = 0.5 * (t_lo + t_hi);
    let sm = sample_at(a, tm);
    if sm.gap <= gap_tol.min(1e-12 * scale) {
        // landed on the degenerate angle itself
        if let Some(seg) = make_segment(a, tm, z_lo, z_hi, scale) {
            let (s_lo, s_hi) = (seg.start, seg.end);
            out.push(seg);
            resolve_segments(a, t_lo, z_lo, tm - SEG_THETA_RESOLUTION, s_lo, gap_tol, diameter, scale, depth + 1, both_budget, out);
            resolve_segments(a, tm + SEG_THETA_RESOLUTION, s_hi, t_hi, z_hi, gap_tol, diameter, scale, depth + 1, both_budget, out);
        }
        return;
    }
    // a jump keeps its size as the bracket shrinks; smooth motion halves.
    // Recurse only into halves that still look like jumps.
    let dl = (sm.z - z_lo).norm();
    let dr = (z_hi - sm.z).norm();
    let thresh = floor.max(0.6 * d_total);
    let go_left = dl > thresh;
    let go_right = dr > thresh;
    match (go_left, go_right) {
        (true, true) => {
            if both_budget > 0 {
                resolve_segments(a, t_lo, z_lo, tm, sm.z, gap_tol, diameter, scale, depth + 1, both_budget - 1, out);
                resolve_segments(a, tm, sm.z, t_hi, z_hi, gap_tol, diameter, scale, depth + 1, both_budget - 1, out);
            } else if dl >= dr {
                resolve_segments(a, t_lo, z_lo, tm, sm.z, gap_tol, diameter, scale, depth + 1, 0, out);
            } else {
                resolve_segments(a, tm, sm.z, t_hi, z_hi, gap_tol, diameter, scale, depth + 1, 0, out);
            }
        }
        (true, false) => {
            resolve_segments(a, t_lo, z_lo, tm, sm.z, gap_tol, diameter, scale, depth + 1, both_budget, out)
        }
        (false, true) => {
            resolve_segments(a, tm, sm.z, t_hi, z_hi, gap_tol, diameter, scale, depth + 1, both_budget, out)
        }
        (false, false) => {} // smooth halving on both sides: no jump here
    }
}

/// Builds the segment at a located degenerate angle from the top eigenspace
/// of H_theta restricted to A.
fn make_segment(a: &CMat, theta: f64, z_before: Complex64, z_after: Complex64, scale: f64) -> Option<Segment> {
    let n = a.nrows();
    let h = hermitian_sweep_matrix(a, theta);
    let eig = hermitian_eig(&h);
    let lambda = eig.values[0];
    let gap = eig.values[0] - eig.values[1];
    if gap > 1e-3 * scale {
        // the top eigenvalue is plainly simple here: whatever triggered the
        // scan, it is not a boundary segment
        return None;
    }
    let window = (1e-6 * scale).max(2.0 * gap.abs());
    let mut k = 1;
    while k < n && eig.values[0] - eig.values[k] <= window {
        k += 1;
    }
    let k = k.max(2).min(n);

    let mut basis = CMat::zeros(n, k);
    for j in 0..k {
        basis.set_column(j, &eig.vector(j));
    }
    // restriction of the "position along the support line" form
    let w = Complex64::from_polar(1.0, theta);
    let ka = basis.adjoint().mul(&a.mul(&basis)); // k x k
    let mut s = CMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            s[(i, j)] = (w * ka[(i, j)] - w.conj() * ka[(j, i)].conj()) / Complex64::new(0.0, 2.0);
        }
    }
    for i in 0..k {
        s[(i, i)] = Complex64::new(s[(i, i)].re, 0.0);
        for j in (i + 1)..k {
            let avg = (s[(i, j)] + s[(j, i)].conj()) * 0.5;
            s[(i, j)] = avg;
            s[(j, i)] = avg.conj();
        }
    }
    let se = hermitian_eig(&s);
    let w_hi = se.vector(0);
    let w_lo = se.vector(k - 1);
    let mut v_hi = basis.matvec(&w_hi);
    let mut v_lo = basis.matvec(&w_lo);
    crate::linalg::normalize(&mut v_hi);
    crate::linalg::normalize(&mut v_lo);
    let z_hi_pt = a.quadratic_form(&v_hi);
    let z_lo_pt = a.quadratic_form(&v_lo);
    if (z_hi_pt - z_lo_pt).norm() <= 1e-13 * scale {
        return None; // not actually a segment
    }

    // orient: `start` continues the arc approaching from below
    let d_lo = (z_lo_pt - z_before).norm() + (z_hi_pt - z_after).norm();
    let d_hi = (z_hi_pt - z_before).norm() + (z_lo_pt - z_after).norm();
    let (start, end, v_start, v_end, w_start, w_end) = if d_lo <= d_hi {
        (z_lo_pt, z_hi_pt, v_lo, v_hi, w_lo, w_hi)
    } else {
        (z_hi_pt, z_lo_pt, v_hi, v_lo, w_hi, w_lo)
    };
    Some(Segment {
        theta,
        start,
        end,
        v_start,
        v_end,
        basis,
        w_start,
        w_end,
        lambda,
    })
}

/// Adaptive Chebyshev fit of every arc.
fn fit_arcs(boundary: &mut BoundaryApproximant) -> Result<()> {
    let tol = boundary.opts.interp_tol * boundary.scale;
    let degree = boundary.opts.piece_degree.max(4);
    let a = boundary.a.clone();
    let domain = boundary.domain;
    for arc in &mut boundary.arcs {
        let (lo, hi) = if arc.closed {
            domain
        } else {
            (arc.theta_lo(), arc.theta_hi())
        };
        if hi - lo <= 1e-12 {
            continue;
        }
        let mut pieces = Vec::new();
        fit_recursive(&a, lo, hi, degree, tol, 0, &mut pieces);
        arc.pieces = pieces;
    }
    Ok(())
}

fn fit_recursive(a: &CMat, lo: f64, hi: f64, degree: usize, tol: f64, depth: usize, out: &mut Vec<ChebPiece>) {
    let nodes = lobatto_nodes(lo, hi, degree);
    let values: Vec<Complex64> = nodes.iter().map(|&t| sample_at(a, t).z).collect();
    let piece = ChebPiece::fit(lo, hi, &values);
    // verify between the nodes
    let mut err: f64 = 0.0;
    for k in 0..degree {
        let t = 0.5 * (nodes[k] + nodes[k + 1]);
        err = err.max((piece.eval(t) - sample_at(a, t).z).norm());
    }
    if err <= tol || depth >= 24 || hi - lo <= 1e-10 {
        out.push(piece);
        return;
    }
    let mid = 0.5 * (lo + hi);
    fit_recursive(a, lo, mid, degree, tol, depth + 1, out);
    fit_recursive(a, mid, hi, degree, tol, depth + 1, out);
}

// ---------------------------------------------------------------------------
// |p| search over the boundary
// ---------------------------------------------------------------------------

/// One attainment candidate.
#[derive(Debug, Clone)]
pub struct AttainPoint {
    pub theta: f64,
    pub z: Complex64,
    pub v: Vec<Complex64>,
    pub value: f64,
    pub is_corner: bool,
}

/// Z_eps: near-optimal local maximizers of |p| on the boundary.
#[derive(Debug, Clone)]
pub struct AttainmentSet {
    pub points: Vec<AttainPoint>,
    pub epsilon: f64,
    pub global_value: f64,
    /// |p| is numerically constant on the boundary; the stationarity
    /// measure is forgone in this case.
    pub forgo: bool,
}

/// Local maximizers on the smooth part of the boundary.
#[derive(Debug, Clone)]
pub struct LocalMaxima {
    /// (theta, z, |p(z)|)
    pub points: Vec<(f64, Complex64, f64)>,
    pub constant: bool,
}

struct SearchOutcome {
    /// All candidates: smooth local maximizers, segment-interior
    /// maximizers, corners and (real-mode) domain endpoints.
    candidates: Vec<AttainPoint>,
    global: f64,
    constant: bool,
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

fn search_boundary(p: &Polynomial, b: &BoundaryApproximant) -> Result<SearchOutcome> {
    if p.is_zero() {
        return Err(CrouzeixError::ZeroPolynomial);
    }
    if let Some(mu) = b.degenerate {
        let n = b.a.nrows();
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[0] = Complex64::new(1.0, 0.0);
        let value = p.eval(mu).norm();
        return Ok(SearchOutcome {
            candidates: vec![AttainPoint {
                theta: b.domain.0,
                z: mu,
                v,
                value,
                is_corner: true,
            }],
            global: value,
            constant: true,
        });
    }

    let mut candidates: Vec<AttainPoint> = Vec::new();
    let mut gmin = f64::MAX;
    let mut gmax: f64 = 0.0;
    let theta_tol = b.opts.theta_tol;

    for arc in &b.arcs {
        let g: Vec<f64> = arc.samples.iter().map(|s| p.eval(s.z).norm()).collect();
        let len = g.len();
        if len == 0 {
            continue;
        }
        for &v in &g {
            gmin = gmin.min(v);
            gmax = gmax.max(v);
        }
        if len == 1 {
            let bp = b.solve(arc.samples[0].theta);
            candidates.push(AttainPoint {
                theta: bp.theta,
                z: bp.z,
                v: bp.v,
                value: p.eval(bp.z).norm(),
                is_corner: false,
            });
            continue;
        }
        let neighbor = |i: usize, off: i64| -> Option<usize> {
            let j = i as i64 + off;
            if j >= 0 && (j as usize) < len {
                Some(j as usize)
            } else if arc.closed {
                let l = len as i64;
                Some((((j % l) + l) % l) as usize)
            } else {
                None
            }
        };
        // wrap-aware local max scan with plateau handling; comparisons use
        // the plateau's top value with a noise band so that flat stretches
        // (vertices, constant |p|) cannot hide a representative
        let mut idx = 0usize;
        while idx < len {
            // plateau run [idx, run_end]
            let mut run_end = idx;
            while run_end + 1 < len && (g[run_end + 1] - g[idx]).abs() <= 1e-15 * g[idx].abs() {
                run_end += 1;
            }
            let gv = g[idx..=run_end].iter().cloned().fold(f64::MIN, f64::max);
            let band = 1e-14 * gv.abs();
            let before = neighbor(idx, -1).map(|j| g[j]);
            let after = neighbor(run_end, 1).map(|j| g[j]);
            let up_left = before.map_or(true, |gb| gv >= gb - band);
            let up_right = after.map_or(true, |ga| gv >= ga - band);
            let strict = before.map_or(true, |gb| gv > gb + band)
                || after.map_or(true, |ga| gv > ga + band);
            let whole_closed = arc.closed && idx == 0 && run_end + 1 == len;
            if whole_closed || (up_left && up_right && (strict || run_end > idx)) {
                let is_endpoint = (idx == 0 && !arc.closed) || (run_end == len - 1 && !arc.closed);
                if run_end > idx || is_endpoint {
                    // plateau or endpoint: take the middle/end sample as-is
                    let pick = (idx + run_end) / 2;
                    let bp = b.solve(arc.samples[pick].theta);
                    candidates.push(AttainPoint {
                        theta: bp.theta,
                        z: bp.z,
                        v: bp.v,
                        value: p.eval(bp.z).norm(),
                        is_corner: false,
                    });
                } else {
                    // interior strict maximum: golden refinement between the
                    // bracketing neighbors (direct eigensolves)
                    let lo_idx = neighbor(idx, -1).unwrap_or(idx);
                    let hi_idx = neighbor(run_end, 1).unwrap_or(run_end);
                    let (tlo, thi) = (arc.samples[lo_idx].theta, arc.samples[hi_idx].theta);
                    let (tlo, thi) = if tlo < thi { (tlo, thi) } else { (tlo, thi + TWO_PI) };
                    let a_ref = &b.a;
                    let theta_star = golden_max(
                        |t| p.eval(sample_at(a_ref, t).z).norm(),
                        tlo,
                        thi,
                        theta_tol,
                    );
                    let bp = b.solve(theta_star);
                    candidates.push(AttainPoint {
                        theta: bp.theta,
                        z: bp.z,
                        v: bp.v,
                        value: p.eval(bp.z).norm(),
                        is_corner: false,
                    });
                }
            }
            idx = run_end + 1;
        }
    }

    // segment interiors
    for seg in &b.segments {
        let chord = seg.end - seg.start;
        let vals: Vec<f64> = (0..=64)
            .map(|k| {
                let t = k as f64 / 64.0;
                p.eval(seg.start + chord * t).norm()
            })
            .collect();
        for &v in &vals {
            gmin = gmin.min(v);
            gmax = gmax.max(v);
        }
        for k in 1..64 {
            if vals[k] >= vals[k - 1] && vals[k] >= vals[k + 1] && (vals[k] > vals[k - 1] || vals[k] > vals[k + 1]) {
                let t_star = golden_max(
                    |t| p.eval(seg.start + chord * t).norm(),
                    (k - 1) as f64 / 64.0,
                    (k + 1) as f64 / 64.0,
                    1e-12,
                );
                let (z, v) = seg.point_at(&b.a, t_star);
                candidates.push(AttainPoint {
                    theta: seg.theta,
                    z,
                    v,
                    value: p.eval(z).norm(),
                    is_corner: false,
                });
            }
        }
    }

    // corners, evaluated explicitly: the smooth search cannot see them
    for corner in &b.corners {
        let value = p.eval(corner.z).norm();
        gmin = gmin.min(value);
        gmax = gmax.max(value);
        let v = corner_vector(b, corner);
        candidates.push(AttainPoint {
            theta: corner.theta,
            z: corner.z,
            v,
            value,
            is_corner: true,
        });
    }

    // dedupe by position: prefer higher value, then corner identity
    candidates.sort_by(|x, y| {
        y.value
            .partial_cmp(&x.value)
            .unwrap()
            .then(y.is_corner.cmp(&x.is_corner))
            .then(x.theta.partial_cmp(&y.theta).unwrap())
    });
    let dedupe_tol = 1e-7 * b.scale;
    let mut kept: Vec<AttainPoint> = Vec::new();
    for c in candidates {
        if kept.iter().all(|k| (k.z - c.z).norm() > dedupe_tol) {
            kept.push(c);
        }
    }

    let global = kept.iter().map(|c| c.value).fold(0.0, f64::max);
    let constant = gmax > 0.0 && (gmax - gmin) <= b.opts.const_rtol * gmax;
    Ok(SearchOutcome {
        candidates: kept,
        global,
        constant,
    })
}

/// Attaining unit vector at a corner. A segment endpoint reuses the
/// eigenspace basis; a vertex gets a direct eigensolve at its angle.
fn corner_vector(b: &BoundaryApproximant, corner: &Corner) -> Vec<Complex64> {
    for seg in &b.segments {
        if (seg.start - corner.z).norm() <= 1e-9 * b.scale {
            return seg.v_start.clone();
        }
        if (seg.end - corner.z).norm() <= 1e-9 * b.scale {
            return seg.v_end.clone();
        }
    }
    let bp = b.solve(corner.theta);
    bp.v
}

/// Global maximum of |p| over the boundary with the set of attaining
/// points (relative tie tolerance 1e-12).
pub fn sup_abs_poly(p: &Polynomial, b: &BoundaryApproximant) -> Result<(f64, Vec<AttainPoint>)> {
    let out = search_boundary(p, b)?;
    let cut = out.global * (1.0 - 1e-12);
    let argmax: Vec<AttainPoint> = out
        .candidates
        .iter()
        .filter(|c| c.value >= cut)
        .cloned()
        .collect();
    Ok((out.global, argmax))
}

/// All strict local maximizers of |p| on the smooth part of the boundary.
/// Corners are excluded; the boundary is not smooth there. Returns the
/// constancy flag instead of points when |p| does not vary.
pub fn local_maximizers(p: &Polynomial, b: &BoundaryApproximant) -> Result<LocalMaxima> {
    let out = search_boundary(p, b)?;
    if out.constant {
        return Ok(LocalMaxima {
            points: vec![],
            constant: true,
        });
    }
    Ok(LocalMaxima {
        points: out
            .candidates
            .iter()
            .filter(|c| !c.is_corner)
            .map(|c| (c.theta, c.z, c.value))
            .collect(),
        constant: false,
    })
}

/// Z_eps(p, A): qualifying local maximizers united with the global argmax
/// set (corners included through the latter).
pub fn z_eps_set(p: &Polynomial, b: &BoundaryApproximant, epsilon: f64) -> Result<AttainmentSet> {
    if !(epsilon >= 0.0) {
        return Err(CrouzeixError::DimensionMismatch(
            "epsilon must be nonnegative".into(),
        ));
    }
    let out = search_boundary(p, b)?;
    let cut_eps = out.global * (1.0 - epsilon);
    let cut_tie = out.global * (1.0 - 1e-12);
    let mut points: Vec<AttainPoint> = Vec::new();
    for c in &out.candidates {
        let qualifies_local = !c.is_corner && c.value >= cut_eps && !out.constant;
        let qualifies_argmax = c.value >= cut_tie;
        if qualifies_local || qualifies_argmax {
            points.push(c.clone());
        }
    }
    points.sort_by(|x, y| {
        y.value
            .partial_cmp(&x.value)
            .unwrap()
            .then(x.theta.partial_cmp(&y.theta).unwrap())
    });
    Ok(AttainmentSet {
        points,
        epsilon,
        global_value: out.global,
        forgo: out.constant,
    })
}
