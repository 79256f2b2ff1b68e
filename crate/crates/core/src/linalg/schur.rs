//! Complex Hessenberg reduction and shifted-QR triangularization.
//!
//! Used to re-triangularize matrices after unitary similarity transforms,
//! to extract eigenvalues of Hessenberg iterates for figure output, and as
//! the companion-matrix engine behind polynomial root finding.

use num_complex::Complex64;

use super::cmat::CMat;
use crate::error::{CrouzeixError, Result};

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Householder reduction to upper Hessenberg form by unitary similarity.
/// Real input stays exactly real.
pub fn hessenberg(a: &CMat) -> CMat {
    let n = a.nrows();
    assert!(a.is_square());
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        // x = H[k+1.., k]
        let mut x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        // u = x + phase * ||x|| e1 avoids cancellation
        x[0] += phase * xnorm;
        let unorm_sq: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        if unorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / unorm_sq;

        // H <- P H with P = I - beta u u*
        for j in 0..n {
            let mut dot = czero();
            for (idx, i) in (k + 1..n).enumerate() {
                dot += x[idx].conj() * h[(i, j)];
            }
            dot *= beta;
            for (idx, i) in (k + 1..n).enumerate() {
                let val = x[idx] * dot;
                h[(i, j)] -= val;
            }
        }
        // H <- H P
        for i in 0..n {
            let mut dot = czero();
            for (idx, j) in (k + 1..n).enumerate() {
                dot += h[(i, j)] * x[idx];
            }
            dot *= beta;
            for (idx, j) in (k + 1..n).enumerate() {
                let val = dot * x[idx].conj();
                h[(i, j)] -= val;
            }
        }
        // zero out the annihilated part explicitly
        for i in k + 2..n {
            h[(i, k)] = czero();
        }
    }
    h
}

/// Givens pair (c real, s complex) with G [f; g] = [r; 0] for
/// G = [[c, s], [-conj(s), c]].
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let gf = f.norm();
    let gg = g.norm();
    if gg == 0.0 {
        return (1.0, czero());
    }
    if gf == 0.0 {
        return (0.0, g.conj() / gg);
    }
    let d = (gf * gf + gg * gg).sqrt();
    let c = gf / d;
    let s = (f / gf) * g.conj() / d;
    (c, s)
}

fn wilkinson_shift(h: &CMat, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let e1 = tr_half + disc;
    let e2 = tr_half - disc;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

/// Triangularizes a square complex matrix by the shifted QR iteration,
/// returning the (unitarily similar) upper triangular factor.
pub fn schur_triangular(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(CrouzeixError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let mut h = hessenberg(a);
    if n < 2 {
        return Ok(h);
    }
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;

    let mut hi = n - 1;
    let mut stuck_iters = 0usize;
    let mut total_iters = 0usize;
    let max_total = 60 * n;

    loop {
        // deflate converged subdiagonals
        while hi > 0 {
            let sub = h[(hi, hi - 1)].norm();
            let local = h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm();
            if sub <= eps * local.max(scale * eps) {
                h[(hi, hi - 1)] = czero();
                hi -= 1;
                stuck_iters = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            break;
        }
        // active block [lo..=hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let local = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * local.max(scale * eps) {
                h[(lo, lo - 1)] = czero();
                break;
            }
            lo -= 1;
        }

        total_iters += 1;
        stuck_iters += 1;
        if total_iters > max_total {
            return Err(CrouzeixError::EigFailure);
        }

        let mut mu = wilkinson_shift(&h, hi);
        if stuck_iters % 12 == 0 {
            // exceptional shift to break symmetric stalls
            mu += Complex64::new(1.5 * h[(hi, hi - 1)].norm(), 0.5 * h[(hi, hi - 1)].norm());
        }

        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rots.push((c, s));
            // left rotation on rows k, k+1
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + y * s;
                h[(k + 1, j)] = -x * s.conj() + y * c;
            }
            h[(k + 1, k)] = czero();
        }
        for (idx, (c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            // right multiplication by G* on columns k, k+1
            let top = (k + 2).min(hi + 1);
            for i in 0..top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * *c + y * s.conj();
                h[(i, k + 1)] = -x * *s + y * *c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }

    // clean the strictly lower part
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = czero();
        }
    }
    Ok(h)
}

/// Eigenvalues via Schur triangularization; order is unspecified.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    let t = schur_triangular(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}
