//! Random unitary/orthogonal matrices for reference assemblies and
//! invariance tests.

use num_complex::Complex64;
use rand::Rng;

use super::cmat::{inner, normalize, CMat};

/// Haar-ish random unitary via Gaussian QR (modified Gram-Schmidt, run
/// twice for orthogonality at working precision).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(gauss(rng), gauss(rng)))
                .collect()
        })
        .collect();
    orthonormalize(&mut cols);
    let mut q = CMat::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        q.set_column(j, col);
    }
    q
}

/// Real orthogonal variant.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..n).map(|_| Complex64::new(gauss(rng), 0.0)).collect())
        .collect();
    orthonormalize(&mut cols);
    let mut q = CMat::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        q.set_column(j, col);
    }
    q
}

fn orthonormalize(cols: &mut [Vec<Complex64>]) {
    let n = cols.len();
    for _pass in 0..2 {
        for j in 0..n {
            for k in 0..j {
                let proj = inner(&cols[k], &cols[j]);
                let prev = cols[k].clone();
                for (x, p) in cols[j].iter_mut().zip(prev.iter()) {
                    *x -= proj * p;
                }
            }
            let nrm = normalize(&mut cols[j]);
            if nrm == 0.0 {
                // astronomically unlikely; replace by a unit coordinate
                let len = cols[j].len();
                cols[j][j % len] = Complex64::new(1.0, 0.0);
            }
        }
    }
}

/// Standard normal via Box-Muller on the generator's uniform doubles, so the
/// stream depends only on the RNG state and stays stable across platforms.
pub fn gauss<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen::<f64>();
        let u2: f64 = rng.gen::<f64>();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    }
}
