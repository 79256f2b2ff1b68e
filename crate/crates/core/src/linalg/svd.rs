//! Largest-singular-triple computation for small complex matrices.
//!
//! The denominator of the ratio only needs sigma_max with its singular pair
//! and the gap sigma_1 - sigma_2, so we go through the Hermitian
//! eigendecomposition of M*M with a magnitude prescale that keeps the
//! squared norms inside f64 range even for the enormous iterates the
//! optimizer produces.

use num_complex::Complex64;

use super::cmat::{normalize, CMat};
use super::eig::hermitian_eig;

#[derive(Debug, Clone)]
pub struct TopSingular {
    pub sigma: f64,
    /// Left unit singular vector u with u* M w = sigma.
    pub u: Vec<Complex64>,
    /// Right unit singular vector w.
    pub w: Vec<Complex64>,
    /// sigma_1 - sigma_2 (0 for 1x1).
    pub gap: f64,
    /// All singular values, descending.
    pub all: Vec<f64>,
}

/// Largest singular value and unit singular pair of a square complex matrix.
/// Returns sigma = 0 with arbitrary unit vectors for the zero matrix.
pub fn top_singular(m: &CMat) -> TopSingular {
    let n = m.nrows();
    assert!(m.is_square());
    let scale = m.max_abs_entry();
    if scale == 0.0 || !scale.is_finite() {
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        let mut w = u.clone();
        if n > 0 {
            u[0] = Complex64::new(1.0, 0.0);
            w[0] = Complex64::new(1.0, 0.0);
        }
        return TopSingular {
            sigma: if scale.is_finite() { 0.0 } else { f64::INFINITY },
            u,
            w,
            gap: 0.0,
            all: vec![if scale.is_finite() { 0.0 } else { f64::INFINITY }; n],
        };
    }

    let ms = m.scale(Complex64::new(1.0 / scale, 0.0));
    let mut gram = ms.adjoint().mul(&ms);
    // enforce exact Hermitian structure before the eigensolve
    for i in 0..n {
        gram[(i, i)] = Complex64::new(gram[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (gram[(i, j)] + gram[(j, i)].conj()) * 0.5;
            gram[(i, j)] = avg;
            gram[(j, i)] = avg.conj();
        }
    }
    let eig = hermitian_eig(&gram);
    let all: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt() * scale).collect();
    let sigma = all[0];
    let w = eig.vector(0);
    let mut u = ms.matvec(&w);
    let un = normalize(&mut u);
    if un == 0.0 {
        u = vec![Complex64::new(0.0, 0.0); n];
        u[0] = Complex64::new(1.0, 0.0);
    }
    let gap = if n > 1 { all[0] - all[1] } else { 0.0 };
    TopSingular { sigma, u, w, gap, all }
}
