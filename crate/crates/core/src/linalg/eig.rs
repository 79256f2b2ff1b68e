//! Dense Hermitian eigendecomposition for small matrices.
//!
//! n = 1 and n = 2 are handled in closed form; larger orders use cyclic
//! Jacobi with complex rotations, which keeps full accuracy on the nearly
//! degenerate sweep matrices produced by the boundary scan.

use num_complex::Complex64;

use super::cmat::CMat;

/// Eigenvalues in descending order with matching unit eigenvector columns.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermitianEig {
    /// Gap between the two largest eigenvalues (0 for n = 1).
    pub fn top_gap(&self) -> f64 {
        if self.values.len() < 2 {
            0.0
        } else {
            self.values[0] - self.values[1]
        }
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }
}

/// Eigendecomposition of a Hermitian matrix. The input is trusted to be
/// Hermitian; only its lower-left values are implied by symmetry but the
/// full matrix is read, so enforce symmetry upstream.
pub fn hermitian_eig(m: &CMat) -> HermitianEig {
    let n = m.nrows();
    assert!(m.is_square(), "hermitian_eig needs a square matrix");
    match n {
        0 => HermitianEig {
            values: vec![],
            vectors: CMat::zeros(0, 0),
        },
        1 => HermitianEig {
            values: vec![m[(0, 0)].re],
            vectors: CMat::identity(1),
        },
        2 => eig2(m),
        _ => jacobi(m),
    }
}

/// Closed-form 2x2 Hermitian eigendecomposition.
fn eig2(m: &CMat) -> HermitianEig {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let babs = b.norm();

    let half_tr = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let r = (half_diff * half_diff + babs * babs).sqrt();
    let l1 = half_tr + r;
    let l2 = half_tr - r;

    let mut vecs = CMat::zeros(2, 2);
    if r == 0.0 || babs == 0.0 {
        // already diagonal: order columns by the diagonal
        if a >= d {
            vecs[(0, 0)] = Complex64::new(1.0, 0.0);
            vecs[(1, 1)] = Complex64::new(1.0, 0.0);
        } else {
            vecs[(1, 0)] = Complex64::new(1.0, 0.0);
            vecs[(0, 1)] = Complex64::new(1.0, 0.0);
        }
        return HermitianEig {
            values: vec![l1.max(l2), l1.min(l2)],
            vectors: vecs,
        };
    }

    // Candidate eigenvectors (b, l - a) and (l - d, conj(b)); pick the one
    // with the larger norm for stability near either axis.
    for (k, l) in [l1, l2].iter().enumerate() {
        let c1 = [b, Complex64::new(l - a, 0.0)];
        let c2 = [Complex64::new(l - d, 0.0), b.conj()];
        let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
        let n2 = c2[0].norm_sqr() + c2[1].norm_sqr();
        let (mut x, mut y) = if n1 >= n2 { (c1[0], c1[1]) } else { (c2[0], c2[1]) };
        let nn = (x.norm_sqr() + y.norm_sqr()).sqrt();
        x /= nn;
        y /= nn;
        vecs[(0, k)] = x;
        vecs[(1, k)] = y;
    }
    HermitianEig {
        values: vec![l1, l2],
        vectors: vecs,
    }
}

const JACOBI_MAX_SWEEPS: usize = 40;

fn off_diag_sq(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += m[(i, j)].norm_sqr();
        }
    }
    2.0 * s
}

/// Cyclic Jacobi with complex rotations.
fn jacobi(m: &CMat) -> HermitianEig {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = CMat::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return HermitianEig {
            values: vec![0.0; n],
            vectors: v,
        };
    }
    let stop = (1e-15 * scale) * (1e-15 * scale);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diag_sq(&a) <= stop {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let abs_apq = apq.norm();
                if abs_apq <= 1e-60 * scale.max(1.0) {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let u = apq / abs_apq; // phase of the pivot

                // rotation angle from the real 2x2 after phase absorption:
                // small-magnitude root of t^2 - 2 tau t - 1 = 0
                let tau = (aqq - app) / (2.0 * abs_apq);
                let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = -sign / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let su = u * s; // complex rotation entry
                let su_conj = u.conj() * s;

                // rows/cols k != p, q ; keep the matrix exactly Hermitian
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let nkp = akp * c + akq * su_conj;
                    let nkq = -akp * su + akq * c;
                    a[(k, p)] = nkp;
                    a[(p, k)] = nkp.conj();
                    a[(k, q)] = nkq;
                    a[(q, k)] = nkq.conj();
                }
                let new_pp = app * c * c + aqq * s * s + 2.0 * s * c * abs_apq;
                let new_qq = app * s * s + aqq * c * c - 2.0 * s * c * abs_apq;
                a[(p, p)] = Complex64::new(new_pp, 0.0);
                a[(q, q)] = Complex64::new(new_qq, 0.0);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * su_conj;
                    v[(k, q)] = -vkp * su + vkq * c;
                }
            }
        }
    }

    // sort descending
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let col = v.column(i);
        vectors.set_column(k, &col);
    }
    HermitianEig { values, vectors }
}
