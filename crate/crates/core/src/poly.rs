//! Polynomials with complex coefficients in ascending order: `coeffs[j]`
//! multiplies zeta^j.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CrouzeixError, Result};
use crate::linalg::{eigenvalues, CMat};

/// Relative size under which a leading coefficient is deflated and its
/// degree reported as a root at infinity.
pub const ROOT_DEFLATION_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

/// Finite roots plus the count of degrees deflated away as roots at
/// infinity (optimal polynomials often send roots off to huge modulus).
#[derive(Debug, Clone)]
pub struct Roots {
    pub finite: Vec<Complex64>,
    pub at_infinity: usize,
}

impl Polynomial {
    /// Coefficients in ascending order; at least one entry required.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(CrouzeixError::EmptyPolynomial);
        }
        Ok(Polynomial { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Polynomial::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The monomial zeta^k padded with zeros up to degree bound m.
    pub fn monomial(k: usize, m: usize) -> Result<Self> {
        if k > m {
            return Err(CrouzeixError::DimensionMismatch(format!(
                "monomial degree {k} exceeds degree bound {m}"
            )));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Polynomial::new(c)
    }

    /// (zeta - lambda)^k expanded, padded up to degree bound m.
    pub fn shifted_power(lambda: Complex64, k: usize, m: usize) -> Result<Self> {
        if k > m {
            return Err(CrouzeixError::DimensionMismatch(format!(
                "degree {k} exceeds degree bound {m}"
            )));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); m + 1];
        c[0] = Complex64::new(1.0, 0.0);
        let mut deg = 0usize;
        for _ in 0..k {
            // multiply by (zeta - lambda)
            for j in (0..=deg).rev() {
                let cj = c[j];
                c[j + 1] += cj;
                c[j] = -lambda * cj;
            }
            deg += 1;
        }
        Polynomial::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Degree bound m (length - 1), not the exact degree.
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation of p(z).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Horner evaluation of p'(z).
    pub fn eval_deriv(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (1..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[j] * (j as f64);
        }
        acc
    }

    /// Matrix Horner: p(A).
    pub fn eval_matrix(&self, a: &CMat) -> Result<CMat> {
        if !a.is_square() {
            return Err(CrouzeixError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let m = self.coeffs.len() - 1;
        let mut acc = CMat::zeros(n, n);
        acc.shift_diag(self.coeffs[m]);
        for j in (0..m).rev() {
            acc = a.mul(&acc);
            acc.shift_diag(self.coeffs[j]);
        }
        Ok(acc)
    }

    /// Roots of the deflated polynomial via companion-matrix eigenvalues.
    ///
    /// Leading coefficients below `ROOT_DEFLATION_RTOL` relative to the
    /// largest coefficient are dropped and counted as roots at infinity.
    /// Root clusters are snapped to their centroid, which recovers multiple
    /// roots far more accurately than the raw companion eigenvalues.
    pub fn roots(&self) -> Result<Roots> {
        if self.is_zero() {
            return Err(CrouzeixError::ZeroPolynomial);
        }
        let cmax = self.max_coeff_abs();
        let mut top = self.coeffs.len() - 1;
        let mut at_infinity = 0usize;
        while top > 0 && self.coeffs[top].norm() < ROOT_DEFLATION_RTOL * cmax {
            top -= 1;
            at_infinity += 1;
        }
        if top == 0 {
            // constant after deflation: no finite roots
            return Ok(Roots {
                finite: vec![],
                at_infinity,
            });
        }
        let lead = self.coeffs[top];
        let deg = top;
        let mut comp = CMat::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -self.coeffs[i] / lead;
        }
        let mut finite = eigenvalues(&comp)?;
        cluster_snap(&mut finite);
        finite.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        Ok(Roots { finite, at_infinity })
    }
}

/// Single-linkage clustering at a relative tolerance; members of a cluster
/// are replaced by the cluster centroid.
fn cluster_snap(roots: &mut [Complex64]) {
    let n = roots.len();
    if n < 2 {
        return;
    }
    let tol = |z: Complex64| 1e-4 * (1.0 + z.norm());
    let mut assigned = vec![usize::MAX; n];
    let mut nclusters = 0usize;
    for i in 0..n {
        if assigned[i] != usize::MAX {
            continue;
        }
        // flood fill from i
        let mut stack = vec![i];
        assigned[i] = nclusters;
        while let Some(k) = stack.pop() {
            for j in 0..n {
                if assigned[j] == usize::MAX && (roots[k] - roots[j]).norm() <= tol(roots[k]) {
                    assigned[j] = nclusters;
                    stack.push(j);
                }
            }
        }
        nclusters += 1;
    }
    for c in 0..nclusters {
        let members: Vec<usize> = (0..n).filter(|&i| assigned[i] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let centroid: Complex64 =
            members.iter().map(|&i| roots[i]).sum::<Complex64>() / members.len() as f64;
        for &i in &members {
            roots[i] = centroid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_identity_poly() {
        let p = Polynomial::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(p.eval(c(2.0, 0.0)), c(2.0, 0.0));
    }

    #[test]
    fn eval_cube_at_i() {
        let p = Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        let v = p.eval(c(0.0, 1.0));
        assert!((v - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_constant() {
        let p = Polynomial::from_real(&[5.0]).unwrap();
        assert_eq!(p.eval(c(3.0, 4.0)), c(5.0, 0.0));
    }

    #[test]
    fn deriv_examples() {
        let sq = Polynomial::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert!((sq.eval_deriv(c(3.0, 0.0)) - c(6.0, 0.0)).norm() < 1e-15);
        let k = Polynomial::from_real(&[7.0]).unwrap();
        assert_eq!(k.eval_deriv(c(11.0, -2.0)), c(0.0, 0.0));
        let lin = Polynomial::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(lin.eval_deriv(c(-4.0, 9.0)), c(1.0, 0.0));
    }

    #[test]
    fn matrix_constant_is_identity_scale() {
        let p = Polynomial::from_real(&[1.0]).unwrap();
        let a = CMat::from_real_rows(&[vec![3.0, 1.0], vec![0.0, -2.0]]);
        let m = p.eval_matrix(&a).unwrap();
        assert_eq!(m, CMat::identity(2));
    }

    #[test]
    fn roots_quadratic() {
        // zeta^2 - 1
        let p = Polynomial::from_real(&[-1.0, 0.0, 1.0]).unwrap();
        let r = p.roots().unwrap();
        assert_eq!(r.at_infinity, 0);
        assert!((r.finite[0] - c(-1.0, 0.0)).norm() < 1e-10);
        assert!((r.finite[1] - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn roots_triple() {
        // (zeta - 2)^3
        let p = Polynomial::shifted_power(c(2.0, 0.0), 3, 3).unwrap();
        let r = p.roots().unwrap();
        assert_eq!(r.finite.len(), 3);
        for z in r.finite {
            assert!((z - c(2.0, 0.0)).norm() < 1e-6, "root {z} too far from 2");
        }
    }

    #[test]
    fn roots_deflation() {
        let p = Polynomial::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1e-300, 0.0)]).unwrap();
        let r = p.roots().unwrap();
        assert_eq!(r.at_infinity, 1);
        assert_eq!(r.finite.len(), 1);
        assert!(r.finite[0].norm() < 1e-12);
    }

    #[test]
    fn zero_poly_rejected() {
        let p = Polynomial::from_real(&[0.0, 0.0]).unwrap();
        assert!(matches!(p.roots(), Err(CrouzeixError::ZeroPolynomial)));
    }

    #[test]
    fn shifted_power_expansion() {
        // (zeta - 1)^2 = 1 - 2 zeta + zeta^2
        let p = Polynomial::shifted_power(c(1.0, 0.0), 2, 3).unwrap();
        let want = [c(1.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        for (a, b) in p.coeffs().iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
