//! Chebyshev-Lobatto interpolation on an interval, used by the boundary
//! approximant for its piecewise arc representation.

use num_complex::Complex64;

/// Interpolant in the Chebyshev basis on [lo, hi] with complex values.
#[derive(Debug, Clone)]
pub struct ChebPiece {
    pub lo: f64,
    pub hi: f64,
    /// Coefficients of T_0..T_d.
    pub coeffs: Vec<Complex64>,
}

/// Chebyshev-Lobatto nodes on [lo, hi], ascending, d+1 points.
pub fn lobatto_nodes(lo: f64, hi: f64, d: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..=d)
        .map(|k| mid - half * (std::f64::consts::PI * k as f64 / d as f64).cos())
        .collect()
}

impl ChebPiece {
    /// Fits the interpolant through values at the Lobatto nodes of the
    /// interval (`values[k]` at node k, ascending order as from
    /// `lobatto_nodes`).
    pub fn fit(lo: f64, hi: f64, values: &[Complex64]) -> ChebPiece {
        let d = values.len() - 1;
        assert!(d >= 1);
        // node k ascending corresponds to x = -cos(pi k / d)
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d + 1];
        for (j, cj) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &fk) in values.iter().enumerate() {
                // T_j(-cos(pi k/d)) = (-1)^j cos(j k pi / d)
                let c = (std::f64::consts::PI * (j * k) as f64 / d as f64).cos();
                let w = if k == 0 || k == d { 0.5 } else { 1.0 };
                acc += fk * (w * c);
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let kappa = if j == 0 || j == d { 2.0 } else { 1.0 };
            *cj = acc * (sign * 2.0 / (d as f64 * kappa));
        }
        ChebPiece { lo, hi, coeffs }
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, theta: f64) -> Complex64 {
        let x = (2.0 * theta - (self.lo + self.hi)) / (self.hi - self.lo);
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = b1 * (2.0 * x) - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        b1 * x - b2 + self.coeffs[0]
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lo - 1e-14 && theta <= self.hi + 1e-14
    }
}
