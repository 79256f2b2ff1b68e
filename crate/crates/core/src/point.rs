//! Structured matrix/polynomial pairs and their flat real parameterization.
//!
//! The optimizer runs over a packed real vector. The packing order is
//! frozen: polynomial coefficients first (real, or re/im interleaved), then
//! the structural support of A column-major (upper Hessenberg entries in
//! Real mode, upper triangular entries in Complex mode).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CrouzeixError, Result};
use crate::linalg::CMat;
use crate::poly::Polynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    /// Real upper Hessenberg matrix, real polynomial coefficients.
    Real,
    /// Complex upper triangular matrix, complex coefficients.
    Complex,
}

impl std::fmt::Display for FieldMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldMode::Real => write!(f, "real"),
            FieldMode::Complex => write!(f, "complex"),
        }
    }
}

/// Shape descriptor for the packed parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterLayout {
    pub n: usize,
    pub m: usize,
    pub field_mode: FieldMode,
}

impl ParameterLayout {
    pub fn new(n: usize, m: usize, field_mode: FieldMode) -> Self {
        ParameterLayout { n, m, field_mode }
    }

    /// Number of free real parameters.
    pub fn len(&self) -> usize {
        let (n, m) = (self.n, self.m);
        match self.field_mode {
            FieldMode::Real => (m + 1) + n * (n + 1) / 2 + (n - 1),
            FieldMode::Complex => 2 * (m + 1) + n * (n + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Structural support of A in frozen (column-major) order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        let mut out = Vec::new();
        match self.field_mode {
            FieldMode::Real => {
                for j in 0..n {
                    for i in 0..=(j + 1).min(n - 1) {
                        out.push((i, j));
                    }
                }
            }
            FieldMode::Complex => {
                for j in 0..n {
                    for i in 0..=j {
                        out.push((i, j));
                    }
                }
            }
        }
        out
    }
}

/// Flat real parameter vector together with its layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub layout: ParameterLayout,
    pub values: Vec<f64>,
}

impl ParameterVector {
    pub fn new(layout: ParameterLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(CrouzeixError::ParameterLength {
                got: values.len(),
                want: layout.len(),
            });
        }
        Ok(ParameterVector { layout, values })
    }
}

/// The pair (p, A) with its structure flag.
#[derive(Debug, Clone)]
pub struct StructuredMatrixPoint {
    pub a: CMat,
    pub p: Polynomial,
    pub field_mode: FieldMode,
}

impl StructuredMatrixPoint {
    pub fn new(a: CMat, p: Polynomial, field_mode: FieldMode) -> Result<Self> {
        if !a.is_square() {
            return Err(CrouzeixError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let pt = StructuredMatrixPoint { a, p, field_mode };
        pt.check_structure()?;
        Ok(pt)
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn layout(&self) -> ParameterLayout {
        ParameterLayout::new(self.n(), self.p.degree_bound(), self.field_mode)
    }

    fn check_structure(&self) -> Result<()> {
        let n = self.n();
        match self.field_mode {
            FieldMode::Real => {
                for c in self.p.coeffs() {
                    if c.im != 0.0 {
                        return Err(CrouzeixError::Structure(
                            "real mode requires real polynomial coefficients".into(),
                        ));
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let v = self.a[(i, j)];
                        if v.im != 0.0 {
                            return Err(CrouzeixError::Structure(
                                "real mode requires a real matrix".into(),
                            ));
                        }
                        if i > j + 1 && v.re != 0.0 {
                            return Err(CrouzeixError::Structure(format!(
                                "entry ({i},{j}) below the subdiagonal must be zero"
                            )));
                        }
                    }
                }
            }
            FieldMode::Complex => {
                for i in 0..n {
                    for j in 0..i {
                        let v = self.a[(i, j)];
                        if v.re != 0.0 || v.im != 0.0 {
                            return Err(CrouzeixError::Structure(format!(
                                "entry ({i},{j}) below the diagonal must be zero"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Packs a structured pair into its flat real vector. Fails if the
/// structural invariants do not hold.
pub fn pack(pt: &StructuredMatrixPoint) -> Result<ParameterVector> {
    pt.check_structure()?;
    let layout = pt.layout();
    let mut values = Vec::with_capacity(layout.len());
    match pt.field_mode {
        FieldMode::Real => {
            for c in pt.p.coeffs() {
                values.push(c.re);
            }
            for (i, j) in layout.support() {
                values.push(pt.a[(i, j)].re);
            }
        }
        FieldMode::Complex => {
            for c in pt.p.coeffs() {
                values.push(c.re);
                values.push(c.im);
            }
            for (i, j) in layout.support() {
                let v = pt.a[(i, j)];
                values.push(v.re);
                values.push(v.im);
            }
        }
    }
    ParameterVector::new(layout, values)
}

/// Rebuilds the structured pair; structurally-zero entries are zero-filled.
pub fn unpack(v: &ParameterVector) -> Result<StructuredMatrixPoint> {
    let layout = v.layout;
    if v.values.len() != layout.len() {
        return Err(CrouzeixError::ParameterLength {
            got: v.values.len(),
            want: layout.len(),
        });
    }
    let n = layout.n;
    let m = layout.m;
    let mut a = CMat::zeros(n, n);
    let p;
    match layout.field_mode {
        FieldMode::Real => {
            let coeffs: Vec<Complex64> = (0..=m)
                .map(|j| Complex64::new(v.values[j], 0.0))
                .collect();
            p = Polynomial::new(coeffs)?;
            let mut idx = m + 1;
            for (i, j) in layout.support() {
                a[(i, j)] = Complex64::new(v.values[idx], 0.0);
                idx += 1;
            }
        }
        FieldMode::Complex => {
            let coeffs: Vec<Complex64> = (0..=m)
                .map(|j| Complex64::new(v.values[2 * j], v.values[2 * j + 1]))
                .collect();
            p = Polynomial::new(coeffs)?;
            let mut idx = 2 * (m + 1);
            for (i, j) in layout.support() {
                a[(i, j)] = Complex64::new(v.values[idx], v.values[idx + 1]);
                idx += 2;
            }
        }
    }
    StructuredMatrixPoint::new(a, p, layout.field_mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_lengths() {
        assert_eq!(ParameterLayout::new(2, 1, FieldMode::Real).len(), 6);
        assert_eq!(ParameterLayout::new(2, 1, FieldMode::Complex).len(), 10);
        assert_eq!(ParameterLayout::new(2, 3, FieldMode::Real).len(), 8);
        assert_eq!(ParameterLayout::new(2, 3, FieldMode::Complex).len(), 14);
    }

    #[test]
    fn unpack_pack_roundtrip_real() {
        let layout = ParameterLayout::new(3, 2, FieldMode::Real);
        let values: Vec<f64> = (0..layout.len()).map(|i| (i as f64) * 0.37 - 1.1).collect();
        let v = ParameterVector::new(layout, values.clone()).unwrap();
        let pt = unpack(&v).unwrap();
        let back = pack(&pt).unwrap();
        assert_eq!(back.values, values);
        // structural zero below the subdiagonal
        assert_eq!(pt.a[(2, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn unpack_pack_roundtrip_complex() {
        let layout = ParameterLayout::new(3, 1, FieldMode::Complex);
        let values: Vec<f64> = (0..layout.len()).map(|i| (i as f64) * -0.21 + 0.4).collect();
        let v = ParameterVector::new(layout, values.clone()).unwrap();
        let pt = unpack(&v).unwrap();
        let back = pack(&pt).unwrap();
        assert_eq!(back.values, values);
        assert_eq!(pt.a[(2, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(pt.a[(1, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn pack_rejects_broken_structure() {
        let a = CMat::from_real_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![1.0, 0.5, 1.0],
            vec![3.0, 0.0, 2.0], // (2,0) breaks Hessenberg
        ]);
        let p = Polynomial::from_real(&[0.0, 1.0]).unwrap();
        assert!(StructuredMatrixPoint::new(a, p, FieldMode::Real).is_err());
    }

    #[test]
    fn length_mismatch_rejected() {
        let layout = ParameterLayout::new(2, 1, FieldMode::Real);
        assert!(ParameterVector::new(layout, vec![0.0; 5]).is_err());
    }
}
