//! Reference configurations: the Crabb family attaining ratio 0.5 and the
//! ice-cream-cone configurations with ratio 1.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{CrouzeixError, Result};
use crate::fov::{build_boundary, sup_abs_poly, BoundaryOptions};
use crate::linalg::{hermitian_eig, hessenberg, random_unitary, schur_triangular, top_singular, CMat};
use crate::point::{FieldMode, StructuredMatrixPoint};
use crate::poly::Polynomial;

/// The k x k Crabb matrix: `[[0,2],[0,0]]` for k = 2, superdiagonal
/// (sqrt(2), 1, ..., 1, sqrt(2)) for k > 2. Its field of values is the
/// closed unit disk.
pub fn crabb_matrix(k: usize) -> Result<CMat> {
    if k < 2 {
        return Err(CrouzeixError::CrabbOrder(k));
    }
    let mut m = CMat::zeros(k, k);
    if k == 2 {
        m[(0, 1)] = Complex64::new(2.0, 0.0);
        return Ok(m);
    }
    let s2 = 2.0_f64.sqrt();
    for i in 0..k - 1 {
        let v = if i == 0 || i == k - 2 { s2 } else { 1.0 };
        m[(i, i + 1)] = Complex64::new(v, 0.0);
    }
    Ok(m)
}

/// Numerical radius max{|z| : z in W(B)} via a support-angle scan.
pub fn numerical_radius(b: &CMat) -> f64 {
    let n = b.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut r: f64 = 0.0;
    let steps = 256;
    for k in 0..steps {
        let theta = crate::fov::TWO_PI * k as f64 / steps as f64;
        let h = crate::fov::hermitian_sweep_matrix(b, theta);
        let e = hermitian_eig(&h);
        r = r.max(e.values[0]);
    }
    r
}

/// True when lambda lies strictly outside W(B), by a separating support
/// line with the given margin.
pub fn outside_numerical_range(lambda: Complex64, b: &CMat, margin: f64) -> bool {
    let steps = 512;
    for k in 0..steps {
        let theta = crate::fov::TWO_PI * k as f64 / steps as f64;
        let h = crate::fov::hermitian_sweep_matrix(b, theta);
        let e = hermitian_eig(&h);
        let support = e.values[0];
        let lam_dir = (Complex64::from_polar(1.0, theta) * lambda).re;
        if lam_dir > support + margin {
            return true;
        }
    }
    false
}

/// Reference configuration descriptors.
#[derive(Debug, Clone)]
pub enum ReferenceConfiguration {
    /// A = lambda I + beta U diag(Crabb_k, B) U*, p = (z - lambda)^{k-1}:
    /// the ratio is 0.5 whenever W(B) lies in the unit disk.
    CrabbDisk {
        k: usize,
        lambda: Complex64,
        beta: Complex64,
        /// Unitary conjugation; identity when absent.
        u: Option<CMat>,
        /// Fill block; empty (n = k) when absent.
        b_block: Option<CMat>,
    },
    /// A = diag(lambda, B) with lambda outside W(B) and |p(lambda)|
    /// dominating both |p| on W(A) and ||p(B)||: the ratio is 1 and the
    /// configuration is a smooth stationary point.
    IceCreamCone {
        lambda: Complex64,
        b_block: CMat,
        p: Polynomial,
    },
}

/// Re-expresses a general square matrix in the structured form of the
/// requested mode by a unitary (orthogonal) similarity: Schur
/// triangularization for Complex, Householder Hessenberg reduction for
/// Real. The ratio is invariant under the transformation.
pub fn to_structured(a: &CMat, p: &Polynomial, mode: FieldMode) -> Result<StructuredMatrixPoint> {
    let n = a.nrows();
    match mode {
        FieldMode::Complex => {
            let t = schur_triangular(a)?;
            let mut clean = CMat::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    clean[(i, j)] = t[(i, j)];
                }
            }
            StructuredMatrixPoint::new(clean, p.clone(), mode)
        }
        FieldMode::Real => {
            let scale = a.max_abs_entry().max(1.0);
            for v in a.data() {
                if v.im.abs() > 1e-12 * scale {
                    return Err(CrouzeixError::Structure(
                        "real mode requires a real matrix".into(),
                    ));
                }
            }
            let h = hessenberg(a);
            let mut clean = CMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i <= j + 1 {
                        clean[(i, j)] = Complex64::new(h[(i, j)].re, 0.0);
                    }
                }
            }
            StructuredMatrixPoint::new(clean, p.clone(), mode)
        }
    }
}

/// Assembles a reference configuration into a structured pair of order n
/// with degree bound m.
pub fn assemble_reference(
    cfg: &ReferenceConfiguration,
    n: usize,
    m: usize,
    mode: FieldMode,
) -> Result<StructuredMatrixPoint> {
    match cfg {
        ReferenceConfiguration::CrabbDisk {
            k,
            lambda,
            beta,
            u,
            b_block,
        } => {
            let k = *k;
            if k < 2 {
                return Err(CrouzeixError::CrabbOrder(k));
            }
            if k > n.min(m + 1) {
                return Err(CrouzeixError::DimensionMismatch(format!(
                    "need k <= min(n, m+1); got k={k}, n={n}, m={m}"
                )));
            }
            if beta.norm() == 0.0 {
                return Err(CrouzeixError::ReferenceConfig("beta must be nonzero".into()));
            }
            let fill = n - k;
            let b = match b_block {
                Some(b) => {
                    if b.nrows() != fill || b.ncols() != fill {
                        return Err(CrouzeixError::DimensionMismatch(format!(
                            "fill block must be {fill}x{fill}"
                        )));
                    }
                    b.clone()
                }
                None => {
                    if fill != 0 {
                        return Err(CrouzeixError::DimensionMismatch(format!(
                            "fill block of order {fill} required for n={n}, k={k}"
                        )));
                    }
                    CMat::zeros(0, 0)
                }
            };
            if fill > 0 {
                let r = numerical_radius(&b);
                if r > 1.0 + 1e-10 {
                    return Err(CrouzeixError::ReferenceConfig(format!(
                        "W(B) must lie in the unit disk; numerical radius {r}"
                    )));
                }
            }
            let core = CMat::block_diag(&[&crabb_matrix(k)?, &b]);
            let mut full = match u {
                Some(u) => {
                    if u.nrows() != n || u.ncols() != n {
                        return Err(CrouzeixError::DimensionMismatch("U must be n x n".into()));
                    }
                    u.mul(&core).mul(&u.adjoint())
                }
                None => core,
            };
            full = full.scale(*beta);
            full.shift_diag(*lambda);
            let p = Polynomial::shifted_power(*lambda, k - 1, m)?;
            to_structured(&full, &p, mode)
        }
        ReferenceConfiguration::IceCreamCone { lambda, b_block, p } => {
            let fill = b_block.nrows();
            if fill + 1 != n {
                return Err(CrouzeixError::DimensionMismatch(format!(
                    "vertex plus block of order {fill} does not give n={n}"
                )));
            }
            if p.degree_bound() != m {
                return Err(CrouzeixError::DimensionMismatch(format!(
                    "polynomial degree bound {} does not match m={m}",
                    p.degree_bound()
                )));
            }
            if !outside_numerical_range(*lambda, b_block, 1e-10) {
                return Err(CrouzeixError::ReferenceConfig(
                    "vertex lambda must lie outside W(B)".into(),
                ));
            }
            let mut vert = CMat::zeros(1, 1);
            vert[(0, 0)] = *lambda;
            let a = CMat::block_diag(&[&vert, b_block]);
            let pt = to_structured(&a, p, mode)?;
            validate_ice_cream_dominance(&pt, *lambda, b_block)?;
            Ok(pt)
        }
    }
}

/// Checks |p(lambda)| > |p| elsewhere on W(A) and |p(lambda)| > ||p(B)||.
fn validate_ice_cream_dominance(
    pt: &StructuredMatrixPoint,
    lambda: Complex64,
    b_block: &CMat,
) -> Result<()> {
    let p_lam = pt.p.eval(lambda).norm();
    let pb = pt.p.eval_matrix(b_block)?;
    let pb_norm = top_singular(&pb).sigma;
    if !(p_lam > pb_norm) {
        return Err(CrouzeixError::Dominance(format!(
            "|p(lambda)| = {p_lam:.6e} does not dominate ||p(B)|| = {pb_norm:.6e}"
        )));
    }
    let b = build_boundary(&pt.a, pt.field_mode, &BoundaryOptions::fast())?;
    let (sup, argmax) = sup_abs_poly(&pt.p, &b)?;
    if sup > p_lam * (1.0 + 1e-8) {
        return Err(CrouzeixError::Dominance(format!(
            "|p| reaches {sup:.6e} on W(A), above |p(lambda)| = {p_lam:.6e}"
        )));
    }
    let vertex_hit = argmax.iter().any(|pt_| (pt_.z - lambda).norm() <= 1e-6 * (1.0 + lambda.norm()));
    if !vertex_hit {
        return Err(CrouzeixError::Dominance(
            "the maximum of |p| is not attained at the vertex".into(),
        ));
    }
    Ok(())
}

/// Random admissible CrabbDisk configuration (complex data).
pub fn random_crabb_disk<R: Rng + ?Sized>(rng: &mut R, k: usize, n: usize) -> ReferenceConfiguration {
    let lambda = Complex64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0);
    let beta = loop {
        let b = Complex64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0);
        if b.norm() > 0.2 {
            break b;
        }
    };
    let u = random_unitary(rng, n);
    let fill = n - k;
    let b_block = if fill == 0 {
        None
    } else {
        let mut b = CMat::zeros(fill, fill);
        for i in 0..fill {
            for j in 0..fill {
                b[(i, j)] = Complex64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0);
            }
        }
        let r = numerical_radius(&b);
        let target = 0.3 + 0.5 * rng.gen::<f64>();
        if r > 0.0 {
            b = b.scale(Complex64::new(target / r, 0.0));
        }
        Some(b)
    };
    ReferenceConfiguration::CrabbDisk {
        k,
        lambda,
        beta,
        u: Some(u),
        b_block,
    }
}

/// Random admissible ice-cream configuration of order n with p = z^{m}.
pub fn random_ice_cream<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<ReferenceConfiguration> {
    let fill = n - 1;
    let mut b = CMat::zeros(fill, fill);
    for i in 0..fill {
        for j in 0..fill {
            b[(i, j)] = Complex64::new(2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0);
        }
    }
    let r = numerical_radius(&b);
    if r > 0.0 {
        let target = 0.2 + 0.25 * rng.gen::<f64>();
        b = b.scale(Complex64::new(target / r, 0.0));
    }
    let mag = 1.5 + rng.gen::<f64>();
    let phase = crate::fov::TWO_PI * rng.gen::<f64>();
    let lambda = Complex64::from_polar(mag, phase);
    let p = Polynomial::monomial(m, m)?;
    Ok(ReferenceConfiguration::IceCreamCone {
        lambda,
        b_block: b,
        p,
    })
}
