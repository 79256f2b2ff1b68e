//! The Crouzeix ratio f(p, A) = ||p||_{W(A)} / ||p(A)||_2, its attainment
//! data and its analytic gradient with respect to the packed real
//! parameter vector.
//!
//! The gradient of the numerator fixes the attaining boundary point and its
//! eigenvector (an envelope argument): along a matrix perturbation dA the
//! derivative is Re(phi p'(z) v* dA v) with phi = conj(p(z))/|p(z)|, and
//! along a coefficient perturbation dc_j it is Re(phi z^j dc_j). The
//! denominator uses the standard simple-singular-value derivative. Both are
//! certified against central finite differences in the test suite.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CrouzeixError, Result};
use crate::fov::{build_boundary, z_eps_set, AttainmentSet, BoundaryApproximant, BoundaryOptions};
use crate::linalg::{inner, CMat};
use crate::point::{FieldMode, ParameterLayout, StructuredMatrixPoint};
use crate::poly::Polynomial;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RatioOptions {
    pub boundary: BoundaryOptions,
    /// Hard magnitude guard on parameters and intermediate values.
    pub overflow_guard: f64,
    /// sigma_1 - sigma_2 below this (relative to sigma_1) flags a
    /// near-multiple largest singular value. Diagnostic only.
    pub sigma_gap_rtol: f64,
}

impl Default for RatioOptions {
    fn default() -> Self {
        RatioOptions {
            boundary: BoundaryOptions::default(),
            overflow_guard: 1e150,
            sigma_gap_rtol: 1e-10,
        }
    }
}

impl RatioOptions {
    pub fn fast() -> Self {
        RatioOptions {
            boundary: BoundaryOptions::fast(),
            ..RatioOptions::default()
        }
    }
}

/// Full evaluation record of the ratio at one pair.
#[derive(Debug, Clone)]
pub struct RatioEvaluation {
    pub f: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// Attainment of the numerator (epsilon = 0 view).
    pub attainment: AttainmentSet,
    pub sigma: f64,
    pub u: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub sigma_gap: f64,
    /// Gradient in the packed parameter space, computed from the leading
    /// attainment point.
    pub gradient: Option<Vec<f64>>,
    /// More than one global maximizer was found numerically; the gradient
    /// used the leading representative (largest |p(z)|, then smallest
    /// theta).
    pub tied_attainment: bool,
    /// sigma_1 - sigma_2 fell below the diagnostic threshold.
    pub near_multiple_sigma: bool,
}

/// Numerator with attainment data over a prebuilt boundary.
pub fn numerator(p: &Polynomial, b: &BoundaryApproximant) -> Result<(f64, AttainmentSet)> {
    if p.is_zero() {
        return Err(CrouzeixError::ZeroPolynomial);
    }
    let ats = z_eps_set(p, b, 0.0)?;
    Ok((ats.global_value, ats))
}

/// Denominator sigma_max(p(A)) with its unit singular pair and gap.
pub fn denominator(p: &Polynomial, a: &CMat) -> Result<(f64, Vec<Complex64>, Vec<Complex64>, f64)> {
    if p.is_zero() {
        return Err(CrouzeixError::ZeroPolynomial);
    }
    let m = p.eval_matrix(a)?;
    let svd = crate::linalg::top_singular(&m);
    if !svd.sigma.is_finite() {
        return Err(CrouzeixError::Overflow(svd.sigma));
    }
    if svd.sigma <= 1e-280 {
        return Err(CrouzeixError::ZeroDenominator);
    }
    Ok((svd.sigma, svd.u, svd.w, svd.gap))
}

/// Evaluates f, N, D, the attainment set and the packed gradient.
pub fn evaluate(pt: &StructuredMatrixPoint, opts: &RatioOptions) -> Result<RatioEvaluation> {
    let guard = opts.overflow_guard;
    if pt.a.max_abs_entry() > guard || pt.p.max_coeff_abs() > guard {
        return Err(CrouzeixError::Overflow(
            pt.a.max_abs_entry().max(pt.p.max_coeff_abs()),
        ));
    }
    let b = build_boundary(&pt.a, pt.field_mode, &opts.boundary)?;
    let (num, attainment) = numerator(&pt.p, &b)?;
    if !num.is_finite() || num > guard * 1e100 {
        return Err(CrouzeixError::Overflow(num));
    }
    if num <= 0.0 {
        // |p| vanishes identically on the boundary: p is the zero
        // polynomial on W(A), excluded from the ratio's domain
        return Err(CrouzeixError::ZeroPolynomial);
    }
    let (den, u, w, sigma_gap) = denominator(&pt.p, &pt.a)?;
    let f = num / den;
    if !f.is_finite() {
        return Err(CrouzeixError::Overflow(f));
    }
    let near_multiple_sigma = sigma_gap < opts.sigma_gap_rtol * den;
    let tied_attainment = attainment.points.len() > 1;

    let layout = pt.layout();
    let gradient = match attainment.points.first() {
        Some(lead) if lead.value > 0.0 => {
            let gn = grad_numerator_at(lead.z, &lead.v, &pt.p, &pt.a, layout)?;
            let gd = grad_denominator(&pt.p, &pt.a, &u, &w, layout)?;
            Some(combine_quotient(num, den, &gn, &gd))
        }
        _ => None,
    };

    Ok(RatioEvaluation {
        f,
        numerator: num,
        denominator: den,
        attainment,
        sigma: den,
        u,
        w,
        sigma_gap,
        gradient,
        tied_attainment,
        near_multiple_sigma,
    })
}

/// Convenience wrapper with default options.
pub fn crouzeix_ratio(pt: &StructuredMatrixPoint) -> Result<RatioEvaluation> {
    evaluate(pt, &RatioOptions::default())
}

/// Gradient of the numerator at a fixed attainment point z with attaining
/// unit eigenvector v, packed into the real parameter space.
pub fn grad_numerator_at(
    z: Complex64,
    v: &[Complex64],
    p: &Polynomial,
    a: &CMat,
    layout: ParameterLayout,
) -> Result<Vec<f64>> {
    let pz = p.eval(z);
    let apz = pz.norm();
    if apz == 0.0 {
        return Err(CrouzeixError::PhaseUndefined);
    }
    let phi = pz.conj() / apz;
    let dp = p.eval_deriv(z);
    let n = a.nrows();
    let factor = phi * dp;

    // matrix sensitivity: W[i][j] = phi p'(z) conj(v_i) v_j
    let mut w_mat = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            w_mat[(i, j)] = factor * v[i].conj() * v[j];
        }
    }
    // coefficient sensitivity: phi z^j
    let mut w_coef = Vec::with_capacity(layout.m + 1);
    let mut zp = Complex64::new(1.0, 0.0);
    for _ in 0..=layout.m {
        w_coef.push(phi * zp);
        zp *= z;
    }
    Ok(pack_gradient(&w_mat, &w_coef, layout))
}

/// Gradient of the denominator sigma_max(p(A)) at a simple singular triple
/// (sigma, u, w), packed into the real parameter space.
pub fn grad_denominator(
    p: &Polynomial,
    a: &CMat,
    u: &[Complex64],
    w: &[Complex64],
    layout: ParameterLayout,
) -> Result<Vec<f64>> {
    let n = a.nrows();
    let m = layout.m;
    // alpha_k = (A*)^k u,  beta_l = A^l w
    let astar = a.adjoint();
    let mut alphas: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    let mut betas: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    alphas.push(u.to_vec());
    betas.push(w.to_vec());
    for k in 1..=m {
        let prev_a = alphas[k - 1].clone();
        alphas.push(astar.matvec(&prev_a));
        let prev_b = betas[k - 1].clone();
        betas.push(a.matvec(&prev_b));
    }
    // coefficient sensitivity: t_j = u* A^j w
    let coeffs = p.coeffs();
    let mut w_coef = Vec::with_capacity(m + 1);
    for j in 0..=m {
        w_coef.push(inner(u, &betas[j]));
    }
    // matrix sensitivity: Y = sum_d c_d sum_{k+l=d-1} conj(alpha_k) beta_l^T
    let mut y = CMat::zeros(n, n);
    for k in 0..m {
        // gamma_k = sum_{d >= k+1} c_d beta_{d-1-k}
        let mut gamma = vec![Complex64::new(0.0, 0.0); n];
        for (d, &cd) in coeffs.iter().enumerate().skip(k + 1) {
            if cd.re == 0.0 && cd.im == 0.0 {
                continue;
            }
            for i in 0..n {
                gamma[i] += cd * betas[d - 1 - k][i];
            }
        }
        for i in 0..n {
            let ac = alphas[k][i].conj();
            for j in 0..n {
                y[(i, j)] += ac * gamma[j];
            }
        }
    }
    Ok(pack_gradient(&y, &w_coef, layout))
}

/// Quotient rule: grad f = (D grad N - N grad D) / D^2, combined
/// componentwise exactly as written.
pub fn combine_quotient(num: f64, den: f64, grad_num: &[f64], grad_den: &[f64]) -> Vec<f64> {
    let d2 = den * den;
    grad_num
        .iter()
        .zip(grad_den.iter())
        .map(|(gn, gd)| (den * gn - num * gd) / d2)
        .collect()
}

/// Packs complex sensitivities (dReal = Re(W_ij dA_ij), etc.) into the
/// frozen real parameter order.
fn pack_gradient(w_mat: &CMat, w_coef: &[Complex64], layout: ParameterLayout) -> Vec<f64> {
    let mut g = Vec::with_capacity(layout.len());
    match layout.field_mode {
        FieldMode::Real => {
            for c in w_coef {
                g.push(c.re);
            }
            for (i, j) in layout.support() {
                g.push(w_mat[(i, j)].re);
            }
        }
        FieldMode::Complex => {
            for c in w_coef {
                g.push(c.re);
                g.push(-c.im);
            }
            for (i, j) in layout.support() {
                let v = w_mat[(i, j)];
                g.push(v.re);
                g.push(-v.im);
            }
        }
    }
    g
}

/// Gradient extraction from an evaluation record, per the gradient
/// paradigm: the leading attainment point is used even when the maximizer
/// is (numerically) not unique, and `tied_attainment` says so.
pub fn grad_ratio(eval: &RatioEvaluation) -> Result<Vec<f64>> {
    eval.gradient
        .clone()
        .ok_or(CrouzeixError::PhaseUndefined)
}

// ---------------------------------------------------------------------------
// Packed-vector oracle for the optimizer
// ---------------------------------------------------------------------------

/// Objective oracle over the packed real parameter vector.
#[derive(Debug, Clone)]
pub struct RatioOracle {
    pub layout: ParameterLayout,
    pub opts: RatioOptions,
    /// Opt-in rescale of the polynomial coefficients between accepted
    /// steps; harmless for f by homogeneity. Off by default, matching the
    /// observed behavior of letting iterates grow enormous.
    pub renormalize_poly: bool,
    pub renorm_threshold: f64,
}

impl RatioOracle {
    pub fn new(layout: ParameterLayout, opts: RatioOptions) -> Self {
        RatioOracle {
            layout,
            opts,
            renormalize_poly: false,
            renorm_threshold: 1e8,
        }
    }

    pub fn with_renormalization(mut self, on: bool) -> Self {
        self.renormalize_poly = on;
        self
    }

    pub fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let guard = self.opts.overflow_guard;
        for &xi in x {
            if !xi.is_finite() || xi.abs() > guard {
                return Err(CrouzeixError::Overflow(xi));
            }
        }
        let pv = crate::point::ParameterVector::new(self.layout, x.to_vec())?;
        let pt = crate::point::unpack(&pv)?;
        let eval = evaluate(&pt, &self.opts)?;
        let g = eval.gradient.clone().ok_or(CrouzeixError::PhaseUndefined)?;
        Ok((eval.f, g))
    }

    /// Rescales the coefficient block in place when it has grown past the
    /// threshold. Returns true when x changed.
    pub fn maybe_renormalize(&self, x: &mut [f64]) -> bool {
        if !self.renormalize_poly {
            return false;
        }
        let ncoef = match self.layout.field_mode {
            FieldMode::Real => self.layout.m + 1,
            FieldMode::Complex => 2 * (self.layout.m + 1),
        };
        let cmax = x[..ncoef].iter().map(|v| v.abs()).fold(0.0, f64::max);
        if cmax > self.renorm_threshold {
            for v in x[..ncoef].iter_mut() {
                *v /= cmax;
            }
            true
        } else {
            false
        }
    }
}
