//! A-posteriori verification of approximate nonsmooth stationarity.
//!
//! The approximate subdifferential at (p, A) is generated by one quotient
//! gradient per point of Z_eps (the denominator gradient is common to all
//! of them). The stationarity measure is the norm of the minimum-norm
//! point of the generators' convex hull, computed by Wolfe's algorithm on
//! the simplex.

use serde::{Deserialize, Serialize};

use crate::error::{CrouzeixError, Result};
use crate::fov::{build_boundary, z_eps_set, AttainmentSet};
use crate::point::StructuredMatrixPoint;
use crate::ratio::{combine_quotient, denominator, grad_denominator, grad_numerator_at, RatioOptions};

pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Min-norm element of the convex hull with its simplex weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinNormPoint {
    pub d: Vec<f64>,
    pub d_norm: f64,
    /// Convex weights over the generators, summing to one.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationarityReport {
    pub epsilon: f64,
    /// |Z_eps|.
    pub z_count: usize,
    /// One gradient per attainment point in Z_eps.
    pub generators: Vec<Vec<f64>>,
    /// None when |p| is constant on the boundary (forgo).
    pub measure: Option<MinNormPoint>,
    pub forgo: bool,
}

impl StationarityReport {
    pub fn d_norm(&self) -> Option<f64> {
        self.measure.as_ref().map(|m| m.d_norm)
    }
}

/// Generators of the approximate subdifferential at (p, A): the quotient
/// gradient evaluated at every point of Z_eps. Returns the attainment set
/// alongside. Empty with the forgo flag when |p| is constant on the
/// boundary.
pub fn approx_subdifferential(
    pt: &StructuredMatrixPoint,
    epsilon: f64,
    opts: &RatioOptions,
) -> Result<(Vec<Vec<f64>>, AttainmentSet)> {
    let b = build_boundary(&pt.a, pt.field_mode, &opts.boundary)?;
    approx_subdifferential_with(pt, &b, epsilon)
}

/// Same, over a prebuilt boundary approximant.
pub fn approx_subdifferential_with(
    pt: &StructuredMatrixPoint,
    b: &crate::fov::BoundaryApproximant,
    epsilon: f64,
) -> Result<(Vec<Vec<f64>>, AttainmentSet)> {
    let ats = z_eps_set(&pt.p, b, epsilon)?;
    if ats.forgo {
        return Ok((vec![], ats));
    }
    let layout = pt.layout();
    let (den, u, w, _gap) = denominator(&pt.p, &pt.a)?;
    let num = ats.global_value;
    let gd = grad_denominator(&pt.p, &pt.a, &u, &w, layout)?;
    let mut generators = Vec::with_capacity(ats.points.len());
    for point in &ats.points {
        let gn = grad_numerator_at(point.z, &point.v, &pt.p, &pt.a, layout)?;
        generators.push(combine_quotient(num, den, &gn, &gd));
    }
    Ok((generators, ats))
}

/// Minimum-norm point of conv{g_1, ..., g_k} by Wolfe's algorithm.
///
/// The returned weights live on the full generator list (zeros off the
/// support). A singleton input is returned verbatim.
pub fn min_norm_point(generators: &[Vec<f64>]) -> Result<MinNormPoint> {
    let k = generators.len();
    if k == 0 {
        return Err(CrouzeixError::EmptyInput("min_norm_point"));
    }
    let dim = generators[0].len();
    if generators.iter().any(|g| g.len() != dim) {
        return Err(CrouzeixError::DimensionMismatch(
            "generators must share one dimension".into(),
        ));
    }
    if k == 1 {
        let d = generators[0].clone();
        let d_norm = norm(&d);
        return Ok(MinNormPoint {
            d,
            d_norm,
            weights: vec![1.0],
        });
    }

    // Gram matrix
    let mut q = vec![0.0; k * k];
    for i in 0..k {
        for j in i..k {
            let v: f64 = generators[i]
                .iter()
                .zip(generators[j].iter())
                .map(|(a, b)| a * b)
                .sum();
            q[i * k + j] = v;
            q[j * k + i] = v;
        }
    }
    let qscale = (0..k).map(|i| q[i * k + i]).fold(0.0, f64::max).max(1e-300);

    // start from the shortest generator
    let start = (0..k)
        .min_by(|&i, &j| q[i * k + i].partial_cmp(&q[j * k + j]).unwrap())
        .unwrap();
    let mut lambda = vec![0.0; k];
    lambda[start] = 1.0;
    let mut support: Vec<usize> = vec![start];

    let xx_of = |lam: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..k {
            if lam[i] == 0.0 {
                continue;
            }
            for j in 0..k {
                if lam[j] != 0.0 {
                    acc += lam[i] * lam[j] * q[i * k + j];
                }
            }
        }
        acc
    };

    for _outer in 0..(20 * k + 40) {
        // q lambda
        let mut qlam = vec![0.0; k];
        for i in 0..k {
            let mut acc = 0.0;
            for j in 0..k {
                if lambda[j] != 0.0 {
                    acc += q[i * k + j] * lambda[j];
                }
            }
            qlam[i] = acc;
        }
        let xx = xx_of(&lambda);
        let jstar = (0..k)
            .min_by(|&i, &j| qlam[i].partial_cmp(&qlam[j]).unwrap())
            .unwrap();
        if qlam[jstar] >= xx - 1e-14 * qscale.max(xx) {
            break; // optimal over the full hull
        }
        if !support.contains(&jstar) {
            support.push(jstar);
        }

        // minor cycle: move to the affine minimizer over the support,
        // dropping vertices that the segment to it would leave
        for _minor in 0..(4 * k + 8) {
            let alpha = affine_min_weights(&q, k, &support, qscale);
            let negative: Vec<usize> = support
                .iter()
                .enumerate()
                .filter(|&(si, _)| alpha[si] < -1e-12)
                .map(|(si, _)| si)
                .collect();
            if negative.is_empty() {
                for v in lambda.iter_mut() {
                    *v = 0.0;
                }
                for (si, &gi) in support.iter().enumerate() {
                    lambda[gi] = alpha[si].max(0.0);
                }
                normalize_weights(&mut lambda);
                break;
            }
            // largest step toward alpha keeping the current face
            let mut tmax = 1.0_f64;
            for (si, &gi) in support.iter().enumerate() {
                if alpha[si] < lambda[gi] {
                    let t = lambda[gi] / (lambda[gi] - alpha[si]);
                    tmax = tmax.min(t);
                }
            }
            let tmax = tmax.clamp(0.0, 1.0);
            for (si, &gi) in support.iter().enumerate() {
                lambda[gi] += tmax * (alpha[si] - lambda[gi]);
            }
            // drop exhausted vertices
            let mut new_support = Vec::with_capacity(support.len());
            for &gi in &support {
                if lambda[gi] > 1e-13 {
                    new_support.push(gi);
                } else {
                    lambda[gi] = 0.0;
                }
            }
            if new_support.is_empty() {
                // numerical corner: keep the best single vertex
                let best = *support
                    .iter()
                    .min_by(|&&i, &&j| q[i * k + i].partial_cmp(&q[j * k + j]).unwrap())
                    .unwrap();
                lambda[best] = 1.0;
                new_support.push(best);
            }
            support = new_support;
            normalize_weights(&mut lambda);
        }
    }

    normalize_weights(&mut lambda);
    // exact singleton: return the generator itself
    let active: Vec<usize> = (0..k).filter(|&i| lambda[i] > 0.0).collect();
    let d = if active.len() == 1 {
        generators[active[0]].clone()
    } else {
        let mut d = vec![0.0; dim];
        for &i in &active {
            for (dd, gg) in d.iter_mut().zip(generators[i].iter()) {
                *dd += lambda[i] * gg;
            }
        }
        d
    };
    let d_norm = norm(&d);
    Ok(MinNormPoint {
        d,
        d_norm,
        weights: lambda,
    })
}

/// Affine minimizer weights over the support: minimize a^T Q_S a subject
/// to 1^T a = 1, by the bordered KKT system with full-pivot elimination
/// and a tiny ridge fallback for rank-deficient supports.
fn affine_min_weights(q: &[f64], k: usize, support: &[usize], qscale: f64) -> Vec<f64> {
    let s = support.len();
    let dim = s + 1;
    let build = |ridge: f64| -> Vec<f64> {
        let mut m = vec![0.0; dim * dim];
        let mut rhs = vec![0.0; dim];
        for (a, &ga) in support.iter().enumerate() {
            for (b, &gb) in support.iter().enumerate() {
                m[a * dim + b] = q[ga * k + gb] + if a == b { ridge } else { 0.0 };
            }
            m[a * dim + s] = 1.0;
            m[s * dim + a] = 1.0;
        }
        rhs[s] = 1.0;
        match solve_full_pivot(m, rhs, dim) {
            Some(sol) => sol[..s].to_vec(),
            None => vec![f64::NAN; s],
        }
    };
    let sol = build(0.0);
    if sol.iter().all(|v| v.is_finite()) {
        return sol;
    }
    let sol = build(1e-13 * qscale.max(1.0));
    if sol.iter().all(|v| v.is_finite()) {
        return sol;
    }
    // last resort: uniform weights
    vec![1.0 / s as f64; s]
}

fn solve_full_pivot(mut m: Vec<f64>, mut rhs: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let mut col_perm: Vec<usize> = (0..n).collect();
    for step in 0..n {
        // locate pivot
        let (mut pi, mut pj, mut pv) = (step, step, 0.0_f64);
        for i in step..n {
            for j in step..n {
                let v = m[i * n + j].abs();
                if v > pv {
                    pv = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if pv == 0.0 || !pv.is_finite() {
            return None;
        }
        // swap rows and columns
        if pi != step {
            for j in 0..n {
                m.swap(step * n + j, pi * n + j);
            }
            rhs.swap(step, pi);
        }
        if pj != step {
            for i in 0..n {
                m.swap(i * n + step, i * n + pj);
            }
            col_perm.swap(step, pj);
        }
        let piv = m[step * n + step];
        for i in (step + 1)..n {
            let factor = m[i * n + step] / piv;
            if factor == 0.0 {
                continue;
            }
            for j in step..n {
                m[i * n + j] -= factor * m[step * n + j];
            }
            rhs[i] -= factor * rhs[step];
        }
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..n {
            acc -= m[i * n + j] * y[j];
        }
        y[i] = acc / m[i * n + i];
        if !y[i].is_finite() {
            return None;
        }
    }
    let mut x = vec![0.0; n];
    for i in 0..n {
        x[col_perm[i]] = y[i];
    }
    Some(x)
}

fn normalize_weights(lambda: &mut [f64]) {
    let sum: f64 = lambda.iter().sum();
    if sum > 0.0 && (sum - 1.0).abs() > 1e-15 {
        for v in lambda.iter_mut() {
            *v /= sum;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Assembles the full stationarity report at (p, A) with the given epsilon.
pub fn stationarity_report(
    pt: &StructuredMatrixPoint,
    epsilon: f64,
    opts: &RatioOptions,
) -> Result<StationarityReport> {
    let b = build_boundary(&pt.a, pt.field_mode, &opts.boundary)?;
    stationarity_report_with(pt, &b, epsilon)
}

/// Same, over a prebuilt boundary approximant.
pub fn stationarity_report_with(
    pt: &StructuredMatrixPoint,
    b: &crate::fov::BoundaryApproximant,
    epsilon: f64,
) -> Result<StationarityReport> {
    let (generators, ats) = approx_subdifferential_with(pt, b, epsilon)?;
    if ats.forgo || generators.is_empty() {
        return Ok(StationarityReport {
            epsilon,
            z_count: ats.points.len(),
            generators: vec![],
            measure: None,
            forgo: true,
        });
    }
    let measure = min_norm_point(&generators)?;
    Ok(StationarityReport {
        epsilon,
        z_count: ats.points.len(),
        generators,
        measure: Some(measure),
        forgo: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair() {
        let gens = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let mnp = min_norm_point(&gens).unwrap();
        assert!((mnp.d[0] - 0.5).abs() < 1e-12);
        assert!((mnp.d[1] - 0.5).abs() < 1e-12);
        assert!((mnp.d_norm - 0.5_f64.sqrt() * 0.5_f64.sqrt() * 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((mnp.weights[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn singleton_returned_verbatim() {
        let gens = vec![vec![0.25, -3.5, 1.0]];
        let mnp = min_norm_point(&gens).unwrap();
        assert_eq!(mnp.d, gens[0]);
        assert_eq!(mnp.weights, vec![1.0]);
    }

    #[test]
    fn hull_contains_origin() {
        let gens = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let mnp = min_norm_point(&gens).unwrap();
        assert!(mnp.d_norm < 1e-12, "d_norm = {}", mnp.d_norm);
    }

    #[test]
    fn empty_rejected() {
        assert!(min_norm_point(&[]).is_err());
    }

    #[test]
    fn kkt_certificate_random() {
        let mut state = 0xfeedbeefu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        for _case in 0..200 {
            let k = 2 + (next().abs() * 4.0) as usize;
            let dim = 2 + (next().abs() * 6.0) as usize;
            let gens: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..dim).map(|_| 2.0 * next()).collect())
                .collect();
            let mnp = min_norm_point(&gens).unwrap();
            let dn2 = mnp.d_norm * mnp.d_norm;
            let kkt_tol = 1e-10 * (1.0 + dn2);
            for g in &gens {
                let gd: f64 = g.iter().zip(mnp.d.iter()).map(|(a, b)| a * b).sum();
                assert!(gd >= dn2 - kkt_tol, "KKT violated: g.d={gd} < {dn2}");
            }
            // min over hull <= min over vertices
            let min_vertex = gens.iter().map(|g| norm(g)).fold(f64::MAX, f64::min);
            assert!(mnp.d_norm <= min_vertex + 1e-10);
            // weights on the simplex, d = sum lambda_i g_i
            let sum_w: f64 = mnp.weights.iter().sum();
            assert!((sum_w - 1.0).abs() < 1e-10);
            assert!(mnp.weights.iter().all(|&w| w >= 0.0));
            let mut recon = vec![0.0; dim];
            for (i, g) in gens.iter().enumerate() {
                for (r, v) in recon.iter_mut().zip(g.iter()) {
                    *r += mnp.weights[i] * v;
                }
            }
            for (a, b) in recon.iter().zip(mnp.d.iter()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
