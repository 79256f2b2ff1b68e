//! Shared independent oracles for the integration suites: central finite
//! differences, a zooming simplex-grid minimizer, uniform boundary
//! sampling, and a Hausdorff distance helper. Everything here is kept
//! independent of the implementation paths it checks.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use crouzeix::fov::TWO_PI;
use crouzeix::linalg::hermitian_eig;
use crouzeix::{CMat, FieldMode, Polynomial};

/// Central finite differences of a scalar function over a real vector.
pub fn central_fd<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let x0 = x[i];
        xp[i] = x0 + h;
        let fp = f(&xp);
        xp[i] = x0 - h;
        let fm = f(&xp);
        xp[i] = x0;
        g.push((fp - fm) / (2.0 * h));
    }
    g
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1e-300)
}

/// Brute-force |p| maximum over `count` uniformly spaced support angles,
/// bypassing the approximant entirely.
pub fn uniform_boundary_max(p: &Polynomial, a: &CMat, mode: FieldMode, count: usize) -> f64 {
    let (lo, hi) = match mode {
        FieldMode::Real => (std::f64::consts::PI, TWO_PI),
        FieldMode::Complex => (0.0, TWO_PI),
    };
    let mut best: f64 = 0.0;
    for k in 0..=count {
        let theta = lo + (hi - lo) * k as f64 / count as f64;
        let h = crouzeix::hermitian_sweep_matrix(a, theta);
        let e = hermitian_eig(&h);
        let v = e.vector(0);
        let z = a.quadratic_form(&v);
        best = best.max(p.eval(z).norm());
    }
    best
}

/// Uniform direct samples of the boundary (support-angle sweep).
pub fn uniform_boundary_samples(a: &CMat, mode: FieldMode, count: usize) -> Vec<Complex64> {
    let (lo, hi) = match mode {
        FieldMode::Real => (std::f64::consts::PI, TWO_PI),
        FieldMode::Complex => (0.0, TWO_PI),
    };
    (0..=count)
        .map(|k| {
            let theta = lo + (hi - lo) * k as f64 / count as f64;
            let h = crouzeix::hermitian_sweep_matrix(a, theta);
            let e = hermitian_eig(&h);
            let v = e.vector(0);
            a.quadratic_form(&v)
        })
        .collect()
}

/// One-sided Hausdorff distance from set `a` to set `b`.
pub fn hausdorff_one_sided(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut worst: f64 = 0.0;
    for za in a {
        let mut best = f64::MAX;
        for zb in b {
            best = best.min((za - zb).norm());
        }
        worst = worst.max(best);
    }
    worst
}

pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    hausdorff_one_sided(a, b).max(hausdorff_one_sided(b, a))
}

/// Independent minimizer of ||sum lambda_i g_i|| over the simplex: full
/// grid at the base step, then repeated local grid refinement around the
/// incumbent. The base grid matches the stated oracle resolution; the
/// refinement narrows the value to the comparison tolerance (a fixed
/// 1e-3 grid alone cannot certify 1e-6 agreement in the norm).
pub fn simplex_grid_min_norm(gens: &[Vec<f64>], base_step: f64) -> f64 {
    let k = gens.len();
    let dim = gens[0].len();
    assert!(k >= 1);
    let eval = |lambda: &[f64]| -> f64 {
        let mut d = vec![0.0; dim];
        for (i, g) in gens.iter().enumerate() {
            for (dd, gg) in d.iter_mut().zip(g.iter()) {
                *dd += lambda[i] * gg;
            }
        }
        d.iter().map(|v| v * v).sum::<f64>().sqrt()
    };

    // full base grid
    let steps = (1.0 / base_step).round() as usize;
    let mut best_lambda = vec![0.0; k];
    best_lambda[0] = 1.0;
    let mut best_val = eval(&best_lambda);
    let mut lambda = vec![0usize; k];
    enumerate_compositions(steps, k, &mut lambda, 0, &mut |comp: &[usize]| {
        let lam: Vec<f64> = comp.iter().map(|&c| c as f64 / steps as f64).collect();
        let v = eval(&lam);
        if v < best_val {
            best_val = v;
            best_lambda = lam;
        }
    });

    // local refinement: grid of +-2 old steps around the incumbent
    let mut step = base_step;
    for _level in 0..12 {
        step /= 5.0;
        if step < 1e-10 {
            break;
        }
        let center = best_lambda.clone();
        let mut offsets = vec![0i64; k];
        refine_box(&center, step, 10, &mut offsets, 0, &eval, &mut best_val, &mut best_lambda);
    }
    best_val
}

fn enumerate_compositions(
    total: usize,
    k: usize,
    lambda: &mut [usize],
    idx: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if idx == k - 1 {
        let used: usize = lambda[..idx].iter().sum();
        lambda[idx] = total - used;
        f(lambda);
        return;
    }
    let used: usize = lambda[..idx].iter().sum();
    for c in 0..=(total - used) {
        lambda[idx] = c;
        enumerate_compositions(total, k, lambda, idx + 1, f);
    }
}

#[allow(clippy::too_many_arguments)]
fn refine_box(
    center: &[f64],
    step: f64,
    radius: i64,
    offsets: &mut [i64],
    idx: usize,
    eval: &impl Fn(&[f64]) -> f64,
    best_val: &mut f64,
    best_lambda: &mut Vec<f64>,
) {
    let k = center.len();
    if idx == k - 1 {
        // the last coordinate is fixed by the simplex constraint
        let partial: f64 = (0..k - 1)
            .map(|i| (center[i] + offsets[i] as f64 * step).max(0.0))
            .sum();
        let last = 1.0 - partial;
        if last < -1e-12 {
            return;
        }
        let mut lam: Vec<f64> = (0..k - 1)
            .map(|i| (center[i] + offsets[i] as f64 * step).max(0.0))
            .collect();
        lam.push(last.max(0.0));
        let s: f64 = lam.iter().sum();
        if s <= 0.0 {
            return;
        }
        for v in lam.iter_mut() {
            *v /= s;
        }
        let v = eval(&lam);
        if v < *best_val {
            *best_val = v;
            *best_lambda = lam;
        }
        return;
    }
    for off in -radius..=radius {
        offsets[idx] = off;
        let c = center[idx] + off as f64 * step;
        if c < -step || c > 1.0 + step {
            continue;
        }
        refine_box(center, step, radius, offsets, idx + 1, eval, best_val, best_lambda);
    }
}

/// Deterministic RNG for the suites.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Random structured pair with moderate entries (not heavy-tailed), for
/// gradient certification and invariance tests.
pub fn random_moderate_point(
    r: &mut impl Rng,
    n: usize,
    m: usize,
    mode: FieldMode,
) -> crouzeix::StructuredMatrixPoint {
    use crouzeix::{unpack, ParameterLayout, ParameterVector};
    let layout = ParameterLayout::new(n, m, mode);
    let values: Vec<f64> = (0..layout.len()).map(|_| 2.0 * r.gen::<f64>() - 1.0).collect();
    unpack(&ParameterVector::new(layout, values).unwrap()).unwrap()
}
