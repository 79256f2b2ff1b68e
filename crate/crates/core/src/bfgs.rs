//! Full-memory BFGS with an inexact weak Armijo-Wolfe line search.
//!
//! The gradient oracle always returns a gradient; nonsmoothness is handled
//! by the gradient paradigm (no subgradient machinery). When the line
//! search cannot satisfy the Armijo-Wolfe conditions within the bisection
//! budget, the run terminates: near a nonsmooth minimizer that is the
//! expected exit.

use serde::{Deserialize, Serialize};

use crate::error::{CrouzeixError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerOptions {
    /// Stop when the gradient 2-norm drops below this.
    pub normtol: f64,
    pub max_iters: usize,
    /// Armijo sufficient-decrease parameter c1.
    pub armijo_c1: f64,
    /// Weak Wolfe directional-derivative parameter c2.
    pub wolfe_c2: f64,
    pub max_bisections: usize,
    pub max_expansions: usize,
    /// Terminate when the iterate's magnitude passes this.
    pub overflow_guard: f64,
    /// Optional post-acceptance refinement of the step toward
    /// |phi'(t)| <= rel * |phi'(0)|, for exact-line-search-quality steps.
    pub dderiv_polish: Option<f64>,
    /// Record the per-iteration (f, ||g||) history.
    pub keep_history: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            normtol: 1e-8,
            max_iters: 2000,
            armijo_c1: 1e-4,
            wolfe_c2: 0.5,
            max_bisections: 48,
            max_expansions: 52,
            overflow_guard: 1e150,
            dderiv_polish: None,
            keep_history: false,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.armijo_c1 && self.armijo_c1 < self.wolfe_c2 && self.wolfe_c2 < 1.0) {
            return Err(CrouzeixError::DimensionMismatch(
                "line search parameters must satisfy 0 < c1 < c2 < 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientTol,
    LinesearchFailure,
    MaxIters,
    OverflowGuard,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::GradientTol => "gradient_tol",
            Termination::LinesearchFailure => "linesearch_failure",
            Termination::MaxIters => "max_iters",
            Termination::OverflowGuard => "overflow_guard",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub iterations: usize,
    pub final_x: Vec<f64>,
    pub final_f: f64,
    pub final_grad_norm: f64,
    pub termination: Termination,
    /// (f, ||g||) per iteration when history is kept.
    pub history: Vec<(f64, f64)>,
    pub f_evals: usize,
}

/// Outcome of one weak Wolfe search.
#[derive(Debug, Clone)]
pub enum LineSearchOutcome {
    /// Step satisfying both conditions.
    Success { t: f64, f: f64, dderiv: f64 },
    /// Budget exhausted; the best Armijo-satisfying point seen, if any.
    Exhausted { best: Option<(f64, f64, f64)> },
}

/// Weak Armijo-Wolfe line search by doubling then bisection.
///
/// `phi(t)` returns (f(x + t d), g(x + t d)^T d), or None when the
/// objective cannot be evaluated there (treated as an Armijo failure so the
/// bracket shrinks back toward feasibility). `f0` and `d0` are phi(0) and
/// phi'(0); `d0 < 0` is required.
pub fn weak_wolfe_linesearch<F>(
    mut phi: F,
    f0: f64,
    d0: f64,
    opts: &OptimizerOptions,
) -> Result<LineSearchOutcome>
where
    F: FnMut(f64) -> Option<(f64, f64)>,
{
    if !(d0 < 0.0) {
        return Err(CrouzeixError::DimensionMismatch(
            "line search requires a descent direction".into(),
        ));
    }
    let c1 = opts.armijo_c1;
    let c2 = opts.wolfe_c2;
    let mut alpha = 0.0_f64;
    let mut beta = f64::INFINITY;
    let mut t = 1.0_f64;
    let mut best: Option<(f64, f64, f64)> = None;
    let mut bisections = 0usize;
    let mut expansions = 0usize;

    loop {
        let trial = phi(t);
        let mut armijo_ok = false;
        if let Some((ft, dt)) = trial {
            if ft.is_finite() && ft <= f0 + c1 * t * d0 {
                armijo_ok = true;
                if best.map_or(true, |(_, bf, _)| ft < bf) {
                    best = Some((t, ft, dt));
                }
                if dt >= c2 * d0 {
                    let success = polish(&mut phi, (t, ft, dt), f0, d0, opts);
                    return Ok(LineSearchOutcome::Success {
                        t: success.0,
                        f: success.1,
                        dderiv: success.2,
                    });
                }
                alpha = t;
            }
        }
        if !armijo_ok {
            beta = t;
        }

        if beta.is_finite() {
            bisections += 1;
            if bisections > opts.max_bisections {
                return Ok(LineSearchOutcome::Exhausted { best });
            }
            t = 0.5 * (alpha + beta);
        } else {
            expansions += 1;
            if expansions > opts.max_expansions {
                return Ok(LineSearchOutcome::Exhausted { best });
            }
            t *= 2.0;
        }
        if t <= 0.0 || !t.is_finite() {
            return Ok(LineSearchOutcome::Exhausted { best });
        }
    }
}

/// Optional secant refinement toward a near-zero directional derivative.
/// Falls back to the accepted point whenever a probe violates Armijo.
fn polish<F>(
    phi: &mut F,
    accepted: (f64, f64, f64),
    f0: f64,
    d0: f64,
    opts: &OptimizerOptions,
) -> (f64, f64, f64)
where
    F: FnMut(f64) -> Option<(f64, f64)>,
{
    let rel = match opts.dderiv_polish {
        Some(r) => r,
        None => return accepted,
    };
    let c1 = opts.armijo_c1;
    let (mut t, mut ft, mut dt) = accepted;
    let mut t_prev = 0.0;
    let mut d_prev = d0;
    for _ in 0..8 {
        if dt.abs() <= rel * d0.abs() {
            break;
        }
        let denom = dt - d_prev;
        if denom.abs() <= f64::EPSILON * dt.abs().max(d_prev.abs()) {
            break;
        }
        let t_new = t - dt * (t - t_prev) / denom;
        if !t_new.is_finite() || t_new <= 0.0 {
            break;
        }
        match phi(t_new) {
            Some((fn_, dn)) if fn_.is_finite() && fn_ <= f0 + c1 * t_new * d0 => {
                t_prev = t;
                d_prev = dt;
                t = t_new;
                ft = fn_;
                dt = dn;
            }
            _ => break,
        }
    }
    (t, ft, dt)
}

/// BFGS inverse-Hessian update; public so the positive-definiteness
/// property can be exercised directly.
pub fn bfgs_update(h: &mut [f64], dim: usize, s: &[f64], y: &[f64]) {
    let sy: f64 = s.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
    if sy <= 0.0 {
        return;
    }
    let rho = 1.0 / sy;
    // hy = H y
    let mut hy = vec![0.0; dim];
    for i in 0..dim {
        let mut acc = 0.0;
        for j in 0..dim {
            acc += h[i * dim + j] * y[j];
        }
        hy[i] = acc;
    }
    let yhy: f64 = y.iter().zip(hy.iter()).map(|(a, b)| a * b).sum();
    let c = rho * rho * yhy + rho;
    for i in 0..dim {
        for j in 0..dim {
            h[i * dim + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + c * s[i] * s[j];
        }
    }
}

/// Minimizes the oracle from x0. The oracle returns (f, gradient); an Err
/// at a trial point is treated as an infeasible step, an Err at the start
/// aborts.
pub fn minimize<O>(oracle: O, x0: &[f64], opts: &OptimizerOptions) -> Result<RunTrace>
where
    O: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    minimize_with_post_step(oracle, x0, opts, |_x: &mut Vec<f64>| false)
}

/// `minimize` with a hook applied to each accepted iterate. When the hook
/// reports a change (e.g. the opt-in rescaling of polynomial coefficients,
/// harmless for the objective by homogeneity), the objective is
/// re-evaluated there and the curvature model restarts from the identity.
pub fn minimize_with_post_step<O, P>(
    oracle: O,
    x0: &[f64],
    opts: &OptimizerOptions,
    post_step: P,
) -> Result<RunTrace>
where
    O: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
    P: Fn(&mut Vec<f64>) -> bool,
{
    opts.validate()?;
    let dim = x0.len();
    let mut x = x0.to_vec();
    let mut evals = 0usize;

    let (mut f, mut g) = {
        evals += 1;
        oracle(&x).map_err(|e| CrouzeixError::OracleAtStart(e.to_string()))?
    };
    let mut h = vec![0.0; dim * dim];
    for i in 0..dim {
        h[i * dim + i] = 1.0;
    }
    let mut history: Vec<(f64, f64)> = Vec::new();
    let mut reset_used = false;

    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let max_abs = |v: &[f64]| v.iter().map(|a| a.abs()).fold(0.0, f64::max);

    let mut iter = 0usize;
    let termination = loop {
        let gnorm = norm(&g);
        if opts.keep_history {
            history.push((f, gnorm));
        }
        if !f.is_finite() || max_abs(&x) > opts.overflow_guard {
            break Termination::OverflowGuard;
        }
        if gnorm <= opts.normtol {
            break Termination::GradientTol;
        }
        if iter >= opts.max_iters {
            break Termination::MaxIters;
        }

        // d = -H g
        let mut d = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..dim {
                acc += h[i * dim + j] * g[j];
            }
            d[i] = -acc;
        }
        let mut gd: f64 = g.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
        if !(gd < 0.0) {
            // broken curvature model: restart as steepest descent once
            if reset_used {
                break Termination::LinesearchFailure;
            }
            reset_used = true;
            for v in h.iter_mut() {
                *v = 0.0;
            }
            for i in 0..dim {
                h[i * dim + i] = 1.0;
            }
            for i in 0..dim {
                d[i] = -g[i];
            }
            gd = -g.iter().map(|a| a * a).sum::<f64>();
            if !(gd < 0.0) {
                break Termination::GradientTol;
            }
        }

        // line search
        let mut trial_g: Option<Vec<f64>> = None;
        let mut trial_t = f64::NAN;
        let outcome = {
            let phi = |t: f64| -> Option<(f64, f64)> {
                let xt: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
                evals += 1;
                match oracle(&xt) {
                    Ok((ft, gt)) => {
                        let dd: f64 = gt.iter().zip(d.iter()).map(|(a, b)| a * b).sum();
                        trial_g = Some(gt);
                        trial_t = t;
                        Some((ft, dd))
                    }
                    Err(_) => None,
                }
            };
            weak_wolfe_linesearch(phi, f, gd, opts)?
        };

        let accepted = match outcome {
            LineSearchOutcome::Success { t, f: ft, .. } => Some((t, ft)),
            LineSearchOutcome::Exhausted { best } => {
                // take the best Armijo point if it exists, then stop
                if let Some((t, ft, _)) = best {
                    let xt: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
                    evals += 1;
                    if let Ok((ft2, gt)) = oracle(&xt) {
                        x = xt;
                        f = ft2.min(ft);
                        g = gt;
                    }
                }
                None
            }
        };
        let Some((t, ft)) = accepted else {
            break Termination::LinesearchFailure;
        };

        // gradient at the accepted point: reuse the last trial if it was
        // this very step, otherwise evaluate
        let xt: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + t * b).collect();
        let gt = match trial_g {
            Some(gt) if trial_t == t => gt,
            _ => {
                evals += 1;
                match oracle(&xt) {
                    Ok((_, gt)) => gt,
                    Err(_) => break Termination::LinesearchFailure,
                }
            }
        };

        let s: Vec<f64> = d.iter().map(|v| v * t).collect();
        let y: Vec<f64> = gt.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
        bfgs_update(&mut h, dim, &s, &y);
        x = xt;
        f = ft;
        g = gt;
        if post_step(&mut x) {
            evals += 1;
            match oracle(&x) {
                Ok((f2, g2)) => {
                    f = f2;
                    g = g2;
                    for v in h.iter_mut() {
                        *v = 0.0;
                    }
                    for i in 0..dim {
                        h[i * dim + i] = 1.0;
                    }
                }
                Err(_) => break Termination::LinesearchFailure,
            }
        }
        iter += 1;
    };

    Ok(RunTrace {
        iterations: iter,
        final_grad_norm: norm(&g),
        final_x: x,
        final_f: f,
        termination,
        history,
        f_evals: evals,
    })
}
