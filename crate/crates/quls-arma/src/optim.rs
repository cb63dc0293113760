//! Quasi-Newton optimization: BFGS with a backtracking Armijo line search.
//!
//! The routine minimizes; likelihood callers negate. Objective values that
//! come back non-finite are treated as out-of-bounds and rejected by the
//! line search, which is how the unconstrained optimizer honors the
//! transformed parameter space.

/// Options for [`minimize`].
#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Convergence when the gradient sup-norm drops below this.
    pub grad_tol: f64,
    /// Convergence when an accepted step's sup-norm drops below this.
    pub step_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Backtracking shrink factor.
    pub shrink: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iter: 500,
            grad_tol: 1e-6,
            step_tol: 1e-10,
            armijo_c1: 1e-4,
            shrink: 0.5,
        }
    }
}

/// Result of a BFGS run.
#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Gradient criterion met.
    pub converged_grad: bool,
    /// Step criterion met (or the line search could make no progress).
    pub converged_step: bool,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

/// BFGS with an inverse-Hessian approximation and Armijo backtracking.
pub fn minimize<F, G>(mut f: F, mut grad: G, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> Vec<f64>,
{
    let d = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut g = grad(&x);

    // Inverse Hessian approximation, identity to start.
    let mut h_inv = vec![0.0; d * d];
    let reset_h = |h: &mut Vec<f64>| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..d {
            h[i * d + i] = 1.0;
        }
    };
    reset_h(&mut h_inv);
    let mut first_update = true;

    let mut converged_grad = inf_norm(&g) <= opts.grad_tol;
    let mut converged_step = false;
    let mut iter = 0;

    while iter < opts.max_iter && !converged_grad && !converged_step {
        iter += 1;

        let mut accepted = false;
        let mut x_new = x.clone();
        let mut f_new = fx;
        for attempt in 0..2 {
            if attempt == 1 {
                if first_update {
                    break; // steepest descent already tried
                }
                reset_h(&mut h_inv);
                first_update = true;
            }

            // Direction = -H g.
            let mut dir = vec![0.0; d];
            for i in 0..d {
                let mut s = 0.0;
                for j in 0..d {
                    s += h_inv[i * d + j] * g[j];
                }
                dir[i] = -s;
            }
            let mut slope: f64 = dir.iter().zip(&g).map(|(a, b)| a * b).sum();
            if !slope.is_finite() || slope >= 0.0 {
                reset_h(&mut h_inv);
                first_update = true;
                for i in 0..d {
                    dir[i] = -g[i];
                }
                slope = -g.iter().map(|v| v * v).sum::<f64>();
            }

            // A fresh (identity) approximation carries no curvature scale,
            // so cap the first trial step; with curvature built up, the
            // unit step preserves superlinear convergence.
            let mut step = if first_update {
                (1.0 / inf_norm(&dir)).min(1.0)
            } else {
                1.0
            };

            // Backtracking Armijo line search. The epsilon term keeps the
            // endgame alive once the true decrease per step falls below
            // floating-point resolution of the objective.
            let f_floor = 4.0 * f64::EPSILON * fx.abs();
            while step > 1e-20 {
                for i in 0..d {
                    x_new[i] = x[i] + step * dir[i];
                }
                f_new = f(&x_new);
                if f_new.is_finite() && f_new <= fx + opts.armijo_c1 * step * slope + f_floor {
                    accepted = true;
                    break;
                }
                step *= opts.shrink;
            }
            if accepted {
                break;
            }
        }
        if !accepted {
            // No direction of sufficient decrease at any representable step.
            converged_step = true;
            break;
        }
        debug_assert!(
            f_new <= fx + 4.0 * f64::EPSILON * fx.abs(),
            "line search accepted an uphill step"
        );

        let g_new = grad(&x_new);
        let s: Vec<f64> = (0..d).map(|i| x_new[i] - x[i]).collect();
        let yv: Vec<f64> = (0..d).map(|i| g_new[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();

        if sy > 1e-12 * inf_norm(&s) * inf_norm(&yv).max(1e-300) && sy.is_finite() {
            if first_update {
                // Scale the initial matrix before the first update.
                let yy: f64 = yv.iter().map(|v| v * v).sum();
                if yy > 0.0 {
                    let scale = sy / yy;
                    for i in 0..d {
                        for j in 0..d {
                            h_inv[i * d + j] = if i == j { scale } else { 0.0 };
                        }
                    }
                }
                first_update = false;
            }
            // H <- (I - rho s y') H (I - rho y s') + rho s s'.
            let rho = 1.0 / sy;
            let mut hy = vec![0.0; d];
            for i in 0..d {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += h_inv[i * d + j] * yv[j];
                }
                hy[i] = acc;
            }
            let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..d {
                for j in 0..d {
                    h_inv[i * d + j] += rho * rho * yhy * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j])
                        + rho * s[i] * s[j];
                }
            }
        }

        let step_size = inf_norm(&s);
        x = x_new;
        fx = f_new;
        g = g_new;
        converged_grad = inf_norm(&g) <= opts.grad_tol;
        converged_step = step_size <= opts.step_tol;
    }

    let grad_norm = inf_norm(&g);
    BfgsOutcome {
        x,
        f: fx,
        grad: g,
        grad_norm,
        iterations: iter,
        converged_grad,
        converged_step,
    }
}
