//! Quasi-Newton minimisation with finite-difference derivatives.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Gradient-norm threshold for convergence.
    pub gtol: f64,
    /// Objective-change threshold for convergence.
    pub ftol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            gtol: 1e-5,
            ftol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    /// |f_k - f_{k-1}| at the final iteration.
    pub last_change: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Central-difference gradient. Non-finite evaluations poison the result.
pub fn numerical_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = 6e-6 * x[i].abs().max(1.0);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Hessian with per-coordinate steps.
pub fn numerical_hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], steps: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let f0 = f(x);
    let mut probe = x.to_vec();
    let eval = |probe: &mut Vec<f64>, moves: &[(usize, f64)]| {
        for &(i, delta) in moves {
            probe[i] += delta;
        }
        let v = f(probe);
        for &(i, _) in moves {
            probe[i] = x[i];
        }
        v
    };
    let mut h = DMatrix::zeros(d, d);
    for i in 0..d {
        let hi = steps[i];
        let up = eval(&mut probe, &[(i, hi)]);
        let down = eval(&mut probe, &[(i, -hi)]);
        h[(i, i)] = (up - 2.0 * f0 + down) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let pp = eval(&mut probe, &[(i, hi), (j, hj)]);
            let pm = eval(&mut probe, &[(i, hi), (j, -hj)]);
            let mp = eval(&mut probe, &[(i, -hi), (j, hj)]);
            let mm = eval(&mut probe, &[(i, -hi), (j, -hj)]);
            let v = (pp - pm - mp + mm) / (4.0 * hi * hj);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|g| g * g).sum::<f64>().sqrt()
}

/// Minimises `f` from `x0` by BFGS with an Armijo backtracking line search.
///
/// Non-finite objective values are treated as +inf, so the search backs off
/// from regions where the model is undefined.
pub fn minimize<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], options: &BfgsOptions) -> Minimum {
    let objective = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let d = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = objective(x.as_slice());
    let mut g = DVector::from_vec(numerical_gradient(&objective, x.as_slice()));
    let mut inv_h = DMatrix::<f64>::identity(d, d);
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;
    let mut fresh_hessian = true;

    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Minimum {
            x: x0.to_vec(),
            value: fx,
            gradient_norm: f64::INFINITY,
            last_change,
            iterations,
            converged: false,
        };
    }

    while iterations < options.max_iter {
        if g.norm() < options.gtol && last_change < options.ftol {
            break;
        }
        iterations += 1;

        let mut direction = -(&inv_h * &g);
        let mut slope = g.dot(&direction);
        if slope >= 0.0 {
            inv_h = DMatrix::identity(d, d);
            direction = -g.clone();
            slope = g.dot(&direction);
            fresh_hessian = true;
        }

        // Cap the first trial step so that a poor Hessian guess cannot jump
        // far outside the region where the likelihood is defined.
        let dir_norm = direction.norm();
        let mut alpha = if fresh_hessian {
            (0.1 / dir_norm.max(1e-300)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + alpha * &direction;
            let ft = objective(trial.as_slice());
            if ft <= fx + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= 0.5;
        }

        let Some((x_new, f_new)) = accepted else {
            if fresh_hessian {
                // steepest descent failed too: stationary to working precision
                last_change = 0.0;
                break;
            }
            inv_h = DMatrix::identity(d, d);
            fresh_hessian = true;
            continue;
        };

        let g_new = DVector::from_vec(numerical_gradient(&objective, x_new.as_slice()));
        if g_new.iter().any(|v| !v.is_finite()) {
            inv_h = DMatrix::identity(d, d);
            fresh_hessian = true;
            continue;
        }
        let s = &x_new - &x;
        let yv = &g_new - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            if fresh_hessian {
                inv_h = DMatrix::identity(d, d) * (sy / yv.dot(&yv));
            }
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(d, d);
            let left = &eye - rho * &s * yv.transpose();
            let right = &eye - rho * &yv * s.transpose();
            inv_h = &left * &inv_h * &right + rho * &s * s.transpose();
            fresh_hessian = false;
        }
        last_change = (fx - f_new).abs();
        x = x_new;
        fx = f_new;
        g = g_new;
    }

    let gradient_norm = norm(g.as_slice());
    Minimum {
        x: x.iter().copied().collect(),
        value: fx,
        gradient_norm,
        last_change,
        iterations,
        converged: gradient_norm < options.gtol && last_change < options.ftol,
    }
}
