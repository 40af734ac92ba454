//! Limited-memory BFGS with Armijo backtracking.
//!
//! Quasi-second-order smooth minimizer: two-loop recursion over a short
//! curvature history, gradient-scaled initial Hessian, direction reset to
//! steepest descent whenever the history fails to produce descent.

#[derive(Clone, Copy, Debug)]
pub struct LbfgsOptions {
    pub max_iterations: usize,
    /// Stop when the gradient infinity norm drops below this.
    pub gradient_tolerance: f64,
    /// Stop when the accepted step's infinity norm drops below this.
    pub step_tolerance: f64,
    pub memory: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 80,
            gradient_tolerance: 1e-8,
            step_tolerance: 1e-12,
            memory: 8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LbfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// True when a tolerance was hit; false when the budget ran out or the
    /// line search stalled.
    pub converged: bool,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`: `value(x)` must equal the first component of `grad(x)`.
pub fn minimize(
    mut value: impl FnMut(&[f64]) -> f64,
    mut grad: impl FnMut(&[f64]) -> (f64, Vec<f64>),
    x0: Vec<f64>,
    opts: &LbfgsOptions,
) -> LbfgsOutcome {
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut g) = grad(&x);
    let mut history: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new(); // (s, y, 1/(y.s))
    let mut iterations = 0;

    if n == 0 {
        return LbfgsOutcome {
            x,
            value: f,
            iterations,
            converged: true,
        };
    }

    while iterations < opts.max_iterations {
        if inf_norm(&g) <= opts.gradient_tolerance {
            return LbfgsOutcome {
                x,
                value: f,
                iterations,
                converged: true,
            };
        }

        // Two-loop recursion.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.last() {
            let gamma = dot(s, y) / dot(y, y);
            for di in d.iter_mut() {
                *di *= gamma;
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut descent = dot(&g, &d);
        if descent >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v).collect();
            descent = dot(&g, &d);
        }

        // Weak-Wolfe line search (sufficient decrease plus curvature) by
        // bisection; the curvature condition keeps s.y positive so the
        // quasi-Newton update stays well defined. The gradient computed for
        // the accepted candidate doubles as the next iteration's gradient.
        const C1: f64 = 1e-4;
        const C2: f64 = 0.9;
        let mut search = |d: &[f64], descent: f64| -> Option<(Vec<f64>, f64, Vec<f64>)> {
            let mut lo = 0.0_f64;
            let mut hi = f64::INFINITY;
            let mut t = 1.0_f64;
            let mut armijo_fallback: Option<(Vec<f64>, f64)> = None;
            for _ in 0..50 {
                let cand: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + t * di).collect();
                let fc = value(&cand);
                if !fc.is_finite() || fc > f + C1 * t * descent {
                    hi = t;
                } else {
                    armijo_fallback = Some((cand.clone(), fc));
                    let (fc2, gc) = grad(&cand);
                    if dot(&gc, d) < C2 * descent {
                        lo = t; // step too short for curvature, extend
                    } else {
                        return Some((cand, fc2, gc));
                    }
                }
                t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * t };
                if hi.is_finite() && hi - lo <= 1e-12 * hi.max(1.0) {
                    break;
                }
            }
            // Curvature unattainable within the budget; fall back to the
            // best sufficient-decrease point if one was seen.
            armijo_fallback.map(|(cand, _)| {
                let (fc, gc) = grad(&cand);
                (cand, fc, gc)
            })
        };
        let mut accepted = search(&d, descent);
        if accepted.is_none() && !history.is_empty() {
            // Unusable direction from stale curvature; retry along
            // steepest descent.
            history.clear();
            d = g.iter().map(|v| -v).collect();
            descent = dot(&g, &d);
            accepted = search(&d, descent);
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            // No decrease along steepest descent: numerically stationary.
            return LbfgsOutcome {
                x,
                value: f,
                iterations,
                converged: false,
            };
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * inf_norm(&s) * inf_norm(&y) {
            if history.len() == opts.memory {
                history.remove(0);
            }
            history.push((s.clone(), y, 1.0 / sy));
        }
        let step = inf_norm(&s);
        x = x_new;
        f = f_new;
        g = g_new;
        iterations += 1;
        if step <= opts.step_tolerance {
            return LbfgsOutcome {
                x,
                value: f,
                iterations,
                converged: true,
            };
        }
    }
    LbfgsOutcome {
        x,
        value: f,
        iterations,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn minimizes_quadratic_bowl() {
        let q = |x: &[f64]| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
        let g = |x: &[f64]| {
            (
                q(x),
                vec![2.0 * (x[0] - 3.0), 20.0 * (x[1] + 1.0)],
            )
        };
        let out = minimize(q, g, vec![0.0, 0.0], &LbfgsOptions::default());
        assert!(out.converged);
        assert_relative_eq!(out.x[0], 3.0, epsilon = 1e-6);
        assert_relative_eq!(out.x[1], -1.0, epsilon = 1e-6);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let g = |x: &[f64]| {
            let dfdx0 = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]);
            let dfdx1 = 200.0 * (x[1] - x[0] * x[0]);
            (f(x), vec![dfdx0, dfdx1])
        };
        let opts = LbfgsOptions {
            max_iterations: 400,
            ..Default::default()
        };
        let out = minimize(f, g, vec![-1.2, 1.0], &opts);
        assert!(out.value < 1e-10, "value {}", out.value);
        assert_relative_eq!(out.x[0], 1.0, epsilon = 1e-4);
        assert_relative_eq!(out.x[1], 1.0, epsilon = 1e-4);
    }

    #[test]
    fn energy_never_increases() {
        // Track accepted values through a nonconvex function.
        let f = |x: &[f64]| x[0].sin() * (x[0] * 0.5).cos() + 0.01 * x[0] * x[0];
        let g = |x: &[f64]| {
            let h = 1e-7;
            let d = (f(&[x[0] + h]) - f(&[x[0] - h])) / (2.0 * h);
            (f(x), vec![d])
        };
        let out = minimize(f, g, vec![2.0], &LbfgsOptions::default());
        assert!(out.value <= f(&[2.0]) + 1e-12);
    }
}
