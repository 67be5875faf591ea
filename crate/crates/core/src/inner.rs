// Copyright 2026 The nmr-krotov Contributors
// SPDX-License-Identifier: Apache-2.0

//! Small dense minimizers for the per-step local problems (K <= 4 variables).

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerMethod {
    QuasiNewton,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolverConfig {
    pub method: InnerMethod,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for InnerSolverConfig {
    fn default() -> Self {
        Self {
            method: InnerMethod::QuasiNewton,
            max_iterations: 50,
            gradient_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimize `f` from `x0`. `f` returns the value and gradient. The returned
/// point never has a larger value than `x0`; a non-finite evaluation at the
/// start yields `x0` unchanged with `converged = false`.
pub fn minimize<F>(mut f: F, x0: &[f64], cfg: &InnerSolverConfig) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let (mut fx, mut g) = f(x0);
    let mut x = x0.to_vec();
    if !fx.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Minimum {
            x,
            value: fx,
            iterations: 0,
            converged: false,
        };
    }

    // Inverse Hessian approximation (quasi-Newton) or previous direction (CG).
    let mut h_inv = identity(n);
    let mut prev_dir = vec![0.0; n];
    let mut prev_g = g.clone();

    for it in 0..cfg.max_iterations {
        if inf_norm(&g) <= cfg.gradient_tolerance {
            return Minimum {
                x,
                value: fx,
                iterations: it,
                converged: true,
            };
        }

        let mut dir = match cfg.method {
            InnerMethod::QuasiNewton => mat_vec(&h_inv, &g).iter().map(|v| -v).collect::<Vec<_>>(),
            InnerMethod::ConjugateGradient => {
                if it == 0 {
                    g.iter().map(|v| -v).collect()
                } else {
                    // Polak-Ribiere+, restarted every n steps.
                    let yk: Vec<f64> = g.iter().zip(&prev_g).map(|(a, b)| a - b).collect();
                    let beta = if it % n.max(1) == 0 {
                        0.0
                    } else {
                        (dot(&g, &yk) / dot(&prev_g, &prev_g)).max(0.0)
                    };
                    g.iter().zip(&prev_dir).map(|(gi, di)| -gi + beta * di).collect()
                }
            }
        };
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            h_inv = identity(n);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = f(&trial);
            if ft.is_finite() && gt.iter().all(|v| v.is_finite()) && ft <= fx + ARMIJO * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            return Minimum {
                x,
                value: fx,
                iterations: it,
                converged: false,
            };
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if cfg.method == InnerMethod::QuasiNewton {
            let sy = dot(&s, &y);
            if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
                if it == 0 {
                    // Shanno-Phua scaling of the initial inverse Hessian.
                    let scale = sy / dot(&y, &y);
                    for v in h_inv.iter_mut() {
                        *v *= scale;
                    }
                }
                bfgs_update(&mut h_inv, &s, &y, sy);
            }
        }

        let decrease = fx - f_new;
        prev_dir = dir;
        prev_g = std::mem::replace(&mut g, g_new);
        x = x_new;
        fx = f_new;
        if decrease <= 1e-16 * (1.0 + fx.abs()) && inf_norm(&s) <= 1e-15 * (1.0 + inf_norm(&x)) {
            return Minimum {
                x,
                value: fx,
                iterations: it + 1,
                converged: true,
            };
        }
    }
    let converged = inf_norm(&g) <= cfg.gradient_tolerance;
    Minimum {
        x,
        value: fx,
        iterations: cfg.max_iterations,
        converged,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|r| dot(&m[r * n..(r + 1) * n], v)).collect()
}

/// `H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T`
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    for r in 0..n {
        for c in 0..n {
            h[r * n + c] += -rho * (s[r] * hy[c] + hy[r] * s[c]) + (rho * rho * yhy + rho) * s[r] * s[c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (f, g)
    }

    #[test]
    fn quasi_newton_solves_rosenbrock() {
        let cfg = InnerSolverConfig {
            max_iterations: 200,
            ..Default::default()
        };
        let m = minimize(rosenbrock, &[-1.2, 1.0], &cfg);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn conjugate_gradient_solves_quadratic() {
        let cfg = InnerSolverConfig {
            method: InnerMethod::ConjugateGradient,
            max_iterations: 500,
            gradient_tolerance: 1e-9,
        };
        let quad = |x: &[f64]| {
            let f = 3.0 * x[0] * x[0] + x[1] * x[1] + x[0] * x[1] - x[0] + 2.0 * x[2] * x[2];
            (f, vec![6.0 * x[0] + x[1] - 1.0, 2.0 * x[1] + x[0], 4.0 * x[2]])
        };
        let m = minimize(quad, &[4.0, -3.0, 1.0], &cfg);
        assert!(m.converged);
        // stationary point: 6a + b = 1, 2b + a = 0 -> a = 2/11, b = -1/11
        assert!((m.x[0] - 2.0 / 11.0).abs() < 1e-8);
        assert!((m.x[1] + 1.0 / 11.0).abs() < 1e-8);
    }

    #[test]
    fn never_worse_than_start() {
        let cfg = InnerSolverConfig {
            max_iterations: 3,
            ..Default::default()
        };
        let x0 = [0.3, -0.7];
        let m = minimize(rosenbrock, &x0, &cfg);
        assert!(m.value <= rosenbrock(&x0).0);
    }

    #[test]
    fn stationary_start_is_returned() {
        let cfg = InnerSolverConfig::default();
        let m = minimize(|x: &[f64]| (x[0] * x[0], vec![2.0 * x[0]]), &[0.0], &cfg);
        assert_eq!(m.x, vec![0.0]);
        assert_eq!(m.iterations, 0);
    }

    #[test]
    fn non_finite_start_is_returned_unchanged() {
        let cfg = InnerSolverConfig::default();
        let m = minimize(|_: &[f64]| (f64::NAN, vec![0.0]), &[1.5], &cfg);
        assert_eq!(m.x, vec![1.5]);
        assert!(!m.converged);
    }
}
