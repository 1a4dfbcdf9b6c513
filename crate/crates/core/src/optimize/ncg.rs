//! Preconditioned nonlinear conjugate gradients (Polak–Ribière+).

use super::linesearch::{strong_wolfe, WolfeParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcgOptions {
    /// Stop when `max_i |g_i| ≤ tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Restart with the preconditioned steepest descent direction every
    /// this many iterations (0: number of unknowns).
    pub restart_every: usize,
    pub wolfe: WolfeParams,
}

impl Default for NcgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 50_000,
            restart_every: 0,
            wolfe: WolfeParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NcgOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Objective after each accepted step, starting with the initial value.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `f` from `x0`. `f(x, g)` returns the value and writes the
/// gradient into `g`; `precond(g, z)` writes `z = Pg` for a symmetric
/// positive definite `P` approximating the inverse Hessian.
pub fn minimize(
    mut f: impl FnMut(&[f64], &mut [f64]) -> f64,
    x0: Vec<f64>,
    mut precond: impl FnMut(&[f64], &mut [f64]),
    opts: NcgOptions,
) -> NcgOutcome {
    let n = x0.len();
    let restart_every = if opts.restart_every == 0 { n } else { opts.restart_every };
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut value = f(&x, &mut g);
    let mut evaluations = 1;
    let mut z = vec![0.0; n];
    precond(&g, &mut z);
    let mut d: Vec<f64> = z.iter().map(|v| -v).collect();
    let mut gz = dot(&g, &z);
    let mut history = vec![value];

    let mut xt = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut iterations = 0;
    let mut since_restart = 0;
    let mut prev_step: Option<(f64, f64)> = None;
    let mut converged = max_abs(&g) <= opts.tol;

    while !converged && iterations < opts.max_iters && value.is_finite() {
        let mut slope = dot(&g, &d);
        let mut steepest = since_restart == 0;
        if slope >= 0.0 {
            d.iter_mut().zip(&z).for_each(|(d, z)| *d = -z);
            slope = -gz;
            steepest = true;
            since_restart = 0;
        }
        let mut accepted = None;
        for attempt in 0..2 {
            let alpha0 = match prev_step {
                Some((alpha, old_slope)) => (alpha * old_slope / slope).min(1e3 * alpha),
                None => 1.0 / max_abs(&d).max(1e-300),
            };
            let res = strong_wolfe(
                |alpha| {
                    for i in 0..n {
                        xt[i] = x[i] + alpha * d[i];
                    }
                    let v = f(&xt, &mut gt);
                    evaluations += 1;
                    (v, dot(&gt, &d))
                },
                value,
                slope,
                alpha0,
                opts.wolfe,
            );
            if res.is_some() || steepest || attempt == 1 {
                accepted = res;
                break;
            }
            d.iter_mut().zip(&z).for_each(|(d, z)| *d = -z);
            slope = -gz;
            steepest = true;
            since_restart = 0;
        }
        let Some(trial) = accepted else { break };
        if trial.value > value + opts.wolfe.approx_slack * value.abs() {
            break;
        }
        prev_step = Some((trial.alpha, slope));
        std::mem::swap(&mut x, &mut xt);
        value = trial.value;
        history.push(value);
        iterations += 1;
        since_restart += 1;

        // β = g⁺ᵀP(g⁺ − g)/(gᵀPg), clipped at zero.
        precond(&gt, &mut z);
        let mut num = 0.0;
        let mut gz_new = 0.0;
        for i in 0..n {
            num += z[i] * (gt[i] - g[i]);
            gz_new += z[i] * gt[i];
        }
        std::mem::swap(&mut g, &mut gt);
        let mut beta = (num / gz).max(0.0);
        if since_restart >= restart_every || !beta.is_finite() {
            beta = 0.0;
            since_restart = 0;
        }
        gz = gz_new;
        for i in 0..n {
            d[i] = -z[i] + beta * d[i];
        }
        converged = max_abs(&g) <= opts.tol;
    }
    NcgOutcome {
        grad_norm: max_abs(&g),
        x,
        value,
        iterations,
        evaluations,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let out = minimize(
            f,
            vec![-1.2, 1.0],
            |g, z| z.copy_from_slice(g),
            NcgOptions {
                tol: 1e-9,
                ..NcgOptions::default()
            },
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    }

    #[test]
    fn ill_conditioned_quadratic_with_preconditioner() {
        let diag: Vec<f64> = (0..50).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
        let f = |x: &[f64], g: &mut [f64]| {
            let mut v = 0.0;
            for i in 0..x.len() {
                g[i] = diag[i] * (x[i] - 1.0);
                v += 0.5 * diag[i] * (x[i] - 1.0).powi(2);
            }
            v
        };
        let pre: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
        let diagonal = |g: &[f64], z: &mut [f64]| {
            for i in 0..g.len() {
                z[i] = pre[i] * g[i];
            }
        };
        let out = minimize(
            f,
            vec![0.0; 50],
            diagonal,
            NcgOptions {
                tol: 1e-10,
                ..NcgOptions::default()
            },
        );
        assert!(out.converged);
        assert!(out.iterations < 10);
    }

    #[test]
    fn already_stationary() {
        let f = |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            x[0] * x[0]
        };
        let out = minimize(f, vec![0.0], |g, z| z.copy_from_slice(g), NcgOptions::default());
        assert!(out.converged);
        assert_eq!(out.iterations, 0);
    }
}
