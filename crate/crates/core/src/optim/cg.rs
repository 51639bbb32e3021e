use super::line_search::armijo;
use super::{dot, gradient_of, max_abs, norm, Objective, OptimOptions, OptimResult, Termination};
use crate::error::{Error, Result};

/// Nonlinear conjugate gradient with Fletcher–Reeves updates. The direction
/// restarts along the steepest descent every `n` iterations and whenever it
/// stops being a descent direction.
pub fn cg_minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], opts: &OptimOptions) -> Result<OptimResult> {
    let f = |x: &[f64]| obj.value(x);
    let n = x0.len().max(1);
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(Error::InvalidStart);
    }
    let mut g = gradient_of(obj, &x, opts);
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut alpha0 = 1.0 / norm(&g);
    let mut history = vec![fx];
    let mut iterations = 0;
    let termination = loop {
        if max_abs(&g) <= opts.tol_grad || !g.iter().all(|v| v.is_finite()) {
            break Termination::GradientTolerance;
        }
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }
        if !(dot(&d, &g) < 0.0) {
            d = g.iter().map(|v| -v).collect();
            alpha0 = 1.0 / norm(&g);
        }
        let step = match armijo(&f, &x, fx, &g, &d, alpha0, opts) {
            Some(s) => s,
            None => {
                let sd: Vec<f64> = g.iter().map(|v| -v).collect();
                match armijo(&f, &x, fx, &g, &sd, 1.0 / norm(&g), opts) {
                    Some(s) => {
                        d = sd;
                        s
                    }
                    None => break Termination::LineSearchFailed,
                }
            }
        };
        iterations += 1;
        let step_len = step.alpha * norm(&d);
        let g_new = gradient_of(obj, &step.x, opts);
        let df = fx - step.f;
        let gd_old = dot(&g, &d);
        let beta = if iterations % n == 0 {
            0.0
        } else {
            dot(&g_new, &g_new) / dot(&g, &g)
        };
        let d_new: Vec<f64> = g_new.iter().zip(&d).map(|(gi, di)| -gi + beta * di).collect();
        let gd_new = dot(&g_new, &d_new);
        alpha0 = if gd_new < 0.0 {
            (step.alpha * gd_old / gd_new).max(1e-12)
        } else {
            1.0 / norm(&g_new)
        };
        x = step.x;
        fx = step.f;
        g = g_new;
        d = d_new;
        history.push(fx);
        if step_len < opts.tol_x {
            break Termination::StepTolerance;
        }
        if df.abs() < opts.tol_f {
            break Termination::FunctionTolerance;
        }
    };
    Ok(OptimResult {
        x,
        f: fx,
        iterations,
        converged: !matches!(termination, Termination::MaxIterations | Termination::LineSearchFailed),
        termination,
        history,
    })
}
