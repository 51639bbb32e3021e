use std::collections::VecDeque;

use super::line_search::armijo;
use super::{dot, gradient_of, max_abs, norm, Objective, OptimOptions, OptimResult, Termination};
use crate::error::{Error, Result};

/// Limited-memory BFGS with an Armijo backtracking line search.
pub fn lbfgs_minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], opts: &OptimOptions) -> Result<OptimResult> {
    let f = |x: &[f64]| obj.value(x);
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(Error::InvalidStart);
    }
    let mut g = gradient_of(obj, &x, opts);
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut history = vec![fx];
    let mut iterations = 0;
    let termination = loop {
        if max_abs(&g) <= opts.tol_grad || !g.iter().all(|v| v.is_finite()) {
            break Termination::GradientTolerance;
        }
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }
        let mut d = direction(&g, &memory);
        let mut alpha0 = if memory.is_empty() { 1.0 / norm(&g) } else { 1.0 };
        if !(dot(&d, &g) < 0.0) {
            memory.clear();
            d = g.iter().map(|v| -v).collect();
            alpha0 = 1.0 / norm(&g);
        }
        let step = match armijo(&f, &x, fx, &g, &d, alpha0, opts) {
            Some(s) => s,
            None if !memory.is_empty() => {
                memory.clear();
                let d: Vec<f64> = g.iter().map(|v| -v).collect();
                match armijo(&f, &x, fx, &g, &d, 1.0 / norm(&g), opts) {
                    Some(s) => s,
                    None => break Termination::LineSearchFailed,
                }
            }
            None => break Termination::LineSearchFailed,
        };
        iterations += 1;
        let s: Vec<f64> = step.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let g_new = gradient_of(obj, &step.x, opts);
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if memory.len() == opts.history.max(1) {
                memory.pop_front();
            }
            memory.push_back((s.clone(), y, 1.0 / sy));
        } else {
            // negative curvature along s: the stored pairs no longer describe
            // the local Hessian
            memory.clear();
        }
        let df = fx - step.f;
        x = step.x;
        fx = step.f;
        g = g_new;
        history.push(fx);
        if norm(&s) < opts.tol_x {
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

/// Two-loop recursion: `−H·g` from the stored curvature pairs.
fn direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter().map(|v| -v).collect()
}
