//! Unconstrained minimisers (L-BFGS, Fletcher–Reeves conjugate gradient) and
//! RANSAC robust fitting.

mod cg;
mod fd;
mod lbfgs;
mod line_search;
mod ransac;

pub use cg::cg_minimize;
pub use fd::{fd_gradient, fd_step};
pub use lbfgs::lbfgs_minimize;
pub use ransac::{ransac, RansacResult, RansacSpec};

/// A cost to minimise, optionally with its gradient. Without an analytic
/// gradient, central finite differences are used.
pub trait Objective: Sync {
    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for F {
    fn value(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// A cost paired with its analytic gradient.
pub struct WithGradient<F, G>(pub F, pub G);

impl<F, G> Objective for WithGradient<F, G>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    fn value(&self, x: &[f64]) -> f64 {
        (self.0)(x)
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some((self.1)(x))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimOptions {
    pub max_iter: usize,
    /// Stop when the accepted step is shorter than this (Euclidean norm).
    pub tol_x: f64,
    /// Stop when the cost decreases by less than this.
    pub tol_f: f64,
    /// Stop when the largest gradient component is below this.
    pub tol_grad: f64,
    /// L-BFGS memory.
    pub history: usize,
    /// Armijo sufficient-decrease constant.
    pub c1: f64,
    /// Finite-difference step `max(fd_min_step, fd_rel_step·|xᵢ|)`.
    pub fd_rel_step: f64,
    pub fd_min_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iter: 400,
            tol_x: 1e-8,
            tol_f: 1e-10,
            tol_grad: 1e-12,
            history: 10,
            c1: 1e-4,
            fd_rel_step: 1e-4,
            fd_min_step: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    StepTolerance,
    FunctionTolerance,
    GradientTolerance,
    MaxIterations,
    /// No step along the search direction decreased the cost; the result is
    /// the best point found.
    LineSearchFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Cost of every accepted iterate, starting with `f(x0)`.
    pub history: Vec<f64>,
}

pub(crate) fn gradient_of<O: Objective + ?Sized>(obj: &O, x: &[f64], opts: &OptimOptions) -> Vec<f64> {
    obj.gradient(x)
        .unwrap_or_else(|| fd_gradient(&|p: &[f64]| obj.value(p), x, opts))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
