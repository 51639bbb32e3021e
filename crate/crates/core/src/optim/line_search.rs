use super::{dot, OptimOptions};

pub(crate) struct Step {
    pub alpha: f64,
    pub x: Vec<f64>,
    pub f: f64,
}

const MAX_TRIALS: usize = 50;

fn point(x: &[f64], d: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

/// Backtracking Armijo search along the descent direction `d` starting at
/// `alpha0`. Once a step is accepted, the minimiser of the quadratic through
/// `f(0)`, `f'(0)` and `f(α)` is also tried and kept if it is lower.
pub(crate) fn armijo(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    fx: f64,
    g: &[f64],
    d: &[f64],
    alpha0: f64,
    opts: &OptimOptions,
) -> Option<Step> {
    let slope = dot(g, d);
    if !(slope < 0.0) {
        return None;
    }
    let mut alpha = alpha0;
    for _ in 0..MAX_TRIALS {
        let xa = point(x, d, alpha);
        let fa = f(&xa);
        if fa.is_finite() && fa <= fx + opts.c1 * alpha * slope {
            let curvature = fa - fx - alpha * slope;
            if curvature > 0.0 {
                let star = -slope * alpha * alpha / (2.0 * curvature);
                if star.is_finite() && star > 0.0 && (star - alpha).abs() > 1e-12 * alpha {
                    let xs = point(x, d, star);
                    let fs = f(&xs);
                    if fs.is_finite() && fs < fa {
                        return Some(Step {
                            alpha: star,
                            x: xs,
                            f: fs,
                        });
                    }
                }
            }
            return Some(Step { alpha, x: xa, f: fa });
        }
        let next = if fa.is_finite() {
            let curvature = fa - fx - alpha * slope;
            let star = -slope * alpha * alpha / (2.0 * curvature);
            if star.is_finite() {
                star.clamp(0.1 * alpha, 0.5 * alpha)
            } else {
                0.5 * alpha
            }
        } else {
            0.25 * alpha
        };
        alpha = next;
        if alpha * super::norm(d) < f64::EPSILON * (1.0 + super::norm(x)) {
            break;
        }
    }
    None
}
