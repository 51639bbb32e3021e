use super::OptimOptions;
use crate::par;

pub fn fd_step(x: f64, opts: &OptimOptions) -> f64 {
    opts.fd_min_step.max(opts.fd_rel_step * x.abs())
}

/// Central-difference gradient; components are evaluated in parallel.
pub fn fd_gradient(f: &(dyn Fn(&[f64]) -> f64 + Sync), x: &[f64], opts: &OptimOptions) -> Vec<f64> {
    par::map_indices(x.len(), |i| {
        let h = fd_step(x[i], opts);
        let mut p = x.to_vec();
        p[i] = x[i] + h;
        let up = f(&p);
        p[i] = x[i] - h;
        let down = f(&p);
        (up - down) / (2.0 * h)
    })
}
