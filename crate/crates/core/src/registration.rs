//! Intensity-based registration: a transform family, a similarity metric and
//! a minimiser, evaluated on the fixed image grid.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::image::{Interpolation, MAX_DIMS};
use crate::metrics::Metric;
use crate::optim::{
    cg_minimize, fd_step, lbfgs_minimize, Objective, OptimOptions, OptimResult, Termination, WithGradient,
};
use crate::par;
use crate::transforms::{rigid_param_count, rigid_params_to_matrix, transform_rigid, FfdState, FfdWarper};

#[derive(Clone, Debug, PartialEq)]
pub enum TransformModel {
    Rigid,
    Ffd(FfdState),
}

impl TransformModel {
    pub fn param_count(&self, ndim: usize) -> Result<usize> {
        match self {
            TransformModel::Rigid => rigid_param_count(ndim),
            TransformModel::Ffd(state) => Ok(state.param_count()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Optimizer {
    #[default]
    Lbfgs,
    Cg,
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lbfgs" | "l-bfgs" => Ok(Optimizer::Lbfgs),
            "cg" => Ok(Optimizer::Cg),
            other => Err(Error::InvalidArgument(format!(
                "unknown optimizer '{other}' (expected lbfgs or cg)"
            ))),
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Lbfgs => "lbfgs",
            Optimizer::Cg => "cg",
        })
    }
}

#[derive(Clone, Debug)]
pub struct RegistrationProblem<'a> {
    pub fixed: &'a Image,
    pub moving: &'a Image,
    pub transform: TransformModel,
    pub metric: Metric,
    pub optimizer: Optimizer,
    /// Starting parameters; zeros when absent.
    pub x0: Option<Vec<f64>>,
    pub options: OptimOptions,
}

#[derive(Clone, Debug)]
pub struct RegistrationResult {
    pub params: Vec<f64>,
    pub cost_initial: f64,
    pub cost_final: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    /// Moving image warped onto the fixed grid with the final parameters.
    pub warped: Image,
    /// Homogeneous matrix of a rigid result, centred on the fixed image.
    pub matrix: Option<DMatrix<f64>>,
    pub cost_history: Vec<f64>,
}

enum Warp<'a> {
    Rigid(&'a Image),
    Ffd(FfdWarper),
}

impl Warp<'_> {
    fn apply(&self, moving: &Image, params: &[f64]) -> Result<Image> {
        match self {
            Warp::Rigid(fixed) => transform_rigid(moving, params, fixed),
            Warp::Ffd(w) => w.warp(moving, params),
        }
    }
}

/// Minimises the metric between `fixed` and the warped `moving` image.
pub fn register(problem: &RegistrationProblem) -> Result<RegistrationResult> {
    let (fixed, moving) = (problem.fixed, problem.moving);
    if fixed.ndim() != moving.ndim() {
        return Err(Error::GeometryMismatch(format!(
            "fixed image is {}D, moving image is {}D",
            fixed.ndim(),
            moving.ndim()
        )));
    }
    let count = problem.transform.param_count(fixed.ndim())?;
    let x0 = problem.x0.clone().unwrap_or_else(|| vec![0.0; count]);
    if x0.len() != count {
        return Err(Error::InvalidArgument(format!(
            "x0 has {} values, the transform takes {count}",
            x0.len()
        )));
    }
    let warp = match &problem.transform {
        TransformModel::Rigid => Warp::Rigid(fixed),
        TransformModel::Ffd(state) => {
            if state.ndim() != fixed.ndim() {
                return Err(Error::InvalidArgument(format!(
                    "FFD is {}D, images are {}D",
                    state.ndim(),
                    fixed.ndim()
                )));
            }
            Warp::Ffd(FfdWarper::new(state, fixed)?)
        }
    };
    let cost = |p: &[f64]| -> Result<f64> { problem.metric.cost(fixed, &warp.apply(moving, p)?) };
    let cost_initial = cost(&x0)?;
    let objective = |p: &[f64]| cost(p).unwrap_or(f64::NAN);
    let local = match (&warp, problem.metric) {
        (Warp::Ffd(w), Metric::Ssd | Metric::Ncc) => Some(LocalDifferences::new(w, fixed, problem.metric)),
        _ => None,
    };
    let result: OptimResult = match &local {
        Some(local) => {
            let gradient = |p: &[f64]| local.gradient(moving, p, &problem.options);
            minimize(
                problem.optimizer,
                &WithGradient(objective, gradient),
                &x0,
                &problem.options,
            )?
        }
        None => minimize(problem.optimizer, &objective, &x0, &problem.options)?,
    };
    let warped = warp.apply(moving, &result.x)?;
    let matrix = match problem.transform {
        TransformModel::Rigid => Some(rigid_params_to_matrix(&result.x, &fixed.geometric_centre())?),
        TransformModel::Ffd(_) => None,
    };
    Ok(RegistrationResult {
        params: result.x,
        cost_initial,
        cost_final: result.f,
        iterations: result.iterations,
        converged: result.converged,
        termination: result.termination,
        warped,
        matrix,
        cost_history: result.history,
    })
}

fn minimize<O: Objective>(which: Optimizer, obj: &O, x0: &[f64], opts: &OptimOptions) -> Result<OptimResult> {
    match which {
        Optimizer::Lbfgs => lbfgs_minimize(obj, x0, opts),
        Optimizer::Cg => cg_minimize(obj, x0, opts),
    }
}

/// Central differences of an FFD cost where each perturbed control only
/// re-samples the voxels inside its support. SSD and NCC are functions of
/// running sums, so only the changed terms are recomputed.
struct LocalDifferences<'a> {
    warper: &'a FfdWarper,
    supports: Vec<(usize, Vec<(usize, f64)>)>,
    /// Fixed intensities, centred on their mean for NCC.
    fixed: Vec<f64>,
    sff: f64,
    metric: Metric,
}

#[derive(Clone, Copy, Default)]
struct Sums {
    m: f64,
    mm: f64,
    fm: f64,
    dd: f64,
}

impl<'a> LocalDifferences<'a> {
    fn new(warper: &'a FfdWarper, fixed: &Image, metric: Metric) -> Self {
        let n = fixed.len() as f64;
        let mean = fixed.data().iter().sum::<f64>() / n;
        let centred: Vec<f64> = fixed.data().iter().map(|v| v - mean).collect();
        let sff = centred.iter().map(|v| v * v).sum();
        let fixed = match metric {
            Metric::Ncc => centred,
            _ => fixed.data().to_vec(),
        };
        Self {
            warper,
            supports: warper.supports(),
            fixed,
            sff,
            metric,
        }
    }

    fn term(&self, v: usize, m: f64) -> Sums {
        let f = self.fixed[v];
        Sums {
            m,
            mm: m * m,
            fm: f * m,
            dd: (f - m) * (f - m),
        }
    }

    fn cost(&self, s: &Sums) -> f64 {
        let n = self.fixed.len() as f64;
        match self.metric {
            Metric::Ncc => {
                let smm = s.mm - s.m * s.m / n;
                if !(smm > 0.0) || !(self.sff > 0.0) {
                    return f64::NAN;
                }
                1.0 - s.fm / (self.sff * smm).sqrt()
            }
            _ => s.dd / n,
        }
    }

    fn gradient(&self, moving: &Image, params: &[f64], opts: &OptimOptions) -> Vec<f64> {
        let g = self.warper.reference().geometry();
        let nd = g.ndim();
        let disp = self.warper.displacements(params);
        let base_pos = |v: usize| {
            let mut x = [0.0; MAX_DIMS];
            g.linear0_to_world(v, &mut x[..nd]);
            for k in 0..nd {
                x[k] += disp[v * nd + k];
            }
            x
        };
        let warped = par::map_indices(g.len(), |v| moving.sample(&base_pos(v)[..nd], Interpolation::Linear));
        let mut total = Sums::default();
        for (v, &m) in warped.iter().enumerate() {
            let t = self.term(v, m);
            total.m += t.m;
            total.mm += t.mm;
            total.fm += t.fm;
            total.dd += t.dd;
        }
        par::map_indices(params.len(), |p| {
            let (k, support) = &self.supports[p];
            if support.is_empty() {
                return 0.0;
            }
            let h = fd_step(params[p], opts);
            let shifted = |sign: f64| {
                let mut s = total;
                for &(v, w) in support {
                    let mut x = base_pos(v);
                    x[*k] += sign * h * w;
                    let (old, new) = (
                        self.term(v, warped[v]),
                        self.term(v, moving.sample(&x[..nd], Interpolation::Linear)),
                    );
                    s.m += new.m - old.m;
                    s.mm += new.mm - old.mm;
                    s.fm += new.fm - old.fm;
                    s.dd += new.dd - old.dd;
                }
                self.cost(&s)
            };
            (shifted(1.0) - shifted(-1.0)) / (2.0 * h)
        })
    }
}

/// Voxel-wise `a − b` on `a`'s grid.
pub fn difference_image(a: &Image, b: &Image) -> Result<Image> {
    if !a.geometry().same_grid(b.geometry(), 1e-9) {
        return Err(Error::GeometryMismatch(format!(
            "cannot subtract images on different grids (sizes {:?} and {:?})",
            a.size(),
            b.size()
        )));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x - y).collect();
    a.with_data(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(size: usize) -> Image {
        let mut im = Image::new(&[size, size], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let c = (size as f64 - 1.0) / 2.0;
        let pos = im.all_positions();
        im.set_data(
            pos.iter()
                .map(|p| {
                    let (x, y) = (p[0] - c, p[1] - c);
                    (-(x * x / 40.0 + y * y / 15.0)).exp()
                        + 0.5 * (-((x - 5.0).powi(2) + (y + 4.0).powi(2)) / 8.0).exp()
                })
                .collect(),
        )
        .unwrap();
        im
    }

    #[test]
    fn self_registration_stays_put() {
        let im = blob(32);
        let problem = RegistrationProblem {
            fixed: &im,
            moving: &im,
            transform: TransformModel::Rigid,
            metric: Metric::Ncc,
            optimizer: Optimizer::Lbfgs,
            x0: None,
            options: OptimOptions::default(),
        };
        let r = register(&problem).unwrap();
        assert!(r.params.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-3);
        assert!(r.cost_final <= r.cost_initial);
    }

    #[test]
    fn local_differences_match_full_warps() {
        use crate::optim::fd_gradient;
        use crate::transforms::{ffd_initialize, FfdBounds};
        let fixed = blob(24);
        let moving = fixed
            .with_data(fixed.data().iter().map(|v| v * 0.7 + 0.1).collect())
            .unwrap();
        let opts = OptimOptions::default();
        for (degree, metric, moved) in [(3, Metric::Ssd, true), (3, Metric::Ncc, true), (1, Metric::Ssd, false)] {
            let state = ffd_initialize(&fixed, degree, 1, &[8.0, 8.0], FfdBounds::Image).unwrap();
            let warper = FfdWarper::new(&state, &fixed).unwrap();
            let x: Vec<f64> = (0..state.param_count())
                .map(|i| if moved { ((i * 37 % 11) as f64 - 5.0) * 0.1 } else { 0.0 })
                .collect();
            let local = LocalDifferences::new(&warper, &fixed, metric);
            let full = |p: &[f64]| metric.cost(&fixed, &warper.warp(&moving, p).unwrap()).unwrap();
            let a = local.gradient(&moving, &x, &opts);
            let b = fd_gradient(&full, &x, &opts);
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() <= 1e-7 * (1.0 + v.abs()), "{metric}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn difference() {
        let a = blob(8);
        let b = a.with_data(a.data().iter().map(|v| v - 3.0).collect()).unwrap();
        let d = difference_image(&a, &b).unwrap();
        assert!(d.data().iter().all(|&v| (v - 3.0).abs() < 1e-12));
        let c = Image::new(&[8, 9], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(difference_image(&a, &c), Err(Error::GeometryMismatch(_))));
    }
}
