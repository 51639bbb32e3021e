use nalgebra::{DMatrix, DVector};

use super::convolve::{convolve_separable, gaussian_kernel};
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Debug, PartialEq)]
pub struct GradientOptions {
    /// Derivative order, at least 1.
    pub order: usize,
    /// Gaussian sigma per axis in voxels; 1 voxel when absent.
    pub sigma: Option<Vec<f64>>,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self { order: 1, sigma: None }
    }
}

fn half_width(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Correlation kernel of the `order`-th Gaussian derivative on `-half..=half`.
///
/// The kernel is a polynomial of degree `order` times the Gaussian, with
/// coefficients chosen so that its discrete moments are `Σ w(j) jᵐ = m!·δ(m, order)`
/// for `m ≤ order`. It therefore returns exactly 1 on `xᵒʳᵈᵉʳ/order!` and
/// annihilates lower-degree polynomials.
pub fn gradient_kernel(order: usize, sigma: f64, half: usize) -> Result<Vec<f64>> {
    if order < 1 {
        return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    if 2 * half < order {
        return Err(Error::InvalidArgument(format!(
            "a kernel of half-width {half} cannot resolve derivative order {order}"
        )));
    }
    let h = half as i64;
    let s = half.max(1) as f64;
    let js: Vec<f64> = (-h..=h).map(|j| j as f64 / s).collect();
    let g: Vec<f64> = (-h..=h)
        .map(|j| (-((j * j) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let m = order + 1;
    let a = DMatrix::from_fn(m, m, |r, c| {
        js.iter()
            .zip(&g)
            .map(|(x, gv)| x.powi((r + c) as i32) * gv)
            .sum::<f64>()
    });
    let mut rhs = DVector::zeros(m);
    rhs[order] = factorial(order) / s.powi(order as i32);
    let coef = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("singular derivative kernel system".into()))?;
    Ok(js
        .iter()
        .zip(&g)
        .map(|(x, gv)| (0..m).map(|p| coef[p] * x.powi(p as i32)).sum::<f64>() * gv)
        .collect())
}

/// Per-axis derivatives of Gaussian-smoothed intensities, in intensity per
/// world unit to the power `order`. Edge voxels are replicated.
pub fn gradient(image: &Image, opts: &GradientOptions) -> Result<Vec<Image>> {
    let n = image.ndim();
    if opts.order < 1 {
        return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
    }
    let sigma = match &opts.sigma {
        Some(s) if s.len() != n => return Err(Error::Shape(format!("sigma needs {n} values, got {}", s.len()))),
        Some(s) => s.clone(),
        None => vec![1.0; n],
    };
    if let Some(s) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {s}")));
    }
    let smooth = sigma
        .iter()
        .map(|&s| gaussian_kernel(s, half_width(s)))
        .collect::<Result<Vec<_>>>()?;
    (0..n)
        .map(|axis| {
            let mut kernels = smooth.clone();
            kernels[axis] = gradient_kernel(opts.order, sigma[axis], half_width(sigma[axis]))?;
            let mut out = convolve_separable(image, &kernels)?;
            let scale = image.spacing()[axis].powi(opts.order as i32);
            out.data_mut().iter_mut().for_each(|v| *v /= scale);
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(size: &[usize], spacing: &[f64], f: impl Fn(&[f64]) -> f64) -> Image {
        let n = size.len();
        let mut im = Image::new(size, &vec![0.0; n], spacing).unwrap();
        let pos = im.all_positions();
        let data = pos.iter().map(|p| f(p)).collect();
        im.set_data(data).unwrap();
        im
    }

    #[test]
    fn kernel_moments() {
        for order in 1..=3 {
            let k = gradient_kernel(order, 1.5, 5).unwrap();
            for m in 0..=order {
                let mom: f64 = k
                    .iter()
                    .enumerate()
                    .map(|(t, w)| w * (t as f64 - 5.0).powi(m as i32))
                    .sum();
                let want = if m == order { factorial(order) } else { 0.0 };
                assert!((mom - want).abs() < 1e-10, "order {order} moment {m}: {mom}");
            }
        }
    }

    #[test]
    fn constant_has_zero_gradient() {
        let im = filled(&[12, 10], &[1.0, 2.0], |_| 4.5);
        for g in gradient(&im, &Default::default()).unwrap() {
            assert!(g.data().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn ramp_in_mm() {
        let im = filled(&[20, 9], &[0.5, 1.0], |p| p[0]);
        let g = gradient(&im, &Default::default()).unwrap();
        for j in 1..=9 {
            for i in 5..=16 {
                assert!((g[0].get_pixel(&[i, j]).unwrap() - 1.0).abs() < 1e-6);
                assert!(g[1].get_pixel(&[i, j]).unwrap().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn order_zero_rejected() {
        let im = filled(&[4, 4], &[1.0, 1.0], |_| 0.0);
        let opts = GradientOptions { order: 0, sigma: None };
        assert!(matches!(gradient(&im, &opts), Err(Error::InvalidArgument(_))));
    }
}
