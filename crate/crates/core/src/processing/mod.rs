//! Geometric filters: crop, resample with optional blur, oblique reslicing,
//! Gaussian-derivative gradients and mask rasterization.

mod convolve;
mod crop;
mod gradient;
mod rasterize;
mod resample;
mod reslice;

pub use convolve::{convolve_separable, gaussian_kernel};
pub use crop::crop;
pub use gradient::{gradient, gradient_kernel, GradientOptions};
pub use rasterize::{rasterize_ellipse, rasterize_polygon};
pub use resample::{blur, resample, Blur, GridSpec, ResampleOptions};
pub use reslice::{reslice, ResliceOptions, SliceFrame};
