use crate::error::{Error, Result};
use crate::image::Image;
use crate::par;

/// Normalised Gaussian of standard deviation `sigma` (voxels) sampled at
/// `-half..=half`. A zero `sigma` gives the identity kernel.
pub fn gaussian_kernel(sigma: f64, half: usize) -> Result<Vec<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be finite and >= 0, got {sigma}"
        )));
    }
    let h = half as i64;
    let mut k: Vec<f64> = (-h..=h)
        .map(|j| {
            if sigma == 0.0 {
                if j == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-(j * j) as f64 / (2.0 * sigma * sigma)).exp()
            }
        })
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    Ok(k)
}

/// Correlates the image with one odd-length kernel per axis, replicating edge
/// voxels outside the grid. `kernels[k]` is centred on its middle element.
pub fn convolve_separable(image: &Image, kernels: &[Vec<f64>]) -> Result<Image> {
    if kernels.len() != image.ndim() {
        return Err(Error::Shape(format!(
            "{} kernels for a {}D image",
            kernels.len(),
            image.ndim()
        )));
    }
    if let Some(k) = kernels.iter().find(|k| k.len() % 2 == 0) {
        return Err(Error::InvalidArgument(format!("kernel length {} is not odd", k.len())));
    }
    let size = image.size().to_vec();
    let strides = image.strides();
    let mut current = image.data().to_vec();
    let mut next = vec![0.0; current.len()];
    for (axis, kernel) in kernels.iter().enumerate() {
        if kernel.len() == 1 && kernel[0] == 1.0 {
            continue;
        }
        let half = (kernel.len() / 2) as i64;
        let (n, stride) = (size[axis] as i64, strides[axis]);
        let src = &current;
        par::fill_chunked(&mut next, image.max_chunk_size(), |start, out| {
            for (o, v) in out.iter_mut().enumerate() {
                let lin = start + o;
                let i = ((lin / stride) % n as usize) as i64;
                let row = lin - i as usize * stride;
                let mut acc = 0.0;
                for (t, w) in kernel.iter().enumerate() {
                    if *w == 0.0 {
                        continue;
                    }
                    let j = (i + t as i64 - half).clamp(0, n - 1) as usize;
                    acc += w * src[row + j * stride];
                }
                *v = acc;
            }
        });
        std::mem::swap(&mut current, &mut next);
    }
    image.with_data(current)
}
