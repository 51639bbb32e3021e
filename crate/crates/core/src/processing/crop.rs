use crate::error::{Error, Result};
use crate::image::{Geometry, Image, MAX_DIMS};

const SLACK: f64 = 1e-9;

/// Keeps the smallest index box holding every voxel whose centre lies inside
/// the world box `[min₁ max₁ … min_N max_N]` (boundaries inclusive).
pub fn crop(image: &Image, bounds: &[f64]) -> Result<Image> {
    let n = image.ndim();
    if bounds.len() != 2 * n {
        return Err(Error::Shape(format!(
            "crop bounds need {} values for a {n}D image, got {}",
            2 * n,
            bounds.len()
        )));
    }
    for k in 0..n {
        let (lo, hi) = (bounds[2 * k], bounds[2 * k + 1]);
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "crop bounds for axis {} are not ordered: [{lo}, {hi}]",
                k + 1
            )));
        }
    }
    let size = image.size();
    let mut first = [usize::MAX; MAX_DIMS];
    let mut last = [0usize; MAX_DIMS];
    let mut pos = [0.0; MAX_DIMS];
    let mut any = false;
    for lin in 0..image.len() {
        image.geometry().linear0_to_world(lin, &mut pos[..n]);
        let inside = (0..n).all(|k| {
            let tol = SLACK * (1.0 + pos[k].abs());
            pos[k] >= bounds[2 * k] - tol && pos[k] <= bounds[2 * k + 1] + tol
        });
        if inside {
            any = true;
            let mut rem = lin;
            for k in 0..n {
                let i = rem % size[k];
                rem /= size[k];
                first[k] = first[k].min(i);
                last[k] = last[k].max(i);
            }
        }
    }
    if !any {
        return Err(Error::EmptyCrop);
    }
    sub_image(image, &first[..n], &last[..n])
}

/// Copies the 0-based inclusive index box `first..=last`.
pub(crate) fn sub_image(image: &Image, first: &[usize], last: &[usize]) -> Result<Image> {
    let n = image.ndim();
    let new_size: Vec<usize> = (0..n).map(|k| last[k] - first[k] + 1).collect();
    let idx0: Vec<f64> = first.iter().map(|&i| i as f64).collect();
    let mut origin = vec![0.0; n];
    image.geometry().index0_to_world(&idx0, &mut origin);
    let geometry = Geometry::new(
        new_size.clone(),
        origin,
        image.spacing().to_vec(),
        Some(image.orientation().to_vec()),
    )?;
    let strides = image.strides();
    let total = geometry.len();
    let mut data = Vec::with_capacity(total);
    let src = image.data();
    for lin in 0..total {
        let mut rem = lin;
        let mut at = 0;
        for k in 0..n {
            at += (first[k] + rem % new_size[k]) * strides[k];
            rem /= new_size[k];
        }
        data.push(src[at]);
    }
    let mut out = Image::from_data(geometry, data)?;
    out.set_padding_value(image.padding_value());
    out.set_max_chunk_size(image.max_chunk_size())?;
    Ok(out)
}
