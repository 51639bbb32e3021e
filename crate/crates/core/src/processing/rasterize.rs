use crate::error::{Error, Result};
use crate::image::{Image, MAX_DIMS};
use crate::par;

fn mask_from(slice: &Image, inside: impl Fn(f64, f64) -> bool + Sync) -> Result<Image> {
    if slice.ndim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "rasterization needs a 2D slice, got {}D",
            slice.ndim()
        )));
    }
    let g = slice.geometry();
    let mut data = vec![0.0; g.len()];
    par::fill_chunked(&mut data, slice.max_chunk_size(), |start, out| {
        let mut pos = [0.0; MAX_DIMS];
        for (o, v) in out.iter_mut().enumerate() {
            g.linear0_to_world(start + o, &mut pos[..2]);
            *v = if inside(pos[0], pos[1]) { 1.0 } else { 0.0 };
        }
    });
    let mut mask = Image::from_data(g.clone(), data)?;
    mask.set_max_chunk_size(slice.max_chunk_size())?;
    Ok(mask)
}

/// Binary mask of voxel centres inside a polygon (even-odd rule). Vertices
/// are world coordinates of the slice.
pub fn rasterize_polygon(slice: &Image, vertices: &[[f64; 2]]) -> Result<Image> {
    if vertices.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    mask_from(slice, |x, y| {
        let mut inside = false;
        let mut j = vertices.len() - 1;
        for i in 0..vertices.len() {
            let ([xi, yi], [xj, yj]) = (vertices[i], vertices[j]);
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    })
}

/// Binary mask of voxel centres inside an ellipse with semi-axes `radii`,
/// rotated by `angle` radians counter-clockwise.
pub fn rasterize_ellipse(slice: &Image, center: [f64; 2], radii: [f64; 2], angle: f64) -> Result<Image> {
    if !(radii[0] > 0.0 && radii[1] > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ellipse radii must be positive, got {radii:?}"
        )));
    }
    let (s, c) = angle.sin_cos();
    mask_from(slice, |x, y| {
        let (dx, dy) = (x - center[0], y - center[1]);
        let a = (c * dx + s * dy) / radii[0];
        let b = (-s * dx + c * dy) / radii[1];
        a * a + b * b <= 1.0
    })
}
