use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::image::{Image, Interpolation, MAX_DIMS};
use crate::io::Matrix4;
use crate::par;

const RIGID_TOL: f64 = 1e-6;

/// `(tx, ty, θ)` in 2D, `(tx, ty, tz, rx, ry, rz)` in 3D.
pub fn rigid_param_count(ndim: usize) -> Result<usize> {
    match ndim {
        2 => Ok(3),
        3 => Ok(6),
        n => Err(Error::InvalidArgument(format!(
            "rigid transforms are 2D or 3D, got {n}D"
        ))),
    }
}

fn rotation(params: &[f64], n: usize) -> DMatrix<f64> {
    if n == 2 {
        let (s, c) = params[2].sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
    } else {
        let (sx, cx) = params[3].sin_cos();
        let (sy, cy) = params[4].sin_cos();
        let (sz, cz) = params[5].sin_cos();
        let rx = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, cx, -sx, 0.0, sx, cx]);
        let ry = DMatrix::from_row_slice(3, 3, &[cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy]);
        let rz = DMatrix::from_row_slice(3, 3, &[cz, -sz, 0.0, sz, cz, 0.0, 0.0, 0.0, 1.0]);
        rz * ry * rx
    }
}

/// Homogeneous `(N+1)×(N+1)` matrix of `x ↦ R(x − centre) + centre + t`,
/// with `R = Rz·Ry·Rx` in 3D.
pub fn rigid_params_to_matrix(params: &[f64], centre: &[f64]) -> Result<DMatrix<f64>> {
    let n = centre.len();
    let count = rigid_param_count(n)?;
    if params.len() != count {
        return Err(Error::InvalidArgument(format!(
            "{n}D rigid transforms take {count} parameters, got {}",
            params.len()
        )));
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("rigid parameters must be finite".into()));
    }
    let r = rotation(params, n);
    let c = DVector::from_column_slice(centre);
    let t = DVector::from_column_slice(&params[..n]);
    let b = &c + &t - &r * &c;
    let mut m = DMatrix::identity(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&r);
    m.view_mut((0, n), (n, 1)).copy_from(&b);
    Ok(m)
}

/// Inverse of [`rigid_params_to_matrix`] for angles in `(−π, π)`.
pub fn matrix_to_rigid_params(m: &DMatrix<f64>, centre: &[f64]) -> Result<Vec<f64>> {
    let n = centre.len();
    rigid_param_count(n)?;
    if m.nrows() != n + 1 || m.ncols() != n + 1 {
        return Err(Error::Shape(format!(
            "expected a {0}×{0} matrix, got {1}×{2}",
            n + 1,
            m.nrows(),
            m.ncols()
        )));
    }
    let r = m.view((0, 0), (n, n)).into_owned();
    let err = (r.transpose() * &r - DMatrix::identity(n, n)).abs().max();
    if !(err <= RIGID_TOL) {
        return Err(Error::NotRigid(format!(
            "rotation block deviates from orthonormal by {err:.3e}"
        )));
    }
    if !(r.determinant() > 0.0) {
        return Err(Error::NotRigid("rotation block is a reflection".into()));
    }
    let bottom_ok = (0..n).all(|c| m[(n, c)].abs() <= RIGID_TOL) && (m[(n, n)] - 1.0).abs() <= RIGID_TOL;
    if !bottom_ok {
        return Err(Error::NotRigid("bottom row is not (0, …, 0, 1)".into()));
    }
    let c = DVector::from_column_slice(centre);
    let b = m.view((0, n), (n, 1)).into_owned();
    let t = b - &c + &r * &c;
    let mut params: Vec<f64> = t.iter().copied().collect();
    if n == 2 {
        params.push(r[(1, 0)].atan2(r[(0, 0)]));
    } else {
        let ry = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
        let rx = r[(2, 1)].atan2(r[(2, 2)]);
        let rz = r[(1, 0)].atan2(r[(0, 0)]);
        params.extend([rx, ry, rz]);
    }
    Ok(params)
}

/// A 2D or 3D homogeneous matrix as a 4×4 (2D matrices act on x and y only).
pub fn embed_matrix4(m: &DMatrix<f64>) -> Result<Matrix4> {
    let n = m.nrows() - 1;
    if m.ncols() != m.nrows() || !(n == 2 || n == 3) {
        return Err(Error::Shape(format!(
            "expected a 3×3 or 4×4 matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut out = [[0.0; 4]; 4];
    let map = |k: usize| if k == n { 3 } else { k };
    for r in 0..=n {
        for c in 0..=n {
            out[map(r)][map(c)] = m[(r, c)];
        }
    }
    if n == 2 {
        out[2][2] = 1.0;
    }
    Ok(out)
}

/// Resamples `moving` on the grid of `reference` through the homogeneous
/// matrix `m`: the output at `x` is the moving image at `m⁻¹·x`.
pub fn transform_affine(moving: &Image, m: &DMatrix<f64>, reference: &Image) -> Result<Image> {
    let n = reference.ndim();
    if moving.ndim() != n || m.nrows() != n + 1 || m.ncols() != n + 1 {
        return Err(Error::InvalidArgument(format!(
            "cannot warp a {}D image onto a {n}D grid with a {}×{} matrix",
            moving.ndim(),
            m.nrows(),
            m.ncols()
        )));
    }
    let inv = m
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("transform matrix is singular".into()))?;
    let mut a = [[0.0; MAX_DIMS]; MAX_DIMS];
    let mut b = [0.0; MAX_DIMS];
    for r in 0..n {
        for c in 0..n {
            a[r][c] = inv[(r, c)];
        }
        b[r] = inv[(r, n)];
    }
    let g = reference.geometry();
    let mut data = vec![0.0; g.len()];
    par::fill_chunked(&mut data, reference.max_chunk_size(), |start, out| {
        let mut x = [0.0; MAX_DIMS];
        let mut y = [0.0; MAX_DIMS];
        for (o, v) in out.iter_mut().enumerate() {
            g.linear0_to_world(start + o, &mut x[..n]);
            for r in 0..n {
                y[r] = b[r] + (0..n).map(|c| a[r][c] * x[c]).sum::<f64>();
            }
            *v = moving.sample(&y[..n], Interpolation::Linear);
        }
    });
    let mut out = Image::from_data(g.clone(), data)?;
    out.set_padding_value(moving.padding_value());
    out.set_max_chunk_size(reference.max_chunk_size())?;
    Ok(out)
}

/// Rigid warp about the geometric centre of `reference`.
pub fn transform_rigid(moving: &Image, params: &[f64], reference: &Image) -> Result<Image> {
    if moving.ndim() != reference.ndim() {
        return Err(Error::InvalidArgument(format!(
            "moving image is {}D, reference is {}D",
            moving.ndim(),
            reference.ndim()
        )));
    }
    let m = rigid_params_to_matrix(params, &reference.geometric_centre())?;
    transform_affine(moving, &m, reference)
}
