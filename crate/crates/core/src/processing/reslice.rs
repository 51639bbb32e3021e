use crate::error::{Error, Result};
use crate::geometry::{add, cross, dot, frame_from_normal, normalize, scale, sub, to_vec3, Vec3};
use crate::image::{Geometry, Image, Interpolation, MAX_DIMS};
use crate::par;

const FRAME_TOL: f64 = 1e-9;

/// Slicing plane as a 4×4 homogeneous matrix: columns 1 and 2 are the
/// in-plane axes, column 3 the normal and column 4 a point on the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceFrame {
    matrix: [[f64; 4]; 4],
}

impl SliceFrame {
    /// Validates a row-major 4×4 matrix.
    pub fn new(matrix: [[f64; 4]; 4]) -> Result<Self> {
        if matrix[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::InvalidArgument(format!(
                "frame bottom row must be (0, 0, 0, 1), got {:?}",
                matrix[3]
            )));
        }
        let col = |c: usize| [matrix[0][c], matrix[1][c], matrix[2][c]];
        for a in 0..3 {
            for b in a..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                let d = dot(col(a), col(b));
                if !((d - want).abs() <= FRAME_TOL) {
                    return Err(Error::InvalidArgument(format!(
                        "frame axes are not orthonormal (column {} · column {} = {d})",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        if matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("frame has non-finite entries".into()));
        }
        Ok(Self { matrix })
    }

    fn from_axes(u: Vec3, v: Vec3, n: Vec3, point: Vec3) -> Self {
        let mut matrix = [[0.0; 4]; 4];
        for r in 0..3 {
            matrix[r] = [u[r], v[r], n[r], point[r]];
        }
        matrix[3] = [0.0, 0.0, 0.0, 1.0];
        Self { matrix }
    }

    /// Plane through `point` with the given normal; the in-plane axes follow
    /// the deterministic rule shared with the mesh sources.
    pub fn from_plane(normal: &[f64], point: &[f64]) -> Result<Self> {
        let (u, v, n) = frame_from_normal(to_vec3(normal, "normal")?)?;
        Ok(Self::from_axes(u, v, n, to_vec3(point, "point")?))
    }

    /// Frame from approximately orthonormal axes: the normal is normalised,
    /// `u` is made orthogonal to it and `v = n × u`.
    pub fn orthogonalized(u: &[f64], normal: &[f64], point: &[f64]) -> Result<Self> {
        let n = normalize(to_vec3(normal, "normal")?, "normal")?;
        let u0 = to_vec3(u, "in-plane axis")?;
        let u = normalize(sub(u0, scale(n, dot(u0, n))), "in-plane axis")?;
        Ok(Self::from_axes(u, cross(n, u), n, to_vec3(point, "point")?))
    }

    /// Identity axes through `point`.
    pub fn axial(point: &[f64]) -> Result<Self> {
        Ok(Self::from_axes(
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            to_vec3(point, "point")?,
        ))
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        self.matrix
    }

    fn col(&self, c: usize) -> Vec3 {
        [self.matrix[0][c], self.matrix[1][c], self.matrix[2][c]]
    }

    pub fn u(&self) -> [f64; 3] {
        self.col(0)
    }

    pub fn v(&self) -> [f64; 3] {
        self.col(1)
    }

    pub fn normal(&self) -> [f64; 3] {
        self.col(2)
    }

    pub fn point(&self) -> [f64; 3] {
        self.col(3)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResliceOptions {
    /// In-plane spacing; the smallest volume spacing when absent.
    pub spacing: Option<[f64; 2]>,
    /// Number of samples averaged along the normal (odd).
    pub thickness: usize,
    pub interpolation: Interpolation,
}

impl Default for ResliceOptions {
    fn default() -> Self {
        Self {
            spacing: None,
            thickness: 1,
            interpolation: Interpolation::Linear,
        }
    }
}

/// Samples a 3D volume on a plane. Returns the slice as a `(w, h, 1)` volume
/// oriented along the frame and as a 2D image.
pub fn reslice(volume: &Image, frame: &SliceFrame, opts: &ResliceOptions) -> Result<(Image, Image)> {
    if volume.ndim() != 3 {
        return Err(Error::InvalidArgument(format!(
            "reslice needs a 3D volume, got {}D",
            volume.ndim()
        )));
    }
    if opts.thickness == 0 || opts.thickness.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "thickness must be odd and positive, got {}",
            opts.thickness
        )));
    }
    let min_spacing = volume.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
    let [su, sv] = opts.spacing.unwrap_or([min_spacing, min_spacing]);
    if !(su > 0.0 && sv > 0.0 && su.is_finite() && sv.is_finite()) {
        return Err(Error::InvalidGeometry(format!(
            "slice spacing must be positive, got ({su}, {sv})"
        )));
    }
    let (u, v, n, p) = (frame.u(), frame.v(), frame.normal(), frame.point());

    // project the voxel-centre corners of the volume onto the plane axes
    let (mut umin, mut umax, mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let size = volume.size();
    let mut corner = [0.0; 3];
    for c in 0..8 {
        let idx: Vec<f64> = (0..3)
            .map(|k| if c >> k & 1 == 1 { (size[k] - 1) as f64 } else { 0.0 })
            .collect();
        volume.geometry().index0_to_world(&idx, &mut corner);
        let d = sub(corner, p);
        umin = umin.min(dot(d, u));
        umax = umax.max(dot(d, u));
        vmin = vmin.min(dot(d, v));
        vmax = vmax.max(dot(d, v));
    }
    let snap = |x: f64| (x + 1e-9).floor();
    let w = snap((umax - umin) / su) as usize + 1;
    let h = snap((vmax - vmin) / sv) as usize + 1;
    let origin = add(p, add(scale(u, umin), scale(v, vmin)));
    let depth_step = su.min(sv);
    let orientation = vec![u[0], v[0], n[0], u[1], v[1], n[1], u[2], v[2], n[2]];
    let geometry = Geometry::new(
        vec![w, h, 1],
        origin.to_vec(),
        vec![su, sv, depth_step],
        Some(orientation),
    )?;

    let k = opts.thickness as i64;
    let offsets: Vec<Vec3> = (0..k)
        .map(|t| scale(n, (t - (k - 1) / 2) as f64 * depth_step))
        .collect();
    let mode = opts.interpolation;
    let mut data = vec![0.0; geometry.len()];
    par::fill_chunked(&mut data, volume.max_chunk_size(), |start, out| {
        let mut pos = [0.0; MAX_DIMS];
        for (o, val) in out.iter_mut().enumerate() {
            geometry.linear0_to_world(start + o, &mut pos[..3]);
            let base = [pos[0], pos[1], pos[2]];
            let sum: f64 = offsets.iter().map(|off| volume.sample(&add(base, *off), mode)).sum();
            *val = sum / offsets.len() as f64;
        }
    });
    let mut slice = Image::from_data(geometry, data)?;
    slice.set_padding_value(volume.padding_value());
    slice.set_max_chunk_size(volume.max_chunk_size())?;
    let slice2d = slice.force_2d()?;
    Ok((slice, slice2d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn volume() -> Image {
        let mut im = Image::new(&[6, 5, 7], &[-2.0, 1.0, 3.0], &[1.0, 1.0, 2.0]).unwrap();
        let len = im.len();
        im.set_data((0..len).map(|v| (v * 7 % 31) as f64).collect()).unwrap();
        im
    }

    #[test]
    fn axial_plane_through_centre() {
        let im = volume();
        let frame = SliceFrame::axial(&im.geometric_centre()).unwrap();
        let (s3, s2) = reslice(&im, &frame, &Default::default()).unwrap();
        assert_eq!(s3.size(), &[6, 5, 1]);
        assert_eq!(s2.size(), &[6, 5]);
        for j in 1..=5 {
            for i in 1..=6 {
                let a = s2.get_pixel(&[i, j]).unwrap();
                let b = im.get_pixel(&[i, j, 4]).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_form_matches_identity_frame() {
        let im = volume();
        let a = SliceFrame::from_plane(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]).unwrap();
        let b = SliceFrame::new([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(a, b);
        let (x, _) = reslice(&im, &a, &Default::default()).unwrap();
        let (y, _) = reslice(&im, &b, &Default::default()).unwrap();
        assert_eq!(x.data(), y.data());
    }

    #[test]
    fn thick_slab_of_constant() {
        let mut im = volume();
        im.data_mut().fill(3.5);
        let frame = SliceFrame::from_plane(&[0.3, -0.2, 1.0], &im.geometric_centre()).unwrap();
        let opts = ResliceOptions {
            thickness: 3,
            ..Default::default()
        };
        let (_, s2) = reslice(&im, &frame, &opts).unwrap();
        let centre = s2.get_pixel(&[s2.size()[0] / 2 + 1, s2.size()[1] / 2 + 1]).unwrap();
        assert!((centre - 3.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SliceFrame::from_plane(&[0.0, 0.0, 0.0], &[0.0; 3]).is_err());
        let mut m = SliceFrame::axial(&[0.0; 3]).unwrap().matrix();
        m[0][1] = 0.1;
        assert!(SliceFrame::new(m).is_err());
        let im = volume();
        let frame = SliceFrame::axial(&[0.0; 3]).unwrap();
        let opts = ResliceOptions {
            thickness: 2,
            ..Default::default()
        };
        assert!(reslice(&im, &frame, &opts).is_err());
    }
}
