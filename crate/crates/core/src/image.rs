//! N-dimensional image container with world geometry.
//!
//! Indices in the public API are 1-based and the first dimension varies
//! fastest in [`Image::data`]. A continuous index `c` maps to the world
//! position `origin + orientation · (spacing ⊙ (c − 1))`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported image dimension.
pub const MAX_DIMS: usize = 4;

/// Default cap on voxels handled per chunk by pixel-wise filters.
pub const DEFAULT_MAX_CHUNK_SIZE: usize = 10_000_000;

const ORTHO_TOL: f64 = 1e-9;

// Continuous indices this close outside the extent still sample the edge voxel.
const EDGE_SLACK: f64 = 1e-9;

/// Voxel grid geometry: size, origin, spacing and orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    size: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    /// Row-major `n × n` direction cosines; column `k` is the world direction of axis `k`.
    orientation: Vec<f64>,
    index_to_world: [[f64; MAX_DIMS]; MAX_DIMS],
    world_to_index: [[f64; MAX_DIMS]; MAX_DIMS],
}

impl Geometry {
    /// Builds a geometry, validating the invariants. `orientation` is row-major
    /// and defaults to the identity.
    pub fn new(size: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>, orientation: Option<Vec<f64>>) -> Result<Self> {
        let n = size.len();
        if !(1..=MAX_DIMS).contains(&n) {
            return Err(Error::InvalidGeometry(format!("dimension {n} not in 1..={MAX_DIMS}")));
        }
        if origin.len() != n || spacing.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "size has {n} components, origin {}, spacing {}",
                origin.len(),
                spacing.len()
            )));
        }
        if size.contains(&0) {
            return Err(Error::InvalidGeometry(format!("size {size:?} must be positive")));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidGeometry(format!("spacing {spacing:?} must be positive")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGeometry(format!("origin {origin:?} not finite")));
        }
        let orientation = orientation.unwrap_or_else(|| identity(n));
        if orientation.len() != n * n {
            return Err(Error::InvalidGeometry(format!(
                "orientation has {} entries, expected {}",
                orientation.len(),
                n * n
            )));
        }
        if !is_orthonormal(&orientation, n, ORTHO_TOL) {
            return Err(Error::InvalidGeometry("orientation columns are not orthonormal".into()));
        }
        let mut index_to_world = [[0.0; MAX_DIMS]; MAX_DIMS];
        let mut world_to_index = [[0.0; MAX_DIMS]; MAX_DIMS];
        for r in 0..n {
            for c in 0..n {
                index_to_world[r][c] = orientation[r * n + c] * spacing[c];
                // inverse of R·diag(s) is diag(1/s)·Rᵀ
                world_to_index[r][c] = orientation[c * n + r] / spacing[r];
            }
        }
        Ok(Self {
            size,
            origin,
            spacing,
            orientation,
            index_to_world,
            world_to_index,
        })
    }

    pub fn ndim(&self) -> usize {
        self.size.len()
    }

    pub fn size(&self) -> &[usize] {
        &self.size
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Row-major direction cosine matrix.
    pub fn orientation(&self) -> &[f64] {
        &self.orientation
    }

    /// Number of voxels.
    pub fn len(&self) -> usize {
        self.size.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear-index strides, first dimension fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = Vec::with_capacity(self.ndim());
        let mut acc = 1;
        for &s in &self.size {
            strides.push(acc);
            acc *= s;
        }
        strides
    }

    /// Same voxel grid (size, origin, spacing, orientation) within `tol`.
    pub fn same_grid(&self, other: &Geometry, tol: f64) -> bool {
        self.size == other.size
            && close(&self.origin, &other.origin, tol)
            && close(&self.spacing, &other.spacing, tol)
            && close(&self.orientation, &other.orientation, tol)
    }

    /// World position of a 0-based continuous index, written into `out`.
    #[inline]
    pub(crate) fn index0_to_world(&self, idx: &[f64], out: &mut [f64]) {
        let n = self.ndim();
        for r in 0..n {
            let mut acc = self.origin[r];
            for c in 0..n {
                acc += self.index_to_world[r][c] * idx[c];
            }
            out[r] = acc;
        }
    }

    /// 0-based continuous index of a world position, written into `out`.
    #[inline]
    pub(crate) fn world_to_index0(&self, pos: &[f64], out: &mut [f64]) {
        let n = self.ndim();
        let mut d = [0.0; MAX_DIMS];
        for k in 0..n {
            d[k] = pos[k] - self.origin[k];
        }
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += self.world_to_index[r][c] * d[c];
            }
            out[r] = acc;
        }
    }

    /// World position of the voxel at 0-based linear index `lin`.
    #[inline]
    pub(crate) fn linear0_to_world(&self, lin: usize, out: &mut [f64]) {
        let mut idx = [0.0; MAX_DIMS];
        let mut rem = lin;
        for (k, &s) in self.size.iter().enumerate() {
            idx[k] = (rem % s) as f64;
            rem /= s;
        }
        self.index0_to_world(&idx, out);
    }

    /// World position of a 1-based continuous index.
    pub fn index_to_world(&self, cidx: &[f64]) -> Result<Vec<f64>> {
        self.check_len(cidx.len())?;
        let idx0: Vec<f64> = cidx.iter().map(|c| c - 1.0).collect();
        let mut out = vec![0.0; self.ndim()];
        self.index0_to_world(&idx0, &mut out);
        Ok(out)
    }

    /// 1-based continuous index of a world position.
    pub fn continuous_index(&self, pos: &[f64]) -> Result<Vec<f64>> {
        self.check_len(pos.len())?;
        let mut out = vec![0.0; self.ndim()];
        self.world_to_index0(pos, &mut out);
        out.iter_mut().for_each(|c| *c += 1.0);
        Ok(out)
    }

    /// World position of the grid centre, i.e. of continuous index `(size + 1) / 2`.
    pub fn geometric_centre(&self) -> Vec<f64> {
        let idx0: Vec<f64> = self.size.iter().map(|&s| (s as f64 - 1.0) / 2.0).collect();
        let mut out = vec![0.0; self.ndim()];
        self.index0_to_world(&idx0, &mut out);
        out
    }

    /// Axis-aligned world bounds `[min₁ max₁ … min_N max_N]` of all voxel centres.
    pub fn world_bounds(&self) -> Vec<f64> {
        let n = self.ndim();
        let mut bounds = interleaved_empty_bounds(n);
        let mut pos = [0.0; MAX_DIMS];
        let mut idx = [0.0; MAX_DIMS];
        for corner in 0..(1usize << n) {
            for k in 0..n {
                idx[k] = if corner >> k & 1 == 1 {
                    (self.size[k] - 1) as f64
                } else {
                    0.0
                };
            }
            self.index0_to_world(&idx[..n], &mut pos[..n]);
            extend_bounds(&mut bounds, &pos[..n]);
        }
        bounds
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.ndim() {
            return Err(Error::Shape(format!("expected {} components, got {len}", self.ndim())));
        }
        Ok(())
    }
}

/// Interpolation used when sampling at world positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interpolation {
    #[default]
    Nearest,
    Linear,
}

impl FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nn" | "nearest" => Ok(Interpolation::Nearest),
            "linear" => Ok(Interpolation::Linear),
            other => Err(Error::InvalidArgument(format!(
                "unsupported interpolation mode '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Interpolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interpolation::Nearest => "nearest",
            Interpolation::Linear => "linear",
        })
    }
}

/// Shape of a neighbourhood of relative offsets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Neighbourhood {
    Cube,
    Ball,
}

/// An N-dimensional image of `f64` intensities with world geometry.
#[derive(Clone, Debug)]
pub struct Image {
    geometry: Geometry,
    data: Vec<f64>,
    first_index: Vec<i64>,
    padding_value: f64,
    max_chunk_size: usize,
}

impl Image {
    /// Zero-filled image with identity orientation.
    pub fn new(size: &[usize], origin: &[f64], spacing: &[f64]) -> Result<Self> {
        Self::with_orientation(size, origin, spacing, None)
    }

    /// Zero-filled image with an optional row-major orientation.
    pub fn with_orientation(
        size: &[usize],
        origin: &[f64],
        spacing: &[f64],
        orientation: Option<&[f64]>,
    ) -> Result<Self> {
        let geometry = Geometry::new(
            size.to_vec(),
            origin.to_vec(),
            spacing.to_vec(),
            orientation.map(<[f64]>::to_vec),
        )?;
        Ok(Self::from_geometry(geometry))
    }

    /// Zero-filled image on `geometry`.
    pub fn from_geometry(geometry: Geometry) -> Self {
        let n = geometry.ndim();
        Self {
            data: vec![0.0; geometry.len()],
            geometry,
            first_index: vec![1; n],
            padding_value: 0.0,
            max_chunk_size: DEFAULT_MAX_CHUNK_SIZE,
        }
    }

    /// Image on `geometry` holding `data` (first dimension fastest).
    pub fn from_data(geometry: Geometry, data: Vec<f64>) -> Result<Self> {
        let mut im = Self::from_geometry(geometry);
        im.set_data(data)?;
        Ok(im)
    }

    /// Zero-filled copy of every member of `template` except the intensities.
    pub fn from_template(template: &Image) -> Self {
        Self {
            geometry: template.geometry.clone(),
            data: vec![0.0; template.data.len()],
            first_index: template.first_index.clone(),
            padding_value: template.padding_value,
            max_chunk_size: template.max_chunk_size,
        }
    }

    /// Same members as `self` with new intensities.
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        let mut out = Self::from_template(self);
        out.set_data(data)?;
        Ok(out)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn ndim(&self) -> usize {
        self.geometry.ndim()
    }

    pub fn size(&self) -> &[usize] {
        self.geometry.size()
    }

    pub fn origin(&self) -> &[f64] {
        self.geometry.origin()
    }

    pub fn spacing(&self) -> &[f64] {
        self.geometry.spacing()
    }

    pub fn orientation(&self) -> &[f64] {
        self.geometry.orientation()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn set_data(&mut self, data: Vec<f64>) -> Result<()> {
        if data.len() != self.geometry.len() {
            return Err(Error::Shape(format!(
                "data has {} elements, geometry needs {}",
                data.len(),
                self.geometry.len()
            )));
        }
        self.data = data;
        Ok(())
    }

    /// Index of the first voxel, `(1, …, 1)` unless changed.
    pub fn first_index(&self) -> &[i64] {
        &self.first_index
    }

    pub fn padding_value(&self) -> f64 {
        self.padding_value
    }

    pub fn set_padding_value(&mut self, value: f64) {
        self.padding_value = value;
    }

    pub fn max_chunk_size(&self) -> usize {
        self.max_chunk_size
    }

    pub fn set_max_chunk_size(&mut self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidArgument("max_chunk_size must be positive".into()));
        }
        self.max_chunk_size = n;
        Ok(())
    }

    /// Replaces the origin, keeping everything else.
    pub fn set_origin(&mut self, origin: &[f64]) -> Result<()> {
        let g = &self.geometry;
        self.geometry = Geometry::new(
            g.size.clone(),
            origin.to_vec(),
            g.spacing.clone(),
            Some(g.orientation.clone()),
        )?;
        Ok(())
    }

    /// Minimum and maximum intensity.
    pub fn value_range(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn strides(&self) -> Vec<usize> {
        self.geometry.strides()
    }

    /// World position of one 1-based continuous index.
    pub fn index_to_world(&self, cidx: &[f64]) -> Result<Vec<f64>> {
        self.geometry.index_to_world(cidx)
    }

    /// World positions of several 1-based continuous indices.
    pub fn index_to_world_many(&self, cidx: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        cidx.iter().map(|c| self.index_to_world(c)).collect()
    }

    /// World positions of voxels given by 1-based linear indices.
    pub fn linear_to_world(&self, linear: &[usize]) -> Result<Vec<Vec<f64>>> {
        linear
            .iter()
            .map(|&l| {
                self.check_linear(l)?;
                let mut pos = vec![0.0; self.ndim()];
                self.geometry.linear0_to_world(l - 1, &mut pos);
                Ok(pos)
            })
            .collect()
    }

    /// World positions of every voxel in storage order.
    pub fn all_positions(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|l| {
                let mut pos = vec![0.0; self.ndim()];
                self.geometry.linear0_to_world(l, &mut pos);
                pos
            })
            .collect()
    }

    /// 1-based continuous index of a world position.
    pub fn continuous_index(&self, pos: &[f64]) -> Result<Vec<f64>> {
        self.geometry.continuous_index(pos)
    }

    /// Interpolated intensity at a world position; `padding_value` outside the extent.
    pub fn value_at(&self, pos: &[f64], mode: Interpolation) -> Result<f64> {
        self.geometry.check_len(pos.len())?;
        Ok(self.sample(pos, mode))
    }

    /// Interpolated intensities at several world positions.
    pub fn values_at(&self, pos: &[Vec<f64>], mode: Interpolation) -> Result<Vec<f64>> {
        pos.iter().map(|p| self.value_at(p, mode)).collect()
    }

    /// Unchecked sampling used by the filters; `pos` must have `ndim` components.
    #[inline]
    pub(crate) fn sample(&self, pos: &[f64], mode: Interpolation) -> f64 {
        let mut c = [0.0; MAX_DIMS];
        self.geometry.world_to_index0(pos, &mut c);
        match mode {
            Interpolation::Nearest => self.sample_nearest0(&c),
            Interpolation::Linear => self.sample_linear0(&c),
        }
    }

    #[inline]
    fn sample_nearest0(&self, c: &[f64; MAX_DIMS]) -> f64 {
        let size = self.geometry.size();
        let mut lin = 0;
        let mut stride = 1;
        for (k, &s) in size.iter().enumerate() {
            let ck = c[k];
            let hi = (s - 1) as f64;
            if !(ck >= -EDGE_SLACK && ck <= hi + EDGE_SLACK) {
                return self.padding_value;
            }
            // 1-based indices are positive, so half-away-from-zero rounds .5 up
            let i = ((ck + 0.5).floor()).clamp(0.0, hi) as usize;
            lin += i * stride;
            stride *= s;
        }
        self.data[lin]
    }

    #[inline]
    fn sample_linear0(&self, c: &[f64; MAX_DIMS]) -> f64 {
        let size = self.geometry.size();
        let n = size.len();
        let mut base = [0usize; MAX_DIMS];
        let mut frac = [0.0; MAX_DIMS];
        let mut strides = [0usize; MAX_DIMS];
        let mut stride = 1;
        for k in 0..n {
            let s = size[k];
            let hi = (s - 1) as f64;
            let ck = c[k];
            if !(ck >= -EDGE_SLACK && ck <= hi + EDGE_SLACK) {
                return self.padding_value;
            }
            let ck = ck.clamp(0.0, hi);
            let i0 = ck.floor();
            if i0 >= hi {
                base[k] = s - 1;
                frac[k] = 0.0;
            } else {
                base[k] = i0 as usize;
                frac[k] = ck - i0;
            }
            strides[k] = stride;
            stride *= s;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut lin = 0;
            for k in 0..n {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    lin += (base[k] + 1) * strides[k];
                } else {
                    w *= 1.0 - frac[k];
                    lin += base[k] * strides[k];
                }
                if w == 0.0 {
                    break;
                }
            }
            if w != 0.0 {
                acc += w * self.data[lin];
            }
        }
        acc
    }

    /// Stored intensity at a 1-based voxel index.
    pub fn get_pixel(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.data[self.linear_index(idx)? - 1])
    }

    pub fn set_pixel(&mut self, idx: &[usize], value: f64) -> Result<()> {
        let l = self.linear_index(idx)?;
        self.data[l - 1] = value;
        Ok(())
    }

    /// 1-based linear index of a 1-based N-d index.
    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        self.geometry.check_len(idx.len())?;
        let size = self.size();
        if idx.iter().zip(size).any(|(&i, &s)| i < 1 || i > s) {
            return Err(Error::Index {
                index: idx.iter().map(|&i| i as i64).collect(),
                size: size.to_vec(),
            });
        }
        let mut lin = 0;
        let mut stride = 1;
        for (&i, &s) in idx.iter().zip(size) {
            lin += (i - 1) * stride;
            stride *= s;
        }
        Ok(lin + 1)
    }

    /// 1-based N-d index of a 1-based linear index.
    pub fn nd_index(&self, linear: usize) -> Result<Vec<usize>> {
        self.check_linear(linear)?;
        let mut rem = linear - 1;
        Ok(self
            .size()
            .iter()
            .map(|&s| {
                let i = rem % s;
                rem /= s;
                i + 1
            })
            .collect())
    }

    fn check_linear(&self, linear: usize) -> Result<()> {
        if linear < 1 || linear > self.len() {
            return Err(Error::Index {
                index: vec![linear as i64],
                size: vec![self.len()],
            });
        }
        Ok(())
    }

    /// True if any component of the 1-based index lies outside `[1, size]`.
    pub fn is_out_of_range(&self, idx: &[i64]) -> bool {
        idx.len() != self.ndim() || idx.iter().zip(self.size()).any(|(&i, &s)| i < 1 || i > s as i64)
    }

    pub fn geometric_centre(&self) -> Vec<f64> {
        self.geometry.geometric_centre()
    }

    /// Translates the origin so that the geometric centre lands on zero.
    pub fn set_origin_to_centre(&mut self) {
        let centre = self.geometric_centre();
        let origin: Vec<f64> = self.origin().iter().zip(&centre).map(|(o, c)| o - c).collect();
        self.set_origin(&origin)
            .expect("translated origin keeps a valid geometry");
    }

    /// World bounds `[min₁ max₁ … min_N max_N]` of voxel centres whose value
    /// is strictly greater than `th`.
    pub fn bounds(&self, th: f64) -> Result<Vec<f64>> {
        let n = self.ndim();
        let mut bounds = interleaved_empty_bounds(n);
        let mut pos = [0.0; MAX_DIMS];
        let mut any = false;
        for (l, &v) in self.data.iter().enumerate() {
            if v > th {
                any = true;
                self.geometry.linear0_to_world(l, &mut pos[..n]);
                extend_bounds(&mut bounds, &pos[..n]);
            }
        }
        if !any {
            return Err(Error::EmptyBounds(th));
        }
        Ok(bounds)
    }

    /// The `n`-th (1-based) 3D frame of a 4D image.
    pub fn extract_frame(&self, n: usize) -> Result<Image> {
        if self.ndim() != 4 {
            return Err(Error::InvalidArgument(format!(
                "extract_frame needs a 4D image, got {}D",
                self.ndim()
            )));
        }
        let frames = self.size()[3];
        if n < 1 || n > frames {
            return Err(Error::InvalidArgument(format!("frame {n} outside 1..={frames}")));
        }
        let o = self.orientation();
        let orientation: Vec<f64> = (0..3).flat_map(|r| (0..3).map(move |c| o[r * 4 + c])).collect();
        let geometry = Geometry::new(
            self.size()[..3].to_vec(),
            self.origin()[..3].to_vec(),
            self.spacing()[..3].to_vec(),
            Some(orientation),
        )?;
        let frame_len = geometry.len();
        let start = (n - 1) * frame_len;
        let mut out = Image::from_data(geometry, self.data[start..start + frame_len].to_vec())?;
        out.padding_value = self.padding_value;
        out.max_chunk_size = self.max_chunk_size;
        Ok(out)
    }

    /// Drops the singleton dimension of a 3D image.
    ///
    /// When the remaining 2×2 block of the orientation is orthonormal the
    /// world coordinates are kept as they are. Otherwise (oblique slices) the
    /// 2D world frame is the image's own in-plane axes: the origin becomes its
    /// projection onto those axes and the orientation becomes the identity.
    pub fn force_2d(&self) -> Result<Image> {
        if self.ndim() == 2 {
            return Ok(self.clone());
        }
        if self.ndim() != 3 {
            return Err(Error::InvalidArgument(format!(
                "force_2d needs a 3D image, got {}D",
                self.ndim()
            )));
        }
        let singletons: Vec<usize> = (0..3).filter(|&k| self.size()[k] == 1).collect();
        if singletons.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "force_2d needs exactly one singleton dimension, size is {:?}",
                self.size()
            )));
        }
        let drop = singletons[0];
        let keep: Vec<usize> = (0..3).filter(|&k| k != drop).collect();
        let o = self.orientation();
        let block: Vec<f64> = keep
            .iter()
            .flat_map(|&r| keep.iter().map(move |&c| o[r * 3 + c]))
            .collect();
        let (origin, orientation) = if is_orthonormal(&block, 2, ORTHO_TOL) {
            (keep.iter().map(|&k| self.origin()[k]).collect(), block)
        } else {
            let origin = keep
                .iter()
                .map(|&c| (0..3).map(|r| o[r * 3 + c] * self.origin()[r]).sum())
                .collect();
            (origin, identity(2))
        };
        let geometry = Geometry::new(
            keep.iter().map(|&k| self.size()[k]).collect(),
            origin,
            keep.iter().map(|&k| self.spacing()[k]).collect(),
            Some(orientation),
        )?;
        let mut out = Image::from_data(geometry, self.data.clone())?;
        out.padding_value = self.padding_value;
        out.max_chunk_size = self.max_chunk_size;
        Ok(out)
    }
}

/// Relative offsets of a neighbourhood of half-width `n` in `ndim` dimensions,
/// zero offset included, in lexicographic order (last component fastest).
pub fn neighbourhood_offsets(ndim: usize, n: i64, shape: Neighbourhood) -> Result<Vec<Vec<i64>>> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!(
            "neighbourhood width must be at least 1, got {n}"
        )));
    }
    if ndim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let side = (2 * n + 1) as usize;
    let total = side.pow(ndim as u32);
    let mut out = Vec::with_capacity(total);
    for t in 0..total {
        let mut rem = t;
        let mut off = vec![0i64; ndim];
        for k in (0..ndim).rev() {
            off[k] = (rem % side) as i64 - n;
            rem /= side;
        }
        let keep = match shape {
            Neighbourhood::Cube => true,
            Neighbourhood::Ball => off.iter().map(|o| o * o).sum::<i64>() <= n * n,
        };
        if keep {
            out.push(off);
        }
    }
    Ok(out)
}

pub(crate) fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for k in 0..n {
        m[k * n + k] = 1.0;
    }
    m
}

pub(crate) fn is_orthonormal(m: &[f64], n: usize, tol: f64) -> bool {
    if m.iter().any(|v| !v.is_finite()) {
        return false;
    }
    for a in 0..n {
        for b in 0..n {
            let dot: f64 = (0..n).map(|r| m[r * n + a] * m[r * n + b]).sum();
            let expect = if a == b { 1.0 } else { 0.0 };
            if (dot - expect).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Nearest orthonormal matrix (polar factor) of a row-major `n × n` matrix.
/// Used by readers whose on-disk direction cosines are stored at reduced precision.
/// Matrices that are already orthonormal to 1e-12 are returned unchanged.
pub(crate) fn orthonormalize(m: &[f64], n: usize) -> Result<Vec<f64>> {
    if is_orthonormal(m, n, 1e-12) {
        return Ok(m.to_vec());
    }
    let mat = nalgebra::DMatrix::from_row_slice(n, n, m);
    let svd = mat.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::InvalidGeometry("orientation is not invertible".into())),
    };
    if svd.singular_values.iter().any(|&s| !(s > 1e-6)) {
        return Err(Error::InvalidGeometry("orientation is singular".into()));
    }
    let q = u * v_t;
    Ok((0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| q[(r, c)])
        .collect())
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn interleaved_empty_bounds(n: usize) -> Vec<f64> {
    (0..2 * n)
        .map(|i| if i % 2 == 0 { f64::INFINITY } else { f64::NEG_INFINITY })
        .collect()
}

fn extend_bounds(bounds: &mut [f64], pos: &[f64]) {
    for (k, &p) in pos.iter().enumerate() {
        bounds[2 * k] = bounds[2 * k].min(p);
        bounds[2 * k + 1] = bounds[2 * k + 1].max(p);
    }
}
