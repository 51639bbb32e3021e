use crate::error::{Error, Result};
use crate::image::{Image, Interpolation, MAX_DIMS};
use crate::par;

/// Centred cardinal B-spline of the given degree, supported on
/// `|t| < (degree + 1) / 2`.
pub fn bspline(degree: usize, t: f64) -> f64 {
    let a = t.abs();
    match degree {
        0 => {
            if a < 0.5 {
                1.0
            } else {
                0.0
            }
        }
        1 => (1.0 - a).max(0.0),
        3 => {
            if a < 1.0 {
                (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
            } else if a < 2.0 {
                let b = 2.0 - a;
                b * b * b / 6.0
            } else {
                0.0
            }
        }
        d => {
            let half = (d + 1) as f64 / 2.0;
            if a >= half {
                return 0.0;
            }
            let mut binom = 1.0;
            let mut sum = 0.0;
            for k in 0..=d + 1 {
                let x = t + half - k as f64;
                if x > 0.0 {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sum += sign * binom * x.powi(d as i32);
                }
                binom = binom * (d + 1 - k) as f64 / (k + 1) as f64;
            }
            let fact: f64 = (1..=d).map(|k| k as f64).product();
            sum / fact
        }
    }
}

/// Control grid of one level, axis-aligned in world coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct FfdLevel {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub size: Vec<usize>,
}

impl FfdLevel {
    pub fn control_count(&self) -> usize {
        self.size.iter().product()
    }

    /// World position of a 0-based control index.
    pub fn control_position(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| self.origin[k] + self.spacing[k] * i as f64)
            .collect()
    }
}

/// Region covered by the control grids.
#[derive(Clone, Debug, PartialEq)]
pub enum FfdBounds {
    /// World bounds of the image's voxel centres.
    Image,
    /// Explicit `[min₁ max₁ … min_N max_N]`.
    Explicit(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FfdState {
    pub degree: usize,
    pub bounds: Vec<f64>,
    pub levels: Vec<FfdLevel>,
}

impl FfdState {
    pub fn ndim(&self) -> usize {
        self.bounds.len() / 2
    }

    /// Parameters are ordered level by level; within a level all first
    /// components come first, then all second components, and so on, with
    /// controls in first-dimension-fastest order.
    pub fn param_count(&self) -> usize {
        self.levels.iter().map(|l| l.control_count() * self.ndim()).sum()
    }

    pub fn zero_params(&self) -> Vec<f64> {
        vec![0.0; self.param_count()]
    }

    /// Offset of each level's block in the parameter vector.
    pub fn level_offsets(&self) -> Vec<usize> {
        let n = self.ndim();
        let mut acc = 0;
        self.levels
            .iter()
            .map(|l| {
                let o = acc;
                acc += l.control_count() * n;
                o
            })
            .collect()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::InvalidArgument(format!(
                "FFD expects {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        Ok(())
    }

    /// Calls `f(parameter index of component 0, component stride, weight)` for
    /// every control with a nonzero weight at `x`.
    fn for_each_weight(&self, x: &[f64], mut f: impl FnMut(usize, usize, f64)) {
        let n = self.ndim();
        let half = (self.degree + 1) as f64 / 2.0;
        let offsets = self.level_offsets();
        for (level, &offset) in self.levels.iter().zip(&offsets) {
            let mut lo = [0usize; MAX_DIMS];
            let mut count = [0usize; MAX_DIMS];
            let mut w = [[0.0; 8]; MAX_DIMS];
            let mut empty = false;
            for k in 0..n {
                let t = (x[k] - level.origin[k]) / level.spacing[k];
                let first = (t - half).floor() as i64 + 1;
                let last = (t + half).ceil() as i64 - 1;
                let first = first.max(0);
                let last = last.min(level.size[k] as i64 - 1);
                if first > last {
                    empty = true;
                    break;
                }
                lo[k] = first as usize;
                count[k] = (last - first + 1) as usize;
                for j in 0..count[k] {
                    w[k][j] = bspline(self.degree, t - (first as f64 + j as f64));
                }
            }
            if empty {
                continue;
            }
            let stride = level.control_count();
            let total: usize = count[..n].iter().product();
            for combo in 0..total {
                let mut rem = combo;
                let mut weight = 1.0;
                let mut lin = 0;
                let mut step = 1;
                for k in 0..n {
                    let j = rem % count[k];
                    rem /= count[k];
                    weight *= w[k][j];
                    lin += (lo[k] + j) * step;
                    step *= level.size[k];
                }
                if weight != 0.0 {
                    f(offset + lin, stride, weight);
                }
            }
        }
    }

    /// Displacement at world position `x`.
    pub fn displacement(&self, x: &[f64], params: &[f64]) -> Result<Vec<f64>> {
        let n = self.ndim();
        self.check_params(params)?;
        if x.len() != n {
            return Err(Error::Shape(format!("expected {n} coordinates, got {}", x.len())));
        }
        let mut d = vec![0.0; n];
        self.for_each_weight(x, |base, stride, w| {
            for (k, dk) in d.iter_mut().enumerate() {
                *dk += w * params[base + k * stride];
            }
        });
        Ok(d)
    }

    /// Sum of the B-spline weights of each level at `x` (1 inside the grid).
    pub fn weight_sums(&self, x: &[f64]) -> Vec<f64> {
        let offsets = self.level_offsets();
        let mut sums = vec![0.0; self.levels.len()];
        self.for_each_weight(x, |base, _, w| {
            let level = offsets.iter().rposition(|&o| o <= base).unwrap();
            sums[level] += w;
        });
        sums
    }
}

/// Builds the control grids: level 1 has spacing `grid_spacing`, each further
/// level halves it. Every grid covers the bounds plus `degree` extra controls
/// on each side.
pub fn ffd_initialize(
    image: &Image,
    degree: usize,
    levels: usize,
    grid_spacing: &[f64],
    bounds: FfdBounds,
) -> Result<FfdState> {
    let n = image.ndim();
    if !(1..=7).contains(&degree) {
        return Err(Error::InvalidArgument(format!(
            "B-spline degree must be in 1..=7, got {degree}"
        )));
    }
    if levels < 1 {
        return Err(Error::InvalidArgument("at least one level is required".into()));
    }
    if grid_spacing.len() != n {
        return Err(Error::Shape(format!(
            "grid spacing needs {n} values, got {}",
            grid_spacing.len()
        )));
    }
    if grid_spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "grid spacing must be positive, got {grid_spacing:?}"
        )));
    }
    let bounds = match bounds {
        FfdBounds::Image => image.geometry().world_bounds(),
        FfdBounds::Explicit(b) => {
            if b.len() != 2 * n || (0..n).any(|k| !(b[2 * k] <= b[2 * k + 1])) {
                return Err(Error::InvalidArgument(format!(
                    "FFD bounds must be {} ordered values",
                    2 * n
                )));
            }
            b
        }
    };
    for k in 0..n {
        let extent = bounds[2 * k + 1] - bounds[2 * k];
        if grid_spacing[k] > extent {
            return Err(Error::DegenerateGrid(format!(
                "grid spacing {} exceeds the extent {extent} along axis {}",
                grid_spacing[k],
                k + 1
            )));
        }
    }
    let grids = (0..levels)
        .map(|l| {
            let spacing: Vec<f64> = grid_spacing.iter().map(|s| s / (1u64 << l) as f64).collect();
            let size = (0..n)
                .map(|k| {
                    let extent = bounds[2 * k + 1] - bounds[2 * k];
                    ((extent / spacing[k]) - 1e-9).ceil().max(0.0) as usize + 1 + 2 * degree
                })
                .collect();
            let origin = (0..n).map(|k| bounds[2 * k] - degree as f64 * spacing[k]).collect();
            FfdLevel { origin, spacing, size }
        })
        .collect();
    Ok(FfdState {
        degree,
        bounds,
        levels: grids,
    })
}

/// Precomputed control weights for every voxel of a reference grid, reused
/// across parameter vectors.
pub struct FfdWarper {
    reference: Image,
    param_count: usize,
    starts: Vec<usize>,
    entries: Vec<(u32, u32, f64)>,
}

impl FfdWarper {
    pub fn new(state: &FfdState, reference: &Image) -> Result<Self> {
        let n = state.ndim();
        if reference.ndim() != n {
            return Err(Error::InvalidArgument(format!(
                "FFD is {n}D, reference grid is {}D",
                reference.ndim()
            )));
        }
        let g = reference.geometry();
        let per_voxel = par::map_indices(g.len(), |lin| {
            let mut x = [0.0; MAX_DIMS];
            g.linear0_to_world(lin, &mut x[..n]);
            let mut list = Vec::new();
            state.for_each_weight(&x[..n], |base, stride, w| {
                list.push((base as u32, stride as u32, w));
            });
            list
        });
        let mut starts = Vec::with_capacity(per_voxel.len() + 1);
        let mut entries = Vec::new();
        starts.push(0);
        for list in per_voxel {
            entries.extend(list);
            starts.push(entries.len());
        }
        let mut reference = Image::from_template(reference);
        reference.set_data(vec![0.0; reference.len()])?;
        Ok(Self {
            reference,
            param_count: state.param_count(),
            starts,
            entries,
        })
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn reference(&self) -> &Image {
        &self.reference
    }

    /// Displacement of every reference voxel, voxel-major (`ndim` values each).
    pub fn displacements(&self, params: &[f64]) -> Vec<f64> {
        let n = self.reference.ndim();
        let mut d = vec![0.0; self.reference.len() * n];
        for (v, dv) in d.chunks_exact_mut(n).enumerate() {
            for &(base, stride, w) in &self.entries[self.starts[v]..self.starts[v + 1]] {
                for (k, dk) in dv.iter_mut().enumerate() {
                    *dk += w * params[base as usize + k * stride as usize];
                }
            }
        }
        d
    }

    /// For each parameter: its component, and the voxels it moves with their weights.
    pub fn supports(&self) -> Vec<(usize, Vec<(usize, f64)>)> {
        let n = self.reference.ndim();
        let mut by_base: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.param_count];
        let mut strides = vec![0usize; self.param_count];
        for v in 0..self.reference.len() {
            for &(base, stride, w) in &self.entries[self.starts[v]..self.starts[v + 1]] {
                by_base[base as usize].push((v, w));
                strides[base as usize] = stride as usize;
            }
        }
        let mut out: Vec<(usize, Vec<(usize, f64)>)> = vec![(0, Vec::new()); self.param_count];
        for (base, list) in by_base.into_iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            for k in 0..n {
                out[base + k * strides[base]] = (k, list.clone());
            }
        }
        out
    }

    /// Pull-back warp of `moving` onto the reference grid.
    pub fn warp(&self, moving: &Image, params: &[f64]) -> Result<Image> {
        let n = self.reference.ndim();
        if params.len() != self.param_count {
            return Err(Error::InvalidArgument(format!(
                "FFD expects {} parameters, got {}",
                self.param_count,
                params.len()
            )));
        }
        if moving.ndim() != n {
            return Err(Error::InvalidArgument(format!(
                "moving image is {}D, FFD is {n}D",
                moving.ndim()
            )));
        }
        let g = self.reference.geometry();
        let mut data = vec![0.0; g.len()];
        par::fill_chunked(&mut data, self.reference.max_chunk_size(), |start, out| {
            let mut x = [0.0; MAX_DIMS];
            for (o, v) in out.iter_mut().enumerate() {
                let lin = start + o;
                g.linear0_to_world(lin, &mut x[..n]);
                for &(base, stride, w) in &self.entries[self.starts[lin]..self.starts[lin + 1]] {
                    for (k, xk) in x[..n].iter_mut().enumerate() {
                        *xk += w * params[base as usize + k * stride as usize];
                    }
                }
                *v = moving.sample(&x[..n], Interpolation::Linear);
            }
        });
        let mut out = Image::from_data(g.clone(), data)?;
        out.set_padding_value(moving.padding_value());
        out.set_max_chunk_size(self.reference.max_chunk_size())?;
        Ok(out)
    }
}

/// Warps `moving` by the FFD onto `reference` (the moving grid when absent).
pub fn transform_ffd(moving: &Image, params: &[f64], state: &FfdState, reference: Option<&Image>) -> Result<Image> {
    state.check_params(params)?;
    FfdWarper::new(state, reference.unwrap_or(moving))?.warp(moving, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> Image {
        let mut im = Image::new(&[n, n], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let pos = im.all_positions();
        im.set_data(pos.iter().map(|p| (p[0] * 0.2).sin() + (p[1] * 0.1).cos()).collect())
            .unwrap();
        im
    }

    #[test]
    fn grid_arithmetic() {
        let im = Image::new(&[101, 101], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let st = ffd_initialize(&im, 1, 2, &[10.0, 10.0], FfdBounds::Image).unwrap();
        assert_eq!(st.levels[0].size, vec![13, 13]);
        assert_eq!(st.levels[0].origin, vec![-10.0, -10.0]);
        assert_eq!(st.levels[1].spacing, vec![5.0, 5.0]);
        assert_eq!(st.param_count(), 2 * 13 * 13 + 2 * 23 * 23);
    }

    #[test]
    fn spacing_beyond_extent() {
        let im = Image::new(&[10, 10], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            ffd_initialize(&im, 1, 1, &[20.0, 5.0], FfdBounds::Image),
            Err(Error::DegenerateGrid(_))
        ));
    }

    #[test]
    fn bspline_partition_of_unity() {
        for d in 1..=5 {
            for t in [0.0, 0.13, 0.5, 0.77] {
                let s: f64 = (-5..=5).map(|c| bspline(d, t - c as f64)).sum();
                assert!((s - 1.0).abs() < 1e-12, "degree {d} at {t}: {s}");
            }
        }
        for t in [0.0, 0.4, 1.3, 2.5] {
            let generic = {
                let half = 2.0;
                let mut sum = 0.0;
                let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
                for (k, b) in binom.iter().enumerate() {
                    let x: f64 = t + half - k as f64;
                    if x > 0.0 {
                        sum += if k % 2 == 0 { *b } else { -*b } * x.powi(3);
                    }
                }
                sum / 6.0
            };
            assert!((bspline(3, t) - generic).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_params_identity() {
        let im = square(20);
        let st = ffd_initialize(&im, 3, 1, &[5.0, 5.0], FfdBounds::Image).unwrap();
        let out = transform_ffd(&im, &st.zero_params(), &st, None).unwrap();
        for (a, b) in out.data().iter().zip(im.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_control_displacement() {
        let im = square(31);
        let st = ffd_initialize(&im, 1, 1, &[10.0, 10.0], FfdBounds::Image).unwrap();
        let mut p = st.zero_params();
        let size = &st.levels[0].size;
        let c = 2 + 2 * size[0];
        let ctrl = st.levels[0].control_position(&[2, 2]);
        p[c] = 1.5;
        p[c + st.levels[0].control_count()] = -0.5;
        assert_eq!(st.displacement(&ctrl, &p).unwrap(), vec![1.5, -0.5]);
        let half = [ctrl[0] + 5.0, ctrl[1]];
        assert_eq!(st.displacement(&half, &p).unwrap(), vec![0.75, -0.25]);
        let next = [ctrl[0] + 10.0, ctrl[1]];
        assert_eq!(st.displacement(&next, &p).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn wrong_length() {
        let im = square(20);
        let st = ffd_initialize(&im, 1, 1, &[5.0, 5.0], FfdBounds::Image).unwrap();
        assert!(transform_ffd(&im, &[0.0; 3], &st, None).is_err());
    }
}
