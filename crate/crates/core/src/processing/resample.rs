use std::borrow::Cow;

use super::convolve::{convolve_separable, gaussian_kernel};
use crate::error::{Error, Result};
use crate::image::{Geometry, Image, Interpolation, MAX_DIMS};
use crate::par;

/// Target grid of a resampling.
#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    /// The grid of another image.
    Reference(Geometry),
    /// New spacing; origin kept, size scaled and rounded.
    Spacing(Vec<f64>),
    /// New spacing and size around the input's geometric centre.
    SpacingAndSize { spacing: Vec<f64>, size: Vec<usize> },
    /// New spacing and size around an explicit world centre.
    SpacingSizeCentre {
        spacing: Vec<f64>,
        size: Vec<usize>,
        centre: Vec<f64>,
    },
}

impl GridSpec {
    /// Builds a spec from the flat option vectors used by the command line:
    /// `spacing` (N values), `spacing_and_size` (2N) or
    /// `spacing_and_size_and_centre` (3N). Exactly one source may be given.
    pub fn from_options(
        ndim: usize,
        reference: Option<&Image>,
        spacing: Option<&[f64]>,
        spacing_and_size: Option<&[f64]>,
        spacing_and_size_and_centre: Option<&[f64]>,
    ) -> Result<Self> {
        let given = reference.is_some() as usize
            + spacing.is_some() as usize
            + spacing_and_size.is_some() as usize
            + spacing_and_size_and_centre.is_some() as usize;
        if given != 1 {
            return Err(Error::InvalidArgument(format!(
                "exactly one grid specification is required, got {given}"
            )));
        }
        let expect = |v: &[f64], parts: usize, what: &str| -> Result<()> {
            if v.len() != parts * ndim {
                return Err(Error::Shape(format!(
                    "'{what}' needs {} values for a {ndim}D image, got {}",
                    parts * ndim,
                    v.len()
                )));
            }
            Ok(())
        };
        if let Some(r) = reference {
            return Ok(Self::Reference(r.geometry().clone()));
        }
        if let Some(s) = spacing {
            expect(s, 1, "spacing")?;
            return Ok(Self::Spacing(s.to_vec()));
        }
        if let Some(v) = spacing_and_size {
            expect(v, 2, "spacing_and_size")?;
            return Ok(Self::SpacingAndSize {
                spacing: v[..ndim].to_vec(),
                size: to_sizes(&v[ndim..])?,
            });
        }
        let v = spacing_and_size_and_centre.unwrap();
        expect(v, 3, "spacing_and_size_and_centre")?;
        Ok(Self::SpacingSizeCentre {
            spacing: v[..ndim].to_vec(),
            size: to_sizes(&v[ndim..2 * ndim])?,
            centre: v[2 * ndim..].to_vec(),
        })
    }

    /// Output geometry for resampling `image`.
    pub fn geometry_for(&self, image: &Image) -> Result<Geometry> {
        let n = image.ndim();
        let check = |s: &[f64]| -> Result<()> {
            if s.len() != n {
                return Err(Error::Shape(format!("spacing needs {n} values, got {}", s.len())));
            }
            if s.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidGeometry(format!("spacing must be positive, got {s:?}")));
            }
            Ok(())
        };
        let orientation = Some(image.orientation().to_vec());
        match self {
            Self::Reference(g) => {
                if g.ndim() != n {
                    return Err(Error::Shape(format!("reference is {}D, image is {n}D", g.ndim())));
                }
                Ok(g.clone())
            }
            Self::Spacing(s) => {
                check(s)?;
                let size = (0..n)
                    .map(|k| ((image.size()[k] as f64 * image.spacing()[k] / s[k]).round() as usize).max(1))
                    .collect();
                Geometry::new(size, image.origin().to_vec(), s.clone(), orientation)
            }
            Self::SpacingAndSize { spacing, size } => {
                check(spacing)?;
                centred(image, spacing, size, &image.geometric_centre())
            }
            Self::SpacingSizeCentre { spacing, size, centre } => {
                check(spacing)?;
                if centre.len() != n {
                    return Err(Error::Shape(format!("centre needs {n} values, got {}", centre.len())));
                }
                centred(image, spacing, size, centre)
            }
        }
    }
}

fn to_sizes(v: &[f64]) -> Result<Vec<usize>> {
    v.iter()
        .map(|&s| {
            if s >= 1.0 && s.fract() == 0.0 && s.is_finite() {
                Ok(s as usize)
            } else {
                Err(Error::InvalidGeometry(format!(
                    "size must be a positive integer, got {s}"
                )))
            }
        })
        .collect()
}

fn centred(image: &Image, spacing: &[f64], size: &[usize], centre: &[f64]) -> Result<Geometry> {
    let n = image.ndim();
    if size.len() != n {
        return Err(Error::Shape(format!("size needs {n} values, got {}", size.len())));
    }
    let o = image.orientation();
    let origin = (0..n)
        .map(|r| {
            centre[r]
                - (0..n)
                    .map(|c| o[r * n + c] * spacing[c] * (size[c] as f64 - 1.0) / 2.0)
                    .sum::<f64>()
        })
        .collect();
    Geometry::new(size.to_vec(), origin, spacing.to_vec(), Some(o.to_vec()))
}

/// Gaussian pre-filter: per-axis half-width `neigh` and `sigma`, both in voxels.
#[derive(Clone, Debug, PartialEq)]
pub struct Blur {
    pub neigh: Vec<usize>,
    pub sigma: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResampleOptions {
    pub interpolation: Interpolation,
    pub blur: Option<Blur>,
}

impl Default for ResampleOptions {
    fn default() -> Self {
        Self {
            interpolation: Interpolation::Linear,
            blur: None,
        }
    }
}

/// Convolves with a normalised truncated Gaussian on the image's own grid.
pub fn blur(image: &Image, params: &Blur) -> Result<Image> {
    let n = image.ndim();
    if params.neigh.len() != n || params.sigma.len() != n {
        return Err(Error::Shape(format!(
            "blur needs {n} half-widths and {n} sigmas, got {} and {}",
            params.neigh.len(),
            params.sigma.len()
        )));
    }
    let kernels = (0..n)
        .map(|k| gaussian_kernel(params.sigma[k], params.neigh[k]))
        .collect::<Result<Vec<_>>>()?;
    convolve_separable(image, &kernels)
}

/// Samples `image` (optionally blurred first) at every voxel centre of the
/// target grid. Voxels outside the input receive its padding value.
pub fn resample(image: &Image, grid: &GridSpec, opts: &ResampleOptions) -> Result<Image> {
    let geometry = grid.geometry_for(image)?;
    let src: Cow<Image> = match &opts.blur {
        Some(b) => Cow::Owned(blur(image, b)?),
        None => Cow::Borrowed(image),
    };
    let n = geometry.ndim();
    let mode = opts.interpolation;
    // voxel centres of the input itself: sampling returns the stored values
    if geometry == *src.geometry() {
        let mut out = Image::from_data(geometry, src.data().to_vec())?;
        out.set_padding_value(image.padding_value());
        out.set_max_chunk_size(image.max_chunk_size())?;
        return Ok(out);
    }
    let mut data = vec![0.0; geometry.len()];
    par::fill_chunked(&mut data, image.max_chunk_size(), |start, out| {
        let mut pos = [0.0; MAX_DIMS];
        for (o, v) in out.iter_mut().enumerate() {
            geometry.linear0_to_world(start + o, &mut pos[..n]);
            *v = src.sample(&pos[..n], mode);
        }
    });
    let mut out = Image::from_data(geometry, data)?;
    out.set_padding_value(image.padding_value());
    out.set_max_chunk_size(image.max_chunk_size())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(size: &[usize], spacing: &[f64]) -> Image {
        let n = size.len();
        let mut im = Image::new(size, &vec![-3.0; n], spacing).unwrap();
        let mut state = 12345u64;
        for v in im.data_mut() {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            *v = (state >> 33) as f64 / (1u64 << 31) as f64;
        }
        im
    }

    #[test]
    fn own_grid_is_identity() {
        let im = noise(&[7, 5, 4], &[0.5, 1.5, 2.0]);
        let out = resample(&im, &GridSpec::Reference(im.geometry().clone()), &Default::default()).unwrap();
        for (a, b) in out.data().iter().zip(im.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        let shifted = Geometry::new(
            im.size().to_vec(),
            vec![-3.0 + 1e-10, -3.0, -3.0],
            im.spacing().to_vec(),
            None,
        )
        .unwrap();
        let out = resample(&im, &GridSpec::Reference(shifted), &Default::default()).unwrap();
        for (a, b) in out.data().iter().zip(im.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn spacing_and_size_listing_values() {
        let im = noise(&[40, 30], &[2.0, 3.0]);
        let spec = GridSpec::from_options(2, None, None, Some(&[1.0, 1.0, 100.0, 100.0]), None).unwrap();
        let out = resample(&im, &spec, &Default::default()).unwrap();
        assert_eq!(out.spacing(), &[1.0, 1.0]);
        assert_eq!(out.size(), &[100, 100]);
        let (a, b) = (out.geometric_centre(), im.geometric_centre());
        assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn centre_form() {
        let im = noise(&[10, 10], &[1.0, 1.0]);
        let spec = GridSpec::from_options(2, None, None, None, Some(&[1.0, 1.0, 100.0, 100.0, 0.0, 0.0])).unwrap();
        let g = spec.geometry_for(&im).unwrap();
        let c = g.geometric_centre();
        assert!(c[0].abs() < 1e-12 && c[1].abs() < 1e-12);
    }

    #[test]
    fn conflicting_specs() {
        let im = noise(&[4, 4], &[1.0, 1.0]);
        assert!(matches!(
            GridSpec::from_options(2, Some(&im), Some(&[1.0, 1.0]), None, None),
            Err(Error::InvalidArgument(_))
        ));
        assert!(GridSpec::from_options(2, None, None, None, None).is_err());
        assert!(matches!(
            GridSpec::Spacing(vec![0.0, 1.0]).geometry_for(&im),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn blur_keeps_constant() {
        let mut im = Image::new(&[20, 15], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        im.data_mut().fill(7.25);
        let opts = ResampleOptions {
            blur: Some(Blur {
                neigh: vec![5, 5],
                sigma: vec![3.0, 3.0],
            }),
            ..Default::default()
        };
        let out = resample(&im, &GridSpec::Reference(im.geometry().clone()), &opts).unwrap();
        assert!(out.data().iter().all(|v| (v - 7.25).abs() < 1e-12));
    }

    #[test]
    fn nearest_downsample_matches_oracle() {
        let im = noise(&[9, 8], &[1.0, 0.5]);
        let opts = ResampleOptions {
            interpolation: Interpolation::Nearest,
            blur: None,
        };
        let out = resample(&im, &GridSpec::Spacing(vec![2.0, 1.0]), &opts).unwrap();
        assert_eq!(out.size(), &[5, 4]);
        for j in 0..4 {
            for i in 0..5 {
                let p = out.index_to_world(&[i as f64 + 1.0, j as f64 + 1.0]).unwrap();
                let c = im.continuous_index(&p).unwrap();
                let idx: Vec<usize> = c.iter().map(|v| (v + 0.5).floor() as usize).collect();
                let expect = if idx[0] >= 1 && idx[0] <= 9 && idx[1] >= 1 && idx[1] <= 8 {
                    im.get_pixel(&idx).unwrap()
                } else {
                    im.padding_value()
                };
                assert_eq!(out.get_pixel(&[i + 1, j + 1]).unwrap(), expect);
            }
        }
    }
}
