use std::io::Cursor;

use image::{ImageBuffer, ImageFormat, Rgb};
use medkit_core::processing::{reslice, ResliceOptions, SliceFrame};
use medkit_core::transforms::transform_rigid;
use medkit_core::{Image, Interpolation};
use serde::Deserialize;

use crate::error::{ApiError, ApiResult};
use crate::store::{Entry, Store};

/// Everything that determines a rendered slice. Sent as JSON in the `spec`
/// query parameter.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSpec {
    /// 4×4 slice frame, column-major.
    pub frame: Option<Vec<f64>>,
    /// Plane form, used when `frame` is absent.
    pub normal: Option<[f64; 3]>,
    pub point: Option<[f64; 3]>,
    /// 1-based frame of a 4D image.
    pub frame_index: Option<usize>,
    pub window: Option<f64>,
    pub level: Option<f64>,
    pub colormap: Option<Colormap>,
    /// In-plane spacing of the slice grid.
    pub spacing: Option<[f64; 2]>,
    pub thickness: Option<usize>,
    pub interpolation: Option<String>,
    pub overlay: Option<Overlay>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overlay {
    pub id: String,
    pub colormap: Option<Colormap>,
    #[serde(default = "half")]
    pub opacity: f64,
    /// Rigid parameters applied to the overlay about the base image centre.
    pub pose: Option<Vec<f64>>,
    pub window: Option<f64>,
    pub level: Option<f64>,
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colormap {
    Gray,
    Hot,
}

impl Colormap {
    fn from_name(name: &str) -> Colormap {
        if name.eq_ignore_ascii_case("hot") {
            Colormap::Hot
        } else {
            Colormap::Gray
        }
    }

    /// RGB in `[0, 255]` for a normalised intensity.
    pub fn rgb(self, t: f64) -> [f64; 3] {
        match self {
            Colormap::Gray => [t * 255.0; 3],
            Colormap::Hot => [
                (3.0 * t).clamp(0.0, 1.0) * 255.0,
                (3.0 * t - 1.0).clamp(0.0, 1.0) * 255.0,
                (3.0 * t - 2.0).clamp(0.0, 1.0) * 255.0,
            ],
        }
    }
}

impl RenderSpec {
    pub fn parse(text: Option<&str>) -> ApiResult<Self> {
        match text {
            None => Ok(Self::default()),
            Some(t) if t.trim().is_empty() => Ok(Self::default()),
            Some(t) => serde_json::from_str(t).map_err(|e| ApiError::bad_request(format!("invalid spec: {e}"))),
        }
    }

    fn reslice_options(&self) -> ApiResult<ResliceOptions> {
        let interpolation = match &self.interpolation {
            Some(name) => name.parse::<Interpolation>()?,
            None => Interpolation::Linear,
        };
        Ok(ResliceOptions {
            spacing: self.spacing,
            thickness: self.thickness.unwrap_or(1),
            interpolation,
        })
    }
}

/// Normalised intensity `clamp((v − (level − window/2)) / window, 0, 1)`.
pub fn window_level(v: f64, window: f64, level: f64) -> f64 {
    let t = (v - (level - window / 2.0)) / window;
    if t.is_nan() {
        0.0
    } else {
        t.clamp(0.0, 1.0)
    }
}

/// The volume a spec addresses: 2D and 3D images as stored, 4D images at
/// `frame_index`.
pub fn volume_of(image: &Image, spec: &RenderSpec) -> ApiResult<Image> {
    match image.ndim() {
        2 | 3 => Ok(image.clone()),
        4 => Ok(image.extract_frame(spec.frame_index.unwrap_or(1))?),
        n => Err(ApiError::bad_request(format!("cannot display a {n}D image"))),
    }
}

/// The slice frame used for a 3D volume: an explicit frame is
/// re-orthonormalised from its first and third columns, a plane form follows
/// the shared frame rule, and the default is the axial plane through the
/// volume centre.
pub fn frame_for(volume: &Image, spec: &RenderSpec) -> ApiResult<SliceFrame> {
    if let Some(f) = &spec.frame {
        if f.len() != 16 {
            return Err(ApiError::bad_request(format!("frame needs 16 values, got {}", f.len())));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(ApiError::bad_request("frame has non-finite entries"));
        }
        let m = |r: usize, c: usize| f[c * 4 + r];
        if [m(3, 0), m(3, 1), m(3, 2), m(3, 3)] != [0.0, 0.0, 0.0, 1.0] {
            return Err(ApiError::bad_request("frame bottom row must be (0, 0, 0, 1)"));
        }
        let col = |c: usize| [m(0, c), m(1, c), m(2, c)];
        return SliceFrame::orthogonalized(&col(0), &col(2), &col(3)).map_err(|e| ApiError::bad_request(e.to_string()));
    }
    let centre = volume.geometric_centre();
    let frame = match (spec.normal, spec.point) {
        (Some(n), p) => SliceFrame::from_plane(&n, &p.map(|p| p.to_vec()).unwrap_or(centre)),
        (None, Some(p)) => SliceFrame::axial(&p),
        (None, None) => SliceFrame::axial(&centre),
    };
    frame.map_err(|e| ApiError::bad_request(e.to_string()))
}

/// A rendered slice: samples on a 2D grid plus the matching 3D geometry.
pub struct Slice {
    /// The slice as a `(w, h, 1)` volume in world space; `None` for 2D images.
    pub volume: Option<Image>,
    pub plane: Image,
}

pub fn slice_of(volume: &Image, spec: &RenderSpec) -> ApiResult<Slice> {
    if volume.ndim() == 2 {
        return Ok(Slice {
            volume: None,
            plane: volume.clone(),
        });
    }
    let frame = frame_for(volume, spec)?;
    let (s3, s2) = reslice(volume, &frame, &spec.reslice_options()?)?;
    Ok(Slice {
        volume: Some(s3),
        plane: s2,
    })
}

fn colorize(out: &mut [f64], plane: &Image, window: f64, level: f64, cmap: Colormap, alpha: f64) {
    for (px, &v) in out.chunks_exact_mut(3).zip(plane.data()) {
        let rgb = cmap.rgb(window_level(v, window, level));
        for c in 0..3 {
            px[c] = (1.0 - alpha) * px[c] + alpha * rgb[c];
        }
    }
}

fn check_window(window: f64, level: f64) -> ApiResult<()> {
    if !(window > 0.0 && window.is_finite() && level.is_finite()) {
        return Err(ApiError::bad_request(format!(
            "window must be positive and level finite, got {window} and {level}"
        )));
    }
    Ok(())
}

pub struct Rendered {
    pub png: Vec<u8>,
    pub size: [usize; 2],
    pub spacing: [f64; 2],
    pub origin: Vec<f64>,
}

/// Reslices, maps through window/level and the colormap, blends the overlay
/// and encodes an 8-bit RGB PNG. Pixel `(x, y)` is voxel `(x + 1, y + 1)` of
/// the slice.
pub fn render(entry: &Entry, spec: &RenderSpec, store: &Store) -> ApiResult<Rendered> {
    let volume = volume_of(&entry.image, spec)?;
    let slice = slice_of(&volume, spec)?;
    let plane = &slice.plane;
    let (w, h) = (plane.size()[0], plane.size()[1]);

    let window = spec.window.unwrap_or(entry.window);
    let level = spec.level.unwrap_or(entry.level);
    check_window(window, level)?;
    let cmap = spec.colormap.unwrap_or_else(|| Colormap::from_name(&entry.colormap));
    let mut rgb = vec![0.0; 3 * w * h];
    colorize(&mut rgb, plane, window, level, cmap, 1.0);

    if let Some(ov) = &spec.overlay {
        if !(0.0..=1.0).contains(&ov.opacity) {
            return Err(ApiError::bad_request(format!(
                "overlay opacity must be in [0, 1], got {}",
                ov.opacity
            )));
        }
        let other = store.get(&ov.id)?;
        let ov_volume = volume_of(&other.image, spec)?;
        if ov_volume.ndim() != volume.ndim() {
            return Err(ApiError::unprocessable(format!(
                "overlay is {}D, base image is {}D",
                ov_volume.ndim(),
                volume.ndim()
            )));
        }
        let pose = match &ov.pose {
            Some(p) => p.clone(),
            None => vec![0.0; if volume.ndim() == 2 { 3 } else { 6 }],
        };
        let warped = transform_rigid(&ov_volume, &pose, &volume)?;
        let ov_plane = slice_of(&warped, spec)?.plane;
        let ow = ov.window.unwrap_or(other.window);
        let ol = ov.level.unwrap_or(other.level);
        check_window(ow, ol)?;
        let ocmap = ov.colormap.unwrap_or(Colormap::Hot);
        colorize(&mut rgb, &ov_plane, ow, ol, ocmap, ov.opacity);
    }

    let bytes: Vec<u8> = rgb.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    let buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::from_raw(w as u32, h as u32, bytes).expect("buffer matches slice size");
    let mut png = Vec::new();
    buf.write_to(&mut Cursor::new(&mut png), ImageFormat::Png)
        .map_err(|e| ApiError::new(axum::http::StatusCode::INTERNAL_SERVER_ERROR, "encode", e.to_string()))?;
    let origin = match &slice.volume {
        Some(s3) => s3.origin().to_vec(),
        None => plane.origin().to_vec(),
    };
    Ok(Rendered {
        png,
        size: [w, h],
        spacing: [plane.spacing()[0], plane.spacing()[1]],
        origin,
    })
}
