//! NIfTI-1 single-file (`.nii`) reader.
//!
//! The affine is taken from `srow_*` when `sform_code > 0`, otherwise from the
//! quaternion when `qform_code > 0`, otherwise from `pixdim` alone. World
//! coordinates are used as stored (no RAS to LPS flip).

use std::fs;
use std::path::Path;

use super::PixelType;
use crate::error::{Error, Result};
use crate::image::{orthonormalize, Geometry, Image};

const HEADER_LEN: usize = 348;

pub fn read_nifti(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_nifti_bytes(&bytes)
}

pub fn read_nifti_bytes(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(&[0x1f, 0x8b]) {
        return Err(Error::NotNifti("compressed files are not supported".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedData {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let big_endian = match (
        i32::from_le_bytes(bytes[0..4].try_into().unwrap()),
        i32::from_be_bytes(bytes[0..4].try_into().unwrap()),
    ) {
        (348, _) => false,
        (_, 348) => true,
        _ => return Err(Error::NotNifti("sizeof_hdr is not 348".into())),
    };
    let magic = &bytes[344..348];
    if magic != b"n+1\0" {
        return Err(Error::NotNifti(format!(
            "magic {:?} is not \"n+1\"",
            String::from_utf8_lossy(&magic[..3])
        )));
    }
    let h = Reader { bytes, big_endian };
    let dim: Vec<i16> = (0..8).map(|k| h.i16(40 + 2 * k)).collect();
    let ndim = dim[0];
    if !(2..=4).contains(&ndim) {
        return Err(Error::NotNifti(format!("dim[0] = {ndim} not in 2..=4")));
    }
    let n = ndim as usize;
    if dim[1..=n].iter().any(|&d| d < 1) {
        return Err(Error::NotNifti(format!("bad dimensions {:?}", &dim[1..=n])));
    }
    let size: Vec<usize> = dim[1..=n].iter().map(|&d| d as usize).collect();
    let ptype = match h.i16(70) {
        2 => PixelType::U8,
        4 => PixelType::I16,
        8 => PixelType::I32,
        16 => PixelType::F32,
        64 => PixelType::F64,
        256 => PixelType::I8,
        512 => PixelType::U16,
        768 => PixelType::U32,
        other => return Err(Error::UnsupportedType(format!("NIfTI datatype {other}"))),
    };
    let pixdim: Vec<f64> = (0..8).map(|k| h.f32(76 + 4 * k)).collect();
    let vox_offset = h.f32(108);
    let slope = h.f32(112);
    let inter = h.f32(116);
    let qform_code = h.i16(252);
    let sform_code = h.i16(254);

    // spatial affine: columns are the world steps of axes i, j, k
    let mut linear = [[0.0; 3]; 3];
    let mut offset = [0.0; 3];
    let positive = |v: f64| if v > 0.0 { v } else { 1.0 };
    if sform_code > 0 {
        for r in 0..3 {
            for c in 0..3 {
                linear[r][c] = h.f32(280 + 16 * r + 4 * c);
            }
            offset[r] = h.f32(280 + 16 * r + 12);
        }
    } else if qform_code > 0 {
        let (b, c, d) = (h.f32(256), h.f32(260), h.f32(264));
        let a = (1.0 - (b * b + c * c + d * d)).max(0.0).sqrt();
        let rot = [
            [
                a * a + b * b - c * c - d * d,
                2.0 * (b * c - a * d),
                2.0 * (b * d + a * c),
            ],
            [
                2.0 * (b * c + a * d),
                a * a + c * c - b * b - d * d,
                2.0 * (c * d - a * b),
            ],
            [
                2.0 * (b * d - a * c),
                2.0 * (c * d + a * b),
                a * a + d * d - c * c - b * b,
            ],
        ];
        let qfac = if pixdim[0] < 0.0 { -1.0 } else { 1.0 };
        let steps = [positive(pixdim[1]), positive(pixdim[2]), positive(pixdim[3]) * qfac];
        for r in 0..3 {
            for col in 0..3 {
                linear[r][col] = rot[r][col] * steps[col];
            }
        }
        offset = [h.f32(268), h.f32(272), h.f32(276)];
    } else {
        for k in 0..3 {
            linear[k][k] = positive(pixdim[k + 1]);
        }
    }

    let sp = n.min(3);
    let mut spacing = vec![0.0; n];
    let mut orientation = vec![0.0; n * n];
    for c in 0..sp {
        let norm = (0..sp).map(|r| linear[r][c].powi(2)).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidGeometry(format!("NIfTI affine column {c} is zero")));
        }
        spacing[c] = norm;
        for r in 0..sp {
            orientation[r * n + c] = linear[r][c] / norm;
        }
    }
    let mut origin = vec![0.0; n];
    origin[..sp].copy_from_slice(&offset[..sp]);
    if n == 4 {
        spacing[3] = positive(pixdim[4]);
        orientation[15] = 1.0;
    }
    let orientation = orthonormalize(&orientation, n)?;
    let geometry = Geometry::new(size, origin, spacing, Some(orientation))?;

    let start = if vox_offset >= HEADER_LEN as f64 {
        vox_offset as usize
    } else {
        352
    };
    let payload = bytes.get(start..).unwrap_or(&[]);
    let mut data = ptype.decode(payload, geometry.len(), big_endian)?;
    if slope != 0.0 && slope.is_finite() {
        let inter = if inter.is_finite() { inter } else { 0.0 };
        data.iter_mut().for_each(|v| *v = *v * slope + inter);
    }
    Image::from_data(geometry, data)
}

struct Reader<'a> {
    bytes: &'a [u8],
    big_endian: bool,
}

impl Reader<'_> {
    fn i16(&self, o: usize) -> i16 {
        let a = [self.bytes[o], self.bytes[o + 1]];
        if self.big_endian {
            i16::from_be_bytes(a)
        } else {
            i16::from_le_bytes(a)
        }
    }

    fn f32(&self, o: usize) -> f64 {
        let a: [u8; 4] = self.bytes[o..o + 4].try_into().unwrap();
        (if self.big_endian {
            f32::from_be_bytes(a)
        } else {
            f32::from_le_bytes(a)
        }) as f64
    }
}
