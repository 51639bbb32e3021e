//! GIPL: 256-byte big-endian header followed by a big-endian payload.
//!
//! Header layout (byte offsets): dims `u16×4` @0, type `u16` @8, pixel sizes
//! `f32×4` @10, description @26, matrix `f32×20` @106, orientation flag @186,
//! min/max `f64×2` @188, origin `f64×4` @204, unused floats @236, magic `u32` @252.
//! The orientation is kept in the first 16 matrix floats as a row-major 4×4
//! block; readers that ignore the field (ITK writes zeros) see identity.

use std::fs;
use std::path::Path;

use super::PixelType;
use crate::error::{Error, Result};
use crate::image::{identity, orthonormalize, Geometry, Image};

pub const GIPL_MAGIC: u32 = 719_555_000;
pub const GIPL_MAGIC_EXT: u32 = 4_026_526_128;
const HEADER_LEN: usize = 256;

fn type_code(t: PixelType) -> u16 {
    match t {
        PixelType::I8 => 7,
        PixelType::U8 => 8,
        PixelType::I16 => 15,
        PixelType::U16 => 16,
        PixelType::U32 => 31,
        PixelType::I32 => 32,
        PixelType::F32 => 64,
        PixelType::F64 => 65,
    }
}

fn pixel_type(code: u16) -> Result<PixelType> {
    PixelType::ALL
        .into_iter()
        .find(|&t| type_code(t) == code)
        .ok_or_else(|| Error::UnsupportedType(format!("GIPL type code {code}")))
}

pub fn read_gipl(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_gipl_bytes(&bytes)
}

pub fn read_gipl_bytes(bytes: &[u8]) -> Result<Image> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedData {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let u16_at = |o: usize| u16::from_be_bytes([bytes[o], bytes[o + 1]]);
    let f32_at = |o: usize| f32::from_be_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let f64_at = |o: usize| f64::from_be_bytes(bytes[o..o + 8].try_into().unwrap());
    let magic = u32::from_be_bytes(bytes[252..256].try_into().unwrap());
    if magic != GIPL_MAGIC && magic != GIPL_MAGIC_EXT {
        return Err(Error::NotGipl(magic));
    }
    let dims: Vec<usize> = (0..4).map(|k| u16_at(2 * k) as usize).collect();
    if dims.contains(&0) {
        return Err(Error::parse("GIPL header", format!("zero dimension in {dims:?}")));
    }
    let ndim = dims.iter().rposition(|&d| d > 1).map_or(1, |k| k + 1).max(2);
    let ptype = pixel_type(u16_at(8))?;
    let spacing: Vec<f64> = (0..ndim)
        .map(|k| {
            let s = f32_at(10 + 4 * k);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let origin: Vec<f64> = (0..ndim).map(|k| f64_at(204 + 8 * k)).collect();
    let matrix: Vec<f64> = (0..16).map(|k| f32_at(106 + 4 * k)).collect();
    let orientation = if matrix.iter().all(|&v| v == 0.0) {
        identity(ndim)
    } else {
        let block: Vec<f64> = (0..ndim)
            .flat_map(|r| (0..ndim).map(move |c| (r, c)))
            .map(|(r, c)| matrix[r * 4 + c])
            .collect();
        orthonormalize(&block, ndim)?
    };
    let geometry = Geometry::new(dims[..ndim].to_vec(), origin, spacing, Some(orientation))?;
    let data = ptype.decode(&bytes[HEADER_LEN..], geometry.len(), true)?;
    Image::from_data(geometry, data)
}

/// Writes `image` as `float64`.
pub fn write_gipl(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    write_gipl_as(path, image, PixelType::F64)
}

pub fn write_gipl_as(path: impl AsRef<Path>, image: &Image, ptype: PixelType) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_gipl_bytes(image, ptype)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_gipl_bytes(image: &Image, ptype: PixelType) -> Result<Vec<u8>> {
    let n = image.ndim();
    if n > 4 {
        return Err(Error::InvalidArgument(format!("GIPL holds at most 4D, got {n}D")));
    }
    let mut h = vec![0u8; HEADER_LEN];
    for k in 0..4 {
        let d = if k < n { image.size()[k] } else { 1 };
        let d = u16::try_from(d).map_err(|_| Error::InvalidArgument(format!("dimension {d} exceeds GIPL limit")))?;
        h[2 * k..2 * k + 2].copy_from_slice(&d.to_be_bytes());
    }
    h[8..10].copy_from_slice(&type_code(ptype).to_be_bytes());
    for k in 0..4 {
        let s = if k < n { image.spacing()[k] as f32 } else { 1.0 };
        h[10 + 4 * k..14 + 4 * k].copy_from_slice(&s.to_be_bytes());
    }
    let o = image.orientation();
    for r in 0..4 {
        for c in 0..4 {
            let v = if r < n && c < n {
                o[r * n + c]
            } else if r == c {
                1.0
            } else {
                0.0
            };
            let at = 106 + 4 * (r * 4 + c);
            h[at..at + 4].copy_from_slice(&(v as f32).to_be_bytes());
        }
    }
    let (lo, hi) = image.value_range();
    h[188..196].copy_from_slice(&lo.to_be_bytes());
    h[196..204].copy_from_slice(&hi.to_be_bytes());
    for k in 0..n {
        h[204 + 8 * k..212 + 8 * k].copy_from_slice(&image.origin()[k].to_be_bytes());
    }
    h[252..256].copy_from_slice(&GIPL_MAGIC_EXT.to_be_bytes());
    h.extend_from_slice(&ptype.encode(image.data(), true));
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_magic() {
        let im = Image::new(&[2, 2], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let mut bytes = write_gipl_bytes(&im, PixelType::U8).unwrap();
        bytes[252] ^= 0xff;
        assert!(matches!(read_gipl_bytes(&bytes), Err(Error::NotGipl(_))));
    }

    #[test]
    fn bad_type_code() {
        let im = Image::new(&[2, 2], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let mut bytes = write_gipl_bytes(&im, PixelType::U8).unwrap();
        bytes[8..10].copy_from_slice(&193u16.to_be_bytes());
        assert!(matches!(read_gipl_bytes(&bytes), Err(Error::UnsupportedType(_))));
    }

    #[test]
    fn short_payload() {
        let im = Image::new(&[4, 4], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let bytes = write_gipl_bytes(&im, PixelType::I16).unwrap();
        assert!(matches!(
            read_gipl_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::TruncatedData { .. })
        ));
    }
}
