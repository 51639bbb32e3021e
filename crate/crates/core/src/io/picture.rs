//! Raster pictures (PNG, JPEG, TIFF, BMP, ...) decoded through the `image` crate.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;

/// Weights applied to R, G, B when reducing colour pictures to one channel.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

pub fn read_picture(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_picture_bytes(&bytes)
}

/// Decodes an in-memory picture. The result is 2D with unit spacing, zero
/// origin and identity orientation; `x` runs along picture columns.
pub fn read_picture_bytes(bytes: &[u8]) -> Result<Image> {
    let decoded = ::image::load_from_memory(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let data: Vec<f64> = if decoded.color().has_color() {
        let rgb = decoded.into_rgb32f();
        rgb.pixels()
            .map(|p| {
                let [r, g, b] = p.0;
                255.0 * (LUMA_WEIGHTS[0] * r as f64 + LUMA_WEIGHTS[1] * g as f64 + LUMA_WEIGHTS[2] * b as f64)
            })
            .collect()
    } else if matches!(decoded.color(), ::image::ColorType::L16 | ::image::ColorType::La16) {
        decoded.into_luma16().pixels().map(|p| p.0[0] as f64).collect()
    } else {
        decoded.into_luma8().pixels().map(|p| p.0[0] as f64).collect()
    };
    let mut im = Image::new(&[w, h], &[0.0, 0.0], &[1.0, 1.0])?;
    im.set_data(data)?;
    Ok(im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ::image::{GrayImage, ImageFormat, Luma, Rgb, RgbImage};
    use std::io::Cursor;

    fn encode(img: ::image::DynamicImage) -> Vec<u8> {
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png).unwrap();
        out.into_inner()
    }

    #[test]
    fn gray_two_by_two() {
        let g = GrayImage::from_fn(2, 2, |x, y| Luma([if (x + y) % 2 == 0 { 0 } else { 255 }]));
        let im = read_picture_bytes(&encode(g.into())).unwrap();
        assert_eq!(im.size(), &[2, 2]);
        assert_eq!(im.spacing(), &[1.0, 1.0]);
        assert_eq!(im.origin(), &[0.0, 0.0]);
        assert_eq!(im.data(), &[0.0, 255.0, 255.0, 0.0]);
    }

    #[test]
    fn rgb_matches_gray() {
        let values = [0u8, 17, 128, 255, 3, 200];
        let g = GrayImage::from_fn(3, 2, |x, y| Luma([values[(y * 3 + x) as usize]]));
        let c = RgbImage::from_fn(3, 2, |x, y| {
            let v = values[(y * 3 + x) as usize];
            Rgb([v, v, v])
        });
        let a = read_picture_bytes(&encode(g.into())).unwrap();
        let b = read_picture_bytes(&encode(c.into())).unwrap();
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-3);
        }
    }

    #[test]
    fn luma_weights() {
        let c = RgbImage::from_fn(1, 1, |_, _| Rgb([255, 0, 0]));
        let im = read_picture_bytes(&encode(c.into())).unwrap();
        assert!((im.data()[0] - 0.299 * 255.0).abs() < 1e-4);
    }

    #[test]
    fn garbage_is_decode_error() {
        assert!(matches!(read_picture_bytes(b"not a picture"), Err(Error::Decode(_))));
    }
}
