//! MetaImage (`.mhd` + raw payload, or `.mha` with an embedded payload).
//!
//! `TransformMatrix` lists the direction of each image axis in turn (the
//! columns of the orientation matrix), which is how ITK writes it.

use std::fs;
use std::path::{Path, PathBuf};

use super::PixelType;
use crate::error::{Error, Result};
use crate::image::{orthonormalize, Geometry, Image};

const WHAT: &str = "MetaImage header";

/// Reads a MetaImage header and its payload.
pub fn read_mhd(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_mhd_bytes(&bytes, path.parent())
}

/// Parses a MetaImage held in memory. External payload files are resolved
/// against `base_dir`; with `None` only `ElementDataFile = LOCAL` is accepted.
pub fn read_mhd_bytes(bytes: &[u8], base_dir: Option<&Path>) -> Result<Image> {
    let header = Header::parse(bytes)?;
    let geometry = header.geometry()?;
    let count = geometry.len();
    let width = header.element_type.byte_width();
    let payload: std::borrow::Cow<[u8]> = if header.data_file.eq_ignore_ascii_case("LOCAL") {
        std::borrow::Cow::Borrowed(&bytes[header.local_offset..])
    } else {
        let dir = base_dir.ok_or_else(|| Error::parse(WHAT, "external ElementDataFile needs a base directory"))?;
        if header.data_file.contains('%') || header.data_file.starts_with("LIST") {
            return Err(Error::parse(
                WHAT,
                format!("multi-file ElementDataFile '{}' is not supported", header.data_file),
            ));
        }
        let raw: PathBuf = dir.join(&header.data_file);
        std::borrow::Cow::Owned(fs::read(&raw).map_err(|e| Error::io(raw, e))?)
    };
    let start = match header.header_size {
        Some(-1) => payload.len().saturating_sub(count * width),
        Some(n) if n > 0 => n as usize,
        _ => 0,
    };
    let payload = payload.get(start..).unwrap_or(&[]);
    let data = header.element_type.decode(payload, count, header.big_endian)?;
    Image::from_data(geometry, data)
}

/// Writes `image` as a MetaImage. A `.mha` path embeds the payload; any other
/// path gets a companion `.raw` file next to it. `element_type` defaults to
/// `float64`; narrower types follow [`PixelType::cast`].
pub fn write_mhd(path: impl AsRef<Path>, image: &Image, element_type: Option<PixelType>) -> Result<()> {
    let path = path.as_ref();
    let element_type = element_type.unwrap_or(PixelType::F64);
    let embedded = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mha"));
    let raw_name = if embedded {
        "LOCAL".to_string()
    } else {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::InvalidArgument(format!("bad output path {}", path.display())))?;
        format!("{stem}.raw")
    };
    let mut out = header_text(image, element_type, &raw_name).into_bytes();
    let payload = element_type.encode(image.data(), false);
    if embedded {
        out.extend_from_slice(&payload);
    } else {
        let raw = path.with_file_name(&raw_name);
        fs::write(&raw, &payload).map_err(|e| Error::io(raw, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Encodes `image` as a single `.mha` byte stream.
pub fn write_mha_bytes(image: &Image, element_type: Option<PixelType>) -> Vec<u8> {
    let element_type = element_type.unwrap_or(PixelType::F64);
    let mut out = header_text(image, element_type, "LOCAL").into_bytes();
    out.extend_from_slice(&element_type.encode(image.data(), false));
    out
}

fn header_text(image: &Image, element_type: PixelType, data_file: &str) -> String {
    let n = image.ndim();
    let o = image.orientation();
    let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
    let matrix = join(&mut (0..n).flat_map(|c| (0..n).map(move |r| o[r * n + c].to_string())));
    format!(
        "ObjectType = Image\n\
         NDims = {n}\n\
         BinaryData = True\n\
         BinaryDataByteOrderMSB = False\n\
         CompressedData = False\n\
         TransformMatrix = {matrix}\n\
         Offset = {}\n\
         ElementSpacing = {}\n\
         DimSize = {}\n\
         ElementType = {}\n\
         ElementDataFile = {data_file}\n",
        join(&mut image.origin().iter().map(f64::to_string)),
        join(&mut image.spacing().iter().map(f64::to_string)),
        join(&mut image.size().iter().map(usize::to_string)),
        element_type.met_name(),
    )
}

#[derive(Debug)]
struct Header {
    ndims: usize,
    dim_size: Vec<usize>,
    spacing: Option<Vec<f64>>,
    offset: Option<Vec<f64>>,
    transform: Option<Vec<f64>>,
    element_type: PixelType,
    big_endian: bool,
    header_size: Option<i64>,
    data_file: String,
    local_offset: usize,
}

impl Header {
    fn parse(bytes: &[u8]) -> Result<Self> {
        let mut ndims = None;
        let mut dim_size = None;
        let mut spacing = None;
        let mut offset = None;
        let mut transform = None;
        let mut element_type = None;
        let mut big_endian = false;
        let mut header_size = None;
        let mut data_file = None;
        let mut pos = 0;
        while pos < bytes.len() {
            let end = bytes[pos..]
                .iter()
                .position(|&b| b == b'\n')
                .map_or(bytes.len(), |i| pos + i);
            let line_bytes = &bytes[pos..end];
            pos = (end + 1).min(bytes.len());
            let line = std::str::from_utf8(line_bytes)
                .map_err(|_| Error::parse(WHAT, "header is not text"))?
                .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(WHAT, format!("expected 'Key = Value', got '{line}'")))?;
            let key = key.trim();
            let value = value.trim();
            match key.to_ascii_lowercase().as_str() {
                "objecttype" => {
                    if !value.eq_ignore_ascii_case("image") {
                        return Err(Error::parse(WHAT, format!("ObjectType '{value}' is not Image")));
                    }
                }
                "ndims" => ndims = Some(parse_one::<usize>(key, value)?),
                "dimsize" => dim_size = Some(parse_list::<usize>(key, value)?),
                "elementspacing" => spacing = Some(parse_list::<f64>(key, value)?),
                "offset" | "origin" | "position" => offset = Some(parse_list::<f64>(key, value)?),
                "transformmatrix" | "orientation" | "rotation" => transform = Some(parse_list::<f64>(key, value)?),
                "elementtype" => element_type = Some(PixelType::from_met_name(value)?),
                "elementbyteordermsb" | "binarydatabyteordermsb" => big_endian = parse_bool(key, value)?,
                "compresseddata" => {
                    if parse_bool(key, value)? {
                        return Err(Error::parse(WHAT, "compressed payloads are not supported"));
                    }
                }
                "elementnumberofchannels" => {
                    if parse_one::<usize>(key, value)? != 1 {
                        return Err(Error::UnsupportedType(format!("{value}-channel elements")));
                    }
                }
                "headersize" => header_size = Some(parse_one::<i64>(key, value)?),
                "elementdatafile" => {
                    data_file = Some(value.to_string());
                    break;
                }
                _ => {}
            }
        }
        let missing = |k: &str| Error::parse(WHAT, format!("missing key {k}"));
        let ndims = ndims.ok_or_else(|| missing("NDims"))?;
        let dim_size = dim_size.ok_or_else(|| missing("DimSize"))?;
        let element_type = element_type.ok_or_else(|| missing("ElementType"))?;
        let data_file = data_file.ok_or_else(|| missing("ElementDataFile"))?;
        let check = |k: &str, len: usize, want: usize| -> Result<()> {
            if len != want {
                return Err(Error::parse(WHAT, format!("{k} has {len} values, expected {want}")));
            }
            Ok(())
        };
        check("DimSize", dim_size.len(), ndims)?;
        if let Some(s) = &spacing {
            check("ElementSpacing", s.len(), ndims)?;
        }
        if let Some(o) = &offset {
            check("Offset", o.len(), ndims)?;
        }
        if let Some(t) = &transform {
            check("TransformMatrix", t.len(), ndims * ndims)?;
        }
        Ok(Self {
            ndims,
            dim_size,
            spacing,
            offset,
            transform,
            element_type,
            big_endian,
            header_size,
            data_file,
            local_offset: pos,
        })
    }

    fn geometry(&self) -> Result<Geometry> {
        let n = self.ndims;
        let orientation = match &self.transform {
            Some(t) => {
                let row_major: Vec<f64> = (0..n).flat_map(|r| (0..n).map(move |c| t[c * n + r])).collect();
                Some(orthonormalize(&row_major, n)?)
            }
            None => None,
        };
        Geometry::new(
            self.dim_size.clone(),
            self.offset.clone().unwrap_or_else(|| vec![0.0; n]),
            self.spacing.clone().unwrap_or_else(|| vec![1.0; n]),
            orientation,
        )
    }
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(WHAT, format!("bad value for {key}: '{value}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split_whitespace().map(|v| parse_one(key, v)).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::parse(WHAT, format!("bad boolean for {key}: '{value}'"))),
    }
}
