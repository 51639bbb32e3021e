use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// On-disk scalar type of an image payload.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PixelType {
    U8,
    I8,
    U16,
    I16,
    U32,
    I32,
    F32,
    F64,
}

impl PixelType {
    pub const ALL: [PixelType; 8] = [
        PixelType::U8,
        PixelType::I8,
        PixelType::U16,
        PixelType::I16,
        PixelType::U32,
        PixelType::I32,
        PixelType::F32,
        PixelType::F64,
    ];

    pub fn byte_width(self) -> usize {
        match self {
            PixelType::U8 | PixelType::I8 => 1,
            PixelType::U16 | PixelType::I16 => 2,
            PixelType::U32 | PixelType::I32 | PixelType::F32 => 4,
            PixelType::F64 => 8,
        }
    }

    pub fn is_integer(self) -> bool {
        !matches!(self, PixelType::F32 | PixelType::F64)
    }

    /// Representable range for integer types.
    pub fn range(self) -> (f64, f64) {
        match self {
            PixelType::U8 => (0.0, u8::MAX as f64),
            PixelType::I8 => (i8::MIN as f64, i8::MAX as f64),
            PixelType::U16 => (0.0, u16::MAX as f64),
            PixelType::I16 => (i16::MIN as f64, i16::MAX as f64),
            PixelType::U32 => (0.0, u32::MAX as f64),
            PixelType::I32 => (i32::MIN as f64, i32::MAX as f64),
            PixelType::F32 => (f32::MIN as f64, f32::MAX as f64),
            PixelType::F64 => (f64::MIN, f64::MAX),
        }
    }

    /// Value a 64-bit intensity takes once stored with this type: integers are
    /// rounded half away from zero and then clamped, `f32` is rounded to single
    /// precision. NaN becomes 0 for integer types.
    pub fn cast(self, v: f64) -> f64 {
        match self {
            PixelType::F64 => v,
            PixelType::F32 => v as f32 as f64,
            _ => {
                if v.is_nan() {
                    return 0.0;
                }
                let (lo, hi) = self.range();
                v.round().clamp(lo, hi)
            }
        }
    }

    pub fn encode(self, values: &[f64], big_endian: bool) -> Vec<u8> {
        let mut out = Vec::with_capacity(values.len() * self.byte_width());
        macro_rules! put {
            ($t:ty) => {
                for &v in values {
                    let x = self.cast(v) as $t;
                    out.extend_from_slice(&if big_endian {
                        x.to_be_bytes()
                    } else {
                        x.to_le_bytes()
                    });
                }
            };
        }
        match self {
            PixelType::U8 => put!(u8),
            PixelType::I8 => put!(i8),
            PixelType::U16 => put!(u16),
            PixelType::I16 => put!(i16),
            PixelType::U32 => put!(u32),
            PixelType::I32 => put!(i32),
            PixelType::F32 => put!(f32),
            PixelType::F64 => put!(f64),
        }
        out
    }

    /// Decodes exactly `count` values from the start of `bytes`.
    pub fn decode(self, bytes: &[u8], count: usize, big_endian: bool) -> Result<Vec<f64>> {
        let w = self.byte_width();
        let need = count * w;
        if bytes.len() < need {
            return Err(Error::TruncatedData {
                expected: need,
                found: bytes.len(),
            });
        }
        macro_rules! get {
            ($t:ty) => {
                bytes[..need]
                    .chunks_exact(w)
                    .map(|c| {
                        let a: [u8; std::mem::size_of::<$t>()] = c.try_into().unwrap();
                        (if big_endian {
                            <$t>::from_be_bytes(a)
                        } else {
                            <$t>::from_le_bytes(a)
                        }) as f64
                    })
                    .collect()
            };
        }
        Ok(match self {
            PixelType::U8 => get!(u8),
            PixelType::I8 => get!(i8),
            PixelType::U16 => get!(u16),
            PixelType::I16 => get!(i16),
            PixelType::U32 => get!(u32),
            PixelType::I32 => get!(i32),
            PixelType::F32 => get!(f32),
            PixelType::F64 => get!(f64),
        })
    }

    pub fn met_name(self) -> &'static str {
        match self {
            PixelType::U8 => "MET_UCHAR",
            PixelType::I8 => "MET_CHAR",
            PixelType::U16 => "MET_USHORT",
            PixelType::I16 => "MET_SHORT",
            PixelType::U32 => "MET_UINT",
            PixelType::I32 => "MET_INT",
            PixelType::F32 => "MET_FLOAT",
            PixelType::F64 => "MET_DOUBLE",
        }
    }

    pub fn from_met_name(name: &str) -> Result<Self> {
        PixelType::ALL
            .into_iter()
            .find(|t| t.met_name() == name)
            .ok_or_else(|| Error::UnsupportedType(name.to_string()))
    }
}

impl FromStr for PixelType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "uint8" | "uchar" => PixelType::U8,
            "int8" | "char" => PixelType::I8,
            "uint16" | "ushort" => PixelType::U16,
            "int16" | "short" => PixelType::I16,
            "uint32" | "uint" => PixelType::U32,
            "int32" | "int" => PixelType::I32,
            "float32" | "float" | "single" => PixelType::F32,
            "float64" | "double" => PixelType::F64,
            other => return Err(Error::UnsupportedType(other.to_string())),
        })
    }
}

impl fmt::Display for PixelType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PixelType::U8 => "uint8",
            PixelType::I8 => "int8",
            PixelType::U16 => "uint16",
            PixelType::I16 => "int16",
            PixelType::U32 => "uint32",
            PixelType::I32 => "int32",
            PixelType::F32 => "float32",
            PixelType::F64 => "float64",
        })
    }
}
