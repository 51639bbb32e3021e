//! File formats for images, meshes, point sets and matrices.

mod gipl;
mod itk_matrix;
mod mhd;
mod mps;
mod nifti;
mod picture;
mod pixel;
mod stl;
mod vtk;

use std::path::Path;

pub use gipl::{read_gipl, read_gipl_bytes, write_gipl, write_gipl_as, write_gipl_bytes};
pub use itk_matrix::{
    format_itk_matrix, parse_itk_matrix, read_itk_matrix, write_itk_matrix, Matrix4, ITK_MATRIX_HEADER,
};
pub use mhd::{read_mhd, read_mhd_bytes, write_mha_bytes, write_mhd};
pub use mps::{format_mps, parse_mps, read_mps, write_mps, PointSet};
pub use nifti::{read_nifti, read_nifti_bytes};
pub use picture::{read_picture, read_picture_bytes, LUMA_WEIGHTS};
pub use pixel::PixelType;
pub use stl::{read_stl, read_stl_bytes, write_stl, write_stl_bytes, WELD_TOLERANCE};
pub use vtk::{format_vtk_mesh, parse_vtk_mesh, read_vtk_mesh, write_vtk_mesh};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Mhd,
    Gipl,
    Nifti,
    Picture,
}

impl ImageFormat {
    /// Guesses the format from a file name's extension.
    pub fn from_path(path: impl AsRef<Path>) -> Option<Self> {
        let name = path.as_ref().file_name()?.to_str()?.to_ascii_lowercase();
        let ext = name.rsplit('.').next()?;
        Self::from_name(ext)
    }

    /// Accepts a format name or extension (`mhd`, `mha`, `gipl`, `nii`, `png`, ...).
    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim_start_matches('.').to_ascii_lowercase().as_str() {
            "mhd" | "mha" | "metaimage" => Some(Self::Mhd),
            "gipl" => Some(Self::Gipl),
            "nii" | "nifti" => Some(Self::Nifti),
            "png" | "jpg" | "jpeg" | "tif" | "tiff" | "bmp" | "gif" | "pgm" | "ppm" | "picture" => Some(Self::Picture),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Stl,
    Vtk,
}

impl MeshFormat {
    pub fn from_path(path: impl AsRef<Path>) -> Option<Self> {
        let ext = path.as_ref().extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "stl" => Some(Self::Stl),
            "vtk" => Some(Self::Vtk),
            _ => None,
        }
    }
}

fn unknown(path: &Path) -> Error {
    Error::UnsupportedType(format!("no known format for '{}'", path.display()))
}

/// Reads an image, choosing the reader from the extension.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    match ImageFormat::from_path(path).ok_or_else(|| unknown(path))? {
        ImageFormat::Mhd => read_mhd(path),
        ImageFormat::Gipl => read_gipl(path),
        ImageFormat::Nifti => read_nifti(path),
        ImageFormat::Picture => read_picture(path),
    }
}

/// Decodes an image held in memory. MetaImage input must embed its payload.
pub fn read_image_bytes(bytes: &[u8], format: ImageFormat) -> Result<Image> {
    match format {
        ImageFormat::Mhd => read_mhd_bytes(bytes, None),
        ImageFormat::Gipl => read_gipl_bytes(bytes),
        ImageFormat::Nifti => read_nifti_bytes(bytes),
        ImageFormat::Picture => read_picture_bytes(bytes),
    }
}

/// Writes an image as MetaImage or GIPL, chosen from the extension.
pub fn write_image(path: impl AsRef<Path>, image: &Image, element_type: Option<PixelType>) -> Result<()> {
    let path = path.as_ref();
    match ImageFormat::from_path(path) {
        Some(ImageFormat::Mhd) => write_mhd(path, image, element_type),
        Some(ImageFormat::Gipl) => write_gipl_as(path, image, element_type.unwrap_or(PixelType::F64)),
        Some(_) => Err(Error::UnsupportedType(format!(
            "writing '{}' is not supported",
            path.display()
        ))),
        None => Err(unknown(path)),
    }
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    match MeshFormat::from_path(path).ok_or_else(|| unknown(path))? {
        MeshFormat::Stl => read_stl(path),
        MeshFormat::Vtk => read_vtk_mesh(path),
    }
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &Mesh) -> Result<()> {
    let path = path.as_ref();
    match MeshFormat::from_path(path).ok_or_else(|| unknown(path))? {
        MeshFormat::Stl => write_stl(path, mesh),
        MeshFormat::Vtk => write_vtk_mesh(path, mesh),
    }
}
