//! Image and mesh toolkit for medical data: N-dimensional images with
//! physical geometry, triangle meshes, file formats, resampling and filtering,
//! similarity metrics, rigid and free-form transforms, optimizers and
//! registration.
//!
//! Voxel indices in the public API are 1-based and the first dimension varies
//! fastest in memory.

pub mod error;
pub(crate) mod geometry;
pub mod image;
pub mod io;
pub mod mesh;
pub mod par;

pub use error::{Error, Result};
pub use image::{Geometry, Image, Interpolation, Neighbourhood};
pub use mesh::{Association, Attribute, Mesh};
pub mod metrics;
pub mod optim;
pub mod processing;
pub mod registration;
pub mod transforms;
