//! Rigid and affine warps, and multi-level B-spline free-form deformations.
//! All warps pull back: each output voxel samples the moving image.

mod ffd;
mod rigid;

pub use ffd::{bspline, ffd_initialize, transform_ffd, FfdBounds, FfdLevel, FfdState, FfdWarper};
pub use rigid::{
    embed_matrix4, matrix_to_rigid_params, rigid_param_count, rigid_params_to_matrix, transform_affine, transform_rigid,
};
