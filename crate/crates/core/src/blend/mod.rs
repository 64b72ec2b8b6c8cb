//! Laplacian-pyramid blending of the two warped images across the seam.

mod composite;
mod pyramid;
mod weight;

pub use composite::{Blender, FillMap};
pub use pyramid::{
    binomial_blur, blend_pyramids, blend_with_weight_pyramid, build_gaussian_pyramid, build_laplacian_pyramid,
    collapse_pyramid, default_levels, downsample, max_levels, upsample, Pyramid, PyramidKind, BINOMIAL,
};
pub use weight::{seam_to_weight_mask, WeightMask};
