//! Seam cutting over the overlap: gradient cost, five-direction dynamic
//! programming and the temporal penalty that keeps consecutive seams close.

mod cost;
mod dp;
mod penalty;
mod region;

pub use cost::{compute_gradient_cost, compute_gradient_cost_rgb, CostField};
pub use dp::{accumulate, backtrack, cumulative_cost, find_seam, CumulativeField, Seam, Step};
pub use penalty::{build_penalty, default_lambda, penalized_cumulative, update_seam, PenaltyField};
pub use region::{compute_overlap, compute_overlap_masks, infer_layout, OverlapRegion, Rect, SeamOrientation};
