//! Keypoint detection and matching, multi-hypothesis generation and
//! conditional-sampling inlier selection.

mod detect;
mod hypotheses;
mod matcher;
mod select;

pub use detect::{detect_and_describe, CornerDetector, FeatureDetector, Keypoint, DESCRIPTOR_LEN};
pub use hypotheses::{
    conditional_inlier_probability, generate_hypotheses, rank_hypotheses, Hypothesis, HypothesisSet,
    ResidualTable, SelectionMode, SelectionParams,
};
pub use matcher::{match_descriptors, Match, MatchSet};
pub use select::{select_inlier_indices, select_inliers};

use crate::error::Result;
use crate::geometry::Correspondence;

/// Hypothesize, rank and select in one call.
pub fn robust_inliers(
    matches: &[Correspondence],
    params: &SelectionParams,
    seed: u64,
) -> Result<Vec<Correspondence>> {
    let hyps = generate_hypotheses(matches, params, seed)?;
    let table = rank_hypotheses(matches, &hyps);
    select_inliers(matches, &table, &hyps, params)
}
