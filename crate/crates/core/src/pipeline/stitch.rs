use std::time::{Duration, Instant};

use super::model::prepare_frame;
use super::{AlignmentModel, StitchConfig};
use crate::blend::seam_to_weight_mask;
use crate::error::{Error, Result};
use crate::raster::{frame_from_planes, Frame};
use crate::seam::{build_penalty, compute_gradient_cost_rgb, default_lambda, find_seam, update_seam, Seam};

/// Wall time of each per-frame stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FrameTiming {
    pub warp: Duration,
    pub seam: Duration,
    pub blend: Duration,
    pub total: Duration,
}

/// What carries from one frame to the next.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameState {
    pub prev_seam: Option<Seam>,
    pub frame_index: usize,
    pub timing: FrameTiming,
    /// Mean distance of this frame's seam pixels from the previous seam
    /// (same row, across the seam direction); `None` without a previous seam.
    pub seam_displacement: Option<f64>,
    /// Penalty weight used for this frame's seam (0 without a previous seam).
    pub lambda: f64,
}

/// Mean over `next`'s pixels of the across-seam distance to `prev` in the
/// same along-seam position (nearest such position when `prev` misses it).
pub fn seam_displacement(prev: &Seam, next: &Seam) -> f64 {
    let runs = prev.runs();
    if runs.is_empty() || next.path.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &(x, y) in &next.path {
        let (along, across) = match next.orientation {
            crate::seam::SeamOrientation::Vertical => (y, x),
            crate::seam::SeamOrientation::Horizontal => (x, y),
        };
        let k = runs.partition_point(|r| r.0 < along);
        let pick = if k < runs.len() && runs[k].0 == along {
            k
        } else if k == 0 {
            0
        } else if k == runs.len() || along - runs[k - 1].0 <= runs[k].0 - along {
            k - 1
        } else {
            k
        };
        let (_, lo, hi) = runs[pick];
        total += if across < lo {
            (lo - across) as f64
        } else if across > hi {
            (across - hi) as f64
        } else {
            0.0
        };
    }
    total / next.path.len() as f64
}

/// One frame through warp, seam, weight mask and multi-band blend.
pub fn stitch_frame(
    frame_a: &Frame,
    frame_b: &Frame,
    model: &AlignmentModel,
    state: &FrameState,
    config: &StitchConfig,
) -> Result<(Frame, FrameState)> {
    let t0 = Instant::now();
    let a = prepare_frame(frame_a, config);
    let b = prepare_frame(frame_b, config);
    let dims = |f: &Frame| (f.width() as usize, f.height() as usize);
    if dims(&a) != model.size_a || dims(&b) != model.size_b {
        return Err(Error::DimensionMismatch("frame size differs from the alignment model".into()));
    }
    let warped_a = model.map_a.apply(&a);
    let warped_b = model.map_b.apply(&b);
    let t1 = Instant::now();

    let region = &model.region;
    let cost = compute_gradient_cost_rgb(region, &warped_a.planes, &warped_b.planes)?;
    let (seam, lambda) = match &state.prev_seam {
        None => (find_seam(&cost, region)?, 0.0),
        Some(prev) => {
            let lambda = config
                .lambda
                .unwrap_or_else(|| default_lambda(&cost, region) * config.lambda_scale);
            let penalty = build_penalty(prev, region, lambda)?;
            (update_seam(&cost, &penalty, region)?, lambda)
        }
    };
    let t2 = Instant::now();

    let weight = seam_to_weight_mask(&seam, &model.canvas, &warped_a.mask, &warped_b.mask, region.a_first);
    let planes = model.blender.blend(&warped_a, &warped_b, &weight)?;
    let out = frame_from_planes(&planes);
    let t3 = Instant::now();

    let next = FrameState {
        seam_displacement: state.prev_seam.as_ref().map(|p| seam_displacement(p, &seam)),
        prev_seam: Some(seam),
        frame_index: state.frame_index + 1,
        timing: FrameTiming {
            warp: t1 - t0,
            seam: t2 - t1,
            blend: t3 - t2,
            total: t3 - t0,
        },
        lambda,
    };
    Ok((out, next))
}
