use super::dp::{accumulate, seam_from_grid};
use super::{CostField, OverlapRegion, Seam};
use crate::error::{Error, Result};
use crate::raster::Plane;

/// Temporal penalty `D` on the region's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyField {
    pub d: Plane,
    pub lambda: f64,
}

impl PenaltyField {
    pub fn zeros(region: &OverlapRegion) -> Self {
        let (w, h) = region.grid_dims();
        PenaltyField {
            d: Plane::new(w, h),
            lambda: 0.0,
        }
    }
}

/// Default penalty weight: mean cost over the overlap divided by the
/// overlap width across the seam.
pub fn default_lambda(cost: &CostField, region: &OverlapRegion) -> f64 {
    let (w, _) = region.grid_dims();
    cost.mean_finite() / w.max(1) as f64
}

/// `D = lambda * |j - j_prev|` per grid row. Rows the previous seam does not
/// reach borrow the nearest row it does (the upper one on ties).
pub fn build_penalty(prev: &Seam, region: &OverlapRegion, lambda: f64) -> Result<PenaltyField> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda must be finite and nonnegative"));
    }
    let (w, h) = region.grid_dims();
    let mut on_seam = vec![false; w * h];
    let mut row_hit = vec![false; h];
    for &(x, y) in &prev.path {
        if let Some((c, r)) = region.to_grid(x, y) {
            on_seam[r * w + c] = true;
            row_hit[r] = true;
        }
    }
    let mut d = Plane::new(w, h);
    if lambda == 0.0 || !row_hit.iter().any(|&b| b) {
        return Ok(PenaltyField { d, lambda });
    }

    let hit_rows: Vec<usize> = (0..h).filter(|&r| row_hit[r]).collect();
    let mut dist = vec![0usize; w];
    for r in 0..h {
        let src = if row_hit[r] {
            r
        } else {
            *hit_rows
                .iter()
                .min_by_key(|&&s| (s.abs_diff(r), s))
                .expect("at least one row hit")
        };
        let marks = &on_seam[src * w..(src + 1) * w];
        let mut last: Option<usize> = None;
        for j in 0..w {
            if marks[j] {
                last = Some(j);
            }
            dist[j] = last.map_or(usize::MAX, |l| j - l);
        }
        let mut next: Option<usize> = None;
        for j in (0..w).rev() {
            if marks[j] {
                next = Some(j);
            }
            if let Some(n) = next {
                dist[j] = dist[j].min(n - j);
            }
        }
        for j in 0..w {
            d.set(j, r, lambda * dist[j] as f64);
        }
    }
    Ok(PenaltyField { d, lambda })
}

fn penalized(cost: &CostField, penalty: &PenaltyField, region: &OverlapRegion) -> Result<Plane> {
    let dims = region.grid_dims();
    if cost.dims() != dims || penalty.d.dims() != dims {
        return Err(Error::DimensionMismatch("cost and penalty fields differ in shape".into()));
    }
    let mut e = cost.e.clone();
    for (v, d) in e.data.iter_mut().zip(&penalty.d.data) {
        *v += d;
    }
    Ok(e)
}

/// Seam search on `e + D`, the temporally constrained cost.
pub fn update_seam(cost: &CostField, penalty: &PenaltyField, region: &OverlapRegion) -> Result<Seam> {
    let e = penalized(cost, penalty, region)?;
    seam_from_grid(region, &e)
}

/// `C + D` with `C` accumulated from the unpenalized cost: the literal form
/// of the final cost matrix, kept for diagnostics next to the per-pixel form
/// that [`update_seam`] searches.
pub fn penalized_cumulative(cost: &CostField, penalty: &PenaltyField, region: &OverlapRegion) -> Result<Plane> {
    let _ = penalized(cost, penalty, region)?;
    let (top, _) = region.anchor_grid(region.top_anchor);
    let mut c = accumulate(&cost.e, top).c;
    for (v, d) in c.data.iter_mut().zip(&penalty.d.data) {
        *v += d;
    }
    Ok(c)
}
