use std::collections::HashSet;

use super::{CostField, OverlapRegion, SeamOrientation};
use crate::error::{Error, Result};
use crate::raster::{Mask, Plane};

/// Where the cumulative cost of a grid pixel came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Unreached pixel.
    None,
    /// The top anchor.
    Start,
    UpLeft,
    Up,
    UpRight,
    /// From the pixel to the left in the same row.
    Left,
    /// From the pixel to the right in the same row.
    Right,
}

/// Cumulative cost `C` and backpointers over the region's grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeField {
    pub c: Plane,
    pub back: Vec<Step>,
}

impl CumulativeField {
    pub fn step(&self, col: usize, row: usize) -> Step {
        self.back[row * self.c.width + col]
    }
}

/// Runs the five-direction recurrence from `start` (grid column on row 0).
///
/// Each row first takes the best of the three pixels above, preferring the
/// straight-down move and then the smaller column on ties. Two same-row
/// sweeps (left to right, then right to left) then relax horizontal moves,
/// replacing a value only on strict improvement.
pub fn accumulate(e: &Plane, start: usize) -> CumulativeField {
    let (w, h) = e.dims();
    let mut c = Plane::filled(w, h, f64::INFINITY);
    let mut back = vec![Step::None; w * h];
    if w == 0 || h == 0 || start >= w || !e.get(start, 0).is_finite() {
        return CumulativeField { c, back };
    }
    c.data[start] = e.data[start];
    back[start] = Step::Start;
    sweep_row(e, &mut c, &mut back, 0);

    for r in 1..h {
        let (prev, cur) = c.data.split_at_mut(r * w);
        let prev = &prev[(r - 1) * w..];
        let cur = &mut cur[..w];
        let erow = e.row(r);
        let brow = &mut back[r * w..(r + 1) * w];
        for j in 0..w {
            if !erow[j].is_finite() {
                continue;
            }
            let mut best = prev[j];
            let mut step = Step::Up;
            if j > 0 && prev[j - 1] < best {
                best = prev[j - 1];
                step = Step::UpLeft;
            }
            if j + 1 < w && prev[j + 1] < best {
                best = prev[j + 1];
                step = Step::UpRight;
            }
            if best.is_finite() {
                cur[j] = best + erow[j];
                brow[j] = step;
            }
        }
        sweep_row(e, &mut c, &mut back, r);
    }
    CumulativeField { c, back }
}

fn sweep_row(e: &Plane, c: &mut Plane, back: &mut [Step], r: usize) {
    let w = e.width;
    let erow = e.row(r);
    let cur = &mut c.data[r * w..(r + 1) * w];
    let brow = &mut back[r * w..(r + 1) * w];
    for j in 1..w {
        let cand = cur[j - 1] + erow[j];
        if cand < cur[j] {
            cur[j] = cand;
            brow[j] = Step::Left;
        }
    }
    for j in (0..w.saturating_sub(1)).rev() {
        let cand = cur[j + 1] + erow[j];
        if cand < cur[j] {
            cur[j] = cand;
            brow[j] = Step::Right;
        }
    }
}

/// Backtracks from `end` (grid column on the last row). Returns the grid path
/// from the top anchor to `end`.
pub fn backtrack(field: &CumulativeField, end: usize) -> Result<Vec<(usize, usize)>> {
    let (w, h) = field.c.dims();
    if h == 0 || end >= w || !field.c.get(end, h - 1).is_finite() {
        return Err(Error::NoPath);
    }
    let (mut col, mut row) = (end, h - 1);
    let mut path = vec![(col, row)];
    loop {
        match field.step(col, row) {
            Step::Start => break,
            Step::None => return Err(Error::NoPath),
            Step::Up => row -= 1,
            Step::UpLeft => {
                row -= 1;
                col -= 1;
            }
            Step::UpRight => {
                row -= 1;
                col += 1;
            }
            Step::Left => col -= 1,
            Step::Right => col += 1,
        }
        path.push((col, row));
        if path.len() > w * h {
            return Err(Error::NoPath);
        }
    }
    path.reverse();
    Ok(path)
}

/// A seam through the overlap, stored in canvas pixel coordinates ordered
/// from anchor A to anchor B.
#[derive(Debug, Clone, PartialEq)]
pub struct Seam {
    pub path: Vec<(usize, usize)>,
    pub orientation: SeamOrientation,
    /// Sum of the per-pixel cost minimized by the search.
    pub cost: f64,
}

impl Seam {
    /// Grid step from one seam pixel to the next, as (across, along).
    fn step(&self, a: (usize, usize), b: (usize, usize)) -> (isize, isize) {
        let dx = b.0 as isize - a.0 as isize;
        let dy = b.1 as isize - a.1 as isize;
        match self.orientation {
            SeamOrientation::Vertical => (dx, dy),
            SeamOrientation::Horizontal => (dy, dx),
        }
    }

    /// Connectivity through the five allowed moves, no repeated pixel and
    /// every pixel on `mask` (canvas coordinates).
    pub fn is_valid(&self, mask: &Mask) -> bool {
        if self.path.is_empty() {
            return false;
        }
        let mut seen = HashSet::with_capacity(self.path.len());
        for &(x, y) in &self.path {
            if x >= mask.width || y >= mask.height || !mask.get(x, y) || !seen.insert((x, y)) {
                return false;
            }
        }
        self.path.windows(2).all(|p| {
            matches!(self.step(p[0], p[1]), (-1, 1) | (0, 1) | (1, 1) | (-1, 0) | (1, 0))
        })
    }

    /// Position of the seam across its direction at each step along it, as
    /// `(along, min_across, max_across)` runs in canvas coordinates.
    pub fn runs(&self) -> Vec<(usize, usize, usize)> {
        let key = |&(x, y): &(usize, usize)| match self.orientation {
            SeamOrientation::Vertical => (y, x),
            SeamOrientation::Horizontal => (x, y),
        };
        let mut runs: Vec<(usize, usize, usize)> = Vec::new();
        for p in &self.path {
            let (along, across) = key(p);
            match runs.iter_mut().find(|r| r.0 == along) {
                Some(r) => {
                    r.1 = r.1.min(across);
                    r.2 = r.2.max(across);
                }
                None => runs.push((along, across, across)),
            }
        }
        runs.sort_unstable();
        runs
    }
}

pub(crate) fn seam_from_grid(region: &OverlapRegion, e: &Plane) -> Result<Seam> {
    let (top, top_row) = region.anchor_grid(region.top_anchor);
    let (bottom, bottom_row) = region.anchor_grid(region.bottom_anchor);
    let (_, rows) = region.grid_dims();
    debug_assert!(top_row == 0 && bottom_row == rows - 1);
    let field = accumulate(e, top);
    let grid_path = backtrack(&field, bottom)?;
    let cost = grid_path.iter().map(|&(c, r)| e.get(c, r)).sum();
    Ok(Seam {
        path: grid_path.into_iter().map(|(c, r)| region.to_canvas(c, r)).collect(),
        orientation: region.orientation,
        cost,
    })
}

/// Minimal-cost seam from anchor A to anchor B.
pub fn find_seam(cost: &CostField, region: &OverlapRegion) -> Result<Seam> {
    if cost.dims() != region.grid_dims() {
        return Err(Error::DimensionMismatch("cost field does not match the region".into()));
    }
    seam_from_grid(region, &cost.e)
}

/// Cumulative field of a cost over the region, for diagnostics.
pub fn cumulative_cost(cost: &CostField, region: &OverlapRegion) -> Result<CumulativeField> {
    if cost.dims() != region.grid_dims() {
        return Err(Error::DimensionMismatch("cost field does not match the region".into()));
    }
    let (top, _) = region.anchor_grid(region.top_anchor);
    Ok(accumulate(&cost.e, top))
}
