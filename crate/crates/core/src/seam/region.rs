use crate::error::{Error, Result};
use crate::geometry::{Point2, WarpedImage};
use crate::raster::Mask;

/// Direction the seam runs in. A vertical seam goes top to bottom and splits
/// the canvas into left and right; a horizontal one goes left to right and
/// splits it into top and bottom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeamOrientation {
    #[default]
    Vertical,
    Horizontal,
}

/// Axis-aligned pixel rectangle on the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

/// Pixels where both warped images are valid, together with the seam
/// anchors and the seam-aligned working grid.
///
/// The grid has one row per step along the seam direction and one column
/// per step across it; for a vertical seam it is the bounding box itself,
/// for a horizontal seam its transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapRegion {
    pub mask: Mask,
    pub bounds: Rect,
    pub orientation: SeamOrientation,
    /// Whether image A lies on the left (vertical) or top (horizontal) side.
    pub a_first: bool,
    /// Anchor A on the first grid row, in canvas coordinates.
    pub top_anchor: Point2,
    /// Anchor B on the last grid row, in canvas coordinates.
    pub bottom_anchor: Point2,
    grid: Mask,
}

impl OverlapRegion {
    /// Builds a region from an overlap mask with explicit orientation and
    /// default anchors.
    pub fn from_mask(mask: Mask, orientation: SeamOrientation, a_first: bool) -> Result<Self> {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..mask.height {
            for x in 0..mask.width {
                if mask.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        if x0 == usize::MAX {
            return Err(Error::NoOverlap);
        }
        let bounds = Rect {
            x0,
            y0,
            width: x1 - x0 + 1,
            height: y1 - y0 + 1,
        };
        let mut region = OverlapRegion {
            mask,
            bounds,
            orientation,
            a_first,
            top_anchor: Point2::default(),
            bottom_anchor: Point2::default(),
            grid: Mask::new(0, 0, false),
        };
        let (cols, rows) = region.grid_dims();
        region.grid = Mask::from_fn(cols, rows, |c, r| {
            let (x, y) = region.to_canvas(c, r);
            region.mask.get(x, y)
        });
        let a = region.anchor_col(0);
        let b = region.anchor_col(rows - 1);
        region.top_anchor = region.canvas_point(a, 0);
        region.bottom_anchor = region.canvas_point(b, rows - 1);
        Ok(region)
    }

    /// Replaces the anchors (given as grid columns of the first and last row).
    pub fn with_anchor_columns(mut self, top: usize, bottom: usize) -> Result<Self> {
        let (cols, rows) = self.grid_dims();
        if top >= cols || bottom >= cols || !self.grid.get(top, 0) || !self.grid.get(bottom, rows - 1) {
            return Err(Error::param("anchor off the overlap mask"));
        }
        self.top_anchor = self.canvas_point(top, 0);
        self.bottom_anchor = self.canvas_point(bottom, rows - 1);
        Ok(self)
    }

    /// Column of the mask centroid on a grid row, moved to the nearest mask
    /// pixel when the rounded centroid falls off the mask.
    fn anchor_col(&self, row: usize) -> usize {
        let cols: Vec<usize> = (0..self.grid.width).filter(|&c| self.grid.get(c, row)).collect();
        let mean = cols.iter().sum::<usize>() as f64 / cols.len() as f64;
        let target = mean.round() as usize;
        *cols
            .iter()
            .min_by_key(|&&c| (c.abs_diff(target), c))
            .expect("extreme rows contain mask pixels")
    }

    /// `(columns, rows)` of the seam-aligned grid.
    pub fn grid_dims(&self) -> (usize, usize) {
        match self.orientation {
            SeamOrientation::Vertical => (self.bounds.width, self.bounds.height),
            SeamOrientation::Horizontal => (self.bounds.height, self.bounds.width),
        }
    }

    pub fn grid_mask(&self) -> &Mask {
        &self.grid
    }

    #[inline]
    pub fn to_canvas(&self, col: usize, row: usize) -> (usize, usize) {
        match self.orientation {
            SeamOrientation::Vertical => (self.bounds.x0 + col, self.bounds.y0 + row),
            SeamOrientation::Horizontal => (self.bounds.x0 + row, self.bounds.y0 + col),
        }
    }

    fn canvas_point(&self, col: usize, row: usize) -> Point2 {
        let (x, y) = self.to_canvas(col, row);
        Point2::new(x as f64, y as f64)
    }

    /// Grid `(column, row)` of a canvas pixel, if inside the bounds.
    #[inline]
    pub fn to_grid(&self, x: usize, y: usize) -> Option<(usize, usize)> {
        let b = &self.bounds;
        if x < b.x0 || y < b.y0 || x >= b.x0 + b.width || y >= b.y0 + b.height {
            return None;
        }
        let (dx, dy) = (x - b.x0, y - b.y0);
        Some(match self.orientation {
            SeamOrientation::Vertical => (dx, dy),
            SeamOrientation::Horizontal => (dy, dx),
        })
    }

    pub(crate) fn anchor_grid(&self, p: Point2) -> (usize, usize) {
        self.to_grid(p.x as usize, p.y as usize).expect("anchor inside bounds")
    }

    pub fn pixel_count(&self) -> usize {
        self.grid.count()
    }
}

fn exclusive_centroid(own: &Mask, other: &Mask) -> Option<(f64, f64)> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for y in 0..own.height {
        for x in 0..own.width {
            let i = y * own.width + x;
            if own.data[i] && !other.data[i] {
                sx += x as f64;
                sy += y as f64;
                n += 1;
            }
        }
    }
    (n > 0).then(|| (sx / n as f64, sy / n as f64))
}

/// Picks the seam orientation and side assignment from where the two
/// exclusive (non-overlap) regions lie relative to each other. Without two
/// exclusive regions the seam is vertical with A on the left.
pub fn infer_layout(mask_a: &Mask, mask_b: &Mask) -> (SeamOrientation, bool) {
    match (exclusive_centroid(mask_a, mask_b), exclusive_centroid(mask_b, mask_a)) {
        (Some(a), Some(b)) => {
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            if dx.abs() >= dy.abs() {
                (SeamOrientation::Vertical, dx >= 0.0)
            } else {
                (SeamOrientation::Horizontal, dy >= 0.0)
            }
        }
        (Some(a), None) => {
            let (w, h) = (mask_a.width as f64, mask_a.height as f64);
            let (dx, dy) = (a.0 - 0.5 * w, a.1 - 0.5 * h);
            if dx.abs() / w >= dy.abs() / h {
                (SeamOrientation::Vertical, dx <= 0.0)
            } else {
                (SeamOrientation::Horizontal, dy <= 0.0)
            }
        }
        (None, Some(b)) => {
            let (w, h) = (mask_b.width as f64, mask_b.height as f64);
            let (dx, dy) = (b.0 - 0.5 * w, b.1 - 0.5 * h);
            if dx.abs() / w >= dy.abs() / h {
                (SeamOrientation::Vertical, dx >= 0.0)
            } else {
                (SeamOrientation::Horizontal, dy >= 0.0)
            }
        }
        (None, None) => (SeamOrientation::Vertical, true),
    }
}

/// Overlap of two masks on the same canvas.
pub fn compute_overlap_masks(
    mask_a: &Mask,
    mask_b: &Mask,
    orientation: Option<SeamOrientation>,
) -> Result<OverlapRegion> {
    if (mask_a.width, mask_a.height) != (mask_b.width, mask_b.height) {
        return Err(Error::DimensionMismatch("masks are on different canvases".into()));
    }
    let (inferred, a_first) = infer_layout(mask_a, mask_b);
    OverlapRegion::from_mask(mask_a.and(mask_b), orientation.unwrap_or(inferred), a_first)
}

pub fn compute_overlap(warped_a: &WarpedImage, warped_b: &WarpedImage) -> Result<OverlapRegion> {
    compute_overlap_masks(&warped_a.mask, &warped_b.mask, None)
}
