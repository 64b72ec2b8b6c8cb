use crate::geometry::CanvasExtent;
use crate::raster::{Mask, Plane};
use crate::seam::{Seam, SeamOrientation};

/// Per-pixel share of image A on the canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMask {
    pub w: Plane,
}

impl WeightMask {
    pub fn complement(&self) -> WeightMask {
        let mut w = self.w.clone();
        w.data.iter_mut().for_each(|v| *v = 1.0 - *v);
        WeightMask { w }
    }
}

/// For every position along the seam direction, the span `[lo, hi]` the seam
/// occupies across it. Positions the seam misses take the nearest covered
/// one (the lower index on ties).
fn spans(seam: &Seam, along_len: usize) -> Vec<(usize, usize)> {
    let runs = seam.runs();
    let mut out = vec![(0, 0); along_len];
    if runs.is_empty() {
        return out;
    }
    for (i, slot) in out.iter_mut().enumerate() {
        let k = runs.partition_point(|r| r.0 < i);
        let pick = if k < runs.len() && runs[k].0 == i {
            k
        } else if k == 0 {
            0
        } else if k == runs.len() || i - runs[k - 1].0 <= runs[k].0 - i {
            k - 1
        } else {
            k
        };
        *slot = (runs[pick].1, runs[pick].2);
    }
    out
}

/// Binary weight from a seam: pixels before the seam across its direction
/// (left of a vertical seam, above a horizontal one) belong to the first
/// image, the rest to the second. `a_first` says whether A is the first.
/// Where only one mask is valid that image wins outright.
pub fn seam_to_weight_mask(
    seam: &Seam,
    canvas: &CanvasExtent,
    mask_a: &Mask,
    mask_b: &Mask,
    a_first: bool,
) -> WeightMask {
    let (w, h) = (canvas.width, canvas.height);
    let along_len = match seam.orientation {
        SeamOrientation::Vertical => h,
        SeamOrientation::Horizontal => w,
    };
    let spans = spans(seam, along_len);
    let first_value = if a_first { 1.0 } else { 0.0 };
    let plane = Plane::from_fn(w, h, |x, y| {
        match (mask_a.get(x, y), mask_b.get(x, y)) {
            (true, false) => return 1.0,
            (false, true) => return 0.0,
            _ => {}
        }
        let (along, across) = match seam.orientation {
            SeamOrientation::Vertical => (y, x),
            SeamOrientation::Horizontal => (x, y),
        };
        if across < spans[along].0 {
            first_value
        } else {
            1.0 - first_value
        }
    });
    WeightMask { w: plane }
}
