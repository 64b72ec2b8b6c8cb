use super::OverlapRegion;
use crate::error::{Error, Result};
use crate::raster::{Mask, Plane};

/// Per-pixel seam cost on the region's grid. `e` is infinite off the mask.
#[derive(Debug, Clone, PartialEq)]
pub struct CostField {
    pub e: Plane,
    /// Normalized gradient magnitude of `I_s + I_t` (smoothness term).
    pub s_m: Plane,
    /// Normalized gradient magnitude of `I_s - I_t` (similarity term).
    pub s_d: Plane,
}

impl CostField {
    /// Wraps a raw cost raster; off-mask entries become infinite. Useful for
    /// driving the search with hand-built costs.
    pub fn from_raw(e: Plane, grid: &Mask) -> Result<Self> {
        if e.dims() != (grid.width, grid.height) {
            return Err(Error::DimensionMismatch("cost raster does not match the grid".into()));
        }
        if e.data.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::param("seam costs must be nonnegative"));
        }
        let mut e = e;
        for (v, &m) in e.data.iter_mut().zip(&grid.data) {
            if !m {
                *v = f64::INFINITY;
            }
        }
        let (w, h) = (grid.width, grid.height);
        Ok(CostField {
            e,
            s_m: Plane::new(w, h),
            s_d: Plane::new(w, h),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.e.dims()
    }

    /// Mean of `e` over finite entries (0 when there are none).
    pub fn mean_finite(&self) -> f64 {
        let (sum, n) = self
            .e
            .data
            .iter()
            .filter(|v| v.is_finite())
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}

/// Gradient magnitude on the grid with central differences, falling back
/// to one-sided differences where a neighbour is off the mask.
fn gradient_magnitude(values: &Plane, grid: &Mask) -> Plane {
    let (w, h) = values.dims();
    let mut out = Plane::new(w, h);
    let (v, m) = (&values.data, &grid.data);
    let diff = |lo: Option<usize>, mid: usize, hi: Option<usize>| match (lo, hi) {
        (Some(l), Some(u)) => 0.5 * (v[u] - v[l]),
        (None, Some(u)) => v[u] - v[mid],
        (Some(l), None) => v[mid] - v[l],
        (None, None) => 0.0,
    };
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if !m[i] {
                continue;
            }
            let left = (c > 0 && m[i - 1]).then(|| i - 1);
            let right = (c + 1 < w && m[i + 1]).then_some(i + 1);
            let up = (r > 0 && m[i - w]).then(|| i - w);
            let down = (r + 1 < h && m[i + w]).then(|| i + w);
            let (gx, gy) = (diff(left, i, right), diff(up, i, down));
            out.data[i] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

fn normalize_on_mask(p: &mut Plane, grid: &Mask) {
    let (sum, n) = p
        .data
        .iter()
        .zip(&grid.data)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    let mean = if n == 0 { 0.0 } else { sum / n as f64 };
    if mean > 0.0 {
        p.data.iter_mut().for_each(|v| *v /= mean);
    } else {
        p.data.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Gradient smoothness plus gradient similarity cost over the overlap.
/// `i_s` and `i_t` are single-channel images on the full canvas.
pub fn compute_gradient_cost(region: &OverlapRegion, i_s: &Plane, i_t: &Plane) -> Result<CostField> {
    let canvas = (region.mask.width, region.mask.height);
    if i_s.dims() != canvas || i_t.dims() != canvas {
        return Err(Error::DimensionMismatch("images are not on the overlap canvas".into()));
    }
    Ok(cost_from_samples(region, |x, y| (i_s.get(x, y), i_t.get(x, y))))
}

/// Same as [`compute_gradient_cost`] on the luma of two RGB canvases, with
/// luma evaluated only inside the overlap.
pub fn compute_gradient_cost_rgb(region: &OverlapRegion, s: &[Plane; 3], t: &[Plane; 3]) -> Result<CostField> {
    let canvas = (region.mask.width, region.mask.height);
    if s.iter().chain(t).any(|p| p.dims() != canvas) {
        return Err(Error::DimensionMismatch("images are not on the overlap canvas".into()));
    }
    let luma = |p: &[Plane; 3], i: usize| 0.299 * p[0].data[i] + 0.587 * p[1].data[i] + 0.114 * p[2].data[i];
    Ok(cost_from_samples(region, |x, y| {
        let i = y * canvas.0 + x;
        (luma(s, i), luma(t, i))
    }))
}

fn cost_from_samples(region: &OverlapRegion, sample: impl Fn(usize, usize) -> (f64, f64)) -> CostField {
    let grid = region.grid_mask();
    let (w, h) = region.grid_dims();
    let mut sum = Plane::new(w, h);
    let mut diff = Plane::new(w, h);
    for r in 0..h {
        for c in 0..w {
            if grid.get(c, r) {
                let (x, y) = region.to_canvas(c, r);
                let (a, b) = sample(x, y);
                sum.set(c, r, a + b);
                diff.set(c, r, a - b);
            }
        }
    }
    let mut s_m = gradient_magnitude(&sum, grid);
    let mut s_d = gradient_magnitude(&diff, grid);
    normalize_on_mask(&mut s_m, grid);
    normalize_on_mask(&mut s_d, grid);
    let e = Plane::from_fn(w, h, |c, r| {
        if grid.get(c, r) {
            s_m.get(c, r) + s_d.get(c, r)
        } else {
            f64::INFINITY
        }
    });
    CostField { e, s_m, s_d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seam::{compute_overlap_masks, SeamOrientation};

    fn full_region(w: usize, h: usize) -> OverlapRegion {
        let m = Mask::new(w, h, true);
        compute_overlap_masks(&m, &m, Some(SeamOrientation::Vertical)).unwrap()
    }

    #[test]
    fn constant_images_cost_nothing() {
        let region = full_region(12, 9);
        let i = Plane::filled(12, 9, 77.0);
        let cost = compute_gradient_cost(&region, &i, &i).unwrap();
        assert!(cost.e.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identical_textured_images_have_no_similarity_term() {
        let region = full_region(16, 10);
        let i = Plane::from_fn(16, 10, |x, y| ((x * 7 + y * 13) % 11) as f64);
        let cost = compute_gradient_cost(&region, &i, &i).unwrap();
        assert!(cost.s_d.data.iter().all(|&v| v == 0.0));
        assert_eq!(cost.e, cost.s_m);
        let mean = cost.s_m.data.iter().sum::<f64>() / 160.0;
        assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_difference_peaks_next_to_the_step() {
        let (w, h, k) = (20, 6, 9);
        let region = full_region(w, h);
        let i_s = Plane::from_fn(w, h, |x, _| if x >= k { 40.0 } else { 0.0 });
        let i_t = Plane::new(w, h);
        let cost = compute_gradient_cost(&region, &i_s, &i_t).unwrap();
        for r in 0..h {
            let row = cost.e.row(r);
            let arg = (0..w).max_by(|&a, &b| row[a].total_cmp(&row[b]).then(b.cmp(&a))).unwrap();
            assert!(arg.abs_diff(k) <= 1, "row {r}: argmax {arg}");
        }
    }

    #[test]
    fn off_mask_is_infinite() {
        let a = Mask::from_fn(10, 10, |x, y| x + y < 14);
        let region = compute_overlap_masks(&a, &a, Some(SeamOrientation::Vertical)).unwrap();
        let i = Plane::from_fn(10, 10, |x, _| x as f64);
        let cost = compute_gradient_cost(&region, &i, &i).unwrap();
        assert!(cost.e.get(9, 9).is_infinite());
        assert!(cost.e.get(0, 0).is_finite());
    }
}
