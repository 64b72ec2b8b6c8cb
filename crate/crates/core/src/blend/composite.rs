use super::pyramid::{build_gaussian_pyramid, build_laplacian_pyramid, collapse_pyramid, max_levels};
use super::WeightMask;
use crate::error::{Error, Result};
use crate::geometry::WarpedImage;
use crate::raster::{Mask, Plane};

/// Nearest-valid-pixel source index for every pixel of a mask's raster:
/// nearest valid pixel in the same row first, and rows with none copy the
/// nearest row that has some. Valid pixels map to themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct FillMap {
    index: Vec<u32>,
}

impl FillMap {
    pub fn new(mask: &Mask) -> FillMap {
        let (w, h) = (mask.width, mask.height);
        let mut index: Vec<u32> = (0..(w * h) as u32).collect();
        let mut has_valid = vec![false; h];
        for y in 0..h {
            let row = &mask.data[y * w..(y + 1) * w];
            let valid: Vec<usize> = (0..w).filter(|&x| row[x]).collect();
            if valid.is_empty() {
                continue;
            }
            has_valid[y] = true;
            let mut k = 0;
            for x in 0..w {
                while k + 1 < valid.len() && valid[k + 1] <= x {
                    k += 1;
                }
                let mut best = valid[k];
                if best < x {
                    if let Some(&next) = valid.get(k + 1) {
                        if next - x < x - best {
                            best = next;
                        }
                    }
                }
                index[y * w + x] = (y * w + best) as u32;
            }
        }
        let rows: Vec<usize> = (0..h).filter(|&y| has_valid[y]).collect();
        if !rows.is_empty() {
            for y in 0..h {
                if has_valid[y] {
                    continue;
                }
                let src = *rows.iter().min_by_key(|&&r| (r.abs_diff(y), r)).expect("rows nonempty");
                for x in 0..w {
                    index[y * w + x] = index[src * w + x];
                }
            }
        }
        FillMap { index }
    }

    pub fn apply(&self, plane: &Plane) -> Plane {
        Plane {
            width: plane.width,
            height: plane.height,
            data: self.index.iter().map(|&i| plane.data[i as usize]).collect(),
        }
    }
}

/// Multi-band compositor for one canvas layout. Blending runs on the
/// bounding box of the overlap only, since every other pixel copies one
/// source. The crop and its fill maps depend only on the two masks, so one
/// `Blender` serves every frame of an alignment.
#[derive(Debug, Clone)]
pub struct Blender {
    /// Depth actually used; capped by the overlap box.
    pub levels: usize,
    mask_a: Mask,
    mask_b: Mask,
    /// `(x0, y0, width, height)` of the overlap bounding box.
    crop: Option<(usize, usize, usize, usize)>,
    fill_a: FillMap,
    fill_b: FillMap,
}

fn crop_mask(m: &Mask, (x0, y0, w, h): (usize, usize, usize, usize)) -> Mask {
    Mask::from_fn(w, h, |x, y| m.get(x0 + x, y0 + y))
}

fn crop_plane(p: &Plane, (x0, y0, w, h): (usize, usize, usize, usize)) -> Plane {
    let mut data = Vec::with_capacity(w * h);
    for y in y0..y0 + h {
        data.extend_from_slice(&p.row(y)[x0..x0 + w]);
    }
    Plane { width: w, height: h, data }
}

impl Blender {
    pub fn new(mask_a: &Mask, mask_b: &Mask, levels: usize) -> Result<Blender> {
        if (mask_a.width, mask_a.height) != (mask_b.width, mask_b.height) {
            return Err(Error::DimensionMismatch("masks are on different canvases".into()));
        }
        if levels == 0 || levels > max_levels(mask_a.width, mask_a.height) {
            return Err(Error::param(format!(
                "{levels} pyramid levels do not fit a {}x{} canvas",
                mask_a.width, mask_a.height
            )));
        }
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..mask_a.height {
            for x in 0..mask_a.width {
                if mask_a.get(x, y) && mask_b.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        let crop = (x0 != usize::MAX).then(|| (x0, y0, x1 - x0 + 1, y1 - y0 + 1));
        let (fill_a, fill_b, levels) = match crop {
            Some(r) => (
                FillMap::new(&crop_mask(mask_a, r)),
                FillMap::new(&crop_mask(mask_b, r)),
                levels.min(max_levels(r.2, r.3)),
            ),
            None => (FillMap { index: Vec::new() }, FillMap { index: Vec::new() }, levels),
        };
        Ok(Blender {
            levels,
            mask_a: mask_a.clone(),
            mask_b: mask_b.clone(),
            crop,
            fill_a,
            fill_b,
        })
    }

    /// Real-valued composite. Pixels valid in only one image copy that image,
    /// pixels in neither are 0, and the overlap takes the multi-band blend.
    pub fn blend(&self, a: &WarpedImage, b: &WarpedImage, weight: &WeightMask) -> Result<[Plane; 3]> {
        let dims = (self.mask_a.width, self.mask_a.height);
        if a.mask != self.mask_a || b.mask != self.mask_b || weight.w.dims() != dims {
            return Err(Error::DimensionMismatch("inputs do not match the blender's canvas".into()));
        }
        let mut out: [Plane; 3] = Default::default();
        for c in 0..3 {
            let mut plane = Plane::new(dims.0, dims.1);
            for (i, v) in plane.data.iter_mut().enumerate() {
                *v = match (self.mask_a.data[i], self.mask_b.data[i]) {
                    (true, _) => a.planes[c].data[i],
                    (false, true) => b.planes[c].data[i],
                    (false, false) => 0.0,
                };
            }
            out[c] = plane;
        }
        let Some(r) = self.crop else {
            return Ok(out);
        };
        let gw = build_gaussian_pyramid(&crop_plane(&weight.w, r), self.levels)?;
        let (x0, y0, w, h) = r;
        for c in 0..3 {
            // Laplacian and collapse are linear, so blending the pyramids of A
            // and B equals B plus the weighted pyramid of A - B.
            let fa = self.fill_a.apply(&crop_plane(&a.planes[c], r));
            let fb = self.fill_b.apply(&crop_plane(&b.planes[c], r));
            let diff = Plane {
                width: w,
                height: h,
                data: fa.data.iter().zip(&fb.data).map(|(p, q)| p - q).collect(),
            };
            let mut lap = build_laplacian_pyramid(&diff, self.levels)?;
            for (l, g) in lap.levels.iter_mut().zip(&gw.levels) {
                l.data.iter_mut().zip(&g.data).for_each(|(v, k)| *v *= k);
            }
            let blended = collapse_pyramid(&lap);
            for y in 0..h {
                for x in 0..w {
                    let i = (y0 + y) * dims.0 + x0 + x;
                    if self.mask_a.data[i] && self.mask_b.data[i] {
                        out[c].data[i] = fb.data[y * w + x] + blended.data[y * w + x];
                    }
                }
            }
        }
        Ok(out)
    }
}
