use super::{Homography, Point2, WarpField};
use crate::error::{Error, Result};
use crate::raster::{Frame, Mask, Plane};

/// Shared output canvas. Canvas pixel `(cx, cy)` sits at warped coordinate
/// `(cx + offset.x, cy + offset.y)`; the offset is integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanvasExtent {
    pub offset: Point2,
    pub width: usize,
    pub height: usize,
}

impl CanvasExtent {
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn warped_coord(&self, cx: usize, cy: usize) -> Point2 {
        Point2::new(cx as f64 + self.offset.x, cy as f64 + self.offset.y)
    }

    #[inline]
    pub fn canvas_coord(&self, p: Point2) -> Point2 {
        Point2::new(p.x - self.offset.x, p.y - self.offset.y)
    }
}

/// Either a per-cell warp field or a single homography.
#[derive(Debug, Clone, Copy)]
pub enum ImageWarp<'a> {
    Field(&'a WarpField),
    Homography(&'a Homography),
}

impl ImageWarp<'_> {
    /// Warped positions of the extreme pixel centers (per cell for a field).
    fn forward_corners(&self, width: usize, height: usize) -> Result<Vec<Point2>> {
        let rect_corners = |x0: f64, y0: f64, x1: f64, y1: f64| {
            [
                Point2::new(x0, y0),
                Point2::new(x1, y0),
                Point2::new(x1, y1),
                Point2::new(x0, y1),
            ]
        };
        let map_rect = |h: &Homography, corners: [Point2; 4]| -> Result<Vec<Point2>> {
            let m = h.matrix();
            let depths: Vec<f64> = corners
                .iter()
                .map(|p| m[(2, 0)] * p.x + m[(2, 1)] * p.y + m[(2, 2)])
                .collect();
            let same_side = depths.iter().all(|&w| w > 0.0) || depths.iter().all(|&w| w < 0.0);
            if !same_side {
                return Err(Error::Degenerate("warp sends part of the image past the horizon".into()));
            }
            Ok(corners.iter().map(|p| h.map(*p)).collect())
        };
        match self {
            ImageWarp::Homography(h) => map_rect(
                h,
                rect_corners(0.0, 0.0, (width - 1) as f64, (height - 1) as f64),
            ),
            ImageWarp::Field(field) => {
                let mut out = Vec::with_capacity(4 * field.cell_count());
                for cell in 0..field.cell_count() {
                    let (x0, y0, x1, y1) = field.cell_rect(cell);
                    out.extend(map_rect(
                        field.homography(cell),
                        rect_corners(x0 as f64, y0 as f64, (x1 - 1) as f64, (y1 - 1) as f64),
                    )?);
                }
                Ok(out)
            }
        }
    }
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < 1e-6 {
        r
    } else {
        v
    }
}

/// Bounding box of both warped images with an integral offset.
pub fn compute_canvas(
    extent_a: (usize, usize),
    warp_a: &WarpField,
    extent_b: (usize, usize),
    warp_b: &Homography,
    max_area: u64,
) -> Result<CanvasExtent> {
    let mut pts = ImageWarp::Field(warp_a).forward_corners(extent_a.0, extent_a.1)?;
    pts.extend(ImageWarp::Homography(warp_b).forward_corners(extent_b.0, extent_b.1)?);
    canvas_around(&pts, max_area)
}

pub(crate) fn canvas_around(pts: &[Point2], max_area: u64) -> Result<CanvasExtent> {
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        if !p.is_finite() {
            return Err(Error::Degenerate("non-finite warped corner".into()));
        }
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let (x0, y0) = (snap(min_x).floor(), snap(min_y).floor());
    let (x1, y1) = (snap(max_x).ceil(), snap(max_y).ceil());
    let (w, h) = (x1 - x0 + 1.0, y1 - y0 + 1.0);
    let area = w * h;
    if !(area <= max_area as f64) {
        return Err(Error::CanvasOverflow {
            area: if area.is_finite() { area as u64 } else { u64::MAX },
            max: max_area,
        });
    }
    Ok(CanvasExtent {
        offset: Point2::new(x0, y0),
        width: w as usize,
        height: h as usize,
    })
}

#[derive(Debug, Clone, Copy)]
struct Tap {
    x0: u32,
    y0: u32,
    fx: f32,
    fy: f32,
}

const INVALID: u32 = u32::MAX;

/// Precomputed inverse map from canvas pixels to bilinear source taps.
/// Built once per alignment model and reused for every frame.
#[derive(Debug, Clone)]
pub struct WarpMap {
    pub width: usize,
    pub height: usize,
    pub source_width: usize,
    pub source_height: usize,
    taps: Vec<Tap>,
    mask: Mask,
}

impl WarpMap {
    fn from_inverse(
        canvas: &CanvasExtent,
        source: (usize, usize),
        mut inverse: impl FnMut(usize, usize) -> Option<Point2>,
    ) -> Self {
        let (sw, sh) = source;
        let (max_x, max_y) = ((sw - 1) as f64, (sh - 1) as f64);
        let mut taps = Vec::with_capacity(canvas.area());
        let mut mask = Mask::new(canvas.width, canvas.height, false);
        for cy in 0..canvas.height {
            for cx in 0..canvas.width {
                let tap = inverse(cx, cy).and_then(|s| {
                    let (x, y) = (snap(s.x), snap(s.y));
                    if !(x >= 0.0 && y >= 0.0 && x <= max_x && y <= max_y) {
                        return None;
                    }
                    let (x0, y0) = (x.floor(), y.floor());
                    Some(Tap {
                        x0: x0 as u32,
                        y0: y0 as u32,
                        fx: (x - x0) as f32,
                        fy: (y - y0) as f32,
                    })
                });
                match tap {
                    Some(t) => {
                        mask.set(cx, cy, true);
                        taps.push(t);
                    }
                    None => taps.push(Tap { x0: INVALID, y0: INVALID, fx: 0.0, fy: 0.0 }),
                }
            }
        }
        WarpMap {
            width: canvas.width,
            height: canvas.height,
            source_width: sw,
            source_height: sh,
            taps,
            mask,
        }
    }

    pub fn from_homography(h: &Homography, source: (usize, usize), canvas: &CanvasExtent) -> Result<Self> {
        let inv = h.inverse()?;
        Ok(Self::from_inverse(canvas, source, |cx, cy| {
            inv.apply(canvas.warped_coord(cx, cy))
        }))
    }

    /// Inverse map for a warp field. Each canvas pixel is owned by the
    /// lowest-index cell whose forward-mapped quad contains it; pixels in
    /// sub-pixel cracks between quads go to the lowest-index cell within one
    /// pixel.
    pub fn from_field(field: &WarpField, canvas: &CanvasExtent) -> Result<Self> {
        let n = field.cell_count();
        let inverses: Vec<Homography> = field
            .homographies()
            .iter()
            .map(|h| h.inverse())
            .collect::<Result<_>>()?;
        let (sw, sh) = (field.source_width, field.source_height);

        let mut owner = vec![INVALID; canvas.area()];
        for tolerance in [0.0, 1.0] {
            for cell in 0..n {
                let (x0, y0, x1, y1) = field.cell_rect(cell);
                let (fx0, fy0) = (x0 as f64 - 0.5, y0 as f64 - 0.5);
                let (fx1, fy1) = (x1 as f64 - 0.5, y1 as f64 - 0.5);
                let h = field.homography(cell);
                let quad: Vec<Point2> = [(fx0, fy0), (fx1, fy0), (fx1, fy1), (fx0, fy1)]
                    .iter()
                    .map(|&(x, y)| canvas.canvas_coord(h.map(Point2::new(x, y))))
                    .collect();
                if quad.iter().any(|p| !p.is_finite()) {
                    continue;
                }
                let lo_x = quad.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - tolerance;
                let hi_x = quad.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + tolerance;
                let lo_y = quad.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - tolerance;
                let hi_y = quad.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + tolerance;
                let cx0 = lo_x.ceil().max(0.0) as usize;
                let cy0 = lo_y.ceil().max(0.0) as usize;
                let cx1 = (hi_x.floor().min(canvas.width as f64 - 1.0)).max(-1.0);
                let cy1 = (hi_y.floor().min(canvas.height as f64 - 1.0)).max(-1.0);
                if cx1 < 0.0 || cy1 < 0.0 {
                    continue;
                }
                for cy in cy0..=cy1 as usize {
                    for cx in cx0..=cx1 as usize {
                        let slot = &mut owner[cy * canvas.width + cx];
                        if *slot == INVALID
                            && inside_quad(&quad, Point2::new(cx as f64, cy as f64), tolerance)
                        {
                            *slot = cell as u32;
                        }
                    }
                }
            }
        }

        Ok(Self::from_inverse(canvas, (sw, sh), |cx, cy| {
            let cell = owner[cy * canvas.width + cx];
            (cell != INVALID).then(|| inverses[cell as usize].map(canvas.warped_coord(cx, cy)))
        }))
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    /// Source coordinate sampled at a canvas pixel, if valid.
    pub fn source_coord(&self, cx: usize, cy: usize) -> Option<Point2> {
        let t = self.taps[cy * self.width + cx];
        (t.x0 != INVALID).then(|| Point2::new(t.x0 as f64 + t.fx as f64, t.y0 as f64 + t.fy as f64))
    }

    pub fn apply_plane(&self, src: &Plane) -> Plane {
        assert_eq!(src.dims(), (self.source_width, self.source_height));
        let mut out = Plane::new(self.width, self.height);
        let sw = self.source_width;
        for (o, t) in out.data.iter_mut().zip(&self.taps) {
            if t.x0 == INVALID {
                continue;
            }
            let (x0, y0) = (t.x0 as usize, t.y0 as usize);
            let x1 = if t.fx > 0.0 { x0 + 1 } else { x0 };
            let y1 = if t.fy > 0.0 { y0 + 1 } else { y0 };
            let (fx, fy) = (t.fx as f64, t.fy as f64);
            let d = &src.data;
            let top = d[y0 * sw + x0] * (1.0 - fx) + d[y0 * sw + x1] * fx;
            let bottom = d[y1 * sw + x0] * (1.0 - fx) + d[y1 * sw + x1] * fx;
            *o = top * (1.0 - fy) + bottom * fy;
        }
        out
    }

    /// Samples all three channels straight from the 8-bit frame.
    pub fn apply(&self, frame: &Frame) -> WarpedImage {
        assert_eq!(
            (frame.width() as usize, frame.height() as usize),
            (self.source_width, self.source_height)
        );
        let n = self.width * self.height;
        let mut planes: [Plane; 3] = std::array::from_fn(|_| Plane::new(self.width, self.height));
        let (r, rest) = planes.split_at_mut(1);
        let (g, b) = rest.split_at_mut(1);
        let (r, g, b) = (&mut r[0].data, &mut g[0].data, &mut b[0].data);
        let d = frame.as_raw();
        let stride = 3 * self.source_width;
        for i in 0..n {
            let t = self.taps[i];
            if t.x0 == INVALID {
                continue;
            }
            let (x0, y0) = (t.x0 as usize, t.y0 as usize);
            let dx = if t.fx > 0.0 { 3 } else { 0 };
            let dy = if t.fy > 0.0 { stride } else { 0 };
            let (fx, fy) = (t.fx as f64, t.fy as f64);
            let (w00, w01, w10, w11) = ((1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy);
            let base = y0 * stride + 3 * x0;
            let px = |c: usize| {
                d[base + c] as f64 * w00
                    + d[base + dx + c] as f64 * w01
                    + d[base + dy + c] as f64 * w10
                    + d[base + dy + dx + c] as f64 * w11
            };
            r[i] = px(0);
            g[i] = px(1);
            b[i] = px(2);
        }
        WarpedImage {
            planes,
            mask: self.mask.clone(),
        }
    }

    pub fn apply_planes(&self, planes: &[Plane; 3]) -> WarpedImage {
        WarpedImage {
            planes: [
                self.apply_plane(&planes[0]),
                self.apply_plane(&planes[1]),
                self.apply_plane(&planes[2]),
            ],
            mask: self.mask.clone(),
        }
    }
}

fn inside_quad(quad: &[Point2], p: Point2, tolerance: f64) -> bool {
    let mut signed = [0.0; 4];
    let mut orientation = 0.0;
    for i in 0..4 {
        let a = quad[i];
        let b = quad[(i + 1) % 4];
        let len = a.distance(&b);
        if len == 0.0 {
            return false;
        }
        signed[i] = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / len;
        let c = quad[(i + 2) % 4];
        orientation += (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    }
    let sign = if orientation >= 0.0 { 1.0 } else { -1.0 };
    signed.iter().all(|d| d * sign >= -tolerance)
}

/// A warped image on the canvas with its valid-pixel mask.
#[derive(Debug, Clone)]
pub struct WarpedImage {
    pub planes: [Plane; 3],
    pub mask: Mask,
}

/// Warps an 8-bit frame onto `canvas` with bilinear inverse mapping.
pub fn warp_image(image: &Frame, warp: ImageWarp<'_>, canvas: &CanvasExtent) -> Result<WarpedImage> {
    let source = (image.width() as usize, image.height() as usize);
    let map = match warp {
        ImageWarp::Homography(h) => WarpMap::from_homography(h, source, canvas)?,
        ImageWarp::Field(field) => {
            if (field.source_width, field.source_height) != source {
                return Err(Error::DimensionMismatch(format!(
                    "warp field covers {}x{} but image is {}x{}",
                    field.source_width, field.source_height, source.0, source.1
                )));
            }
            WarpMap::from_field(field, canvas)?
        }
    };
    Ok(map.apply(image))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_canvas() {
        let field = WarpField::constant(Homography::identity(), 64, 48, 16);
        let c = compute_canvas((64, 48), &field, (64, 48), &Homography::identity(), u64::MAX).unwrap();
        assert_eq!(c, CanvasExtent { offset: Point2::new(0.0, 0.0), width: 64, height: 48 });
    }

    #[test]
    fn translated_canvas_grows() {
        let field = WarpField::constant(Homography::translation(50.0, 0.0), 64, 48, 16);
        let c = compute_canvas((64, 48), &field, (64, 48), &Homography::identity(), u64::MAX).unwrap();
        assert_eq!((c.width, c.height), (114, 48));
    }

    #[test]
    fn rotated_canvas_swaps_dims() {
        let rot = Homography::from_entries([0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let field = WarpField::constant(rot, 64, 48, 16);
        let c = compute_canvas((64, 48), &field, (64, 48), &rot, u64::MAX).unwrap();
        assert_eq!((c.width, c.height), (48, 64));
    }

    #[test]
    fn canvas_overflow() {
        let field = WarpField::constant(Homography::translation(5000.0, 0.0), 64, 48, 16);
        let r = compute_canvas((64, 48), &field, (64, 48), &Homography::identity(), 100_000);
        assert!(matches!(r, Err(Error::CanvasOverflow { .. })));
    }

    #[test]
    fn quad_containment_respects_orientation() {
        let q = [
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 4.0),
            Point2::new(0.0, 4.0),
        ];
        assert!(inside_quad(&q, Point2::new(2.0, 2.0), 0.0));
        assert!(!inside_quad(&q, Point2::new(4.5, 2.0), 0.0));
        assert!(inside_quad(&q, Point2::new(4.5, 2.0), 1.0));
        let rev: Vec<_> = q.iter().rev().copied().collect();
        assert!(inside_quad(&rev, Point2::new(1.0, 3.0), 0.0));
    }
}
