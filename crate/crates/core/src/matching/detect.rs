//! Built-in keypoint detector: multi-scale Harris corners with a
//! gradient-orientation-histogram descriptor.

use std::f64::consts::PI;

use crate::geometry::Point2;
use crate::raster::{gaussian_blur, luma, reflect101, Frame, Plane};

pub const DESCRIPTOR_LEN: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct Keypoint {
    pub position: Point2,
    /// Pixel size of the detection octave in source pixels (1, 2, 4, ...).
    pub scale: f64,
    pub orientation: f64,
    pub response: f64,
    pub descriptor: Vec<f32>,
}

/// Pluggable keypoint detector/descriptor.
pub trait FeatureDetector {
    fn detect(&self, frame: &Frame) -> Vec<Keypoint>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CornerDetector {
    pub octaves: usize,
    pub max_keypoints: usize,
    pub harris_k: f64,
    /// Responses below this fraction of the octave maximum are dropped.
    pub relative_threshold: f64,
    /// Responses below this value are dropped regardless of the image.
    pub absolute_threshold: f64,
    pub nms_radius: usize,
    /// Skip orientation assignment (descriptors in the image frame).
    pub upright: bool,
}

impl Default for CornerDetector {
    fn default() -> Self {
        CornerDetector {
            octaves: 3,
            max_keypoints: 1500,
            harris_k: 0.04,
            relative_threshold: 1e-3,
            absolute_threshold: 50.0,
            nms_radius: 2,
            upright: false,
        }
    }
}

/// Detects and describes keypoints with the default [`CornerDetector`].
pub fn detect_and_describe(frame: &Frame) -> Vec<Keypoint> {
    CornerDetector::default().detect(frame)
}

const PATCH_RADIUS: f64 = 8.0;
const BORDER: usize = 13;
const OCTAVE_SHARE: [f64; 4] = [0.6, 0.3, 0.1, 0.05];

impl FeatureDetector for CornerDetector {
    fn detect(&self, frame: &Frame) -> Vec<Keypoint> {
        let mut level = gaussian_blur(&luma(frame), 1.0);
        let mut out = Vec::new();
        for octave in 0..self.octaves {
            if octave > 0 {
                if level.width < 2 * (2 * BORDER + 1) || level.height < 2 * (2 * BORDER + 1) {
                    break;
                }
                level = halve(&level);
            }
            if level.width <= 2 * BORDER || level.height <= 2 * BORDER {
                break;
            }
            let share = OCTAVE_SHARE.get(octave).copied().unwrap_or(0.05);
            let budget = ((self.max_keypoints as f64) * share).ceil() as usize;
            out.extend(self.detect_octave(&level, octave, budget));
        }
        out
    }
}

impl CornerDetector {
    fn detect_octave(&self, img: &Plane, octave: usize, budget: usize) -> Vec<Keypoint> {
        let (w, h) = img.dims();
        let (gx, gy) = gradients(img);
        let mut ixx = Plane::new(w, h);
        let mut iyy = Plane::new(w, h);
        let mut ixy = Plane::new(w, h);
        for i in 0..w * h {
            ixx.data[i] = gx.data[i] * gx.data[i];
            iyy.data[i] = gy.data[i] * gy.data[i];
            ixy.data[i] = gx.data[i] * gy.data[i];
        }
        let (ixx, iyy, ixy) = (gaussian_blur(&ixx, 1.5), gaussian_blur(&iyy, 1.5), gaussian_blur(&ixy, 1.5));
        let response = Plane::from_fn(w, h, |x, y| {
            let (a, b, c) = (ixx.get(x, y), iyy.get(x, y), ixy.get(x, y));
            a * b - c * c - self.harris_k * (a + b) * (a + b)
        });

        let max_r = response.data.iter().copied().fold(0.0, f64::max);
        let threshold = self.absolute_threshold.max(self.relative_threshold * max_r);
        let r = self.nms_radius as isize;
        let mut peaks = Vec::new();
        for y in BORDER..h - BORDER {
            for x in BORDER..w - BORDER {
                let v = response.get(x, y);
                if v <= threshold {
                    continue;
                }
                let mut is_max = true;
                'nbhd: for dy in -r..=r {
                    for dx in -r..=r {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let n = response.get((x as isize + dx) as usize, (y as isize + dy) as usize);
                        // strict against earlier neighbours, non-strict against later ones
                        let earlier = dy < 0 || (dy == 0 && dx < 0);
                        if n > v || (earlier && n == v) {
                            is_max = false;
                            break 'nbhd;
                        }
                    }
                }
                if is_max {
                    peaks.push((v, x, y));
                }
            }
        }
        peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));
        peaks.truncate(budget);

        let scale = (1usize << octave) as f64;
        peaks
            .into_iter()
            .map(|(v, x, y)| {
                let (ox, oy) = subpixel_offset(&response, x, y);
                let (px, py) = (x as f64 + ox, y as f64 + oy);
                let orientation = if self.upright {
                    0.0
                } else {
                    dominant_orientation(&gx, &gy, px, py)
                };
                Keypoint {
                    position: Point2::new(px * scale, py * scale),
                    scale,
                    orientation,
                    response: v,
                    descriptor: describe(&gx, &gy, px, py, orientation),
                }
            })
            .collect()
    }
}

/// Blur with the 5-tap binomial kernel and keep even samples.
fn halve(src: &Plane) -> Plane {
    let blurred = crate::raster::convolve_separable(src, &[1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0]);
    let (w, h) = (src.width.div_ceil(2), src.height.div_ceil(2));
    Plane::from_fn(w, h, |x, y| blurred.get(2 * x, 2 * y))
}

fn gradients(img: &Plane) -> (Plane, Plane) {
    let (w, h) = img.dims();
    let at = |x: isize, y: isize| img.get(reflect101(x, w), reflect101(y, h));
    let gx = Plane::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        0.5 * (at(x + 1, y) - at(x - 1, y))
    });
    let gy = Plane::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        0.5 * (at(x, y + 1) - at(x, y - 1))
    });
    (gx, gy)
}

fn subpixel_offset(r: &Plane, x: usize, y: usize) -> (f64, f64) {
    let fit = |m: f64, c: f64, p: f64| {
        let denom = m - 2.0 * c + p;
        if denom.abs() < 1e-12 {
            0.0
        } else {
            (0.5 * (m - p) / denom).clamp(-0.5, 0.5)
        }
    };
    let c = r.get(x, y);
    (
        fit(r.get(x - 1, y), c, r.get(x + 1, y)),
        fit(r.get(x, y - 1), c, r.get(x, y + 1)),
    )
}

fn dominant_orientation(gx: &Plane, gy: &Plane, px: f64, py: f64) -> f64 {
    const BINS: usize = 36;
    let mut hist = [0.0f64; BINS];
    let radius = 6isize;
    let sigma = 3.0;
    let (cx, cy) = (px.round() as isize, py.round() as isize);
    for dy in -radius..=radius {
        for dx in -radius..=radius {
            let d2 = (dx * dx + dy * dy) as f64;
            if d2 > (radius * radius) as f64 {
                continue;
            }
            let (x, y) = ((cx + dx) as usize, (cy + dy) as usize);
            let (u, v) = (gx.get(x, y), gy.get(x, y));
            let mag = u.hypot(v);
            if mag == 0.0 {
                continue;
            }
            let angle = v.atan2(u).rem_euclid(2.0 * PI);
            let bin = ((angle / (2.0 * PI) * BINS as f64) as usize).min(BINS - 1);
            hist[bin] += mag * (-d2 / (2.0 * sigma * sigma)).exp();
        }
    }
    let smoothed: Vec<f64> = (0..BINS)
        .map(|i| {
            0.25 * hist[(i + BINS - 1) % BINS] + 0.5 * hist[i] + 0.25 * hist[(i + 1) % BINS]
        })
        .collect();
    let (best, &peak) = smoothed
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    if peak <= 0.0 {
        return 0.0;
    }
    let l = smoothed[(best + BINS - 1) % BINS];
    let r = smoothed[(best + 1) % BINS];
    let denom = l - 2.0 * peak + r;
    let offset = if denom.abs() > 1e-12 { 0.5 * (l - r) / denom } else { 0.0 };
    ((best as f64 + 0.5 + offset) / BINS as f64 * 2.0 * PI).rem_euclid(2.0 * PI)
}

/// 4×4 spatial cells × 8 orientation bins over a rotated 16×16 patch.
fn describe(gx: &Plane, gy: &Plane, px: f64, py: f64, orientation: f64) -> Vec<f32> {
    let mut desc = [0.0f64; DESCRIPTOR_LEN];
    let (cos_o, sin_o) = (orientation.cos(), orientation.sin());
    let sigma = PATCH_RADIUS;
    let steps = (2.0 * PATCH_RADIUS) as isize;
    for j in 0..steps {
        for i in 0..steps {
            // patch-frame offset of the sample, cell units in [0, 4)
            let u = i as f64 + 0.5 - PATCH_RADIUS;
            let v = j as f64 + 0.5 - PATCH_RADIUS;
            let sx = px + u * cos_o - v * sin_o;
            let sy = py + u * sin_o + v * cos_o;
            let (ix, iy) = (gx.sample_bilinear(sx, sy), gy.sample_bilinear(sx, sy));
            // gradient expressed in the patch frame
            let gu = ix * cos_o + iy * sin_o;
            let gv = -ix * sin_o + iy * cos_o;
            let mag = gu.hypot(gv) * (-(u * u + v * v) / (2.0 * sigma * sigma)).exp();
            if mag == 0.0 {
                continue;
            }
            let angle = gv.atan2(gu).rem_euclid(2.0 * PI) / (2.0 * PI) * 8.0;
            let cu = (u + PATCH_RADIUS) / 4.0 - 0.5;
            let cv = (v + PATCH_RADIUS) / 4.0 - 0.5;
            let (cu0, cv0, a0) = (cu.floor(), cv.floor(), angle.floor());
            let (fu, fv, fa) = (cu - cu0, cv - cv0, angle - a0);
            for (du, wu) in [(0, 1.0 - fu), (1, fu)] {
                let col = cu0 as isize + du;
                if !(0..4).contains(&col) {
                    continue;
                }
                for (dv, wv) in [(0, 1.0 - fv), (1, fv)] {
                    let row = cv0 as isize + dv;
                    if !(0..4).contains(&row) {
                        continue;
                    }
                    for (da, wa) in [(0, 1.0 - fa), (1, fa)] {
                        let bin = (a0 as usize + da) % 8;
                        desc[((row * 4 + col) as usize) * 8 + bin] += mag * wu * wv * wa;
                    }
                }
            }
        }
    }
    normalize_clip(&mut desc);
    desc.iter().map(|&v| v as f32).collect()
}

fn normalize_clip(desc: &mut [f64]) {
    let norm = desc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    for v in desc.iter_mut() {
        *v = (*v / norm).min(0.2);
    }
    let norm = desc.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in desc.iter_mut() {
        *v /= norm;
    }
}
