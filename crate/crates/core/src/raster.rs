//! Real-valued single-channel rasters and the conversions between them and
//! 8-bit RGB frames.

use image::RgbImage;

/// 8-bit RGB video frame.
pub type Frame = RgbImage;

/// A row-major single-channel raster of `f64` samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Plane {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Bilinear sample with pixel centers at integer coordinates. Coordinates
    /// are clamped to the raster.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.width - 1) as f64);
        let y = y.clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        top * (1.0 - fy) + bottom * fy
    }

    pub fn max_abs_diff(&self, other: &Plane) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Binary raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, value: bool) -> Self {
        Mask {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Mask { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn and(&self, other: &Mask) -> Mask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        Mask {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a && *b).collect(),
        }
    }
}

/// Splits an RGB frame into three real-valued planes with values in [0, 255].
pub fn planes_from_frame(frame: &Frame) -> [Plane; 3] {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let mut planes = [Plane::new(w, h), Plane::new(w, h), Plane::new(w, h)];
    for (i, px) in frame.as_raw().chunks_exact(3).enumerate() {
        for c in 0..3 {
            planes[c].data[i] = px[c] as f64;
        }
    }
    planes
}

/// Recombines planes into an 8-bit frame, rounding and clamping to [0, 255].
pub fn frame_from_planes(planes: &[Plane; 3]) -> Frame {
    let (w, h) = planes[0].dims();
    let mut raw = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        for plane in planes {
            raw.push(quantize(plane.data[i]));
        }
    }
    Frame::from_raw(w as u32, h as u32, raw).expect("buffer sized from planes")
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    // round half up; `f64::round` is an out-of-line call on baseline x86-64
    (v.clamp(0.0, 255.0) + 0.5) as u8
}

/// Rec. 601 luma in [0, 255].
pub fn luma(frame: &Frame) -> Plane {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let data = frame
        .as_raw()
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect();
    Plane { width: w, height: h, data }
}

pub fn luma_from_planes(planes: &[Plane; 3]) -> Plane {
    let (w, h) = planes[0].dims();
    let data = (0..w * h)
        .map(|i| 0.299 * planes[0].data[i] + 0.587 * planes[1].data[i] + 0.114 * planes[2].data[i])
        .collect();
    Plane { width: w, height: h, data }
}

/// Mirror index into `[0, n)` without repeating the edge sample
/// (`-1 → 1`, `n → n-2`).
#[inline]
pub fn reflect101(i: isize, n: usize) -> usize {
    let n = n as isize;
    if n == 1 {
        return 0;
    }
    let period = 2 * (n - 1);
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

/// Separable convolution with a symmetric odd-length kernel, reflected borders.
pub fn convolve_separable(src: &Plane, kernel: &[f64]) -> Plane {
    let r = (kernel.len() / 2) as isize;
    let (w, h) = src.dims();
    let mut tmp = Plane::new(w, h);
    for y in 0..h {
        let row = src.row(y);
        for x in 0..w {
            let mut acc = 0.0;
            for (k, kv) in kernel.iter().enumerate() {
                acc += kv * row[reflect101(x as isize + k as isize - r, w)];
            }
            tmp.data[y * w + x] = acc;
        }
    }
    let mut out = Plane::new(w, h);
    for y in 0..h {
        for (k, kv) in kernel.iter().enumerate() {
            let sy = reflect101(y as isize + k as isize - r, h);
            let src_row = &tmp.data[sy * w..(sy + 1) * w];
            let dst_row = &mut out.data[y * w..(y + 1) * w];
            for (d, s) in dst_row.iter_mut().zip(src_row) {
                *d += kv * s;
            }
        }
    }
    out
}

/// Normalized sampled Gaussian with radius `ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as isize;
    let k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

pub fn gaussian_blur(src: &Plane, sigma: f64) -> Plane {
    convolve_separable(src, &gaussian_kernel(sigma))
}
