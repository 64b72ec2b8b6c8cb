use crate::error::{Error, Result};
use crate::raster::{reflect101, Plane};

/// 5-tap binomial kernel.
pub const BINOMIAL: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PyramidKind {
    Gaussian,
    Laplacian,
}

/// Level 0 is full resolution; each further level halves (rounding up).
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub levels: Vec<Plane>,
    pub kind: PyramidKind,
}

impl Pyramid {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }
}

/// Default depth for a canvas: `floor(log2(min side)) - 2`, kept in `[2, 6]`.
pub fn default_levels(width: usize, height: usize) -> usize {
    let m = width.min(height).max(1);
    let l = (usize::BITS - 1 - m.leading_zeros()) as i64 - 2;
    l.clamp(2, 6) as usize
}

/// Largest depth an image of this size supports.
pub fn max_levels(width: usize, height: usize) -> usize {
    let m = width.min(height);
    if m == 0 {
        0
    } else {
        (usize::BITS - m.leading_zeros()) as usize
    }
}

fn check_levels(image: &Plane, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::param("pyramid needs at least one level"));
    }
    if levels > max_levels(image.width, image.height) {
        return Err(Error::param(format!(
            "{levels} pyramid levels do not fit a {}x{} image",
            image.width, image.height
        )));
    }
    Ok(())
}

/// Binomial blur at full resolution with reflected borders.
pub fn binomial_blur(src: &Plane) -> Plane {
    crate::raster::convolve_separable(src, &BINOMIAL)
}

/// Blur and keep every other sample in both directions.
pub fn downsample(src: &Plane) -> Plane {
    let (w, h) = src.dims();
    let (w2, h2) = (w.div_ceil(2), h.div_ceil(2));
    let mut tmp = Plane::new(w2, h);
    for y in 0..h {
        let row = src.row(y);
        let out = &mut tmp.data[y * w2..(y + 1) * w2];
        for (x2, o) in out.iter_mut().enumerate() {
            let c = 2 * x2;
            *o = if c >= 2 && c + 2 < w {
                let r = &row[c - 2..c + 3];
                BINOMIAL[0] * r[0] + BINOMIAL[1] * r[1] + BINOMIAL[2] * r[2] + BINOMIAL[3] * r[3] + BINOMIAL[4] * r[4]
            } else {
                BINOMIAL
                    .iter()
                    .enumerate()
                    .map(|(k, kv)| kv * row[reflect101(c as isize + k as isize - 2, w)])
                    .sum()
            };
        }
    }
    let mut out = Plane::new(w2, h2);
    for y2 in 0..h2 {
        let c = 2 * y2 as isize;
        let dst = &mut out.data[y2 * w2..(y2 + 1) * w2];
        for (k, kv) in BINOMIAL.iter().enumerate() {
            let sy = reflect101(c + k as isize - 2, h);
            for (d, s) in dst.iter_mut().zip(&tmp.data[sy * w2..(sy + 1) * w2]) {
                *d += kv * s;
            }
        }
    }
    out
}

/// Taps of the zero-insert-and-blur expansion along one axis of length `n`:
/// for each output index, the coarse samples it reads and their weights.
fn expand_taps(n: usize) -> Vec<Vec<(usize, f64)>> {
    (0..n)
        .map(|x| {
            let mut taps: Vec<(usize, f64)> = Vec::with_capacity(3);
            for (k, kv) in BINOMIAL.iter().enumerate() {
                let i = reflect101(x as isize + k as isize - 2, n);
                if i % 2 == 0 {
                    match taps.iter_mut().find(|t| t.0 == i / 2) {
                        Some(t) => t.1 += 2.0 * kv,
                        None => taps.push((i / 2, 2.0 * kv)),
                    }
                }
            }
            taps
        })
        .collect()
}

/// Expands `src` to `width × height` by zero insertion and blurring with
/// twice the kernel along each axis.
pub fn upsample(src: &Plane, width: usize, height: usize) -> Plane {
    let (w2, h2) = src.dims();
    debug_assert_eq!((w2, h2), (width.div_ceil(2), height.div_ceil(2)));
    let tx = expand_taps(width);
    let ty = expand_taps(height);
    let mut tmp = Plane::new(width, h2);
    for y in 0..h2 {
        let row = src.row(y);
        let out = &mut tmp.data[y * width..(y + 1) * width];
        for (x, (o, taps)) in out.iter_mut().zip(&tx).enumerate() {
            // interior: even outputs read three coarse samples, odd ones two
            *o = if x >= 2 && x + 2 < width {
                let i = x / 2;
                if x % 2 == 0 {
                    0.125 * row[i - 1] + 0.75 * row[i] + 0.125 * row[i + 1]
                } else {
                    0.5 * (row[i] + row[i + 1])
                }
            } else {
                taps.iter().map(|&(i, wt)| wt * row[i]).sum()
            };
        }
    }
    let mut out = Plane::new(width, height);
    for (y, taps) in ty.iter().enumerate() {
        let dst = &mut out.data[y * width..(y + 1) * width];
        for &(i, wt) in taps {
            for (d, s) in dst.iter_mut().zip(&tmp.data[i * width..(i + 1) * width]) {
                *d += wt * s;
            }
        }
    }
    out
}

pub fn build_gaussian_pyramid(image: &Plane, levels: usize) -> Result<Pyramid> {
    check_levels(image, levels)?;
    let mut out = Vec::with_capacity(levels);
    out.push(image.clone());
    for _ in 1..levels {
        let next = downsample(out.last().expect("nonempty"));
        out.push(next);
    }
    Ok(Pyramid {
        levels: out,
        kind: PyramidKind::Gaussian,
    })
}

/// Band-pass levels `G_k - up(G_{k+1})` with the last Gaussian level kept as
/// the residual.
pub fn build_laplacian_pyramid(image: &Plane, levels: usize) -> Result<Pyramid> {
    let mut out = build_gaussian_pyramid(image, levels)?.levels;
    for k in 0..levels - 1 {
        let (w, h) = out[k].dims();
        let up = upsample(&out[k + 1], w, h);
        for (b, u) in out[k].data.iter_mut().zip(&up.data) {
            *b -= u;
        }
    }
    Ok(Pyramid {
        levels: out,
        kind: PyramidKind::Laplacian,
    })
}

/// `Gw_k * la_k + (1 - Gw_k) * lb_k` per level, with `Gw` already built.
pub fn blend_with_weight_pyramid(lap_a: &Pyramid, lap_b: &Pyramid, weights: &Pyramid) -> Result<Pyramid> {
    let n = lap_a.level_count();
    if lap_b.level_count() != n || weights.level_count() != n {
        return Err(Error::param("pyramids differ in depth"));
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (la, lb, gw) = (&lap_a.levels[k], &lap_b.levels[k], &weights.levels[k]);
        if la.dims() != lb.dims() || la.dims() != gw.dims() {
            return Err(Error::param(format!("pyramid level {k} differs in size")));
        }
        let data = la
            .data
            .iter()
            .zip(&lb.data)
            .zip(&gw.data)
            .map(|((a, b), g)| g * a + (1.0 - g) * b)
            .collect();
        out.push(Plane {
            width: la.width,
            height: la.height,
            data,
        });
    }
    Ok(Pyramid {
        levels: out,
        kind: PyramidKind::Laplacian,
    })
}

pub fn blend_pyramids(lap_a: &Pyramid, lap_b: &Pyramid, weight: &Plane, levels: usize) -> Result<Pyramid> {
    if lap_a.level_count() != levels {
        return Err(Error::param("level count does not match the pyramids"));
    }
    if weight.dims() != lap_a.levels[0].dims() {
        return Err(Error::param("weight mask differs in size from the pyramids"));
    }
    let gw = build_gaussian_pyramid(weight, levels)?;
    blend_with_weight_pyramid(lap_a, lap_b, &gw)
}

/// Upsample-and-add from the coarsest level down. No clamping.
pub fn collapse_pyramid(lap: &Pyramid) -> Plane {
    let mut acc = lap.levels.last().expect("pyramid has levels").clone();
    for band in lap.levels.iter().rev().skip(1) {
        let mut up = upsample(&acc, band.width, band.height);
        for (u, b) in up.data.iter_mut().zip(&band.data) {
            *u += b;
        }
        acc = up;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_defaults() {
        assert_eq!(default_levels(640, 480), 6);
        assert_eq!(default_levels(100, 40), 3);
        assert_eq!(default_levels(8, 8), 2);
        assert_eq!(max_levels(8, 9), 4);
    }

    #[test]
    fn constant_is_a_fixed_point() {
        let p = Plane::filled(37, 21, 3.5);
        let g = build_gaussian_pyramid(&p, 4).unwrap();
        assert_eq!(g.levels[3].dims(), (5, 3));
        for l in &g.levels {
            assert!(l.data.iter().all(|&v| (v - 3.5).abs() < 1e-12));
        }
        let lp = build_laplacian_pyramid(&p, 4).unwrap();
        for l in &lp.levels[..3] {
            assert!(l.data.iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn single_level_is_the_input() {
        let p = Plane::from_fn(5, 4, |x, y| (x + 3 * y) as f64);
        assert_eq!(build_gaussian_pyramid(&p, 1).unwrap().levels, vec![p.clone()]);
        assert_eq!(collapse_pyramid(&build_laplacian_pyramid(&p, 1).unwrap()), p);
    }

    #[test]
    fn too_deep() {
        let p = Plane::new(7, 9);
        assert!(build_gaussian_pyramid(&p, 3).is_ok());
        assert!(build_gaussian_pyramid(&p, 4).is_err());
    }

    #[test]
    fn impulse_response() {
        let mut p = Plane::new(15, 15);
        p.set(6, 8, 1.0);
        let blurred = binomial_blur(&p);
        for dy in -2i32..=2 {
            for dx in -2i32..=2 {
                let want = BINOMIAL[(dx + 2) as usize] * BINOMIAL[(dy + 2) as usize];
                let got = blurred.get((6 + dx) as usize, (8 + dy) as usize);
                assert_eq!(got, want);
            }
        }
        let g1 = &build_gaussian_pyramid(&p, 2).unwrap().levels[1];
        assert_eq!(g1.get(3, 4), BINOMIAL[2] * BINOMIAL[2]);
        assert_eq!(g1.get(2, 3), BINOMIAL[0] * BINOMIAL[0]);
        assert_eq!(g1.get(4, 4), BINOMIAL[0] * BINOMIAL[2]);
    }

    #[test]
    fn upsample_of_constant_is_constant() {
        for (w, h) in [(9, 7), (8, 6), (3, 2)] {
            let c = Plane::filled(w / 2 + w % 2, h / 2 + h % 2, 2.0);
            let up = upsample(&c, w, h);
            assert!(up.data.iter().all(|&v| (v - 2.0).abs() < 1e-12), "{w}x{h}");
        }
    }
}
