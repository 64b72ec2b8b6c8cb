use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TILE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureKind {
    /// Uniform color.
    Flat([u8; 3]),
    /// Smooth value noise overlaid with random rectangles, from a seed.
    Noise(u64),
}

/// Infinite texture: a precomputed periodic tile, sampled bilinearly.
#[derive(Debug, Clone)]
pub struct Texture {
    kind: TextureKind,
    tile: Vec<[f32; 3]>,
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

impl Texture {
    pub fn new(kind: TextureKind) -> Texture {
        let tile = match kind {
            TextureKind::Flat(_) => Vec::new(),
            TextureKind::Noise(seed) => noise_tile(seed),
        };
        Texture { kind, tile }
    }

    pub fn kind(&self) -> TextureKind {
        self.kind
    }

    pub fn sample(&self, x: f64, y: f64) -> [f64; 3] {
        if let TextureKind::Flat(c) = self.kind {
            return c.map(f64::from);
        }
        let (fx, fy) = (x - 0.5, y - 0.5);
        let (x0, y0) = (fx.floor(), fy.floor());
        let (tx, ty) = (fx - x0, fy - y0);
        let wrap = |v: f64| (v as i64).rem_euclid(TILE as i64) as usize;
        let (xa, xb) = (wrap(x0), wrap(x0 + 1.0));
        let (ya, yb) = (wrap(y0), wrap(y0 + 1.0));
        let t = |x: usize, y: usize| self.tile[y * TILE + x];
        let (p00, p10, p01, p11) = (t(xa, ya), t(xb, ya), t(xa, yb), t(xb, yb));
        std::array::from_fn(|c| {
            let top = p00[c] as f64 * (1.0 - tx) + p10[c] as f64 * tx;
            let bot = p01[c] as f64 * (1.0 - tx) + p11[c] as f64 * tx;
            top * (1.0 - ty) + bot * ty
        })
    }
}

fn noise_tile(seed: u64) -> Vec<[f32; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = 64;
    let n = TILE / cell;
    let lattice: Vec<[f64; 3]> = (0..n * n)
        .map(|_| std::array::from_fn(|_| rng.random_range(50.0..200.0)))
        .collect();
    let mut tile = vec![[0f32; 3]; TILE * TILE];
    for y in 0..TILE {
        let (gy, ty) = (y / cell, smooth((y % cell) as f64 / cell as f64));
        for x in 0..TILE {
            let (gx, tx) = (x / cell, smooth((x % cell) as f64 / cell as f64));
            let l = |i: usize, j: usize| lattice[(j % n) * n + (i % n)];
            let (a, b, c, d) = (l(gx, gy), l(gx + 1, gy), l(gx, gy + 1), l(gx + 1, gy + 1));
            tile[y * TILE + x] = std::array::from_fn(|k| {
                let top = a[k] * (1.0 - tx) + b[k] * tx;
                let bot = c[k] * (1.0 - tx) + d[k] * tx;
                (top * (1.0 - ty) + bot * ty) as f32
            });
        }
    }
    for _ in 0..900 {
        let (x0, y0) = (rng.random_range(0..TILE), rng.random_range(0..TILE));
        let (w, h) = (rng.random_range(4..40), rng.random_range(4..40));
        let color: [f32; 3] = std::array::from_fn(|_| rng.random_range(0.0..255.0));
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                tile[(y % TILE) * TILE + (x % TILE)] = color;
            }
        }
    }
    tile
}
