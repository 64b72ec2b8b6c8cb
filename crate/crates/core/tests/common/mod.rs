#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vidstitch::geometry::{Correspondence, Homography, Point2};
use vidstitch::raster::{Mask, Plane};
use vidstitch::seam::{compute_overlap_masks, OverlapRegion, SeamOrientation};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mild projective perturbation of a translation; keeps a 640x480 frame
/// well away from the horizon.
pub fn random_homography(rng: &mut ChaCha8Rng) -> Homography {
    let mut u = |s: f64| rng.random_range(-s..s);
    Homography::from_entries([
        1.0 + u(0.15),
        u(0.15),
        u(60.0),
        u(0.15),
        1.0 + u(0.15),
        u(60.0),
        u(2e-4),
        u(2e-4),
        1.0,
    ])
    .unwrap()
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, w: f64, h: f64) -> Vec<Point2> {
    (0..n)
        .map(|_| Point2::new(rng.random_range(0.0..w), rng.random_range(0.0..h)))
        .collect()
}

/// Correspondences `p -> H p` with Gaussian noise of `sigma` on the target.
pub fn mapped(rng: &mut ChaCha8Rng, h: &Homography, points: &[Point2], sigma: f64) -> Vec<Correspondence> {
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    points
        .iter()
        .map(|&p| {
            let q = h.map(p);
            let q = if sigma > 0.0 {
                Point2::new(q.x + noise.sample(rng), q.y + noise.sample(rng))
            } else {
                q
            };
            Correspondence::new(p, q)
        })
        .collect()
}

/// Mean and max forward reprojection error of `est` against `truth`.
pub fn reprojection(est: &Homography, truth: &Homography, points: &[Point2]) -> (f64, f64) {
    let errs: Vec<f64> = points.iter().map(|&p| est.map(p).distance(&truth.map(p))).collect();
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    (mean, errs.iter().copied().fold(0.0, f64::max))
}

pub fn psnr(a: &[f64], b: &[f64]) -> f64 {
    let mse = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64;
    10.0 * (255.0f64 * 255.0 / mse).log10()
}

/// Planar scene with half of its pairs gross outliers, run through
/// hypothesis generation and selection. Returns (inlier recall, gross
/// outliers selected).
pub fn planted_outlier_trial(seed: u64, params: &vidstitch::matching::SelectionParams) -> (f64, usize) {
    use vidstitch::matching::robust_inliers;
    use vidstitch::synth::{render_pair, SceneSpec};
    let mut r = rng(1000 + seed);
    let mut spec = SceneSpec::single_plane(320, 240, random_homography(&mut r), 1e7);
    spec.outlier_fraction = 0.5;
    spec.noise_sigma = 0.3;
    spec.correspondences = 200;
    spec.seed = seed;
    let (_, _, truth) = render_pair(&spec).unwrap();
    let matches: Vec<Correspondence> = truth.correspondences.iter().map(|c| c.correspondence).collect();
    let selected = robust_inliers(&matches, params, seed).unwrap();
    let is_selected = |c: &Correspondence| selected.iter().any(|s| s == c);
    let inliers: Vec<_> = truth.inliers().collect();
    let found = inliers.iter().filter(|c| is_selected(&c.correspondence)).count();
    let gross = truth
        .correspondences
        .iter()
        .filter(|c| !c.is_inlier() && is_selected(&c.correspondence))
        .count();
    (found as f64 / inliers.len() as f64, gross)
}

/// Vertical-seam region over `mask` with anchors at the given columns.
pub fn region(mask: &Mask, top: usize, bottom: usize) -> Option<OverlapRegion> {
    compute_overlap_masks(mask, mask, Some(SeamOrientation::Vertical))
        .ok()?
        .with_anchor_columns(top, bottom)
        .ok()
}

/// Cheapest simple path from `(a, 0)` to `(b, h-1)` using down-left, down,
/// down-right, left and right moves, by depth-first enumeration of every
/// path (branches whose partial cost already reaches the best are cut).
pub fn brute_force(e: &Plane, a: usize, b: usize) -> f64 {
    let (w, h) = e.dims();
    let mut best = f64::INFINITY;
    // `acc` includes the cost of the entry pixel (c, r).
    fn row(e: &Plane, w: usize, h: usize, b: usize, r: usize, c: usize, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        // walk left, right or stay, then step down or finish
        let mut exits = vec![(c, acc)];
        let mut s = acc;
        for x in (0..c).rev() {
            s += e.get(x, r);
            exits.push((x, s));
        }
        s = acc;
        for x in c + 1..w {
            s += e.get(x, r);
            exits.push((x, s));
        }
        for (x, cost) in exits {
            if !cost.is_finite() {
                continue;
            }
            if r == h - 1 {
                if x == b && cost < *best {
                    *best = cost;
                }
                continue;
            }
            for dx in [-1isize, 0, 1] {
                let nx = x as isize + dx;
                if nx < 0 || nx as usize >= w {
                    continue;
                }
                let v = e.get(nx as usize, r + 1);
                if v.is_finite() {
                    row(e, w, h, b, r + 1, nx as usize, cost + v, best);
                }
            }
        }
    }
    if e.get(a, 0).is_finite() {
        row(e, w, h, b, 0, a, e.get(a, 0), &mut best);
    }
    best
}
