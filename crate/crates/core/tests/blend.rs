use std::collections::VecDeque;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vidstitch::blend::{
    blend_pyramids, build_gaussian_pyramid, build_laplacian_pyramid, collapse_pyramid, seam_to_weight_mask, Blender,
    WeightMask,
};
use vidstitch::geometry::{CanvasExtent, Point2, WarpedImage};
use vidstitch::raster::{quantize, Mask, Plane};
use vidstitch::seam::{compute_overlap_masks, find_seam, CostField, Seam, SeamOrientation};

fn noise(w: usize, h: usize, seed: u64, scale: f64) -> Plane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Plane::from_fn(w, h, |_, _| rng.random::<f64>() * scale)
}

fn canvas(w: usize, h: usize) -> CanvasExtent {
    CanvasExtent {
        offset: Point2::new(0.0, 0.0),
        width: w,
        height: h,
    }
}

fn random_seam(w: usize, h: usize, orientation: SeamOrientation, seed: u64) -> Seam {
    let m = Mask::new(w, h, true);
    let r = compute_overlap_masks(&m, &m, Some(orientation)).unwrap();
    let (gw, gh) = r.grid_dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (rng.random_range(0..gw), rng.random_range(0..gw));
    let r = r.with_anchor_columns(a, b).unwrap();
    let e = Plane::from_fn(gw, gh, |_, _| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(1.0..50.0) });
    find_seam(&CostField::from_raw(e, r.grid_mask()).unwrap(), &r).unwrap()
}

#[test]
fn laplacian_round_trip_on_noise() {
    for (w, h, levels) in [(64, 48, 4), (81, 37, 5), (640, 480, 6)] {
        let img = noise(w, h, (w * h) as u64, 255.0);
        let back = collapse_pyramid(&build_laplacian_pyramid(&img, levels).unwrap());
        assert!(back.max_abs_diff(&img) < 1e-6, "{w}x{h}");
        let q: Vec<u8> = img.data.iter().map(|&v| quantize(v)).collect();
        let bq: Vec<u8> = back.data.iter().map(|&v| quantize(v)).collect();
        assert!(q.iter().zip(&bq).all(|(a, b)| a.abs_diff(*b) <= 1));
    }
}

#[test]
fn all_ones_weight_keeps_a() {
    let a = build_laplacian_pyramid(&noise(30, 20, 1, 10.0), 3).unwrap();
    let b = build_laplacian_pyramid(&noise(30, 20, 2, 10.0), 3).unwrap();
    let out = blend_pyramids(&a, &b, &Plane::filled(30, 20, 1.0), 3).unwrap();
    assert_eq!(out.levels, a.levels);
}

#[test]
fn zeros_collapse_to_zero() {
    let z = build_laplacian_pyramid(&Plane::new(17, 12), 3).unwrap();
    assert!(collapse_pyramid(&z).data.iter().all(|&v| v == 0.0));
}

/// First-side pixels by 4-connected flood fill from the canvas edge before
/// the seam, never stepping onto seam pixels.
fn flood_first_side(seam: &Seam, w: usize, h: usize) -> Vec<bool> {
    let mut blocked = vec![false; w * h];
    for &(x, y) in &seam.path {
        blocked[y * w + x] = true;
    }
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    let starts: Vec<(usize, usize)> = match seam.orientation {
        SeamOrientation::Vertical => (0..h).map(|y| (0, y)).collect(),
        SeamOrientation::Horizontal => (0..w).map(|x| (x, 0)).collect(),
    };
    for (x, y) in starts {
        if !blocked[y * w + x] && !seen[y * w + x] {
            seen[y * w + x] = true;
            queue.push_back((x, y));
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let mut push = |nx: usize, ny: usize| {
            let i = ny * w + nx;
            if !blocked[i] && !seen[i] {
                seen[i] = true;
                queue.push_back((nx, ny));
            }
        };
        if x > 0 {
            push(x - 1, y);
        }
        if x + 1 < w {
            push(x + 1, y);
        }
        if y > 0 {
            push(x, y - 1);
        }
        if y + 1 < h {
            push(x, y + 1);
        }
    }
    seen
}

#[test]
fn snaking_seams_match_flood_fill() {
    for seed in 0..60 {
        let (w, h) = (14 + (seed as usize % 5), 11 + (seed as usize % 7));
        let orientation = if seed % 2 == 0 { SeamOrientation::Vertical } else { SeamOrientation::Horizontal };
        let seam = random_seam(w, h, orientation, seed);
        let m = Mask::new(w, h, true);
        let wm = seam_to_weight_mask(&seam, &canvas(w, h), &m, &m, true);
        let oracle = flood_first_side(&seam, w, h);
        for i in 0..w * h {
            assert_eq!(wm.w.data[i] == 1.0, oracle[i], "seed {seed} pixel {i}");
        }
    }
}

fn warped(planes: [Plane; 3], mask: Mask) -> WarpedImage {
    WarpedImage { planes, mask }
}

fn rgb(w: usize, h: usize, seed: u64) -> [Plane; 3] {
    [noise(w, h, seed, 255.0), noise(w, h, seed + 1, 255.0), noise(w, h, seed + 2, 255.0)]
}

#[test]
fn identical_inputs_are_reproduced_for_any_seam() {
    let (w, h) = (48, 40);
    let m = Mask::new(w, h, true);
    let img = warped(rgb(w, h, 11), m.clone());
    let blender = Blender::new(&m, &m, 4).unwrap();
    for seed in 0..10 {
        let seam = random_seam(w, h, SeamOrientation::Vertical, seed);
        let wm = seam_to_weight_mask(&seam, &canvas(w, h), &m, &m, true);
        let out = blender.blend(&img, &img, &wm).unwrap();
        for c in 0..3 {
            assert!(out[c].max_abs_diff(&img.planes[c]) < 1e-9);
        }
    }
}

#[test]
fn complement_symmetry_on_random_seams() {
    let (w, h) = (50, 36);
    let ma = Mask::from_fn(w, h, |x, _| x < 38);
    let mb = Mask::from_fn(w, h, |x, y| x >= 10 && y > 1);
    let a = warped(rgb(w, h, 21), ma.clone());
    let b = warped(rgb(w, h, 31), mb.clone());
    let forward = Blender::new(&ma, &mb, 4).unwrap();
    let backward = Blender::new(&mb, &ma, 4).unwrap();
    for seed in 0..10 {
        let seam = random_seam(w, h, SeamOrientation::Vertical, seed);
        let wm = seam_to_weight_mask(&seam, &canvas(w, h), &ma, &mb, true);
        let x = forward.blend(&a, &b, &wm).unwrap();
        let y = backward.blend(&b, &a, &wm.complement()).unwrap();
        for c in 0..3 {
            let d = x[c].max_abs_diff(&y[c]);
            assert!(d < 1e-9, "seed {seed}: channel {c} differs by {d}");
        }
    }
}

#[test]
fn constant_step_profile_widens_with_depth() {
    let (w, h) = (128, 64);
    let m = Mask::new(w, h, true);
    let white = warped([Plane::filled(w, h, 255.0), Plane::filled(w, h, 255.0), Plane::filled(w, h, 255.0)], m.clone());
    let black = warped([Plane::new(w, h), Plane::new(w, h), Plane::new(w, h)], m.clone());
    let seam = Seam {
        path: (0..h).map(|y| (64, y)).collect(),
        orientation: SeamOrientation::Vertical,
        cost: 0.0,
    };
    let wm = seam_to_weight_mask(&seam, &canvas(w, h), &m, &m, true);
    let mut last_width = 0;
    for levels in 1..=6 {
        let out = Blender::new(&m, &m, levels).unwrap().blend(&white, &black, &wm).unwrap();
        let row = out[0].row(h / 2);
        assert!(row.windows(2).all(|p| p[1] <= p[0] + 1e-9), "levels {levels}");
        let width = row.iter().filter(|&&v| v > 0.5 && v < 254.5).count();
        if levels > 1 {
            assert!(width > last_width, "levels {levels}: {width} <= {last_width}");
        }
        last_width = width;
    }
}

#[test]
fn weight_mask_complement_is_exact() {
    let w = WeightMask { w: Plane::from_fn(20, 20, |x, _| if x < 7 { 1.0 } else { 0.0 }) };
    let g = build_gaussian_pyramid(&w.w, 4).unwrap();
    let gc = build_gaussian_pyramid(&w.complement().w, 4).unwrap();
    for (a, b) in g.levels.iter().zip(&gc.levels) {
        assert!(a.data.iter().zip(&b.data).all(|(x, y)| x + y == 1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blending_is_convex_per_level(seed in any::<u64>(), levels in 1usize..5) {
        let (w, h) = (33, 27);
        let la = build_laplacian_pyramid(&noise(w, h, seed, 255.0), levels).unwrap();
        let lb = build_laplacian_pyramid(&noise(w, h, seed ^ 0xABCD, 255.0), levels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..w);
        let weight = Plane::from_fn(w, h, |x, _| if x < k { 1.0 } else { 0.0 });
        let out = blend_pyramids(&la, &lb, &weight, levels).unwrap();
        for lvl in 0..levels {
            for i in 0..out.levels[lvl].data.len() {
                let (a, b) = (la.levels[lvl].data[i], lb.levels[lvl].data[i]);
                let v = out.levels[lvl].data[i];
                prop_assert!(v >= a.min(b) - 1e-9 && v <= a.max(b) + 1e-9);
            }
        }
    }

    #[test]
    fn round_trip_any_size(w in 1usize..40, h in 1usize..40, seed in any::<u64>()) {
        let img = noise(w, h, seed, 100.0);
        let levels = vidstitch::blend::max_levels(w, h);
        let back = collapse_pyramid(&build_laplacian_pyramid(&img, levels).unwrap());
        prop_assert!(back.max_abs_diff(&img) < 1e-9);
    }
}
