use std::cell::Cell;

use vidstitch::geometry::{Correspondence, Homography, Point2};
use vidstitch::pipeline::{
    align, overlap_rmse, run, run_with, stitch_frame, AlignmentModel, FrameState, StitchConfig, StitchedFrame,
};
use vidstitch::raster::{Frame, Mask};
use vidstitch::synth::{make_sequence, render_pair, MovingObject, SceneSpec, TextureKind};
use vidstitch::Error;

fn shift(tx: f64) -> Homography {
    Homography::from_entries([1.0, 0.0, tx, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap()
}

/// Small scene at native size so nothing is resized.
fn small_scene() -> (SceneSpec, StitchConfig) {
    let mut spec = SceneSpec::single_plane(320, 240, shift(-150.0), 1500.0);
    spec.planes[0].texture = TextureKind::Noise(3);
    let config = StitchConfig {
        input_size: None,
        ..Default::default()
    };
    (spec, config)
}

fn collect(frames: &mut Vec<StitchedFrame>) -> impl FnMut(&StitchedFrame) -> vidstitch::Result<()> + '_ {
    move |f| {
        frames.push(f.clone());
        Ok(())
    }
}

#[test]
fn identity_model_on_identical_inputs_returns_the_input() {
    let (spec, config) = small_scene();
    let (a, _, _) = render_pair(&spec).unwrap();
    let model = AlignmentModel::identity(320, 240, &config).unwrap();
    let (out, state) = stitch_frame(&a, &a, &model, &FrameState::default(), &config).unwrap();
    assert_eq!(out, a);
    assert!(state.prev_seam.is_some());
}

#[test]
fn static_pair_repeated_gives_identical_frames_and_seams() {
    let (spec, config) = small_scene();
    let (a, b, _) = render_pair(&spec).unwrap();
    let model = align(&a, &b, &config).unwrap();
    let (out0, s0) = stitch_frame(&a, &b, &model, &FrameState::default(), &config).unwrap();
    let (out1, s1) = stitch_frame(&a, &b, &model, &s0, &config).unwrap();
    let (out2, s2) = stitch_frame(&a, &b, &model, &s1, &config).unwrap();
    assert_eq!(out0, out1);
    assert_eq!(out1, out2);
    assert_eq!(s0.prev_seam, s1.prev_seam);
    assert_eq!(s1.prev_seam, s2.prev_seam);
    assert_eq!(s1.seam_displacement, Some(0.0));
    assert!(s1.lambda > 0.0);
}

#[test]
fn self_alignment_is_near_identity() {
    let (spec, config) = small_scene();
    let (a, _, _) = render_pair(&spec).unwrap();
    let model = align(&a, &a, &config).unwrap();
    let mut worst: f64 = 0.0;
    for y in (0..240).step_by(8) {
        for x in (0..320).step_by(8) {
            let p = Point2::new(x as f64, y as f64);
            worst = worst.max(model.canvas_point_a(p).distance(&model.canvas_point_b(p)));
            worst = worst.max(model.field_a.map(p).distance(&p));
        }
    }
    assert!(worst < 0.5, "max deviation {worst}");
}

#[test]
fn planar_pair_aligns_to_subpixel_rmse() {
    let (spec, config) = small_scene();
    let (a, b, truth) = render_pair(&spec).unwrap();
    let model = align(&a, &b, &config).unwrap();
    let pairs: Vec<Correspondence> = truth.inliers().map(|c| c.correspondence).collect();
    let (rmse, n) = overlap_rmse(&model, &pairs);
    assert!(n >= 50, "only {n} pairs in the overlap");
    assert!(rmse < 1.0, "rmse {rmse}");
}

#[test]
fn featureless_frames_fail_to_align() {
    let flat = Frame::from_pixel(160, 120, image::Rgb([90, 120, 150]));
    let config = StitchConfig {
        input_size: None,
        ..Default::default()
    };
    assert!(matches!(align(&flat, &flat, &config), Err(Error::AlignmentFailed(_))));
}

#[test]
fn align_once_without_realign_interval() {
    let (spec, config) = small_scene();
    let seq = make_sequence(&spec, (0.0, 0.0), 10).unwrap();
    let calls = Cell::new(0);
    let mut frames = Vec::new();
    let stats = run_with(
        &seq.frames_a,
        &seq.frames_b,
        &config,
        |_, a, b| {
            calls.set(calls.get() + 1);
            align(a, b, &config)
        },
        collect(&mut frames),
    )
    .unwrap();
    assert_eq!(calls.get(), 1);
    assert_eq!(stats.alignments_attempted, 1);
    assert_eq!(stats.frames_stitched, 10);
    assert_eq!(frames.iter().map(|f| f.index).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());
    // static scene: every seam equals the first one
    assert!(frames.iter().all(|f| f.seam == frames[0].seam));
    assert!(frames.iter().all(|f| f.frame == frames[0].frame));
    assert_eq!(stats.mean_seam_displacement, 0.0);
}

#[test]
fn realign_interval_schedules_alignments() {
    let (spec, mut config) = small_scene();
    config.realign_interval = 5;
    let seq = make_sequence(&spec, (0.0, 0.0), 10).unwrap();
    let model = align(&seq.frames_a[0], &seq.frames_b[0], &config).unwrap();
    let seen = std::cell::RefCell::new(Vec::new());
    let stats = run_with(
        &seq.frames_a,
        &seq.frames_b,
        &config,
        |i, _, _| {
            seen.borrow_mut().push(i);
            Ok(model.clone())
        },
        |_| Ok(()),
    )
    .unwrap();
    assert_eq!(*seen.borrow(), vec![0, 5]);
    assert_eq!(stats.alignment_frames, vec![0, 5]);
}

#[test]
fn failed_realignment_keeps_the_previous_model() {
    let (spec, mut config) = small_scene();
    config.realign_interval = 5;
    let seq = make_sequence(&spec, (0.0, 0.0), 10).unwrap();
    let model = align(&seq.frames_a[0], &seq.frames_b[0], &config).unwrap();
    let mut frames = Vec::new();
    let stats = run_with(
        &seq.frames_a,
        &seq.frames_b,
        &config,
        |i, _, _| {
            if i == 5 {
                Err(Error::AlignmentFailed(Box::new(Error::NoInliers)))
            } else {
                Ok(model.clone())
            }
        },
        collect(&mut frames),
    )
    .unwrap();
    assert_eq!(stats.frames_stitched, 10);
    assert_eq!(stats.alignments_failed, 1);
    assert_eq!(stats.failed_alignment_frames, vec![5]);
    assert!(frames.iter().all(|f| f.model_frame == 0));
    assert!(stats.report(false).contains("alignments_failed=1\n"));
}

#[test]
fn failure_at_the_first_frame_is_fatal() {
    let (spec, config) = small_scene();
    let seq = make_sequence(&spec, (0.0, 0.0), 3).unwrap();
    let r = run_with(
        &seq.frames_a,
        &seq.frames_b,
        &config,
        |_, _, _| Err(Error::NoInliers),
        |_| Ok(()),
    );
    assert!(matches!(r, Err(Error::AlignmentFailed(_))));
}

#[test]
fn mismatched_lengths_truncate_with_warning() {
    let (spec, config) = small_scene();
    let seq = make_sequence(&spec, (0.0, 0.0), 4).unwrap();
    let stats = run(&seq.frames_a[..4], &seq.frames_b[..2], &config, |_| Ok(())).unwrap();
    assert_eq!(stats.frames_stitched, 2);
    assert!(stats.truncated);
    assert!(stats.report(false).contains("warning="));
}

#[test]
fn report_without_timing_is_reproducible() {
    let (spec, config) = small_scene();
    let seq = make_sequence(&spec, (1.0, 0.0), 3).unwrap();
    let r1 = run(&seq.frames_a, &seq.frames_b, &config, |_| Ok(())).unwrap();
    let r2 = run(&seq.frames_a, &seq.frames_b, &config, |_| Ok(())).unwrap();
    assert_eq!(r1.report(false), r2.report(false));
    assert!(!r1.report(false).contains("_ms_"));
    assert!(r1.report(true).contains("blend_ms_p95="));
}

fn eroded(m: &Mask, r: usize) -> Mask {
    Mask::from_fn(m.width, m.height, |x, y| {
        x >= r
            && y >= r
            && x + r < m.width
            && y + r < m.height
            && (y - r..=y + r).all(|yy| (x - r..=x + r).all(|xx| m.get(xx, yy)))
    })
}

#[test]
fn seam_steers_around_a_moving_square() {
    let (w, h) = (240, 200);
    let mut spec = SceneSpec::single_plane(w, h, Homography::identity(), 1e7);
    spec.planes[0].texture = TextureKind::Flat([120, 120, 120]);
    spec.object = Some(MovingObject {
        origin: Point2::new(40.0, 70.0),
        size: 48.0,
        velocity: (10.0, 0.0),
        texture: TextureKind::Noise(9),
    });
    let seq = make_sequence(&spec, (0.0, 0.0), 14).unwrap();
    let config = StitchConfig {
        input_size: None,
        ..Default::default()
    };
    let model = AlignmentModel::identity(w, h, &config).unwrap();
    let mut frames = Vec::new();
    run_with(&seq.frames_a, &seq.frames_a, &config, |_, _, _| Ok(model.clone()), collect(&mut frames)).unwrap();
    let mut crossed_center = false;
    for f in &frames {
        let interior = eroded(&seq.object_masks_a[f.index], 2);
        for &(x, y) in &f.seam.path {
            assert!(!interior.get(x, y), "frame {}: seam enters the square at ({x}, {y})", f.index);
        }
        let o = spec.object.as_ref().unwrap().origin_at(f.index);
        crossed_center |= o.x < (w / 2) as f64 && o.x + 48.0 > (w / 2) as f64;
    }
    assert!(crossed_center, "the square never reached the default seam column");
}
