use image::imageops::{resize, FilterType};

use super::{AlignMode, StitchConfig};
use crate::blend::{default_levels, max_levels, Blender};
use crate::error::{Error, Result};
use crate::geometry::{
    build_warp_field, compensation_transform, compute_canvas, estimate_global_homography, CanvasExtent,
    Correspondence, Homography, Point2, WarpField, WarpMap, WeightProfile,
};
use crate::matching::{match_descriptors, robust_inliers, FeatureDetector};
use crate::raster::Frame;
use crate::seam::{compute_overlap_masks, OverlapRegion};

/// Counts and residuals recorded when a model is estimated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlignmentDiagnostics {
    pub keypoints_a: usize,
    pub keypoints_b: usize,
    pub matches: usize,
    pub inliers: usize,
    /// Mean and maximum transfer error of the inliers under the global
    /// homography, in pixels.
    pub mean_residual: f64,
    pub max_residual: f64,
    pub fallback_cells: usize,
}

/// Everything the per-frame path needs from an alignment: the warps, the
/// canvas, and per-canvas caches (resampling maps, overlap, blender).
#[derive(Debug, Clone)]
pub struct AlignmentModel {
    pub field_a: WarpField,
    /// Warp applied to the fisheye frame.
    pub warp_b: Homography,
    pub h_global: Homography,
    pub canvas: CanvasExtent,
    pub inliers: Vec<Correspondence>,
    pub diag: AlignmentDiagnostics,
    pub frame_estimated: usize,
    pub size_a: (usize, usize),
    pub size_b: (usize, usize),
    pub(crate) map_a: WarpMap,
    pub(crate) map_b: WarpMap,
    pub(crate) region: OverlapRegion,
    pub(crate) blender: Blender,
}

impl AlignmentModel {
    /// Assembles a model from explicit warps and builds its caches.
    pub fn from_warps(
        field_a: WarpField,
        warp_b: Homography,
        h_global: Homography,
        size_b: (usize, usize),
        config: &StitchConfig,
    ) -> Result<AlignmentModel> {
        let size_a = (field_a.source_width, field_a.source_height);
        let canvas = compute_canvas(size_a, &field_a, size_b, &warp_b, config.max_canvas_area)?;
        let map_a = WarpMap::from_field(&field_a, &canvas)?;
        let map_b = WarpMap::from_homography(&warp_b, size_b, &canvas)?;
        let region = compute_overlap_masks(map_a.mask(), map_b.mask(), config.seam_orientation)?;
        let levels = config
            .pyramid_levels
            .unwrap_or_else(|| default_levels(canvas.width, canvas.height))
            .min(max_levels(canvas.width, canvas.height));
        let blender = Blender::new(map_a.mask(), map_b.mask(), levels)?;
        Ok(AlignmentModel {
            field_a,
            warp_b,
            h_global,
            canvas,
            inliers: Vec::new(),
            diag: AlignmentDiagnostics::default(),
            frame_estimated: 0,
            size_a,
            size_b,
            map_a,
            map_b,
            region,
            blender,
        })
    }

    /// Both frames taken as already registered: A and B on the same canvas.
    pub fn identity(width: usize, height: usize, config: &StitchConfig) -> Result<AlignmentModel> {
        let field = WarpField::constant(Homography::identity(), width, height, config.cell_size);
        Self::from_warps(field, Homography::identity(), Homography::identity(), (width, height), config)
    }

    pub fn region(&self) -> &OverlapRegion {
        &self.region
    }

    pub fn pyramid_levels(&self) -> usize {
        self.blender.levels
    }

    /// Point of A in canvas coordinates.
    pub fn canvas_point_a(&self, p: Point2) -> Point2 {
        self.canvas.canvas_coord(self.field_a.map(p))
    }

    /// Point of B in canvas coordinates.
    pub fn canvas_point_b(&self, p: Point2) -> Point2 {
        self.canvas.canvas_coord(self.warp_b.map(p))
    }
}

/// Resizes a frame to the configured input size if it differs.
pub fn prepare_frame(frame: &Frame, config: &StitchConfig) -> Frame {
    match config.input_size {
        Some((w, h)) if (frame.width() as usize, frame.height() as usize) != (w, h) => {
            resize(frame, w as u32, h as u32, FilterType::Triangle)
        }
        _ => frame.clone(),
    }
}

fn failed(e: Error) -> Error {
    match e {
        Error::AlignmentFailed(_) => e,
        other => Error::AlignmentFailed(Box::new(other)),
    }
}

fn global_residuals(h: &Homography, inliers: &[Correspondence]) -> (f64, f64) {
    let errs: Vec<f64> = inliers
        .iter()
        .map(|c| h.apply(c.src).map_or(f64::INFINITY, |q| q.distance(&c.dst)))
        .collect();
    let max = errs.iter().copied().fold(0.0, f64::max);
    (errs.iter().sum::<f64>() / errs.len().max(1) as f64, max)
}

/// Alignment from putative matches (A to B, in prepared-frame pixels).
pub fn align_with_matches(
    size_a: (usize, usize),
    size_b: (usize, usize),
    matches: &[Correspondence],
    config: &StitchConfig,
) -> Result<AlignmentModel> {
    config.validate().map_err(failed)?;
    if matches.len() < 4 {
        return Err(failed(Error::InsufficientData {
            needed: 4,
            got: matches.len(),
        }));
    }
    let inliers = robust_inliers(matches, &config.selection, config.seed).map_err(failed)?;
    if inliers.len() < 4 {
        return Err(failed(Error::InsufficientData {
            needed: 4,
            got: inliers.len(),
        }));
    }
    let h_g = estimate_global_homography(&inliers).map_err(failed)?;

    let (field, warp_b) = match config.mode {
        AlignMode::Global => (
            WarpField::constant(h_g, size_a.0, size_a.1, config.cell_size),
            Homography::identity(),
        ),
        AlignMode::Multi => {
            let profile = config
                .weight_profile
                .unwrap_or_else(|| WeightProfile::for_extent(size_a.0, size_a.1));
            let field = build_warp_field(size_a, &inliers, &h_g, &profile, config.cell_size, config.axis_orientation)
                .map_err(failed)?;
            let n = inliers.len() as f64;
            let centroid = Point2::new(
                inliers.iter().map(|c| c.src.x).sum::<f64>() / n,
                inliers.iter().map(|c| c.src.y).sum::<f64>() / n,
            );
            let cell = field.cell_at(centroid);
            let r = compensation_transform(field.homography(cell), field.local_homography(cell)).map_err(failed)?;
            (field, r)
        }
    };
    let fallback_cells = field.fallback_cells;
    let mut model = AlignmentModel::from_warps(field, warp_b, h_g, size_b, config).map_err(failed)?;
    let (mean_residual, max_residual) = global_residuals(&h_g, &inliers);
    model.diag = AlignmentDiagnostics {
        keypoints_a: 0,
        keypoints_b: 0,
        matches: matches.len(),
        inliers: inliers.len(),
        mean_residual,
        max_residual,
        fallback_cells,
    };
    model.inliers = inliers;
    Ok(model)
}

/// Detect, match, select inliers and build the warps and canvas.
pub fn align(frame_a: &Frame, frame_b: &Frame, config: &StitchConfig) -> Result<AlignmentModel> {
    let a = prepare_frame(frame_a, config);
    let b = prepare_frame(frame_b, config);
    let ka = config.detector.detect(&a);
    let kb = config.detector.detect(&b);
    let matches = match_descriptors(&ka, &kb, config.ratio).correspondences();
    let size = |f: &Frame| (f.width() as usize, f.height() as usize);
    let mut model = align_with_matches(size(&a), size(&b), &matches, config)?;
    model.diag.keypoints_a = ka.len();
    model.diag.keypoints_b = kb.len();
    Ok(model)
}

/// Root-mean-square canvas distance between the two images' placements of
/// each ground-truth pair `(a, b)`. Pairs that leave either warp's canvas
/// footprint are skipped; returns the RMSE and how many pairs counted.
pub fn overlap_rmse(model: &AlignmentModel, pairs: &[Correspondence]) -> (f64, usize) {
    let inside = |p: Point2| {
        let (x, y) = (p.x.round(), p.y.round());
        x >= 0.0
            && y >= 0.0
            && (x as usize) < model.canvas.width
            && (y as usize) < model.canvas.height
            && model.region.mask.get(x as usize, y as usize)
    };
    let (mut sum, mut n) = (0.0, 0usize);
    for c in pairs {
        let (pa, pb) = (model.canvas_point_a(c.src), model.canvas_point_b(c.dst));
        if pa.x.is_finite() && pb.x.is_finite() && inside(pa) && inside(pb) {
            let d = pa.distance(&pb);
            sum += d * d;
            n += 1;
        }
    }
    if n == 0 {
        (f64::NAN, 0)
    } else {
        ((sum / n as f64).sqrt(), n)
    }
}
