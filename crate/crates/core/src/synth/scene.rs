use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{FisheyeLens, Texture, TextureKind};
use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Homography, Point2};
use crate::raster::{quantize, Frame, Mask};

/// A textured planar patch seen by camera A as the vertical strip
/// `x_min <= x < x_max`, and by the pinhole version of camera B through
/// `homography` (A pixel to B pixel).
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub texture: TextureKind,
    pub homography: Homography,
}

/// Textured square lying on the planes, moving in A coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MovingObject {
    /// Top-left corner at frame 0.
    pub origin: Point2,
    pub size: f64,
    pub velocity: (f64, f64),
    pub texture: TextureKind,
}

impl MovingObject {
    pub fn origin_at(&self, frame: usize) -> Point2 {
        Point2::new(
            self.origin.x + frame as f64 * self.velocity.0,
            self.origin.y + frame as f64 * self.velocity.1,
        )
    }

    fn contains(&self, p: Point2, frame: usize) -> bool {
        let o = self.origin_at(frame);
        p.x >= o.x && p.x < o.x + self.size && p.y >= o.y && p.y < o.y + self.size
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub planes: Vec<PlaneSpec>,
    pub fisheye_focal: f64,
    pub outlier_fraction: f64,
    pub noise_sigma: f64,
    /// Number of ground-truth correspondences to draw.
    pub correspondences: usize,
    /// Per-frame content translation used by sequence generation.
    pub motion: (f64, f64),
    pub object: Option<MovingObject>,
    pub seed: u64,
}

impl SceneSpec {
    /// One noise-textured plane seen through `h`.
    pub fn single_plane(width: usize, height: usize, h: Homography, fisheye_focal: f64) -> SceneSpec {
        SceneSpec {
            width,
            height,
            planes: vec![PlaneSpec {
                x_min: f64::NEG_INFINITY,
                x_max: f64::INFINITY,
                texture: TextureKind::Noise(1),
                homography: h,
            }],
            fisheye_focal,
            outlier_fraction: 0.0,
            noise_sigma: 0.0,
            correspondences: 200,
            motion: (0.0, 0.0),
            object: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.planes.is_empty() {
            return Err(Error::param("scene needs at least one plane"));
        }
        self.validate_entries()
    }

    /// Every check of [`SceneSpec::validate`] except the plane count.
    pub fn validate_entries(&self) -> Result<()> {
        if !(self.fisheye_focal > 0.0) {
            return Err(Error::param("fisheye focal length must be positive"));
        }
        if !(0.0..=1.0).contains(&self.outlier_fraction) {
            return Err(Error::param("outlier fraction must lie in [0, 1]"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::param("noise sigma must be finite and nonnegative"));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::param("frames must be at least 16x16"));
        }
        if self.planes.iter().any(|p| !(p.x_min < p.x_max)) {
            return Err(Error::param("plane strips need x_min < x_max"));
        }
        if let Some(o) = &self.object {
            if !(o.size > 0.0 && o.size.is_finite()) {
                return Err(Error::param("object size must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledCorrespondence {
    pub correspondence: Correspondence,
    /// `Some(plane index)` for inliers, `None` for outliers.
    pub plane: Option<usize>,
}

impl LabeledCorrespondence {
    pub fn is_inlier(&self) -> bool {
        self.plane.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub correspondences: Vec<LabeledCorrespondence>,
    /// A pixel to pinhole-B pixel, per plane.
    pub plane_homographies: Vec<Homography>,
    pub lens: FisheyeLens,
}

impl GroundTruth {
    pub fn inliers(&self) -> impl Iterator<Item = &LabeledCorrespondence> {
        self.correspondences.iter().filter(|c| c.is_inlier())
    }

    /// Noise-free image of an A point in the fisheye frame for a plane.
    pub fn project(&self, p: Point2, plane: usize) -> Option<Point2> {
        self.plane_homographies[plane].apply(p).map(|q| self.lens.distort(q))
    }
}

/// Renders frames of a scene. Textures are generated once.
#[derive(Debug, Clone)]
pub struct SceneRenderer {
    pub spec: SceneSpec,
    pub lens: FisheyeLens,
    textures: Vec<Texture>,
    object_texture: Option<Texture>,
    inverses: Vec<Homography>,
}

const SUBSAMPLES: [(f64, f64); 4] = [(-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25)];

impl SceneRenderer {
    pub fn new(spec: &SceneSpec) -> Result<SceneRenderer> {
        spec.validate()?;
        let inverses = spec
            .planes
            .iter()
            .map(|p| p.homography.inverse())
            .collect::<Result<Vec<_>>>()?;
        Ok(SceneRenderer {
            lens: FisheyeLens::centered(spec.fisheye_focal, spec.width, spec.height),
            textures: spec.planes.iter().map(|p| Texture::new(p.texture)).collect(),
            object_texture: spec.object.as_ref().map(|o| Texture::new(o.texture)),
            inverses,
            spec: spec.clone(),
        })
    }

    /// Plane index owning A point `p`: the strip containing it, else the
    /// nearest strip.
    pub fn plane_at(&self, p: Point2) -> usize {
        let gap = |s: &PlaneSpec| {
            if p.x < s.x_min {
                s.x_min - p.x
            } else if p.x >= s.x_max {
                p.x - s.x_max
            } else {
                0.0
            }
        };
        let mut best = (f64::INFINITY, 0);
        for (i, s) in self.spec.planes.iter().enumerate() {
            let g = gap(s);
            if g == 0.0 {
                return i;
            }
            if g < best.0 {
                best = (g, i);
            }
        }
        best.1
    }

    /// Scene point (in A coordinates) visible at pinhole-B point `q`, with
    /// its plane. Earlier planes occlude later ones.
    pub fn visible_from_b(&self, q: Point2) -> Option<(Point2, usize)> {
        let mut fallback: Option<(f64, Point2, usize)> = None;
        for (i, inv) in self.inverses.iter().enumerate() {
            let Some(p) = inv.apply(q) else { continue };
            let s = &self.spec.planes[i];
            if p.x >= s.x_min && p.x < s.x_max {
                return Some((p, i));
            }
            let g = if p.x < s.x_min { s.x_min - p.x } else { p.x - s.x_max };
            if fallback.is_none_or(|f| g < f.0) {
                fallback = Some((g, p, i));
            }
        }
        fallback.map(|(_, p, i)| (p, i))
    }

    fn shade(&self, p: Point2, plane: usize, frame: usize) -> [f64; 3] {
        if let (Some(obj), Some(tex)) = (&self.spec.object, &self.object_texture) {
            if obj.contains(p, frame) {
                let o = obj.origin_at(frame);
                return tex.sample(p.x - o.x, p.y - o.y);
            }
        }
        let (mx, my) = self.spec.motion;
        let k = frame as f64;
        self.textures[plane].sample(p.x - k * mx, p.y - k * my)
    }

    fn render(&self, mut color_at: impl FnMut(Point2) -> Option<[f64; 3]>) -> Frame {
        let (w, h) = (self.spec.width, self.spec.height);
        Frame::from_fn(w as u32, h as u32, |x, y| {
            let mut acc = [0.0; 3];
            for (dx, dy) in SUBSAMPLES {
                if let Some(c) = color_at(Point2::new(x as f64 + dx, y as f64 + dy)) {
                    for k in 0..3 {
                        acc[k] += c[k];
                    }
                }
            }
            image::Rgb(acc.map(|v| quantize(v / SUBSAMPLES.len() as f64)))
        })
    }

    pub fn render_a(&self, frame: usize) -> Frame {
        self.render(|p| Some(self.shade(p, self.plane_at(p), frame)))
    }

    pub fn render_b(&self, frame: usize) -> Frame {
        self.render(|d| {
            let q = self.lens.undistort(d)?;
            let (p, plane) = self.visible_from_b(q)?;
            Some(self.shade(p, plane, frame))
        })
    }

    /// Pixels of A covered by the moving object at `frame`.
    pub fn object_mask_a(&self, frame: usize) -> Mask {
        let (w, h) = (self.spec.width, self.spec.height);
        match &self.spec.object {
            None => Mask::new(w, h, false),
            Some(o) => Mask::from_fn(w, h, |x, y| o.contains(Point2::new(x as f64, y as f64), frame)),
        }
    }

    /// Pixels of the fisheye frame B covered by the moving object.
    pub fn object_mask_b(&self, frame: usize) -> Mask {
        let (w, h) = (self.spec.width, self.spec.height);
        match &self.spec.object {
            None => Mask::new(w, h, false),
            Some(o) => Mask::from_fn(w, h, |x, y| {
                self.lens
                    .undistort(Point2::new(x as f64, y as f64))
                    .and_then(|q| self.visible_from_b(q))
                    .is_some_and(|(p, _)| o.contains(p, frame))
            }),
        }
    }

    fn in_frame(&self, p: Point2, margin: f64) -> bool {
        p.x >= margin
            && p.y >= margin
            && p.x <= self.spec.width as f64 - 1.0 - margin
            && p.y <= self.spec.height as f64 - 1.0 - margin
    }

    pub fn ground_truth(&self) -> GroundTruth {
        let spec = &self.spec;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE)).expect("valid sigma");
        let n_out = (spec.outlier_fraction * spec.correspondences as f64).round() as usize;
        let n_in = spec.correspondences - n_out;
        let (w, h) = (spec.width as f64, spec.height as f64);
        let margin = 8.0;

        let mut inliers = Vec::with_capacity(n_in);
        let mut attempts = 0;
        while inliers.len() < n_in && attempts < 200 * spec.correspondences.max(1) {
            attempts += 1;
            let p = Point2::new(rng.random_range(margin..w - margin), rng.random_range(margin..h - margin));
            let plane = self.plane_at(p);
            let Some(q) = spec.planes[plane].homography.apply(p) else { continue };
            if self.visible_from_b(q).map(|v| v.1) != Some(plane) {
                continue;
            }
            let mut d = self.lens.distort(q);
            if !self.in_frame(d, margin) {
                continue;
            }
            if spec.noise_sigma > 0.0 {
                d = Point2::new(d.x + noise.sample(&mut rng), d.y + noise.sample(&mut rng));
            }
            inliers.push(LabeledCorrespondence {
                correspondence: Correspondence::new(p, d),
                plane: Some(plane),
            });
        }

        let mut outliers = Vec::with_capacity(n_out);
        while outliers.len() < n_out {
            let p = Point2::new(rng.random_range(margin..w - margin), rng.random_range(margin..h - margin));
            let truth = spec.planes[self.plane_at(p)]
                .homography
                .apply(p)
                .map(|q| self.lens.distort(q));
            let d = Point2::new(rng.random_range(margin..w - margin), rng.random_range(margin..h - margin));
            if truth.is_some_and(|t| t.distance(&d) < 20.0) {
                continue;
            }
            outliers.push(LabeledCorrespondence {
                correspondence: Correspondence::new(p, d),
                plane: None,
            });
        }

        let mut all = inliers;
        all.extend(outliers);
        GroundTruth {
            correspondences: all,
            plane_homographies: spec.planes.iter().map(|p| p.homography).collect(),
            lens: self.lens,
        }
    }
}

/// Frame A, fisheye frame B and the ground truth of a scene.
pub fn render_pair(spec: &SceneSpec) -> Result<(Frame, Frame, GroundTruth)> {
    let r = SceneRenderer::new(spec)?;
    Ok((r.render_a(0), r.render_b(0), r.ground_truth()))
}

#[derive(Debug, Clone)]
pub struct Sequence {
    pub frames_a: Vec<Frame>,
    pub frames_b: Vec<Frame>,
    pub truth: GroundTruth,
    /// Moving-object coverage of each A frame (empty masks without an object).
    pub object_masks_a: Vec<Mask>,
    pub object_masks_b: Vec<Mask>,
}

/// `frames` synchronized pairs with the scene content translated by
/// `motion` per frame while the rig stays fixed.
pub fn make_sequence(spec: &SceneSpec, motion: (f64, f64), frames: usize) -> Result<Sequence> {
    if frames == 0 {
        return Err(Error::param("a sequence needs at least one frame"));
    }
    let mut spec = spec.clone();
    spec.motion = motion;
    let r = SceneRenderer::new(&spec)?;
    Ok(Sequence {
        frames_a: (0..frames).map(|k| r.render_a(k)).collect(),
        frames_b: (0..frames).map(|k| r.render_b(k)).collect(),
        truth: r.ground_truth(),
        object_masks_a: (0..frames).map(|k| r.object_mask_a(k)).collect(),
        object_masks_b: (0..frames).map(|k| r.object_mask_b(k)).collect(),
    })
}
