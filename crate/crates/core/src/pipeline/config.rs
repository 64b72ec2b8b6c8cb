use crate::error::{Error, Result};
use crate::geometry::{AxisOrientation, WeightProfile};
use crate::matching::{CornerDetector, SelectionParams};
use crate::seam::SeamOrientation;

/// Which alignment the model uses for image A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignMode {
    /// Integrated per-cell homographies with the fisheye side compensated.
    #[default]
    Multi,
    /// One global homography for A, fisheye side untouched.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StitchConfig {
    pub selection: SelectionParams,
    /// `None` derives the Moving DLT profile from the frame size.
    pub weight_profile: Option<WeightProfile>,
    pub cell_size: usize,
    /// Absolute seam penalty weight. `None` uses the per-frame default
    /// (mean cost over overlap width) times `lambda_scale`.
    pub lambda: Option<f64>,
    pub lambda_scale: f64,
    /// `None` picks the depth from the canvas size.
    pub pyramid_levels: Option<usize>,
    /// Re-estimate the alignment every this many frames; 0 aligns once.
    pub realign_interval: usize,
    /// Frames are resized to this before processing; `None` keeps them.
    pub input_size: Option<(usize, usize)>,
    pub seed: u64,
    pub ratio: f64,
    pub detector: CornerDetector,
    pub axis_orientation: AxisOrientation,
    /// `None` infers the seam direction from the image layout.
    pub seam_orientation: Option<SeamOrientation>,
    pub mode: AlignMode,
    pub max_canvas_area: u64,
}

impl Default for StitchConfig {
    fn default() -> Self {
        StitchConfig {
            selection: SelectionParams::default(),
            weight_profile: None,
            cell_size: 16,
            lambda: None,
            lambda_scale: 1.0,
            pyramid_levels: None,
            realign_interval: 0,
            input_size: Some((640, 480)),
            seed: 0,
            ratio: 0.8,
            detector: CornerDetector::default(),
            axis_orientation: AxisOrientation::default(),
            seam_orientation: None,
            mode: AlignMode::default(),
            max_canvas_area: 16 * 1024 * 1024,
        }
    }
}

impl StitchConfig {
    pub fn validate(&self) -> Result<()> {
        self.selection.validate()?;
        if self.cell_size == 0 {
            return Err(Error::param("cell_size must be positive"));
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(Error::param("lambda must be finite and nonnegative"));
            }
        }
        if !(self.lambda_scale >= 0.0 && self.lambda_scale.is_finite()) {
            return Err(Error::param("lambda_scale must be finite and nonnegative"));
        }
        if self.pyramid_levels == Some(0) {
            return Err(Error::param("pyramid_levels must be at least 1"));
        }
        if let Some((w, h)) = self.input_size {
            if w < 16 || h < 16 {
                return Err(Error::param("input_size must be at least 16x16"));
            }
        }
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return Err(Error::param("ratio must lie in (0, 1]"));
        }
        if self.max_canvas_area == 0 {
            return Err(Error::param("max_canvas_area must be positive"));
        }
        Ok(())
    }
}
