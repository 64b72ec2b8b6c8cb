use std::f64::consts::{FRAC_PI_2, PI};

use super::{Correspondence, DltSystem, Homography, Point2, WeightProfile};
use crate::error::{Error, Result};

/// Linear ramp along the rotated u-axis, clamped to [0, 1].
pub fn integration_weight(u: f64, u_min: f64, u_max: f64) -> Result<f64> {
    if u_min == u_max {
        return Err(Error::DegenerateAxis);
    }
    if u_min > u_max {
        return Err(Error::param(format!("u_min {u_min} exceeds u_max {u_max}")));
    }
    Ok(((u - u_min) / (u_max - u_min)).clamp(0.0, 1.0))
}

/// Entrywise blend `w·H_l + (1−w)·H_g` of unit-norm, sign-aligned
/// representatives.
pub fn integrate_homographies(h_l: &Homography, h_g: &Homography, w: f64) -> Result<Homography> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::param(format!("integration weight {w} outside [0, 1]")));
    }
    let g = h_g.normalized();
    let mut l = *h_l.normalized().matrix();
    let g = g.matrix();
    let pivot = g.iamax_full();
    if l[pivot] * g[pivot] < 0.0 {
        l = -l;
    }
    let blended = l * w + g * (1.0 - w);
    Ok(Homography::from_matrix(blended)
        .map_err(|_| Error::DegenerateBlend)?
        .normalized())
}

/// Angle of the u-axis: `arctan(h8 / h7)` folded to (−π/2, π/2]; zero for an
/// affine homography.
pub fn rotation_angle(h_g: &Homography) -> f64 {
    let e = h_g.normalized().entries();
    let (h7, h8) = (e[6], e[7]);
    if h7.abs() < 1e-15 && h8.abs() < 1e-15 {
        return 0.0;
    }
    let mut theta = h8.atan2(h7);
    if theta > FRAC_PI_2 {
        theta -= PI;
    } else if theta <= -FRAC_PI_2 {
        theta += PI;
    }
    theta
}

/// `R = H · H_l⁻¹`, kept at the scale produced by the product.
pub fn compensation_transform(h: &Homography, h_l: &Homography) -> Result<Homography> {
    let inv = h_l
        .matrix()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("local homography is singular".into()))?;
    Homography::from_matrix(h.matrix() * inv)
}

/// Which end of the u-axis receives the local homography.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AxisOrientation {
    /// Orient u so that the integration weight is ≥ 0.5 at the inlier
    /// centroid: local homographies dominate the overlap, the global one the
    /// far side.
    #[default]
    TowardOverlap,
    /// Use the ramp exactly as computed along +u.
    AsWritten,
}

/// Per-cell homography table covering the wide-angle source image.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpField {
    integrated: Vec<Homography>,
    local: Vec<Homography>,
    weights: Vec<f64>,
    pub cols: usize,
    pub rows: usize,
    pub cell_size: usize,
    pub source_width: usize,
    pub source_height: usize,
    pub rotation_theta: f64,
    pub u_min: f64,
    pub u_max: f64,
    /// True when the u-axis was flipped by [`AxisOrientation::TowardOverlap`].
    pub reversed: bool,
    /// Cells whose local estimate failed and fell back to the global homography.
    pub fallback_cells: usize,
}

impl WarpField {
    /// Field with the same homography in every cell.
    pub fn constant(h: Homography, width: usize, height: usize, cell_size: usize) -> Self {
        let cell_size = cell_size.max(1);
        let cols = width.div_ceil(cell_size).max(1);
        let rows = height.div_ceil(cell_size).max(1);
        let n = cols * rows;
        WarpField {
            integrated: vec![h; n],
            local: vec![h; n],
            weights: vec![0.0; n],
            cols,
            rows,
            cell_size,
            source_width: width,
            source_height: height,
            rotation_theta: 0.0,
            u_min: 0.0,
            u_max: 1.0,
            reversed: false,
            fallback_cells: 0,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.integrated.len()
    }

    pub fn homography(&self, cell: usize) -> &Homography {
        &self.integrated[cell]
    }

    pub fn local_homography(&self, cell: usize) -> &Homography {
        &self.local[cell]
    }

    pub fn integration_weight(&self, cell: usize) -> f64 {
        self.weights[cell]
    }

    pub fn homographies(&self) -> &[Homography] {
        &self.integrated
    }

    /// Cell containing source point `p`, clamped to the grid.
    pub fn cell_at(&self, p: Point2) -> usize {
        let c = ((p.x.max(0.0) as usize) / self.cell_size).min(self.cols - 1);
        let r = ((p.y.max(0.0) as usize) / self.cell_size).min(self.rows - 1);
        r * self.cols + c
    }

    /// Source pixel range `[x0, x1) × [y0, y1)` of a cell.
    pub fn cell_rect(&self, cell: usize) -> (usize, usize, usize, usize) {
        let (r, c) = (cell / self.cols, cell % self.cols);
        let x0 = c * self.cell_size;
        let y0 = r * self.cell_size;
        (
            x0,
            y0,
            (x0 + self.cell_size).min(self.source_width),
            (y0 + self.cell_size).min(self.source_height),
        )
    }

    pub fn cell_center(&self, cell: usize) -> Point2 {
        let (x0, y0, x1, y1) = self.cell_rect(cell);
        Point2::new((x0 + x1 - 1) as f64 / 2.0, (y0 + y1 - 1) as f64 / 2.0)
    }

    /// Maps a source point with the homography of the cell that contains it.
    pub fn map(&self, p: Point2) -> Point2 {
        self.integrated[self.cell_at(p)].map(p)
    }
}

/// Builds the multi-homography warp field for a `width × height` source.
pub fn build_warp_field(
    extent: (usize, usize),
    inliers: &[Correspondence],
    h_g: &Homography,
    profile: &WeightProfile,
    cell_size: usize,
    orientation: AxisOrientation,
) -> Result<WarpField> {
    let (width, height) = extent;
    if width == 0 || height == 0 {
        return Err(Error::param("empty source extent"));
    }
    if cell_size == 0 {
        return Err(Error::param("cell_size must be positive"));
    }
    let system = DltSystem::new(inliers)?;

    let theta = rotation_angle(h_g);
    let (cos_t, sin_t) = (theta.cos(), theta.sin());
    let u_of = |p: Point2| {
        let q = h_g.map(p);
        q.x * cos_t + q.y * sin_t
    };

    let (mut u_min, mut u_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for y in 0..height {
        for x in 0..width {
            let u = u_of(Point2::new(x as f64, y as f64));
            if u.is_finite() {
                u_min = u_min.min(u);
                u_max = u_max.max(u);
            }
        }
    }
    if !(u_min.is_finite() && u_max.is_finite()) {
        return Err(Error::Degenerate("global homography maps the source to infinity".into()));
    }
    if u_max - u_min <= 1e-12 * u_max.abs().max(1.0) {
        return Err(Error::DegenerateAxis);
    }

    let reversed = match orientation {
        AxisOrientation::AsWritten => false,
        AxisOrientation::TowardOverlap => {
            let n = inliers.len() as f64;
            let (sx, sy) = inliers.iter().fold((0.0, 0.0), |(a, b), c| (a + c.src.x, b + c.src.y));
            integration_weight(u_of(Point2::new(sx / n, sy / n)), u_min, u_max)? < 0.5
        }
    };

    let mut field = WarpField::constant(*h_g, width, height, cell_size);
    field.rotation_theta = theta;
    field.u_min = u_min;
    field.u_max = u_max;
    field.reversed = reversed;

    for cell in 0..field.cell_count() {
        let center = field.cell_center(cell);
        let mut w = integration_weight(u_of(center), u_min, u_max).unwrap_or(0.0);
        if reversed {
            w = 1.0 - w;
        }
        let blended = system
            .solve_at(center, profile)
            .and_then(|h_l| integrate_homographies(&h_l, h_g, w).map(|h| (h_l, h)));
        match blended {
            Ok((h_l, h)) => {
                field.local[cell] = h_l;
                field.integrated[cell] = h;
                field.weights[cell] = w;
            }
            Err(_) => field.fallback_cells += 1,
        }
    }
    Ok(field)
}
