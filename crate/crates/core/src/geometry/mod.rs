//! Homography algebra and estimation: DLT, Moving DLT, local/global
//! integration, warp fields and image warping onto a shared canvas.

mod dlt;
mod field;
mod warp;

pub use dlt::{
    build_design_rows, estimate_global_homography, estimate_local_homography, moving_dlt_weight,
    normalize_correspondences, DesignRows, DltSystem, WeightProfile,
};
pub use field::{
    build_warp_field, compensation_transform, integrate_homographies, integration_weight,
    rotation_angle, AxisOrientation, WarpField,
};
pub use warp::{compute_canvas, warp_image, CanvasExtent, ImageWarp, WarpMap, WarpedImage};

use nalgebra::Matrix3;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A point pair: `src` in the wide-angle image, `dst` in the fisheye image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub src: Point2,
    pub dst: Point2,
}

impl Correspondence {
    pub const fn new(src: Point2, dst: Point2) -> Self {
        Correspondence { src, dst }
    }
}

/// Relative determinant floor below which a matrix is treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

/// 3×3 projective transform, entries `h1..h9` in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: Matrix3<f64>,
}

impl Homography {
    pub fn identity() -> Self {
        Homography { m: Matrix3::identity() }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography {
            m: Matrix3::new(1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0),
        }
    }

    /// Wraps a matrix as-is after checking it is finite and invertible.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite homography entries".into()));
        }
        let norm = m.norm();
        if norm == 0.0 || (m.determinant() / norm.powi(3)).abs() < SINGULAR_EPS {
            return Err(Error::Degenerate("singular homography".into()));
        }
        Ok(Homography { m })
    }

    pub fn from_entries(h: [f64; 9]) -> Result<Self> {
        Self::from_matrix(Matrix3::from_row_slice(&h))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    /// Entries `h1..h9`, row-major.
    pub fn entries(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    /// Unit-Frobenius-norm representative.
    pub fn normalized(&self) -> Self {
        Homography { m: self.m / self.m.norm() }
    }

    /// Representative scaled so that the bottom-right entry is 1 (when nonzero).
    pub fn scaled_to_unit_h9(&self) -> Self {
        let h9 = self.m[(2, 2)];
        if h9.abs() > 1e-300 {
            Homography { m: self.m / h9 }
        } else {
            *self
        }
    }

    /// Maps a point; `None` when it lands on the line at infinity.
    #[inline]
    pub fn apply(&self, p: Point2) -> Option<Point2> {
        let q = self.map(p);
        q.is_finite().then_some(q)
    }

    /// Maps a point without checking the projective depth.
    #[inline]
    pub fn map(&self, p: Point2) -> Point2 {
        let m = &self.m;
        let w = m[(2, 0)] * p.x + m[(2, 1)] * p.y + m[(2, 2)];
        Point2 {
            x: (m[(0, 0)] * p.x + m[(0, 1)] * p.y + m[(0, 2)]) / w,
            y: (m[(1, 0)] * p.x + m[(1, 1)] * p.y + m[(1, 2)]) / w,
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .m
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("homography not invertible".into()))?;
        Homography::from_matrix(inv)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Homography) -> Homography {
        Homography { m: self.m * other.m }
    }

    /// Sign-and-scale-free comparison: max entry difference between the unit
    /// Frobenius representatives, taking the closer of the two signs.
    pub fn distance_up_to_scale(&self, other: &Homography) -> f64 {
        let a = self.m / self.m.norm();
        let b = other.m / other.m.norm();
        let plus = (a - b).abs().max();
        let minus = (a + b).abs().max();
        plus.min(minus)
    }

    /// Largest distance between the images of `points` under both transforms.
    pub fn max_reprojection_diff(&self, other: &Homography, points: &[Point2]) -> f64 {
        points
            .iter()
            .map(|p| self.map(*p).distance(&other.map(*p)))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_matrix_rejected() {
        let m = Matrix3::new(1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0);
        assert!(Homography::from_matrix(m).is_err());
    }

    #[test]
    fn translation_maps_points() {
        let h = Homography::translation(3.0, -2.0);
        assert_eq!(h.map(Point2::new(1.0, 1.0)), Point2::new(4.0, -1.0));
        let back = h.inverse().unwrap().map(Point2::new(4.0, -1.0));
        assert!(back.distance(&Point2::new(1.0, 1.0)) < 1e-12);
    }

    #[test]
    fn distance_up_to_scale_ignores_sign() {
        let h = Homography::translation(5.0, 1.0);
        let neg = Homography::from_matrix(-3.0 * h.matrix()).unwrap();
        assert!(h.distance_up_to_scale(&neg) < 1e-15);
    }
}
