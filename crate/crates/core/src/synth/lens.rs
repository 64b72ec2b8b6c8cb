use crate::geometry::Point2;

/// Equidistant fisheye: a ray at angle `θ` from the axis lands at radius
/// `f·θ` from the image center, against `f·tan θ` for a pinhole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisheyeLens {
    pub focal: f64,
    pub center: Point2,
}

impl FisheyeLens {
    pub fn centered(focal: f64, width: usize, height: usize) -> FisheyeLens {
        FisheyeLens {
            focal,
            center: Point2::new((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
        }
    }

    /// Pinhole image point to fisheye image point.
    pub fn distort(&self, p: Point2) -> Point2 {
        let (dx, dy) = (p.x - self.center.x, p.y - self.center.y);
        let r = dx.hypot(dy);
        if r == 0.0 {
            return p;
        }
        let s = self.focal * (r / self.focal).atan() / r;
        Point2::new(self.center.x + s * dx, self.center.y + s * dy)
    }

    /// Fisheye image point to pinhole image point; `None` past the 90° ray.
    pub fn undistort(&self, p: Point2) -> Option<Point2> {
        let (dx, dy) = (p.x - self.center.x, p.y - self.center.y);
        let r = dx.hypot(dy);
        if r == 0.0 {
            return Some(p);
        }
        let theta = r / self.focal;
        if theta >= std::f64::consts::FRAC_PI_2 - 1e-6 {
            return None;
        }
        let s = self.focal * theta.tan() / r;
        Some(Point2::new(self.center.x + s * dx, self.center.y + s * dy))
    }
}
