use nalgebra::{DMatrix, Matrix3};

use super::{Correspondence, Homography, Point2};
use crate::error::{Error, Result};

/// The two linearly independent rows of the cross-product linearization
/// `p' × H p = 0` for one correspondence.
pub type DesignRows = [[f64; 9]; 2];

pub fn build_design_rows(c: &Correspondence) -> DesignRows {
    let (x, y) = (c.src.x, c.src.y);
    let (xd, yd) = (c.dst.x, c.dst.y);
    [
        [0.0, 0.0, 0.0, -x, -y, -1.0, yd * x, yd * y, yd],
        [x, y, 1.0, 0.0, 0.0, 0.0, -xd * x, -xd * y, -xd],
    ]
}

/// Similarity that moves the centroid of `points` to the origin and scales
/// the mean distance to √2.
fn conditioning_transform(points: impl Iterator<Item = Point2> + Clone) -> Result<Homography> {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), p| (a + p.x, b + p.y));
    let (cx, cy) = (sx / n, sy / n);

    let mut mean_dist = 0.0;
    let (mut cxx, mut cxy, mut cyy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x - cx, p.y - cy);
        mean_dist += dx.hypot(dy);
        cxx += dx * dx;
        cxy += dx * dy;
        cyy += dy * dy;
    }
    mean_dist /= n;
    if !(mean_dist > 1e-12) {
        return Err(Error::Degenerate("coincident points".into()));
    }
    let half_trace = 0.5 * (cxx + cyy);
    let disc = (half_trace * half_trace - (cxx * cyy - cxy * cxy)).max(0.0).sqrt();
    let (l_max, l_min) = (half_trace + disc, half_trace - disc);
    if l_min <= 1e-10 * l_max {
        return Err(Error::Degenerate("collinear points".into()));
    }

    let s = std::f64::consts::SQRT_2 / mean_dist;
    Homography::from_matrix(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

/// Hartley conditioning of both sides of a correspondence set. Returns the
/// conditioned set together with the source and destination similarities.
pub fn normalize_correspondences(
    set: &[Correspondence],
) -> Result<(Vec<Correspondence>, Homography, Homography)> {
    if set.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: set.len() });
    }
    let t_src = conditioning_transform(set.iter().map(|c| c.src))?;
    let t_dst = conditioning_transform(set.iter().map(|c| c.dst))?;
    let out = set
        .iter()
        .map(|c| Correspondence::new(t_src.map(c.src), t_dst.map(c.dst)))
        .collect();
    Ok((out, t_src, t_dst))
}

/// Gaussian Moving DLT weight, floored at `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightProfile {
    pub sigma: f64,
    pub gamma: f64,
}

impl WeightProfile {
    pub fn new(sigma: f64, gamma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param(format!("sigma must be positive, got {sigma}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::param(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        Ok(WeightProfile { sigma, gamma })
    }

    /// Default profile for a source image: sigma at 8% of the diagonal.
    pub fn for_extent(width: usize, height: usize) -> Self {
        WeightProfile {
            sigma: 0.08 * (width as f64).hypot(height as f64),
            gamma: 0.01,
        }
    }
}

pub fn moving_dlt_weight(p_star: Point2, p_i: Point2, profile: &WeightProfile) -> f64 {
    let d2 = (p_star.x - p_i.x).powi(2) + (p_star.y - p_i.y).powi(2);
    (-d2 / (profile.sigma * profile.sigma)).exp().max(profile.gamma)
}

/// A conditioned DLT design matrix that can be solved repeatedly with
/// different per-correspondence weights.
#[derive(Debug, Clone)]
pub struct DltSystem {
    rows: Vec<[f64; 9]>,
    src: Vec<Point2>,
    t_src: Matrix3<f64>,
    t_dst_inv: Matrix3<f64>,
}

impl DltSystem {
    pub fn new(set: &[Correspondence]) -> Result<Self> {
        let (conditioned, t_src, t_dst) = normalize_correspondences(set)?;
        let mut rows = Vec::with_capacity(2 * set.len());
        for c in &conditioned {
            rows.extend(build_design_rows(c));
        }
        Ok(DltSystem {
            rows,
            src: set.iter().map(|c| c.src).collect(),
            t_src: *t_src.matrix(),
            t_dst_inv: *t_dst.inverse()?.matrix(),
        })
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    pub fn source_points(&self) -> &[Point2] {
        &self.src
    }

    /// Unweighted solve: `argmin ‖Ã h‖²` subject to `‖h‖ = 1`.
    pub fn solve(&self) -> Result<Homography> {
        self.solve_rows(|_| 1.0)
    }

    /// Weighted solve with one weight per correspondence (applied to both of
    /// its rows).
    pub fn solve_weighted(&self, weights: &[f64]) -> Result<Homography> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} correspondences",
                weights.len(),
                self.len()
            )));
        }
        self.solve_rows(|i| weights[i])
    }

    /// Moving DLT solve at `p_star`.
    pub fn solve_at(&self, p_star: Point2, profile: &WeightProfile) -> Result<Homography> {
        self.solve_rows(|i| moving_dlt_weight(p_star, self.src[i], profile))
    }

    fn solve_rows(&self, weight: impl Fn(usize) -> f64) -> Result<Homography> {
        let n_rows = self.rows.len().max(9);
        let mut a = DMatrix::<f64>::zeros(n_rows, 9);
        for (r, row) in self.rows.iter().enumerate() {
            let w = weight(r / 2);
            for (c, v) in row.iter().enumerate() {
                a[(r, c)] = w * v;
            }
        }
        let h = null_vector(a)?;
        let conditioned = Matrix3::from_row_slice(&h);
        let m = self.t_dst_inv * conditioned * self.t_src;
        Ok(Homography::from_matrix(m)?.normalized())
    }
}

/// Unit vector minimizing `‖A h‖` via QR reduction to 9×9 followed by SVD.
fn null_vector(a: DMatrix<f64>) -> Result<[f64; 9]> {
    let square = if a.nrows() > 9 { a.qr().r() } else { a };
    let svd = square.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("SVD did not converge".into()))?;
    let sv = &svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let (smallest, second) = (order[0], order[1]);
    let largest = sv[order[order.len() - 1]];
    if !(largest > 0.0) || sv[second] <= 1e-10 * largest {
        return Err(Error::Degenerate("rank-deficient design matrix".into()));
    }
    let mut h = [0.0; 9];
    for (k, v) in h.iter_mut().enumerate() {
        *v = v_t[(smallest, k)];
    }
    Ok(h)
}

/// Least-squares homography over all correspondences.
pub fn estimate_global_homography(inliers: &[Correspondence]) -> Result<Homography> {
    DltSystem::new(inliers)?.solve()
}

/// Moving DLT estimate centred at `p_star`.
pub fn estimate_local_homography(
    inliers: &[Correspondence],
    p_star: Point2,
    profile: &WeightProfile,
) -> Result<Homography> {
    DltSystem::new(inliers)?.solve_at(p_star, profile)
}
