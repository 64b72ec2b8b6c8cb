use image::Rgb;

use crate::geometry::{Correspondence, Point2};
use crate::raster::Frame;
use crate::seam::Seam;

const SEAM: Rgb<u8> = Rgb([255, 0, 0]);
const LINK: Rgb<u8> = Rgb([0, 255, 0]);
const MARK: Rgb<u8> = Rgb([255, 255, 0]);

fn put(img: &mut Frame, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn line(img: &mut Frame, a: Point2, b: Point2, c: Rgb<u8>) {
    let steps = (b.x - a.x).abs().max((b.y - a.y).abs()).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        put(img, (a.x + t * (b.x - a.x)).round() as i64, (a.y + t * (b.y - a.y)).round() as i64, c);
    }
}

fn cross(img: &mut Frame, p: Point2, c: Rgb<u8>) {
    let (x, y) = (p.x.round() as i64, p.y.round() as i64);
    for d in -2..=2 {
        put(img, x + d, y, c);
        put(img, x, y + d, c);
    }
}

/// The stitched frame with the seam drawn in red.
pub fn seam_overlay(frame: &Frame, seam: &Seam) -> Frame {
    let mut out = frame.clone();
    for &(x, y) in &seam.path {
        put(&mut out, x as i64, y as i64, SEAM);
    }
    out
}

/// A and B side by side with each inlier pair marked and joined.
pub fn inlier_overlay(a: &Frame, b: &Frame, inliers: &[Correspondence]) -> Frame {
    let (w, h) = (a.width() + b.width(), a.height().max(b.height()));
    let mut out = Frame::new(w, h);
    image::imageops::replace(&mut out, a, 0, 0);
    image::imageops::replace(&mut out, b, a.width() as i64, 0);
    let dx = a.width() as f64;
    for c in inliers {
        let q = Point2::new(c.dst.x + dx, c.dst.y);
        line(&mut out, c.src, q, LINK);
        cross(&mut out, c.src, MARK);
        cross(&mut out, q, MARK);
    }
    out
}
