use std::path::Path;

use super::text::{content_lines, read_text};
use crate::error::{Error, Result};
use crate::geometry::{Homography, Point2};
use crate::synth::{MovingObject, PlaneSpec, SceneSpec, TextureKind};

/// `noise:SEED` or `flat:R,G,B`.
pub fn parse_texture(token: &str) -> std::result::Result<TextureKind, String> {
    match token.split_once(':') {
        Some(("noise", seed)) => seed
            .parse()
            .map(TextureKind::Noise)
            .map_err(|_| format!("bad noise seed `{seed}`")),
        Some(("flat", rgb)) => {
            let parts: Vec<&str> = rgb.split(',').collect();
            let vals: Vec<u8> = parts.iter().filter_map(|p| p.trim().parse().ok()).collect();
            if parts.len() != 3 || vals.len() != 3 {
                return Err(format!("flat texture needs R,G,B in 0..=255, got `{rgb}`"));
            }
            Ok(TextureKind::Flat([vals[0], vals[1], vals[2]]))
        }
        _ => Err(format!("unknown texture `{token}` (use noise:N or flat:R,G,B)")),
    }
}

fn numbers(fields: &[&str], n: usize) -> std::result::Result<Vec<f64>, String> {
    if fields.len() != n {
        return Err(format!("expected {n} values, found {}", fields.len()));
    }
    fields
        .iter()
        .map(|f| f.parse::<f64>().map_err(|_| format!("`{f}` is not a number")))
        .collect()
}

fn apply(spec: &mut SceneSpec, key: &str, fields: &[&str]) -> std::result::Result<(), String> {
    let one = |fields: &[&str]| numbers(fields, 1).map(|v| v[0]);
    match key {
        "size" => {
            let v = numbers(fields, 2)?;
            if v.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
                return Err("size must be two positive integers".into());
            }
            spec.width = v[0] as usize;
            spec.height = v[1] as usize;
        }
        "focal" => spec.fisheye_focal = one(fields)?,
        "outliers" => spec.outlier_fraction = one(fields)?,
        "noise" => spec.noise_sigma = one(fields)?,
        "correspondences" => {
            spec.correspondences = fields
                .first()
                .filter(|_| fields.len() == 1)
                .and_then(|f| f.parse().ok())
                .ok_or("correspondences must be one nonnegative integer")?
        }
        "motion" => {
            let v = numbers(fields, 2)?;
            spec.motion = (v[0], v[1]);
        }
        "seed" => {
            spec.seed = fields
                .first()
                .filter(|_| fields.len() == 1)
                .and_then(|f| f.parse().ok())
                .ok_or("seed must be one nonnegative integer")?
        }
        "plane" => {
            if fields.len() != 12 {
                return Err(format!(
                    "plane needs `x_min x_max texture h1 .. h9`, found {} values",
                    fields.len()
                ));
            }
            let range = numbers(&fields[..2], 2)?;
            let texture = parse_texture(fields[2])?;
            let h = numbers(&fields[3..], 9)?;
            let homography = Homography::from_entries(h.try_into().expect("nine entries"))
                .map_err(|e| format!("plane homography: {e}"))?;
            spec.planes.push(PlaneSpec {
                x_min: range[0],
                x_max: range[1],
                texture,
                homography,
            });
        }
        "object" => {
            if fields.len() != 6 {
                return Err("object needs `x y size vx vy texture`".into());
            }
            let v = numbers(&fields[..5], 5)?;
            spec.object = Some(MovingObject {
                origin: Point2::new(v[0], v[1]),
                size: v[2],
                velocity: (v[3], v[4]),
                texture: parse_texture(fields[5])?,
            });
        }
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Scene description: `key = values` lines, with one `plane` line per
/// plane (earlier planes occlude later ones in B).
pub fn parse_scene(text: &str, path: &Path) -> Result<SceneSpec> {
    let mut spec = SceneSpec::single_plane(640, 480, Homography::identity(), 1200.0);
    spec.planes.clear();
    let mut last_line = 0;
    for (lineno, _, line) in content_lines(text) {
        let fail = |m: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message: m,
        };
        let (key, rest) = line.split_once('=').ok_or_else(|| fail("expected `key = values`".into()))?;
        let fields: Vec<&str> = rest.split_whitespace().collect();
        apply(&mut spec, key.trim(), &fields).map_err(fail)?;
        spec.validate_entries().map_err(|e| fail(e.to_string()))?;
        last_line = lineno;
    }
    spec.validate().map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: last_line,
        message: e.to_string(),
    })?;
    Ok(spec)
}

pub fn read_scene(path: &Path) -> Result<SceneSpec> {
    parse_scene(&read_text(path)?, path)
}
