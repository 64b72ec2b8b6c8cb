use std::path::Path;

use super::text::{content_lines, read_text};
use crate::error::{Error, Result};
use crate::geometry::{AxisOrientation, WeightProfile};
use crate::matching::SelectionMode;
use crate::pipeline::{AlignMode, StitchConfig};
use crate::seam::SeamOrientation;

fn parse_value<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn parse_size(v: &str) -> std::result::Result<Option<(usize, usize)>, String> {
    if v == "native" {
        return Ok(None);
    }
    let (w, h) = v.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH or `native`, got `{v}`"))?;
    Ok(Some((parse_value(w.trim())?, parse_value(h.trim())?)))
}

fn apply(config: &mut StitchConfig, sigma: &mut Option<f64>, gamma: &mut Option<f64>, key: &str, v: &str) -> std::result::Result<(), String> {
    let sel = &mut config.selection;
    let det = &mut config.detector;
    match key {
        "s" => sel.s = parse_value(v)?,
        "eps_o" => sel.eps_o = parse_value(v)?,
        "eps_r" => sel.eps_r = parse_value(v)?,
        "M0" => sel.m0 = parse_value(v)?,
        "M" => sel.m_total = parse_value(v)?,
        "m" => sel.m = parse_value(v)?,
        "selection_mode" => {
            sel.mode = match v {
                "mean" => SelectionMode::Mean,
                "first" => SelectionMode::FirstOnly,
                "any" => SelectionMode::Any,
                _ => return Err(format!("selection_mode must be mean, first or any, got `{v}`")),
            }
        }
        "sigma" => *sigma = Some(parse_value(v)?),
        "gamma" => *gamma = Some(parse_value(v)?),
        "cell_size" => config.cell_size = parse_value(v)?,
        "lambda" => config.lambda = if v == "auto" { None } else { Some(parse_value(v)?) },
        "lambda_scale" => config.lambda_scale = parse_value(v)?,
        "pyramid_levels" => config.pyramid_levels = if v == "auto" { None } else { Some(parse_value(v)?) },
        "realign_interval" => config.realign_interval = parse_value(v)?,
        "input_size" => config.input_size = parse_size(v)?,
        "seed" => config.seed = parse_value(v)?,
        "ratio" => config.ratio = parse_value(v)?,
        "mode" => {
            config.mode = match v {
                "multi" => AlignMode::Multi,
                "global" => AlignMode::Global,
                _ => return Err(format!("mode must be multi or global, got `{v}`")),
            }
        }
        "seam_orientation" => {
            config.seam_orientation = match v {
                "auto" => None,
                "vertical" => Some(SeamOrientation::Vertical),
                "horizontal" => Some(SeamOrientation::Horizontal),
                _ => return Err(format!("seam_orientation must be auto, vertical or horizontal, got `{v}`")),
            }
        }
        "axis_orientation" => {
            config.axis_orientation = match v {
                "toward_overlap" => AxisOrientation::TowardOverlap,
                "as_written" => AxisOrientation::AsWritten,
                _ => return Err(format!("axis_orientation must be toward_overlap or as_written, got `{v}`")),
            }
        }
        "max_canvas_area" => config.max_canvas_area = parse_value(v)?,
        "octaves" => det.octaves = parse_value(v)?,
        "max_keypoints" => det.max_keypoints = parse_value(v)?,
        "harris_k" => det.harris_k = parse_value(v)?,
        "relative_threshold" => det.relative_threshold = parse_value(v)?,
        "absolute_threshold" => det.absolute_threshold = parse_value(v)?,
        "nms_radius" => det.nms_radius = parse_value(v)?,
        "upright" => det.upright = parse_value(v)?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Flat `key = value` text over [`StitchConfig::default`]. Absent keys keep
/// their defaults; `#` starts a comment line.
pub fn parse_config(text: &str, path: &Path) -> Result<StitchConfig> {
    let mut config = StitchConfig::default();
    let (mut sigma, mut gamma) = (None, None);
    for (lineno, offset, line) in content_lines(text) {
        let fail = |m: String| Error::io(path, Some(offset as u64), format!("line {lineno}: {m}"));
        let (key, value) = line.split_once('=').ok_or_else(|| fail("expected `key = value`".into()))?;
        apply(&mut config, &mut sigma, &mut gamma, key.trim(), value.trim()).map_err(fail)?;
    }
    config.weight_profile = match (sigma, gamma) {
        (None, None) => None,
        (Some(s), g) => Some(WeightProfile::new(s, g.unwrap_or(0.01))?),
        (None, Some(_)) => return Err(Error::param("gamma needs sigma to be set too")),
    };
    config.validate()?;
    Ok(config)
}

pub fn read_config(path: &Path) -> Result<StitchConfig> {
    parse_config(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_named_keys_change() {
        let c = parse_config("# tuning\nM = 100\n", Path::new("c.txt")).unwrap();
        let mut want = StitchConfig::default();
        want.selection.m_total = 100;
        assert_eq!(c, want);
    }

    #[test]
    fn values_of_every_kind() {
        let text = "input_size = native\nmode = global\nlambda = 0.5\nsigma = 40\nseam_orientation = horizontal\nupright = true\n";
        let c = parse_config(text, Path::new("c.txt")).unwrap();
        assert_eq!(c.input_size, None);
        assert_eq!(c.mode, AlignMode::Global);
        assert_eq!(c.lambda, Some(0.5));
        assert_eq!(c.weight_profile, Some(WeightProfile { sigma: 40.0, gamma: 0.01 }));
        assert_eq!(c.seam_orientation, Some(SeamOrientation::Horizontal));
        assert!(c.detector.upright);
        assert_eq!(parse_config("input_size = 320x240", Path::new("c")).unwrap().input_size, Some((320, 240)));
    }

    #[test]
    fn bad_lines_report_offsets() {
        match parse_config("M = 100\nbogus = 1\n", Path::new("c.txt")).unwrap_err() {
            Error::Io { offset, message, .. } => {
                assert_eq!(offset, Some(8));
                assert!(message.contains("unknown key"));
            }
            other => panic!("{other}"),
        }
        assert!(parse_config("M = many\n", Path::new("c.txt")).is_err());
        assert!(matches!(parse_config("eps_r = 2\n", Path::new("c.txt")), Err(Error::InvalidParameter(_))));
    }
}
