use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::frame::write_atomic;
use crate::error::{Error, Result};
use crate::geometry::{Correspondence, Point2};
use crate::synth::LabeledCorrespondence;

/// Non-blank, non-comment lines with their 1-based line number and byte
/// offset.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    let mut offset = 0;
    text.split('\n').enumerate().filter_map(move |(i, raw)| {
        let start = offset;
        offset += raw.len() + 1;
        let line = raw.trim_end_matches('\r').trim();
        (!line.is_empty() && !line.starts_with('#')).then_some((i + 1, start, line))
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, None, e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::io(path, Some(e.utf8_error().valid_up_to() as u64), "not UTF-8 text"))
}

fn parse_reals<const N: usize>(line: &str, path: &Path, lineno: usize, offset: usize) -> Result<[f64; N]> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let fail = |m: String| Error::io(path, Some(offset as u64), format!("line {lineno}: {m}"));
    if fields.len() < N {
        return Err(fail(format!("expected {N} numbers, found {}", fields.len())));
    }
    let mut out = [0.0; N];
    for (o, f) in out.iter_mut().zip(&fields) {
        *o = f
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| fail(format!("`{f}` is not a finite number")))?;
    }
    Ok(out)
}

/// Lines `x1 y1 x2 y2`; `#` lines and blank lines are skipped.
pub fn parse_matches(text: &str, path: &Path) -> Result<Vec<Correspondence>> {
    content_lines(text)
        .map(|(lineno, offset, line)| {
            if line.split_whitespace().count() != 4 {
                return Err(Error::io(path, Some(offset as u64), format!("line {lineno}: expected `x1 y1 x2 y2`")));
            }
            let [x1, y1, x2, y2] = parse_reals::<4>(line, path, lineno, offset)?;
            Ok(Correspondence {
                src: Point2::new(x1, y1),
                dst: Point2::new(x2, y2),
            })
        })
        .collect()
}

pub fn read_match_file(path: &Path) -> Result<Vec<Correspondence>> {
    parse_matches(&read_text(path)?, path)
}

pub fn format_matches(matches: &[Correspondence]) -> String {
    let mut s = String::from("# x1 y1 x2 y2\n");
    for c in matches {
        let _ = writeln!(s, "{} {} {} {}", c.src.x, c.src.y, c.dst.x, c.dst.y);
    }
    s
}

pub fn write_match_file(path: &Path, matches: &[Correspondence]) -> Result<()> {
    write_atomic(path, format_matches(matches).as_bytes())
}

/// Rejects matches outside `[0, w-1] × [0, h-1]` of either image.
pub fn check_match_extents(matches: &[Correspondence], size_a: (u32, u32), size_b: (u32, u32), path: &Path) -> Result<()> {
    let inside = |p: Point2, (w, h): (u32, u32)| p.x >= 0.0 && p.y >= 0.0 && p.x <= (w - 1) as f64 && p.y <= (h - 1) as f64;
    match matches.iter().position(|c| !inside(c.src, size_a) || !inside(c.dst, size_b)) {
        None => Ok(()),
        Some(i) => Err(Error::io(path, None, format!("match {} lies outside the image extents", i + 1))),
    }
}

/// Truth file lines `x1 y1 x2 y2 label plane_id`, label `inlier`/`outlier`
/// and plane `-` for outliers.
pub fn format_truth(truth: &[LabeledCorrespondence]) -> String {
    let mut s = String::from("# x1 y1 x2 y2 label plane_id\n");
    for t in truth {
        let c = t.correspondence;
        let (label, plane) = match t.plane {
            Some(k) => ("inlier", k.to_string()),
            None => ("outlier", "-".to_string()),
        };
        let _ = writeln!(s, "{} {} {} {} {label} {plane}", c.src.x, c.src.y, c.dst.x, c.dst.y);
    }
    s
}

pub fn parse_truth(text: &str, path: &Path) -> Result<Vec<LabeledCorrespondence>> {
    content_lines(text)
        .map(|(lineno, offset, line)| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let fail = |m: &str| Error::io(path, Some(offset as u64), format!("line {lineno}: {m}"));
            if fields.len() != 6 {
                return Err(fail("expected `x1 y1 x2 y2 label plane_id`"));
            }
            let [x1, y1, x2, y2] = parse_reals::<4>(line, path, lineno, offset)?;
            let plane = match (fields[4], fields[5]) {
                ("inlier", k) => Some(k.parse::<usize>().map_err(|_| fail("bad plane id"))?),
                ("outlier", _) => None,
                _ => return Err(fail("label must be `inlier` or `outlier`")),
            };
            Ok(LabeledCorrespondence {
                correspondence: Correspondence {
                    src: Point2::new(x1, y1),
                    dst: Point2::new(x2, y2),
                },
                plane,
            })
        })
        .collect()
}

pub fn read_truth_file(path: &Path) -> Result<Vec<LabeledCorrespondence>> {
    parse_truth(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_point_at_the_bad_line() {
        let text = "# header\n1 2 3 4\n1 2 x 4\n";
        let e = parse_matches(text, Path::new("m.txt")).unwrap_err();
        match e {
            Error::Io { offset, message, .. } => {
                assert_eq!(offset, Some(17));
                assert!(message.starts_with("line 3"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn crlf_and_blank_lines() {
        let m = parse_matches("1 2 3 4\r\n\r\n5 6 7 8\r\n", Path::new("m.txt")).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[1].dst, Point2::new(7.0, 8.0));
    }
}
