use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageFormat, RgbImage};

use crate::error::{Error, Result};
use crate::pipeline::FrameSource;
use crate::raster::Frame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFormat {
    Png,
    Ppm,
}

impl FrameFormat {
    pub fn from_path(path: &Path) -> Option<FrameFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(FrameFormat::Png),
            "ppm" => Some(FrameFormat::Ppm),
            _ => None,
        }
    }
}

/// Writes `bytes` next to `path` and renames it into place, so readers never
/// see a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, None, "not a file path"))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{file_name}.partial"));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, None, e.to_string()))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, None, e.to_string())
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, None, e.to_string()))
}

struct PpmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl PpmCursor<'_> {
    fn fail(&self, message: impl Into<String>) -> Error {
        Error::io(self.path, Some(self.pos as u64), message)
    }

    /// Skips whitespace and `#` comments between header tokens.
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_blank();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.fail(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::io(self.path, Some(start as u64), format!("{what} out of range")))
    }
}

/// Binary PPM (P6), 8-bit.
pub fn decode_ppm(bytes: &[u8], path: &Path) -> Result<Frame> {
    let mut c = PpmCursor { bytes, pos: 0, path };
    if !bytes.starts_with(b"P6") {
        return Err(c.fail("missing P6 magic number"));
    }
    c.pos = 2;
    c.skip_blank();
    let dims_at = c.pos;
    let width = c.number("width")?;
    let height = c.number("height")?;
    c.skip_blank();
    let maxval_at = c.pos;
    let maxval = c.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::io(path, Some(dims_at as u64), "zero image dimension"));
    }
    if maxval != 255 {
        return Err(Error::io(path, Some(maxval_at as u64), format!("maxval {maxval} unsupported (only 255)")));
    }
    if !bytes.get(c.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(c.fail("expected a single whitespace byte before the raster"));
    }
    c.pos += 1;
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| c.fail("image dimensions overflow"))?;
    let data = &bytes[c.pos..];
    if data.len() < need {
        c.pos = bytes.len();
        return Err(c.fail(format!("raster truncated: {} of {need} bytes", data.len())));
    }
    RgbImage::from_raw(width as u32, height as u32, data[..need].to_vec()).ok_or_else(|| c.fail("bad raster"))
}

pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.as_raw());
    out
}

fn encode_png(frame: &Frame, path: &Path) -> Result<Vec<u8>> {
    let mut buf = std::io::Cursor::new(Vec::new());
    frame
        .write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| Error::io(path, None, e.to_string()))?;
    Ok(buf.into_inner())
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    let format = FrameFormat::from_path(path).ok_or_else(|| Error::io(path, None, "unknown frame format"))?;
    let bytes = read_bytes(path)?;
    match format {
        FrameFormat::Ppm => decode_ppm(&bytes, path),
        FrameFormat::Png => image::load_from_memory_with_format(&bytes, ImageFormat::Png)
            .map(|img| img.to_rgb8())
            .map_err(|e| Error::io(path, None, e.to_string())),
    }
}

/// Format follows the extension.
pub fn write_frame(path: &Path, frame: &Frame) -> Result<()> {
    let bytes = match FrameFormat::from_path(path) {
        Some(FrameFormat::Png) => encode_png(frame, path)?,
        Some(FrameFormat::Ppm) => encode_ppm(frame),
        None => return Err(Error::io(path, None, "unknown frame format")),
    };
    write_atomic(path, &bytes)
}

/// Six-digit zero-padded name for frame `index`.
pub fn frame_name(index: usize, format: FrameFormat) -> String {
    match format {
        FrameFormat::Png => format!("{index:06}.png"),
        FrameFormat::Ppm => format!("{index:06}.ppm"),
    }
}

/// PNG and PPM files of a directory, sorted by file name. A path to a single
/// image is a one-frame list.
pub fn list_frames(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, None, e.to_string()))?;
    if meta.is_file() {
        return match FrameFormat::from_path(path) {
            Some(_) => Ok(vec![path.to_path_buf()]),
            None => Err(Error::io(path, None, "unknown frame format")),
        };
    }
    let mut frames = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| Error::io(path, None, e.to_string()))? {
        let p = entry.map_err(|e| Error::io(path, None, e.to_string()))?.path();
        let hidden = p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.'));
        if p.is_file() && !hidden && FrameFormat::from_path(&p).is_some() {
            frames.push(p);
        }
    }
    frames.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if frames.is_empty() {
        return Err(Error::io(path, None, "no PNG or PPM frames found"));
    }
    Ok(frames)
}

/// Frames of a directory, decoded on access. Every frame must match the
/// first one's size.
#[derive(Debug, Clone)]
pub struct DirSource {
    pub paths: Vec<PathBuf>,
    pub dims: (u32, u32),
}

impl DirSource {
    pub fn open(path: &Path) -> Result<DirSource> {
        let paths = list_frames(path)?;
        let dims = read_frame(&paths[0])?.dimensions();
        Ok(DirSource { paths, dims })
    }
}

impl FrameSource for DirSource {
    fn len(&self) -> usize {
        self.paths.len()
    }

    fn frame(&self, index: usize) -> Result<Frame> {
        let path = &self.paths[index];
        let f = read_frame(path)?;
        if f.dimensions() != self.dims {
            return Err(Error::io(
                path,
                None,
                format!(
                    "frame is {}x{}, expected {}x{} like the first frame",
                    f.width(),
                    f.height(),
                    self.dims.0,
                    self.dims.1
                ),
            ));
        }
        Ok(f)
    }
}
