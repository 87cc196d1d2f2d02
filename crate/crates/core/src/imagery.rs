//! Grayscale frames, frame sequences, and ingestion of numbered frame files.
//!
//! Frames live on disk as `frame_<NNNN>.pgm` (binary P5, maxval 255). Binary PPM (P6) and PNG
//! files named `frame_<NNNN>.ppm` / `frame_<NNNN>.png` are accepted on input and converted to
//! luminance; everything this crate writes is P5.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("zero-sized frame {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::dims(
                format!("{} pixels ({width}x{height})", width * height),
                format!("{} pixels", pixels.len()),
            ));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn same_size(&self, other: &Frame) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn size_string(&self) -> String {
        format!("{}x{}", self.width, self.height)
    }
}

/// A non-empty run of equally sized frames captured at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    fps: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, fps: f64) -> Result<Self> {
        let first = frames.first().ok_or(Error::Empty)?;
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidParameter(format!("fps must be positive, got {fps}")));
        }
        if let Some(bad) = frames.iter().find(|f| !f.same_size(first)) {
            return Err(Error::dims(first.size_string(), bad.size_string()));
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    /// Intensities of pixel `idx` (row-major index) across all frames, written into `out`.
    pub(crate) fn gather_pixel(&self, idx: usize, out: &mut Vec<u8>) {
        out.clear();
        out.extend(self.frames.iter().map(|f| f.pixels[idx]));
    }
}

/// ITU-R BT.601 luma, rounded to the nearest integer.
pub fn luminance(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    y.round().clamp(0.0, 255.0) as u8
}

/// Canonical file name for frame `index` (1-based).
pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:04}.pgm")
}

/// Parses `frame_<digits>.<ext>` for a supported extension, returning the numeric index.
pub fn parse_frame_index(name: &str) -> Option<usize> {
    let stem = name.strip_prefix("frame_")?;
    let (digits, ext) = stem.rsplit_once('.')?;
    if !matches!(ext.to_ascii_lowercase().as_str(), "pgm" | "ppm" | "png") {
        return None;
    }
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Loads every numbered frame in `dir`, ordered by numeric index.
pub fn load_sequence(dir: &Path, fps: f64) -> Result<FrameSequence> {
    let mut indexed = numbered_frame_files(dir)?;
    if indexed.is_empty() {
        return Err(Error::EmptyDirectory(dir.to_path_buf()));
    }
    indexed.sort_by_key(|(idx, _)| *idx);
    if let Some(w) = indexed.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidFrame(format!(
            "duplicate frame index {} ({} and {})",
            w[0].0,
            w[0].1.display(),
            w[1].1.display()
        )));
    }
    let mut frames = Vec::with_capacity(indexed.len());
    for (_, path) in &indexed {
        let frame = read_frame(path)?;
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if !first.same_size(&frame) {
                return Err(Error::dims(first.size_string(), format!("{} in {}", frame.size_string(), path.display())));
            }
        }
        frames.push(frame);
    }
    FrameSequence::new(frames, fps)
}

fn numbered_frame_files(dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(idx) = parse_frame_index(name) {
            out.push((idx, entry.path()));
        }
    }
    Ok(out)
}

/// Writes frames as `frame_0001.pgm`, `frame_0002.pgm`, ... into `dir`, creating it if needed.
pub fn write_sequence(dir: &Path, frames: &[Frame]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, frame) in frames.iter().enumerate() {
        write_pgm(&dir.join(frame_file_name(i + 1)), frame)?;
    }
    Ok(())
}

/// Reads a frame from a PGM, PPM or PNG file.
pub fn read_frame(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let decode_err = |reason: String| Error::DecodeError { path: path.to_path_buf(), reason };
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(&bytes).map_err(decode_err)
    } else {
        decode_with_image(&bytes).map_err(decode_err)
    }
}

pub fn write_pgm(path: &Path, frame: &Frame) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode_pgm(frame)).map_err(|e| Error::io(path, e))
}

/// Binary P5 encoding with maxval 255.
pub fn encode_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.pixels);
    out
}

/// Decodes binary P5 (grayscale) or P6 (color, converted to luminance) data.
pub fn decode_pnm(bytes: &[u8]) -> std::result::Result<Frame, String> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    let magic = cursor.token()?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        other => return Err(format!("unsupported magic {other:?}")),
    };
    let width = cursor.number()?;
    let height = cursor.number()?;
    let maxval = cursor.number()?;
    if width == 0 || height == 0 {
        return Err(format!("zero-sized image {width}x{height}"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err("missing whitespace after header".into()),
    }
    let needed = width * height * channels;
    let raster = &bytes[cursor.pos..];
    if raster.len() < needed {
        return Err(format!("truncated raster: expected {needed} bytes, found {}", raster.len()));
    }
    let raster = &raster[..needed];
    let scale = |v: u8| -> std::result::Result<u8, String> {
        if usize::from(v) > maxval {
            return Err(format!("sample {v} exceeds maxval {maxval}"));
        }
        Ok(if maxval == 255 { v } else { ((usize::from(v) * 255 + maxval / 2) / maxval) as u8 })
    };
    let pixels = if channels == 1 {
        raster.iter().map(|&v| scale(v)).collect::<std::result::Result<Vec<_>, _>>()?
    } else {
        raster
            .chunks_exact(3)
            .map(|c| Ok(luminance(scale(c[0])?, scale(c[1])?, scale(c[2])?)))
            .collect::<std::result::Result<Vec<_>, String>>()?
    };
    Frame::new(width, height, pixels).map_err(|e| e.to_string())
}

fn decode_with_image(bytes: &[u8]) -> std::result::Result<Frame, String> {
    let img = image::load_from_memory(bytes).map_err(|e| e.to_string())?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        image::DynamicImage::ImageLuma8(gray) => gray.into_raw(),
        other => other.to_rgb8().pixels().map(|p| luminance(p[0], p[1], p[2])).collect(),
    };
    Frame::new(width, height, pixels).map_err(|e| e.to_string())
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> std::result::Result<String, String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err("truncated header".into());
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> std::result::Result<usize, String> {
        let tok = self.token()?;
        tok.parse().map_err(|_| format!("bad header field {tok:?}"))
    }
}
