//! Frame differencing against a background model, silhouette cleanup and bounding boxes.

use crate::background::BackgroundModel;
use crate::error::{Error, Result};
use crate::imagery::Frame;
use crate::threshold::{self, Threshold};

/// Inclusive, tight axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl BoundingBox {
    #[inline]
    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }
}

/// Binary walker mask for one frame (1 = foreground).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SilhouetteMask {
    width: usize,
    height: usize,
    mask: Vec<u8>,
    bbox: Option<BoundingBox>,
}

impl SilhouetteMask {
    /// Builds a mask from row-major 0/1 values (any nonzero value counts as foreground).
    pub fn from_bits(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::dims(format!("{} cells ({width}x{height})", width * height), bits.len()));
        }
        let mask: Vec<u8> = bits.into_iter().map(|b| u8::from(b != 0)).collect();
        let bbox = tight_bbox(width, height, &mask);
        Ok(Self { width, height, mask, bbox })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::from_bits(width, height, vec![0; width * height])
    }

    /// Reads a mask from an 8-bit image: intensities above 127 are foreground.
    pub fn from_frame(frame: &Frame) -> Self {
        let bits = frame.pixels().iter().map(|&p| u8::from(p > 127)).collect();
        Self::from_bits(frame.width(), frame.height(), bits).expect("frame dimensions are valid")
    }

    /// 0/255 image of the mask.
    pub fn to_frame(&self) -> Frame {
        let pixels = self.mask.iter().map(|&b| b * 255).collect();
        Frame::new(self.width, self.height, pixels).expect("mask dimensions are valid")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x] != 0
    }

    pub fn bbox(&self) -> Option<BoundingBox> {
        self.bbox
    }

    pub fn area(&self) -> usize {
        self.mask.iter().map(|&b| b as usize).sum()
    }

    /// Mean x coordinate of the foreground pixels.
    pub fn centroid_x(&self) -> Option<f64> {
        let mut sum = 0usize;
        let mut count = 0usize;
        for row in self.mask.chunks_exact(self.width) {
            for (x, &b) in row.iter().enumerate() {
                if b != 0 {
                    sum += x;
                    count += 1;
                }
            }
        }
        (count > 0).then(|| sum as f64 / count as f64)
    }
}

fn tight_bbox(width: usize, height: usize, mask: &[u8]) -> Option<BoundingBox> {
    let mut bbox: Option<BoundingBox> = None;
    for y in 0..height {
        let row = &mask[y * width..(y + 1) * width];
        let Some(first) = row.iter().position(|&b| b != 0) else { continue };
        let last = row.iter().rposition(|&b| b != 0).expect("row has a set pixel");
        bbox = Some(match bbox {
            None => BoundingBox { x_min: first, y_min: y, x_max: last, y_max: y },
            Some(b) => BoundingBox { x_min: b.x_min.min(first), y_min: b.y_min, x_max: b.x_max.max(last), y_max: y },
        });
    }
    bbox
}

/// Marks pixels whose absolute difference from the background strictly exceeds the threshold.
/// `Threshold::Auto` runs Otsu on the absolute difference image.
pub fn difference_mask(frame: &Frame, bg: &BackgroundModel, threshold: Threshold) -> Result<SilhouetteMask> {
    let reference = &bg.reference;
    if !frame.same_size(reference) {
        return Err(Error::dims(reference.size_string(), frame.size_string()));
    }
    let diff: Vec<u8> = frame.pixels().iter().zip(reference.pixels()).map(|(&a, &b)| a.abs_diff(b)).collect();
    let t = match threshold {
        Threshold::Fixed(t) => t,
        Threshold::Auto => threshold::otsu(&threshold::histogram(diff.iter().copied())),
    };
    let bits = diff.into_iter().map(|d| u8::from(d > t)).collect();
    SilhouetteMask::from_bits(frame.width(), frame.height(), bits)
}

/// One pass of 3x3 majority smoothing (out-of-frame cells count as background), then keeps only
/// the largest 8-connected foreground component.
pub fn clean_mask(raw: &SilhouetteMask) -> SilhouetteMask {
    let smoothed = majority_3x3(raw);
    let kept = largest_component(raw.width, raw.height, &smoothed);
    SilhouetteMask::from_bits(raw.width, raw.height, kept).expect("same dimensions as input")
}

/// Difference mask followed by cleanup.
pub fn segment(frame: &Frame, bg: &BackgroundModel, threshold: Threshold) -> Result<SilhouetteMask> {
    Ok(clean_mask(&difference_mask(frame, bg, threshold)?))
}

fn majority_3x3(m: &SilhouetteMask) -> Vec<u8> {
    let (w, h) = (m.width, m.height);
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        let y0 = y.saturating_sub(1);
        let y1 = (y + 1).min(h - 1);
        for x in 0..w {
            let x0 = x.saturating_sub(1);
            let x1 = (x + 1).min(w - 1);
            let mut count = 0;
            for yy in y0..=y1 {
                let row = &m.mask[yy * w..(yy + 1) * w];
                count += row[x0..=x1].iter().map(|&b| b as u32).sum::<u32>();
            }
            out[y * w + x] = u8::from(count >= 5);
        }
    }
    out
}

/// Labels 8-connected components and returns a mask holding only the largest one
/// (the first in raster order on ties).
pub(crate) fn largest_component(w: usize, h: usize, mask: &[u8]) -> Vec<u8> {
    let mut labels = vec![0u32; w * h];
    let mut stack = Vec::new();
    let mut best = (0u32, 0usize);
    let mut next = 0u32;
    for start in 0..w * h {
        if mask[start] == 0 || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        let mut size = 0;
        while let Some(idx) = stack.pop() {
            size += 1;
            let (x, y) = (idx % w, idx / w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let n = ny * w + nx;
                    if mask[n] != 0 && labels[n] == 0 {
                        labels[n] = next;
                        stack.push(n);
                    }
                }
            }
        }
        if size > best.1 {
            best = (next, size);
        }
    }
    if best.1 == 0 {
        return vec![0; w * h];
    }
    labels.into_iter().map(|l| u8::from(l == best.0)).collect()
}

/// Number of 8-connected foreground components.
pub fn component_count(mask: &SilhouetteMask) -> usize {
    let (w, h) = (mask.width, mask.height);
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut count = 0;
    for start in 0..w * h {
        if mask.mask[start] == 0 || seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            let (x, y) = (idx % w, idx / w);
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let n = ny * w + nx;
                    if mask.mask[n] != 0 && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::Technique;

    fn bg_of(frame: Frame) -> BackgroundModel {
        BackgroundModel { reference: frame, technique: Technique::Median, cdm_threshold: None }
    }

    fn rect_mask(w: usize, h: usize, x0: usize, y0: usize, rw: usize, rh: usize) -> Vec<u8> {
        let mut bits = vec![0u8; w * h];
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                bits[y * w + x] = 1;
            }
        }
        bits
    }

    #[test]
    fn identical_frame_gives_empty_mask() {
        let f = Frame::filled(6, 5, 40).unwrap();
        let m = difference_mask(&f, &bg_of(f.clone()), Threshold::Fixed(10)).unwrap();
        assert_eq!(m.area(), 0);
        assert!(m.bbox().is_none());
        let m = difference_mask(&f, &bg_of(f.clone()), Threshold::Auto).unwrap();
        assert_eq!(m.area(), 0);
    }

    #[test]
    fn strict_threshold() {
        let frame = Frame::new(3, 1, vec![100, 80, 30]).unwrap();
        let bg = bg_of(Frame::new(3, 1, vec![30, 30, 30]).unwrap());
        let m = difference_mask(&frame, &bg, Threshold::Fixed(50)).unwrap();
        // 70 > 50 is foreground, exactly 50 is not
        assert_eq!(m.bits(), &[1, 0, 0]);
    }

    #[test]
    fn mismatched_background_is_rejected() {
        let frame = Frame::filled(3, 3, 0).unwrap();
        let bg = bg_of(Frame::filled(4, 3, 0).unwrap());
        assert!(matches!(difference_mask(&frame, &bg, Threshold::Auto), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn clean_keeps_only_the_solid_component() {
        let (w, h) = (40, 40);
        let mut bits = rect_mask(w, h, 5, 5, 10, 20);
        for &(x, y) in &[(30, 3), (35, 30), (25, 38)] {
            bits[y * w + x] = 1;
        }
        let raw = SilhouetteMask::from_bits(w, h, bits).unwrap();
        let clean = clean_mask(&raw);
        assert_eq!(component_count(&clean), 1);
        assert_eq!(clean.bbox(), Some(BoundingBox { x_min: 5, y_min: 5, x_max: 14, y_max: 24 }));
        for (x, y) in [(30, 3), (35, 30), (25, 38)] {
            assert!(!clean.get(x, y));
        }
    }

    #[test]
    fn clean_keeps_solid_rectangle_interior_and_bbox() {
        let (w, h) = (30, 30);
        let raw = SilhouetteMask::from_bits(w, h, rect_mask(w, h, 8, 6, 12, 15)).unwrap();
        let clean = clean_mask(&raw);
        assert_eq!(clean.bbox(), raw.bbox());
        for y in 7..20 {
            for x in 9..19 {
                assert!(clean.get(x, y));
            }
        }
    }

    #[test]
    fn clean_of_empty_is_empty() {
        let raw = SilhouetteMask::empty(10, 10).unwrap();
        let clean = clean_mask(&raw);
        assert_eq!(clean.area(), 0);
        assert!(clean.bbox().is_none());
    }

    #[test]
    fn bbox_and_centroid() {
        let (w, h) = (10, 8);
        let m = SilhouetteMask::from_bits(w, h, rect_mask(w, h, 2, 1, 4, 3)).unwrap();
        let b = m.bbox().unwrap();
        assert_eq!((b.width(), b.height()), (4, 3));
        assert_eq!(m.centroid_x(), Some(3.5));
        assert_eq!(SilhouetteMask::from_frame(&m.to_frame()), m);
    }

    #[test]
    fn diagonal_pixels_are_one_component() {
        let mut bits = vec![0u8; 16];
        bits[0] = 1;
        bits[5] = 1;
        bits[10] = 1;
        let m = SilhouetteMask::from_bits(4, 4, bits).unwrap();
        assert_eq!(component_count(&m), 1);
    }
}
