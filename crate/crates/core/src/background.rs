//! Static background estimation from a training sequence.
//!
//! Three per-pixel estimators are provided: change-detection-mask run selection, temporal median
//! and histogram mode. All of them treat every pixel independently.

use crate::error::{Error, Result};
use crate::imagery::{Frame, FrameSequence};
use crate::threshold::{self, Threshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Technique {
    Cdm,
    #[default]
    Median,
    Histogram,
}

impl std::fmt::Display for Technique {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Technique::Cdm => "cdm",
            Technique::Median => "median",
            Technique::Histogram => "histogram",
        })
    }
}

impl std::str::FromStr for Technique {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cdm" => Ok(Technique::Cdm),
            "median" => Ok(Technique::Median),
            "histogram" => Ok(Technique::Histogram),
            _ => Err(format!("unknown background technique {s:?} (expected cdm, median or histogram)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackgroundModel {
    pub reference: Frame,
    pub technique: Technique,
    /// Inter-frame change threshold actually used; only set for [`Technique::Cdm`].
    pub cdm_threshold: Option<u8>,
}

/// Builds a background with the requested technique. `threshold` only affects CDM.
pub fn build(seq: &FrameSequence, technique: Technique, threshold: Threshold) -> Result<BackgroundModel> {
    match technique {
        Technique::Cdm => model_cdm(seq, threshold),
        Technique::Median => Ok(model_median(seq)),
        Technique::Histogram => Ok(model_histogram(seq)),
    }
}

/// Per-pixel temporal median. Even counts take the lower middle order statistic, so the result
/// is always an intensity that actually occurred.
pub fn model_median(seq: &FrameSequence) -> BackgroundModel {
    let reference = per_pixel(seq, lower_median);
    BackgroundModel { reference, technique: Technique::Median, cdm_threshold: None }
}

/// Per-pixel modal intensity over a 256-bin histogram, ties going to the lowest intensity.
pub fn model_histogram(seq: &FrameSequence) -> BackgroundModel {
    let mut counts = [0u32; 256];
    let reference = per_pixel(seq, |values| {
        let mut best = values[0];
        let mut best_count = 0;
        for &v in values.iter() {
            let c = &mut counts[v as usize];
            *c += 1;
            if *c > best_count || (*c == best_count && v < best) {
                best = v;
                best_count = *c;
            }
        }
        // only touched bins need resetting
        for &v in values.iter() {
            counts[v as usize] = 0;
        }
        best
    });
    BackgroundModel { reference, technique: Technique::Histogram, cdm_threshold: None }
}

/// Change-detection-mask background.
///
/// The change mask between frames `i` and `i + 1` is `d = |I(i+1) - I(i)|` when `d >= T` and 0
/// otherwise. Per pixel, a nonzero mask value breaks the frame list into runs of unchanged
/// frames; the background is the (lower) median intensity of the longest run, the earliest
/// run winning ties. `Threshold::Auto` applies Otsu to the pooled inter-frame differences and
/// uses the first level above the low class.
pub fn model_cdm(seq: &FrameSequence, threshold: Threshold) -> Result<BackgroundModel> {
    if seq.len() < 2 {
        return Err(Error::TooFewFrames { needed: 2, got: seq.len() });
    }
    let t = match threshold {
        Threshold::Fixed(t) => t,
        Threshold::Auto => auto_cdm_threshold(seq),
    };
    let mut run = Vec::with_capacity(seq.len());
    let reference = per_pixel(seq, |values| {
        let (start, len) = longest_unchanged_run(values, t);
        run.clear();
        run.extend_from_slice(&values[start..start + len]);
        lower_median(&mut run)
    });
    Ok(BackgroundModel { reference, technique: Technique::Cdm, cdm_threshold: Some(t) })
}

fn auto_cdm_threshold(seq: &FrameSequence) -> u8 {
    let mut hist = [0u64; 256];
    for pair in seq.frames().windows(2) {
        for (&a, &b) in pair[0].pixels().iter().zip(pair[1].pixels()) {
            hist[a.abs_diff(b) as usize] += 1;
        }
    }
    threshold::otsu(&hist).saturating_add(1)
}

/// `(start, length)` of the longest run of frames with no change-mask firing between neighbours.
pub(crate) fn longest_unchanged_run(values: &[u8], t: u8) -> (usize, usize) {
    let mut best = (0, 0);
    let mut start = 0;
    for i in 0..values.len() {
        let at_end = i + 1 == values.len();
        let breaks = at_end || {
            let d = values[i].abs_diff(values[i + 1]);
            d >= t && d > 0
        };
        if breaks {
            let len = i + 1 - start;
            if len > best.1 {
                best = (start, len);
            }
            start = i + 1;
        }
    }
    best
}

fn lower_median(values: &mut [u8]) -> u8 {
    let mid = (values.len() - 1) / 2;
    *values.select_nth_unstable(mid).1
}

fn per_pixel(seq: &FrameSequence, mut f: impl FnMut(&mut [u8]) -> u8) -> Frame {
    let (w, h) = (seq.width(), seq.height());
    let mut buf = Vec::with_capacity(seq.len());
    let pixels = (0..w * h)
        .map(|idx| {
            seq.gather_pixel(idx, &mut buf);
            f(&mut buf)
        })
        .collect();
    Frame::new(w, h, pixels).expect("dimensions come from a valid sequence")
}
