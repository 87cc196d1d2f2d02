//! Deterministic side-view walker sequences with analytic ground truth.
//!
//! A walker is a torso rectangle over two straight legs hinged at the hip. The horizontal
//! spread between the feet is `amplitude * |sin(pi t / period)|`, so the bounding-box width
//! repeats exactly every `period_frames` frames, and the body translates by `stride_px` per
//! period. Salt noise flips background pixels to the walker intensity.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::imagery::{Frame, FrameSequence};
use crate::segmentation::BoundingBox;

/// Frame rate of the synthetic sequences unless configured otherwise.
pub const DEFAULT_FPS: f64 = 25.0;
/// Intensity offset of the walker over the background (clamped to 255).
pub const WALKER_CONTRAST: u8 = 100;
pub const MIN_WALKER_PERIOD: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct WalkerSpec {
    pub body_height: usize,
    pub body_width: usize,
    pub period_frames: usize,
    /// Horizontal distance covered per period, in pixels.
    pub stride_px: f64,
    /// Maximum horizontal spread between the two feet.
    pub leg_swing_amplitude: f64,
    /// Body centre x at frame 0.
    pub start_x: f64,
    /// +1 walks right, -1 walks left.
    pub direction: i8,
    /// Per-pixel, per-frame probability of a background pixel turning into salt noise.
    pub noise_rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub background_level: u8,
    pub fps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub period_frames: usize,
    pub stride_px: f64,
    pub bboxes: Vec<BoundingBox>,
    /// Mean x of the walker pixels per frame.
    pub centroids: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub frames: FrameSequence,
    pub truth: GroundTruth,
}

impl WalkerSpec {
    pub fn leg_width(&self) -> usize {
        (self.body_width / 3).max(3)
    }

    fn torso_height(&self) -> usize {
        (self.body_height as f64 * 0.55).round() as usize
    }

    fn center_x(&self, t: usize) -> f64 {
        self.start_x + f64::from(self.direction) * self.stride_px * t as f64 / self.period_frames as f64
    }

    fn leg_spread(&self, t: usize) -> f64 {
        self.leg_swing_amplitude * (std::f64::consts::PI * t as f64 / self.period_frames as f64).sin().abs()
    }

    fn validate(&self, scene: &Scene) -> Result<()> {
        let fail = |m: String| Err(Error::SpecOutOfBounds(m));
        if self.period_frames < MIN_WALKER_PERIOD {
            return fail(format!("period_frames must be at least {MIN_WALKER_PERIOD}, got {}", self.period_frames));
        }
        if self.body_height < 8 || self.body_width < 3 {
            return fail(format!("body {}x{} is too small", self.body_width, self.body_height));
        }
        if self.direction != 1 && self.direction != -1 {
            return fail(format!("direction must be +1 or -1, got {}", self.direction));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return fail(format!("noise_rate must be in [0, 1), got {}", self.noise_rate));
        }
        for (name, v) in [("stride_px", self.stride_px), ("leg_swing_amplitude", self.leg_swing_amplitude), ("start_x", self.start_x)] {
            if !v.is_finite() || v < 0.0 {
                return fail(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if scene.n_frames < 3 * self.period_frames {
            return fail(format!("n_frames {} is shorter than three periods ({})", scene.n_frames, 3 * self.period_frames));
        }
        if !(scene.fps.is_finite() && scene.fps > 0.0) {
            return fail(format!("fps must be positive, got {}", scene.fps));
        }
        if ground_row(scene) + 1 < self.body_height {
            return fail(format!("body height {} does not fit a {}-pixel frame", self.body_height, scene.height));
        }
        for t in 0..scene.n_frames {
            let (lo, hi) = self.x_extent(t);
            if lo < 0 || hi >= scene.width as i64 {
                return fail(format!("walker spans x {lo}..={hi} at frame {t}, frame width is {}", scene.width));
            }
        }
        Ok(())
    }

    /// Horizontal pixel runs `(x0, len)` of the torso and of each leg at row offset `frac`.
    fn torso_run(&self, t: usize) -> (i64, usize) {
        ((self.center_x(t) - self.body_width as f64 / 2.0).round() as i64, self.body_width)
    }

    fn leg_runs(&self, t: usize, frac: f64) -> [(i64, usize); 2] {
        let lw = self.leg_width();
        let offset = frac * self.leg_spread(t) / 2.0;
        let cx = self.center_x(t);
        [-1.0, 1.0].map(|side| ((cx + side * offset - lw as f64 / 2.0).round() as i64, lw))
    }

    fn x_extent(&self, t: usize) -> (i64, i64) {
        let runs = [self.torso_run(t)].into_iter().chain(self.leg_runs(t, 1.0));
        runs.fold((i64::MAX, i64::MIN), |(lo, hi), (x0, len)| (lo.min(x0), hi.max(x0 + len as i64 - 1)))
    }

    /// Binary walker mask (row-major, 1 = body) for frame `t`.
    pub fn render_mask(&self, scene: &Scene, t: usize) -> Vec<u8> {
        let (w, h) = (scene.width, scene.height);
        let mut mask = vec![0u8; w * h];
        let foot = ground_row(scene);
        let top = foot + 1 - self.body_height;
        let hip = top + self.torso_height();
        let mut fill = |y: usize, (x0, len): (i64, usize)| {
            for x in x0.max(0)..(x0 + len as i64).min(w as i64) {
                mask[y * w + x as usize] = 1;
            }
        };
        for y in top..hip {
            fill(y, self.torso_run(t));
        }
        let leg_rows = foot + 1 - hip;
        for y in hip..=foot {
            let frac = if leg_rows > 1 { (y - hip) as f64 / (leg_rows - 1) as f64 } else { 1.0 };
            for run in self.leg_runs(t, frac) {
                fill(y, run);
            }
        }
        mask
    }

    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        Ok(Self {
            body_height: kv.require("body_height")?,
            body_width: kv.require("body_width")?,
            period_frames: kv.require("period_frames")?,
            stride_px: kv.require("stride_px")?,
            leg_swing_amplitude: kv.require("leg_swing_amplitude")?,
            start_x: kv.require("start_x")?,
            direction: kv.get("direction")?.unwrap_or(1),
            noise_rate: kv.get("noise_rate")?.unwrap_or(0.0),
            seed: kv.get("seed")?.unwrap_or(0),
        })
    }
}

impl Scene {
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        Ok(Self {
            width: kv.require("frame_width")?,
            height: kv.require("frame_height")?,
            n_frames: kv.require("n_frames")?,
            background_level: kv.get("background_level")?.unwrap_or(60),
            fps: kv.get("fps")?.unwrap_or(DEFAULT_FPS),
        })
    }

    pub fn walker_level(&self) -> u8 {
        self.background_level.saturating_add(WALKER_CONTRAST)
    }
}

/// Config keys understood by [`load_config`].
pub const CONFIG_KEYS: [&str; 14] = [
    "body_height",
    "body_width",
    "period_frames",
    "stride_px",
    "leg_swing_amplitude",
    "start_x",
    "direction",
    "noise_rate",
    "seed",
    "frame_width",
    "frame_height",
    "n_frames",
    "background_level",
    "fps",
];

pub fn load_config(path: &Path) -> Result<(WalkerSpec, Scene)> {
    let kv = KeyValues::load(path)?;
    kv.reject_unknown(&CONFIG_KEYS)?;
    Ok((WalkerSpec::from_config(&kv)?, Scene::from_config(&kv)?))
}

fn ground_row(scene: &Scene) -> usize {
    scene.height.saturating_sub(1 + (scene.height / 20).max(1))
}

/// Renders the sequence. All randomness comes from `spec.seed`.
pub fn generate(spec: &WalkerSpec, scene: &Scene) -> Result<SyntheticSequence> {
    spec.validate(scene)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (bg, fg) = (scene.background_level, scene.walker_level());
    let mut frames = Vec::with_capacity(scene.n_frames);
    let mut bboxes = Vec::with_capacity(scene.n_frames);
    let mut centroids = Vec::with_capacity(scene.n_frames);
    for t in 0..scene.n_frames {
        let mask = spec.render_mask(scene, t);
        let truth = crate::segmentation::SilhouetteMask::from_bits(scene.width, scene.height, mask.clone())?;
        bboxes.push(truth.bbox().expect("walker is inside the frame"));
        centroids.push(truth.centroid_x().expect("walker is inside the frame"));
        let pixels = mask
            .iter()
            .map(|&m| {
                if m != 0 {
                    fg
                } else if spec.noise_rate > 0.0 && rng.gen::<f64>() < spec.noise_rate {
                    fg
                } else {
                    bg
                }
            })
            .collect();
        frames.push(Frame::new(scene.width, scene.height, pixels)?);
    }
    Ok(SyntheticSequence {
        frames: FrameSequence::new(frames, scene.fps)?,
        truth: GroundTruth { period_frames: spec.period_frames, stride_px: spec.stride_px, bboxes, centroids },
    })
}

impl GroundTruth {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("frame,period_frames,stride_px,x_min,y_min,x_max,y_max,centroid_x\n");
        for (i, (b, c)) in self.bboxes.iter().zip(&self.centroids).enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                i + 1,
                self.period_frames,
                self.stride_px,
                b.x_min,
                b.y_min,
                b.x_max,
                b.y_max,
                c
            );
        }
        s
    }
}

/// Writes the frames plus `truth.csv` into `dir`.
pub fn write_synthetic(dir: &Path, seq: &SyntheticSequence) -> Result<()> {
    crate::imagery::write_sequence(dir, seq.frames.frames())?;
    let path = dir.join("truth.csv");
    std::fs::write(&path, seq.truth.to_csv()).map_err(|e| Error::io(&path, e))
}

/// One sequence of a synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRecipe {
    pub subject: String,
    pub sequence: String,
    pub walker: WalkerSpec,
    pub scene: Scene,
}

impl SequenceRecipe {
    pub fn generate(&self) -> Result<SyntheticSequence> {
        generate(&self.walker, &self.scene)
    }
}

/// Body heights, periods and strides of the benchmark subjects; consecutive entries differ by at
/// least 15%.
pub const BENCHMARK_HEIGHTS: [usize; 8] = [60, 69, 80, 92, 106, 122, 141, 163];
pub const BENCHMARK_PERIODS: [usize; 8] = [12, 14, 17, 20, 23, 27, 32, 37];
pub const BENCHMARK_STRIDES: [f64; 8] = [12.0, 14.0, 17.0, 20.0, 23.0, 27.0, 32.0, 37.0];
/// Subject `i` walks with period `BENCHMARK_PERIODS[BENCHMARK_PERIOD_ORDER[i]]`.
pub const BENCHMARK_PERIOD_ORDER: [usize; 8] = [3, 6, 0, 5, 2, 7, 1, 4];

pub const BENCHMARK_SCENE_WIDTH: usize = 256;
pub const BENCHMARK_SCENE_HEIGHT: usize = 180;

/// Walker with the benchmark body proportions for a given height.
pub fn proportioned_walker(height: usize, period: usize, stride: f64) -> WalkerSpec {
    let body_width = ((height as f64 * 0.22).round() as usize).max(3);
    let amplitude = (height as f64 * 0.4).round();
    let lw = (body_width / 3).max(3) as f64;
    WalkerSpec {
        body_height: height,
        body_width,
        period_frames: period,
        stride_px: stride,
        leg_swing_amplitude: amplitude,
        start_x: (4.0 + amplitude / 2.0 + lw).max(body_width as f64 / 2.0 + 4.0).ceil(),
        direction: 1,
        noise_rate: 0.0,
        seed: 0,
    }
}

/// `n_subjects` (at most 8) walkers with `sequences` recordings each. Recordings of one subject
/// differ in noise seed and starting position.
pub fn benchmark(n_subjects: usize, sequences: usize, noise_rate: f64, base_seed: u64) -> Vec<SequenceRecipe> {
    let mut out = Vec::new();
    for i in 0..n_subjects.min(BENCHMARK_HEIGHTS.len()) {
        let period = BENCHMARK_PERIODS[BENCHMARK_PERIOD_ORDER[i]];
        let base = proportioned_walker(BENCHMARK_HEIGHTS[i], period, BENCHMARK_STRIDES[i]);
        for s in 0..sequences {
            let walker = WalkerSpec {
                start_x: base.start_x + 3.0 * s as f64,
                noise_rate,
                seed: base_seed.wrapping_add((i * 1000 + s) as u64),
                ..base.clone()
            };
            out.push(SequenceRecipe {
                subject: format!("subject{:02}", i + 1),
                sequence: format!("seq{:02}", s + 1),
                walker,
                scene: Scene {
                    width: BENCHMARK_SCENE_WIDTH,
                    height: BENCHMARK_SCENE_HEIGHT,
                    n_frames: 4 * period,
                    background_level: 60,
                    fps: DEFAULT_FPS,
                },
            });
        }
    }
    out
}

/// Two subjects separable only through the interaction of body height and gait period:
/// subject `xa` is short and quick or tall and slow, `xb` the other two combinations.
pub fn xor_benchmark(sequences: usize, noise_rate: f64, base_seed: u64) -> Vec<SequenceRecipe> {
    const HEIGHTS: [usize; 2] = [80, 110];
    const PERIODS: [usize; 2] = [16, 24];
    let mut out = Vec::new();
    for (k, subject) in ["xa", "xb"].iter().enumerate() {
        for s in 0..sequences {
            let h = HEIGHTS[s % 2];
            let p = PERIODS[(s + k) % 2];
            let walker = WalkerSpec {
                body_height: h,
                body_width: 22,
                period_frames: p,
                stride_px: 24.0,
                leg_swing_amplitude: 36.0,
                start_x: 36.0 + 2.0 * s as f64,
                direction: 1,
                noise_rate,
                seed: base_seed.wrapping_add((k * 1000 + s) as u64),
            };
            out.push(SequenceRecipe {
                subject: subject.to_string(),
                sequence: format!("seq{:02}", s + 1),
                walker,
                scene: Scene { width: 208, height: 140, n_frames: 96, background_level: 60, fps: DEFAULT_FPS },
            });
        }
    }
    out
}
