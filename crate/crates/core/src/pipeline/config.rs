use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::background::Technique;
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::svm::{Kernel, KernelKind, KernelSpec};
use crate::threshold::Threshold;

/// Where sequences come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// `root/<subject>/<sequence>/frame_NNNN.{pgm,ppm,png}`
    Directory(PathBuf),
    /// The rendered multi-subject benchmark.
    Benchmark { subjects: usize, sequences: usize, noise_rate: f64, seed: u64 },
    /// The two-subject height/period interaction benchmark.
    Xor { sequences: usize, noise_rate: f64, seed: u64 },
}

/// Hyperparameter grid of the kernel sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub kernels: Vec<KernelKind>,
    pub c: Vec<f64>,
    pub degrees: Vec<u32>,
    pub sigmas: Vec<f64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            kernels: KernelKind::ALL.to_vec(),
            c: vec![0.1, 1.0, 10.0, 100.0],
            degrees: vec![2, 3],
            sigmas: vec![0.5, 1.0, 2.0, 5.0],
        }
    }
}

impl SweepGrid {
    /// Every grid point of `kind`, c-major.
    pub fn specs(&self, kind: KernelKind) -> Vec<KernelSpec<f64>> {
        let mut out = Vec::new();
        for &c in &self.c {
            match kind {
                KernelKind::Linear => out.push(KernelSpec::linear(c)),
                KernelKind::Polynomial => out.extend(self.degrees.iter().map(|&d| KernelSpec::polynomial(d, c))),
                KernelKind::Rbf => out.extend(self.sigmas.iter().map(|&s| KernelSpec::rbf(s, c))),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub source: DatasetSource,
    pub fps: f64,
    pub background: Technique,
    pub background_threshold: Threshold,
    pub segmentation_threshold: Threshold,
    pub kernel: KernelSpec<f64>,
    pub sweep: SweepGrid,
    /// Fraction of each subject's sequences used for training.
    pub split_fraction: f64,
    pub split_seed: u64,
    pub solver_seed: u64,
    /// Stage outputs go here; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            source: DatasetSource::Benchmark { subjects: 8, sequences: 4, noise_rate: 0.005, seed: 1 },
            fps: 25.0,
            background: Technique::Median,
            background_threshold: Threshold::Auto,
            segmentation_threshold: Threshold::Auto,
            kernel: KernelSpec::rbf(2.0, 10.0),
            sweep: SweepGrid::default(),
            split_fraction: 0.75,
            split_seed: 0,
            solver_seed: 0,
            out_dir: None,
        }
    }
}

pub const CONFIG_KEYS: [&str; 22] = [
    "dataset",
    "synthetic",
    "synthetic_subjects",
    "synthetic_sequences",
    "synthetic_noise",
    "synthetic_seed",
    "fps",
    "background",
    "background_threshold",
    "segmentation_threshold",
    "kernel",
    "c",
    "degree",
    "sigma",
    "sweep_kernels",
    "sweep_c",
    "sweep_degree",
    "sweep_sigma",
    "split_fraction",
    "split_seed",
    "solver_seed",
    "out_dir",
];

fn parse_list<T: std::str::FromStr>(key: &str, text: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Result<Vec<T>> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| Error::Config(format!("{key}: cannot parse {s:?}: {e}"))))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::Config(format!("{key}: list is empty")));
    }
    Ok(items)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl PipelineConfig {
    /// Applies the keys present in `kv` over the defaults. Relative paths resolve against `base`.
    pub fn from_key_values(kv: &KeyValues, base: &Path) -> Result<Self> {
        kv.reject_unknown(&CONFIG_KEYS)?;
        let mut cfg = Self::default();
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };

        match (kv.get_str("dataset"), kv.get_str("synthetic")) {
            (Some(_), Some(_)) => return Err(Error::Config("set either dataset or synthetic, not both".into())),
            (Some(dir), None) => cfg.source = DatasetSource::Directory(resolve(dir)),
            (None, kind) => {
                let sequences = kv.get("synthetic_sequences")?.unwrap_or(4);
                let noise_rate = kv.get("synthetic_noise")?.unwrap_or(0.005);
                let seed = kv.get("synthetic_seed")?.unwrap_or(1);
                cfg.source = match kind.unwrap_or("benchmark") {
                    "benchmark" => DatasetSource::Benchmark {
                        subjects: kv.get("synthetic_subjects")?.unwrap_or(8),
                        sequences,
                        noise_rate,
                        seed,
                    },
                    "xor" => DatasetSource::Xor { sequences, noise_rate, seed },
                    other => return Err(Error::Config(format!("synthetic: expected benchmark or xor, got {other:?}"))),
                };
            }
        }
        if let Some(v) = kv.get("fps")? {
            cfg.fps = v;
        }
        if let Some(v) = kv.get("background")? {
            cfg.background = v;
        }
        if let Some(v) = kv.get("background_threshold")? {
            cfg.background_threshold = v;
        }
        if let Some(v) = kv.get("segmentation_threshold")? {
            cfg.segmentation_threshold = v;
        }

        let kind: KernelKind = kv.get("kernel")?.unwrap_or(cfg.kernel.kernel.kind());
        let c = kv.get("c")?.unwrap_or(cfg.kernel.c);
        cfg.kernel = match kind {
            KernelKind::Linear => KernelSpec::linear(c),
            KernelKind::Polynomial => KernelSpec::polynomial(kv.get("degree")?.unwrap_or(3), c),
            KernelKind::Rbf => KernelSpec::rbf(kv.get("sigma")?.unwrap_or(2.0), c),
        };

        if let Some(v) = kv.get_str("sweep_kernels") {
            cfg.sweep.kernels = parse_list("sweep_kernels", v)?;
        }
        if let Some(v) = kv.get_str("sweep_c") {
            cfg.sweep.c = parse_list("sweep_c", v)?;
        }
        if let Some(v) = kv.get_str("sweep_degree") {
            cfg.sweep.degrees = parse_list("sweep_degree", v)?;
        }
        if let Some(v) = kv.get_str("sweep_sigma") {
            cfg.sweep.sigmas = parse_list("sweep_sigma", v)?;
        }
        if let Some(v) = kv.get("split_fraction")? {
            cfg.split_fraction = v;
        }
        if let Some(v) = kv.get("split_seed")? {
            cfg.split_seed = v;
        }
        if let Some(v) = kv.get("solver_seed")? {
            cfg.solver_seed = v;
        }
        cfg.out_dir = kv.get_str("out_dir").map(resolve);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_key_values(&KeyValues::load(path)?, base)
    }

    /// Sets both the split and the solver seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.split_seed = seed;
        self.solver_seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return bad(format!("split_fraction must be in (0, 1), got {}", self.split_fraction));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return bad(format!("fps must be positive, got {}", self.fps));
        }
        self.kernel.validate()?;
        if self.sweep.kernels.is_empty() {
            return bad("sweep grid has no kernels".into());
        }
        for k in &self.sweep.kernels {
            if self.sweep.specs(*k).is_empty() {
                return bad(format!("sweep grid is empty for kernel {k}"));
            }
            for spec in self.sweep.specs(*k) {
                spec.validate()?;
            }
        }
        if let (DatasetSource::Directory(data), Some(out)) = (&self.source, &self.out_dir) {
            if data == out {
                return bad(format!("dataset and out_dir are the same path {}", data.display()));
            }
        }
        Ok(())
    }

    /// The resolved configuration in the same `key = value` format it is read from.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match &self.source {
            DatasetSource::Directory(p) => {
                let _ = writeln!(s, "dataset = {}", p.display());
            }
            DatasetSource::Benchmark { subjects, sequences, noise_rate, seed } => {
                let _ = writeln!(s, "synthetic = benchmark");
                let _ = writeln!(s, "synthetic_subjects = {subjects}");
                let _ = writeln!(s, "synthetic_sequences = {sequences}");
                let _ = writeln!(s, "synthetic_noise = {noise_rate}");
                let _ = writeln!(s, "synthetic_seed = {seed}");
            }
            DatasetSource::Xor { sequences, noise_rate, seed } => {
                let _ = writeln!(s, "synthetic = xor");
                let _ = writeln!(s, "synthetic_sequences = {sequences}");
                let _ = writeln!(s, "synthetic_noise = {noise_rate}");
                let _ = writeln!(s, "synthetic_seed = {seed}");
            }
        }
        let _ = writeln!(s, "fps = {}", self.fps);
        let _ = writeln!(s, "background = {}", self.background);
        let _ = writeln!(s, "background_threshold = {}", self.background_threshold);
        let _ = writeln!(s, "segmentation_threshold = {}", self.segmentation_threshold);
        let _ = writeln!(s, "kernel = {}", self.kernel.kernel.kind());
        let _ = writeln!(s, "c = {}", self.kernel.c);
        match self.kernel.kernel {
            Kernel::Polynomial { degree } => {
                let _ = writeln!(s, "degree = {degree}");
            }
            Kernel::Rbf { sigma } => {
                let _ = writeln!(s, "sigma = {sigma}");
            }
            Kernel::Linear => {}
        }
        let _ = writeln!(s, "sweep_kernels = {}", join(&self.sweep.kernels));
        let _ = writeln!(s, "sweep_c = {}", join(&self.sweep.c));
        let _ = writeln!(s, "sweep_degree = {}", join(&self.sweep.degrees));
        let _ = writeln!(s, "sweep_sigma = {}", join(&self.sweep.sigmas));
        let _ = writeln!(s, "split_fraction = {}", self.split_fraction);
        let _ = writeln!(s, "split_seed = {}", self.split_seed);
        let _ = writeln!(s, "solver_seed = {}", self.solver_seed);
        if let Some(out) = &self.out_dir {
            let _ = writeln!(s, "out_dir = {}", out.display());
        }
        s
    }
}
