use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gaitlock::background::{self, BackgroundModel, Technique};
use gaitlock::config::KeyValues;
use gaitlock::gaitcycle;
use gaitlock::imagery::{self, write_pgm, FrameSequence};
use gaitlock::metrics;
use gaitlock::pipeline::{self, DatasetSource, FeatureRecord, PipelineConfig};
use gaitlock::segmentation::{self, SilhouetteMask};
use gaitlock::svm::{self, KernelKind, KernelSpec, SmoParams};
use gaitlock::synth;
use gaitlock::Error;

use crate::{Cli, Command, RunArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e.root() {
                Error::Config(_) | Error::InvalidParameter(_) | Error::SpecOutOfBounds(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

struct Ui {
    quiet: bool,
}

impl Ui {
    fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let ui = Ui { quiet: g.quiet };
    match &cli.command {
        Command::Background { technique, threshold, input, out } => {
            let seq = imagery::load_sequence(input, 25.0)?;
            let model = background::build(&seq, *technique, *threshold)?;
            write_pgm(out, &model.reference)?;
            let t = model.cdm_threshold.map(|t| format!(", change threshold {t}")).unwrap_or_default();
            ui.info(format!("{technique} background from {} frames{t} -> {}", seq.len(), out.display()));
        }
        Command::Segment { bg, threshold, input, out } => {
            let reference = imagery::read_frame(bg)?;
            let model = BackgroundModel { reference, technique: Technique::Median, cdm_threshold: None };
            let seq = imagery::load_sequence(input, 25.0)?;
            let frames = seq
                .frames()
                .iter()
                .map(|f| segmentation::segment(f, &model, *threshold).map(|m| m.to_frame()))
                .collect::<gaitlock::Result<Vec<_>>>()?;
            imagery::write_sequence(out, &frames)?;
            ui.info(format!("{} silhouettes -> {}", frames.len(), out.display()));
        }
        Command::Cycles { input, fps } => {
            check_fps(*fps)?;
            let masks = load_masks(input)?;
            let width = gaitcycle::WidthSignal::<f64>::from_masks(&masks, *fps);
            let period = gaitcycle::estimate_period(&width)?;
            let cycles = gaitcycle::partition_cycles(&width, period)?;
            let mut s = format!("period_frames,{period}\n\ncycle,start_frame,end_frame\n");
            for (i, c) in cycles.iter().enumerate() {
                let _ = writeln!(s, "{},{},{}", i + 1, c.start_frame + 1, c.end_frame + 1);
            }
            s.push_str("\nframe,width\n");
            for (i, w) in width.values.iter().enumerate() {
                let _ = writeln!(s, "{},{w}", i + 1);
            }
            print!("{s}");
        }
        Command::Features { input, fps, out, subject, sequence } => {
            check_fps(*fps)?;
            let name = |p: Option<&Path>| p.and_then(Path::file_name).map(|n| n.to_string_lossy().into_owned());
            let abs = std::fs::canonicalize(input).unwrap_or_else(|_| input.clone());
            let subject = subject.clone().or_else(|| name(abs.parent())).unwrap_or_else(|| "unknown".into());
            let sequence = sequence.clone().or_else(|| name(Some(&abs))).unwrap_or_else(|| "unknown".into());
            if subject.contains([',', ' ']) || sequence.contains([',', ' ']) {
                return Err(CliError::Usage("subject and sequence ids may not contain commas or spaces".into()));
            }
            let masks = load_masks(input)?;
            let (_, period, _, features) = pipeline::analyze_masks(&masks, *fps)?;
            pipeline::write_records(out, &[FeatureRecord { subject, sequence, features }])?;
            ui.info(format!("period {period} frames; features -> {}", out.display()));
        }
        Command::Train { features, kernel, c, degree, sigma, out } => {
            let spec = match kernel {
                KernelKind::Linear => KernelSpec::linear(*c),
                KernelKind::Polynomial => KernelSpec::polynomial(*degree, *c),
                KernelKind::Rbf => KernelSpec::rbf(*sigma, *c),
            };
            spec.validate()?;
            let records = pipeline::read_records(features)?;
            let xs: Vec<Vec<f64>> = records.iter().map(|r| r.features.fused()).collect();
            let ys: Vec<String> = records.iter().map(|r| r.subject.clone()).collect();
            let params = SmoParams { seed: g.seed.unwrap_or(0), ..SmoParams::default() };
            let model = svm::train_multiclass(&xs, &ys, &spec, &params)?;
            svm::save_model(&model, out)?;
            ui.info(format!(
                "{spec}: {} classes, {} machines, {} samples -> {}",
                model.classes.len(),
                model.machines.len(),
                xs.len(),
                out.display()
            ));
        }
        Command::Predict { model, features } => {
            let model = svm::load_model::<f64>(model)?;
            let mut s = String::from("subject_id,sequence_id,predicted\n");
            for r in pipeline::read_records(features)? {
                let _ = writeln!(s, "{},{},{}", r.subject, r.sequence, model.predict(&r.features.fused())?);
            }
            print!("{s}");
        }
        Command::Evaluate { model, features, labels } => {
            let model = svm::load_model::<f64>(model)?;
            let records = pipeline::read_records(features)?;
            let truth_of = read_labels(labels)?;
            let mut truth = Vec::new();
            let mut predicted = Vec::new();
            for r in &records {
                let key = (r.subject.clone(), r.sequence.clone());
                let Some(label) = truth_of.get(&key) else {
                    return Err(Error::Csv {
                        path: labels.clone(),
                        reason: format!("no label for {}/{}", r.subject, r.sequence),
                    }
                    .into());
                };
                truth.push(label.clone());
                predicted.push(model.predict(&r.features.fused())?.to_string());
            }
            let cm = metrics::evaluate(&truth, &predicted)?;
            let m = cm.measures::<f64>()?;
            let mut s = String::from("confusion matrix (rows: true, columns: predicted)\n");
            s.push_str(&cm.to_table());
            let _ = writeln!(s, "\naccuracy  {:.4}", m.accuracy);
            let _ = writeln!(s, "precision {:.4} (macro average)", m.precision);
            let _ = writeln!(s, "recall    {:.4} (macro average)", m.recall);
            let _ = writeln!(s, "f_measure {:.4}", m.f_measure);
            s.push_str("\n[measures.csv]\n");
            s.push_str(&pipeline::measures_csv(&m, cm.total()));
            s.push_str("\n[confusion.csv]\n");
            s.push_str(&cm.to_csv());
            print!("{s}");
        }
        Command::Synth { spec, out } => {
            let path = spec
                .as_ref()
                .or(g.config.as_ref())
                .ok_or_else(|| CliError::Usage("synth needs --spec <file> (or --config <file>)".into()))?;
            let (mut walker, scene) = synth::load_config(path)?;
            if let Some(seed) = g.seed {
                walker.seed = seed;
            }
            let seq = synth::generate(&walker, &scene)?;
            synth::write_synthetic(out, &seq)?;
            ui.info(format!("{} frames, period {} -> {}", scene.n_frames, walker.period_frames, out.display()));
        }
        Command::Pipeline(args) => {
            let cfg = pipeline_config(cli, args)?;
            ui.info(describe(&cfg));
            let report = pipeline::run_pipeline(&cfg, g.resume)?;
            print!("{}", report.render());
        }
        Command::Ablation(args) => {
            let cfg = pipeline_config(cli, args)?;
            ui.info(describe(&cfg));
            let rows = pipeline::run_ablation(&cfg, g.resume)?;
            print!("{}", pipeline::ablation_csv(&rows));
        }
        Command::KernelSweep(args) => {
            let cfg = pipeline_config(cli, args)?;
            ui.info(describe(&cfg));
            let results = pipeline::run_kernel_sweep(&cfg, g.resume)?;
            print!("{}", pipeline::sweep_csv(&results));
        }
    }
    Ok(())
}

fn check_fps(fps: f64) -> Result<()> {
    if fps.is_finite() && fps > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--fps must be positive, got {fps}")))
    }
}

/// Silhouette frames (foreground > 127) of a directory written by `segment`.
fn load_masks(dir: &Path) -> Result<Vec<SilhouetteMask>> {
    let seq: FrameSequence = imagery::load_sequence(dir, 25.0)?;
    Ok(seq.frames().iter().map(SilhouetteMask::from_frame).collect())
}

fn read_labels(path: &PathBuf) -> Result<BTreeMap<(String, String), String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    let fail = |line: usize, reason: &str| Error::Csv { path: path.clone(), reason: format!("line {line}: {reason}") };
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (n == 0 && line.starts_with("subject_id")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let [subject, sequence, label] = cols[..] else {
            return Err(fail(n + 1, "expected subject_id,sequence_id,label").into());
        };
        if out.insert((subject.to_string(), sequence.to_string()), label.to_string()).is_some() {
            return Err(fail(n + 1, "duplicate row").into());
        }
    }
    Ok(out)
}

fn pipeline_config(cli: &Cli, args: &RunArgs) -> Result<PipelineConfig> {
    let mut cfg = match &cli.global.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::from_key_values(&KeyValues::default(), Path::new("."))?,
    };
    if let Some(dir) = &args.dataset {
        cfg.source = DatasetSource::Directory(dir.clone());
    }
    if let Some(dir) = &args.out {
        cfg.out_dir = Some(dir.clone());
    }
    if let Some(seed) = cli.global.seed {
        cfg.set_seed(seed);
    }
    if cli.global.resume && cfg.out_dir.is_none() {
        return Err(CliError::Usage("--resume needs an output directory (--out or out_dir in the config)".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn describe(cfg: &PipelineConfig) -> String {
    let source = match &cfg.source {
        DatasetSource::Directory(p) => p.display().to_string(),
        DatasetSource::Benchmark { subjects, sequences, .. } => format!("synthetic benchmark ({subjects} x {sequences})"),
        DatasetSource::Xor { sequences, .. } => format!("synthetic xor benchmark (2 x {sequences})"),
    };
    format!("dataset: {source}; kernel {}", cfg.kernel)
}
