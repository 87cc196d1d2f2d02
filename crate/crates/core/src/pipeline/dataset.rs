use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::background::{self, BackgroundModel};
use crate::error::{Error, Result, ResultExt, Stage};
use crate::features::{self, FeatureVector, FEATURE_NAMES, FUSED_DIM};
use crate::gaitcycle::{self, GaitCycle, WidthSignal};
use crate::imagery::{self, FrameSequence};
use crate::segmentation::{self, SilhouetteMask};
use crate::synth::{self, SequenceRecipe};

use super::config::{DatasetSource, PipelineConfig};

/// One recording to process.
#[derive(Debug, Clone)]
pub enum SequenceInput {
    Directory(PathBuf),
    Synthetic(Box<SequenceRecipe>),
}

#[derive(Debug, Clone)]
pub struct SequenceEntry {
    pub subject: String,
    pub sequence: String,
    pub input: SequenceInput,
}

impl SequenceEntry {
    pub fn key(&self) -> String {
        format!("{}/{}", self.subject, self.sequence)
    }

    pub fn load(&self, fps: f64) -> Result<FrameSequence> {
        match &self.input {
            SequenceInput::Directory(dir) => imagery::load_sequence(dir, fps),
            SequenceInput::Synthetic(recipe) => {
                let frames = recipe.generate()?.frames.frames().to_vec();
                FrameSequence::new(frames, fps)
            }
        }
    }
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            let name = entry.file_name().to_string_lossy().into_owned();
            out.push((name, path));
        }
    }
    out.sort();
    Ok(out)
}

/// Lists the sequences of `source` in subject, then sequence order.
pub fn list_sequences(source: &DatasetSource) -> Result<Vec<SequenceEntry>> {
    let entries: Vec<SequenceEntry> = match source {
        DatasetSource::Directory(root) => {
            let ctx = root.display().to_string();
            if !root.is_dir() {
                let missing = std::io::Error::new(std::io::ErrorKind::NotFound, "dataset directory does not exist");
                return Err(Error::io(root, missing).at(Stage::Ingestion, ctx));
            }
            let mut out = Vec::new();
            for (subject, sdir) in sorted_subdirs(root).at_stage(Stage::Ingestion, &ctx)? {
                let seqs = sorted_subdirs(&sdir).at_stage(Stage::Ingestion, &subject)?;
                if seqs.is_empty() {
                    return Err(Error::EmptyDirectory(sdir).at(Stage::Ingestion, subject));
                }
                for (sequence, qdir) in seqs {
                    out.push(SequenceEntry { subject: subject.clone(), sequence, input: SequenceInput::Directory(qdir) });
                }
            }
            out
        }
        DatasetSource::Benchmark { subjects, sequences, noise_rate, seed } => {
            recipes_to_entries(synth::benchmark(*subjects, *sequences, *noise_rate, *seed))
        }
        DatasetSource::Xor { sequences, noise_rate, seed } => {
            recipes_to_entries(synth::xor_benchmark(*sequences, *noise_rate, *seed))
        }
    };
    if entries.is_empty() {
        return Err(Error::Empty.at(Stage::Ingestion, "dataset"));
    }
    for e in &entries {
        if e.subject.is_empty() || e.subject.contains([',', ' ', '\t', '/']) || e.sequence.contains([',', '/']) {
            return Err(Error::InvalidParameter(format!("unsupported subject or sequence name {:?}", e.key()))
                .at(Stage::Ingestion, e.key()));
        }
    }
    Ok(entries)
}

fn recipes_to_entries(recipes: Vec<SequenceRecipe>) -> Vec<SequenceEntry> {
    recipes
        .into_iter()
        .map(|r| SequenceEntry {
            subject: r.subject.clone(),
            sequence: r.sequence.clone(),
            input: SequenceInput::Synthetic(Box::new(r)),
        })
        .collect()
}

/// Everything computed for one sequence on the way to its feature vector.
#[derive(Debug, Clone)]
pub struct SequenceAnalysis {
    pub background: BackgroundModel,
    pub masks: Vec<SilhouetteMask>,
    pub width: WidthSignal<f64>,
    pub period: usize,
    pub cycles: Vec<GaitCycle>,
    pub features: FeatureVector<f64>,
}

/// Masks to features; shared by the silhouette-directory commands and the full pipeline.
pub fn analyze_masks(masks: &[SilhouetteMask], fps: f64) -> Result<(WidthSignal<f64>, usize, Vec<GaitCycle>, FeatureVector<f64>)> {
    let width = WidthSignal::from_masks(masks, fps);
    let period = gaitcycle::estimate_period(&width).map_err(|e| e.at(Stage::GaitCycle, "period"))?;
    let cycles = gaitcycle::partition_cycles(&width, period).map_err(|e| e.at(Stage::GaitCycle, "partition"))?;
    let window = gaitcycle::select_feature_window(&cycles).map_err(|e| e.at(Stage::GaitCycle, "window"))?;
    let features = features::extract(masks, &window, fps).map_err(|e| e.at(Stage::Features, "extract"))?;
    Ok((width, period, cycles, features))
}

/// Background, segmentation, gait cycles and features for one frame sequence.
pub fn analyze_sequence(frames: &FrameSequence, cfg: &PipelineConfig, key: &str) -> Result<SequenceAnalysis> {
    let background =
        background::build(frames, cfg.background, cfg.background_threshold).at_stage(Stage::Background, key)?;
    let masks = frames
        .frames()
        .iter()
        .map(|f| segmentation::segment(f, &background, cfg.segmentation_threshold))
        .collect::<Result<Vec<_>>>()
        .at_stage(Stage::Segmentation, key)?;
    let (width, period, cycles, features) = analyze_masks(&masks, frames.fps()).map_err(|e| match e {
        Error::Stage { stage, source, .. } => Error::Stage { stage, context: key.to_string(), source },
        other => other.at(Stage::Features, key),
    })?;
    Ok(SequenceAnalysis { background, masks, width, period, cycles, features })
}

/// A labelled feature vector as stored in feature CSV files.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub subject: String,
    pub sequence: String,
    pub features: FeatureVector<f64>,
}

pub fn csv_header() -> String {
    format!("subject_id,sequence_id,{}", FEATURE_NAMES.join(","))
}

/// Writes the header and one row per record. Values use the shortest exact decimal form.
pub fn records_to_csv(records: &[FeatureRecord]) -> String {
    let mut s = csv_header();
    s.push('\n');
    for r in records {
        let _ = write!(s, "{},{}", r.subject, r.sequence);
        for v in r.features.fused() {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

pub fn records_from_csv(text: &str, path: &Path) -> Result<Vec<FeatureRecord>> {
    let fail = |line: usize, reason: String| Error::Csv { path: path.to_path_buf(), reason: format!("line {line}: {reason}") };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == csv_header() => {}
        Some((n, h)) => return Err(fail(n + 1, format!("unexpected header {h:?}"))),
        None => return Err(fail(1, "missing header".into())),
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != FUSED_DIM + 2 {
            return Err(fail(n + 1, format!("expected {} columns, found {}", FUSED_DIM + 2, cols.len())));
        }
        let values = cols[2..]
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| fail(n + 1, format!("not a number: {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        out.push(FeatureRecord {
            subject: cols[0].to_string(),
            sequence: cols[1].to_string(),
            features: FeatureVector::from_fused(&values)?,
        });
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<FeatureRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    records_from_csv(&text, path)
}

pub fn write_records(path: &Path, records: &[FeatureRecord]) -> Result<()> {
    write_text(path, &records_to_csv(records))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Feature records for every sequence of the configured dataset.
///
/// With an output directory, each sequence's record is written to
/// `features/<subject>/<sequence>.csv`; with `resume`, existing files are read back instead of
/// recomputed.
pub fn extract_dataset(cfg: &PipelineConfig, resume: bool) -> Result<Vec<FeatureRecord>> {
    let entries = list_sequences(&cfg.source)?;
    let mut records = Vec::with_capacity(entries.len());
    for entry in &entries {
        let key = entry.key();
        let cache = cfg.out_dir.as_ref().map(|d| d.join("features").join(&entry.subject).join(format!("{}.csv", entry.sequence)));
        if let (true, Some(path)) = (resume, &cache) {
            if path.is_file() {
                let mut cached = read_records(path).at_stage(Stage::Features, &key)?;
                if cached.len() == 1 && cached[0].subject == entry.subject && cached[0].sequence == entry.sequence {
                    records.push(cached.remove(0));
                    continue;
                }
            }
        }
        let frames = entry.load(cfg.fps).at_stage(Stage::Ingestion, &key)?;
        let analysis = analyze_sequence(&frames, cfg, &key)?;
        let record = FeatureRecord { subject: entry.subject.clone(), sequence: entry.sequence.clone(), features: analysis.features };
        if let Some(path) = &cache {
            write_records(path, std::slice::from_ref(&record)).at_stage(Stage::Output, &key)?;
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let fv = FeatureVector::from_fused(&(0..14).map(|i| (i as f64).sqrt() / 3.0 - 0.1).collect::<Vec<_>>()).unwrap();
        let recs = vec![FeatureRecord { subject: "s1".into(), sequence: "q1".into(), features: fv }];
        let text = records_to_csv(&recs);
        assert_eq!(records_from_csv(&text, Path::new("x")).unwrap(), recs);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let text = format!("{}\na,b,1\n", csv_header());
        let err = records_from_csv(&text, Path::new("f.csv")).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(records_from_csv("x,y\n", Path::new("f.csv")).is_err());
    }

    #[test]
    fn missing_dataset_is_an_ingestion_error() {
        let err = list_sequences(&DatasetSource::Directory("/nonexistent/gait".into())).unwrap_err();
        assert_eq!(err.stage(), Some(Stage::Ingestion));
    }
}
