use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result, ResultExt, Stage};
use crate::features::{FeatureSet, FEATURE_NAMES, FUSED_DIM};
use crate::metrics::{self, ConfusionMatrix, Measures};
use crate::svm::{self, KernelKind, KernelSpec, MachineReport, SmoParams, SvmModel};

use super::config::PipelineConfig;
use super::dataset::{extract_dataset, write_text, FeatureRecord};

/// Train/test partition of a record list (indices into it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per subject, shuffles the sequences with `seed` and keeps `round(fraction * n)` of them
/// (at least one, and at least one left over when the subject has two or more) for training.
pub fn split_records(records: &[FeatureRecord], fraction: f64, seed: u64) -> Result<Split> {
    if records.is_empty() {
        return Err(Error::Empty);
    }
    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_subject.entry(&r.subject).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for idx in by_subject.values_mut() {
        idx.sort_by(|&a, &b| records[a].sequence.cmp(&records[b].sequence));
        idx.shuffle(&mut rng);
        let n = idx.len();
        let k = if n < 2 { n } else { ((fraction * n as f64).round() as usize).clamp(1, n - 1) };
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    if test.is_empty() {
        return Err(Error::InvalidParameter("split leaves no test sequences; every subject needs two or more".into()));
    }
    Ok(Split { train, test })
}

fn gather(records: &[FeatureRecord], idx: &[usize], set: FeatureSet) -> (Vec<Vec<f64>>, Vec<String>) {
    idx.iter().map(|&i| (set.project(&records[i].features), records[i].subject.clone())).unzip()
}

pub fn solver_params(cfg: &PipelineConfig) -> SmoParams<f64> {
    SmoParams { seed: cfg.solver_seed, ..SmoParams::default() }
}

/// Trains on the training rows of `split` and returns the model, its machine reports and the
/// test predictions.
pub fn train_and_test(
    records: &[FeatureRecord],
    split: &Split,
    set: FeatureSet,
    spec: &KernelSpec<f64>,
    params: &SmoParams<f64>,
) -> Result<(SvmModel<f64>, Vec<MachineReport<f64>>, Vec<String>)> {
    let (xs, ys) = gather(records, &split.train, set);
    let (model, reports) = svm::train_multiclass_with_report(&xs, &ys, spec, params).at_stage(Stage::Training, spec.to_string())?;
    let predictions = predict_rows(&model, records, &split.test, set)?;
    Ok((model, reports, predictions))
}

fn predict_rows(model: &SvmModel<f64>, records: &[FeatureRecord], idx: &[usize], set: FeatureSet) -> Result<Vec<String>> {
    idx.iter()
        .map(|&i| {
            let r = &records[i];
            model.predict(&set.project(&r.features)).map(str::to_string).at_stage(Stage::Evaluation, format!("{}/{}", r.subject, r.sequence))
        })
        .collect()
}

fn accuracy(records: &[FeatureRecord], idx: &[usize], predictions: &[String]) -> Result<f64> {
    let truth: Vec<&str> = idx.iter().map(|&i| records[i].subject.as_str()).collect();
    let pred: Vec<&str> = predictions.iter().map(String::as_str).collect();
    let cm = metrics::evaluate(&truth, &pred).at_stage(Stage::Evaluation, "test split")?;
    Ok(cm.measures::<f64>()?.accuracy)
}

/// Per-subject mean of the training vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    pub entries: Vec<(String, Vec<f64>)>,
}

impl Gallery {
    pub fn from_training(records: &[FeatureRecord], train: &[usize]) -> Self {
        let mut sums: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
        for &i in train {
            let e = sums.entry(&records[i].subject).or_insert_with(|| (vec![0.0; FUSED_DIM], 0));
            for (s, v) in e.0.iter_mut().zip(records[i].features.fused()) {
                *s += v;
            }
            e.1 += 1;
        }
        let entries = sums.into_iter().map(|(k, (s, n))| (k.to_string(), s.into_iter().map(|v| v / n as f64).collect())).collect();
        Self { entries }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("subject_id,{}\n", FEATURE_NAMES.join(","));
        for (subject, mean) in &self.entries {
            s.push_str(subject);
            for v in mean {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    /// Nearest gallery entry in the space z-scored by `normalizer`; the first entry wins ties.
    pub fn nearest(&self, normalizer: &svm::Normalizer<f64>, x: &[f64]) -> &str {
        let z = normalizer.apply(x);
        let mut best = (f64::INFINITY, "");
        for (subject, mean) in &self.entries {
            let m = normalizer.apply(mean);
            let d: f64 = z.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, subject);
            }
        }
        best.1
    }
}

/// Outcome of a full pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub config_text: String,
    pub records: Vec<FeatureRecord>,
    pub split: Split,
    pub predictions: Vec<String>,
    pub confusion: ConfusionMatrix,
    pub measures: Measures<f64>,
    pub gallery: Gallery,
    pub gallery_accuracy: f64,
    pub model: SvmModel<f64>,
    pub machines: Vec<MachineReport<f64>>,
}

fn row_key(r: &FeatureRecord) -> String {
    format!("{}/{}", r.subject, r.sequence)
}

impl PipelineReport {
    pub fn total(&self) -> u64 {
        self.confusion.total()
    }

    /// Human-readable summary followed by CSV blocks; identical inputs give identical bytes.
    pub fn render(&self) -> String {
        let m = &self.measures;
        let mut s = String::from("gaitlock pipeline report\n\n[config]\n");
        s.push_str(&self.config_text);
        s.push_str("\n[split]\n");
        let keys = |idx: &[usize]| idx.iter().map(|&i| row_key(&self.records[i])).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "train = {}", keys(&self.split.train));
        let _ = writeln!(s, "test = {}", keys(&self.split.test));
        s.push_str("\n[summary]\n");
        let _ = writeln!(s, "total = {}", self.total());
        let _ = writeln!(s, "correct = {}", self.confusion.trace());
        let _ = writeln!(s, "accuracy = {:.6}", m.accuracy);
        let _ = writeln!(s, "precision = {:.6} (macro average)", m.precision);
        let _ = writeln!(s, "recall = {:.6} (macro average)", m.recall);
        let _ = writeln!(s, "f_measure = {:.6}", m.f_measure);
        let _ = writeln!(s, "gallery_nearest_mean_accuracy = {:.6}", self.gallery_accuracy);
        s.push_str("\n[confusion]\n");
        s.push_str(&self.confusion.to_table());
        s.push_str("\n[predictions.csv]\nsubject_id,sequence_id,predicted\n");
        for (&i, p) in self.split.test.iter().zip(&self.predictions) {
            let r = &self.records[i];
            let _ = writeln!(s, "{},{},{p}", r.subject, r.sequence);
        }
        s.push_str("\n[measures.csv]\n");
        s.push_str(&measures_csv(m, self.total()));
        s.push_str("\n[confusion.csv]\n");
        s.push_str(&self.confusion.to_csv());
        s
    }
}

pub fn measures_csv(m: &Measures<f64>, total: u64) -> String {
    format!(
        "measure,value\ntotal,{total}\naccuracy,{}\nprecision,{}\nrecall,{}\nf_measure,{}\n",
        m.accuracy, m.precision, m.recall, m.f_measure
    )
}

/// Features, training, evaluation and gallery for the configured dataset.
///
/// With `cfg.out_dir` set, writes `features.csv`, `gallery.csv`, `model.svm` and `report.txt`
/// there. With `resume`, per-sequence feature files and an existing `model.svm` are reused.
pub fn run_pipeline(cfg: &PipelineConfig, resume: bool) -> Result<PipelineReport> {
    cfg.validate()?;
    let records = extract_dataset(cfg, resume)?;
    run_on_records(cfg, records, resume)
}

/// [`run_pipeline`] on already extracted features.
pub fn run_on_records(cfg: &PipelineConfig, records: Vec<FeatureRecord>, resume: bool) -> Result<PipelineReport> {
    let split = split_records(&records, cfg.split_fraction, cfg.split_seed).at_stage(Stage::Training, "split")?;
    let set = FeatureSet::All;
    let model_path = cfg.out_dir.as_ref().map(|d| d.join("model.svm"));
    let reuse = match &model_path {
        Some(p) if resume && p.is_file() => Some(svm::load_model::<f64>(p).at_stage(Stage::Training, p.display().to_string())?),
        _ => None,
    };
    let (model, machines, predictions) = match reuse {
        Some(model) => {
            let predictions = predict_rows(&model, &records, &split.test, set)?;
            (model, Vec::new(), predictions)
        }
        None => train_and_test(&records, &split, set, &cfg.kernel, &solver_params(cfg))?,
    };

    let truth: Vec<&str> = split.test.iter().map(|&i| records[i].subject.as_str()).collect();
    let pred: Vec<&str> = predictions.iter().map(String::as_str).collect();
    let confusion = metrics::evaluate(&truth, &pred).at_stage(Stage::Evaluation, "test split")?;
    let measures = confusion.measures::<f64>().at_stage(Stage::Evaluation, "test split")?;

    let gallery = Gallery::from_training(&records, &split.train);
    let nn_hits = split
        .test
        .iter()
        .filter(|&&i| gallery.nearest(&model.normalizer, &records[i].features.fused()) == records[i].subject)
        .count();
    let gallery_accuracy = nn_hits as f64 / split.test.len() as f64;

    let report = PipelineReport {
        config_text: cfg.to_text(),
        records,
        split,
        predictions,
        confusion,
        measures,
        gallery,
        gallery_accuracy,
        model,
        machines,
    };
    if let Some(dir) = &cfg.out_dir {
        let out = |name: &str, text: &str| write_text(&dir.join(name), text).at_stage(Stage::Output, name);
        out("features.csv", &super::dataset::records_to_csv(&report.records))?;
        out("gallery.csv", &report.gallery.to_csv())?;
        out("model.svm", &svm::model_to_string(&report.model))?;
        out("report.txt", &report.render())?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub set: FeatureSet,
    pub accuracy: f64,
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut s = String::from("feature_set,dimension,accuracy\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.set.name(), r.set.dim(), r.accuracy);
    }
    s
}

/// One model per feature-set row, same split, kernel and solver seed.
pub fn run_ablation(cfg: &PipelineConfig, resume: bool) -> Result<Vec<AblationRow>> {
    cfg.validate()?;
    let records = extract_dataset(cfg, resume)?;
    let rows = ablation_on_records(cfg, &records)?;
    if let Some(dir) = &cfg.out_dir {
        write_text(&dir.join("ablation.csv"), &ablation_csv(&rows)).at_stage(Stage::Output, "ablation.csv")?;
    }
    Ok(rows)
}

pub fn ablation_on_records(cfg: &PipelineConfig, records: &[FeatureRecord]) -> Result<Vec<AblationRow>> {
    let split = split_records(records, cfg.split_fraction, cfg.split_seed).at_stage(Stage::Training, "split")?;
    let params = solver_params(cfg);
    FeatureSet::ABLATION
        .iter()
        .map(|&set| {
            let (_, _, predictions) = train_and_test(records, &split, set, &cfg.kernel, &params)?;
            Ok(AblationRow { set, accuracy: accuracy(records, &split.test, &predictions)? })
        })
        .collect()
}

/// Every evaluated grid point of one kernel kind and the index of the best one.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: KernelKind,
    pub evaluations: Vec<(KernelSpec<f64>, f64)>,
    /// First grid point reaching the maximum accuracy.
    pub best: usize,
}

impl SweepResult {
    pub fn best_spec(&self) -> KernelSpec<f64> {
        self.evaluations[self.best].0
    }

    pub fn best_accuracy(&self) -> f64 {
        self.evaluations[self.best].1
    }
}

/// Winning hyperparameters per kernel; `-` marks parameters the kernel does not have.
pub fn sweep_csv(results: &[SweepResult]) -> String {
    let mut s = String::from("kernel,c,degree,sigma,accuracy,evaluations\n");
    for r in results {
        let spec = r.best_spec();
        let (d, sigma) = match spec.kernel {
            svm::Kernel::Linear => ("-".to_string(), "-".to_string()),
            svm::Kernel::Polynomial { degree } => (degree.to_string(), "-".to_string()),
            svm::Kernel::Rbf { sigma } => ("-".to_string(), sigma.to_string()),
        };
        let _ = writeln!(s, "{},{},{d},{sigma},{},{}", r.kind, spec.c, r.best_accuracy(), r.evaluations.len());
    }
    s
}

pub fn run_kernel_sweep(cfg: &PipelineConfig, resume: bool) -> Result<Vec<SweepResult>> {
    cfg.validate()?;
    let records = extract_dataset(cfg, resume)?;
    let results = sweep_on_records(cfg, &records)?;
    if let Some(dir) = &cfg.out_dir {
        write_text(&dir.join("kernel_sweep.csv"), &sweep_csv(&results)).at_stage(Stage::Output, "kernel_sweep.csv")?;
    }
    Ok(results)
}

pub fn sweep_on_records(cfg: &PipelineConfig, records: &[FeatureRecord]) -> Result<Vec<SweepResult>> {
    let split = split_records(records, cfg.split_fraction, cfg.split_seed).at_stage(Stage::Training, "split")?;
    let params = solver_params(cfg);
    let mut results = Vec::new();
    for &kind in &cfg.sweep.kernels {
        let mut evaluations = Vec::new();
        let mut best = 0;
        for spec in cfg.sweep.specs(kind) {
            let (_, _, predictions) = train_and_test(records, &split, FeatureSet::All, &spec, &params)?;
            let acc = accuracy(records, &split.test, &predictions)?;
            if acc > evaluations.get(best).map_or(f64::NEG_INFINITY, |e: &(KernelSpec<f64>, f64)| e.1) {
                best = evaluations.len();
            }
            evaluations.push((spec, acc));
        }
        if evaluations.is_empty() {
            return Err(Error::Config(format!("sweep grid is empty for kernel {kind}")));
        }
        results.push(SweepResult { kind, evaluations, best });
    }
    Ok(results)
}
