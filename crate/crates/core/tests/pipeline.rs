use std::fs;

use gaitlock::imagery::write_sequence;
use gaitlock::pipeline::{
    ablation_on_records, extract_dataset, list_sequences, read_records, run_ablation, run_kernel_sweep, run_pipeline,
    split_records, sweep_csv, DatasetSource, PipelineConfig, SweepGrid,
};
use gaitlock::svm::{KernelKind, KernelSpec};
use gaitlock::synth::benchmark;
use gaitlock::{Error, Stage};

fn five_subjects() -> PipelineConfig {
    PipelineConfig {
        source: DatasetSource::Benchmark { subjects: 5, sequences: 4, noise_rate: 0.005, seed: 3 },
        kernel: KernelSpec::rbf(2.0, 10.0),
        ..PipelineConfig::default()
    }
}

#[test]
fn report_structure() {
    let report = run_pipeline(&five_subjects(), false).unwrap();
    assert_eq!(report.total(), 5);
    assert_eq!(report.split.train.len(), 15);
    let text = report.render();
    assert!(text.contains("accuracy = "));
    assert!(text.contains("total = 5\n"));
    assert!(text.contains("kernel = rbf\nc = 10\nsigma = 2\n"));
    assert!(text.contains("split_seed = 0\nsolver_seed = 0\n"));
    assert!(text.contains("[confusion.csv]\ntrue\\predicted,subject01"));
    assert_eq!(report.gallery.entries.len(), 5);
}

#[test]
fn same_config_same_bytes() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let outputs: Vec<Vec<Vec<u8>>> = dirs
        .iter()
        .map(|d| {
            let cfg = PipelineConfig { out_dir: Some(d.path().to_path_buf()), ..five_subjects() };
            run_pipeline(&cfg, false).unwrap();
            ["features.csv", "model.svm", "report.txt", "gallery.csv"].iter().map(|f| fs::read(d.path().join(f)).unwrap()).collect()
        })
        .collect();
    // the report embeds out_dir, so compare it with that line removed
    let strip = |b: &[u8]| String::from_utf8_lossy(b).lines().filter(|l| !l.starts_with("out_dir")).collect::<Vec<_>>().join("\n");
    assert_eq!(outputs[0][0], outputs[1][0]);
    assert_eq!(outputs[0][1], outputs[1][1]);
    assert_eq!(strip(&outputs[0][2]), strip(&outputs[1][2]));
    assert_eq!(outputs[0][3], outputs[1][3]);
}

#[test]
fn resume_reuses_stage_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig { out_dir: Some(dir.path().to_path_buf()), ..five_subjects() };
    let first = run_pipeline(&cfg, false).unwrap().render();
    let cached = dir.path().join("features/subject01/seq01.csv");
    assert!(cached.is_file());

    let resumed = run_pipeline(&cfg, true).unwrap().render();
    assert_eq!(first, resumed);

    // a tampered cache file is read back instead of recomputed
    let mut rec = read_records(&cached).unwrap();
    rec[0].features.spatial[0] += 1.5;
    gaitlock::pipeline::write_records(&cached, &rec).unwrap();
    let tampered = run_pipeline(&cfg, true).unwrap();
    assert!(tampered.records.contains(&rec[0]));

    fs::write(&cached, "garbage\n").unwrap();
    let err = run_pipeline(&cfg, true).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Features));
    // without resume the cache is rebuilt
    assert_eq!(run_pipeline(&cfg, false).unwrap().render(), first);
}

#[test]
fn directory_dataset_and_missing_subject() {
    let root = tempfile::tempdir().unwrap();
    for r in benchmark(3, 4, 0.005, 7) {
        let dir = root.path().join(&r.subject).join(&r.sequence);
        write_sequence(&dir, r.generate().unwrap().frames.frames()).unwrap();
    }
    let cfg = PipelineConfig { source: DatasetSource::Directory(root.path().to_path_buf()), ..five_subjects() };
    let from_disk = extract_dataset(&cfg, false).unwrap();
    let in_memory = extract_dataset(
        &PipelineConfig { source: DatasetSource::Benchmark { subjects: 3, sequences: 4, noise_rate: 0.005, seed: 7 }, ..cfg.clone() },
        false,
    )
    .unwrap();
    assert_eq!(from_disk, in_memory);

    fs::create_dir(root.path().join("subject99")).unwrap();
    let err = run_pipeline(&cfg, false).unwrap_err();
    assert_eq!(err.stage(), Some(Stage::Ingestion));
    assert!(err.to_string().contains("ingestion"));

    let missing = PipelineConfig { source: DatasetSource::Directory(root.path().join("nope")), ..cfg };
    assert_eq!(run_pipeline(&missing, false).unwrap_err().stage(), Some(Stage::Ingestion));
}

#[test]
fn empty_dataset() {
    let root = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig { source: DatasetSource::Directory(root.path().to_path_buf()), ..five_subjects() };
    let err = run_ablation(&cfg, false).unwrap_err();
    assert!(matches!(err.root(), Error::Empty), "{err}");
    assert!(matches!(ablation_on_records(&cfg, &[]).unwrap_err().root(), Error::Empty));
}

#[test]
fn split_keeps_one_test_sequence_per_subject() {
    let recs = extract_dataset(&five_subjects(), false).unwrap();
    for seed in 0..5 {
        let split = split_records(&recs, 0.75, seed).unwrap();
        assert_eq!(split.test.len(), 5);
        let mut subjects: Vec<_> = split.test.iter().map(|&i| recs[i].subject.clone()).collect();
        subjects.dedup();
        assert_eq!(subjects.len(), 5);
    }
    assert_ne!(split_records(&recs, 0.75, 0).unwrap(), split_records(&recs, 0.75, 1).unwrap());
}

#[test]
fn ablation_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig { out_dir: Some(dir.path().to_path_buf()), ..five_subjects() };
    let rows = run_ablation(&cfg, false).unwrap();
    assert_eq!(rows.iter().map(|r| r.set.dim()).collect::<Vec<_>>(), vec![4, 4, 6, 8, 10, 14]);
    let csv = fs::read_to_string(dir.path().join("ablation.csv")).unwrap();
    assert!(csv.starts_with("feature_set,dimension,accuracy\nspatial,4,"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn linear_only_sweep() {
    let cfg = PipelineConfig {
        sweep: SweepGrid { kernels: vec![KernelKind::Linear], c: vec![0.1, 1.0, 10.0, 100.0], ..SweepGrid::default() },
        ..five_subjects()
    };
    let results = run_kernel_sweep(&cfg, false).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].evaluations.len(), 4);
    let best = results[0].best_accuracy();
    assert!(results[0].evaluations.iter().all(|e| e.1 <= best));
    assert_eq!(results[0].evaluations.iter().position(|e| e.1 == best), Some(results[0].best));
    let csv = sweep_csv(&results);
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("linear,"));
}

#[test]
fn full_sweep_reports_winning_parameters() {
    let results = run_kernel_sweep(&five_subjects(), false).unwrap();
    let csv = sweep_csv(&results);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kernel,c,degree,sigma,accuracy,evaluations");
    assert!(lines[1].starts_with("linear,") && lines[1].contains(",-,-,"));
    assert!(lines[2].starts_with("poly,") && lines[2].ends_with(",8"));
    assert!(lines[3].starts_with("rbf,") && lines[3].ends_with(",16"));
}

#[test]
fn listing_is_sorted() {
    let list = list_sequences(&DatasetSource::Xor { sequences: 3, noise_rate: 0.0, seed: 0 }).unwrap();
    let keys: Vec<String> = list.iter().map(|e| e.key()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}
