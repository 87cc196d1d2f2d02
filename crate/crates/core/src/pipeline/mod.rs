//! End-to-end runs: dataset ingestion, per-sequence analysis, training, evaluation, the
//! per-subject gallery and the ablation / kernel-sweep harnesses.

mod config;
mod dataset;
mod run;

pub use config::{DatasetSource, PipelineConfig, SweepGrid, CONFIG_KEYS};
pub use dataset::{
    analyze_masks, analyze_sequence, csv_header, extract_dataset, list_sequences, read_records, records_from_csv,
    records_to_csv, write_records, FeatureRecord, SequenceAnalysis, SequenceEntry, SequenceInput,
};
pub use run::{
    ablation_csv, ablation_on_records, measures_csv, run_ablation, run_kernel_sweep, run_on_records, run_pipeline,
    solver_params, split_records, sweep_csv, sweep_on_records, train_and_test, AblationRow, Gallery, PipelineReport,
    Split, SweepResult,
};
