//! Measurement protocol: cross-validated kNN accuracy, stage timings,
//! landmark-ratio sweeps, ablations, the all-landmark equivalence check and
//! the multi-dataset benchmark.

mod ablation;
mod equivalence;
mod quality;
mod report;
mod suite;
mod sweep;
mod timing;

pub use ablation::{ablation_grid, AblationCell, AblationReport, TracePoint};
pub use equivalence::{equivalence_check, EquivalenceReport};
pub use quality::{knn_accuracy, knn_accuracy_with_folds, stratified_folds, QualityReport};
pub use report::{write_coordinates_csv, write_json, write_records_csv};
pub use suite::{benchmark_suite, BenchRow, DatasetEntry, SuiteOptions};
pub use sweep::{r_sweep, SweepPoint, SweepResult};
pub use timing::{median_timings, timed_run};
