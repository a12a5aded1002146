//! Metrics, the published-table check, grid search and the benchmark.

pub mod benchmark;
pub mod grid;
pub mod metrics;
pub mod paper;
pub mod report;

pub use benchmark::{run_benchmark, run_benchmark_full, BenchmarkConfig, BenchmarkReport, BenchmarkRun, ModelResult};
pub use grid::{default_grid, DEFAULT_FOLDS, grid_search, grid_search_with_probe, stratified_folds, CvRow, FoldAccess, GridResult};
pub use metrics::{confusion_matrix, summarize_metrics, ConfusionMatrix, EvalReport};
pub use paper::{reproduce_paper_tables, ColumnReading, PaperCheck};
pub use report::{render_report, ReportFormat};
