//! Monte Carlo experiments: size and power grids, null-distribution draws,
//! the published tables, report emission, CSV data and the local-time demo.

pub mod config;
pub mod data;
pub mod demo;
pub mod report;
pub mod run;
pub mod tables;

pub use config::{standard_exponents, AltConfig, ExperimentConfig, RhoRule};
pub use data::{apply_test, apply_test_csv, read_pairs, read_pairs_file, BandwidthChoice, CsvTestOptions, CsvTestOutcome};
pub use demo::{localtime_demo, render_demo_csv, DemoConfig, DemoRow};
pub use report::{emit_report, render, write_output, Cell, Format, Report, ReportKind};
pub use run::{null_distribution_sample, run_power, run_size, NullSample, RunOptions};
pub use tables::{paper_table, render_reproduction, reproduce, PaperTable, Reproduction};
