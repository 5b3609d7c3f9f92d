//! Benchmark harness for matrix exponentiation strategies: grid sweeps,
//! per-size speedup tables, CSV and SVG bar charts.

pub mod config;
pub mod csv_out;
pub mod error;
pub mod plot;
pub mod run;
pub mod table;

pub use config::{make_backend, BenchConfig, BACKEND_NAMES};
pub use csv_out::{emit_csv, read_csv, write_csv, CSV_HEADER};
pub use error::{BenchError, Result};
pub use plot::{emit_plot, render_svg, PlotOptions};
pub use run::{run_benchmark, run_with_backends, BenchOutcome, BenchmarkRecord, PointFailure};
pub use table::{build_table, emit_table, speedup, SpeedupTable};
