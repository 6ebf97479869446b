//! Experiment harness around `covbeam-core`: run configuration, seeded
//! Monte-Carlo sweeps, the detector Monte-Carlo and result files.
//!
//! Sweeps run trials on the rayon pool and reduce in grid order, so results
//! depend only on the [`SweepSpec`](sweep::SweepSpec) and its seed.

pub mod config;
pub mod detect;
pub mod error;
pub mod output;
pub mod run;
pub mod seeds;
pub mod sweep;

pub use config::RunConfig;
pub use detect::{run_detector_mc, run_detector_mc_at, DetectorMc};
pub use error::{HarnessError, Result};
pub use output::{emit_results, read_csv, CsvRow};
pub use run::{run_design, Design, DesignReport, Outcome, Trial};
pub use sweep::{run_sweep, SweepParam, SweepResult, SweepSpec};
