//! Scenario files, demo families, sweeps and their reports.

pub mod demo;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use demo::{jolissaint_popa, matrix_trace, JpReport, MatrixTraceReport};
pub use report::{run, Report};
pub use scenario::{Analysis, ExpectationSpec, Scenario};
pub use sweep::{sweep, SweepReport};
