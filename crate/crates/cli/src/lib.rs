//! Library side of the `rftt` command-line workbench: algorithm dispatch and
//! the reproducible benchmark harness.

pub mod bench;
pub mod dispatch;

pub use bench::{run_suite, BenchRow, SuiteEntry, SuiteSpec};
pub use dispatch::{solve, Algo};
