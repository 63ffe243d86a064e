//! File formats, dataset ingestion, crop staging and pipeline orchestration
//! around [`decafbench_core`].

pub mod analyze;
pub mod crops;
pub mod dcf;
pub mod error;
pub mod ingest;
pub mod jsonio;
pub mod report_io;
pub mod samples;

pub use error::{Error, Result};
