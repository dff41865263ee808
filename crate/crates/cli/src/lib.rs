//! Job files for the `twint` command: parsing, canonical serialization and
//! execution.

pub mod job;
pub mod run;

pub use job::{parse_job, serialize, Job, JobError};
pub use run::{run_job, Flags, Report, RunError};
