//! Standard-library companion to `mismatch-core`: problem files, CSV and
//! JSON-lines output, seeded pair corpora, thread-parallel drivers and the
//! `mismatch-lab` command line.

pub mod budget;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod parallel;
pub mod problem;
pub mod rundir;
pub mod table;

pub use error::{LabError, LabResult};
pub use problem::{load_problem, parse_problem, Problem, ProblemFile};
