//! Graph files, seeded random instances and ensemble verification.

pub mod io;
pub mod random;
pub mod verify;

pub use io::{parse_graph_file, parse_graph_str, GraphFile, LoadedGraph};
pub use random::{random_instance, InstanceSpec};
pub use verify::{run_verify, VerificationSummary, VerifyConfig};

/// Version tag written into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;
