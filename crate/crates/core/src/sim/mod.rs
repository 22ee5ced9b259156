//! Instance generators, the Monte Carlo engine and parameter sweeps.

mod generate;
mod registry;
mod simulate;
mod sweep;

pub use generate::{generate_instance, GeneratorKind, SyntheticParams};
pub use registry::{build_policy, PolicyKind};
pub use simulate::{
    csv_header_comment, replication_rng, run_simulation, write_csv, PolicyResult, ReplicationResult, SimulationConfig,
    Summary, CSV_COLUMNS,
};
pub use sweep::{sweep, SweepAxis, SweepRow};
