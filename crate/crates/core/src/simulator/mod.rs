//! Simulation of the `R`-random graph process on `n` vertices.
//!
//! Each round samples `ell` vertices uniformly with replacement, reads their
//! truncated component sizes, and adds the edge the rule picks. Loops and
//! edges inside a component use up the round without changing anything.

mod dsu;
mod process;
mod record;

pub use dsu::Dsu;
pub use process::{default_round_cap, ProcessState, RoundOutcome, RunOptions, SimError, DEFAULT_GIANT_EPSILON, RNG_ID};
pub use record::{read_runs, write_runs, write_snapshots, RunRecord, RunStatus, Snapshot, TableError};
