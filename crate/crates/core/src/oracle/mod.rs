//! Brute-force reference implementations used as ground truth by the tests:
//! run enumeration under priority schedulers, value-level fixed points on the
//! configuration graph, a regex oracle for the gen/kill languages, and a
//! generator of sound diagrams. None of this shares solver code with the
//! engine or the frameworks.

use thiserror::Error;

pub mod brute;
pub mod generate;
pub mod regex;
pub mod runs;

pub use brute::{brute_mop, config_graph, BruteSolve, ConfigGraph};
pub use generate::{generate_sound_diagram, GenParams, Generated, Strategy};
pub use regex::{regex_holds, regex_holds_exact, trace_condition_holds, RegexVerdict};
pub use runs::{best_case_time, enumerate_all_runs, enumerate_runs, run_makespan, PriorityScheduler, RunSet};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("configuration graph exceeded {0} configurations")]
    LimitExceeded(usize),
    #[error("no fixed point within {0} rounds")]
    Diverged(usize),
    #[error("the linear system for expected costs is singular")]
    Singular,
    #[error("could not generate a sound diagram within {0} attempts")]
    GenerationFailed(usize),
}
