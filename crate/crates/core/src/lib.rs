//! Merge-over-all-paths analyses of sound deterministic negotiation diagrams,
//! computed by reduction instead of state-space exploration, together with
//! brute-force reference implementations used to cross-check them.

pub mod cli;
pub mod decompose;
pub mod diagram;
pub mod engine;
pub mod fixtures;
pub mod frameworks;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod rational;
pub mod semantics;
pub mod soundness;

pub use diagram::{Configuration, Diagram, Location, NodeId, OutcomeId, ProcSet, ProcessId};
pub use rational::Rational;
