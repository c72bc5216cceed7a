//! The trivial framework: one value, one transformer. Useful as a baseline
//! for the engine and the invariance checker.

use rand::RngCore;

use super::{FlowGraph, Framework, FrameworkError};
use crate::diagram::{Diagram, Location};

#[derive(Copy, Clone, Debug, Default)]
pub struct Identity;

impl Framework for Identity {
    type Value = ();
    type Transformer = ();

    fn name(&self) -> &'static str {
        "identity"
    }

    fn initial_value(&self) {}
    fn bottom(&self) {}
    fn join_values(&self, _: &(), _: &()) {}

    fn leq(&self, _: &(), _: &()) -> bool {
        true
    }

    fn base(&self, _: &Diagram, _: Location) {}
    fn identity(&self) {}
    fn compose(&self, _: &(), _: &()) {}
    fn join(&self, _: &(), _: &()) {}
    fn zero(&self) {}
    fn apply(&self, _: &(), _: &()) {}

    fn transformer_eq(&self, _: &(), _: &()) -> Option<bool> {
        Some(true)
    }

    fn flow_solve(&self, _: &FlowGraph<()>) -> Result<(), FrameworkError> {
        Ok(())
    }

    fn sample_values(&self, _: &mut dyn RngCore, count: usize) -> Vec<()> {
        vec![(); count]
    }

    fn render_value(&self, _: &()) -> String {
        "()".to_string()
    }
}
