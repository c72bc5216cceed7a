//! Analysis frameworks: a value lattice plus composable per-location
//! transformers and a solver for flow graphs labelled with transformers.

use std::fmt::Debug;

use rand::RngCore;
use thiserror::Error;

use crate::diagram::{Diagram, Location};

pub mod expected_cost;
pub mod genkill;
pub mod identity;
pub mod invariance;
pub mod naive;
pub mod worst_time;

pub use expected_cost::ExpectedCost;
pub use genkill::{GenKill, GenKillSpec, Variant};
pub use identity::Identity;
pub use invariance::{check_invariance, InvarianceMode, InvarianceVerdict};
pub use naive::NaiveAntiPattern;
pub use worst_time::WorstTime;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FrameworkError {
    #[error("the flow equations have no finite solution (expected value is infinite)")]
    SingularSystem,
    #[error("bad probabilities: {0}")]
    BadProbabilities(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("fixed-point iteration did not converge within {0} rounds")]
    Diverged(usize),
}

#[derive(Clone, Debug)]
pub struct FlowEdge<T> {
    pub from: usize,
    pub to: usize,
    pub label: T,
    pub origin: Option<Location>,
}

/// A sequential flow graph; the solver returns the join over all
/// entry-to-exit paths of the composed edge labels.
#[derive(Clone, Debug)]
pub struct FlowGraph<T> {
    pub vertex_count: usize,
    pub entry: usize,
    pub exit: usize,
    pub edges: Vec<FlowEdge<T>>,
}

impl<T> FlowGraph<T> {
    pub fn new(vertex_count: usize, entry: usize, exit: usize) -> Self {
        FlowGraph { vertex_count, entry, exit, edges: Vec::new() }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, label: T, origin: Option<Location>) {
        self.edges.push(FlowEdge { from, to, label, origin });
    }

    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from].push(i);
        }
        out
    }

    /// Vertices with a path to the exit.
    pub fn co_reachable(&self) -> Vec<bool> {
        let mut preds = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            preds[e.to].push(e.from);
        }
        let mut seen = vec![false; self.vertex_count];
        seen[self.exit] = true;
        let mut stack = vec![self.exit];
        while let Some(v) = stack.pop() {
            for &u in &preds[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    pub fn map_labels<U>(&self, f: impl Fn(&T) -> U) -> FlowGraph<U> {
        FlowGraph {
            vertex_count: self.vertex_count,
            entry: self.entry,
            exit: self.exit,
            edges: self
                .edges
                .iter()
                .map(|e| FlowEdge { from: e.from, to: e.to, label: f(&e.label), origin: e.origin })
                .collect(),
        }
    }
}

pub trait Framework {
    type Value: Clone + Debug + PartialEq;
    type Transformer: Clone + Debug;

    fn name(&self) -> &'static str;
    fn initial_value(&self) -> Self::Value;
    fn bottom(&self) -> Self::Value;
    fn join_values(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn leq(&self, a: &Self::Value, b: &Self::Value) -> bool;

    fn base(&self, d: &Diagram, loc: Location) -> Self::Transformer;
    fn identity(&self) -> Self::Transformer;
    /// Applies `first`, then `then`.
    fn compose(&self, first: &Self::Transformer, then: &Self::Transformer) -> Self::Transformer;
    fn join(&self, a: &Self::Transformer, b: &Self::Transformer) -> Self::Transformer;
    /// The transformer mapping everything to bottom (the empty join).
    fn zero(&self) -> Self::Transformer;
    fn apply(&self, t: &Self::Transformer, v: &Self::Value) -> Self::Value;
    /// `None` when equality of transformers cannot be decided exactly.
    fn transformer_eq(&self, a: &Self::Transformer, b: &Self::Transformer) -> Option<bool>;
    fn flow_solve(&self, g: &FlowGraph<Self::Transformer>) -> Result<Self::Transformer, FrameworkError>;
    fn sample_values(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Self::Value>;

    fn render_value(&self, v: &Self::Value) -> String {
        format!("{v:?}")
    }
}

/// Kleene iteration for frameworks whose transformer equality is decidable
/// and whose transformer lattice has finite height.
pub fn kleene_flow_solve<F: Framework + ?Sized>(
    fw: &F,
    g: &FlowGraph<F::Transformer>,
    max_rounds: usize,
) -> Result<F::Transformer, FrameworkError> {
    let out = g.outgoing();
    let mut sol: Vec<F::Transformer> = (0..g.vertex_count).map(|_| fw.zero()).collect();
    sol[g.exit] = fw.identity();
    for _ in 0..max_rounds {
        let mut changed = false;
        for v in 0..g.vertex_count {
            if v == g.exit {
                continue;
            }
            let mut acc = fw.zero();
            for &ei in &out[v] {
                let e = &g.edges[ei];
                acc = fw.join(&acc, &fw.compose(&e.label, &sol[e.to]));
            }
            if fw.transformer_eq(&acc, &sol[v]) != Some(true) {
                sol[v] = acc;
                changed = true;
            }
        }
        if !changed {
            return Ok(sol[g.entry].clone());
        }
    }
    Err(FrameworkError::Diverged(max_rounds))
}

/// Join over all entry-to-exit paths, by explicit enumeration. Only for
/// acyclic graphs; used to test the solvers.
pub fn path_enumeration_solve<F: Framework + ?Sized>(fw: &F, g: &FlowGraph<F::Transformer>) -> F::Transformer {
    fn walk<F: Framework + ?Sized>(
        fw: &F,
        g: &FlowGraph<F::Transformer>,
        out: &[Vec<usize>],
        v: usize,
        acc: F::Transformer,
        total: &mut F::Transformer,
    ) {
        if v == g.exit {
            *total = fw.join(total, &acc);
            return;
        }
        for &ei in &out[v] {
            let e = &g.edges[ei];
            walk(fw, g, out, e.to, fw.compose(&acc, &e.label), total);
        }
    }
    let out = g.outgoing();
    let mut total = fw.zero();
    walk(fw, g, &out, g.entry, fw.identity(), &mut total);
    total
}
