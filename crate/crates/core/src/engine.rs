//! The reduction engine: computes the meet-over-all-paths value of a sound
//! deterministic diagram by repeatedly collapsing subnegotiations into single
//! fresh outcomes whose transformers are kept in a registry.
//!
//! Stages run over domains in inclusion order. In a stage with domain `X`,
//! every location of every node with domain `X` is first short-circuited to
//! where its one-trace continuation ends, then every such node is replaced by
//! a single outcome whose transformer is the flow solution of the replication
//! it heads. Nothing here explores global configurations.

use std::collections::{BTreeMap, HashMap, VecDeque};

use smallvec::smallvec;
use thiserror::Error;

use crate::decompose::{saturate, DecomposeError, FiringOrder, PartialConfig, SubnegotiationKind};
use crate::diagram::{
    validate_with, Diagram, Location, NodeId, OutcomeId, ProcSet, ProcessId, Transition, ValidationMode,
};
use crate::frameworks::{FlowGraph, Framework, FrameworkError};
use crate::graph::graph_reachable;
use crate::rational::int;
use crate::semantics::is_deterministic;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("the diagram is not sound: {0}")]
    NotSoundEvidence(String),
    #[error("the diagram is not deterministic: {0}")]
    NotDeterministic(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("{0} is already reduced")]
    AlreadyReduced(String),
    #[error("internal invariant broken: {0}")]
    EngineInvariantBroken(String),
    #[error(transparent)]
    Framework(#[from] FrameworkError),
}

impl EngineError {
    fn from_saturation(e: DecomposeError) -> EngineError {
        match e {
            DecomposeError::Unreduced(_) | DecomposeError::UnknownLocation(_) => {
                EngineError::EngineInvariantBroken(e.to_string())
            }
            other => EngineError::NotSoundEvidence(other.to_string()),
        }
    }
}

/// Which candidate goes first whenever the reduction order is free.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestFirst,
    HighestFirst,
}

#[derive(Copy, Clone, Debug)]
pub struct EngineOptions {
    pub tie_break: TieBreak,
    /// Saturate in both firing orders and compare the endpoints.
    pub check_confluence: bool,
    pub record_snapshots: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { tie_break: TieBreak::LowestFirst, check_confluence: true, record_snapshots: true }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    Location,
    Node,
}

#[derive(Clone, Debug)]
pub struct ReductionStep<T> {
    pub kind: StepKind,
    pub pivot: NodeId,
    /// The replaced location, for location steps.
    pub location: Option<Location>,
    pub fresh: Location,
    pub fresh_name: String,
    pub moves: Vec<(ProcessId, NodeId)>,
    /// Fired locations of the one-trace continuation, or the node vertices of
    /// the replication.
    pub members: Vec<String>,
    pub classification: SubnegotiationKind,
    pub transformer: T,
    /// Index of the snapshot taken at the end of this step's stage.
    pub snapshot: usize,
    /// Unreduced locations plus unreduced nodes, after the step.
    pub progress: usize,
}

#[derive(Clone, Debug)]
pub struct ReductionTrace<T> {
    pub steps: Vec<ReductionStep<T>>,
    /// Stage domains, in order.
    pub stages: Vec<ProcSet>,
    /// Live part of the working diagram: first after the initial pruning,
    /// then after every stage.
    pub snapshots: Vec<Diagram>,
}

#[derive(Clone, Debug)]
pub struct MopResult<T, V> {
    pub transformer: T,
    pub value: V,
    pub trace: ReductionTrace<T>,
}

pub struct Engine<'f, F: Framework> {
    fw: &'f F,
    options: EngineOptions,
    d: Diagram,
    live: Vec<bool>,
    reduced_node: Vec<bool>,
    reduced_location: HashMap<Location, bool>,
    registry: BTreeMap<Location, F::Transformer>,
    trace: ReductionTrace<F::Transformer>,
}

/// A replication solve waiting to be applied.
struct PendingNode<T> {
    node: NodeId,
    transformer: T,
    exit: PartialConfig,
    members: Vec<String>,
}

impl<'f, F: Framework> Engine<'f, F> {
    pub fn new(d: &Diagram, fw: &'f F, options: EngineOptions) -> Result<Self, EngineError> {
        let det = is_deterministic(d);
        if !det.deterministic {
            let (n, a, p) = det.witnesses[0];
            return Err(EngineError::NotDeterministic(format!(
                "{} moves {} to several nodes",
                d.location_name(Location::new(n, a)),
                d.process_name(p)
            )));
        }
        let mut engine = Engine {
            fw,
            options,
            d: d.clone(),
            live: graph_reachable(d),
            reduced_node: vec![false; d.nodes.len()],
            reduced_location: HashMap::new(),
            registry: BTreeMap::new(),
            trace: ReductionTrace { steps: Vec::new(), stages: Vec::new(), snapshots: Vec::new() },
        };
        engine.initial_flags()?;
        engine.snapshot();
        Ok(engine)
    }

    pub fn diagram(&self) -> &Diagram {
        &self.d
    }

    pub fn is_live(&self, n: NodeId) -> bool {
        self.live[n.index()]
    }

    pub fn is_flagged_reduced(&self, n: NodeId) -> bool {
        self.reduced_node[n.index()]
    }

    pub fn registry(&self) -> &BTreeMap<Location, F::Transformer> {
        &self.registry
    }

    pub fn trace(&self) -> &ReductionTrace<F::Transformer> {
        &self.trace
    }

    /// The transformer currently attached to a location of the working diagram.
    pub fn transformer(&self, loc: Location) -> F::Transformer {
        self.registry.get(&loc).cloned().unwrap_or_else(|| self.fw.base(&self.d, loc))
    }

    fn order<T>(&self, mut items: Vec<T>) -> Vec<T> {
        if self.options.tie_break == TieBreak::HighestFirst {
            items.reverse();
        }
        items
    }

    fn firing_order(&self) -> FiringOrder {
        match self.options.tie_break {
            TieBreak::LowestFirst => FiringOrder::LowestFirst,
            TieBreak::HighestFirst => FiringOrder::HighestFirst,
        }
    }

    fn pending_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.d.node_ids().filter(|&n| self.live[n.index()] && self.d.has_outcomes(n) && !self.reduced_node[n.index()])
    }

    fn check_smaller_reduced(&self, n: NodeId) -> Result<(), EngineError> {
        let dom = self.d.dom(n);
        match self.pending_nodes().find(|&m| self.d.dom(m).is_strict_subset(dom)) {
            Some(m) => Err(EngineError::PreconditionViolated(format!(
                "`{}` has a smaller domain than `{}` and is not reduced",
                self.d.node_name(m),
                self.d.node_name(n)
            ))),
            None => Ok(()),
        }
    }

    /// A node is reduced when it has one outcome whose moves already lead to
    /// a partial configuration where no node inside its domain can fire.
    pub fn is_reduced_node(&self, n: NodeId) -> Result<bool, EngineError> {
        self.check_smaller_reduced(n)?;
        let node = self.d.node(n);
        if node.outcomes.len() != 1 {
            return Ok(false);
        }
        let a = *node.outcomes.keys().next().expect("one outcome");
        let after = PartialConfig::after(&self.d, Location::new(n, a));
        let dom = self.d.dom(n);
        let blocked = after
            .scope
            .iter()
            .filter_map(|p| after.get(p))
            .all(|m| !(self.live[m.index()] && self.d.has_outcomes(m) && self.d.dom(m).is_subset(dom) && after.enables(&self.d, m)));
        Ok(blocked)
    }

    fn initial_flags(&mut self) -> Result<(), EngineError> {
        let mut ids: Vec<NodeId> = self.d.node_ids().filter(|&n| self.live[n.index()]).collect();
        ids.sort_by_key(|&n| (self.d.dom(n).len(), n));
        for n in ids {
            if !self.d.has_outcomes(n) || self.check_smaller_reduced(n).is_err() {
                continue;
            }
            if self.is_reduced_node(n)? {
                self.reduced_node[n.index()] = true;
                for a in self.d.outcomes(n).collect::<Vec<_>>() {
                    self.reduced_location.insert(Location::new(n, a), true);
                }
            }
        }
        Ok(())
    }

    fn progress(&self) -> usize {
        let mut count = 0;
        for n in self.pending_nodes() {
            count += 1;
            count += self
                .d
                .outcomes(n)
                .filter(|&a| !self.reduced_location.get(&Location::new(n, a)).copied().unwrap_or(false))
                .count();
        }
        count
    }

    fn saturate_after(&self, loc: Location) -> Result<crate::decompose::Saturation, EngineError> {
        let start = PartialConfig::after(&self.d, loc);
        let dom = self.d.dom(loc.node);
        let max_steps = self.d.nodes.len() + 1;
        let sat = saturate(&self.d, &start, dom, true, &self.live, self.firing_order(), max_steps)
            .map_err(EngineError::from_saturation)?;
        if self.options.check_confluence {
            let other = match self.firing_order() {
                FiringOrder::LowestFirst => FiringOrder::HighestFirst,
                FiringOrder::HighestFirst => FiringOrder::LowestFirst,
            };
            let alt = saturate(&self.d, &start, dom, true, &self.live, other, max_steps)
                .map_err(EngineError::from_saturation)?;
            if alt.end != sat.end {
                return Err(EngineError::NotSoundEvidence(format!(
                    "the continuation of {} ends in {} or {} depending on the firing order",
                    self.d.location_name(loc),
                    sat.end.display(&self.d),
                    alt.end.display(&self.d)
                )));
            }
        }
        Ok(sat)
    }

    /// The transformer of the one-trace continuation of `loc`: the location
    /// itself followed by everything strictly inside its domain that it enables.
    pub fn one_trace_mop(&self, loc: Location) -> Result<(F::Transformer, Vec<Location>, PartialConfig), EngineError> {
        if self.d.transition(loc).is_none() {
            return Err(EngineError::PreconditionViolated(format!("no location {loc:?}")));
        }
        self.check_smaller_reduced(loc.node)?;
        let sat = self.saturate_after(loc)?;
        let mut t = self.transformer(loc);
        for &l in &sat.fired {
            t = self.fw.compose(&t, &self.transformer(l));
        }
        Ok((t, sat.fired, sat.end))
    }

    /// Replaces `loc` by a fresh outcome that jumps to the end of its
    /// one-trace continuation.
    pub fn red_location(&mut self, loc: Location) -> Result<(), EngineError> {
        if self.reduced_location.get(&loc).copied().unwrap_or(false) {
            return Err(EngineError::AlreadyReduced(self.d.location_name(loc)));
        }
        let (t, fired, end) = self.one_trace_mop(loc)?;
        if fired.is_empty() {
            self.reduced_location.insert(loc, true);
            return Err(EngineError::AlreadyReduced(self.d.location_name(loc)));
        }
        let name = format!("{}_{}", self.d.outcome_name(loc.outcome), self.d.node_name(loc.node));
        let old = self.d.node(loc.node).outcomes.get(&loc.outcome).expect("checked above").clone();
        let prob = old.annotations.prob.clone();
        let fresh = self.install(loc.node, Some(loc.outcome), &name, &end, prob);
        self.registry.insert(fresh, t.clone());
        self.reduced_location.insert(fresh, true);
        self.reduced_location.remove(&loc);
        let members = fired.iter().map(|&l| self.d.location_name(l)).collect();
        self.record(StepKind::Location, loc.node, Some(loc), fresh, &end, members, SubnegotiationKind::OneTrace, t);
        Ok(())
    }

    /// Adds the fresh outcome, removing `replaced` or, when it is `None`, every
    /// outcome of the node.
    fn install(
        &mut self,
        n: NodeId,
        replaced: Option<OutcomeId>,
        name: &str,
        end: &PartialConfig,
        prob: Option<crate::Rational>,
    ) -> Location {
        let a = self.d.fresh_outcome(name);
        let moves = self.d.dom(n).iter().map(|p| (p, smallvec![end.get(p).expect("scope covers domain")])).collect();
        let mut t = Transition { moves, annotations: Default::default() };
        t.annotations.prob = prob;
        let node = &mut self.d.nodes[n.index()];
        match replaced {
            Some(old) => {
                node.outcomes.remove(&old);
            }
            None => node.outcomes.clear(),
        }
        node.outcomes.insert(a, t);
        Location::new(n, a)
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        kind: StepKind,
        pivot: NodeId,
        location: Option<Location>,
        fresh: Location,
        end: &PartialConfig,
        members: Vec<String>,
        classification: SubnegotiationKind,
        transformer: F::Transformer,
    ) {
        let moves = self.d.dom(pivot).iter().map(|p| (p, end.get(p).expect("scope covers domain"))).collect();
        let step = ReductionStep {
            kind,
            pivot,
            location,
            fresh,
            fresh_name: self.d.outcome_name(fresh.outcome).to_string(),
            moves,
            members,
            classification,
            transformer,
            snapshot: self.trace.snapshots.len(),
            progress: self.progress(),
        };
        self.trace.steps.push(step);
    }

    /// Solves the replication headed by `n`: nodes of the same domain reached
    /// through uniform moves, with every other move leaving to one common exit.
    pub fn replication_mop(&self, n: NodeId) -> Result<(F::Transformer, PartialConfig, Vec<NodeId>), EngineError> {
        let dom = self.d.dom(n);
        let mut index: HashMap<NodeId, usize> = HashMap::from([(n, 0)]);
        let mut vertices = vec![n];
        let mut queue = VecDeque::from([n]);
        let mut edges: Vec<(usize, Option<NodeId>, Location)> = Vec::new();
        let mut exit: Option<PartialConfig> = None;
        while let Some(v) = queue.pop_front() {
            for a in self.d.outcomes(v).collect::<Vec<_>>() {
                let loc = Location::new(v, a);
                if !self.reduced_location.get(&loc).copied().unwrap_or(false) {
                    return Err(EngineError::EngineInvariantBroken(format!(
                        "{} is not reduced when its replication is solved",
                        self.d.location_name(loc)
                    )));
                }
                let after = PartialConfig::after(&self.d, loc);
                let mut targets = dom.iter().map(|p| after.get(p).expect("scope covers domain"));
                let first = targets.next().expect("domains are non-empty");
                let uniform = targets.all(|t| t == first);
                if uniform && self.d.dom(first) == dom && self.d.has_outcomes(first) {
                    if let std::collections::hash_map::Entry::Vacant(slot) = index.entry(first) {
                        slot.insert(vertices.len());
                        vertices.push(first);
                        queue.push_back(first);
                    }
                    edges.push((index[&v], Some(first), loc));
                    continue;
                }
                if let Some(stuck) = dom.iter().filter_map(|p| after.get(p)).find(|&m| {
                    self.d.has_outcomes(m) && self.d.dom(m).is_subset(dom)
                }) {
                    return Err(EngineError::NotSoundEvidence(format!(
                        "after {} the processes wait at `{}` which can never be enabled",
                        self.d.location_name(loc),
                        self.d.node_name(stuck)
                    )));
                }
                match &exit {
                    None => exit = Some(after),
                    Some(e) if *e == after => {}
                    Some(e) => {
                        return Err(EngineError::NotSoundEvidence(format!(
                            "the replication of `{}` exits both to {} and to {}",
                            self.d.node_name(n),
                            e.display(&self.d),
                            after.display(&self.d)
                        )))
                    }
                }
                edges.push((index[&v], None, loc));
            }
        }
        let Some(exit) = exit else {
            return Err(EngineError::NotSoundEvidence(format!(
                "the replication of `{}` can never be left",
                self.d.node_name(n)
            )));
        };
        let exit_vertex = vertices.len();
        let mut g = FlowGraph::new(vertices.len() + 1, 0, exit_vertex);
        for (from, to, loc) in edges {
            let to = to.map_or(exit_vertex, |m| index[&m]);
            g.add_edge(from, to, self.transformer(loc), Some(loc));
        }
        let t = self.fw.flow_solve(&g)?;
        Ok((t, exit, vertices))
    }

    fn apply_red_node(&mut self, p: PendingNode<F::Transformer>) {
        let had_probs = self.d.node(p.node).outcomes.values().any(|t| t.annotations.prob.is_some());
        let name = format!("r_{}", self.d.node_name(p.node));
        let fresh = self.install(p.node, None, &name, &p.exit, had_probs.then(|| int(1)));
        self.registry.insert(fresh, p.transformer.clone());
        self.reduced_node[p.node.index()] = true;
        self.reduced_location.retain(|l, _| l.node != p.node);
        self.reduced_location.insert(fresh, true);
        self.record(StepKind::Node, p.node, None, fresh, &p.exit, p.members, SubnegotiationKind::Replication, p.transformer);
    }

    /// Replaces every outcome of `n` by one fresh outcome to the exit of its
    /// replication, then drops nodes that can no longer be reached.
    pub fn red_node(&mut self, n: NodeId) -> Result<(), EngineError> {
        if self.reduced_node[n.index()] {
            return Err(EngineError::AlreadyReduced(self.d.node_name(n).to_string()));
        }
        self.check_smaller_reduced(n)?;
        let (transformer, exit, vertices) = self.replication_mop(n)?;
        let members = vertices.iter().map(|&m| self.d.node_name(m).to_string()).collect();
        self.apply_red_node(PendingNode { node: n, transformer, exit, members });
        self.prune();
        Ok(())
    }

    fn prune(&mut self) {
        let reach = graph_reachable(&self.d);
        for (l, r) in self.live.iter_mut().zip(reach) {
            *l = *l && r;
        }
    }

    fn snapshot(&mut self) {
        if self.options.record_snapshots {
            let snap = live_part(&self.d, &self.live);
            self.trace.snapshots.push(snap);
        }
    }

    /// One stage: the minimal unreduced domain, all its locations, then all
    /// its nodes.
    pub fn run_stage(&mut self) -> Result<bool, EngineError> {
        let pending: Vec<NodeId> = self.pending_nodes().collect();
        let minimal: Vec<NodeId> = pending
            .iter()
            .copied()
            .filter(|&m| !pending.iter().any(|&o| self.d.dom(o).is_strict_subset(self.d.dom(m))))
            .collect();
        let Some(&m) = self.order(minimal).first() else {
            return Ok(false);
        };
        let x = self.d.dom(m);
        self.trace.stages.push(x);
        let same: Vec<NodeId> =
            self.order(self.d.node_ids().filter(|&n| self.live[n.index()] && self.d.dom(n) == x).collect());

        for &n in &same {
            let locs: Vec<Location> = self.order(self.d.outcomes(n).map(|a| Location::new(n, a)).collect());
            for loc in locs {
                match self.red_location(loc) {
                    Ok(()) | Err(EngineError::AlreadyReduced(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }

        let mut solved = Vec::new();
        for &n in &same {
            if self.reduced_node[n.index()] || !self.d.has_outcomes(n) {
                continue;
            }
            let (transformer, exit, vertices) = self.replication_mop(n)?;
            let members = vertices.iter().map(|&v| self.d.node_name(v).to_string()).collect();
            solved.push(PendingNode { node: n, transformer, exit, members });
        }
        for p in solved {
            self.apply_red_node(p);
        }
        self.prune();
        self.snapshot();
        Ok(true)
    }

    /// Runs stages until every live node is reduced; returns the transformer
    /// of the initial node's single outcome.
    pub fn run(&mut self) -> Result<F::Transformer, EngineError> {
        let bound = self.d.nodes.len() + 1;
        let mut stages = 0;
        while self.run_stage()? {
            stages += 1;
            if stages > bound {
                return Err(EngineError::EngineInvariantBroken("the reduction does not terminate".into()));
            }
        }
        let init = self.d.init;
        let outs: Vec<_> = self.d.outcomes(init).collect();
        if outs.len() != 1 {
            return Err(EngineError::EngineInvariantBroken(format!(
                "the initial node ends with {} outcomes",
                outs.len()
            )));
        }
        Ok(self.transformer(Location::new(init, outs[0])))
    }

    pub fn into_trace(self) -> ReductionTrace<F::Transformer> {
        self.trace
    }
}

/// The diagram restricted to the flagged nodes.
pub fn live_part(d: &Diagram, live: &[bool]) -> Diagram {
    let mut raw = d.to_raw();
    let keep: std::collections::HashSet<String> =
        d.node_ids().filter(|n| live[n.index()]).map(|n| d.node_name(n).to_string()).collect();
    raw.nodes.retain(|n| keep.contains(&n.name));
    raw.outcomes.retain(|o| keep.contains(&o.node));
    let mode = ValidationMode { check_probabilities: false, require_outcomes: false };
    validate_with(&raw, mode).expect("the live part of a valid diagram is valid")
}

/// Re-applies the recorded reductions to the input diagram and keeps the
/// reachable part.
pub fn replay_trace<T>(d: &Diagram, trace: &ReductionTrace<T>) -> Diagram {
    let mut d = d.clone();
    for step in &trace.steps {
        let a = d.intern_outcome(&step.fresh_name);
        let moves = step.moves.iter().map(|&(p, m)| (p, smallvec![m])).collect();
        let node = &mut d.nodes[step.pivot.index()];
        let prob = match step.location {
            Some(l) => node.outcomes.remove(&l.outcome).and_then(|t| t.annotations.prob),
            None => {
                let had = node.outcomes.values().any(|t| t.annotations.prob.is_some());
                node.outcomes.clear();
                had.then(|| int(1))
            }
        };
        let mut t = Transition { moves, annotations: Default::default() };
        t.annotations.prob = prob;
        node.outcomes.insert(a, t);
    }
    let live = graph_reachable(&d);
    live_part(&d, &live)
}

pub fn compute_mop<F: Framework>(
    d: &Diagram,
    fw: &F,
    options: EngineOptions,
) -> Result<MopResult<F::Transformer, F::Value>, EngineError> {
    let mut engine = Engine::new(d, fw, options)?;
    let transformer = engine.run()?;
    let value = fw.apply(&transformer, &fw.initial_value());
    Ok(MopResult { transformer, value, trace: engine.into_trace() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frameworks::expected_cost::MassCost;
    use crate::frameworks::{ExpectedCost, GenKill, GenKillSpec, Identity, Variant};
    use crate::io::render::structurally_equal;

    fn mc(mass: i64, cost: i64) -> MassCost {
        MassCost::new(int(mass), int(cost))
    }

    fn fresh_value(engine: &Engine<'_, ExpectedCost>, node: &str) -> MassCost {
        let d = engine.diagram();
        let n = d.find_node(node).unwrap();
        let loc = engine.registry().keys().rev().find(|l| l.node == n).copied().unwrap();
        engine.transformer(loc)
    }

    #[test]
    fn fig2_expected_cost_stages() {
        let d = fixtures::fig2();
        let fw = ExpectedCost::new(&d).unwrap();
        let mut engine = Engine::new(&d, &fw, EngineOptions::default()).unwrap();
        assert!(engine.is_flagged_reduced(d.find_node("n1").unwrap()));
        assert!(!engine.is_flagged_reduced(d.find_node("n3").unwrap()));

        // Stage one ({p2}): n3 and n5.
        engine.run_stage().unwrap();
        assert_eq!(fresh_value(&engine, "n3"), mc(1, 3));
        assert_eq!(fresh_value(&engine, "n5"), mc(1, 4));
        assert!(!engine.is_live(d.find_node("n5").unwrap()));
        engine.run_stage().unwrap();
        assert_eq!(fresh_value(&engine, "n4"), mc(1, 3));
        assert_eq!(fresh_value(&engine, "n6"), mc(1, 4));

        // Stage three ({p2,p3}): the location (n2,a) then n2 and n7.
        engine.run_stage().unwrap();
        let step = engine.trace().steps.iter().find(|s| s.location == d.find_location("n2.a")).unwrap();
        assert_eq!(step.transformer, mc(1, 7));
        assert_eq!(fresh_value(&engine, "n7"), mc(1, 9));
        assert_eq!(fresh_value(&engine, "n2"), mc(1, 16));

        let t = engine.run().unwrap();
        assert_eq!(t, mc(1, 18));
    }

    #[test]
    fn result_is_independent_of_tie_breaking() {
        for d in fixtures::all() {
            let fw = ExpectedCost::new(&d).unwrap();
            let opts = EngineOptions { tie_break: TieBreak::HighestFirst, ..Default::default() };
            let (Ok(a), Ok(b)) = (compute_mop(&d, &fw, EngineOptions::default()), compute_mop(&d, &fw, opts)) else {
                continue;
            };
            assert_eq!(a.transformer, b.transformer, "{}", d.name);
        }
    }

    #[test]
    fn progress_strictly_decreases_and_trace_replays() {
        for d in [fixtures::fig1(), fixtures::fig1_acyclic(), fixtures::fig2()] {
            let r = compute_mop(&d, &Identity, EngineOptions::default()).unwrap();
            let progress: Vec<usize> = r.trace.steps.iter().map(|s| s.progress).collect();
            assert!(progress.windows(2).all(|w| w[0] > w[1]), "{}: {progress:?}", d.name);
            assert!(r.trace.steps.len() <= d.locations().len() + d.nodes.len());
            let last = r.trace.snapshots.last().unwrap();
            assert!(structurally_equal(&replay_trace(&d, &r.trace), last), "{}", d.name);
            assert_eq!(last.locations().len(), 1);
        }
    }

    #[test]
    fn fig1_expected_cost_is_finite() {
        let d = fixtures::fig1();
        let fw = ExpectedCost::new(&d).unwrap();
        let r = compute_mop(&d, &fw, EngineOptions::default()).unwrap();
        assert_eq!(r.value.mass, int(1));
        assert!(r.value.cost > int(0));
    }

    #[test]
    fn genkill_detects_on_fig2() {
        let d = fixtures::fig2();
        let spec = GenKillSpec::from_names(&d, Variant::MayForward, "n3.b", "", "n7.a", None).unwrap();
        let fw = GenKill::new(&d, spec).unwrap();
        let r = compute_mop(&d, &fw, EngineOptions::default()).unwrap();
        assert!(fw.holds(&r.value));
    }

    #[test]
    fn rejects_nondeterminism_and_unsoundness() {
        let d = fixtures::fig4();
        assert!(matches!(compute_mop(&d, &Identity, EngineOptions::default()), Err(EngineError::NotDeterministic(_))));
        let d = crate::soundness::tests::deadlocking_fig2();
        let fw = ExpectedCost::new(&d).unwrap();
        assert!(matches!(compute_mop(&d, &fw, EngineOptions::default()), Err(EngineError::NotSoundEvidence(_))));
    }

    #[test]
    fn explicit_operations_report_already_reduced() {
        let d = fixtures::fig2();
        let fw = ExpectedCost::new(&d).unwrap();
        let mut engine = Engine::new(&d, &fw, EngineOptions::default()).unwrap();
        let n1 = d.find_node("n1").unwrap();
        assert!(matches!(engine.red_node(n1), Err(EngineError::AlreadyReduced(_))));
        let n7 = d.find_node("n7").unwrap();
        assert!(matches!(engine.red_node(n7), Err(EngineError::PreconditionViolated(_))));
        let n3a = d.find_location("n3.a").unwrap();
        assert!(matches!(engine.red_location(n3a), Err(EngineError::AlreadyReduced(_))));
    }
}
