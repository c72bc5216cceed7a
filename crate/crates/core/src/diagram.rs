//! Negotiation diagrams: processes, nodes with domains, outcomes and their
//! successor maps, plus the validation that turns a name-based description
//! into an indexed [`Diagram`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::rational::{format_rational, Rational};

/// Hard ceiling imposed by the bitset representation of process sets.
pub const MAX_PROCESSES: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProcessId(pub u32);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutcomeId(pub u32);

impl ProcessId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl OutcomeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Set of processes as a bitset.
#[derive(Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProcSet(pub u64);

impl ProcSet {
    pub const EMPTY: ProcSet = ProcSet(0);

    pub fn all(count: usize) -> ProcSet {
        if count >= 64 {
            ProcSet(u64::MAX)
        } else {
            ProcSet((1u64 << count) - 1)
        }
    }

    pub fn singleton(p: ProcessId) -> ProcSet {
        ProcSet(1u64 << p.0)
    }

    pub fn from_iter_ids<I: IntoIterator<Item = ProcessId>>(ids: I) -> ProcSet {
        let mut s = ProcSet::EMPTY;
        for p in ids {
            s.insert(p);
        }
        s
    }

    pub fn insert(&mut self, p: ProcessId) {
        self.0 |= 1u64 << p.0;
    }

    pub fn contains(self, p: ProcessId) -> bool {
        self.0 & (1u64 << p.0) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: ProcSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_strict_subset(self, other: ProcSet) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn is_disjoint(self, other: ProcSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: ProcSet) -> ProcSet {
        ProcSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ProcSet) -> ProcSet {
        ProcSet(self.0 & other.0)
    }

    pub fn difference(self, other: ProcSet) -> ProcSet {
        ProcSet(self.0 & !other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = ProcessId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros();
                bits &= bits - 1;
                Some(ProcessId(i))
            }
        })
    }

    pub fn first(self) -> Option<ProcessId> {
        self.iter().next()
    }
}

impl fmt::Debug for ProcSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|p| p.0)).finish()
    }
}

/// A (node, outcome) pair. The derived order (node first) is the fixed total
/// order used for canonical trace forms.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub node: NodeId,
    pub outcome: OutcomeId,
}

impl Location {
    pub fn new(node: NodeId, outcome: OutcomeId) -> Self {
        Location { node, outcome }
    }
}

pub type Targets = SmallVec<[NodeId; 1]>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Annotations {
    pub prob: Option<Rational>,
    pub cost: Option<Rational>,
    pub time: BTreeMap<ProcessId, Rational>,
}

impl Annotations {
    pub fn is_empty(&self) -> bool {
        self.prob.is_none() && self.cost.is_none() && self.time.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    /// One entry per process of the node's domain, sorted by process.
    pub moves: BTreeMap<ProcessId, Targets>,
    pub annotations: Annotations,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub domain: ProcSet,
    pub outcomes: BTreeMap<OutcomeId, Transition>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisBlock {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl AnalysisBlock {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    pub name: String,
    pub processes: Vec<String>,
    pub nodes: Vec<Node>,
    /// Outcome names are interned diagram-wide; the same name on two nodes
    /// shares an id.
    pub outcome_names: Vec<String>,
    pub init: NodeId,
    pub fin: NodeId,
    pub analyses: Vec<AnalysisBlock>,
}

impl Diagram {
    pub fn process_count(&self) -> usize {
        self.processes.len()
    }

    pub fn all_processes(&self) -> ProcSet {
        ProcSet::all(self.processes.len())
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn node(&self, n: NodeId) -> &Node {
        &self.nodes[n.index()]
    }

    pub fn dom(&self, n: NodeId) -> ProcSet {
        self.nodes[n.index()].domain
    }

    pub fn outcomes(&self, n: NodeId) -> impl Iterator<Item = OutcomeId> + '_ {
        self.nodes[n.index()].outcomes.keys().copied()
    }

    pub fn has_outcomes(&self, n: NodeId) -> bool {
        !self.nodes[n.index()].outcomes.is_empty()
    }

    pub fn transition(&self, loc: Location) -> Option<&Transition> {
        self.nodes.get(loc.node.index())?.outcomes.get(&loc.outcome)
    }

    pub fn delta(&self, loc: Location, p: ProcessId) -> &[NodeId] {
        self.transition(loc)
            .and_then(|t| t.moves.get(&p))
            .map(|t| t.as_slice())
            .unwrap_or(&[])
    }

    pub fn annotations(&self, loc: Location) -> Option<&Annotations> {
        self.transition(loc).map(|t| &t.annotations)
    }

    /// Every location, ordered by (node, outcome).
    pub fn locations(&self) -> Vec<Location> {
        let mut out = Vec::new();
        for n in self.node_ids() {
            for a in self.outcomes(n) {
                out.push(Location::new(n, a));
            }
        }
        out
    }

    pub fn process_name(&self, p: ProcessId) -> &str {
        &self.processes[p.index()]
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n.index()].name
    }

    pub fn outcome_name(&self, a: OutcomeId) -> &str {
        &self.outcome_names[a.index()]
    }

    pub fn location_name(&self, loc: Location) -> String {
        format!("{}.{}", self.node_name(loc.node), self.outcome_name(loc.outcome))
    }

    pub fn find_process(&self, name: &str) -> Option<ProcessId> {
        self.processes.iter().position(|p| p == name).map(|i| ProcessId(i as u32))
    }

    pub fn find_node(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(|i| NodeId(i as u32))
    }

    pub fn find_outcome(&self, name: &str) -> Option<OutcomeId> {
        self.outcome_names.iter().position(|a| a == name).map(|i| OutcomeId(i as u32))
    }

    /// Resolves `node.outcome`.
    pub fn find_location(&self, text: &str) -> Option<Location> {
        let (n, a) = text.split_once('.')?;
        let loc = Location::new(self.find_node(n.trim())?, self.find_outcome(a.trim())?);
        self.transition(loc).map(|_| loc)
    }

    pub fn intern_outcome(&mut self, name: &str) -> OutcomeId {
        match self.find_outcome(name) {
            Some(a) => a,
            None => {
                self.outcome_names.push(name.to_string());
                OutcomeId(self.outcome_names.len() as u32 - 1)
            }
        }
    }

    /// An outcome name not yet used anywhere in the diagram.
    pub fn fresh_outcome(&mut self, base: &str) -> OutcomeId {
        if self.find_outcome(base).is_none() {
            return self.intern_outcome(base);
        }
        let mut i = 1usize;
        loop {
            let candidate = format!("{base}_{i}");
            if self.find_outcome(&candidate).is_none() {
                return self.intern_outcome(&candidate);
            }
            i += 1;
        }
    }

    pub fn analysis(&self, name: &str) -> Option<&AnalysisBlock> {
        self.analyses.iter().find(|b| b.name == name)
    }

    pub fn has_probabilities(&self) -> bool {
        self.nodes
            .iter()
            .flat_map(|n| n.outcomes.values())
            .any(|t| t.annotations.prob.is_some())
    }
}

/// Where every process currently is. For deterministic diagrams each entry is
/// a single node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub at: Vec<Targets>,
}

impl Configuration {
    pub fn uniform(d: &Diagram, n: NodeId) -> Configuration {
        Configuration {
            at: (0..d.process_count()).map(|_| SmallVec::from_slice(&[n])).collect(),
        }
    }

    pub fn initial(d: &Diagram) -> Configuration {
        Configuration::uniform(d, d.init)
    }

    pub fn final_of(d: &Diagram) -> Configuration {
        Configuration::uniform(d, d.fin)
    }

    pub fn from_nodes(nodes: &[NodeId]) -> Configuration {
        Configuration {
            at: nodes.iter().map(|&n| SmallVec::from_slice(&[n])).collect(),
        }
    }

    pub fn get(&self, p: ProcessId) -> &[NodeId] {
        &self.at[p.index()]
    }

    /// The single node of `p`, if the entry is a singleton.
    pub fn node_of(&self, p: ProcessId) -> Option<NodeId> {
        match self.at[p.index()].as_slice() {
            [n] => Some(*n),
            _ => None,
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.at.iter().all(|s| s.len() == 1)
    }

    pub fn display<'a>(&'a self, d: &'a Diagram) -> ConfigDisplay<'a> {
        ConfigDisplay { config: self, diagram: d }
    }
}

pub struct ConfigDisplay<'a> {
    config: &'a Configuration,
    diagram: &'a Diagram,
}

impl fmt::Display for ConfigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, set) in self.config.at.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if set.len() == 1 {
                write!(f, "{}", self.diagram.node_name(set[0]))?;
            } else {
                write!(f, "{{")?;
                for (j, n) in set.iter().enumerate() {
                    if j > 0 {
                        write!(f, "|")?;
                    }
                    write!(f, "{}", self.diagram.node_name(*n))?;
                }
                write!(f, "}}")?;
            }
        }
        write!(f, ")")
    }
}

// ---------------------------------------------------------------------------
// Name-based description and validation

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NodeRole {
    Init,
    Final,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawNode {
    pub name: String,
    pub domain: Vec<String>,
    pub role: Option<NodeRole>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawOutcome {
    pub node: String,
    pub outcome: String,
    pub prob: Option<Rational>,
    pub cost: Option<Rational>,
    pub time: Vec<(String, Rational)>,
    pub moves: Vec<(String, Vec<String>)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawDiagram {
    pub name: String,
    pub processes: Vec<String>,
    pub nodes: Vec<RawNode>,
    pub outcomes: Vec<RawOutcome>,
    pub analyses: Vec<AnalysisBlock>,
    /// Outcome names to intern before any others, fixing their ids.
    pub outcome_order: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("no processes declared")]
    NoProcesses,
    #[error("{0} processes declared; at most {MAX_PROCESSES} are supported")]
    TooManyProcesses(usize),
    #[error("process `{0}` declared twice")]
    DuplicateProcess(String),
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("node `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("unknown process `{process}` in {context}")]
    UnknownProcess { context: String, process: String },
    #[error("unknown node `{node}` in {context}")]
    UnknownNode { context: String, node: String },
    #[error("outcome {node}.{outcome} declared twice")]
    DuplicateOutcome { node: String, outcome: String },
    #[error("({node},{outcome},{process}): no successor given for a process of the domain")]
    MissingDelta { node: String, outcome: String, process: String },
    #[error("({node},{outcome},{process}): process is not in the domain of `{node}`")]
    ExtraMove { node: String, outcome: String, process: String },
    #[error("({node},{outcome},{process}): successor `{target}` does not have `{process}` in its domain")]
    DomainViolation { node: String, outcome: String, process: String, target: String },
    #[error("{0}")]
    BadInitFin(String),
    #[error("node `{node}` has no outcomes (only the final node may)")]
    NoOutcomes { node: String },
    #[error("outcome probabilities of node `{node}` sum to {sum}, not 1")]
    ProbSumViolation { node: String, sum: String },
    #[error("probability of {node}.{outcome} is outside [0,1]")]
    ProbOutOfRange { node: String, outcome: String },
    #[error("node `{node}` mixes annotated and unannotated outcome probabilities")]
    PartialProbabilities { node: String },
    #[error("negative time for process `{process}` at {node}.{outcome}")]
    NegativeTime { node: String, outcome: String, process: String },
}

/// How strictly [`validate_with`] treats a description.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ValidationMode {
    pub check_probabilities: bool,
    pub require_outcomes: bool,
}

impl Default for ValidationMode {
    fn default() -> Self {
        ValidationMode { check_probabilities: true, require_outcomes: true }
    }
}

pub fn validate(raw: &RawDiagram) -> Result<Diagram, Vec<ValidationError>> {
    validate_with(raw, ValidationMode::default())
}

pub fn validate_with(raw: &RawDiagram, mode: ValidationMode) -> Result<Diagram, Vec<ValidationError>> {
    let mut errors = Vec::new();
    if raw.processes.is_empty() {
        errors.push(ValidationError::NoProcesses);
    }
    if raw.processes.len() > MAX_PROCESSES {
        return Err(vec![ValidationError::TooManyProcesses(raw.processes.len())]);
    }
    let mut proc_index: BTreeMap<&str, ProcessId> = BTreeMap::new();
    for (i, p) in raw.processes.iter().enumerate() {
        if proc_index.insert(p.as_str(), ProcessId(i as u32)).is_some() {
            errors.push(ValidationError::DuplicateProcess(p.clone()));
        }
    }
    let all = ProcSet::all(raw.processes.len());

    let mut node_index: BTreeMap<&str, NodeId> = BTreeMap::new();
    let mut nodes = Vec::new();
    let mut init = Vec::new();
    let mut fin = Vec::new();
    for rn in &raw.nodes {
        let id = NodeId(nodes.len() as u32);
        if node_index.insert(rn.name.as_str(), id).is_some() {
            errors.push(ValidationError::DuplicateNode(rn.name.clone()));
            continue;
        }
        let mut domain = ProcSet::EMPTY;
        for p in &rn.domain {
            match proc_index.get(p.as_str()) {
                Some(&pid) => domain.insert(pid),
                None => errors.push(ValidationError::UnknownProcess {
                    context: format!("domain of node `{}`", rn.name),
                    process: p.clone(),
                }),
            }
        }
        if rn.domain.is_empty() {
            errors.push(ValidationError::EmptyDomain(rn.name.clone()));
        }
        match rn.role {
            Some(NodeRole::Init) => init.push(id),
            Some(NodeRole::Final) => fin.push(id),
            None => {}
        }
        nodes.push(Node { name: rn.name.clone(), domain, outcomes: BTreeMap::new() });
    }

    let mut outcome_names: Vec<String> = Vec::new();
    let mut intern = |name: &str| -> OutcomeId {
        match outcome_names.iter().position(|a| a == name) {
            Some(i) => OutcomeId(i as u32),
            None => {
                outcome_names.push(name.to_string());
                OutcomeId(outcome_names.len() as u32 - 1)
            }
        }
    };

    for name in &raw.outcome_order {
        intern(name);
    }
    for ro in &raw.outcomes {
        let Some(&nid) = node_index.get(ro.node.as_str()) else {
            errors.push(ValidationError::UnknownNode {
                context: format!("outcome {}.{}", ro.node, ro.outcome),
                node: ro.node.clone(),
            });
            continue;
        };
        let domain = nodes[nid.index()].domain;
        let aid = intern(&ro.outcome);
        if nodes[nid.index()].outcomes.contains_key(&aid) {
            errors.push(ValidationError::DuplicateOutcome { node: ro.node.clone(), outcome: ro.outcome.clone() });
            continue;
        }
        let mut moves: BTreeMap<ProcessId, Targets> = BTreeMap::new();
        for (p, targets) in &ro.moves {
            let Some(&pid) = proc_index.get(p.as_str()) else {
                errors.push(ValidationError::UnknownProcess {
                    context: format!("outcome {}.{}", ro.node, ro.outcome),
                    process: p.clone(),
                });
                continue;
            };
            if !domain.contains(pid) {
                errors.push(ValidationError::ExtraMove {
                    node: ro.node.clone(),
                    outcome: ro.outcome.clone(),
                    process: p.clone(),
                });
                continue;
            }
            let mut set: BTreeSet<NodeId> = BTreeSet::new();
            for t in targets {
                match node_index.get(t.as_str()) {
                    Some(&tid) => {
                        if !nodes[tid.index()].domain.contains(pid) {
                            errors.push(ValidationError::DomainViolation {
                                node: ro.node.clone(),
                                outcome: ro.outcome.clone(),
                                process: p.clone(),
                                target: t.clone(),
                            });
                        }
                        set.insert(tid);
                    }
                    None => errors.push(ValidationError::UnknownNode {
                        context: format!("move of `{}` at {}.{}", p, ro.node, ro.outcome),
                        node: t.clone(),
                    }),
                }
            }
            moves.entry(pid).or_default().extend(set);
        }
        for pid in domain.iter() {
            if moves.get(&pid).is_none_or(|t| t.is_empty()) {
                errors.push(ValidationError::MissingDelta {
                    node: ro.node.clone(),
                    outcome: ro.outcome.clone(),
                    process: raw.processes[pid.index()].clone(),
                });
            }
        }
        for targets in moves.values_mut() {
            targets.sort();
            targets.dedup();
        }
        let mut time = BTreeMap::new();
        for (p, t) in &ro.time {
            match proc_index.get(p.as_str()) {
                Some(&pid) if domain.contains(pid) => {
                    if t.is_negative() {
                        errors.push(ValidationError::NegativeTime {
                            node: ro.node.clone(),
                            outcome: ro.outcome.clone(),
                            process: p.clone(),
                        });
                    }
                    time.insert(pid, t.clone());
                }
                Some(_) => errors.push(ValidationError::ExtraMove {
                    node: ro.node.clone(),
                    outcome: ro.outcome.clone(),
                    process: p.clone(),
                }),
                None => errors.push(ValidationError::UnknownProcess {
                    context: format!("time annotation of {}.{}", ro.node, ro.outcome),
                    process: p.clone(),
                }),
            }
        }
        if let Some(pr) = &ro.prob {
            if pr.is_negative() || *pr > Rational::one() {
                errors.push(ValidationError::ProbOutOfRange { node: ro.node.clone(), outcome: ro.outcome.clone() });
            }
        }
        nodes[nid.index()].outcomes.insert(
            aid,
            Transition {
                moves,
                annotations: Annotations { prob: ro.prob.clone(), cost: ro.cost.clone(), time },
            },
        );
    }

    let (init, fin) = match (init.as_slice(), fin.as_slice()) {
        ([i], [f]) if i != f => (*i, *f),
        ([_], [_]) => {
            errors.push(ValidationError::BadInitFin("the initial and final node must differ".into()));
            (NodeId(0), NodeId(0))
        }
        _ => {
            errors.push(ValidationError::BadInitFin(format!(
                "expected exactly one init and one final node, found {} and {}",
                init.len(),
                fin.len()
            )));
            (NodeId(0), NodeId(0))
        }
    };
    if init != fin {
        for (n, label) in [(init, "initial"), (fin, "final")] {
            if nodes[n.index()].domain != all {
                errors.push(ValidationError::BadInitFin(format!(
                    "the {label} node `{}` must involve every process",
                    nodes[n.index()].name
                )));
            }
        }
        if !nodes[fin.index()].outcomes.is_empty() {
            errors.push(ValidationError::BadInitFin(format!(
                "the final node `{}` must not have outcomes",
                nodes[fin.index()].name
            )));
        }
        if mode.require_outcomes {
            for (i, node) in nodes.iter().enumerate() {
                if i != fin.index() && node.outcomes.is_empty() {
                    errors.push(ValidationError::NoOutcomes { node: node.name.clone() });
                }
            }
        }
    }
    if mode.check_probabilities {
        for (i, node) in nodes.iter().enumerate() {
            if i == fin.index() || node.outcomes.is_empty() {
                continue;
            }
            let annotated = node.outcomes.values().filter(|t| t.annotations.prob.is_some()).count();
            if annotated == 0 {
                continue;
            }
            if annotated != node.outcomes.len() {
                errors.push(ValidationError::PartialProbabilities { node: node.name.clone() });
                continue;
            }
            let sum: Rational = node
                .outcomes
                .values()
                .map(|t| t.annotations.prob.clone().unwrap_or_else(Rational::zero))
                .sum();
            if !sum.is_one() {
                errors.push(ValidationError::ProbSumViolation { node: node.name.clone(), sum: format_rational(&sum) });
            }
        }
    }

    if errors.is_empty() {
        Ok(Diagram {
            name: raw.name.clone(),
            processes: raw.processes.clone(),
            nodes,
            outcome_names,
            init,
            fin,
            analyses: raw.analyses.clone(),
        })
    } else {
        Err(errors)
    }
}

impl Diagram {
    /// The name-based description of this diagram. Validating it again yields
    /// an equal diagram up to outcome-id interning order.
    pub fn to_raw(&self) -> RawDiagram {
        let mut raw = RawDiagram {
            name: self.name.clone(),
            processes: self.processes.clone(),
            analyses: self.analyses.clone(),
            outcome_order: self.outcome_names.clone(),
            ..Default::default()
        };
        for (i, node) in self.nodes.iter().enumerate() {
            let id = NodeId(i as u32);
            raw.nodes.push(RawNode {
                name: node.name.clone(),
                domain: node.domain.iter().map(|p| self.process_name(p).to_string()).collect(),
                role: if id == self.init {
                    Some(NodeRole::Init)
                } else if id == self.fin {
                    Some(NodeRole::Final)
                } else {
                    None
                },
            });
        }
        for node in &self.nodes {
            for (a, t) in &node.outcomes {
                raw.outcomes.push(RawOutcome {
                    node: node.name.clone(),
                    outcome: self.outcome_name(*a).to_string(),
                    prob: t.annotations.prob.clone(),
                    cost: t.annotations.cost.clone(),
                    time: t
                        .annotations
                        .time
                        .iter()
                        .map(|(p, v)| (self.process_name(*p).to_string(), v.clone()))
                        .collect(),
                    moves: t
                        .moves
                        .iter()
                        .map(|(p, ts)| {
                            (
                                self.process_name(*p).to_string(),
                                ts.iter().map(|n| self.node_name(*n).to_string()).collect(),
                            )
                        })
                        .collect(),
                });
            }
        }
        raw
    }
}
