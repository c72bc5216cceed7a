//! Unique configurations I(m), F(m), F(l) and the subnegotiations between
//! them. Two independent constructions live here: exploration-based ones that
//! follow the definitions literally, and [`saturate`], the cheap procedure the
//! reduction engine uses once every smaller node is single-outcome.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::diagram::{
    validate_with, Configuration, Diagram, Location, NodeId, NodeRole, ProcSet, ProcessId, RawDiagram, RawNode,
    RawOutcome, ValidationMode,
};
use crate::semantics::{enabled, is_enabled, step};
use crate::soundness::reachability_graph;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("node `{0}` is not enabled in any reachable configuration")]
    NotFound(String),
    #[error("{count} distinct configurations enable only `{node}`; the diagram is unsound or nondeterministic")]
    NotUnique { node: String, count: usize },
    #[error("state exploration exceeded {0} configurations")]
    LimitExceeded(usize),
    #[error("saturation from `{pivot}` ends in {count} different configurations")]
    NonConfluent { pivot: String, count: usize },
    #[error("saturation exceeded {0} steps")]
    StepLimit(usize),
    #[error("node `{0}` fired twice during one saturation")]
    RepeatFiring(String),
    #[error("node `{0}` is enabled during saturation but has several outcomes")]
    Unreduced(String),
    #[error("the location {0} does not exist")]
    UnknownLocation(String),
}

/// Positions of the processes in `scope`; other entries are `None`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialConfig {
    pub scope: ProcSet,
    pub at: Vec<Option<NodeId>>,
}

impl PartialConfig {
    pub fn restrict(c: &Configuration, scope: ProcSet) -> PartialConfig {
        PartialConfig {
            scope,
            at: (0..c.at.len())
                .map(|i| {
                    let p = ProcessId(i as u32);
                    if scope.contains(p) {
                        c.node_of(p)
                    } else {
                        None
                    }
                })
                .collect(),
        }
    }

    /// The configuration reached by the moves of `loc`, over the domain of its node.
    pub fn after(d: &Diagram, loc: Location) -> PartialConfig {
        let scope = d.dom(loc.node);
        PartialConfig {
            scope,
            at: (0..d.process_count())
                .map(|i| {
                    let p = ProcessId(i as u32);
                    if scope.contains(p) {
                        d.delta(loc, p).first().copied()
                    } else {
                        None
                    }
                })
                .collect(),
        }
    }

    pub fn get(&self, p: ProcessId) -> Option<NodeId> {
        self.at[p.index()]
    }

    pub fn enables(&self, d: &Diagram, n: NodeId) -> bool {
        let dom = d.dom(n);
        dom.is_subset(self.scope) && dom.iter().all(|p| self.at[p.index()] == Some(n))
    }

    pub fn display(&self, d: &Diagram) -> String {
        let parts: Vec<&str> = self
            .scope
            .iter()
            .map(|p| self.at[p.index()].map_or("?", |n| d.node_name(n)))
            .collect();
        format!("({})", parts.join(","))
    }
}

/// The unique reachable configuration enabling `m` and no other node with outcomes.
pub fn initial_config_of_node(d: &Diagram, m: NodeId, max_configs: usize) -> Result<Configuration, DecomposeError> {
    if m == d.init {
        return Ok(Configuration::initial(d));
    }
    let g = reachability_graph(d, max_configs);
    if g.truncated {
        return Err(DecomposeError::LimitExceeded(max_configs));
    }
    let matches: Vec<&Configuration> = g
        .configs
        .iter()
        .filter(|c| enabled(d, c).firable == [m])
        .collect();
    match matches.as_slice() {
        [] => Err(DecomposeError::NotFound(d.node_name(m).to_string())),
        [c] => Ok((*c).clone()),
        many => Err(DecomposeError::NotUnique { node: d.node_name(m).to_string(), count: many.len() }),
    }
}

struct Exploration {
    terminals: Vec<Configuration>,
    fired: BTreeSet<Location>,
}

/// All configurations reachable from `start` (after firing `first`, if given)
/// while only firing nodes accepted by `allowed`.
fn explore_restricted(
    d: &Diagram,
    start: &Configuration,
    first: Option<Location>,
    allowed: impl Fn(NodeId) -> bool,
    max_configs: usize,
) -> Result<Exploration, DecomposeError> {
    let mut fired = BTreeSet::new();
    let root = match first {
        Some(loc) => {
            fired.insert(loc);
            step(d, start, loc).map_err(|_| DecomposeError::NotFound(d.node_name(loc.node).to_string()))?
        }
        None => start.clone(),
    };
    let mut seen: HashMap<Configuration, ()> = HashMap::from([(root.clone(), ())]);
    let mut queue = VecDeque::from([root]);
    let mut terminals = Vec::new();
    while let Some(c) = queue.pop_front() {
        let movable: Vec<NodeId> = enabled(d, &c).firable.into_iter().filter(|&n| allowed(n)).collect();
        if movable.is_empty() {
            terminals.push(c);
            continue;
        }
        for n in movable {
            for a in d.outcomes(n) {
                let loc = Location::new(n, a);
                fired.insert(loc);
                let next = step(d, &c, loc).expect("enabled node steps");
                if !seen.contains_key(&next) {
                    if seen.len() >= max_configs {
                        return Err(DecomposeError::StepLimit(max_configs));
                    }
                    seen.insert(next.clone(), ());
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(Exploration { terminals, fired })
}

fn unique_terminal(d: &Diagram, pivot: NodeId, ex: Exploration) -> Result<(Configuration, BTreeSet<Location>), DecomposeError> {
    match ex.terminals.len() {
        1 => Ok((ex.terminals.into_iter().next().expect("one terminal"), ex.fired)),
        count => Err(DecomposeError::NonConfluent { pivot: d.node_name(pivot).to_string(), count }),
    }
}

pub fn final_config_of_node(d: &Diagram, m: NodeId, max_configs: usize) -> Result<Configuration, DecomposeError> {
    let start = initial_config_of_node(d, m, max_configs)?;
    let dom = d.dom(m);
    let ex = explore_restricted(d, &start, None, |n| d.dom(n).is_subset(dom), max_configs)?;
    unique_terminal(d, m, ex).map(|(c, _)| c)
}

pub fn final_config_of_location(d: &Diagram, loc: Location, max_configs: usize) -> Result<Configuration, DecomposeError> {
    check_location(d, loc)?;
    let start = initial_config_of_node(d, loc.node, max_configs)?;
    let dom = d.dom(loc.node);
    let ex = explore_restricted(d, &start, Some(loc), |n| d.dom(n).is_strict_subset(dom), max_configs)?;
    unique_terminal(d, loc.node, ex).map(|(c, _)| c)
}

fn check_location(d: &Diagram, loc: Location) -> Result<(), DecomposeError> {
    if d.transition(loc).is_none() {
        return Err(DecomposeError::UnknownLocation(format!("{loc:?}")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Subnegotiation {
    pub diagram: Diagram,
    /// The original node each sub-diagram node stands for; the fresh final
    /// node maps to `None`.
    pub node_map: Vec<Option<NodeId>>,
    /// Sub-diagram location to original location.
    pub location_map: BTreeMap<Location, Location>,
    pub pivot: NodeId,
    pub pivot_location: Option<Location>,
    /// The exit configuration F(n) or F(l) over the pivot's domain.
    pub exit: PartialConfig,
}

impl Subnegotiation {
    pub fn original_nodes(&self) -> Vec<NodeId> {
        self.node_map.iter().flatten().copied().collect()
    }
}

pub fn subnegotiation_of_node(d: &Diagram, n: NodeId, max_configs: usize) -> Result<Subnegotiation, DecomposeError> {
    let start = initial_config_of_node(d, n, max_configs)?;
    let dom = d.dom(n);
    let ex = explore_restricted(d, &start, None, |m| d.dom(m).is_subset(dom), max_configs)?;
    let (fin, fired) = unique_terminal(d, n, ex)?;
    build_subnegotiation(d, n, None, &fin, &fired)
}

pub fn subnegotiation_of_location(d: &Diagram, loc: Location, max_configs: usize) -> Result<Subnegotiation, DecomposeError> {
    check_location(d, loc)?;
    let start = initial_config_of_node(d, loc.node, max_configs)?;
    let dom = d.dom(loc.node);
    let ex = explore_restricted(d, &start, Some(loc), |m| d.dom(m).is_strict_subset(dom), max_configs)?;
    let (fin, fired) = unique_terminal(d, loc.node, ex)?;
    build_subnegotiation(d, loc.node, Some(loc), &fin, &fired)
}

fn fresh_name(d: &Diagram, base: String) -> String {
    let mut name = base.clone();
    let mut i = 1;
    while d.find_node(&name).is_some() {
        name = format!("{base}_{i}");
        i += 1;
    }
    name
}

fn build_subnegotiation(
    d: &Diagram,
    pivot: NodeId,
    pivot_location: Option<Location>,
    fin: &Configuration,
    fired: &BTreeSet<Location>,
) -> Result<Subnegotiation, DecomposeError> {
    let dom = d.dom(pivot);
    let exit = PartialConfig::restrict(fin, dom);
    let mut members: BTreeSet<NodeId> = fired.iter().map(|l| l.node).collect();
    members.insert(pivot);
    let fin_name = fresh_name(
        d,
        match pivot_location {
            Some(l) => format!("fin_{}_{}", d.node_name(l.node), d.outcome_name(l.outcome)),
            None => format!("fin_{}", d.node_name(pivot)),
        },
    );
    let proc_names: Vec<String> = dom.iter().map(|p| d.process_name(p).to_string()).collect();

    let mut raw = RawDiagram {
        name: format!("{}|{}", d.name, fin_name.trim_start_matches("fin_")),
        processes: proc_names.clone(),
        outcome_order: d.outcome_names.clone(),
        ..Default::default()
    };
    let mut node_map = Vec::new();
    for &m in &members {
        raw.nodes.push(RawNode {
            name: d.node_name(m).to_string(),
            domain: d.dom(m).iter().map(|p| d.process_name(p).to_string()).collect(),
            role: (m == pivot).then_some(NodeRole::Init),
        });
        node_map.push(Some(m));
    }
    raw.nodes.push(RawNode { name: fin_name.clone(), domain: proc_names, role: Some(NodeRole::Final) });
    node_map.push(None);

    for &loc in fired {
        let t = d.transition(loc).expect("fired location exists");
        let moves = t
            .moves
            .iter()
            .map(|(p, targets)| {
                let target = targets[0];
                let name = if exit.get(*p) == Some(target) {
                    fin_name.clone()
                } else {
                    d.node_name(target).to_string()
                };
                (d.process_name(*p).to_string(), vec![name])
            })
            .collect();
        raw.outcomes.push(RawOutcome {
            node: d.node_name(loc.node).to_string(),
            outcome: d.outcome_name(loc.outcome).to_string(),
            prob: t.annotations.prob.clone(),
            cost: t.annotations.cost.clone(),
            time: t.annotations.time.iter().map(|(p, v)| (d.process_name(*p).to_string(), v.clone())).collect(),
            moves,
        });
    }
    let mode = ValidationMode { check_probabilities: false, require_outcomes: false };
    let diagram = validate_with(&raw, mode).map_err(|errs| DecomposeError::NonConfluent {
        pivot: format!("{} ({})", d.node_name(pivot), errs[0]),
        count: 0,
    })?;
    let location_map = diagram
        .locations()
        .into_iter()
        .map(|sl| {
            let orig_node = node_map[sl.node.index()].expect("only member nodes have outcomes");
            (sl, Location::new(orig_node, sl.outcome))
        })
        .collect();
    Ok(Subnegotiation { diagram, node_map, location_map, pivot, pivot_location, exit })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SubnegotiationKind {
    OneTrace,
    Replication,
    General,
}

pub fn classify(sub: &Subnegotiation) -> SubnegotiationKind {
    classify_diagram(&sub.diagram)
}

pub fn classify_diagram(d: &Diagram) -> SubnegotiationKind {
    let inner: Vec<NodeId> = d.node_ids().filter(|&n| n != d.fin).collect();
    let single = inner.iter().all(|&n| d.node(n).outcomes.len() == 1);
    if single && crate::graph::local_graph(d).is_acyclic() {
        return SubnegotiationKind::OneTrace;
    }
    let all = d.all_processes();
    let replication = inner.iter().all(|&n| {
        d.dom(n) == all
            && d.node(n).outcomes.values().all(|t| {
                let mut targets = t.moves.values();
                let first = targets.next();
                targets.all(|ts| Some(ts) == first)
            })
    });
    if replication {
        SubnegotiationKind::Replication
    } else {
        SubnegotiationKind::General
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Saturation {
    pub end: PartialConfig,
    pub fired: Vec<Location>,
}

/// Order in which [`saturate`] picks among simultaneously enabled nodes.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FiringOrder {
    LowestFirst,
    HighestFirst,
}

/// Fires the single outcome of enabled nodes inside `pivot_domain`
/// (strictly inside when `strict`) until none is enabled. Nodes flagged dead
/// in `live` are ignored.
pub fn saturate(
    d: &Diagram,
    start: &PartialConfig,
    pivot_domain: ProcSet,
    strict: bool,
    live: &[bool],
    order: FiringOrder,
    max_steps: usize,
) -> Result<Saturation, DecomposeError> {
    let mut cur = start.clone();
    let mut fired = Vec::new();
    let mut has_fired = vec![false; d.nodes.len()];
    let inside = |n: NodeId| {
        let dom = d.dom(n);
        if strict {
            dom.is_strict_subset(pivot_domain)
        } else {
            dom.is_subset(pivot_domain)
        }
    };
    loop {
        let mut candidates: Vec<NodeId> = cur
            .scope
            .iter()
            .filter_map(|p| cur.get(p))
            .filter(|&n| live.get(n.index()).copied().unwrap_or(true) && d.has_outcomes(n) && inside(n))
            .collect();
        candidates.sort();
        candidates.dedup();
        if order == FiringOrder::HighestFirst {
            candidates.reverse();
        }
        let Some(n) = candidates.into_iter().find(|&n| cur.enables(d, n)) else {
            return Ok(Saturation { end: cur, fired });
        };
        if fired.len() >= max_steps {
            return Err(DecomposeError::StepLimit(max_steps));
        }
        if has_fired[n.index()] {
            return Err(DecomposeError::RepeatFiring(d.node_name(n).to_string()));
        }
        let node = d.node(n);
        if node.outcomes.len() != 1 {
            return Err(DecomposeError::Unreduced(d.node_name(n).to_string()));
        }
        let (&a, t) = node.outcomes.iter().next().expect("one outcome");
        for (p, targets) in &t.moves {
            cur.at[p.index()] = Some(targets[0]);
        }
        has_fired[n.index()] = true;
        fired.push(Location::new(n, a));
    }
}

/// Checks that firing order does not change the saturation endpoint.
pub fn saturate_confluent(
    d: &Diagram,
    start: &PartialConfig,
    pivot_domain: ProcSet,
    strict: bool,
    live: &[bool],
    max_steps: usize,
) -> Result<Saturation, DecomposeError> {
    let low = saturate(d, start, pivot_domain, strict, live, FiringOrder::LowestFirst, max_steps)?;
    let high = saturate(d, start, pivot_domain, strict, live, FiringOrder::HighestFirst, max_steps)?;
    if low.end != high.end {
        let pivot = start.scope.iter().filter_map(|p| start.get(p)).map(|n| d.node_name(n).to_string()).collect::<Vec<_>>().join(",");
        return Err(DecomposeError::NonConfluent { pivot, count: 2 });
    }
    Ok(low)
}

/// True when no node with outcomes and domain inside `scope` is enabled at `c`.
pub fn no_inner_node_enabled(d: &Diagram, c: &Configuration, scope: ProcSet, strict: bool) -> bool {
    d.node_ids().all(|n| {
        let dom = d.dom(n);
        let inside = if strict { dom.is_strict_subset(scope) } else { dom.is_subset(scope) };
        !(inside && d.has_outcomes(n) && is_enabled(d, c, n))
    })
}
