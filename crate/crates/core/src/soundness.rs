//! Explicit reachability graphs, soundness, deadlocks and the domination check.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::diagram::{Configuration, Diagram, Location, NodeId};
use crate::graph::LocalGraph;
use crate::semantics::{enabled, step, Run};

pub const DEFAULT_MAX_CONFIGS: usize = 1_000_000;
pub const DEFAULT_MAX_CIRCUIT_LEN: usize = 12;

/// The exploration cap, honouring `NEGOT_MAX_CONFIGS` when it is set.
pub fn max_configs_from_env() -> usize {
    std::env::var("NEGOT_MAX_CONFIGS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_CONFIGS)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("state exploration exceeded {limit} configurations")]
pub struct LimitExceeded {
    pub limit: usize,
}

#[derive(Clone, Debug)]
pub struct ReachabilityGraph {
    /// Vertex 0 is the initial configuration; vertices appear in BFS order.
    pub configs: Vec<Configuration>,
    pub index: HashMap<Configuration, usize>,
    pub successors: Vec<Vec<(Location, usize)>>,
    /// BFS tree parent of every vertex except the root.
    pub parent: Vec<Option<(usize, Location)>>,
    pub truncated: bool,
    pub limit: usize,
}

impl ReachabilityGraph {
    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn find(&self, c: &Configuration) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Locations leading from the root to vertex `v` along the BFS tree.
    pub fn path_to(&self, mut v: usize) -> Vec<Location> {
        let mut out = Vec::new();
        while let Some((p, loc)) = self.parent[v] {
            out.push(loc);
            v = p;
        }
        out.reverse();
        out
    }

    /// Which vertices have a path to `target`.
    pub fn can_reach(&self, target: usize) -> Vec<bool> {
        let k = self.configs.len();
        let mut preds = vec![Vec::new(); k];
        for (v, succ) in self.successors.iter().enumerate() {
            for &(_, w) in succ {
                preds[w].push(v);
            }
        }
        let mut seen = vec![false; k];
        seen[target] = true;
        let mut stack = vec![target];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Nodes occurring in some reachable configuration.
    pub fn occurring_nodes(&self, d: &Diagram) -> Vec<bool> {
        let mut seen = vec![false; d.nodes.len()];
        for c in &self.configs {
            for set in &c.at {
                for n in set {
                    seen[n.index()] = true;
                }
            }
        }
        seen
    }
}

pub fn reachability_graph(d: &Diagram, max_configs: usize) -> ReachabilityGraph {
    let root = Configuration::initial(d);
    let mut g = ReachabilityGraph {
        configs: vec![root.clone()],
        index: HashMap::from([(root, 0)]),
        successors: vec![Vec::new()],
        parent: vec![None],
        truncated: false,
        limit: max_configs,
    };
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let c = g.configs[v].clone();
        for n in enabled(d, &c).firable {
            for a in d.outcomes(n) {
                let loc = Location::new(n, a);
                let next = step(d, &c, loc).expect("enabled node steps");
                let w = match g.index.get(&next) {
                    Some(&w) => w,
                    None => {
                        if g.configs.len() >= max_configs {
                            g.truncated = true;
                            return g;
                        }
                        let w = g.configs.len();
                        g.index.insert(next.clone(), w);
                        g.configs.push(next);
                        g.successors.push(Vec::new());
                        g.parent.push(Some((v, loc)));
                        queue.push_back(w);
                        w
                    }
                };
                g.successors[v].push((loc, w));
            }
        }
    }
    g
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SoundnessStatus {
    Sound,
    Unsound,
    LimitExceeded,
}

#[derive(Clone, Debug)]
pub struct SoundnessVerdict {
    pub status: SoundnessStatus,
    /// For unsound diagrams, a shortest run into a configuration from which
    /// the final configuration is unreachable.
    pub witness: Option<Run>,
    pub configurations: usize,
}

pub fn check_soundness(d: &Diagram, max_configs: usize) -> SoundnessVerdict {
    let g = reachability_graph(d, max_configs);
    if g.truncated {
        return SoundnessVerdict { status: SoundnessStatus::LimitExceeded, witness: None, configurations: g.configs.len() };
    }
    let fin = g.find(&Configuration::final_of(d));
    let ok = match fin {
        Some(f) => g.can_reach(f),
        None => vec![false; g.configs.len()],
    };
    // BFS numbering makes the first bad vertex a shallowest one.
    match ok.iter().position(|&good| !good) {
        None => SoundnessVerdict { status: SoundnessStatus::Sound, witness: None, configurations: g.configs.len() },
        Some(bad) => SoundnessVerdict {
            status: SoundnessStatus::Unsound,
            witness: Some(Run { start: Configuration::initial(d), locations: g.path_to(bad) }),
            configurations: g.configs.len(),
        },
    }
}

pub fn deadlocks(d: &Diagram, max_configs: usize) -> Result<Vec<Configuration>, LimitExceeded> {
    let g = reachability_graph(d, max_configs);
    if g.truncated {
        return Err(LimitExceeded { limit: max_configs });
    }
    let fin = Configuration::final_of(d);
    Ok(g
        .configs
        .iter()
        .filter(|c| **c != fin && enabled(d, c).firable.is_empty())
        .cloned()
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominationVerdict {
    pub holds: bool,
    pub circuits_checked: usize,
    pub counterexample: Option<Vec<NodeId>>,
}

/// The node of `circuit` whose domain contains every other domain on it.
pub fn dominant_node(d: &Diagram, circuit: &[NodeId]) -> Option<NodeId> {
    circuit
        .iter()
        .copied()
        .find(|&m| circuit.iter().all(|&n| d.dom(n).is_subset(d.dom(m))))
}

pub fn check_domination(d: &Diagram, max_configs: usize, max_cycle_len: usize) -> DominationVerdict {
    let lg = LocalGraph::new(d);
    let g = reachability_graph(d, max_configs);
    let within = if g.truncated { lg.reachable_from(d.init) } else { g.occurring_nodes(d) };
    let circuits = lg.simple_circuits(&within, max_cycle_len);
    let counterexample = circuits.iter().find(|c| dominant_node(d, c).is_none()).cloned();
    DominationVerdict { holds: counterexample.is_none(), circuits_checked: circuits.len(), counterexample }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::diagram::validate;
    use crate::fixtures;
    use crate::semantics::replay;

    /// Figure 2 with p3's move at n4.a sent to n6 instead of n7.
    pub(crate) fn broken_fig2() -> Diagram {
        let mut raw = fixtures::fig2().to_raw();
        let o = raw.outcomes.iter_mut().find(|o| o.node == "n4" && o.outcome == "a").unwrap();
        o.moves = vec![("p3".into(), vec!["n6".into()])];
        validate(&raw).unwrap()
    }

    /// Figure 2 with p1 sent back to n0 after n1, stranding it there.
    pub(crate) fn deadlocking_fig2() -> Diagram {
        let mut raw = fixtures::fig2().to_raw();
        let o = raw.outcomes.iter_mut().find(|o| o.node == "n1").unwrap();
        o.moves = vec![("p1".into(), vec!["n0".into()])];
        validate(&raw).unwrap()
    }

    #[test]
    fn fig1_reachable_configurations() {
        let d = fixtures::fig1();
        let g = reachability_graph(&d, 10_000);
        assert!(!g.truncated);
        assert_eq!(g.configs.len(), 10);
    }

    #[test]
    fn truncation() {
        let d = fixtures::fig2();
        assert!(!reachability_graph(&d, 10_000).truncated);
        assert!(reachability_graph(&d, 2).truncated);
        assert_eq!(check_soundness(&d, 2).status, SoundnessStatus::LimitExceeded);
    }

    #[test]
    fn fixtures_are_sound() {
        for d in [fixtures::fig1(), fixtures::fig1_acyclic(), fixtures::fig2(), fixtures::fig4()] {
            assert_eq!(check_soundness(&d, 10_000).status, SoundnessStatus::Sound, "{}", d.name);
            assert!(deadlocks(&d, 10_000).unwrap().is_empty());
        }
    }

    #[test]
    fn broken_variant_has_witness_and_deadlock() {
        let d = broken_fig2();
        let v = check_soundness(&d, 10_000);
        assert_eq!(v.status, SoundnessStatus::Unsound);
        let w = v.witness.unwrap();
        let end = replay(&d, &w.start, &w.locations).unwrap();
        let g = reachability_graph(&d, 10_000);
        let fin = g.find(&Configuration::final_of(&d));
        let reach = fin.map(|f| g.can_reach(f));
        assert!(reach.is_none_or(|r| !r[g.find(&end).unwrap()]));
        // p3 keeps cycling through n4/n6, so this variant livelocks rather than deadlocks.
        assert!(deadlocks(&d, 10_000).unwrap().is_empty());

        let d = deadlocking_fig2();
        assert_eq!(check_soundness(&d, 10_000).status, SoundnessStatus::Unsound);
        let dl = deadlocks(&d, 10_000).unwrap();
        assert!(dl.iter().any(|c| c.display(&d).to_string() == "(n0,n8,n8)"), "{dl:?}");
    }

    #[test]
    fn domination_on_fixtures() {
        for d in [fixtures::fig1(), fixtures::fig2(), fixtures::fig1_acyclic()] {
            let v = check_domination(&d, 10_000, DEFAULT_MAX_CIRCUIT_LEN);
            assert!(v.holds, "{}", d.name);
        }
        let d = fixtures::fig2();
        let n = |s: &str| d.find_node(s).unwrap();
        assert_eq!(dominant_node(&d, &[n("n3"), n("n5")]), Some(n("n3")));
        assert_eq!(dominant_node(&d, &[n("n2"), n("n3"), n("n7")]), Some(n("n2")));
        assert_eq!(check_domination(&fixtures::fig1_acyclic(), 10_000, 12).circuits_checked, 0);
    }
}
