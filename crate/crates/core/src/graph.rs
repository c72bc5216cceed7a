//! The local graph: an edge n -(p,a)-> n' for every n' in delta(n,a,p).

use std::collections::BTreeSet;

use crate::diagram::{Diagram, NodeId, OutcomeId, ProcessId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalEdge {
    pub from: NodeId,
    pub process: ProcessId,
    pub outcome: OutcomeId,
    pub to: NodeId,
}

#[derive(Clone, Debug)]
pub struct LocalGraph {
    pub edges: Vec<LocalEdge>,
    /// Distinct successor nodes, sorted.
    pub successors: Vec<Vec<NodeId>>,
}

impl LocalGraph {
    pub fn new(d: &Diagram) -> LocalGraph {
        let mut edges = Vec::new();
        let mut successors = vec![BTreeSet::new(); d.nodes.len()];
        for n in d.node_ids() {
            for (a, t) in &d.node(n).outcomes {
                for (p, targets) in &t.moves {
                    for &to in targets {
                        edges.push(LocalEdge { from: n, process: *p, outcome: *a, to });
                        successors[n.index()].insert(to);
                    }
                }
            }
        }
        LocalGraph { edges, successors: successors.into_iter().map(|s| s.into_iter().collect()).collect() }
    }

    pub fn reachable_from(&self, start: NodeId) -> Vec<bool> {
        let mut seen = vec![false; self.successors.len()];
        let mut stack = vec![start];
        seen[start.index()] = true;
        while let Some(n) = stack.pop() {
            for &m in &self.successors[n.index()] {
                if !seen[m.index()] {
                    seen[m.index()] = true;
                    stack.push(m);
                }
            }
        }
        seen
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm over the node graph.
        let k = self.successors.len();
        let mut indegree = vec![0usize; k];
        for succ in &self.successors {
            for m in succ {
                indegree[m.index()] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..k).filter(|&i| indegree[i] == 0).collect();
        let mut removed = 0;
        while let Some(i) = queue.pop() {
            removed += 1;
            for m in &self.successors[i] {
                indegree[m.index()] -= 1;
                if indegree[m.index()] == 0 {
                    queue.push(m.index());
                }
            }
        }
        removed == k
    }

    /// Simple circuits among the nodes flagged in `within`, each reported once
    /// starting from its smallest node, up to `max_len` nodes.
    pub fn simple_circuits(&self, within: &[bool], max_len: usize) -> Vec<Vec<NodeId>> {
        let mut out = Vec::new();
        let k = self.successors.len();
        for start in 0..k {
            if !within[start] {
                continue;
            }
            let mut path = vec![NodeId(start as u32)];
            let mut on_path = vec![false; k];
            on_path[start] = true;
            self.circuits_from(start, within, max_len, &mut path, &mut on_path, &mut out);
        }
        out
    }

    fn circuits_from(
        &self,
        start: usize,
        within: &[bool],
        max_len: usize,
        path: &mut Vec<NodeId>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let last = path.last().expect("path is never empty").index();
        for &m in &self.successors[last] {
            let mi = m.index();
            if mi == start {
                out.push(path.clone());
            } else if mi > start && within[mi] && !on_path[mi] && path.len() < max_len {
                on_path[mi] = true;
                path.push(m);
                self.circuits_from(start, within, max_len, path, on_path, out);
                path.pop();
                on_path[mi] = false;
            }
        }
    }
}

pub fn local_graph(d: &Diagram) -> LocalGraph {
    LocalGraph::new(d)
}

pub fn graph_reachable(d: &Diagram) -> Vec<bool> {
    LocalGraph::new(d).reachable_from(d.init)
}
