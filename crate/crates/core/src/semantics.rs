//! Operational semantics: enabledness, steps, replay, independence and
//! Mazurkiewicz equivalence of location sequences.

use std::cmp::Ordering;

use thiserror::Error;

use crate::diagram::{Configuration, Diagram, Location, NodeId, OutcomeId, ProcessId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("location {0:?} does not exist")]
    UnknownLocation(Location),
    #[error("node {node:?} is not enabled (at position {index})")]
    NotEnabled { index: usize, node: NodeId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub start: Configuration,
    pub locations: Vec<Location>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Enabled {
    /// Enabled nodes that have outcomes.
    pub firable: Vec<NodeId>,
    /// Enabled nodes without outcomes (the final node).
    pub terminal: Vec<NodeId>,
}

pub fn is_enabled(d: &Diagram, c: &Configuration, n: NodeId) -> bool {
    d.dom(n).iter().all(|p| c.get(p).contains(&n))
}

pub fn enabled(d: &Diagram, c: &Configuration) -> Enabled {
    let mut out = Enabled::default();
    let mut candidates: Vec<NodeId> = c.at.iter().flat_map(|s| s.iter().copied()).collect();
    candidates.sort();
    candidates.dedup();
    for n in candidates {
        if is_enabled(d, c, n) {
            if d.has_outcomes(n) {
                out.firable.push(n);
            } else {
                out.terminal.push(n);
            }
        }
    }
    out
}

pub fn step(d: &Diagram, c: &Configuration, loc: Location) -> Result<Configuration, SemanticsError> {
    let t = d.transition(loc).ok_or(SemanticsError::UnknownLocation(loc))?;
    if !is_enabled(d, c, loc.node) {
        return Err(SemanticsError::NotEnabled { index: 0, node: loc.node });
    }
    let mut next = c.clone();
    for (p, targets) in &t.moves {
        next.at[p.index()] = targets.clone();
    }
    Ok(next)
}

pub fn replay(d: &Diagram, c: &Configuration, w: &[Location]) -> Result<Configuration, SemanticsError> {
    let mut cur = c.clone();
    for (i, &loc) in w.iter().enumerate() {
        cur = step(d, &cur, loc).map_err(|e| match e {
            SemanticsError::NotEnabled { node, .. } => SemanticsError::NotEnabled { index: i, node },
            other => other,
        })?;
    }
    Ok(cur)
}

pub fn is_successful(d: &Diagram, w: &[Location]) -> bool {
    replay(d, &Configuration::initial(d), w).is_ok_and(|c| c == Configuration::final_of(d))
}

pub fn independent(d: &Diagram, l1: Location, l2: Location) -> bool {
    d.dom(l1.node).is_disjoint(d.dom(l2.node))
}

/// The lexicographically least sequence equivalent to `w` under swaps of
/// adjacent independent locations.
pub fn normal_form(d: &Diagram, w: &[Location]) -> Vec<Location> {
    let mut remaining: Vec<Location> = w.to_vec();
    let mut out = Vec::with_capacity(w.len());
    while !remaining.is_empty() {
        let mut best: Option<usize> = None;
        for i in 0..remaining.len() {
            let blocked = remaining[..i].iter().any(|&prev| !independent(d, prev, remaining[i]));
            if blocked {
                continue;
            }
            if best.is_none_or(|b| remaining[i] < remaining[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("the first remaining location is always minimal");
        out.push(remaining.remove(b));
    }
    out
}

pub fn mazurkiewicz_equivalent(d: &Diagram, w: &[Location], v: &[Location]) -> bool {
    w.len() == v.len() && normal_form(d, w) == normal_form(d, v)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DomainOrder {
    Less,
    Equal,
    Greater,
    Incomparable,
}

pub fn domain_order(d: &Diagram, x: NodeId, y: NodeId) -> DomainOrder {
    let (dx, dy) = (d.dom(x), d.dom(y));
    if dx == dy {
        DomainOrder::Equal
    } else if dx.is_subset(dy) {
        DomainOrder::Less
    } else if dy.is_subset(dx) {
        DomainOrder::Greater
    } else {
        DomainOrder::Incomparable
    }
}

impl DomainOrder {
    pub fn to_ordering(self) -> Option<Ordering> {
        match self {
            DomainOrder::Less => Some(Ordering::Less),
            DomainOrder::Equal => Some(Ordering::Equal),
            DomainOrder::Greater => Some(Ordering::Greater),
            DomainOrder::Incomparable => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Determinism {
    pub deterministic: bool,
    pub witnesses: Vec<(NodeId, OutcomeId, ProcessId)>,
}

pub fn is_deterministic(d: &Diagram) -> Determinism {
    let mut witnesses = Vec::new();
    for n in d.node_ids() {
        for (a, t) in &d.node(n).outcomes {
            for (p, targets) in &t.moves {
                if targets.len() > 1 {
                    witnesses.push((n, *a, *p));
                }
            }
        }
    }
    Determinism { deterministic: witnesses.is_empty(), witnesses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn loc(d: &Diagram, s: &str) -> Location {
        d.find_location(s).unwrap_or_else(|| panic!("no location {s}"))
    }

    fn conf(d: &Diagram, names: &[&str]) -> Configuration {
        Configuration::from_nodes(&names.iter().map(|n| d.find_node(n).unwrap()).collect::<Vec<_>>())
    }

    fn names(d: &Diagram, ns: &[NodeId]) -> Vec<String> {
        ns.iter().map(|n| d.node_name(*n).to_string()).collect()
    }

    #[test]
    fn enabled_nodes_of_fig2() {
        let d = fixtures::fig2();
        assert_eq!(names(&d, &enabled(&d, &Configuration::initial(&d)).firable), ["n0"]);
        assert_eq!(names(&d, &enabled(&d, &conf(&d, &["n1", "n2", "n2"])).firable), ["n1", "n2"]);
        let e = enabled(&d, &conf(&d, &["n1", "n8", "n8"]));
        assert_eq!(names(&d, &e.firable), ["n1"]);
        assert!(e.terminal.is_empty());
        let e = enabled(&d, &Configuration::final_of(&d));
        assert!(e.firable.is_empty());
        assert_eq!(names(&d, &e.terminal), ["n8"]);
    }

    #[test]
    fn steps_follow_the_figures() {
        let d = fixtures::fig1();
        let c = step(&d, &Configuration::initial(&d), loc(&d, "n0.reg")).unwrap();
        assert_eq!(c, conf(&d, &["n1", "n2"]));

        let d = fixtures::fig2();
        assert!(matches!(
            step(&d, &Configuration::initial(&d), loc(&d, "n2.a")),
            Err(SemanticsError::NotEnabled { .. })
        ));
        let c = step(&d, &conf(&d, &["n1", "n2", "n2"]), loc(&d, "n2.a")).unwrap();
        assert_eq!(c, conf(&d, &["n1", "n3", "n4"]));
    }

    #[test]
    fn replay_reports_failing_index() {
        let d = fixtures::fig2();
        let init = Configuration::initial(&d);
        let w: Vec<_> = ["n0.a", "n1.a", "n2.a", "n3.a", "n4.a", "n7.a"].iter().map(|s| loc(&d, s)).collect();
        assert_eq!(replay(&d, &init, &w).unwrap(), Configuration::final_of(&d));
        assert!(is_successful(&d, &w));
        assert_eq!(replay(&d, &init, &[]).unwrap(), init);
        assert!(matches!(replay(&d, &init, &[loc(&d, "n1.a")]), Err(SemanticsError::NotEnabled { index: 0, .. })));
    }

    #[test]
    fn independence_and_equivalence() {
        let d = fixtures::fig1();
        assert!(independent(&d, loc(&d, "n1.send"), loc(&d, "n2.eval")));
        assert!(!independent(&d, loc(&d, "n1.send"), loc(&d, "n1.send")));
        let w: Vec<_> = ["n0.reg", "n1.send", "n2.eval", "n3.rec"].iter().map(|s| loc(&d, s)).collect();
        let v: Vec<_> = ["n0.reg", "n2.eval", "n1.send", "n3.rec"].iter().map(|s| loc(&d, s)).collect();
        assert!(mazurkiewicz_equivalent(&d, &w, &v));
        assert!(mazurkiewicz_equivalent(&d, &w, &w));
        assert!(!mazurkiewicz_equivalent(&d, &w[..2], &v[..2]));

        let d = fixtures::fig2();
        assert!(independent(&d, loc(&d, "n3.a"), loc(&d, "n4.b")));
    }

    #[test]
    fn domain_order_cases() {
        let d = fixtures::fig2();
        let n = |s: &str| d.find_node(s).unwrap();
        assert_eq!(domain_order(&d, n("n3"), n("n2")), DomainOrder::Less);
        assert_eq!(domain_order(&d, n("n2"), n("n2")), DomainOrder::Equal);
        assert_eq!(domain_order(&d, n("n1"), n("n3")), DomainOrder::Incomparable);
        assert_eq!(domain_order(&d, n("n0"), n("n7")), DomainOrder::Greater);
    }

    #[test]
    fn determinism_witnesses() {
        assert!(is_deterministic(&fixtures::fig1()).deterministic);
        let d = fixtures::fig4();
        let det = is_deterministic(&d);
        assert!(!det.deterministic);
        assert!(det.witnesses.contains(&(d.find_node("n0").unwrap(), d.find_outcome("a").unwrap(), d.find_process("p1").unwrap())));
    }
}
