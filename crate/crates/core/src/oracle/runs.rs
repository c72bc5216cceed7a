//! Priority schedulers and bounded enumeration of successful runs.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagram::{Configuration, Diagram, Location, NodeId};
use crate::frameworks::worst_time::Time;
use crate::rational::Rational;
use crate::semantics::{enabled, step};

/// A memoryless scheduler: at every configuration it picks the enabled node
/// (with outcomes) that comes first in `priority`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriorityScheduler {
    pub priority: Vec<NodeId>,
}

impl PriorityScheduler {
    pub fn ascending(d: &Diagram) -> Self {
        PriorityScheduler { priority: d.node_ids().collect() }
    }

    pub fn descending(d: &Diagram) -> Self {
        let mut priority: Vec<NodeId> = d.node_ids().collect();
        priority.reverse();
        PriorityScheduler { priority }
    }

    pub fn shuffled(d: &Diagram, seed: u64) -> Self {
        let mut priority: Vec<NodeId> = d.node_ids().collect();
        priority.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        PriorityScheduler { priority }
    }

    /// Listed nodes first, in the given order; the rest by id.
    pub fn preferring(d: &Diagram, first: &[NodeId]) -> Self {
        let mut priority = first.to_vec();
        priority.extend(d.node_ids().filter(|n| !first.contains(n)));
        PriorityScheduler { priority }
    }

    pub fn choose(&self, d: &Diagram, c: &Configuration) -> Option<NodeId> {
        let firable = enabled(d, c).firable;
        self.priority.iter().copied().find(|n| firable.contains(n))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSet {
    pub runs: Vec<Vec<Location>>,
    /// Some branch was cut by the length or count cap.
    pub truncated: bool,
}

pub fn enumerate_runs(d: &Diagram, s: &PriorityScheduler, max_len: usize, max_count: usize) -> RunSet {
    enumerate(d, Some(s), max_len, max_count)
}

/// Every successful run, whatever node is scheduled.
pub fn enumerate_all_runs(d: &Diagram, max_len: usize, max_count: usize) -> RunSet {
    enumerate(d, None, max_len, max_count)
}

pub(crate) fn enumerate(d: &Diagram, s: Option<&PriorityScheduler>, max_len: usize, max_count: usize) -> RunSet {
    struct Walk<'a> {
        d: &'a Diagram,
        s: Option<&'a PriorityScheduler>,
        fin: Configuration,
        max_len: usize,
        max_count: usize,
        prefix: Vec<Location>,
        /// Branches cut at the length bound; cyclic diagrams can produce
        /// exponentially many of them without a single complete run.
        cuts: usize,
        out: RunSet,
    }

    fn walk(w: &mut Walk<'_>, c: &Configuration) {
        if w.out.runs.len() >= w.max_count || w.cuts >= 8 * w.max_count {
            w.out.truncated = true;
            return;
        }
        if *c == w.fin {
            w.out.runs.push(w.prefix.clone());
            return;
        }
        let nodes: Vec<NodeId> = match w.s {
            Some(s) => s.choose(w.d, c).into_iter().collect(),
            None => enabled(w.d, c).firable,
        };
        if nodes.is_empty() {
            return;
        }
        if w.prefix.len() >= w.max_len {
            w.out.truncated = true;
            w.cuts += 1;
            return;
        }
        for n in nodes {
            for a in w.d.outcomes(n).collect::<Vec<_>>() {
                let loc = Location::new(n, a);
                let next = step(w.d, c, loc).expect("enabled node");
                w.prefix.push(loc);
                walk(w, &next);
                w.prefix.pop();
            }
        }
    }

    let mut w = Walk {
        d,
        s,
        fin: Configuration::final_of(d),
        max_len,
        max_count,
        prefix: Vec::new(),
        cuts: 0,
        out: RunSet::default(),
    };
    walk(&mut w, &Configuration::initial(d));
    w.out
}

/// Per-process completion times of a run when every process starts at 0 and
/// a location finishes, for each process of its domain, at the latest clock
/// of the domain plus that process's duration.
pub fn run_clocks(d: &Diagram, run: &[Location]) -> Vec<Rational> {
    let mut clock = vec![Rational::from_integer(0.into()); d.process_count()];
    for &loc in run {
        let dom = d.dom(loc.node);
        let start = dom.iter().map(|p| clock[p.index()].clone()).max().expect("non-empty domain");
        let times = &d.annotations(loc).expect("run location").time;
        for p in dom.iter() {
            clock[p.index()] = &start + times.get(&p).cloned().unwrap_or_else(|| Rational::from_integer(0.into()));
        }
    }
    clock
}

pub fn run_makespan(d: &Diagram, run: &[Location]) -> Rational {
    run_clocks(d, run).into_iter().max().expect("at least one process")
}

/// Smallest makespan over the enumerated successful runs; `None` when no run
/// was found. The flag reports truncation, in which case longer runs were
/// not considered.
pub fn best_case_time(d: &Diagram, max_len: usize, max_count: usize) -> (Option<Rational>, bool) {
    let runs = enumerate_all_runs(d, max_len, max_count);
    (runs.runs.iter().map(|r| run_makespan(d, r)).min(), runs.truncated)
}

/// Largest makespan over the enumerated runs, as an extended time.
pub fn worst_case_time_by_runs(d: &Diagram, max_len: usize, max_count: usize) -> (Time, bool) {
    let runs = enumerate_all_runs(d, max_len, max_count);
    let best = runs.runs.iter().map(|r| Time::Fin(run_makespan(d, r))).max().unwrap_or(Time::NegInf);
    (best, runs.truncated)
}
