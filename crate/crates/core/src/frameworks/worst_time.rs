//! Worst-case execution time in max-plus algebra. A value gives each process
//! the time it has needed so far; a transformer is a matrix `A` with
//! `v'(p) = max_q v(q) + A[q][p]`.

use std::collections::BTreeMap;
use std::fmt;

use num::{Signed, Zero};
use rand::{Rng, RngCore};

use super::{FlowGraph, Framework, FrameworkError};
use crate::diagram::{Diagram, Location, ProcessId};
use crate::rational::{format_rational, int, Rational};

/// Extended time: the derived order is NegInf < Fin(_) < PosInf.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Time {
    NegInf,
    Fin(Rational),
    PosInf,
}

impl Time {
    pub fn zero() -> Time {
        Time::Fin(Rational::zero())
    }

    /// Max-plus product; minus infinity annihilates even plus infinity.
    pub fn plus(&self, other: &Time) -> Time {
        match (self, other) {
            (Time::NegInf, _) | (_, Time::NegInf) => Time::NegInf,
            (Time::PosInf, _) | (_, Time::PosInf) => Time::PosInf,
            (Time::Fin(a), Time::Fin(b)) => Time::Fin(a + b),
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::NegInf => write!(f, "-inf"),
            Time::Fin(r) => write!(f, "{}", format_rational(r)),
            Time::PosInf => write!(f, "+inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MaxPlus {
    pub m: Vec<Vec<Time>>,
}

impl MaxPlus {
    pub fn identity(k: usize) -> MaxPlus {
        MaxPlus {
            m: (0..k)
                .map(|i| (0..k).map(|j| if i == j { Time::zero() } else { Time::NegInf }).collect())
                .collect(),
        }
    }

    pub fn zero(k: usize) -> MaxPlus {
        MaxPlus { m: vec![vec![Time::NegInf; k]; k] }
    }

    pub fn size(&self) -> usize {
        self.m.len()
    }

    pub fn product(&self, other: &MaxPlus) -> MaxPlus {
        let k = self.size();
        let mut out = MaxPlus::zero(k);
        for i in 0..k {
            for r in 0..k {
                if self.m[i][r] == Time::NegInf {
                    continue;
                }
                for j in 0..k {
                    let cand = self.m[i][r].plus(&other.m[r][j]);
                    if cand > out.m[i][j] {
                        out.m[i][j] = cand;
                    }
                }
            }
        }
        out
    }

    pub fn max(&self, other: &MaxPlus) -> MaxPlus {
        MaxPlus {
            m: self
                .m
                .iter()
                .zip(&other.m)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.max(y).clone()).collect())
                .collect(),
        }
    }
}

pub fn makespan(v: &[Time]) -> Time {
    v.iter().max().cloned().unwrap_or(Time::NegInf)
}

#[derive(Clone, Debug)]
pub struct WorstTime {
    processes: usize,
    times: BTreeMap<Location, BTreeMap<ProcessId, Rational>>,
}

impl WorstTime {
    pub fn new(d: &Diagram) -> Result<WorstTime, FrameworkError> {
        let mut times = BTreeMap::new();
        for loc in d.locations() {
            let ann = &d.transition(loc).expect("listed location").annotations;
            if let Some((p, _)) = ann.time.iter().find(|(_, t)| t.is_negative()) {
                return Err(FrameworkError::Unsupported(format!(
                    "negative time for {} at {}",
                    d.process_name(*p),
                    d.location_name(loc)
                )));
            }
            times.insert(loc, ann.time.clone());
        }
        Ok(WorstTime { processes: d.process_count(), times })
    }

    pub fn process_count(&self) -> usize {
        self.processes
    }
}

impl Framework for WorstTime {
    type Value = Vec<Time>;
    type Transformer = MaxPlus;

    fn name(&self) -> &'static str {
        "worst-time"
    }

    fn initial_value(&self) -> Vec<Time> {
        vec![Time::zero(); self.processes]
    }

    fn bottom(&self) -> Vec<Time> {
        vec![Time::NegInf; self.processes]
    }

    fn join_values(&self, a: &Vec<Time>, b: &Vec<Time>) -> Vec<Time> {
        a.iter().zip(b).map(|(x, y)| x.max(y).clone()).collect()
    }

    fn leq(&self, a: &Vec<Time>, b: &Vec<Time>) -> bool {
        a.iter().zip(b).all(|(x, y)| x <= y)
    }

    fn base(&self, d: &Diagram, loc: Location) -> MaxPlus {
        let dom = d.dom(loc.node);
        let empty = BTreeMap::new();
        let times = self.times.get(&loc).unwrap_or(&empty);
        let mut t = MaxPlus::identity(self.processes);
        for p in dom.iter() {
            let tp = times.get(&p).cloned().map(Time::Fin).unwrap_or_else(Time::zero);
            for q in dom.iter() {
                t.m[q.index()][p.index()] = tp.clone();
            }
        }
        t
    }

    fn identity(&self) -> MaxPlus {
        MaxPlus::identity(self.processes)
    }

    fn compose(&self, first: &MaxPlus, then: &MaxPlus) -> MaxPlus {
        first.product(then)
    }

    fn join(&self, a: &MaxPlus, b: &MaxPlus) -> MaxPlus {
        a.max(b)
    }

    fn zero(&self) -> MaxPlus {
        MaxPlus::zero(self.processes)
    }

    fn apply(&self, t: &MaxPlus, v: &Vec<Time>) -> Vec<Time> {
        (0..self.processes)
            .map(|p| (0..self.processes).map(|q| v[q].plus(&t.m[q][p])).max().unwrap_or(Time::NegInf))
            .collect()
    }

    fn transformer_eq(&self, a: &MaxPlus, b: &MaxPlus) -> Option<bool> {
        Some(a == b)
    }

    fn flow_solve(&self, g: &FlowGraph<MaxPlus>) -> Result<MaxPlus, FrameworkError> {
        Ok(solve_longest(g, self.processes))
    }

    fn sample_values(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Vec<Time>> {
        (0..count)
            .map(|_| {
                (0..self.processes)
                    .map(|_| match rng.gen_range(0..10) {
                        0 => Time::NegInf,
                        1 => Time::PosInf,
                        _ => Time::Fin(int(rng.gen_range(0..6))),
                    })
                    .collect()
            })
            .collect()
    }

    fn render_value(&self, v: &Vec<Time>) -> String {
        let parts: Vec<String> = v.iter().map(|t| t.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }
}

/// Longest paths into the exit on the graph of (vertex, process) pairs,
/// one exit process at a time. Entries that still grow after as many rounds
/// as there are pairs sit on or behind a positive cycle and become +inf.
#[allow(clippy::needless_range_loop)]
fn solve_longest(g: &FlowGraph<MaxPlus>, k: usize) -> MaxPlus {
    let n = g.vertex_count;
    let pairs = n * k;
    let edges: Vec<_> = g.edges.iter().filter(|e| e.from != g.exit).collect();
    let mut result = MaxPlus::zero(k);
    for col in 0..k {
        // dist[v][q]: best weight from (v, q) to (exit, col).
        let mut dist = vec![vec![Time::NegInf; k]; n];
        dist[g.exit][col] = Time::zero();
        let relax = |dist: &mut Vec<Vec<Time>>, saturate: bool| -> bool {
            let mut changed = false;
            for e in &edges {
                for q in 0..k {
                    let mut best = Time::NegInf;
                    for r in 0..k {
                        let cand = e.label.m[q][r].plus(&dist[e.to][r]);
                        if cand > best {
                            best = cand;
                        }
                    }
                    if best > dist[e.from][q] {
                        dist[e.from][q] = if saturate { Time::PosInf } else { best };
                        changed = true;
                    }
                }
            }
            changed
        };
        let mut stable = false;
        for _ in 0..=pairs {
            if !relax(&mut dist, false) {
                stable = true;
                break;
            }
        }
        if !stable {
            for _ in 0..=pairs {
                if !relax(&mut dist, true) {
                    break;
                }
            }
        }
        for q in 0..k {
            result.m[q][col] = dist[g.entry][q].clone();
        }
    }
    result
}
