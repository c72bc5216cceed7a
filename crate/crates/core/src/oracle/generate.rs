//! Random sound deterministic diagrams for property tests.
//!
//! The structured strategy composes fragments that cannot break soundness:
//! single nodes, sequences, parallel splits over disjoint process sets,
//! exclusive choices that merge again, and loops whose body runs on the
//! loop's own processes. Fragments are built back to front: a fragment gets
//! the node each of its processes goes to afterwards, and returns the node
//! each of them enters first. The rejection strategy wires nodes at random
//! and keeps the result only if the soundness check accepts it.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::OracleError;
use crate::diagram::{validate, Diagram, NodeRole, RawDiagram, RawNode, RawOutcome};
use crate::rational::{int, Rational};
use crate::semantics::is_deterministic;
use crate::soundness::{check_soundness, SoundnessStatus};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Structured,
    Rejection,
}

#[derive(Copy, Clone, Debug)]
pub struct GenParams {
    pub processes: usize,
    /// Upper bound on nodes, counting the initial and final nodes.
    pub max_nodes: usize,
    pub strategy: Strategy,
    pub allow_loops: bool,
    pub max_attempts: usize,
    pub max_configs: usize,
}

impl GenParams {
    pub fn new(processes: usize, max_nodes: usize) -> GenParams {
        GenParams {
            processes,
            max_nodes,
            strategy: Strategy::Structured,
            allow_loops: true,
            max_attempts: 500,
            max_configs: 20_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub diagram: Diagram,
    /// How the diagram was produced, enough to reproduce it.
    pub provenance: String,
    pub attempted: usize,
    pub accepted: usize,
}

struct Builder {
    rng: ChaCha8Rng,
    processes: usize,
    names: Vec<String>,
    domains: Vec<Vec<usize>>,
    /// Per node: outcome list of (outcome name, moves by process index).
    outcomes: Vec<Vec<(String, BTreeMap<usize, usize>)>>,
    budget: usize,
    allow_loops: bool,
}

impl Builder {
    fn node(&mut self, dom: &[usize]) -> usize {
        self.names.push(format!("n{}", self.names.len()));
        self.domains.push(dom.to_vec());
        self.outcomes.push(Vec::new());
        self.budget = self.budget.saturating_sub(1);
        self.names.len() - 1
    }

    fn outcome_name(i: usize) -> String {
        ["a", "b", "c", "d"].get(i).map_or_else(|| format!("o{i}"), |s| s.to_string())
    }

    fn restrict(exits: &BTreeMap<usize, usize>, procs: &[usize]) -> BTreeMap<usize, usize> {
        procs.iter().map(|p| (*p, exits[p])).collect()
    }

    /// Builds a fragment over `procs` that leaves to `exits`; returns entries.
    fn fragment(&mut self, procs: &[usize], exits: &BTreeMap<usize, usize>, depth: usize) -> BTreeMap<usize, usize> {
        if self.budget == 0 || depth > 5 {
            return exits.clone();
        }
        let roll = self.rng.gen_range(0..100);
        if roll < 25 {
            let n = self.node(procs);
            let k = self.rng.gen_range(1..=2);
            for i in 0..k {
                self.outcomes[n].push((Self::outcome_name(i), exits.clone()));
            }
            procs.iter().map(|&p| (p, n)).collect()
        } else if roll < 45 {
            let mid = self.fragment(procs, exits, depth + 1);
            self.fragment(procs, &mid, depth + 1)
        } else if roll < 65 && procs.len() >= 2 {
            let mut shuffled = procs.to_vec();
            shuffled.shuffle(&mut self.rng);
            let cut = self.rng.gen_range(1..shuffled.len());
            let (mut left, mut right) = (shuffled[..cut].to_vec(), shuffled[cut..].to_vec());
            left.sort();
            right.sort();
            let mut entries = self.fragment(&left, &Self::restrict(exits, &left), depth + 1);
            entries.extend(self.fragment(&right, &Self::restrict(exits, &right), depth + 1));
            entries
        } else if roll < 82 {
            let n = self.node(procs);
            let k = self.rng.gen_range(2..=3);
            for i in 0..k {
                let entries = self.fragment(procs, exits, depth + 1);
                self.outcomes[n].push((Self::outcome_name(i), entries));
            }
            procs.iter().map(|&p| (p, n)).collect()
        } else if self.allow_loops {
            let n = self.node(procs);
            let back: BTreeMap<usize, usize> = procs.iter().map(|&p| (p, n)).collect();
            let body = self.fragment(procs, &back, depth + 1);
            self.outcomes[n].push(("a".to_string(), exits.clone()));
            self.outcomes[n].push(("b".to_string(), body));
            back
        } else {
            let mid = self.fragment(procs, exits, depth + 1);
            self.fragment(procs, &mid, depth + 1)
        }
    }

    fn finish(mut self, name: String, init: usize, fin: usize) -> Result<Diagram, String> {
        let processes: Vec<String> = (1..=self.processes).map(|i| format!("p{i}")).collect();
        let mut raw = RawDiagram { name, processes: processes.clone(), ..Default::default() };
        for (i, n) in self.names.iter().enumerate() {
            raw.nodes.push(RawNode {
                name: n.clone(),
                domain: self.domains[i].iter().map(|&p| processes[p].clone()).collect(),
                role: if i == init {
                    Some(NodeRole::Init)
                } else if i == fin {
                    Some(NodeRole::Final)
                } else {
                    None
                },
            });
        }
        let outcomes = std::mem::take(&mut self.outcomes);
        for (i, outs) in outcomes.iter().enumerate() {
            let weights: Vec<i64> = outs.iter().map(|_| self.rng.gen_range(1..=3)).collect();
            let total: i64 = weights.iter().sum();
            for ((oname, moves), w) in outs.iter().zip(&weights) {
                raw.outcomes.push(RawOutcome {
                    node: self.names[i].clone(),
                    outcome: oname.clone(),
                    prob: Some(Rational::new((*w).into(), total.into())),
                    cost: Some(int(self.rng.gen_range(0..5))),
                    time: self.domains[i].iter().map(|&p| (processes[p].clone(), int(self.rng.gen_range(0..4)))).collect(),
                    moves: moves.iter().map(|(&p, &m)| (processes[p].clone(), vec![self.names[m].clone()])).collect(),
                });
            }
        }
        validate(&raw).map_err(|e| format!("{e:?}"))
    }
}

fn structured(seed: u64, params: &GenParams) -> Result<Diagram, String> {
    let k = params.processes.max(1);
    let all: Vec<usize> = (0..k).collect();
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        processes: k,
        names: Vec::new(),
        domains: Vec::new(),
        outcomes: Vec::new(),
        budget: params.max_nodes.saturating_sub(2),
        allow_loops: params.allow_loops,
    };
    let init = b.node(&all);
    let fin = b.node(&all);
    b.names[fin] = "fin".to_string();
    b.budget = params.max_nodes.saturating_sub(2);
    let exits: BTreeMap<usize, usize> = all.iter().map(|&p| (p, fin)).collect();
    let entries = b.fragment(&all, &exits, 0);
    let k_init = if params.max_nodes > 2 { b.rng.gen_range(1..=2) } else { 1 };
    for i in 0..k_init {
        b.outcomes[init].push((Builder::outcome_name(i), entries.clone()));
    }
    b.finish(format!("gen_s{seed}"), init, fin)
}

fn rejection_candidate(rng: &mut ChaCha8Rng, seed: u64, attempt: usize, params: &GenParams) -> Result<Diagram, String> {
    let k = params.processes.max(1);
    let all: Vec<usize> = (0..k).collect();
    let count = rng.gen_range(2..=params.max_nodes.max(2));
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(rng.gen()),
        processes: k,
        names: Vec::new(),
        domains: Vec::new(),
        outcomes: Vec::new(),
        budget: usize::MAX,
        allow_loops: params.allow_loops,
    };
    let init = b.node(&all);
    for _ in 2..count {
        let mut dom: Vec<usize> = all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if dom.is_empty() {
            dom.push(rng.gen_range(0..k));
        }
        b.node(&dom);
    }
    let fin = b.node(&all);
    b.names[fin] = "fin".to_string();
    for n in 0..fin {
        let outs = rng.gen_range(1..=2);
        for i in 0..outs {
            let mut moves = BTreeMap::new();
            for &p in &b.domains[n].clone() {
                let candidates: Vec<usize> = (1..=fin)
                    .filter(|&m| b.domains[m].contains(&p) && (params.allow_loops || m > n))
                    .collect();
                moves.insert(p, *candidates.choose(rng).expect("the final node contains every process"));
            }
            b.outcomes[n].push((Builder::outcome_name(i), moves));
        }
    }
    b.finish(format!("gen_r{seed}_{attempt}"), init, fin)
}

/// Produces a sound deterministic diagram. Structured generation always
/// succeeds within the node budget; rejection sampling retries up to
/// `max_attempts` times.
pub fn generate_sound_diagram(seed: u64, params: &GenParams) -> Result<Generated, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for attempt in 0..params.max_attempts {
        let attempted = attempt + 1;
        let candidate = match params.strategy {
            Strategy::Structured => structured(seed.wrapping_add(attempt as u64 * 7919), params),
            Strategy::Rejection => rejection_candidate(&mut rng, seed, attempt, params),
        };
        let Ok(d) = candidate else { continue };
        if !is_deterministic(&d).deterministic {
            continue;
        }
        if check_soundness(&d, params.max_configs).status != SoundnessStatus::Sound {
            continue;
        }
        let provenance = match params.strategy {
            Strategy::Structured => format!("structured seed={seed} attempt={attempt}"),
            Strategy::Rejection => format!("rejection seed={seed} attempt={attempt}"),
        };
        return Ok(Generated { diagram: d, provenance, attempted, accepted: 1 });
    }
    Err(OracleError::GenerationFailed(params.max_attempts))
}
