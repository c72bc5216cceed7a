//! Gen/kill properties and resource anti-patterns as a trace-invariant
//! collecting analysis.
//!
//! Every variant reduces to one question about a run: are there positions
//! `i` (a source) and `j` (a target) with `i != j`, `j` not causally before
//! `i`, and no kill strictly between them in the causal order? Abstract
//! states ("atoms") record guesses made along the run:
//!
//! * `Idle`: nothing guessed yet.
//! * `Src(v)`: a source was guessed; `v` classifies each process as `C`
//!   (has not heard of the source), `A` (has, with no kill in between) or
//!   `B` (has, through some kill).
//! * `Mark(Q)`: a target was guessed earlier; `Q` holds the processes that
//!   causally know about it. A later source outside `Q` is concurrent with it.
//! * `Top`: the pattern has been found.
//!
//! Sets of atoms are the values. Updates are per atom, so transformers are
//! tables over atoms and distribute over unions. Transformers of locations
//! with disjoint domains commute on every atom.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, RngCore};

use super::{kleene_flow_solve, FlowGraph, Framework, FrameworkError};
use crate::diagram::{Diagram, Location, ProcSet};

/// Table sizes grow like 3^processes.
pub const MAX_GENKILL_PROCESSES: usize = 10;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    MayForward,
    MustForward,
    MayBackward,
    MustBackward,
    AntiPattern,
}

impl Variant {
    pub const ALL: [Variant; 5] =
        [Variant::MayForward, Variant::MustForward, Variant::MayBackward, Variant::MustBackward, Variant::AntiPattern];

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "may-forward" => Some(Variant::MayForward),
            "must-forward" => Some(Variant::MustForward),
            "may-backward" => Some(Variant::MayBackward),
            "must-backward" => Some(Variant::MustBackward),
            "anti-pattern" => Some(Variant::AntiPattern),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::MayForward => "may-forward",
            Variant::MustForward => "must-forward",
            Variant::MayBackward => "may-backward",
            Variant::MustBackward => "must-backward",
            Variant::AntiPattern => "anti-pattern",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenKillSpec {
    pub variant: Variant,
    pub gen: BTreeSet<Location>,
    pub kill: BTreeSet<Location>,
    /// The queried location; for the anti-pattern, the first generation.
    pub target: Location,
    /// The second generation of the anti-pattern.
    pub target2: Option<Location>,
}

impl GenKillSpec {
    /// Builds a spec from `node.outcome` names; lists are comma separated.
    pub fn from_names(
        d: &Diagram,
        variant: Variant,
        gen: &str,
        kill: &str,
        target: &str,
        target2: Option<&str>,
    ) -> Result<GenKillSpec, FrameworkError> {
        let one = |s: &str| d.find_location(s).ok_or_else(|| FrameworkError::UnknownLocation(s.to_string()));
        let many = |s: &str| -> Result<BTreeSet<Location>, FrameworkError> {
            s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(one).collect()
        };
        Ok(GenKillSpec {
            variant,
            gen: many(gen)?,
            kill: many(kill)?,
            target: one(target)?,
            target2: target2.map(one).transpose()?,
        })
    }
}

/// The variant-independent form of a gen/kill question.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub sources: BTreeSet<Location>,
    pub targets: BTreeSet<Location>,
    pub kill: BTreeSet<Location>,
    /// The start of the run counts as a source that precedes everything.
    pub virtual_start: bool,
    /// The end of the run counts as a target that follows everything.
    pub virtual_end: bool,
    /// The property holds when the pattern is absent.
    pub negate: bool,
}

pub fn compile(spec: &GenKillSpec) -> Query {
    let single = |l: Location| BTreeSet::from([l]);
    let kill_only: BTreeSet<Location> = spec.kill.difference(&spec.gen).copied().collect();
    let kill_or_gen: BTreeSet<Location> = spec.kill.union(&spec.gen).copied().collect();
    match spec.variant {
        Variant::MayForward => Query {
            sources: spec.gen.clone(),
            targets: single(spec.target),
            kill: spec.kill.clone(),
            virtual_start: false,
            virtual_end: false,
            negate: false,
        },
        Variant::MustForward => Query {
            sources: kill_only,
            targets: single(spec.target),
            kill: kill_or_gen,
            virtual_start: true,
            virtual_end: false,
            negate: true,
        },
        Variant::MayBackward => Query {
            sources: single(spec.target),
            targets: spec.gen.clone(),
            kill: spec.kill.clone(),
            virtual_start: false,
            virtual_end: false,
            negate: false,
        },
        Variant::MustBackward => Query {
            sources: single(spec.target),
            targets: kill_only,
            kill: kill_or_gen,
            virtual_start: false,
            virtual_end: true,
            negate: true,
        },
        Variant::AntiPattern => Query {
            sources: single(spec.target),
            targets: single(spec.target2.unwrap_or(spec.target)),
            kill: spec.kill.clone(),
            virtual_start: false,
            virtual_end: false,
            negate: false,
        },
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    C = 0,
    A = 1,
    B = 2,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Top,
    Idle,
    Src(Vec<Status>),
    Mark(ProcSet),
}

/// Dense numbering of atoms for a fixed process count.
#[derive(Clone, Debug)]
pub struct AtomSpace {
    pub processes: usize,
    pow3: u32,
}

impl AtomSpace {
    pub fn new(processes: usize) -> AtomSpace {
        AtomSpace { processes, pow3: 3u32.pow(processes as u32) }
    }

    pub fn len(&self) -> usize {
        2 + self.pow3 as usize + (1usize << self.processes) - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn encode(&self, atom: &Atom) -> u32 {
        match atom {
            Atom::Top => 0,
            Atom::Idle => 1,
            Atom::Src(v) => 2 + v.iter().rev().fold(0u32, |acc, s| acc * 3 + *s as u32),
            Atom::Mark(q) => 2 + self.pow3 + (q.0 as u32 - 1),
        }
    }

    pub fn decode(&self, code: u32) -> Atom {
        match code {
            0 => Atom::Top,
            1 => Atom::Idle,
            c if c < 2 + self.pow3 => {
                let mut rest = c - 2;
                let mut v = Vec::with_capacity(self.processes);
                for _ in 0..self.processes {
                    v.push(match rest % 3 {
                        0 => Status::C,
                        1 => Status::A,
                        _ => Status::B,
                    });
                    rest /= 3;
                }
                Atom::Src(v)
            }
            c => Atom::Mark(ProcSet((c - 2 - self.pow3 + 1) as u64)),
        }
    }
}

/// A normalized set of atom codes: sorted, and `[0]` whenever Top is present.
pub type AtomSet = Vec<u32>;

fn normalize(mut v: Vec<u32>) -> AtomSet {
    v.sort_unstable();
    v.dedup();
    if v.first() == Some(&0) {
        v.truncate(1);
    }
    v
}

/// One image set per atom code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub images: Arc<Vec<AtomSet>>,
}

#[derive(Clone, Debug)]
pub struct GenKill {
    pub spec: GenKillSpec,
    pub query: Query,
    pub space: AtomSpace,
}

impl GenKill {
    pub fn new(d: &Diagram, spec: GenKillSpec) -> Result<GenKill, FrameworkError> {
        let k = d.process_count();
        if k > MAX_GENKILL_PROCESSES {
            return Err(FrameworkError::Unsupported(format!(
                "gen/kill analysis supports at most {MAX_GENKILL_PROCESSES} processes, the diagram has {k}"
            )));
        }
        let mentioned = spec.gen.iter().chain(&spec.kill).chain([&spec.target]).chain(spec.target2.iter());
        for loc in mentioned {
            if d.transition(*loc).is_none() {
                return Err(FrameworkError::UnknownLocation(format!("{loc:?}")));
            }
        }
        let query = compile(&spec);
        Ok(GenKill { spec, query, space: AtomSpace::new(k) })
    }

    /// Successor atoms of `atom` after an event on `dom`.
    pub fn step_atom(&self, atom: &Atom, dom: ProcSet, is_source: bool, is_target: bool, is_kill: bool) -> Vec<Atom> {
        match atom {
            Atom::Top => vec![Atom::Top],
            Atom::Idle => {
                let mut out = vec![Atom::Idle];
                if is_source {
                    let v = (0..self.space.processes)
                        .map(|p| if dom.contains(crate::ProcessId(p as u32)) { Status::A } else { Status::C })
                        .collect();
                    out.push(Atom::Src(v));
                }
                if is_target {
                    out.push(Atom::Mark(dom));
                }
                out
            }
            Atom::Src(v) => {
                let in_dom = || dom.iter().map(|p| v[p.index()]);
                if is_target && in_dom().all(|s| s != Status::B) {
                    return vec![Atom::Top];
                }
                let next = if in_dom().all(|s| s == Status::C) {
                    Status::C
                } else if is_kill || in_dom().any(|s| s == Status::B) {
                    Status::B
                } else {
                    Status::A
                };
                let mut w = v.clone();
                for p in dom.iter() {
                    w[p.index()] = next;
                }
                vec![Atom::Src(w)]
            }
            Atom::Mark(q) => {
                let touches = !dom.is_disjoint(*q);
                if is_source && !touches {
                    vec![Atom::Top]
                } else if touches {
                    vec![Atom::Mark(q.union(dom))]
                } else {
                    vec![Atom::Mark(*q)]
                }
            }
        }
    }

    pub fn initial_atoms(&self) -> Vec<Atom> {
        let mut out = vec![Atom::Idle];
        if self.query.virtual_start {
            out.push(Atom::Src(vec![Status::A; self.space.processes]));
        }
        out
    }

    /// Whether the pattern was found, reading the end of the run as a target
    /// when the query asks for it.
    pub fn detected(&self, v: &AtomSet) -> bool {
        v.iter().any(|&c| match self.space.decode(c) {
            Atom::Top => true,
            Atom::Src(s) => self.query.virtual_end && s.iter().all(|&x| x != Status::B),
            _ => false,
        })
    }

    /// The property asked by the variant.
    pub fn holds(&self, v: &AtomSet) -> bool {
        self.detected(v) != self.query.negate
    }

    pub fn atoms(&self, v: &AtomSet) -> Vec<Atom> {
        v.iter().map(|&c| self.space.decode(c)).collect()
    }

    fn table_from(&self, f: impl Fn(u32) -> AtomSet) -> Table {
        Table { images: Arc::new((0..self.space.len() as u32).map(f).collect()) }
    }
}

impl Framework for GenKill {
    type Value = AtomSet;
    type Transformer = Table;

    fn name(&self) -> &'static str {
        "genkill"
    }

    fn initial_value(&self) -> AtomSet {
        normalize(self.initial_atoms().iter().map(|a| self.space.encode(a)).collect())
    }

    fn bottom(&self) -> AtomSet {
        Vec::new()
    }

    fn join_values(&self, a: &AtomSet, b: &AtomSet) -> AtomSet {
        normalize(a.iter().chain(b).copied().collect())
    }

    fn leq(&self, a: &AtomSet, b: &AtomSet) -> bool {
        b.as_slice() == [0] || a.iter().all(|x| b.binary_search(x).is_ok())
    }

    fn base(&self, d: &Diagram, loc: Location) -> Table {
        let dom = d.dom(loc.node);
        let s = self.query.sources.contains(&loc);
        let t = self.query.targets.contains(&loc);
        let k = self.query.kill.contains(&loc);
        self.table_from(|code| {
            let atom = self.space.decode(code);
            normalize(self.step_atom(&atom, dom, s, t, k).iter().map(|a| self.space.encode(a)).collect())
        })
    }

    fn identity(&self) -> Table {
        self.table_from(|c| vec![c])
    }

    fn compose(&self, first: &Table, then: &Table) -> Table {
        self.table_from(|c| {
            let mut acc = Vec::new();
            for &b in &first.images[c as usize] {
                acc.extend_from_slice(&then.images[b as usize]);
            }
            normalize(acc)
        })
    }

    fn join(&self, a: &Table, b: &Table) -> Table {
        self.table_from(|c| {
            let i = c as usize;
            normalize(a.images[i].iter().chain(&b.images[i]).copied().collect())
        })
    }

    fn zero(&self) -> Table {
        self.table_from(|_| Vec::new())
    }

    fn apply(&self, t: &Table, v: &AtomSet) -> AtomSet {
        let mut acc = Vec::new();
        for &a in v {
            acc.extend_from_slice(&t.images[a as usize]);
        }
        normalize(acc)
    }

    fn transformer_eq(&self, a: &Table, b: &Table) -> Option<bool> {
        Some(Arc::ptr_eq(&a.images, &b.images) || a.images == b.images)
    }

    fn flow_solve(&self, g: &FlowGraph<Table>) -> Result<Table, FrameworkError> {
        kleene_flow_solve(self, g, g.vertex_count * self.space.len() + 2)
    }

    fn sample_values(&self, rng: &mut dyn RngCore, count: usize) -> Vec<AtomSet> {
        let n = self.space.len() as u32;
        (0..count)
            .map(|_| {
                let size = rng.gen_range(0..5);
                normalize(
                    (0..size)
                        .map(|_| {
                            let low = if rng.gen_bool(0.1) { 0 } else { 1 };
                            rng.gen_range(low..n)
                        })
                        .collect(),
                )
            })
            .collect()
    }

    fn render_value(&self, v: &AtomSet) -> String {
        if v.as_slice() == [0] {
            return "detected".to_string();
        }
        let parts: Vec<String> = self
            .atoms(v)
            .into_iter()
            .map(|a| match a {
                Atom::Top => "top".to_string(),
                Atom::Idle => "idle".to_string(),
                Atom::Src(s) => format!("src({})", s.iter().map(|x| format!("{x:?}")).collect::<String>()),
                Atom::Mark(q) => format!("mark({:b})", q.0),
            })
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}
