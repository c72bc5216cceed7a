//! The gen/kill questions asked directly of runs: regular languages over
//! locations for the may/must variants, and the causal-order condition for
//! the anti-pattern.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::brute::config_graph;
use super::runs::{enumerate, PriorityScheduler};
use super::OracleError;
use crate::diagram::{Diagram, Location};
use crate::frameworks::genkill::Query;
use crate::frameworks::{GenKillSpec, Variant};
use crate::semantics::independent;

/// A configuration index paired with an automaton state.
type ProductState = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Class {
    Any,
    In(BTreeSet<Location>),
    NotIn(BTreeSet<Location>),
}

impl Class {
    fn matches(&self, l: &Location) -> bool {
        match self {
            Class::Any => true,
            Class::In(s) => s.contains(l),
            Class::NotIn(s) => !s.contains(l),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Re {
    Class(Class),
    Concat(Vec<Re>),
    Alt(Vec<Re>),
    Star(Box<Re>),
}

fn any_star() -> Re {
    Re::Star(Box::new(Re::Class(Class::Any)))
}

fn star(c: Class) -> Re {
    Re::Star(Box::new(Re::Class(c)))
}

fn one(c: Class) -> Re {
    Re::Class(c)
}

/// The language of runs witnessing the variant: membership means the
/// property holds for may variants and fails for must variants.
pub fn language(spec: &GenKillSpec) -> Option<Re> {
    let g = spec.gen.clone();
    let k = spec.kill.clone();
    let l: BTreeSet<Location> = [spec.target].into();
    let k_or_g: BTreeSet<Location> = k.union(&g).copied().collect();
    let k_not_g: BTreeSet<Location> = k.difference(&g).copied().collect();
    Some(match spec.variant {
        Variant::MayForward => {
            Re::Concat(vec![any_star(), one(Class::In(g)), star(Class::NotIn(k)), one(Class::In(l)), any_star()])
        }
        Variant::MustForward => Re::Alt(vec![
            Re::Concat(vec![star(Class::NotIn(k_or_g.clone())), one(Class::In(l.clone())), any_star()]),
            Re::Concat(vec![
                any_star(),
                one(Class::In(k_not_g)),
                star(Class::NotIn(k_or_g)),
                one(Class::In(l)),
                any_star(),
            ]),
        ]),
        Variant::MayBackward => {
            Re::Concat(vec![any_star(), one(Class::In(l)), star(Class::NotIn(k)), one(Class::In(g)), any_star()])
        }
        Variant::MustBackward => Re::Alt(vec![
            Re::Concat(vec![any_star(), one(Class::In(l.clone())), star(Class::NotIn(k_or_g.clone()))]),
            Re::Concat(vec![
                any_star(),
                one(Class::In(l)),
                star(Class::NotIn(k_or_g)),
                one(Class::In(k_not_g)),
                any_star(),
            ]),
        ]),
        Variant::AntiPattern => return None,
    })
}

/// Thompson automaton: state 0 is the start, `accept` the single final state.
#[derive(Clone, Debug)]
pub struct Nfa {
    eps: Vec<Vec<usize>>,
    trans: Vec<Vec<(Class, usize)>>,
    accept: usize,
}

impl Nfa {
    pub fn new(re: &Re) -> Nfa {
        let mut nfa = Nfa { eps: vec![Vec::new(), Vec::new()], trans: vec![Vec::new(), Vec::new()], accept: 1 };
        nfa.build(re, 0, 1);
        nfa
    }

    fn fresh(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.trans.push(Vec::new());
        self.eps.len() - 1
    }

    fn build(&mut self, re: &Re, from: usize, to: usize) {
        match re {
            Re::Class(c) => self.trans[from].push((c.clone(), to)),
            Re::Concat(parts) => {
                let mut cur = from;
                for (i, part) in parts.iter().enumerate() {
                    let next = if i + 1 == parts.len() { to } else { self.fresh() };
                    self.build(part, cur, next);
                    cur = next;
                }
                if parts.is_empty() {
                    self.eps[from].push(to);
                }
            }
            Re::Alt(parts) => {
                for part in parts {
                    self.build(part, from, to);
                }
            }
            Re::Star(inner) => {
                let hub = self.fresh();
                self.eps[from].push(hub);
                self.eps[hub].push(to);
                let back = self.fresh();
                self.build(inner, hub, back);
                self.eps[back].push(hub);
            }
        }
    }

    pub fn state_count(&self) -> usize {
        self.eps.len()
    }

    fn closure(&self, states: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = states.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s] {
                if states.insert(t) {
                    stack.push(t);
                }
            }
        }
    }

    fn start(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::from([0]);
        self.closure(&mut s);
        s
    }

    fn advance(&self, states: &BTreeSet<usize>, l: &Location) -> BTreeSet<usize> {
        let mut next: BTreeSet<usize> =
            states.iter().flat_map(|&s| self.trans[s].iter().filter(|(c, _)| c.matches(l)).map(|&(_, t)| t)).collect();
        self.closure(&mut next);
        next
    }

    pub fn accepts(&self, word: &[Location]) -> bool {
        let mut cur = self.start();
        for l in word {
            cur = self.advance(&cur, l);
            if cur.is_empty() {
                return false;
            }
        }
        cur.contains(&self.accept)
    }
}

/// `below[j]` holds the positions causally before `j` in the run.
pub fn causal_order(d: &Diagram, run: &[Location]) -> Vec<BTreeSet<usize>> {
    let mut below: Vec<BTreeSet<usize>> = Vec::with_capacity(run.len());
    for j in 0..run.len() {
        let mut set = BTreeSet::new();
        for i in 0..j {
            if !independent(d, run[i], run[j]) {
                set.insert(i);
                set.extend(below[i].iter().copied());
            }
        }
        below.push(set);
    }
    below
}

/// Positions `i` (a source) and `j` (a target) with `i != j`, `j` not
/// causally before `i`, and no kill strictly between them causally. The run
/// start and end act as extra source and target when the query says so.
pub fn trace_condition_holds(d: &Diagram, run: &[Location], q: &Query) -> Option<(Option<usize>, Option<usize>)> {
    let below = causal_order(d, run);
    let n = run.len();
    let mut sources: Vec<Option<usize>> = (0..n).filter(|&i| q.sources.contains(&run[i])).map(Some).collect();
    if q.virtual_start {
        sources.insert(0, None);
    }
    let mut targets: Vec<Option<usize>> = (0..n).filter(|&j| q.targets.contains(&run[j])).map(Some).collect();
    if q.virtual_end {
        targets.push(None);
    }
    // `None` as a source precedes everything; as a target it follows everything.
    let before = |a: Option<usize>, b: Option<usize>| -> bool {
        match (a, b) {
            (None, _) | (_, None) => true,
            (Some(a), Some(b)) => below[b].contains(&a),
        }
    };
    for &i in &sources {
        for &j in &targets {
            if let (Some(i), Some(j)) = (i, j) {
                if i == j || below[i].contains(&j) {
                    continue;
                }
            }
            let blocked = (0..n).any(|k| {
                q.kill.contains(&run[k])
                    && Some(k) != i
                    && Some(k) != j
                    && before(i, Some(k))
                    && before(Some(k), j)
            });
            if !blocked {
                return Some((i, j));
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegexVerdict {
    /// Whether the variant's property holds.
    pub holds: bool,
    /// A run in the witnessing language (for must variants, a counterexample).
    pub witness: Option<Vec<Location>>,
    pub truncated: bool,
    pub runs_checked: usize,
}

/// Decides the spec on the enumerated successful runs (every run when no
/// scheduler is given). Complete for acyclic diagrams.
pub fn regex_holds(
    d: &Diagram,
    spec: &GenKillSpec,
    s: Option<&PriorityScheduler>,
    max_len: usize,
    max_count: usize,
) -> RegexVerdict {
    let runs = enumerate(d, s, max_len, max_count);
    let negate = matches!(spec.variant, Variant::MustForward | Variant::MustBackward);
    let witness = match language(spec) {
        Some(re) => {
            let nfa = Nfa::new(&re);
            runs.runs.iter().find(|w| nfa.accepts(w)).cloned()
        }
        None => {
            let q = crate::frameworks::genkill::compile(spec);
            runs.runs.iter().find(|w| trace_condition_holds(d, w, &q).is_some()).cloned()
        }
    };
    RegexVerdict { holds: witness.is_some() != negate, witness, truncated: runs.truncated, runs_checked: runs.runs.len() }
}

/// Exact decision for the language variants, by search in the product of
/// the configuration graph and the automaton; `None` for the anti-pattern.
pub fn regex_holds_exact(
    d: &Diagram,
    spec: &GenKillSpec,
    max_configs: usize,
) -> Result<Option<RegexVerdict>, OracleError> {
    let Some(re) = language(spec) else { return Ok(None) };
    let nfa = Nfa::new(&re);
    let g = config_graph(d, None, |_| (), max_configs)?;
    let mut out: Vec<Vec<(usize, Location)>> = vec![Vec::new(); g.configs.len()];
    for &(v, w, loc, ()) in &g.edges {
        out[v].push((w, loc));
    }
    // Product states are (configuration, automaton state); parents give a witness.
    let mut parent: HashMap<ProductState, Option<(ProductState, Location)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for s in nfa.start() {
        parent.insert((0, s), None);
        queue.push_back((0, s));
    }
    let mut found = None;
    while let Some((v, s)) = queue.pop_front() {
        if Some(v) == g.fin && s == nfa.accept {
            found = Some((v, s));
            break;
        }
        for &(w, loc) in &out[v] {
            for t in nfa.advance(&BTreeSet::from([s]), &loc) {
                if let std::collections::hash_map::Entry::Vacant(e) = parent.entry((w, t)) {
                    e.insert(Some(((v, s), loc)));
                    queue.push_back((w, t));
                }
            }
        }
    }
    let witness = found.map(|mut at| {
        let mut w = Vec::new();
        while let Some(Some((prev, loc))) = parent.get(&at) {
            w.push(*loc);
            at = *prev;
        }
        w.reverse();
        w
    });
    let negate = matches!(spec.variant, Variant::MustForward | Variant::MustBackward);
    Ok(Some(RegexVerdict { holds: witness.is_some() != negate, witness, truncated: false, runs_checked: 0 }))
}
