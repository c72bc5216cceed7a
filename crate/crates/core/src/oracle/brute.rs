//! Values on the scheduler-restricted configuration graph, computed by
//! fixed-point iteration over values (never over transformers).

use std::collections::{BTreeMap, HashMap, VecDeque};

use num::{One, Signed, Zero};

use super::runs::PriorityScheduler;
use super::OracleError;
use crate::diagram::{Configuration, Diagram, Location};
use crate::frameworks::expected_cost::MassCost;
use crate::frameworks::worst_time::{MaxPlus, Time};
use crate::frameworks::{ExpectedCost, Framework, GenKill, Identity, NaiveAntiPattern, WorstTime};
use crate::rational::Rational;
use crate::semantics::{enabled, step};
use crate::soundness::DEFAULT_MAX_CONFIGS;

#[derive(Clone, Debug)]
pub struct ConfigGraph<T> {
    /// Vertex 0 is the initial configuration.
    pub configs: Vec<Configuration>,
    pub edges: Vec<(usize, usize, Location, T)>,
    pub fin: Option<usize>,
}

/// Explores the configurations reachable when `s` picks the node to fire (or
/// every enabled node when there is no scheduler).
pub fn config_graph<T>(
    d: &Diagram,
    s: Option<&PriorityScheduler>,
    label: impl Fn(Location) -> T,
    max_configs: usize,
) -> Result<ConfigGraph<T>, OracleError> {
    let start = Configuration::initial(d);
    let fin_config = Configuration::final_of(d);
    let mut index = HashMap::from([(start.clone(), 0usize)]);
    let mut g = ConfigGraph { configs: vec![start], edges: Vec::new(), fin: None };
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        let c = g.configs[v].clone();
        if c == fin_config {
            g.fin = Some(v);
            continue;
        }
        let nodes = match s {
            Some(s) => s.choose(d, &c).into_iter().collect(),
            None => enabled(d, &c).firable,
        };
        for n in nodes {
            for a in d.outcomes(n) {
                let loc = Location::new(n, a);
                let next = step(d, &c, loc).expect("scheduled nodes are enabled");
                let w = match index.get(&next) {
                    Some(&w) => w,
                    None => {
                        if g.configs.len() >= max_configs {
                            return Err(OracleError::LimitExceeded(max_configs));
                        }
                        index.insert(next.clone(), g.configs.len());
                        g.configs.push(next);
                        queue.push_back(g.configs.len() - 1);
                        g.configs.len() - 1
                    }
                };
                g.edges.push((v, w, loc, label(loc)));
            }
        }
    }
    Ok(g)
}

/// A framework-specific value solver over configuration graphs.
pub trait BruteSolve: Framework {
    fn brute_solve(&self, g: &ConfigGraph<Self::Transformer>, budget: usize) -> Result<Self::Value, OracleError>;
}

/// The value reached at the final configuration, joined over all runs
/// compatible with `s`. Locations in `overrides` use the given transformer
/// instead of their base one.
pub fn brute_mop<F: BruteSolve>(
    d: &Diagram,
    fw: &F,
    s: &PriorityScheduler,
    overrides: &BTreeMap<Location, F::Transformer>,
    budget: usize,
) -> Result<F::Value, OracleError> {
    let g = config_graph(
        d,
        Some(s),
        |loc| overrides.get(&loc).cloned().unwrap_or_else(|| fw.base(d, loc)),
        DEFAULT_MAX_CONFIGS,
    )?;
    fw.brute_solve(&g, budget)
}

/// Chaotic iteration on values; exact for lattices of finite height.
fn worklist_values<F: Framework>(fw: &F, g: &ConfigGraph<F::Transformer>, budget: usize) -> Result<F::Value, OracleError> {
    let n = g.configs.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in g.edges.iter().enumerate() {
        out[e.0].push(i);
    }
    let mut val = vec![fw.bottom(); n];
    val[0] = fw.initial_value();
    let mut queue = VecDeque::from([0usize]);
    let mut queued = vec![false; n];
    queued[0] = true;
    let mut pops = 0;
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        pops += 1;
        if pops > budget {
            return Err(OracleError::Diverged(budget));
        }
        for &ei in &out[v] {
            let (_, w, _, t) = &g.edges[ei];
            let next = fw.join_values(&val[*w], &fw.apply(t, &val[v]));
            if next != val[*w] {
                val[*w] = next;
                if !queued[*w] {
                    queued[*w] = true;
                    queue.push_back(*w);
                }
            }
        }
    }
    Ok(g.fin.map_or_else(|| fw.bottom(), |f| val[f].clone()))
}

impl BruteSolve for GenKill {
    fn brute_solve(&self, g: &ConfigGraph<Self::Transformer>, budget: usize) -> Result<Self::Value, OracleError> {
        worklist_values(self, g, budget)
    }
}

impl BruteSolve for NaiveAntiPattern {
    fn brute_solve(&self, g: &ConfigGraph<Self::Transformer>, budget: usize) -> Result<Self::Value, OracleError> {
        worklist_values(self, g, budget)
    }
}

impl BruteSolve for Identity {
    fn brute_solve(&self, g: &ConfigGraph<()>, budget: usize) -> Result<(), OracleError> {
        worklist_values(self, g, budget)
    }
}

/// Solves `x = M x + b` for several right-hand sides by Gauss-Jordan
/// elimination on `(I - M)`.
#[allow(clippy::needless_range_loop)]
fn solve_fixed_point(m: &[Vec<Rational>], rhs: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>, OracleError> {
    let n = m.len();
    let k = rhs.len();
    let mut rows: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n)
                .map(|j| if i == j { Rational::one() - &m[i][j] } else { -m[i][j].clone() })
                .collect();
            row.extend(rhs.iter().map(|b| b[i].clone()));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !rows[r][col].is_zero()).ok_or(OracleError::Singular)?;
        rows.swap(col, pivot);
        let inv = Rational::one() / &rows[col][col];
        for x in rows[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for j in col..n + k {
                    let sub = &f * &rows[col][j];
                    rows[r][j] -= sub;
                }
            }
        }
    }
    Ok((0..k).map(|c| (0..n).map(|i| rows[i][n + c].clone()).collect()).collect())
}

impl BruteSolve for ExpectedCost {
    /// Total probability mass `M` of reaching the end and probability-weighted
    /// accumulated cost `W` satisfy, per configuration,
    /// `M(v) = sum P_e M(w)` and `W(v) = sum P_e (C_e M(w) + W(w))`.
    fn brute_solve(&self, g: &ConfigGraph<MassCost>, _budget: usize) -> Result<MassCost, OracleError> {
        let Some(fin) = g.fin else {
            return Ok(self.apply(&MassCost::zero(), &self.initial_value()));
        };
        let n = g.configs.len();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (v, w, _, t) in &g.edges {
            if t.mass > Rational::zero() {
                preds[*w].push(*v);
            }
        }
        let mut live = vec![false; n];
        live[fin] = true;
        let mut stack = vec![fin];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                if !live[v] {
                    live[v] = true;
                    stack.push(v);
                }
            }
        }
        if !live[0] {
            return Ok(self.apply(&MassCost::zero(), &self.initial_value()));
        }
        let vars: Vec<usize> = (0..n).filter(|&v| live[v] && v != fin).collect();
        let pos: HashMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let size = vars.len();
        let mut m = vec![vec![Rational::zero(); size]; size];
        let mut b_mass = vec![Rational::zero(); size];
        for (v, w, _, t) in &g.edges {
            let (Some(&i), true) = (pos.get(v), live[*w]) else { continue };
            if *w == fin {
                b_mass[i] += &t.mass;
            } else {
                m[i][pos[w]] += &t.mass;
            }
        }
        let mass = solve_fixed_point(&m, &[b_mass])?.remove(0);
        if mass.iter().any(|x| x.is_negative()) {
            return Err(OracleError::Singular);
        }
        let mass_of = |w: usize| if w == fin { Rational::one() } else { mass[pos[&w]].clone() };
        let mut b_cost = vec![Rational::zero(); size];
        for (v, w, _, t) in &g.edges {
            let (Some(&i), true) = (pos.get(v), live[*w]) else { continue };
            b_cost[i] += &t.mass * &t.cost * mass_of(*w);
        }
        let weighted = solve_fixed_point(&m, &[b_cost])?.remove(0);
        let (total_mass, total_weighted) = if fin == 0 {
            (Rational::one(), Rational::zero())
        } else {
            (mass[pos[&0]].clone(), weighted[pos[&0]].clone())
        };
        let t = if total_mass.is_zero() {
            MassCost::zero()
        } else {
            let cost = &total_weighted / &total_mass;
            MassCost::new(total_mass, cost)
        };
        Ok(self.apply(&t, &self.initial_value()))
    }
}

impl BruteSolve for WorstTime {
    /// Longest-path relaxation on (configuration, process) values. Values
    /// still growing after as many rounds as there are such pairs lie behind
    /// a positive cycle; a second pass pushes +inf through them.
    fn brute_solve(&self, g: &ConfigGraph<MaxPlus>, _budget: usize) -> Result<Vec<Time>, OracleError> {
        let k = self.process_count();
        let n = g.configs.len();
        let mut val = vec![vec![Time::NegInf; k]; n];
        val[0] = self.initial_value();
        let relax = |val: &mut Vec<Vec<Time>>, blow_up: bool| {
            let mut changed = false;
            for (v, w, _, t) in &g.edges {
                for p in 0..k {
                    let cand = (0..k).map(|q| val[*v][q].plus(&t.m[q][p])).max().expect("k > 0");
                    if cand > val[*w][p] {
                        val[*w][p] = if blow_up { Time::PosInf } else { cand };
                        changed = true;
                    }
                }
            }
            changed
        };
        let rounds = n * k + 1;
        let mut settled = false;
        for _ in 0..rounds {
            if !relax(&mut val, false) {
                settled = true;
                break;
            }
        }
        if !settled {
            for _ in 0..rounds {
                if !relax(&mut val, true) {
                    break;
                }
            }
        }
        Ok(g.fin.map_or_else(|| self.bottom(), |f| val[f].clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frameworks::worst_time::makespan;
    use crate::frameworks::{GenKillSpec, Variant};
    use crate::rational::int;

    fn schedulers(d: &Diagram) -> Vec<PriorityScheduler> {
        vec![
            PriorityScheduler::ascending(d),
            PriorityScheduler::descending(d),
            PriorityScheduler::shuffled(d, 7),
            PriorityScheduler::shuffled(d, 8),
        ]
    }

    #[test]
    fn fig2_expected_cost_is_eighteen() {
        let d = fixtures::fig2();
        let fw = ExpectedCost::new(&d).unwrap();
        for s in schedulers(&d) {
            let v = brute_mop(&d, &fw, &s, &BTreeMap::new(), 10_000).unwrap();
            assert_eq!(v, MassCost::new(int(1), int(18)));
        }
    }

    #[test]
    fn fig2_genkill_detects() {
        let d = fixtures::fig2();
        let spec = GenKillSpec::from_names(&d, Variant::MayForward, "n3.b", "", "n7.a", None).unwrap();
        let fw = GenKill::new(&d, spec).unwrap();
        for s in schedulers(&d) {
            let v = brute_mop(&d, &fw, &s, &BTreeMap::new(), 100_000).unwrap();
            assert!(fw.holds(&v));
        }
    }

    #[test]
    fn identity_gives_initial_value() {
        let d = fixtures::fig1();
        let s = PriorityScheduler::ascending(&d);
        assert_eq!(brute_mop(&d, &Identity, &s, &BTreeMap::new(), 1000), Ok(()));
    }

    #[test]
    fn worst_time_on_fig1() {
        let d = fixtures::fig1_acyclic();
        let fw = WorstTime::new(&d).unwrap();
        let s = PriorityScheduler::ascending(&d);
        let v = brute_mop(&d, &fw, &s, &BTreeMap::new(), 0).unwrap();
        assert_eq!(makespan(&v), Time::Fin(int(6)));
        let d = fixtures::fig1();
        let fw = WorstTime::new(&d).unwrap();
        let v = brute_mop(&d, &fw, &s, &BTreeMap::new(), 0).unwrap();
        assert_eq!(makespan(&v), Time::PosInf);
    }

    #[test]
    fn linear_solver() {
        let m = vec![vec![crate::rational::ratio(1, 2)]];
        let x = solve_fixed_point(&m, &[vec![int(1)]]).unwrap();
        assert_eq!(x[0][0], int(2));
    }
}
