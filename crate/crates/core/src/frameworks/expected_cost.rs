//! Expected cost of probabilistic diagrams.
//!
//! Values and transformers are both (mass, cost) pairs where the cost is
//! conditional on the mass, so `(1, 18)` reads "terminates with probability 1
//! at expected cost 18". The unnormalised form mass*cost is what adds up
//! under joins.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use rand::{Rng, RngCore};

use super::{FlowGraph, Framework, FrameworkError};
use crate::diagram::{Diagram, Location};
use crate::rational::{format_rational, ratio, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MassCost {
    pub mass: Rational,
    pub cost: Rational,
}

impl MassCost {
    /// Zero mass forgets the cost so that equality is structural.
    pub fn new(mass: Rational, cost: Rational) -> MassCost {
        if mass.is_zero() {
            MassCost { mass, cost: Rational::zero() }
        } else {
            MassCost { mass, cost }
        }
    }

    pub fn zero() -> MassCost {
        MassCost { mass: Rational::zero(), cost: Rational::zero() }
    }

    pub fn unit() -> MassCost {
        MassCost { mass: Rational::one(), cost: Rational::zero() }
    }

    /// The unnormalised pair (mass, mass * cost).
    pub fn weighted(&self) -> (Rational, Rational) {
        (self.mass.clone(), &self.mass * &self.cost)
    }

    pub fn from_weighted(mass: Rational, weighted_cost: Rational) -> MassCost {
        if mass.is_zero() {
            MassCost::zero()
        } else {
            let cost = weighted_cost / &mass;
            MassCost { mass, cost }
        }
    }

    pub fn render(&self) -> String {
        format!("({}, {})", format_rational(&self.mass), format_rational(&self.cost))
    }
}

pub fn compose_mc(first: &MassCost, then: &MassCost) -> MassCost {
    MassCost::new(&first.mass * &then.mass, &first.cost + &then.cost)
}

pub fn join_mc(a: &MassCost, b: &MassCost) -> MassCost {
    if a.mass.is_zero() {
        return b.clone();
    }
    if b.mass.is_zero() {
        return a.clone();
    }
    let (ma, wa) = a.weighted();
    let (mb, wb) = b.weighted();
    MassCost::from_weighted(ma + mb, wa + wb)
}

#[derive(Clone, Debug)]
pub struct ExpectedCost {
    table: BTreeMap<Location, MassCost>,
}

impl ExpectedCost {
    /// Reads probabilities and costs from the diagram. Nodes without
    /// probability annotations get a uniform distribution; missing costs are 0.
    pub fn new(d: &Diagram) -> Result<ExpectedCost, FrameworkError> {
        let mut table = BTreeMap::new();
        for n in d.node_ids() {
            let node = d.node(n);
            if node.outcomes.is_empty() {
                continue;
            }
            let annotated = node.outcomes.values().filter(|t| t.annotations.prob.is_some()).count();
            if annotated != 0 && annotated != node.outcomes.len() {
                return Err(FrameworkError::BadProbabilities(format!(
                    "node `{}` annotates only some outcomes",
                    node.name
                )));
            }
            let uniform = ratio(1, node.outcomes.len() as i64);
            let mut sum = Rational::zero();
            for (a, t) in &node.outcomes {
                let p = t.annotations.prob.clone().unwrap_or_else(|| uniform.clone());
                if p.is_negative() || p > Rational::one() {
                    return Err(FrameworkError::BadProbabilities(format!("{} has probability {}", d.location_name(Location::new(n, *a)), format_rational(&p))));
                }
                sum += &p;
                let c = t.annotations.cost.clone().unwrap_or_else(Rational::zero);
                table.insert(Location::new(n, *a), MassCost::new(p, c));
            }
            if !sum.is_one() {
                return Err(FrameworkError::BadProbabilities(format!(
                    "outcomes of `{}` sum to {}",
                    node.name,
                    format_rational(&sum)
                )));
            }
        }
        Ok(ExpectedCost { table })
    }
}

impl Framework for ExpectedCost {
    type Value = MassCost;
    type Transformer = MassCost;

    fn name(&self) -> &'static str {
        "expected-cost"
    }

    fn initial_value(&self) -> MassCost {
        MassCost::unit()
    }

    fn bottom(&self) -> MassCost {
        MassCost::zero()
    }

    fn join_values(&self, a: &MassCost, b: &MassCost) -> MassCost {
        join_mc(a, b)
    }

    fn leq(&self, a: &MassCost, b: &MassCost) -> bool {
        a.mass <= b.mass && a.cost <= b.cost
    }

    fn base(&self, d: &Diagram, loc: Location) -> MassCost {
        self.table.get(&loc).cloned().unwrap_or_else(|| {
            let ann = d.annotations(loc);
            MassCost::new(
                ann.and_then(|a| a.prob.clone()).unwrap_or_else(Rational::one),
                ann.and_then(|a| a.cost.clone()).unwrap_or_else(Rational::zero),
            )
        })
    }

    fn identity(&self) -> MassCost {
        MassCost::unit()
    }

    fn compose(&self, first: &MassCost, then: &MassCost) -> MassCost {
        compose_mc(first, then)
    }

    fn join(&self, a: &MassCost, b: &MassCost) -> MassCost {
        join_mc(a, b)
    }

    fn zero(&self) -> MassCost {
        MassCost::zero()
    }

    fn apply(&self, t: &MassCost, v: &MassCost) -> MassCost {
        compose_mc(v, t)
    }

    fn transformer_eq(&self, a: &MassCost, b: &MassCost) -> Option<bool> {
        Some(a == b)
    }

    fn flow_solve(&self, g: &FlowGraph<MassCost>) -> Result<MassCost, FrameworkError> {
        solve_markov(g)
    }

    fn sample_values(&self, rng: &mut dyn RngCore, count: usize) -> Vec<MassCost> {
        (0..count)
            .map(|_| {
                let mass = ratio(rng.gen_range(0..=4), 4);
                let cost = ratio(rng.gen_range(-6..=12), rng.gen_range(1..=3));
                MassCost::new(mass, cost)
            })
            .collect()
    }

    fn render_value(&self, v: &MassCost) -> String {
        v.render()
    }
}

/// Solves mass(v) = sum P_e mass(t), mass(exit) = 1 and
/// w(v) = sum P_e (C_e mass(t) + w(t)), w(exit) = 0, where w is the
/// mass-weighted cost, over the vertices from which the exit is reachable
/// through edges of positive mass.
#[allow(clippy::needless_range_loop)]
fn solve_markov(g: &FlowGraph<MassCost>) -> Result<MassCost, FrameworkError> {
    if g.entry == g.exit {
        return Ok(MassCost::unit());
    }
    let positive = FlowGraph {
        vertex_count: g.vertex_count,
        entry: g.entry,
        exit: g.exit,
        edges: g.edges.iter().filter(|e| !e.label.mass.is_zero()).cloned().collect(),
    };
    let live = positive.co_reachable();
    if !live[g.entry] {
        return Ok(MassCost::zero());
    }
    let unknowns: Vec<usize> = (0..g.vertex_count).filter(|&v| live[v] && v != g.exit).collect();
    let mut slot = vec![usize::MAX; g.vertex_count];
    for (i, &v) in unknowns.iter().enumerate() {
        slot[v] = i;
    }
    let k = unknowns.len();
    let mut a = vec![vec![Rational::zero(); k]; k];
    let mut rhs_mass = vec![Rational::zero(); k];
    for i in 0..k {
        a[i][i] = Rational::one();
    }
    for e in &positive.edges {
        if !live[e.from] || !live[e.to] || e.from == g.exit {
            continue;
        }
        let i = slot[e.from];
        if e.to == g.exit {
            rhs_mass[i] += &e.label.mass;
        } else {
            a[i][slot[e.to]] -= &e.label.mass;
        }
    }
    let mass = gauss_solve(a.clone(), rhs_mass).ok_or(FrameworkError::SingularSystem)?;
    if mass.iter().any(|m| m.is_negative()) {
        return Err(FrameworkError::SingularSystem);
    }
    let mut rhs_cost = vec![Rational::zero(); k];
    for e in &positive.edges {
        if !live[e.from] || !live[e.to] || e.from == g.exit {
            continue;
        }
        let target_mass = if e.to == g.exit { Rational::one() } else { mass[slot[e.to]].clone() };
        rhs_cost[slot[e.from]] += &e.label.mass * &e.label.cost * target_mass;
    }
    let weighted = gauss_solve(a, rhs_cost).ok_or(FrameworkError::SingularSystem)?;
    let i = slot[g.entry];
    Ok(MassCost::from_weighted(mass[i].clone(), weighted[i].clone()))
}

/// Exact Gauss-Jordan elimination; `None` for singular systems.
#[allow(clippy::needless_range_loop)]
fn gauss_solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let k = b.len();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for j in col..k {
            a[col][j] *= &inv;
        }
        b[col] *= &inv;
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for j in col..k {
                    let delta = &factor * &a[col][j];
                    a[r][j] -= delta;
                }
                let delta = &factor * &b[col];
                b[r] -= delta;
            }
        }
    }
    Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::frameworks::{path_enumeration_solve, testing::random_dag};
    use crate::rational::int;

    fn mc(m: i64, c: i64) -> MassCost {
        MassCost::new(int(m), int(c))
    }

    #[test]
    fn loop_of_n3_solves_to_three() {
        // n3 -a-> exit, n3 -b-> n5 -a-> n3, probabilities 1/2, unit costs.
        let half = MassCost::new(ratio(1, 2), int(1));
        let mut g = FlowGraph::new(3, 0, 2);
        g.add_edge(0, 2, half.clone(), None);
        g.add_edge(0, 1, half, None);
        g.add_edge(1, 0, mc(1, 1), None);
        assert_eq!(solve_markov(&g).unwrap(), mc(1, 3));
    }

    #[test]
    fn loop_of_n7_solves_to_nine() {
        // n7 -a-> exit, n7 -b-> n2 -(1,7)-> n7.
        let half = MassCost::new(ratio(1, 2), int(1));
        let mut g = FlowGraph::new(3, 0, 2);
        g.add_edge(0, 2, half.clone(), None);
        g.add_edge(0, 1, half, None);
        g.add_edge(1, 0, mc(1, 7), None);
        assert_eq!(solve_markov(&g).unwrap(), mc(1, 9));
    }

    #[test]
    fn trivial_graphs() {
        let mut g = FlowGraph::new(2, 0, 1);
        g.add_edge(0, 1, mc(1, 0), None);
        assert_eq!(solve_markov(&g).unwrap(), mc(1, 0));
        let g: FlowGraph<MassCost> = FlowGraph::new(2, 0, 1);
        assert_eq!(solve_markov(&g).unwrap(), MassCost::zero());
    }

    #[test]
    fn join_keeps_paper_pair() {
        let a = MassCost::new(ratio(1, 4), int(2));
        let b = MassCost::new(ratio(1, 2), int(5));
        let j = join_mc(&a, &b);
        assert_eq!(j.weighted(), (ratio(3, 4), ratio(1, 2) + ratio(5, 2)));
        assert_eq!(join_mc(&MassCost::zero(), &b), b);
    }

    #[test]
    fn solver_agrees_with_paths_on_dags() {
        let d = fixtures::fig2();
        let fw = ExpectedCost::new(&d).unwrap();
        for seed in 0..40 {
            let g = random_dag(&fw, &d, seed);
            assert_eq!(fw.flow_solve(&g).unwrap(), path_enumeration_solve(&fw, &g), "seed {seed}");
        }
    }

    #[test]
    fn uniform_default_and_validation() {
        let mut raw = fixtures::fig4().to_raw();
        let d = crate::diagram::validate(&raw).unwrap();
        let fw = ExpectedCost::new(&d).unwrap();
        assert_eq!(fw.base(&d, d.find_location("n0.a").unwrap()), mc(1, 0));
        raw.outcomes[0].prob = Some(ratio(1, 2));
        let d = crate::diagram::validate_with(&raw, crate::diagram::ValidationMode { check_probabilities: false, require_outcomes: true }).unwrap();
        assert!(ExpectedCost::new(&d).is_err());
    }
}
