//! The sequential three-valued anti-pattern analysis: 0 means no pending
//! first generation, 1 means one is pending with no kill since, 2 means the
//! second generation followed. It is order-sensitive on independent
//! locations and exists to exercise the invariance checker.

use rand::{Rng, RngCore};

use super::{kleene_flow_solve, FlowGraph, Framework, FrameworkError};
use crate::diagram::{Diagram, Location};

#[derive(Clone, Debug)]
pub struct NaiveAntiPattern {
    pub first: Location,
    pub second: Location,
    pub kill: Vec<Location>,
}

impl NaiveAntiPattern {
    pub fn new(first: Location, second: Location, kill: impl IntoIterator<Item = Location>) -> NaiveAntiPattern {
        NaiveAntiPattern { first, second, kill: kill.into_iter().collect() }
    }

    fn step(&self, loc: Location, x: u8) -> u8 {
        let x = if loc == self.second && x >= 1 { 2 } else { x };
        if x == 2 {
            2
        } else if loc == self.first {
            1
        } else if self.kill.contains(&loc) {
            0
        } else {
            x
        }
    }
}

/// Transformers are tables `[f(0), f(1), f(2)]`; `None` marks the empty join.
pub type Table = [Option<u8>; 3];

impl Framework for NaiveAntiPattern {
    type Value = Option<u8>;
    type Transformer = Table;

    fn name(&self) -> &'static str {
        "naive-anti-pattern"
    }

    fn initial_value(&self) -> Option<u8> {
        Some(0)
    }

    fn bottom(&self) -> Option<u8> {
        None
    }

    fn join_values(&self, a: &Option<u8>, b: &Option<u8>) -> Option<u8> {
        (*a).max(*b)
    }

    fn leq(&self, a: &Option<u8>, b: &Option<u8>) -> bool {
        a <= b
    }

    fn base(&self, _: &Diagram, loc: Location) -> Table {
        [0, 1, 2].map(|x| Some(self.step(loc, x)))
    }

    fn identity(&self) -> Table {
        [Some(0), Some(1), Some(2)]
    }

    fn compose(&self, first: &Table, then: &Table) -> Table {
        first.map(|y| y.and_then(|y| then[y as usize]))
    }

    fn join(&self, a: &Table, b: &Table) -> Table {
        [0, 1, 2].map(|i| a[i].max(b[i]))
    }

    fn zero(&self) -> Table {
        [None; 3]
    }

    fn apply(&self, t: &Table, v: &Option<u8>) -> Option<u8> {
        v.and_then(|x| t[x as usize])
    }

    fn transformer_eq(&self, a: &Table, b: &Table) -> Option<bool> {
        Some(a == b)
    }

    fn flow_solve(&self, g: &FlowGraph<Table>) -> Result<Table, FrameworkError> {
        kleene_flow_solve(self, g, 4 * g.vertex_count + 2)
    }

    fn sample_values(&self, rng: &mut dyn RngCore, count: usize) -> Vec<Option<u8>> {
        (0..count).map(|_| [None, Some(0), Some(1), Some(2)][rng.gen_range(0..4)]).collect()
    }

    fn render_value(&self, v: &Option<u8>) -> String {
        v.map_or("bottom".to_string(), |x| x.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn tables() {
        let d = fixtures::fig1();
        let l = |s| d.find_location(s).unwrap();
        let fw = NaiveAntiPattern::new(l("n1.send"), l("n2.eval"), [l("n6.OK")]);
        assert_eq!(fw.base(&d, l("n1.send")), [Some(1), Some(1), Some(2)]);
        assert_eq!(fw.base(&d, l("n2.eval"))[0], Some(0));
        assert_eq!(fw.base(&d, l("n2.eval"))[1], Some(2));
        assert_eq!(fw.base(&d, l("n6.OK"))[1], Some(0));
        assert_eq!(fw.base(&d, l("n6.OK"))[2], Some(2));
        assert_eq!(fw.base(&d, l("n0.reg")), fw.identity());
    }
}
