//! Checks that base transformers of independent locations commute.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Framework;
use crate::diagram::{Diagram, Location};
use crate::semantics::independent;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InvarianceMode {
    /// Exact transformer comparison; frameworks without decidable equality
    /// fall back to sampling with a fixed seed.
    Exact,
    /// Compare the two compositions on sampled values only.
    Sampled { seed: u64, count: usize },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceWitness {
    pub first: Location,
    pub second: Location,
    /// A rendered input value on which the two orders differ, when found by
    /// sampling.
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceVerdict {
    pub invariant: bool,
    pub pairs_checked: usize,
    pub method: Method,
    pub witness: Option<InvarianceWitness>,
}

const FALLBACK_SEED: u64 = 0x5eed;
const FALLBACK_COUNT: usize = 64;

pub fn check_invariance<F: Framework>(d: &Diagram, fw: &F, mode: InvarianceMode) -> InvarianceVerdict {
    let locs = d.locations();
    let (seed, count) = match mode {
        InvarianceMode::Sampled { seed, count } => (seed, count),
        InvarianceMode::Exact => (FALLBACK_SEED, FALLBACK_COUNT),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![fw.initial_value(), fw.bottom()];
    samples.extend(fw.sample_values(&mut rng, count));

    let mut method = Method::Exact;
    let mut pairs_checked = 0;
    for (i, &l1) in locs.iter().enumerate() {
        for &l2 in &locs[i + 1..] {
            if !independent(d, l1, l2) {
                continue;
            }
            pairs_checked += 1;
            let (b1, b2) = (fw.base(d, l1), fw.base(d, l2));
            let (t12, t21) = (fw.compose(&b1, &b2), fw.compose(&b2, &b1));
            let exact = match mode {
                InvarianceMode::Exact => fw.transformer_eq(&t12, &t21),
                InvarianceMode::Sampled { .. } => None,
            };
            let witness = match exact {
                Some(true) => None,
                Some(false) => Some(InvarianceWitness { first: l1, second: l2, value: None }),
                None => {
                    method = Method::Sampled;
                    samples.iter().find(|v| fw.apply(&t12, v) != fw.apply(&t21, v)).map(|v| InvarianceWitness {
                        first: l1,
                        second: l2,
                        value: Some(fw.render_value(v)),
                    })
                }
            };
            if witness.is_some() {
                return InvarianceVerdict { invariant: false, pairs_checked, method, witness };
            }
        }
    }
    InvarianceVerdict { invariant: true, pairs_checked, method, witness: None }
}
