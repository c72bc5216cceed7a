//! The reduction engine against the brute-force oracles on generated sound
//! diagrams.

use std::collections::{BTreeMap, BTreeSet};

use negot::diagram::{Diagram, Location};
use negot::engine::{compute_mop, EngineOptions, TieBreak};
use negot::frameworks::genkill::compile;
use negot::frameworks::{ExpectedCost, Framework, GenKill, GenKillSpec, Identity, Variant, WorstTime};
use negot::graph::local_graph;
use negot::oracle::{
    brute_mop, enumerate_all_runs, generate_sound_diagram, regex_holds, regex_holds_exact, trace_condition_holds,
    GenParams, PriorityScheduler,
};
use negot::soundness::check_domination;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BUDGET: usize = 1_000_000;

fn generated(seed: u64, processes: usize, nodes: usize, loops: bool) -> Diagram {
    let mut params = GenParams::new(processes, nodes);
    params.allow_loops = loops;
    generate_sound_diagram(seed, &params).expect("structured generation succeeds").diagram
}

fn random_spec(d: &Diagram, rng: &mut ChaCha8Rng, variant: Variant) -> GenKillSpec {
    let locs = d.locations();
    let pick = |rng: &mut ChaCha8Rng| locs[rng.gen_range(0..locs.len())];
    let subset = |rng: &mut ChaCha8Rng, p: f64| -> BTreeSet<Location> {
        locs.iter().copied().filter(|_| rng.gen_bool(p)).collect()
    };
    GenKillSpec {
        variant,
        gen: subset(rng, 0.25),
        kill: subset(rng, 0.25),
        target: pick(rng),
        target2: Some(pick(rng)),
    }
}

fn schedulers(d: &Diagram) -> [PriorityScheduler; 3] {
    [PriorityScheduler::ascending(d), PriorityScheduler::descending(d), PriorityScheduler::shuffled(d, 99)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn expected_cost_matches_oracle(seed in 0u64..1_000_000) {
        let d = generated(seed, 3, 12, true);
        let fw = ExpectedCost::new(&d).unwrap();
        let engine = compute_mop(&d, &fw, EngineOptions::default()).unwrap();
        for s in schedulers(&d) {
            let oracle = brute_mop(&d, &fw, &s, &BTreeMap::new(), BUDGET).unwrap();
            prop_assert_eq!(&engine.value, &oracle);
        }
        let reversed = EngineOptions { tie_break: TieBreak::HighestFirst, ..Default::default() };
        prop_assert_eq!(compute_mop(&d, &fw, reversed).unwrap().value, engine.value);
    }

    #[test]
    fn worst_time_matches_oracle(seed in 0u64..1_000_000) {
        let d = generated(seed, 3, 12, true);
        let fw = WorstTime::new(&d).unwrap();
        let engine = compute_mop(&d, &fw, EngineOptions::default()).unwrap();
        for s in schedulers(&d) {
            prop_assert_eq!(&engine.value, &brute_mop(&d, &fw, &s, &BTreeMap::new(), BUDGET).unwrap());
        }
    }

    #[test]
    fn genkill_matches_oracles(seed in 0u64..1_000_000, v in 0usize..5) {
        let loops = seed % 2 == 0;
        let d = generated(seed, 3, 10, loops);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&d, &mut rng, Variant::ALL[v]);
        let fw = GenKill::new(&d, spec.clone()).unwrap();
        let engine = compute_mop(&d, &fw, EngineOptions::default()).unwrap();
        let holds = fw.holds(&engine.value);
        for s in schedulers(&d) {
            prop_assert_eq!(&engine.value, &brute_mop(&d, &fw, &s, &BTreeMap::new(), BUDGET).unwrap());
        }
        if let Some(exact) = regex_holds_exact(&d, &spec, 1_000_000).unwrap() {
            prop_assert_eq!(holds, exact.holds, "language oracle disagrees; witness {:?}", exact.witness);
        }
        let acyclic = local_graph(&d).is_acyclic();
        let enumerated = regex_holds(&d, &spec, None, 4 * d.locations().len(), 2_000);
        if acyclic && !enumerated.truncated {
            prop_assert_eq!(holds, enumerated.holds);
        } else if enumerated.witness.is_some() {
            // Bounded enumeration is only conclusive when it finds a witness.
            let negate = matches!(spec.variant, Variant::MustForward | Variant::MustBackward);
            prop_assert_eq!(holds, !negate);
        }
    }

    #[test]
    fn genkill_is_exact_on_single_runs(seed in 0u64..1_000_000, v in 0usize..5) {
        let d = generated(seed, 3, 10, true);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let spec = random_spec(&d, &mut rng, Variant::ALL[v]);
        let fw = GenKill::new(&d, spec.clone()).unwrap();
        let q = compile(&spec);
        let runs = enumerate_all_runs(&d, 3 * d.locations().len(), 200);
        for run in &runs.runs {
            let mut t = fw.identity();
            for &l in run {
                t = fw.compose(&t, &fw.base(&d, l));
            }
            let value = fw.apply(&t, &fw.initial_value());
            prop_assert_eq!(fw.detected(&value), trace_condition_holds(&d, run, &q).is_some());
        }
    }

    #[test]
    fn identity_and_domination(seed in 0u64..1_000_000) {
        let d = generated(seed, 4, 14, true);
        let r = compute_mop(&d, &Identity, EngineOptions::default()).unwrap();
        prop_assert_eq!(r.value, ());
        let verdict = check_domination(&d, 100_000, 10);
        prop_assert!(verdict.holds, "{:?}", verdict.counterexample);
    }
}

/// Every reduced snapshot keeps the meaning of the original diagram when
/// its fresh outcomes carry their registry transformers.
#[test]
fn reductions_preserve_expected_cost() {
    let mut diagrams = vec![negot::fixtures::fig2(), negot::fixtures::fig1()];
    diagrams.extend((0..25).map(|s| generated(s, 3, 12, true)));
    for d in diagrams {
        let fw = ExpectedCost::new(&d).unwrap();
        let r = compute_mop(&d, &fw, EngineOptions::default()).unwrap();
        for (i, snap) in r.trace.snapshots.iter().enumerate() {
            let overrides: BTreeMap<Location, _> = r
                .trace
                .steps
                .iter()
                .filter(|s| s.snapshot <= i)
                .filter_map(|s| {
                    let loc = snap.find_location(&format!("{}.{}", d.node_name(s.pivot), s.fresh_name))?;
                    Some((loc, s.transformer.clone()))
                })
                .collect();
            let fw_snap = ExpectedCost::new(snap).unwrap();
            let v = brute_mop(snap, &fw_snap, &PriorityScheduler::ascending(snap), &overrides, BUDGET).unwrap();
            assert_eq!(v, r.value, "{} snapshot {i}", d.name);
        }
    }
}

/// The derived must-variant languages agree with the engine on well over a
/// hundred random sound diagrams.
#[test]
fn must_variants_certified() {
    let mut checked = 0;
    for seed in 0..120u64 {
        let d = generated(seed + 5000, 3, 10, seed % 3 != 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for variant in [Variant::MustForward, Variant::MustBackward] {
            let spec = random_spec(&d, &mut rng, variant);
            let fw = GenKill::new(&d, spec.clone()).unwrap();
            let engine = compute_mop(&d, &fw, EngineOptions::default()).unwrap();
            let exact = regex_holds_exact(&d, &spec, 1_000_000).unwrap().unwrap();
            assert_eq!(fw.holds(&engine.value), exact.holds, "seed {seed} {variant:?}");
            checked += 1;
        }
    }
    assert!(checked >= 200);
}
