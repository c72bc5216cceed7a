//! Acceptance suite: one line per criterion on standard output.
//!
//! Criteria run sequentially inside a single test so the timing-based ones
//! are not disturbed by other tests. Lines are written to the raw stdout
//! handle, which the test harness does not capture.
//!
//! Two criteria state values that disagree with what the definitions give
//! on the bundled fixtures (see the notes on criteria 2 and 10). Their lines
//! say FAIL with the reason, while the test asserts the values the
//! definitions produce, cross-checked by brute force.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use negot::decompose::{
    final_config_of_location, final_config_of_node, initial_config_of_node, subnegotiation_of_location,
    subnegotiation_of_node,
};
use negot::diagram::{validate, Diagram, Location, NodeRole};
use negot::engine::{compute_mop, EngineOptions, StepKind};
use negot::fixtures;
use negot::frameworks::expected_cost::MassCost;
use negot::frameworks::worst_time::{makespan, Time};
use negot::frameworks::{
    check_invariance, ExpectedCost, GenKill, GenKillSpec, InvarianceMode, NaiveAntiPattern, Variant,
    WorstTime,
};
use negot::graph::{graph_reachable, local_graph};
use negot::oracle::{
    brute_mop, enumerate_all_runs, enumerate_runs, generate_sound_diagram, regex_holds, run_makespan, BruteSolve,
    GenParams, OracleError, PriorityScheduler,
};
use negot::rational::{format_decimal, int, to_f64};
use negot::semantics::{is_successful, mazurkiewicz_equivalent, step};
use negot::soundness::{check_domination, check_soundness, SoundnessStatus};
use negot::Configuration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: usize = 1_000_000;

struct Line {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Line {
    Line { pass: true, detail: detail.into() }
}

fn report(n: usize, title: &str, line: &Line, took: Duration) {
    let mut out = std::io::stdout().lock();
    let verdict = if line.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "criterion {n:>2} [{verdict}] {title}: {} ({} ms)", line.detail, took.as_millis());
}

fn show(d: &Diagram, c: &Configuration) -> String {
    c.display(d).to_string()
}

fn mc(mass: i64, cost: i64) -> MassCost {
    MassCost::new(int(mass), int(cost))
}

fn generated(seed: u64, processes: usize, nodes: usize, loops: bool) -> Diagram {
    let mut params = GenParams::new(processes, nodes);
    params.allow_loops = loops;
    generate_sound_diagram(seed, &params).expect("structured generation succeeds").diagram
}

fn random_spec(d: &Diagram, rng: &mut ChaCha8Rng, variant: Variant) -> GenKillSpec {
    let locs = d.locations();
    let pick = |rng: &mut ChaCha8Rng| locs[rng.gen_range(0..locs.len())];
    GenKillSpec {
        variant,
        gen: locs.iter().copied().filter(|_| rng.gen_bool(0.3)).collect(),
        kill: locs.iter().copied().filter(|_| rng.gen_bool(0.2)).collect(),
        target: pick(rng),
        target2: Some(pick(rng)),
    }
}

fn schedulers(d: &Diagram) -> [PriorityScheduler; 3] {
    [PriorityScheduler::ascending(d), PriorityScheduler::descending(d), PriorityScheduler::shuffled(d, 17)]
}

fn same_under_schedulers<F: BruteSolve>(d: &Diagram, fw: &F) -> Result<F::Value, String> {
    let values: Vec<F::Value> = schedulers(d)
        .iter()
        .map(|s| brute_mop(d, fw, s, &BTreeMap::new(), CAP).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if values.windows(2).all(|w| w[0] == w[1]) {
        Ok(values[0].clone())
    } else {
        Err(format!("{} on {}: {:?}", fw.name(), d.name, values))
    }
}

fn criterion_1() -> Line {
    let d = fixtures::fig2();
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/fig2.neg");
    let mut out = Vec::new();
    let code = negot::cli::run(
        ["negot", "analyze", path.to_str().unwrap(), "--framework=expected-cost"],
        &mut out,
        &mut std::io::sink(),
    );
    let text = String::from_utf8(out).unwrap();
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("result: (1, 18)"), "{text}");

    let fw = ExpectedCost::new(&d).unwrap();
    let r = compute_mop(&d, &fw, EngineOptions::default()).unwrap();
    assert_eq!(r.value, mc(1, 18));
    let node_value = |name: &str| {
        let n = d.find_node(name).unwrap();
        r.trace.steps.iter().find(|s| s.kind == StepKind::Node && s.pivot == n).map(|s| s.transformer.clone())
    };
    let loc_value = |name: &str| {
        let l = d.find_location(name).unwrap();
        r.trace.steps.iter().find(|s| s.location == Some(l)).map(|s| s.transformer.clone())
    };
    let expected = [
        ("n3", node_value("n3"), mc(1, 3)),
        ("n4", node_value("n4"), mc(1, 3)),
        ("n5", node_value("n5"), mc(1, 4)),
        ("n6", node_value("n6"), mc(1, 4)),
        ("n2.a", loc_value("n2.a"), mc(1, 7)),
        ("n7", node_value("n7"), mc(1, 9)),
        ("n2", node_value("n2"), mc(1, 16)),
    ];
    for (what, got, want) in &expected {
        assert_eq!(got.as_ref(), Some(want), "intermediate value for {what}");
    }
    pass("result (1, 18); n3/n4 (1,3), n5/n6 (1,4), n2.a (1,7), n7 (1,9), n2 (1,16)")
}

fn criterion_2() -> Line {
    let d = fixtures::fig2();
    let n = |s: &str| d.find_node(s).unwrap();
    let l = |s: &str| d.find_location(s).unwrap();
    let i = |s: &str| show(&d, &initial_config_of_node(&d, n(s), CAP).unwrap());
    let f = |s: &str| show(&d, &final_config_of_node(&d, n(s), CAP).unwrap());
    let fl = |s: &str| show(&d, &final_config_of_location(&d, l(s), CAP).unwrap());
    assert_eq!(i("n1"), "(n1,n8,n8)");
    assert_eq!(i("n2"), "(n8,n2,n2)");
    assert_eq!(i("n3"), "(n8,n3,n7)");
    assert_eq!(f("n1"), "(n8,n8,n8)");
    assert_eq!(f("n2"), "(n8,n8,n8)");
    assert_eq!(f("n3"), "(n8,n7,n7)");

    // Brute-force replay: fire the location from the unique configuration
    // enabling its node and compare with the computed final configuration.
    let replayed = |s: &str| {
        let loc = l(s);
        let start = initial_config_of_node(&d, loc.node, CAP).unwrap();
        show(&d, &step(&d, &start, loc).unwrap())
    };
    assert_eq!(fl("n7.b"), "(n8,n2,n2)");
    assert_eq!(replayed("n7.b"), "(n8,n2,n2)");
    let n7a = fl("n7.a");
    assert_eq!(n7a, "(n8,n8,n8)");
    assert_eq!(replayed("n7.a"), n7a);
    Line {
        pass: n7a == "(n8,n7,n7)",
        detail: format!(
            "I(n1),I(n2),I(n3),F(n1),F(n2),F(n3) match; F(n7,b)=(n8,n2,n2) confirmed by replay (the listed \
             \"F(n8,b)\" is read as a typo for F(n7,b)); F(n7,a) computes to {n7a}, not the stated (n8,n7,n7): \
             both processes of n7 move to n8 under outcome a, and replay agrees"
        ),
    }
}

fn criterion_3() -> Line {
    let start = Instant::now();
    let mut count = 0;
    for d in [fixtures::fig1(), fixtures::fig2()] {
        let live = graph_reachable(&d);
        for n in d.node_ids().filter(|n| live[n.index()] && *n != d.fin) {
            let sub = subnegotiation_of_node(&d, n, CAP).unwrap();
            assert_eq!(check_soundness(&sub.diagram, CAP).status, SoundnessStatus::Sound, "{}|{}", d.name, d.node_name(n));
            count += 1;
            for a in d.outcomes(n) {
                let loc = Location::new(n, a);
                let sub = subnegotiation_of_location(&d, loc, CAP).unwrap();
                assert_eq!(check_soundness(&sub.diagram, CAP).status, SoundnessStatus::Sound, "{}", d.location_name(loc));
                count += 1;
            }
        }
    }
    let took = start.elapsed();
    Line { pass: took < Duration::from_secs(5), detail: format!("{count} subnegotiations of fig1 and fig2 are sound") }
}

fn criterion_4() -> Line {
    let mut checked = Vec::new();
    for d in [fixtures::fig1(), fixtures::fig2()] {
        let ec = same_under_schedulers(&d, &ExpectedCost::new(&d).unwrap()).unwrap();
        let wt = same_under_schedulers(&d, &WorstTime::new(&d).unwrap()).unwrap();
        checked.push(format!("{}: cost {} time {}", d.name, ec.render(), makespan(&wt)));
        for variant in Variant::ALL {
            let spec = match d.name.as_str() {
                "fig1" => GenKillSpec::from_names(&d, variant, "n5.done", "n6.OK", "n5.done", Some("n5.done")),
                _ => GenKillSpec::from_names(&d, variant, "n3.b,n4.b", "n7.b", "n7.a", Some("n5.a")),
            }
            .unwrap();
            same_under_schedulers(&d, &GenKill::new(&d, spec).unwrap()).unwrap();
        }
    }
    pass(format!("3 schedulers agree exactly ({}; gen/kill in all five variants)", checked.join(", ")))
}

struct Corpus {
    diagrams: Vec<(u64, Diagram)>,
}

fn corpus() -> Corpus {
    Corpus {
        diagrams: (1..=100u64)
            .map(|seed| (seed, generated(seed, 1 + (seed as usize % 4), 12, seed % 5 != 0)))
            .collect(),
    }
}

fn criterion_5(c: &Corpus) -> Line {
    let start = Instant::now();
    let (mut infinite, mut detected) = (0, 0);
    let mut worst_delta = 0.0f64;
    for (seed, d) in &c.diagrams {
        assert!(d.process_count() <= 4 && d.nodes.len() <= 12);
        let asc = PriorityScheduler::ascending(d);

        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
        let spec = random_spec(d, &mut rng, Variant::ALL[*seed as usize % 5]);
        let gk = GenKill::new(d, spec).unwrap();
        let engine = compute_mop(d, &gk, EngineOptions::default()).unwrap().value;
        assert_eq!(engine, brute_mop(d, &gk, &asc, &BTreeMap::new(), CAP).unwrap(), "gen/kill seed {seed}");
        detected += usize::from(gk.detected(&engine));

        let ec = ExpectedCost::new(d).unwrap();
        let engine = compute_mop(d, &ec, EngineOptions::default()).unwrap().value;
        let oracle = brute_mop(d, &ec, &asc, &BTreeMap::new(), CAP).unwrap();
        assert_eq!(engine, oracle, "expected cost seed {seed}");
        let delta = (to_f64(&engine.cost) - to_f64(&oracle.cost)).abs();
        worst_delta = worst_delta.max(delta);
        assert_eq!(format_decimal(&engine.cost, 9), format_decimal(&oracle.cost, 9));

        let wt = WorstTime::new(d).unwrap();
        let engine = compute_mop(d, &wt, EngineOptions::default()).unwrap().value;
        assert_eq!(engine, brute_mop(d, &wt, &asc, &BTreeMap::new(), CAP).unwrap(), "worst time seed {seed}");
        infinite += usize::from(makespan(&engine) == Time::PosInf);
    }
    let took = start.elapsed();
    Line {
        pass: took < Duration::from_secs(60),
        detail: format!(
            "{} diagrams (seeds 1..100): gen/kill exact ({detected} detected), expected cost exact (max |delta| {worst_delta:e}), \
             worst time exact ({infinite} with +inf)",
            c.diagrams.len()
        ),
    }
}

fn criterion_6(c: &Corpus) -> Line {
    let start = Instant::now();
    let mut acyclic: Vec<&Diagram> = c.diagrams.iter().map(|(_, d)| d).filter(|d| local_graph(d).is_acyclic()).collect();
    let extra: Vec<Diagram> = (1..=100u64).map(|s| generated(s + 10_000, 1 + (s as usize % 4), 12, false)).collect();
    acyclic.extend(extra.iter());
    let mut compared = 0;
    for (i, d) in acyclic.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        for variant in Variant::ALL {
            let spec = random_spec(d, &mut rng, variant);
            let fw = GenKill::new(d, spec.clone()).unwrap();
            let engine = fw.holds(&compute_mop(d, &fw, EngineOptions::default()).unwrap().value);
            // Every node fires at most once in an acyclic diagram.
            let oracle = regex_holds(d, &spec, None, d.nodes.len() + 1, 1_000_000);
            assert!(!oracle.truncated, "enumeration of {} is incomplete", d.name);
            assert_eq!(engine, oracle.holds, "{} {:?} witness {:?}", d.name, variant, oracle.witness);
            compared += 1;
        }
    }
    let acyclic_time = start.elapsed();
    let mut positives = 0;
    let cyclic: Vec<&Diagram> = c.diagrams.iter().map(|(_, d)| d).filter(|d| !local_graph(d).is_acyclic()).collect();
    for (i, d) in cyclic.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + i as u64);
        for variant in Variant::ALL {
            let spec = random_spec(d, &mut rng, variant);
            let fw = GenKill::new(d, spec.clone()).unwrap();
            let value = compute_mop(d, &fw, EngineOptions::default()).unwrap().value;
            let oracle = regex_holds(d, &spec, None, 3 * d.locations().len(), 300);
            if oracle.witness.is_some() {
                assert!(fw.detected(&value), "{} {:?}: oracle witness {:?} missed", d.name, variant, oracle.witness);
                positives += 1;
            }
        }
    }
    pass(format!(
        "{compared} acyclic instances agree with complete enumeration; {positives} oracle-positive cyclic instances \
         (of {} checked) are engine-positive [acyclic part {} ms]",
        cyclic.len() * 5,
        acyclic_time.as_millis()
    ))
}

fn criterion_7() -> Line {
    for d in [fixtures::fig1(), fixtures::fig2()] {
        let ec = check_invariance(&d, &ExpectedCost::new(&d).unwrap(), InvarianceMode::Exact);
        let wt = check_invariance(&d, &WorstTime::new(&d).unwrap(), InvarianceMode::Exact);
        assert!(ec.invariant && wt.invariant, "{}", d.name);
        assert!(ec.pairs_checked > 0);
    }
    let d = fixtures::fig1();
    let l = |s: &str| d.find_location(s).unwrap();
    let naive = NaiveAntiPattern::new(l("n3.tout"), l("n5.done"), vec![]);
    let v = check_invariance(&d, &naive, InvarianceMode::Exact);
    assert!(!v.invariant);
    let w = v.witness.expect("a witness pair");
    assert!(negot::semantics::independent(&d, w.first, w.second));
    pass(format!(
        "expected cost and worst time commute on all independent pairs of fig1/fig2; the naive anti-pattern framework \
         fails on the independent pair ({}, {})",
        d.location_name(w.first),
        d.location_name(w.second)
    ))
}

fn criterion_8() -> Line {
    let d = fixtures::fig4();
    let l = |s: &str| d.find_location(s).unwrap();
    let w = vec![l("n0.a"), l("n2.a")];
    assert!(is_successful(&d, &w));
    let s = PriorityScheduler::preferring(&d, &[d.find_node("n1").unwrap()]);
    let compatible = enumerate_runs(&d, &s, 10, 1000);
    let equivalent = compatible.runs.iter().filter(|v| mazurkiewicz_equivalent(&d, &w, v)).count();
    assert_eq!(equivalent, 0);
    // The same property holds on the deterministic fixtures.
    for det in [fixtures::fig1_acyclic(), fixtures::fig2()] {
        let all = enumerate_all_runs(&det, 16, 2000);
        let s = PriorityScheduler::preferring(&det, &[det.find_node("n1").unwrap()]);
        let scheduled = enumerate_runs(&det, &s, 16, 2000);
        for run in &all.runs {
            assert_eq!(scheduled.runs.iter().filter(|v| mazurkiewicz_equivalent(&det, run, v)).count(), 1);
        }
    }
    pass(format!(
        "[(n0,a)(n2,a)] is successful on fig4 but none of the {} runs allowed by the n1-first scheduler is equivalent",
        compatible.runs.len()
    ))
}

fn criterion_9(c: &Corpus) -> Line {
    let mut circuits = 0;
    let mut diagrams = vec![fixtures::fig1(), fixtures::fig2()];
    diagrams.extend(c.diagrams.iter().map(|(_, d)| d.clone()));
    for d in &diagrams {
        let v = check_domination(d, CAP, 12);
        assert!(v.holds, "domination violated on {}: {:?}", d.name, v.counterexample);
        circuits += v.circuits_checked;
    }
    pass(format!("{circuits} circuits over {} diagrams each contain a dominant node", diagrams.len()))
}

fn criterion_10() -> Line {
    let d = fixtures::fig1_acyclic();
    let fw = WorstTime::new(&d).unwrap();
    let engine = makespan(&compute_mop(&d, &fw, EngineOptions::default()).unwrap().value);
    let brute = makespan(&brute_mop(&d, &fw, &PriorityScheduler::ascending(&d), &BTreeMap::new(), CAP).unwrap());
    let runs = enumerate_all_runs(&d, 32, 10_000);
    assert!(!runs.truncated);
    let longest = runs.runs.iter().map(|r| run_makespan(&d, r)).max().unwrap();
    assert_eq!(engine, brute);
    assert_eq!(engine, Time::Fin(longest.clone()));

    let looping = fixtures::fig1();
    let fw = WorstTime::new(&looping).unwrap();
    let engine_loop = makespan(&compute_mop(&looping, &fw, EngineOptions::default()).unwrap().value);
    assert_eq!(engine_loop, Time::PosInf);
    assert_eq!(
        makespan(&brute_mop(&looping, &fw, &PriorityScheduler::ascending(&looping), &BTreeMap::new(), CAP).unwrap()),
        Time::PosInf
    );
    Line {
        pass: engine == Time::Fin(int(7)),
        detail: format!(
            "fig1 with the loop gives +inf; the acyclic variant gives {engine}, equal to brute force and to the longest of \
             {} enumerated runs, not the stated 7: its longest run reg,send,eval,(tout|rec),pr,done,OK has 6 \
             locations on the critical path with unit times and the final node contributes no outcome",
            runs.runs.len()
        ),
    }
}

/// `k` copies of fig2 in sequence: the final node of each copy is replaced
/// by the initial node of the next.
fn chain(k: usize) -> Diagram {
    let base = fixtures::fig2().to_raw();
    let mut raw = base.clone();
    raw.name = format!("fig2_chain{k}");
    raw.nodes.clear();
    raw.outcomes.clear();
    let init = base.nodes.iter().find(|n| n.role == Some(NodeRole::Init)).unwrap().name.clone();
    let fin = base.nodes.iter().find(|n| n.role == Some(NodeRole::Final)).unwrap().name.clone();
    let rename = |name: &str, i: usize| -> String {
        if name == fin && i + 1 < k {
            format!("{init}_{}", i + 1)
        } else {
            format!("{name}_{i}")
        }
    };
    for i in 0..k {
        for n in &base.nodes {
            if n.name == fin && i + 1 < k {
                continue;
            }
            let mut node = n.clone();
            node.name = format!("{}_{i}", n.name);
            node.role = match n.role {
                Some(NodeRole::Init) if i > 0 => None,
                Some(NodeRole::Final) if i + 1 < k => None,
                r => r,
            };
            raw.nodes.push(node);
        }
        for o in &base.outcomes {
            let mut out = o.clone();
            out.node = format!("{}_{i}", o.node);
            for (_, targets) in &mut out.moves {
                for t in targets.iter_mut() {
                    *t = rename(t, i);
                }
            }
            raw.outcomes.push(out);
        }
    }
    validate(&raw).expect("chained copies form a valid diagram")
}

fn median_time(mut f: impl FnMut(), reps: usize) -> Duration {
    let mut times: Vec<Duration> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .collect();
    times.sort();
    times[reps / 2]
}

fn criterion_11() -> Line {
    let mut points = Vec::new();
    for k in 1..=8 {
        let d = chain(k);
        assert_eq!(check_soundness(&d, CAP).status, SoundnessStatus::Sound);
        let fw = ExpectedCost::new(&d).unwrap();
        let value = compute_mop(&d, &fw, EngineOptions::default()).unwrap().value;
        assert_eq!(value, mc(1, 18 * k as i64));
        let t = median_time(
            || {
                compute_mop(&d, &fw, EngineOptions::default()).unwrap();
            },
            5,
        );
        points.push((d.nodes.len() as f64, t.as_secs_f64()));
    }
    // Least-squares slope of log(time) against log(size) from k = 2 on; the
    // single copy is dominated by fixed overhead.
    let fit: Vec<(f64, f64)> = points[1..].iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let mean_x = fit.iter().map(|p| p.0).sum::<f64>() / fit.len() as f64;
    let mean_y = fit.iter().map(|p| p.1).sum::<f64>() / fit.len() as f64;
    let slope = fit.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum::<f64>()
        / fit.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();

    let largest = chain(8);
    let fw = ExpectedCost::new(&largest).unwrap();
    let engine_time = Duration::from_secs_f64(points.last().unwrap().1);
    let start = Instant::now();
    let brute = brute_mop(&largest, &fw, &PriorityScheduler::ascending(&largest), &BTreeMap::new(), CAP);
    let brute_time = start.elapsed();
    let capped = matches!(brute, Err(OracleError::LimitExceeded(_)));
    if let Ok(v) = &brute {
        assert_eq!(*v, mc(1, 144));
    }
    let ratio = brute_time.as_secs_f64() / engine_time.as_secs_f64();
    let sizes: Vec<String> = points.iter().map(|(n, t)| format!("{n}:{:.2}ms", t * 1e3)).collect();
    Line {
        pass: slope <= 3.0 && (ratio >= 10.0 || capped),
        detail: format!(
            "engine time vs nodes [{}], log-log slope {slope:.2}; brute force on 8 copies took {:.2} ms, {ratio:.1}x the \
             engine{}",
            sizes.join(" "),
            brute_time.as_secs_f64() * 1e3,
            if capped { " (capped)" } else { "" }
        ),
    }
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut run = |n: usize, title: &str, f: &mut dyn FnMut() -> Line| {
        let start = Instant::now();
        let line = f();
        report(n, title, &line, start.elapsed());
        if !line.pass {
            failed.push(n);
        }
    };
    let corpus = corpus();
    run(1, "worked expected-cost example", &mut criterion_1);
    run(2, "decomposition fixtures", &mut criterion_2);
    run(3, "subnegotiation soundness", &mut criterion_3);
    run(4, "scheduler independence", &mut criterion_4);
    run(5, "engine-oracle equivalence", &mut || criterion_5(&corpus));
    run(6, "gen/kill vs regex oracle", &mut || criterion_6(&corpus));
    run(7, "invariance checker discriminates", &mut criterion_7);
    run(8, "non-determinism counterexample", &mut criterion_8);
    run(9, "domination property", &mut || criterion_9(&corpus));
    run(10, "worst-case time", &mut criterion_10);
    run(11, "scaling smoke test", &mut criterion_11);
    // Criteria 2 and 10 state values the definitions do not produce; the
    // faithful values are asserted inside them instead.
    let unexpected: Vec<usize> = failed.into_iter().filter(|n| ![2, 10].contains(n)).collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
