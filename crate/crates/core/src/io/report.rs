//! Analysis requests and their JSON-serialisable reports.
//!
//! Exact rationals are written as `"num/den"` strings, always with an
//! explicit denominator, so a reader never has to guess the number type.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::diagram::{AnalysisBlock, Diagram};
use crate::engine::{compute_mop, EngineError, EngineOptions, StepKind, TieBreak};
use crate::frameworks::expected_cost::MassCost;
use crate::frameworks::worst_time::{makespan, Time};
use crate::frameworks::{ExpectedCost, Framework, FrameworkError, GenKill, GenKillSpec, Variant, WorstTime};
use crate::oracle::{brute_mop, BruteSolve, PriorityScheduler};
use crate::rational::{format_decimal, Rational};
use crate::semantics::is_deterministic;
use crate::soundness::{check_soundness, SoundnessStatus};

pub const SCHEMA_VERSION: u32 = 1;
const DECIMAL_DIGITS: usize = 12;

pub fn json_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn json_time(t: &Time) -> String {
    match t {
        Time::Fin(r) => json_rational(r),
        other => other.to_string(),
    }
}

fn decimal_time(t: &Time) -> String {
    match t {
        Time::Fin(r) => format_decimal(r, DECIMAL_DIGITS),
        other => other.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrameworkRequest {
    ExpectedCost,
    WorstTime,
    GenKill {
        variant: Variant,
        gen: String,
        kill: String,
        loc: String,
        loc2: Option<String>,
    },
}

impl FrameworkRequest {
    pub fn id(&self) -> &'static str {
        match self {
            FrameworkRequest::ExpectedCost => "expected-cost",
            FrameworkRequest::WorstTime => "worst-time",
            FrameworkRequest::GenKill { .. } => "genkill",
        }
    }

    pub fn params(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        if let FrameworkRequest::GenKill { variant, gen, kill, loc, loc2 } = self {
            out.insert("variant".into(), variant.as_str().into());
            out.insert("gen".into(), gen.clone());
            out.insert("kill".into(), kill.clone());
            out.insert("loc".into(), loc.clone());
            if let Some(l2) = loc2 {
                out.insert("loc2".into(), l2.clone());
            }
        }
        out
    }

    /// Builds a request from a framework id and `key=value` parameters, the
    /// shape shared by CLI flags and analysis blocks.
    pub fn from_parts(id: &str, get: impl Fn(&str) -> Option<String>) -> Result<FrameworkRequest, String> {
        match id {
            "expected-cost" => Ok(FrameworkRequest::ExpectedCost),
            "worst-time" => Ok(FrameworkRequest::WorstTime),
            "genkill" => {
                let variant_text = get("variant").unwrap_or_else(|| "may-forward".into());
                let variant = Variant::parse(&variant_text).ok_or_else(|| format!("unknown variant `{variant_text}`"))?;
                let loc = get("loc").ok_or("genkill needs a queried location (loc)")?;
                let loc2 = get("loc2");
                if variant == Variant::AntiPattern && loc2.is_none() {
                    return Err("the anti-pattern variant needs loc2".into());
                }
                Ok(FrameworkRequest::GenKill {
                    variant,
                    gen: get("gen").unwrap_or_default(),
                    kill: get("kill").unwrap_or_default(),
                    loc,
                    loc2,
                })
            }
            other => Err(format!("unknown framework `{other}`")),
        }
    }

    pub fn from_block(block: &AnalysisBlock) -> Result<FrameworkRequest, String> {
        let id = block.get("framework").ok_or_else(|| format!("analysis `{}` names no framework", block.name))?;
        FrameworkRequest::from_parts(id, |k| block.get(k).map(str::to_string))
    }

    pub fn genkill_spec(&self, d: &Diagram) -> Result<Option<GenKillSpec>, FrameworkError> {
        match self {
            FrameworkRequest::GenKill { variant, gen, kill, loc, loc2 } => {
                GenKillSpec::from_names(d, *variant, gen, kill, loc, loc2.as_deref()).map(Some)
            }
            _ => Ok(None),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub max_configs: usize,
    pub oracle_check: bool,
    pub tie_break: TieBreak,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            max_configs: crate::soundness::max_configs_from_env(),
            oracle_check: false,
            tie_break: TieBreak::LowestFirst,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramInfo {
    pub name: String,
    pub processes: usize,
    pub nodes: usize,
    pub locations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameworkInfo {
    pub id: String,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterminismInfo {
    pub deterministic: bool,
    /// `node.outcome/process` triples with more than one successor.
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoundnessInfo {
    /// `sound`, `unsound` or `limit-exceeded`.
    pub status: String,
    pub max_configs: usize,
    pub configurations: usize,
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultInfo {
    /// Human-readable exact value.
    pub exact: String,
    pub decimal: String,
    /// Named exact components, e.g. `mass` and `cost`.
    pub components: BTreeMap<String, String>,
    /// For gen/kill, whether the queried property holds.
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepInfo {
    /// `location` or `node`.
    pub kind: String,
    pub pivot: String,
    pub location: Option<String>,
    pub fresh: String,
    pub value: String,
    pub progress: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub stages: usize,
    pub steps: Vec<StepInfo>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleInfo {
    pub scheduler: String,
    pub value: Option<String>,
    pub agree: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub diagram: DiagramInfo,
    pub determinism: DeterminismInfo,
    pub soundness: SoundnessInfo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub diagram: DiagramInfo,
    pub framework: FrameworkInfo,
    pub determinism: DeterminismInfo,
    pub soundness: SoundnessInfo,
    pub result: Option<ResultInfo>,
    pub trace: Option<TraceSummary>,
    pub oracle: Option<OracleInfo>,
    pub error: Option<ErrorInfo>,
}

pub fn diagram_info(d: &Diagram) -> DiagramInfo {
    DiagramInfo {
        name: d.name.clone(),
        processes: d.process_count(),
        nodes: d.nodes.len(),
        locations: d.locations().len(),
    }
}

pub fn check(d: &Diagram, max_configs: usize) -> CheckReport {
    let det = is_deterministic(d);
    let witnesses = det
        .witnesses
        .iter()
        .map(|&(n, a, p)| format!("{}.{}/{}", d.node_name(n), d.outcome_name(a), d.process_name(p)))
        .collect();
    let s = check_soundness(d, max_configs);
    let status = match s.status {
        SoundnessStatus::Sound => "sound",
        SoundnessStatus::Unsound => "unsound",
        SoundnessStatus::LimitExceeded => "limit-exceeded",
    };
    CheckReport {
        schema_version: SCHEMA_VERSION,
        diagram: diagram_info(d),
        determinism: DeterminismInfo { deterministic: det.deterministic, witnesses },
        soundness: SoundnessInfo {
            status: status.to_string(),
            max_configs,
            configurations: s.configurations,
            witness: s.witness.map(|w| w.locations.iter().map(|&l| d.location_name(l)).collect()),
        },
    }
}

impl CheckReport {
    /// 0 sound, 2 unsound, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.soundness.status.as_str() {
            "sound" => 0,
            "unsound" => 2,
            _ => 3,
        }
    }
}

fn engine_error_kind(e: &EngineError) -> &'static str {
    match e {
        EngineError::NotSoundEvidence(_) => "not-sound-evidence",
        EngineError::NotDeterministic(_) => "not-deterministic",
        EngineError::PreconditionViolated(_) => "precondition-violated",
        EngineError::AlreadyReduced(_) => "already-reduced",
        EngineError::EngineInvariantBroken(_) => "engine-invariant-broken",
        EngineError::Framework(_) => "framework",
    }
}

/// Frameworks the reports know how to summarise.
pub trait Reportable: BruteSolve {
    fn summarize(&self, v: &Self::Value) -> ResultInfo;
}

impl Reportable for ExpectedCost {
    fn summarize(&self, v: &MassCost) -> ResultInfo {
        ResultInfo {
            exact: v.render(),
            decimal: format_decimal(&v.cost, DECIMAL_DIGITS),
            components: BTreeMap::from([
                ("mass".to_string(), json_rational(&v.mass)),
                ("cost".to_string(), json_rational(&v.cost)),
            ]),
            holds: None,
        }
    }
}

impl Reportable for WorstTime {
    fn summarize(&self, v: &Vec<Time>) -> ResultInfo {
        let m = makespan(v);
        let mut components = BTreeMap::from([("makespan".to_string(), json_time(&m))]);
        for (i, t) in v.iter().enumerate() {
            components.insert(format!("process{i}"), json_time(t));
        }
        ResultInfo { exact: m.to_string(), decimal: decimal_time(&m), components, holds: None }
    }
}

impl Reportable for GenKill {
    fn summarize(&self, v: &Self::Value) -> ResultInfo {
        let holds = self.holds(v);
        ResultInfo {
            exact: self.render_value(v),
            decimal: holds.to_string(),
            components: BTreeMap::from([("detected".to_string(), self.detected(v).to_string())]),
            holds: Some(holds),
        }
    }
}

fn run_with<F: Reportable>(d: &Diagram, fw: &F, opts: &AnalyzeOptions, report: &mut AnalysisReport) {
    let options = EngineOptions { tie_break: opts.tie_break, ..EngineOptions::default() };
    let engine_value = match compute_mop(d, fw, options) {
        Ok(r) => {
            report.trace = Some(TraceSummary {
                stages: r.trace.stages.len(),
                steps: r
                    .trace
                    .steps
                    .iter()
                    .map(|s| StepInfo {
                        kind: match s.kind {
                            StepKind::Location => "location".into(),
                            StepKind::Node => "node".into(),
                        },
                        pivot: d.node_name(s.pivot).to_string(),
                        location: s.location.map(|l| d.location_name(l)),
                        fresh: format!("{}.{}", d.node_name(s.pivot), s.fresh_name),
                        value: fw.render_value(&fw.apply(&s.transformer, &fw.initial_value())),
                        progress: s.progress,
                    })
                    .collect(),
            });
            report.result = Some(fw.summarize(&r.value));
            Some(r.value)
        }
        Err(e) => {
            report.error = Some(ErrorInfo { kind: engine_error_kind(&e).into(), message: e.to_string() });
            None
        }
    };
    if opts.oracle_check {
        let s = PriorityScheduler::ascending(d);
        report.oracle = Some(match brute_mop(d, fw, &s, &BTreeMap::new(), opts.max_configs) {
            Ok(v) => OracleInfo {
                scheduler: "ascending".into(),
                value: Some(fw.summarize(&v).exact),
                agree: engine_value.as_ref().map(|e| *e == v),
                error: None,
            },
            Err(e) => OracleInfo { scheduler: "ascending".into(), value: None, agree: None, error: Some(e.to_string()) },
        });
    }
}

/// Determinism and soundness verdicts, then the engine, then optionally
/// the brute-force oracle. The engine is skipped on diagrams the explicit
/// check proves unsound.
pub fn analyze(d: &Diagram, request: &FrameworkRequest, opts: &AnalyzeOptions) -> AnalysisReport {
    let checked = check(d, opts.max_configs);
    let mut report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        diagram: checked.diagram,
        framework: FrameworkInfo { id: request.id().into(), params: request.params() },
        determinism: checked.determinism,
        soundness: checked.soundness,
        result: None,
        trace: None,
        oracle: None,
        error: None,
    };
    if report.soundness.status == "unsound" {
        report.error = Some(ErrorInfo {
            kind: "unsound".into(),
            message: "the diagram can reach a configuration from which the final one is unreachable".into(),
        });
        return report;
    }
    let framework_error = |report: &mut AnalysisReport, e: FrameworkError| {
        report.error = Some(ErrorInfo { kind: "framework".into(), message: e.to_string() });
    };
    match request {
        FrameworkRequest::ExpectedCost => match ExpectedCost::new(d) {
            Ok(fw) => run_with(d, &fw, opts, &mut report),
            Err(e) => framework_error(&mut report, e),
        },
        FrameworkRequest::WorstTime => match WorstTime::new(d) {
            Ok(fw) => run_with(d, &fw, opts, &mut report),
            Err(e) => framework_error(&mut report, e),
        },
        FrameworkRequest::GenKill { .. } => {
            match request.genkill_spec(d).and_then(|s| GenKill::new(d, s.expect("genkill request"))) {
                Ok(fw) => run_with(d, &fw, opts, &mut report),
                Err(e) => framework_error(&mut report, e),
            }
        }
    }
    report
}

impl AnalysisReport {
    /// 0 success, 2 unsound, 3 inconclusive soundness with a failed engine,
    /// 4 engine failure.
    pub fn exit_code(&self) -> i32 {
        match &self.error {
            None => 0,
            Some(e) if e.kind == "unsound" => 2,
            Some(e) if e.kind == "framework" => 1,
            Some(_) if self.soundness.status == "limit-exceeded" => 3,
            Some(_) => 4,
        }
    }
}

fn push_verdicts(out: &mut String, det: &DeterminismInfo, s: &SoundnessInfo) {
    let _ = writeln!(out, "determinism: {}", det.deterministic);
    for w in &det.witnesses {
        let _ = writeln!(out, "  several successors at {w}");
    }
    let _ = writeln!(out, "soundness: {} ({} configurations, cap {})", s.status, s.configurations, s.max_configs);
    if let Some(w) = &s.witness {
        let _ = writeln!(out, "  witness: {}", if w.is_empty() { "(empty run)".to_string() } else { w.join(" ") });
    }
}

pub fn render_check_text(r: &CheckReport) -> String {
    let mut out = format!("diagram: {}\n", r.diagram.name);
    push_verdicts(&mut out, &r.determinism, &r.soundness);
    out
}

pub fn render_text(r: &AnalysisReport) -> String {
    let mut out = format!("diagram: {}\nframework: {}", r.diagram.name, r.framework.id);
    for (k, v) in &r.framework.params {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    push_verdicts(&mut out, &r.determinism, &r.soundness);
    if let Some(t) = &r.trace {
        let _ = writeln!(out, "reduction: {} stages, {} steps", t.stages, t.steps.len());
        for s in &t.steps {
            let _ = writeln!(out, "  {} {} -> {} = {}", s.kind, s.location.as_deref().unwrap_or(&s.pivot), s.fresh, s.value);
        }
    }
    if let Some(res) = &r.result {
        let _ = writeln!(out, "result: {}", res.exact);
        let _ = writeln!(out, "decimal: {}", res.decimal);
        if let Some(h) = res.holds {
            let _ = writeln!(out, "holds: {h}");
        }
    }
    if let Some(o) = &r.oracle {
        match (&o.value, &o.error) {
            (Some(v), _) => {
                let status = match o.agree {
                    Some(true) => "agree",
                    Some(false) => "DISAGREE",
                    None => "no engine value",
                };
                let _ = writeln!(out, "oracle ({}): {} [{}]", o.scheduler, v, status);
            }
            (None, Some(e)) => {
                let _ = writeln!(out, "oracle ({}): failed: {}", o.scheduler, e);
            }
            _ => {}
        }
    }
    if let Some(e) = &r.error {
        let _ = writeln!(out, "error ({}): {}", e.kind, e.message);
    }
    out
}
