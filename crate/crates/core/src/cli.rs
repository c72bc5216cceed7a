//! Command-line front end. `run` takes the arguments and two sinks so tests
//! can drive it without a process.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::decompose::{
    classify, final_config_of_location, final_config_of_node, initial_config_of_node, subnegotiation_of_location,
    subnegotiation_of_node,
};
use crate::diagram::{Diagram, NodeId};
use crate::engine::{compute_mop, EngineOptions};
use crate::frameworks::{
    check_invariance, ExpectedCost, Framework, GenKill, InvarianceMode, InvarianceVerdict, NaiveAntiPattern, WorstTime,
};
use crate::io::report::{
    analyze, check, render_check_text, render_text, AnalyzeOptions, FrameworkRequest, Reportable,
};
use crate::io::{emit_dot, parse, render};
use crate::oracle::{brute_mop, enumerate_runs, PriorityScheduler};
use crate::soundness::max_configs_from_env;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNSOUND: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_ENGINE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "negot", version, about = "MOP analyses of sound deterministic negotiation diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Determinism and soundness verdicts.
    Check {
        file: PathBuf,
        #[arg(long)]
        max_configs: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Run an analysis through the reduction engine.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        fw: FrameworkArgs,
        #[arg(long)]
        oracle_check: bool,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        max_configs: Option<usize>,
    },
    /// Initial/final configurations and the subnegotiation of a node or location.
    Decompose {
        file: PathBuf,
        #[arg(long, conflicts_with = "location", required_unless_present = "location")]
        node: Option<String>,
        #[arg(long)]
        location: Option<String>,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
        #[arg(long)]
        max_configs: Option<usize>,
    },
    /// Brute-force value over the runs a priority scheduler allows.
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        fw: FrameworkArgs,
        /// Node names, highest priority first; unnamed nodes follow by id.
        #[arg(long, value_delimiter = ',')]
        scheduler: Vec<String>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        max_configs: Option<usize>,
    },
    /// Check that base transformers of independent locations commute.
    Invariance {
        file: PathBuf,
        #[command(flatten)]
        fw: FrameworkArgs,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
    /// Write the diagram after every reduction stage as DOT files.
    Trace {
        file: PathBuf,
        #[command(flatten)]
        fw: FrameworkArgs,
        #[arg(long)]
        emit_stages: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Dot,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
}

#[derive(Args, Debug, Default)]
struct FrameworkArgs {
    /// expected-cost, worst-time or genkill (naive-anti-pattern for invariance).
    /// Without it the file's first analysis block is used.
    #[arg(long)]
    framework: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    kill: Option<String>,
    #[arg(long)]
    loc: Option<String>,
    #[arg(long)]
    loc2: Option<String>,
}

struct Usage(String);

impl From<String> for Usage {
    fn from(s: String) -> Self {
        Usage(s)
    }
}

impl FrameworkArgs {
    fn lookup(&self, key: &str) -> Option<String> {
        match key {
            "variant" => self.variant.clone(),
            "gen" => self.gen.clone(),
            "kill" => self.kill.clone(),
            "loc" => self.loc.clone(),
            "loc2" => self.loc2.clone(),
            _ => None,
        }
    }

    fn framework_id(&self, d: &Diagram) -> Result<String, Usage> {
        if let Some(f) = &self.framework {
            return Ok(f.clone());
        }
        d.analyses
            .first()
            .and_then(|b| b.get("framework"))
            .map(str::to_string)
            .ok_or_else(|| Usage("no --framework given and the file has no analysis block".into()))
    }

    fn request(&self, d: &Diagram) -> Result<FrameworkRequest, Usage> {
        if self.framework.is_none() {
            if let Some(block) = d.analyses.first() {
                return Ok(FrameworkRequest::from_block(block)?);
            }
        }
        Ok(FrameworkRequest::from_parts(&self.framework_id(d)?, |k| self.lookup(k))?)
    }
}

fn load(path: &Path) -> Result<Diagram, Usage> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Ok(parse(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn cap(flag: Option<usize>) -> usize {
    flag.unwrap_or_else(max_configs_from_env)
}

fn find_node(d: &Diagram, name: &str) -> Result<NodeId, Usage> {
    d.find_node(name).ok_or_else(|| Usage(format!("unknown node `{name}`")))
}

/// Runs the CLI; returns the process exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Usage> {
    let io = |e: std::io::Error| Usage(format!("write failed: {e}"));
    match command {
        Command::Check { file, max_configs, json } => {
            let d = load(&file)?;
            let r = check(&d, cap(max_configs));
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&r).expect("report serialises")).map_err(io)?;
            } else {
                write!(out, "{}", render_check_text(&r)).map_err(io)?;
            }
            Ok(r.exit_code())
        }
        Command::Analyze { file, fw, oracle_check, json, max_configs } => {
            let d = load(&file)?;
            let request = fw.request(&d)?;
            let opts = AnalyzeOptions { max_configs: cap(max_configs), oracle_check, ..AnalyzeOptions::default() };
            let r = analyze(&d, &request, &opts);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&r).expect("report serialises")).map_err(io)?;
            } else {
                write!(out, "{}", render_text(&r)).map_err(io)?;
            }
            Ok(r.exit_code())
        }
        Command::Decompose { file, node, location, emit, max_configs } => {
            let d = load(&file)?;
            let max = cap(max_configs);
            let (sub, header) = if let Some(name) = node {
                let n = find_node(&d, &name)?;
                let i = initial_config_of_node(&d, n, max).map_err(|e| Usage(e.to_string()));
                let f = final_config_of_node(&d, n, max).map_err(|e| Usage(e.to_string()));
                let sub = subnegotiation_of_node(&d, n, max);
                let header = match (i, f) {
                    (Ok(i), Ok(f)) => format!("I({name}) = {}\nF({name}) = {}\n", i.display(&d), f.display(&d)),
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                };
                (sub, header)
            } else {
                let text = location.expect("clap requires one of the two");
                let loc = d.find_location(&text).ok_or_else(|| Usage(format!("unknown location `{text}`")))?;
                let f = final_config_of_location(&d, loc, max).map_err(|e| Usage(e.to_string()))?;
                (subnegotiation_of_location(&d, loc, max), format!("F({text}) = {}\n", f.display(&d)))
            };
            let sub = match sub {
                Ok(s) => s,
                Err(e) => {
                    writeln!(out, "{header}error: {e}").map_err(io)?;
                    return Ok(EXIT_UNSOUND);
                }
            };
            match emit {
                Emit::Dot => write!(out, "{}", emit_dot(&sub.diagram)).map_err(io)?,
                Emit::Text => {
                    write!(out, "{header}kind: {:?}\n{}", classify(&sub), render(&sub.diagram)).map_err(io)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Oracle { file, fw, scheduler, max_len, max_configs } => {
            let d = load(&file)?;
            let request = fw.request(&d)?;
            let prefer = scheduler.iter().map(|n| find_node(&d, n)).collect::<Result<Vec<_>, _>>()?;
            let s = PriorityScheduler::preferring(&d, &prefer);
            let max = cap(max_configs);
            if let Some(len) = max_len {
                let runs = enumerate_runs(&d, &s, len, 10_000);
                writeln!(out, "compatible runs up to length {len}: {}{}", runs.runs.len(), if runs.truncated { " (truncated)" } else { "" })
                    .map_err(io)?;
                for r in runs.runs.iter().take(20) {
                    let names: Vec<String> = r.iter().map(|&l| d.location_name(l)).collect();
                    writeln!(out, "  {}", names.join(" ")).map_err(io)?;
                }
            }
            let line = match &request {
                FrameworkRequest::ExpectedCost => oracle_line(&d, &framework_or_usage(ExpectedCost::new(&d))?, &s, max),
                FrameworkRequest::WorstTime => oracle_line(&d, &framework_or_usage(WorstTime::new(&d))?, &s, max),
                FrameworkRequest::GenKill { .. } => {
                    let spec = request.genkill_spec(&d).map_err(|e| Usage(e.to_string()))?.expect("genkill");
                    oracle_line(&d, &framework_or_usage(GenKill::new(&d, spec))?, &s, max)
                }
            };
            match line {
                Ok(text) => {
                    writeln!(out, "oracle value: {text}").map_err(io)?;
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    writeln!(out, "oracle failed: {e}").map_err(io)?;
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        Command::Invariance { file, fw, mode, seed, count } => {
            let d = load(&file)?;
            let mode = match mode {
                Mode::Exact => InvarianceMode::Exact,
                Mode::Sampled => InvarianceMode::Sampled { seed, count },
            };
            let verdict = if fw.framework.as_deref() == Some("naive-anti-pattern") {
                let loc = |s: &Option<String>, what: &str| -> Result<_, Usage> {
                    let text = s.as_deref().ok_or_else(|| Usage(format!("naive-anti-pattern needs --{what}")))?;
                    d.find_location(text).ok_or_else(|| Usage(format!("unknown location `{text}`")))
                };
                let kill = fw
                    .kill
                    .as_deref()
                    .unwrap_or("")
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| d.find_location(s.trim()).ok_or_else(|| Usage(format!("unknown location `{s}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                check_invariance(&d, &NaiveAntiPattern::new(loc(&fw.loc, "loc")?, loc(&fw.loc2, "loc2")?, kill), mode)
            } else {
                match fw.request(&d)? {
                    FrameworkRequest::ExpectedCost => check_invariance(&d, &framework_or_usage(ExpectedCost::new(&d))?, mode),
                    FrameworkRequest::WorstTime => check_invariance(&d, &framework_or_usage(WorstTime::new(&d))?, mode),
                    request @ FrameworkRequest::GenKill { .. } => {
                        let spec = request.genkill_spec(&d).map_err(|e| Usage(e.to_string()))?.expect("genkill");
                        check_invariance(&d, &framework_or_usage(GenKill::new(&d, spec))?, mode)
                    }
                }
            };
            write!(out, "{}", render_invariance(&d, &verdict)).map_err(io)?;
            Ok(if verdict.invariant { EXIT_OK } else { EXIT_UNSOUND })
        }
        Command::Trace { file, fw, emit_stages } => {
            let d = load(&file)?;
            let request = fw.request(&d)?;
            std::fs::create_dir_all(&emit_stages)
                .map_err(|e| Usage(format!("cannot create {}: {e}", emit_stages.display())))?;
            let written = match &request {
                FrameworkRequest::ExpectedCost => write_stages(&d, &framework_or_usage(ExpectedCost::new(&d))?, &emit_stages),
                FrameworkRequest::WorstTime => write_stages(&d, &framework_or_usage(WorstTime::new(&d))?, &emit_stages),
                FrameworkRequest::GenKill { .. } => {
                    let spec = request.genkill_spec(&d).map_err(|e| Usage(e.to_string()))?.expect("genkill");
                    write_stages(&d, &framework_or_usage(GenKill::new(&d, spec))?, &emit_stages)
                }
            };
            match written {
                Ok(files) => {
                    for f in files {
                        writeln!(out, "{}", f.display()).map_err(io)?;
                    }
                    Ok(EXIT_OK)
                }
                Err(e) => {
                    writeln!(out, "engine failed: {e}").map_err(io)?;
                    Ok(EXIT_ENGINE)
                }
            }
        }
    }
}

fn framework_or_usage<F>(r: Result<F, crate::frameworks::FrameworkError>) -> Result<F, Usage> {
    r.map_err(|e| Usage(e.to_string()))
}

fn oracle_line<F: Reportable>(d: &Diagram, fw: &F, s: &PriorityScheduler, max: usize) -> Result<String, String> {
    let v = brute_mop(d, fw, s, &BTreeMap::new(), max).map_err(|e| e.to_string())?;
    let summary = fw.summarize(&v);
    Ok(match summary.holds {
        Some(h) => format!("{} (holds: {h})", summary.exact),
        None => summary.exact,
    })
}

fn render_invariance(d: &Diagram, v: &InvarianceVerdict) -> String {
    let mut text = format!(
        "invariant: {}\nindependent pairs checked: {}\nmethod: {:?}\n",
        v.invariant, v.pairs_checked, v.method
    );
    if let Some(w) = &v.witness {
        text.push_str(&format!("witness: {} and {} do not commute", d.location_name(w.first), d.location_name(w.second)));
        if let Some(val) = &w.value {
            text.push_str(&format!(" on {val}"));
        }
        text.push('\n');
    }
    text
}

fn write_stages<F: Framework>(d: &Diagram, fw: &F, dir: &Path) -> Result<Vec<PathBuf>, String> {
    let r = compute_mop(d, fw, EngineOptions::default()).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    let mut write = |name: String, text: String| -> Result<(), String> {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
        files.push(path);
        Ok(())
    };
    // Snapshot 0 is the live part of the input; snapshot i follows stage i.
    for (i, snap) in r.trace.snapshots.iter().enumerate() {
        write(format!("stage_{i:02}.dot"), emit_dot(snap))?;
    }
    let mut summary = String::new();
    for s in &r.trace.steps {
        summary.push_str(&format!(
            "stage {} {:?} {} -> {}.{} = {}\n",
            s.snapshot,
            s.kind,
            s.location.map_or_else(|| d.node_name(s.pivot).to_string(), |l| d.location_name(l)),
            d.node_name(s.pivot),
            s.fresh_name,
            fw.render_value(&fw.apply(&s.transformer, &fw.initial_value()))
        ));
    }
    summary.push_str(&format!("result = {}\n", fw.render_value(&r.value)));
    write("trace.txt".into(), summary)?;
    Ok(files)
}
