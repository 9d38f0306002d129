//! The end-to-end driver behind the `ratunif` binary.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::expansion::DEFAULT_DEPTH;
use crate::flatten::flatten;
use crate::mgu_extract::mgu;
use crate::oracle_kit::{verify_concrete, EqCheck};
use crate::saturation::{saturate_with, SatConfig, SatError, SatMode, SatTrace, TraceItem};
use crate::surface::{load_problem, ConcreteContext, Namer};
use crate::term_core::{Mode, NameSupply, Substitution};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModeChoice {
    /// First-order iff no binders or pattern arguments remain after
    /// flattening.
    #[default]
    Auto,
    FirstOrder,
    HigherOrder,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: PathBuf,
    pub mode: ModeChoice,
    pub trace: bool,
    pub check_depth: Option<usize>,
    pub output: OutputFormat,
    pub max_steps: usize,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            mode: ModeChoice::Auto,
            trace: false,
            check_depth: None,
            output: OutputFormat::Text,
            max_steps: SatConfig::new(SatMode::HigherOrder).max_steps,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Unifier,
    NoUnifier,
    InputError,
    Internal,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Unifier => 0,
            ExitStatus::NoUnifier => 1,
            ExitStatus::InputError => 2,
            ExitStatus::Internal => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub status: ExitStatus,
    pub stdout: String,
    pub stderr: String,
}

impl RunOutput {
    fn fail(status: ExitStatus, msg: String) -> Self {
        RunOutput {
            status,
            stdout: String::new(),
            stderr: format!("{msg}\n"),
        }
    }
}

#[derive(Serialize)]
struct JsonAssignment {
    metavar: String,
    mode: &'static str,
    #[serde(rename = "type")]
    ty: String,
    pattern: Vec<String>,
    value: String,
}

#[derive(Serialize)]
struct JsonDef {
    name: String,
    #[serde(rename = "type")]
    ty: String,
    binders: Vec<String>,
    body: String,
}

#[derive(Serialize)]
struct JsonTraceItem {
    item: usize,
    text: String,
    rule: Option<&'static str>,
    premises: Vec<usize>,
}

#[derive(Serialize)]
struct JsonOutput {
    result: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    assignments: Option<Vec<JsonAssignment>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    defs: Option<Vec<JsonDef>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<JsonTraceItem>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    checked_depth: Option<usize>,
}

/// Reads `cfg.input` and runs the pipeline on it.
pub fn run(cfg: &RunConfig) -> RunOutput {
    match std::fs::read_to_string(&cfg.input) {
        Ok(text) => run_source(cfg, &text),
        Err(e) => RunOutput::fail(ExitStatus::InputError, format!("{}: {e}", cfg.input.display())),
    }
}

pub fn run_source(cfg: &RunConfig, text: &str) -> RunOutput {
    let path = cfg.input.display();
    let (sig, concrete) = match load_problem(text) {
        Ok(p) => p,
        Err(e) => return RunOutput::fail(ExitStatus::InputError, format!("{path}:{e}")),
    };
    let flat = match flatten(&sig, &concrete) {
        Ok(f) => f,
        Err(e) => return RunOutput::fail(ExitStatus::InputError, format!("{path}: {e}")),
    };
    let mode = match cfg.mode {
        ModeChoice::Auto if flat.is_first_order() => SatMode::FirstOrder,
        ModeChoice::Auto | ModeChoice::HigherOrder => SatMode::HigherOrder,
        ModeChoice::FirstOrder => SatMode::FirstOrder,
    };
    let mut sat_cfg = SatConfig::new(mode);
    sat_cfg.max_steps = cfg.max_steps;
    let sat = match saturate_with(&flat, &sat_cfg, NameSupply::new()) {
        Ok(s) => s,
        Err(SatError::NotFirstOrder) => {
            return RunOutput::fail(ExitStatus::InputError, format!("{path}: the problem is not first-order"))
        }
        Err(e) => return RunOutput::fail(ExitStatus::Internal, format!("{path}: saturation failed: {e}")),
    };
    let mut namer = Namer::new();
    namer.reserve_sig(&sig);
    let trace_text = cfg.trace.then(|| sat.trace.render(&mut namer));
    let trace = match cfg.output {
        OutputFormat::Json if cfg.trace => Some(trace_items(&sat.trace, &mut namer)),
        _ => None,
    };
    if sat.context.contra {
        let stdout = match cfg.output {
            OutputFormat::Text => format!("{}no unifier\n", comment_lines(&trace_text)),
            OutputFormat::Json => json(&JsonOutput {
                result: "no-unifier",
                assignments: None,
                defs: None,
                trace,
                checked_depth: None,
            }),
        };
        return RunOutput {
            status: ExitStatus::NoUnifier,
            stdout,
            stderr: String::new(),
        };
    }
    let g = match mgu(&sat.context, Some(&flat.uv())) {
        Ok(g) => g,
        Err(e) => return RunOutput::fail(ExitStatus::Internal, format!("{path}: extraction failed: {e}")),
    };
    if let Some(k) = cfg.check_depth {
        if let Err(msg) = check(&concrete, &g, k) {
            return RunOutput::fail(ExitStatus::Internal, format!("{path}: {msg}"));
        }
    }
    let stdout = match cfg.output {
        OutputFormat::Text => {
            let mut out = comment_lines(&trace_text);
            out.push_str(&render_unifier(&g, &mut namer));
            if let Some(k) = cfg.check_depth {
                let _ = writeln!(out, "% checked to depth {k}");
            }
            out
        }
        OutputFormat::Json => {
            let (assignments, defs) = json_unifier(&g, &mut namer);
            json(&JsonOutput {
                result: "unifier",
                assignments: Some(assignments),
                defs: Some(defs),
                trace,
                checked_depth: cfg.check_depth,
            })
        }
    };
    RunOutput {
        status: ExitStatus::Unifier,
        stdout,
        stderr: String::new(),
    }
}

fn check(concrete: &ConcreteContext, g: &Substitution, k: usize) -> Result<(), String> {
    let report = verify_concrete(concrete, g, k).map_err(|e| format!("check failed: {e}"))?;
    for (eq, c) in &report.equations {
        if let EqCheck::FailsAt { depth, .. } = c {
            return Err(format!("unifier does not satisfy {eq} at depth {depth}"));
        }
    }
    Ok(())
}

fn json(out: &JsonOutput) -> String {
    let mut s = serde_json::to_string_pretty(out).expect("plain data serializes");
    s.push('\n');
    s
}

fn trace_items(trace: &SatTrace, namer: &mut Namer) -> Vec<JsonTraceItem> {
    let mut text = |item: &TraceItem| match item {
        TraceItem::Eq(e) => format!("{} = {}", namer.term(&e.lhs, false), namer.term(&e.rhs, false)),
        TraceItem::Def(r, d) => format!("{} =d {}", namer.rec(r), namer.term(&d.as_lambda(), false)),
        TraceItem::Contra => "contra".to_string(),
    };
    let mut out: Vec<JsonTraceItem> = trace
        .given
        .iter()
        .map(|(n, item)| JsonTraceItem {
            item: n.0,
            text: text(item),
            rule: None,
            premises: Vec::new(),
        })
        .collect();
    for s in &trace.steps {
        for (n, item) in &s.produced {
            out.push(JsonTraceItem {
                item: n.0,
                text: text(item),
                rule: Some(s.rule.name()),
                premises: s.premises.iter().map(|p| p.0).collect(),
            });
        }
    }
    out
}

fn comment_lines(text: &Option<String>) -> String {
    let mut out = String::new();
    for line in text.iter().flat_map(|t| t.lines()) {
        let _ = writeln!(out, "% {line}");
    }
    out
}

fn reserve_unifier(g: &Substitution, namer: &mut Namer) {
    for (m, e) in &g.entries {
        namer.reserve_term(&e.lhs(m));
        namer.reserve_term(&e.as_lambda());
    }
    for (r, d) in &g.defs {
        namer.reserve_def(r, d);
    }
}

/// `H := TERM.` lines, then the definitions, in the input syntax.
pub fn render_unifier(g: &Substitution, namer: &mut Namer) -> String {
    reserve_unifier(g, namer);
    let mut out = String::new();
    for (m, e) in &g.entries {
        let _ = writeln!(out, "{}", namer.assignment(m, e, false));
    }
    for (r, d) in &g.defs {
        let _ = writeln!(out, "{}", namer.def(r, d, false));
    }
    out
}

fn json_unifier(g: &Substitution, namer: &mut Namer) -> (Vec<JsonAssignment>, Vec<JsonDef>) {
    reserve_unifier(g, namer);
    let assignments = g
        .entries
        .iter()
        .map(|(m, e)| JsonAssignment {
            metavar: namer.meta(m),
            mode: match e.mode {
                Mode::Con => "con",
                Mode::Rec => "rec",
            },
            ty: e.ty.to_string(),
            pattern: e.pattern.iter().map(|b| namer.var(&b.var)).collect(),
            value: namer.term(&e.value, false),
        })
        .collect();
    let defs = g
        .defs
        .iter()
        .map(|(r, d)| JsonDef {
            name: namer.rec(r),
            ty: d.ty.to_string(),
            binders: d.params.iter().map(|b| namer.var(&b.var)).collect(),
            body: namer.term(&d.body, false),
        })
        .collect();
    (assignments, defs)
}

/// Rebuilds `H := [x] v.` text from the JSON form, for re-parsing.
pub fn json_to_substitution_text(v: &serde_json::Value) -> Option<String> {
    let mut out = String::new();
    let lam = |binders: &[serde_json::Value]| -> Option<String> {
        binders.iter().map(|b| b.as_str().map(|s| format!("[{s}] "))).collect()
    };
    for a in v.get("assignments")?.as_array()? {
        let prefix = lam(a.get("pattern")?.as_array()?)?;
        let _ = writeln!(out, "{} := {prefix}{}.", a.get("metavar")?.as_str()?, a.get("value")?.as_str()?);
    }
    for d in v.get("defs")?.as_array()? {
        let prefix = lam(d.get("binders")?.as_array()?)?;
        let _ = writeln!(
            out,
            "{} : {} = {prefix}{}.",
            d.get("name")?.as_str()?,
            d.get("type")?.as_str()?,
            d.get("body")?.as_str()?
        );
    }
    Some(out)
}

/// Depth the tests pass to `--check-depth`.
pub const CHECK_DEPTH: usize = DEFAULT_DEPTH;
