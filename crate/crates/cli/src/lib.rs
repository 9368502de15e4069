//! Command-line frontend: parse, split, synthesize, score, select, emit.
//!
//! Exit codes: 0 success, 1 usage or unreadable input, 2 invalid model,
//! pins or candidate data, 3 empty design space, 4 invariant breach.
//! Errors are written to standard error as one JSON object per line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ColorChoice, Parser, Subcommand};
use ormspace::metrics::MetricVector;
use ormspace::synth::StreamHeader;
use ormspace::tradeoff::ClassSummary;
use ormspace::validator::{check_assertions, oracle_enumerate, oracle_metrics, OracleError};
use ormspace::{
    check_source, cluster, component_pins, compose, emit_sql, enumerate_with, metric_vector,
    pareto, radar, split, Diagnostic, EnumerateOptions, MappingCandidate, ObjectModel,
    ParetoReport, PinSet, Selection, SynthesisError, SynthesisResult,
};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "ormspace",
    version,
    about = "Explore the space of object-relational mappings of a class model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and check a model file.
    Validate { model: PathBuf },
    /// Enumerate every feasible mapping as a JSON-lines stream.
    Synthesize {
        model: PathBuf,
        #[arg(long)]
        pins: Option<PathBuf>,
        /// Synthesize each component separately; the stream gets one section per component.
        #[arg(long)]
        split: bool,
        /// Write the stream here instead of standard output.
        #[arg(long)]
        jsonl: Option<PathBuf>,
        #[arg(long)]
        parallel: bool,
    },
    /// Print the metric vector of every candidate in a stream.
    Metrics { candidates: PathBuf },
    /// Cluster a single-section stream and select its Pareto front.
    Pareto {
        candidates: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Split a model on its many-to-many bridges.
    Split { model: PathBuf },
    /// Print DDL for a candidate file or one candidate of a stream.
    EmitSql {
        candidate: PathBuf,
        /// Position in the stream, counting candidates only.
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Run the whole pipeline and write every artifact to a directory.
    Report {
        model: PathBuf,
        #[arg(long)]
        pins: Option<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        split: bool,
        /// Cross-check enumeration and metrics against the brute-force oracle.
        #[arg(long, hide = true)]
        oracle: bool,
    },
}

/// Everything that ends a run early.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Model(Vec<Diagnostic>),
    Input(String),
    Empty(String),
    Invariant(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Model(_) | Failure::Input(_) => 2,
            Failure::Empty(_) => 3,
            Failure::Invariant(_) => 4,
        }
    }

    fn report(&self) {
        let line = |code: &str, message: &str| {
            json!({"level": "error", "code": code, "message": message}).to_string()
        };
        let mut err = io::stderr().lock();
        let _ = match self {
            Failure::Model(diags) => diags
                .iter()
                .try_for_each(|d| writeln!(err, "{}", d.to_json_line())),
            Failure::Usage(m) => writeln!(err, "{}", line("usage", m)),
            Failure::Input(m) => writeln!(err, "{}", line("bad-input", m)),
            Failure::Empty(m) => writeln!(err, "{}", line("empty-space", m)),
            Failure::Invariant(m) => writeln!(err, "{}", line("invariant-breach", m)),
        };
    }
}

impl From<SynthesisError> for Failure {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::InvalidModel(d) => Failure::Model(d),
            SynthesisError::EmptySpace { .. } => Failure::Empty(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let color = if std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty()) {
        ColorChoice::Never
    } else {
        ColorChoice::Auto
    };
    let cli = match <Cli as clap::CommandFactory>::command()
        .color(color)
        .try_get_matches_from(args)
        .and_then(|m| <Cli as clap::FromArgMatches>::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate { model } => cmd_validate(&model),
        Command::Synthesize {
            model,
            pins,
            split,
            jsonl,
            parallel,
        } => cmd_synthesize(&model, pins.as_deref(), split, jsonl.as_deref(), parallel),
        Command::Metrics { candidates } => cmd_metrics(&candidates),
        Command::Pareto {
            candidates,
            svg,
            json,
        } => cmd_pareto(&candidates, svg.as_deref(), json.as_deref()),
        Command::Split { model } => cmd_split(&model),
        Command::EmitSql { candidate, index } => cmd_emit_sql(&candidate, index),
        Command::Report {
            model,
            pins,
            out,
            parallel,
            split,
            oracle,
        } => {
            let opts = ReportOptions {
                pins,
                out,
                parallel,
                split,
                oracle,
            };
            cmd_report(&model, &opts)
        }
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            f.report();
            f.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn stdout(text: &str) -> Outcome {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Usage(format!("cannot write to standard output: {e}")))
}

pub fn load_model(path: &Path) -> Result<ObjectModel, Failure> {
    check_source(&read(path)?).map_err(Failure::Model)
}

pub fn load_pins(path: Option<&Path>) -> Result<PinSet, Failure> {
    match path {
        None => Ok(PinSet::default()),
        Some(p) => PinSet::from_json(&read(p)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_validate(path: &Path) -> Outcome {
    let m = load_model(path)?;
    stdout(&format!(
        "{}\n",
        json!({
            "model": m.name,
            "valid": true,
            "classes": m.classes.len(),
            "associations": m.associations.len(),
        })
    ))
}

/// One independently synthesized part of a model.
pub struct Section {
    pub model: ObjectModel,
    pub result: SynthesisResult,
}

/// Synthesizes the whole model, or each of its components.
pub fn synthesize_sections(
    model: &ObjectModel,
    pins: &PinSet,
    by_component: bool,
    parallel: bool,
) -> Result<Vec<Section>, Failure> {
    let opts = EnumerateOptions { parallel };
    if !by_component {
        let result = enumerate_with(model, pins, opts)?;
        return Ok(vec![Section {
            model: model.clone(),
            result,
        }]);
    }
    let parts = split(model);
    let pins = component_pins(model, &parts, pins)?;
    let results: Vec<Result<SynthesisResult, SynthesisError>> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = parts
                .components
                .iter()
                .zip(&pins)
                .map(|(c, p)| s.spawn(move || enumerate_with(c, p, opts)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("synthesis thread"))
                .collect()
        })
    } else {
        parts
            .components
            .iter()
            .zip(&pins)
            .map(|(c, p)| enumerate_with(c, p, opts))
            .collect()
    };
    parts
        .components
        .into_iter()
        .zip(results)
        .map(|(model, r)| Ok(Section { model, result: r? }))
        .collect()
}

fn stream_text(sections: &[Section]) -> String {
    let mut out = String::new();
    for s in sections {
        let header = StreamHeader {
            model: s.model.clone(),
            total_assignments: s.result.total_assignments,
            pruned: s.result.pruned,
        };
        out.push_str(&serde_json::to_string(&header).expect("header serializes"));
        out.push('\n');
        for c in &s.result.candidates {
            out.push_str(&c.to_json());
            out.push('\n');
        }
    }
    out
}

fn cmd_synthesize(
    path: &Path,
    pins: Option<&Path>,
    by_component: bool,
    jsonl: Option<&Path>,
    parallel: bool,
) -> Outcome {
    let model = load_model(path)?;
    let pins = load_pins(pins)?;
    let start = Instant::now();
    let sections = synthesize_sections(&model, &pins, by_component, parallel)?;
    let text = stream_text(&sections);
    match jsonl {
        Some(p) => write(p, &text)?,
        None => stdout(&text)?,
    }
    let summary: Vec<_> = sections
        .iter()
        .map(|s| {
            json!({
                "model": s.model.name,
                "candidates": s.result.candidates.len(),
                "totalAssignments": s.result.total_assignments,
                "pruned": s.result.pruned,
            })
        })
        .collect();
    eprintln!(
        "{}",
        json!({"level": "info", "sections": summary, "elapsedMs": start.elapsed().as_millis() as u64})
    );
    Ok(())
}

/// A parsed candidate stream section.
pub struct StreamSection {
    pub header: StreamHeader,
    pub candidates: Vec<MappingCandidate>,
}

pub fn parse_stream(text: &str) -> Result<Vec<StreamSection>, Failure> {
    let mut sections: Vec<StreamSection> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |e: serde_json::Error| Failure::Input(format!("line {}: {e}", n + 1));
        let value: serde_json::Value = serde_json::from_str(line).map_err(bad)?;
        if value.get("totalAssignments").is_some() {
            sections.push(StreamSection {
                header: serde_json::from_value(value).map_err(bad)?,
                candidates: Vec::new(),
            });
        } else {
            let cand: MappingCandidate = serde_json::from_value(value).map_err(bad)?;
            match sections.last_mut() {
                Some(s) => s.candidates.push(cand),
                None => {
                    return Err(Failure::Input(format!(
                        "line {}: candidate before stream header",
                        n + 1
                    )))
                }
            }
        }
    }
    if sections.is_empty() {
        return Err(Failure::Input("empty candidate stream".to_string()));
    }
    Ok(sections)
}

fn cmd_metrics(path: &Path) -> Outcome {
    let sections = parse_stream(&read(path)?)?;
    let mut out = String::new();
    for s in &sections {
        for (i, c) in s.candidates.iter().enumerate() {
            let v = metric_vector(&s.header.model, c);
            out.push_str(
                &json!({"model": s.header.model.name, "index": i, "metrics": v}).to_string(),
            );
            out.push('\n');
        }
    }
    stdout(&out)
}

fn cmd_pareto(path: &Path, svg: Option<&Path>, json_out: Option<&Path>) -> Outcome {
    let sections = parse_stream(&read(path)?)?;
    if sections.len() != 1 {
        return Err(Failure::Usage(format!(
            "stream holds {} sections; run pareto on one component at a time",
            sections.len()
        )));
    }
    let s = &sections[0];
    if s.candidates.is_empty() {
        return Err(Failure::Empty("stream holds no candidates".to_string()));
    }
    let report = pareto(cluster(&s.header.model, &s.candidates));
    if let Some(p) = svg {
        write(p, &radar(&report))?;
    }
    let text = format!("{}\n", report.to_json_pretty());
    match json_out {
        Some(p) => write(p, &text),
        None => stdout(&text),
    }
}

fn cmd_split(path: &Path) -> Outcome {
    let model = load_model(path)?;
    let parts = split(&model);
    stdout(&pretty(&json!({
        "model": model.name,
        "components": parts.components,
        "removedBridges": parts.removed_bridges,
        "componentOf": parts.component_of,
    })))
}

fn cmd_emit_sql(path: &Path, index: usize) -> Outcome {
    let text = read(path)?;
    let cand = match serde_json::from_str::<MappingCandidate>(&text) {
        Ok(c) => c,
        Err(_) => {
            let all: Vec<MappingCandidate> = parse_stream(&text)?
                .into_iter()
                .flat_map(|s| s.candidates)
                .collect();
            let n = all.len();
            all.into_iter().nth(index).ok_or_else(|| {
                Failure::Usage(format!(
                    "index {index} out of range, stream holds {n} candidates"
                ))
            })?
        }
    };
    stdout(&emit_sql(&cand))
}

pub struct ReportOptions {
    pub pins: Option<PathBuf>,
    pub out: PathBuf,
    pub parallel: bool,
    pub split: bool,
    pub oracle: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SectionSummary {
    model: String,
    total_assignments: u64,
    pruned: u64,
    candidates: usize,
    equivalence_classes: usize,
    front: Vec<usize>,
    directory: String,
}

/// Cap on the number of front combinations scored when composing components.
pub const COMPOSE_LIMIT: usize = 100_000;

/// Every candidate must pass the structural assertions.
fn check_section(section: &Section) -> Outcome {
    let m = &section.model;
    for (i, c) in section.result.candidates.iter().enumerate() {
        let r = check_assertions(c, m);
        if !r.pass {
            let (k, v) = r
                .violations()
                .next()
                .expect("failing report has a violation");
            return Err(Failure::Invariant(format!(
                "{}: candidate {i} violates {k}: {}",
                m.name, v.message
            )));
        }
    }
    Ok(())
}

fn oracle_check(section: &Section, pins: &PinSet) -> Outcome {
    let m = &section.model;
    let reference = match oracle_enumerate(m, pins) {
        Ok(r) => r,
        Err(OracleError::TooLarge(n)) => {
            return Err(Failure::Usage(format!(
                "{}: the oracle handles at most {} classes, got {n}; try --split",
                m.name,
                ormspace::validator::ORACLE_MAX_CLASSES
            )))
        }
        Err(OracleError::Synthesis(e)) => {
            return Err(Failure::Invariant(format!(
                "{}: oracle failed where synthesis succeeded: {e}",
                m.name
            )))
        }
    };
    if reference.candidates != section.result.candidates {
        return Err(Failure::Invariant(format!(
            "{}: oracle enumerates {} candidates, synthesizer {} (or order differs)",
            m.name,
            reference.candidates.len(),
            section.result.candidates.len()
        )));
    }
    for (i, c) in section.result.candidates.iter().enumerate() {
        if oracle_metrics(m, c) != metric_vector(m, c) {
            return Err(Failure::Invariant(format!(
                "{}: metrics of candidate {i} disagree with the oracle",
                m.name
            )));
        }
    }
    Ok(())
}

fn write_section(
    out: &Path,
    subdir: &str,
    section: &Section,
) -> Result<(ParetoReport, SectionSummary), Failure> {
    let dir = out.join(subdir);
    write(
        &dir.join("candidates.jsonl"),
        &stream_text(std::slice::from_ref(section)),
    )?;
    let report = pareto(cluster(&section.model, &section.result.candidates));
    let json = report.to_json_value();
    let classes: &Vec<ClassSummary> = &json.classes;
    write(&dir.join("classes.json"), &pretty(classes))?;
    write(
        &dir.join("pareto.json"),
        &format!("{}\n", report.to_json_pretty()),
    )?;
    write(&dir.join("radar.svg"), &radar(&report))?;
    for &i in &report.front {
        write(
            &dir.join("sql").join(format!("class_{i}.sql")),
            &emit_sql(&report.classes[i].representative),
        )?;
    }
    let summary = SectionSummary {
        model: section.model.name.clone(),
        total_assignments: section.result.total_assignments,
        pruned: section.result.pruned,
        candidates: section.result.candidates.len(),
        equivalence_classes: report.classes.len(),
        front: report.front.clone(),
        directory: if subdir.is_empty() {
            ".".to_string()
        } else {
            subdir.to_string()
        },
    };
    Ok((report, summary))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Composition {
    /// One equivalence-class index per component.
    picks: Vec<usize>,
    vector: MetricVector,
}

/// Scores every combination of per-component front representatives and
/// keeps the combinations that are Pareto-optimal for the whole model.
fn compose_fronts(
    model: &ObjectModel,
    sections: &[Section],
    reports: &[ParetoReport],
) -> Result<serde_json::Value, Failure> {
    let parts = split(model);
    let combos: usize = reports.iter().map(|r| r.front.len()).product();
    if combos > COMPOSE_LIMIT {
        return Ok(json!({
            "skipped": format!("{combos} front combinations exceed the limit of {COMPOSE_LIMIT}"),
        }));
    }
    let vectors: Vec<Vec<MetricVector>> = sections
        .iter()
        .zip(reports)
        .map(|(s, r)| {
            r.front
                .iter()
                .map(|&i| metric_vector(&s.model, &r.classes[i].representative))
                .collect()
        })
        .collect();
    let mut all: Vec<Composition> = Vec::with_capacity(combos);
    let mut digits = vec![0usize; reports.len()];
    for _ in 0..combos {
        let selections: Vec<Selection<'_>> = digits
            .iter()
            .enumerate()
            .map(|(k, &d)| Selection {
                candidate: &reports[k].classes[reports[k].front[d]].representative,
                vector: &vectors[k][d],
            })
            .collect();
        let vector =
            compose(model, &parts, &selections).map_err(|e| Failure::Invariant(e.to_string()))?;
        all.push(Composition {
            picks: digits
                .iter()
                .enumerate()
                .map(|(k, &d)| reports[k].front[d])
                .collect(),
            vector,
        });
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] < reports[k].front.len() {
                break;
            }
            digits[k] = 0;
        }
    }
    let aggs: Vec<[u64; 6]> = all.iter().map(|c| c.vector.aggregates()).collect();
    let front: Vec<usize> = (0..aggs.len())
        .filter(|&i| {
            !aggs
                .iter()
                .any(|o| ormspace::tradeoff::dominates(o, &aggs[i]))
        })
        .collect();
    Ok(json!({
        "components": sections.iter().map(|s| s.model.name.clone()).collect::<Vec<_>>(),
        "removedBridges": parts.removed_bridges,
        "compositions": all,
        "front": front,
    }))
}

fn cmd_report(path: &Path, opts: &ReportOptions) -> Outcome {
    let model = load_model(path)?;
    let pins = load_pins(opts.pins.as_deref())?;
    let start = Instant::now();
    let sections = synthesize_sections(&model, &pins, opts.split, opts.parallel)?;

    let section_pins = if opts.split {
        component_pins(&model, &split(&model), &pins)?
    } else {
        vec![pins.clone()]
    };
    for (s, p) in sections.iter().zip(&section_pins) {
        check_section(s)?;
        if opts.oracle {
            oracle_check(s, p)?;
        }
    }

    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    for s in &sections {
        let subdir = if opts.split {
            s.model.name.as_str()
        } else {
            ""
        };
        let (report, summary) = write_section(&opts.out, subdir, s)?;
        reports.push(report);
        summaries.push(summary);
    }

    let mut summary = json!({
        "model": model.name,
        "split": opts.split,
        "sections": summaries,
    });
    if opts.split {
        let composed = compose_fronts(&model, &sections, &reports)?;
        write(&opts.out.join("composed.json"), &pretty(&composed))?;
        summary["removedBridges"] = composed["removedBridges"].clone();
    }
    let text = pretty(&summary);
    write(&opts.out.join("summary.json"), &text)?;
    stdout(&text)?;
    eprintln!(
        "{}",
        json!({"level": "info", "elapsedMs": start.elapsed().as_millis() as u64})
    );
    Ok(())
}
