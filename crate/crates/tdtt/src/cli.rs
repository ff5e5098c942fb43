//! The command-line front end.
//!
//! Subcommands:
//!
//! * `run SPEC TREE`: every maximal run with its configurations, output and
//!   origin mapping; `--dot` (or `--format dot`) renders the origin graphs.
//! * `measure SPEC1 SPEC2 TREE`: origin gap and delay between the runs of
//!   two machines on one input.
//! * `delay-trees T1 T2`: difference trees and delay of two partial trees.
//! * `decide inclusion|equivalence|uniformize`: the decision procedures.
//! * `oracle inclusion|equivalence`: the bounded brute-force check.
//!
//! A `SPEC` is a path to a `.tdtt` file or the name of a bundled fixture.
//! Exit codes: 0 for yes or ok, 1 for no or a counterexample, 2 for
//! undetermined, exceeded budgets and errors. Decision reports in
//! `--format structured` are the `key: value` documents of
//! [`Report`](crate::decision::Report); wall time is only included with
//! `--timing`, so repeated runs print identical text.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::decision::{
    self, equivalence, inclusion, uniformize, verify_uniformizer, Caps, Decision, DecisionError, Report,
    UniformizerCheck, Verdict,
};
use crate::fixtures;
use crate::measures::{
    k_origin_inclusion_bounded, k_origin_member, origin_gap, run_delay, BoundedInclusion, InputBound, MeasureError,
};
use crate::textio::{export_dot, DotError};
use crate::transducer::{enumerate_runs, run_origin, Budget, Tdtt, TransducerError};
use crate::trees::{difference_trees, tree_delay, Tree, TreeError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}")]
    WriteFile { path: PathBuf, source: std::io::Error },
    #[error("bad {what}")]
    Tree { what: String, source: TreeError },
    #[error(transparent)]
    Transducer(#[from] TransducerError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error(transparent)]
    Dot(#[from] DotError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cross-check failed: {0}")]
    CrossCheck(String),
    #[error("the dot format is not available for `{0}`")]
    NoDot(&'static str),
}

#[derive(Debug, Parser)]
#[command(name = "tdtt", version, about = "Top-down tree transducers with origin semantics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Accepted and ignored: every algorithm is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
    Dot,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the runs of a transducer on an input tree.
    Run {
        spec: String,
        tree: String,
        /// Print the origin graph of each complete run in DOT.
        #[arg(long)]
        dot: bool,
    },
    /// Origin gap and delay between the runs of two transducers on one input.
    Measure { spec1: String, spec2: String, tree: String },
    /// Difference trees and delay of two partial trees (`_` is a gap).
    DelayTrees { t1: String, t2: String },
    /// Decide k-origin inclusion, equivalence or uniformization.
    Decide {
        #[command(subcommand)]
        problem: Problem,
    },
    /// Check k-origin inclusion or equivalence on bounded inputs.
    Oracle {
        #[command(subcommand)]
        problem: OracleProblem,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DecideOpts {
    /// Origin distance bound.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Types or game positions to explore before answering undetermined.
    #[arg(long, env = "TDTT_MAX_STATES", default_value_t = Caps::default().max_states)]
    pub max_states: usize,
    /// Re-check the verdict independently: the bounded oracle for
    /// inclusion and equivalence, strategy exhaustion and bounded
    /// verification for uniformization.
    #[arg(long)]
    pub cross_check: bool,
    /// Input height for the cross-check.
    #[arg(long, default_value_t = 3)]
    pub height: usize,
    /// Add the wall time to the report.
    #[arg(long)]
    pub timing: bool,
}

impl DecideOpts {
    fn caps(&self) -> Caps {
        Caps { max_states: self.max_states, ..Caps::default() }
    }
}

#[derive(Debug, Subcommand)]
pub enum Problem {
    /// Is every origin triple of SPEC1 k-close to one of SPEC2?
    Inclusion {
        spec1: String,
        spec2: String,
        #[command(flatten)]
        opts: DecideOpts,
    },
    /// Inclusion in both directions.
    Equivalence {
        spec1: String,
        spec2: String,
        #[command(flatten)]
        opts: DecideOpts,
    },
    /// Is there a deterministic k-origin uniformizer of SPEC?
    Uniformize {
        spec: String,
        #[command(flatten)]
        opts: DecideOpts,
        /// Write the extracted machine to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct OracleOpts {
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Largest input height checked.
    #[arg(long, default_value_t = 3)]
    pub height: usize,
    /// Largest number of inputs checked.
    #[arg(long, default_value_t = InputBound::default().max_trees)]
    pub max_trees: usize,
}

#[derive(Debug, Subcommand)]
pub enum OracleProblem {
    Inclusion {
        spec1: String,
        spec2: String,
        #[command(flatten)]
        opts: OracleOpts,
    },
    Equivalence {
        spec1: String,
        spec2: String,
        #[command(flatten)]
        opts: OracleOpts,
    },
}

/// Reads a transducer from a file, or from the bundled fixtures when no
/// such file exists.
pub fn load_spec(spec: &str) -> Result<Tdtt, CliError> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        return Ok(Tdtt::parse(&text)?);
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or(spec);
    fixtures::load(name).map_err(|_| CliError::Read {
        path: path.into(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or bundled fixture"),
    })
}

fn parse_tree(what: &str, text: &str) -> Result<Tree, CliError> {
    Tree::parse(text).map_err(|source| CliError::Tree { what: what.to_string(), source })
}

/// Runs one command, writing its output to `out`. Returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let format = cli.global.format;
    match &cli.command {
        Command::Run { spec, tree, dot } => cmd_run(spec, tree, if *dot { Format::Dot } else { format }, out),
        Command::Measure { spec1, spec2, tree } => cmd_measure(spec1, spec2, tree, format, out),
        Command::DelayTrees { t1, t2 } => cmd_delay_trees(t1, t2, format, out),
        Command::Decide { problem } => cmd_decide(problem, format, out),
        Command::Oracle { problem } => cmd_oracle(problem, format, out),
    }
}

fn cmd_run(spec: &str, tree: &str, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    let t = load_spec(spec)?;
    let input = parse_tree("input tree", tree)?;
    let runs = enumerate_runs(&t, &input, Budget::default())?;
    match format {
        Format::Dot => {
            for (run, s) in &runs.complete {
                write!(out, "{}", export_dot(&input, s, &run_origin(run).0)?)?;
            }
        }
        Format::Structured => {
            let mut r = Report::default();
            r.push("runs", runs.complete.len().to_string());
            r.push("stuck", runs.incomplete.len().to_string());
            for (i, (run, s)) in runs.complete.iter().enumerate() {
                r.push(&format!("run.{i}.output"), s.to_string());
                r.push(&format!("run.{i}.origin"), run_origin(run).to_string());
                for (j, c) in run.configurations.iter().enumerate() {
                    r.push(&format!("run.{i}.c{j}"), c.to_string());
                }
            }
            write!(out, "{r}")?;
        }
        Format::Human => {
            writeln!(out, "{} complete run(s) of {} on {input}", runs.complete.len(), t.name())?;
            for (i, (run, s)) in runs.complete.iter().enumerate() {
                writeln!(out, "run {i}:")?;
                for (j, c) in run.configurations.iter().enumerate() {
                    writeln!(out, "  c{j} = {c}")?;
                }
                writeln!(out, "  output {s}")?;
                writeln!(out, "  origin {}", run_origin(run))?;
            }
            for stuck in &runs.incomplete {
                writeln!(out, "stuck run ending in {}", stuck.run.last())?;
            }
        }
    }
    Ok(0)
}

fn cmd_measure(spec1: &str, spec2: &str, tree: &str, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    if format == Format::Dot {
        return Err(CliError::NoDot("measure"));
    }
    let (t1, t2) = (load_spec(spec1)?, load_spec(spec2)?);
    let input = parse_tree("input tree", tree)?;
    let runs1 = enumerate_runs(&t1, &input, Budget::default())?.complete;
    let runs2 = enumerate_runs(&t2, &input, Budget::default())?.complete;
    let mut r = Report::default();
    // Per run of the first machine, the closest run of the second with the
    // same output; the overall figures are the worst cases over runs that
    // have such a partner.
    let (mut gap, mut delay, mut unmatched) = (0, 0, 0);
    for (i, (r1, s1)) in runs1.iter().enumerate() {
        let o1 = run_origin(r1);
        let mut best: Option<(usize, usize)> = None;
        for (j, (r2, s2)) in runs2.iter().enumerate() {
            if s1 != s2 {
                continue;
            }
            let g = origin_gap(&input, &o1, &run_origin(r2))?;
            let d = run_delay(r1, r2)?;
            r.push(&format!("pair.{i}.{j}"), format!("output {s1} gap {g} delay {d}"));
            best = Some(best.map_or((g, d), |(bg, bd)| (bg.min(g), bd.min(d))));
        }
        match best {
            Some((g, d)) => (gap, delay) = (gap.max(g), delay.max(d)),
            None => unmatched += 1,
        }
    }
    let mut head = Report::default();
    head.push("runs1", runs1.len().to_string());
    head.push("runs2", runs2.len().to_string());
    head.push("unmatched", unmatched.to_string());
    head.push("gap", gap.to_string());
    head.push("delay", delay.to_string());
    head.fields.extend(r.fields);
    match format {
        Format::Structured => write!(out, "{head}")?,
        _ => {
            writeln!(out, "{} run(s) of {}, {} run(s) of {} on {input}", runs1.len(), t1.name(), runs2.len(), t2.name())?;
            writeln!(out, "{unmatched} run(s) of {} have no run of {} with the same output", t1.name(), t2.name())?;
            writeln!(out, "origin gap: {gap}")?;
            writeln!(out, "delay: {delay}")?;
            for (k, v) in head.fields.iter().skip(5) {
                writeln!(out, "  {k}: {v}")?;
            }
        }
    }
    Ok(0)
}

fn cmd_delay_trees(t1: &str, t2: &str, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    if format == Format::Dot {
        return Err(CliError::NoDot("delay-trees"));
    }
    let (a, b) = (parse_tree("first tree", t1)?, parse_tree("second tree", t2)?);
    let diff: Vec<String> = difference_trees(&a, &b).iter().map(Tree::to_string).collect();
    let delay = tree_delay(&a, &b);
    match format {
        Format::Structured => {
            let mut r = Report::default();
            r.push("difference", format!("{{{}}}", diff.join(", ")));
            r.push("delay", delay.to_string());
            write!(out, "{r}")?;
        }
        _ => {
            writeln!(out, "difference trees: {{{}}}", diff.join(", "))?;
            writeln!(out, "delay: {delay}")?;
        }
    }
    Ok(0)
}

fn cmd_decide(problem: &Problem, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    if format == Format::Dot {
        return Err(CliError::NoDot("decide"));
    }
    let start = Instant::now();
    let (decision, opts, note) = match problem {
        Problem::Inclusion { spec1, spec2, opts } | Problem::Equivalence { spec1, spec2, opts } => {
            let (t1, t2) = (load_spec(spec1)?, load_spec(spec2)?);
            let both = matches!(problem, Problem::Equivalence { .. });
            let d = if both { equivalence(&t1, &t2, opts.k, opts.caps())? } else { inclusion(&t1, &t2, opts.k, opts.caps())? };
            let note = if opts.cross_check { Some(cross_check_inclusion(&d, &t1, &t2, both, opts)?) } else { None };
            (d, opts, note)
        }
        Problem::Uniformize { spec, opts, out: path } => {
            let t = load_spec(spec)?;
            let d = uniformize(&t, opts.k, opts.caps())?;
            let note = if opts.cross_check { Some(cross_check_uniformize(&d, &t, opts)?) } else { None };
            if let (Some(path), Some(m)) = (path, &d.machine) {
                std::fs::write(path, crate::textio::serialize_transducer(&m.spec))
                    .map_err(|source| CliError::WriteFile { path: path.clone(), source })?;
            }
            (d, opts, note)
        }
    };
    let mut report = decision.report();
    if let Some(note) = note {
        report.push("cross_check", note);
    }
    if opts.timing {
        report.push("stats.wall_ms", start.elapsed().as_millis().to_string());
    }
    match format {
        Format::Structured => write!(out, "{report}")?,
        _ => write_human(&decision, &report, out)?,
    }
    Ok(decision.verdict.exit_code())
}

fn write_human(d: &Decision, report: &Report, out: &mut dyn Write) -> Result<(), CliError> {
    let answer = match &d.verdict {
        Verdict::Yes => "yes".to_string(),
        Verdict::No(_) => "no".to_string(),
        Verdict::Undetermined(why) => format!("undetermined ({why})"),
    };
    writeln!(out, "{} at k = {}: {answer}", d.kind, d.k)?;
    for (key, value) in &report.fields {
        if let Some(field) = key.strip_prefix("witness.") {
            writeln!(out, "  {field}: {value}")?;
        }
    }
    if let Some(check) = report.get("cross_check") {
        writeln!(out, "cross-check: {check}")?;
    }
    writeln!(out, "explored {} states, {} obligations, {} restarts", d.stats.states, d.stats.obligations, d.stats.restarts)?;
    if let Some(ms) = report.get("stats.wall_ms") {
        writeln!(out, "wall time: {ms} ms")?;
    }
    if let Some(text) = report.machine_text() {
        writeln!(out, "extracted machine:")?;
        write!(out, "{text}")?;
    }
    Ok(())
}

fn cross_check_inclusion(d: &Decision, t1: &Tdtt, t2: &Tdtt, both: bool, opts: &DecideOpts) -> Result<String, CliError> {
    let bound = InputBound::height(opts.height);
    match &d.verdict {
        Verdict::Yes => {
            let mut pairs = vec![(t1, t2)];
            if both {
                pairs.push((t2, t1));
            }
            for (a, b) in pairs {
                if let BoundedInclusion::Counterexample(x) = k_origin_inclusion_bounded(a, b, opts.k, bound)? {
                    return Err(CliError::CrossCheck(format!("the oracle refutes {} ⊆ {} with {x}", a.name(), b.name())));
                }
            }
            Ok(format!("oracle agrees up to height {}", opts.height))
        }
        Verdict::No(w) => {
            let x = w.triple.as_ref().ok_or_else(|| CliError::CrossCheck("witness has no triple".into()))?;
            let (from, to) = if w.direction.starts_with(t2.name()) && both { (t2, t1) } else { (t1, t2) };
            let produced = crate::transducer::relation_with_origins(from, &x.input, Budget::default())?
                .contains(&(x.output.clone(), x.origin.clone()));
            if !produced || k_origin_member(x, to, opts.k)?.member {
                return Err(CliError::CrossCheck(format!("the oracle does not confirm {x}")));
            }
            Ok("oracle confirms the witness".to_string())
        }
        Verdict::Undetermined(_) => Ok("skipped".to_string()),
    }
}

/// Inputs checked when verifying an extracted machine: enough for every
/// input of height 4 over the bundled alphabets.
const VERIFY_MAX_TREES: usize = 100_000;

fn cross_check_uniformize(d: &Decision, t: &Tdtt, opts: &DecideOpts) -> Result<String, CliError> {
    let exhausted = decision::uniformize::uniformize_by_exhaustion(t, opts.k, opts.caps(), 50_000_000)?;
    match (&d.verdict, exhausted) {
        (Verdict::Undetermined(_), _) => Ok("skipped".to_string()),
        (_, None) => Err(CliError::CrossCheck("strategy search exceeded its budget".into())),
        (Verdict::Yes, Some(true)) => {
            let u = d.machine.as_ref().expect("a positive verdict carries a machine");
            let bound = InputBound { height: opts.height, max_trees: VERIFY_MAX_TREES };
            match verify_uniformizer(u, t, opts.k, bound)? {
                UniformizerCheck::Ok { inputs_checked } => Ok(format!(
                    "strategy search agrees; machine verified on {inputs_checked} inputs up to height {}",
                    opts.height
                )),
                UniformizerCheck::Counterexample { input, reason } => {
                    Err(CliError::CrossCheck(format!("extracted machine fails on {input}: {reason}")))
                }
            }
        }
        (Verdict::No(_), Some(false)) => Ok("strategy search finds no winning strategy".to_string()),
        (_, Some(w)) => Err(CliError::CrossCheck(format!("strategy search says winning = {w}"))),
    }
}

fn cmd_oracle(problem: &OracleProblem, format: Format, out: &mut dyn Write) -> Result<i32, CliError> {
    if format == Format::Dot {
        return Err(CliError::NoDot("oracle"));
    }
    let (spec1, spec2, opts, both) = match problem {
        OracleProblem::Inclusion { spec1, spec2, opts } => (spec1, spec2, opts, false),
        OracleProblem::Equivalence { spec1, spec2, opts } => (spec1, spec2, opts, true),
    };
    let (t1, t2) = (load_spec(spec1)?, load_spec(spec2)?);
    let bound = InputBound { height: opts.height, max_trees: opts.max_trees };
    let mut pairs = vec![(&t1, &t2)];
    if both {
        pairs.push((&t2, &t1));
    }
    let mut r = Report::default();
    r.push("kind", if both { "equivalence" } else { "inclusion" });
    r.push("k", opts.k.to_string());
    r.push("height", opts.height.to_string());
    let mut code = 0;
    let mut checked = 0;
    for (a, b) in pairs {
        match k_origin_inclusion_bounded(a, b, opts.k, bound)? {
            BoundedInclusion::Ok { inputs_checked } => checked += inputs_checked,
            BoundedInclusion::Counterexample(x) => {
                r.push("verdict", "counterexample");
                r.push("witness.direction", format!("{} ⊆ {}", a.name(), b.name()));
                r.push("witness.input", x.input.to_string());
                r.push("witness.output", x.output.to_string());
                r.push("witness.origin", x.origin.to_string());
                code = 1;
                break;
            }
        }
    }
    if code == 0 {
        r.push("verdict", "ok");
        r.push("inputs_checked", checked.to_string());
    }
    match format {
        Format::Structured => write!(out, "{r}")?,
        _ => {
            for (k, v) in &r.fields {
                writeln!(out, "{k}: {v}")?;
            }
        }
    }
    Ok(code)
}
