//! Decision procedures: `k`-origin inclusion, equivalence and
//! uniformization by a deterministic transducer.
//!
//! All three work on traces (see [`trace`]) summarised bottom-up by types
//! (see [`engine`]). Inclusion searches the traces of the left machine's
//! runs, smallest height first, for one the right machine's automaton
//! rejects. Uniformization solves a safety game in which In builds the
//! input top-down and Out answers with output pieces.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::measures::{MeasureError, TripleWithOrigin};
use crate::transducer::{OriginMapping, Tdtt, TransducerError};
use crate::trees::{Address, Tree};

pub mod engine;
pub mod inclusion;
pub mod trace;
pub mod uniformize;

pub use inclusion::{equivalence, inclusion};
pub use trace::{accepts_triple, decode_trace, encode_triple, trace_automaton, TraceAutomaton, TraceTree};
pub use uniformize::{uniformize, verify_uniformizer, UniformizerCheck};

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error("invalid triple {0}")]
    InvalidTriple(String),
    #[error("origin {origin} of output node {node} is not below input node {above}")]
    NonHierarchical { node: Address, origin: Address, above: Address },
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("malformed report: {0}")]
    Report(String),
    #[error(transparent)]
    Transducer(#[from] TransducerError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Resource limits of the decision procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Types (or game positions) explored before giving up.
    pub max_states: usize,
    /// Out threads per node considered for copying machines.
    pub max_threads: usize,
    /// Output pieces offered to Out per input symbol in the game.
    pub max_pieces: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_states: 2_000_000, max_threads: 2, max_pieces: 4096 }
    }
}

/// The decision problem solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Inclusion,
    Equivalence,
    Uniformize,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Inclusion => "inclusion",
            Kind::Equivalence => "equivalence",
            Kind::Uniformize => "uniformize",
        })
    }
}

/// A replayable counterexample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    /// Which check failed, e.g. `T1 ⊆ T2`.
    pub direction: String,
    /// The triple that violates the checked relation.
    pub triple: Option<TripleWithOrigin>,
    pub trace: Option<TraceTree>,
    /// A textual account of the witness, e.g. In's winning moves in a game.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No(Box<Witness>),
    Undetermined(String),
}

impl Verdict {
    /// Process exit code: 0 for yes, 1 for no, 2 for undetermined.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Yes => 0,
            Verdict::No(_) => 1,
            Verdict::Undetermined(_) => 2,
        }
    }
}

/// Exploration statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    /// Types or game positions built.
    pub states: usize,
    /// Size of the final obligation universe.
    pub obligations: usize,
    /// Restarts caused by a growing obligation universe.
    pub restarts: usize,
}

/// The outcome of a decision procedure.
#[derive(Debug, Clone)]
pub struct Decision {
    pub kind: Kind,
    pub k: usize,
    pub verdict: Verdict,
    pub stats: Stats,
    /// The extracted uniformizer, on a positive uniformization verdict.
    pub machine: Option<Tdtt>,
}

impl Decision {
    /// The structured report of the decision.
    pub fn report(&self) -> Report {
        let mut r = Report::default();
        r.push("kind", self.kind.to_string());
        r.push("k", self.k.to_string());
        match &self.verdict {
            Verdict::Yes => r.push("verdict", "yes"),
            Verdict::No(w) => {
                r.push("verdict", "no");
                r.push("witness.direction", w.direction.clone());
                if let Some(x) = &w.triple {
                    r.push("witness.input", x.input.to_string());
                    r.push("witness.output", x.output.to_string());
                    r.push("witness.origin", x.origin.to_string());
                }
                if let Some(tr) = &w.trace {
                    r.push("witness.trace", tr.to_string());
                }
                if let Some(note) = &w.note {
                    r.push("witness.note", note.clone());
                }
            }
            Verdict::Undetermined(why) => {
                r.push("verdict", "undetermined");
                r.push("reason", why.clone());
            }
        }
        r.push("stats.states", self.stats.states.to_string());
        r.push("stats.obligations", self.stats.obligations.to_string());
        r.push("stats.restarts", self.stats.restarts.to_string());
        if let Some(m) = &self.machine {
            for line in crate::textio::serialize_transducer(&m.spec).lines() {
                r.push("machine", line);
            }
        }
        r
    }
}

/// A structured report: ordered `key: value` lines with single-line values.
///
/// Keys: `kind`, `k`, `verdict` (`yes`, `no` or `undetermined`), on `no` the
/// witness fields `witness.direction`, `witness.input`, `witness.output`,
/// `witness.origin`, `witness.trace` and `witness.note` when present, on `undetermined` a
/// `reason`, then `stats.states`, `stats.obligations`, `stats.restarts`,
/// optionally `stats.wall_ms`, and one `machine` line per line of an
/// extracted machine.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub fields: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        let value: String = value.into();
        self.fields.push((key.to_string(), value.replace('\n', " ")));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// The witness triple, if the report carries one.
    pub fn witness(&self) -> Result<Option<TripleWithOrigin>, DecisionError> {
        let (Some(t), Some(s), Some(o)) = (self.get("witness.input"), self.get("witness.output"), self.get("witness.origin"))
        else {
            return Ok(None);
        };
        let bad = |e: &dyn fmt::Display| DecisionError::Report(e.to_string());
        let input = Tree::parse(t).map_err(|e| bad(&e))?;
        let output = Tree::parse(s).map_err(|e| bad(&e))?;
        let origin = parse_origin(o)?;
        Ok(Some(TripleWithOrigin::new(input, output, origin)?))
    }

    /// The extracted machine's text, if any.
    pub fn machine_text(&self) -> Option<String> {
        let lines: Vec<&str> = self.fields.iter().filter(|(k, _)| k == "machine").map(|(_, v)| v.as_str()).collect();
        (!lines.is_empty()).then(|| lines.join("\n") + "\n")
    }
}

/// Parses an origin mapping written as `{ε↦ε, 1↦1.2}`.
pub fn parse_origin(text: &str) -> Result<OriginMapping, DecisionError> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| DecisionError::Report(format!("origin `{text}` is not braced")))?;
    let mut map = std::collections::BTreeMap::new();
    for pair in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (u, v) = pair
            .split_once('↦')
            .ok_or_else(|| DecisionError::Report(format!("origin pair `{pair}` lacks ↦")))?;
        let parse = |a: &str| Address::parse(a).map_err(|e| DecisionError::Report(e.to_string()));
        map.insert(parse(u)?, parse(v)?);
    }
    Ok(OriginMapping(map))
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.fields {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

impl FromStr for Report {
    type Err = DecisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut r = Report::default();
        for line in s.lines().filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once(": ")
                .or_else(|| line.strip_suffix(':').map(|k| (k, "")))
                .ok_or_else(|| DecisionError::Report(format!("line `{line}` is not `key: value`")))?;
            r.fields.push((k.to_string(), v.to_string()));
        }
        Ok(r)
    }
}
