//! The `.tdtt` transducer format, its serializer, and DOT rendering of an
//! input/output pair together with an origin mapping.
//!
//! ```text
//! # Example: delete every g
//! alphabet input  { f/2, g/1, h/1, a/0 }
//! alphabet output { f/2, h/1, a/0 }
//! transducer T {
//!   initial q
//!   rule q(a) -> a
//!   rule q(g(x1)) -> q(x1)
//!   rule q(h(x1)) -> h(q(x1))
//!   rule q(f(x1,x2)) -> f(q(x1),q(x2))
//! }
//! ```
//!
//! State calls are written inline in the right-hand side. State names must
//! differ from output symbol names so the two readings never collide. An
//! optional `states { p, q }` clause declares states that have no rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::trees::{is_name_char, variable_index, Address, RankedAlphabet, Symbol, Tree};

/// Right-hand side of a rule: an output context whose leaves may be state calls.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rhs {
    Out { sym: Symbol, children: Vec<Rhs> },
    Call { state: Symbol, var: usize },
}

impl Rhs {
    pub fn out(sym: &str, children: Vec<Rhs>) -> Self {
        Rhs::Out { sym: Arc::from(sym), children }
    }

    pub fn call(state: &str, var: usize) -> Self {
        Rhs::Call { state: Arc::from(state), var }
    }

    /// Height with state calls counted as leaves.
    pub fn height(&self) -> usize {
        match self {
            Rhs::Call { .. } => 0,
            Rhs::Out { children, .. } => children.iter().map(|c| c.height() + 1).max().unwrap_or(0),
        }
    }

    /// Number of output-symbol nodes.
    pub fn out_nodes(&self) -> usize {
        match self {
            Rhs::Call { .. } => 0,
            Rhs::Out { children, .. } => 1 + children.iter().map(Rhs::out_nodes).sum::<usize>(),
        }
    }

    /// State calls `(address, state, variable)` in pre-order.
    pub fn calls(&self) -> Vec<(Address, Symbol, usize)> {
        let mut out = Vec::new();
        fn walk(r: &Rhs, path: &mut Vec<usize>, out: &mut Vec<(Address, Symbol, usize)>) {
            match r {
                Rhs::Call { state, var } => out.push((Address(path.clone()), state.clone(), *var)),
                Rhs::Out { children, .. } => {
                    for (i, c) in children.iter().enumerate() {
                        path.push(i + 1);
                        walk(c, path, out);
                        path.pop();
                    }
                }
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// The output context seen by an observer of the output only: every call
    /// `q(x_j)` becomes the variable `x_j`.
    pub fn to_context(&self) -> Tree {
        match self {
            Rhs::Call { var, .. } => Tree::var(*var),
            Rhs::Out { sym, children } => {
                Tree::with_symbol(sym.clone(), children.iter().map(Rhs::to_context).collect())
            }
        }
    }

    /// The rhs as a plain tree: calls become `q(x_j)` nodes.
    pub fn to_tree(&self) -> Tree {
        match self {
            Rhs::Call { state, var } => Tree::with_symbol(state.clone(), vec![Tree::var(*var)]),
            Rhs::Out { sym, children } => {
                Tree::with_symbol(sym.clone(), children.iter().map(Rhs::to_tree).collect())
            }
        }
    }

    /// Largest variable index used.
    pub fn max_var(&self) -> usize {
        match self {
            Rhs::Call { var, .. } => *var,
            Rhs::Out { children, .. } => children.iter().map(Rhs::max_var).max().unwrap_or(0),
        }
    }

    /// True if some variable is called more than once.
    pub fn is_copying(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.calls().iter().any(|(_, _, v)| !seen.insert(*v))
    }
}

impl fmt::Display for Rhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_tree())
    }
}

/// One rule `state(symbol(x1..xn)) -> rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub state: Symbol,
    pub symbol: Symbol,
    pub rhs: Rhs,
}

/// A parsed and validated transducer description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransducerSpec {
    pub name: String,
    pub input: RankedAlphabet,
    pub output: RankedAlphabet,
    pub states: BTreeSet<String>,
    pub initial: String,
    pub rules: Vec<Rule>,
}

impl TransducerSpec {
    /// The full text of a rule, including its left-hand side variables.
    pub fn rule_text(&self, r: &Rule) -> String {
        let n = self.input.rank(&r.symbol).unwrap_or(0);
        let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        if vars.is_empty() {
            format!("{}({}) -> {}", r.state, r.symbol, r.rhs)
        } else {
            format!("{}({}({})) -> {}", r.state, r.symbol, vars.join(","), r.rhs)
        }
    }

    /// Validates the invariants of a transducer description.
    pub fn validate(&self) -> Result<(), String> {
        if !self.states.contains(&self.initial) {
            return Err(format!("initial state `{}` is not a state", self.initial));
        }
        for s in &self.states {
            if self.output.contains(s) {
                return Err(format!("state `{s}` clashes with an output symbol"));
            }
        }
        for r in &self.rules {
            if !self.states.contains(&*r.state) {
                return Err(format!("unknown state `{}`", r.state));
            }
            let n = self
                .input
                .rank(&r.symbol)
                .ok_or_else(|| format!("unknown input symbol `{}`", r.symbol))?;
            check_rhs(&r.rhs, n, &self.output, &self.states)?;
        }
        Ok(())
    }
}

fn check_rhs(
    rhs: &Rhs,
    n: usize,
    output: &RankedAlphabet,
    states: &BTreeSet<String>,
) -> Result<(), String> {
    match rhs {
        Rhs::Call { state, var } => {
            if !states.contains(&**state) {
                return Err(format!("unknown state `{state}`"));
            }
            if *var == 0 || *var > n {
                return Err(format!("variable x{var} out of range (rank {n})"));
            }
            Ok(())
        }
        Rhs::Out { sym, children } => {
            let rank = output
                .rank(sym)
                .ok_or_else(|| format!("unknown output symbol `{sym}`"))?;
            if rank != children.len() {
                return Err(format!(
                    "rank mismatch: output symbol `{sym}` has rank {rank} but {} children",
                    children.len()
                ));
            }
            children.iter().try_for_each(|c| check_rhs(c, n, output, states))
        }
    }
}

/// A located diagnostic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

/// A successful parse with its warnings (for example, dropped duplicate rules).
#[derive(Debug, Clone)]
pub struct Parsed {
    pub spec: TransducerSpec,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(usize),
    Punct(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        let chars: Vec<(usize, char)> = line.chars().enumerate().collect();
        let mut i = 0;
        while i < chars.len() {
            let (col, c) = chars[i];
            let here = |tok| Token { tok, line: li + 1, column: col + 1 };
            if c.is_whitespace() {
                i += 1;
            } else if c == '-' && chars.get(i + 1).map(|x| x.1) == Some('>') {
                out.push(here(Tok::Arrow));
                i += 2;
            } else if c == '→' {
                out.push(here(Tok::Arrow));
                i += 1;
            } else if "{}(),/".contains(c) {
                out.push(here(Tok::Punct(c)));
                i += 1;
            } else if is_name_char(c) {
                let start = i;
                while i < chars.len() && is_name_char(chars[i].1) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|x| x.1).collect();
                let tok = match word.parse::<usize>() {
                    Ok(n) if word.bytes().all(|b| b.is_ascii_digit()) => Tok::Int(n),
                    _ => Tok::Ident(word),
                };
                out.push(here(tok));
            } else {
                return Err(Diagnostic {
                    line: li + 1,
                    column: col + 1,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    warnings: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

/// A parsed tree term with the position of its head symbol.
#[derive(Debug, Clone)]
struct Term {
    name: String,
    line: usize,
    column: usize,
    children: Vec<Term>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        match self.peek().or_else(|| self.toks.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let (line, column) = self.here();
        Err(Diagnostic { line, column, message: msg.into() })
    }

    fn expect_punct(&mut self, c: char) -> PResult<()> {
        match self.peek() {
            Some(Token { tok: Tok::Punct(p), .. }) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{c}`")),
        }
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }

    fn ident(&mut self) -> PResult<(String, usize, usize)> {
        match self.peek().cloned() {
            Some(Token { tok: Tok::Ident(s), line, column }) => {
                self.pos += 1;
                Ok((s, line, column))
            }
            _ => self.err("expected an identifier"),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), .. }) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`")),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == kw)
    }

    fn alphabet(&mut self) -> PResult<(String, RankedAlphabet)> {
        self.keyword("alphabet")?;
        let (which, _, _) = self.ident()?;
        self.expect_punct('{')?;
        let mut alphabet = RankedAlphabet::new();
        while !self.is_punct('}') {
            let (name, line, column) = self.ident()?;
            self.expect_punct('/')?;
            let rank = match self.peek() {
                Some(Token { tok: Tok::Int(n), .. }) => *n,
                _ => return self.err("expected a rank"),
            };
            self.pos += 1;
            if let Some(old) = alphabet.insert(&name, rank) {
                if old != rank {
                    return Err(Diagnostic {
                        line,
                        column,
                        message: format!("symbol `{name}` declared with ranks {old} and {rank}"),
                    });
                }
            }
            if self.is_punct(',') {
                self.pos += 1;
            }
        }
        self.expect_punct('}')?;
        Ok((which, alphabet))
    }

    fn term(&mut self) -> PResult<Term> {
        let (name, line, column) = self.ident()?;
        let mut children = Vec::new();
        if self.is_punct('(') {
            self.pos += 1;
            loop {
                children.push(self.term()?);
                if self.is_punct(',') {
                    self.pos += 1;
                } else {
                    self.expect_punct(')')?;
                    break;
                }
            }
        }
        Ok(Term { name, line, column, children })
    }
}

fn at(term: &Term, message: impl Into<String>) -> Diagnostic {
    Diagnostic { line: term.line, column: term.column, message: message.into() }
}

/// Parses the `.tdtt` text format.
pub fn parse_transducer(text: &str) -> Result<Parsed, ParseError> {
    let toks = lex(text).map_err(|d| ParseError { diagnostics: vec![d] })?;
    let mut p = Parser { toks, pos: 0, diags: Vec::new(), warnings: Vec::new() };
    match parse_document(&mut p) {
        Ok(spec) if p.diags.is_empty() => Ok(Parsed { spec, warnings: p.warnings }),
        Ok(_) => Err(ParseError { diagnostics: p.diags }),
        Err(d) => {
            p.diags.push(d);
            Err(ParseError { diagnostics: p.diags })
        }
    }
}

fn parse_document(p: &mut Parser) -> PResult<TransducerSpec> {
    let mut input = None;
    let mut output = None;
    while p.is_keyword("alphabet") {
        let (which, alphabet) = p.alphabet()?;
        match which.as_str() {
            "input" => input = Some(alphabet),
            "output" => output = Some(alphabet),
            other => return p.err(format!("unknown alphabet `{other}` (expected input or output)")),
        }
    }
    let input = match input {
        Some(a) => a,
        None => return p.err("missing `alphabet input { ... }`"),
    };
    let output = match output {
        Some(a) => a,
        None => return p.err("missing `alphabet output { ... }`"),
    };
    p.keyword("transducer")?;
    let (name, _, _) = p.ident()?;
    p.expect_punct('{')?;
    let mut initial: Option<(String, usize, usize)> = None;
    let mut declared: BTreeSet<String> = BTreeSet::new();
    let mut raw_rules: Vec<(Term, Term)> = Vec::new();
    while !p.is_punct('}') {
        if p.is_keyword("initial") {
            p.pos += 1;
            initial = Some(p.ident()?);
        } else if p.is_keyword("states") {
            p.pos += 1;
            p.expect_punct('{')?;
            while !p.is_punct('}') {
                declared.insert(p.ident()?.0);
                if p.is_punct(',') {
                    p.pos += 1;
                }
            }
            p.expect_punct('}')?;
        } else if p.is_keyword("rule") {
            p.pos += 1;
            let lhs = p.term()?;
            match p.peek() {
                Some(Token { tok: Tok::Arrow, .. }) => p.pos += 1,
                _ => return p.err("expected `->`"),
            }
            let rhs = p.term()?;
            raw_rules.push((lhs, rhs));
        } else {
            return p.err("expected `initial`, `states`, `rule` or `}`");
        }
    }
    p.expect_punct('}')?;
    if p.peek().is_some() {
        return p.err("trailing input after transducer block");
    }
    let (initial, iline, icol) = match initial {
        Some(i) => i,
        None => return p.err("missing `initial` state"),
    };
    let mut states = declared;
    states.insert(initial.clone());
    for (lhs, _) in &raw_rules {
        states.insert(lhs.name.clone());
    }
    for s in &states {
        if output.contains(s) {
            p.diags.push(Diagnostic {
                line: iline,
                column: icol,
                message: format!("state `{s}` clashes with an output symbol"),
            });
        }
    }
    let mut rules: Vec<Rule> = Vec::new();
    let mut seen: BTreeMap<Rule, ()> = BTreeMap::new();
    for (lhs, rhs) in raw_rules {
        match convert_rule(&lhs, &rhs, &input, &output, &states) {
            Ok(rule) => {
                if seen.insert(rule.clone(), ()).is_some() {
                    p.warnings.push(at(&lhs, "duplicate rule ignored"));
                } else {
                    rules.push(rule);
                }
            }
            Err(d) => p.diags.push(d),
        }
    }
    Ok(TransducerSpec { name, input, output, states, initial, rules })
}

fn convert_rule(
    lhs: &Term,
    rhs: &Term,
    input: &RankedAlphabet,
    output: &RankedAlphabet,
    states: &BTreeSet<String>,
) -> Result<Rule, Diagnostic> {
    if lhs.children.len() != 1 {
        return Err(at(lhs, "left-hand side must have the form q(f(x1,...,xn))"));
    }
    let pat = &lhs.children[0];
    let rank = input
        .rank(&pat.name)
        .ok_or_else(|| at(pat, format!("unknown input symbol `{}`", pat.name)))?;
    if pat.children.len() != rank {
        return Err(at(
            pat,
            format!("rank mismatch: `{}` has rank {rank} but {} arguments", pat.name, pat.children.len()),
        ));
    }
    for (i, v) in pat.children.iter().enumerate() {
        if variable_index(&v.name) != Some(i + 1) || !v.children.is_empty() {
            return Err(at(v, format!("expected variable x{} in left-hand side", i + 1)));
        }
    }
    let rhs = convert_rhs(rhs, rank, output, states)?;
    Ok(Rule { state: Arc::from(lhs.name.as_str()), symbol: Arc::from(pat.name.as_str()), rhs })
}

fn convert_rhs(
    t: &Term,
    rank: usize,
    output: &RankedAlphabet,
    states: &BTreeSet<String>,
) -> Result<Rhs, Diagnostic> {
    if states.contains(&t.name) {
        if t.children.len() != 1 {
            return Err(at(t, format!("state call `{}` needs exactly one variable argument", t.name)));
        }
        let v = &t.children[0];
        let j = variable_index(&v.name)
            .filter(|_| v.children.is_empty())
            .ok_or_else(|| at(v, "state call argument must be a variable"))?;
        if j > rank {
            return Err(at(v, format!("variable x{j} out of range (input rank {rank})")));
        }
        return Ok(Rhs::call(&t.name, j));
    }
    if variable_index(&t.name).is_some() && t.children.is_empty() {
        return Err(at(t, format!("variable `{}` must appear under a state call", t.name)));
    }
    match output.rank(&t.name) {
        None => Err(at(t, format!("unknown output symbol or state `{}`", t.name))),
        Some(r) if r != t.children.len() => Err(at(
            t,
            format!("rank mismatch: `{}` has rank {r} but {} arguments", t.name, t.children.len()),
        )),
        Some(_) => {
            let children = t
                .children
                .iter()
                .map(|c| convert_rhs(c, rank, output, states))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Rhs::out(&t.name, children))
        }
    }
}

fn alphabet_text(name: &str, a: &RankedAlphabet) -> String {
    let items: Vec<String> = a.iter().map(|(s, r)| format!("{s}/{r}")).collect();
    format!("alphabet {name} {{ {} }}", items.join(", "))
}

/// Canonical text of a transducer; `parse_transducer` reads it back unchanged.
pub fn serialize_transducer(spec: &TransducerSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", alphabet_text("input", &spec.input));
    let _ = writeln!(out, "{}", alphabet_text("output", &spec.output));
    let _ = writeln!(out, "transducer {} {{", spec.name);
    let _ = writeln!(out, "  initial {}", spec.initial);
    let mut implicit: BTreeSet<&str> = spec.rules.iter().map(|r| &*r.state).collect();
    implicit.insert(&spec.initial);
    let extra: Vec<&str> = spec.states.iter().map(String::as_str).filter(|s| !implicit.contains(s)).collect();
    if !extra.is_empty() {
        let _ = writeln!(out, "  states {{ {} }}", extra.join(", "));
    }
    for r in &spec.rules {
        let _ = writeln!(out, "  rule {}", spec.rule_text(r));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DotError {
    #[error("output node {0} has no origin")]
    MissingOrigin(Address),
    #[error("origin of {0} points outside the input tree")]
    OriginOutsideInput(Address),
    #[error("origin mapping mentions {0}, which is not an output node")]
    UnknownOutputNode(Address),
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot_id(prefix: &str, u: &Address) -> String {
    if u.is_root() {
        format!("{prefix}_root")
    } else {
        let parts: Vec<String> = u.0.iter().map(|i| i.to_string()).collect();
        format!("{prefix}_{}", parts.join("_"))
    }
}

/// Renders input and output trees as two clusters with dashed origin edges
/// from every output node to its origin. Nodes and edges appear in address
/// order, so the text is stable.
pub fn export_dot(t: &Tree, s: &Tree, origin: &BTreeMap<Address, Address>) -> Result<String, DotError> {
    let out_dom = s.domain();
    for u in &out_dom {
        let v = origin.get(u).ok_or_else(|| DotError::MissingOrigin(u.clone()))?;
        if !t.contains(v) {
            return Err(DotError::OriginOutsideInput(u.clone()));
        }
    }
    for u in origin.keys() {
        if !s.contains(u) {
            return Err(DotError::UnknownOutputNode(u.clone()));
        }
    }
    let mut out = String::new();
    out.push_str("digraph origin {\n  rankdir=TB;\n  node [shape=circle, fontsize=12];\n");
    for (prefix, title, tree) in [("in", "input", t), ("out", "output", s)] {
        let _ = writeln!(out, "  subgraph cluster_{title} {{\n    label=\"{title}\";");
        for u in tree.domain() {
            let label = tree.label_at(&u).unwrap_or_default();
            let _ = writeln!(
                out,
                "    {} [label=\"{}\", tooltip=\"{}\"];",
                dot_id(prefix, &u),
                dot_escape(label),
                u
            );
        }
        for u in tree.domain() {
            if let Some(p) = u.parent() {
                let _ = writeln!(out, "    {} -> {};", dot_id(prefix, &p), dot_id(prefix, &u));
            }
        }
        out.push_str("  }\n");
    }
    for u in &out_dom {
        let v = &origin[u];
        let _ = writeln!(
            out,
            "  {} -> {} [style=dashed, color=gray40, constraint=false];",
            dot_id("out", u),
            dot_id("in", v)
        );
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const EXAMPLE1: &str = "\
# deletes every g
alphabet input { f/2, g/1, h/1, a/0 }
alphabet output { f/2, g/1, h/1, a/0 }
transducer T {
  initial q
  rule q(a) -> a
  rule q(g(x1)) -> q(x1)
  rule q(h(x1)) -> h(q(x1))
  rule q(f(x1,x2)) -> f(q(x1),q(x2))
}
";

    const EXAMPLE2: &str = "\
alphabet input { f/2, a/0 }
alphabet output { h/1, b/0 }
transducer T {
  initial q
  rule q(a) -> b
  rule q(f(x1,x2)) -> h(q(x1))
  rule q(f(x1,x2)) -> h(q(x2))
}
";

    fn parse(s: &str) -> TransducerSpec {
        parse_transducer(s).unwrap().spec
    }

    #[test]
    fn example1_parses() {
        let spec = parse(EXAMPLE1);
        assert_eq!(spec.states.len(), 1);
        assert_eq!(spec.rules.len(), 4);
        assert_eq!(spec.input.max_rank(), 2);
        assert_eq!(spec.rules[1].rhs, Rhs::call("q", 1));
        assert_eq!(spec.rules[3].rhs.to_context(), Tree::parse("f(x1,x2)").unwrap());
    }

    #[test]
    fn empty_rule_set_is_valid() {
        let spec = parse("alphabet input { a/0 } alphabet output { b/0 } transducer E { initial q }");
        assert!(spec.rules.is_empty());
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn rank_mismatch_is_reported_with_position() {
        let text = "alphabet input { f/2, a/0 }\nalphabet output { b/0 }\ntransducer T {\n  initial q\n  rule q(f(x1)) -> b\n}\n";
        let err = parse_transducer(text).unwrap_err();
        assert_eq!(err.diagnostics.len(), 1);
        let d = &err.diagnostics[0];
        assert_eq!(d.line, 5);
        assert!(d.message.contains("rank mismatch"), "{d}");
    }

    #[test]
    fn unknown_state_and_variable_range() {
        let unknown = "alphabet input { g/1, a/0 } alphabet output { h/1, b/0 } transducer T { initial q rule q(g(x1)) -> h(p(x1)) }";
        let e = parse_transducer(unknown).unwrap_err();
        assert!(e.diagnostics[0].message.contains("unknown"), "{e}");
        let range = "alphabet input { g/1, a/0 } alphabet output { h/1, b/0 } transducer T { initial q rule q(g(x1)) -> h(q(x2)) }";
        let e = parse_transducer(range).unwrap_err();
        assert!(e.diagnostics[0].message.contains("out of range"), "{e}");
    }

    #[test]
    fn syntax_error_has_line_and_column() {
        let e = parse_transducer("alphabet input { a/0 }\nalphabet output { b/0 }\ntransducer T {\n  initial q\n  rule q(a) b\n}").unwrap_err();
        assert_eq!((e.diagnostics[0].line, e.diagnostics[0].column), (5, 13));
    }

    #[test]
    fn duplicates_are_dropped_with_a_warning() {
        let text = format!("{}\n", EXAMPLE2.replace(
            "rule q(a) -> b",
            "rule q(a) -> b\n  rule q(a) -> b",
        ));
        let parsed = parse_transducer(&text).unwrap();
        assert_eq!(parsed.spec.rules.len(), 3);
        assert_eq!(parsed.warnings.len(), 1);
    }

    #[test]
    fn round_trips() {
        for text in [EXAMPLE1, EXAMPLE2, "alphabet input { a/0 } alphabet output { b/0 } transducer E { initial q states { p } }"] {
            let spec = parse(text);
            let again = parse(&serialize_transducer(&spec));
            assert_eq!(spec, again);
        }
    }

    #[test]
    fn dot_has_one_dashed_edge_per_output_node() {
        let t = Tree::parse("f(g(h(a)),a)").unwrap();
        let s = Tree::parse("f(h(a),a)").unwrap();
        let o: BTreeMap<Address, Address> = [("", ""), ("1", "11"), ("11", "111"), ("2", "2")]
            .iter()
            .map(|(u, v)| (Address::parse(u).unwrap(), Address::parse(v).unwrap()))
            .collect();
        let dot = export_dot(&t, &s, &o).unwrap();
        assert_eq!(dot.matches("style=dashed").count(), 4);
        assert_eq!(dot, export_dot(&t, &s, &o).unwrap());
        let single = export_dot(&Tree::leaf("a"), &Tree::leaf("b"), &[(Address::root(), Address::root())].into()).unwrap();
        assert_eq!(single.matches("style=dashed").count(), 1);
        let missing = export_dot(&t, &s, &BTreeMap::new());
        assert!(matches!(missing, Err(DotError::MissingOrigin(_))));
    }
}
