//! Operational semantics of top-down tree transducers: configurations, the
//! one-step successor relation, canonical run enumeration, origin mappings,
//! the relation with origins, and structural classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::textio::{parse_transducer, ParseError, Rhs, Rule, TransducerSpec};
use crate::trees::{Address, RankedAlphabet, Symbol, Tree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransducerError {
    #[error("invalid transducer: {0}")]
    Invalid(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("step budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },
    #[error("transducer is not deterministic")]
    NotDeterministic,
    #[error("input tree is not a ground tree over the input alphabet: {0}")]
    BadInput(String),
}

/// A validated transducer with the metadata used by the constructions:
/// `m`, the maximal input rank, and `big_m`, the maximal right-hand side
/// height (state calls count as leaves).
#[derive(Debug, Clone)]
pub struct Tdtt {
    pub spec: TransducerSpec,
    pub m: usize,
    pub big_m: usize,
    index: BTreeMap<(Symbol, Symbol), Vec<usize>>,
}

impl PartialEq for Tdtt {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Tdtt {
    pub fn new(spec: TransducerSpec) -> Result<Self, TransducerError> {
        spec.validate().map_err(TransducerError::Invalid)?;
        let m = spec.input.max_rank();
        let big_m = spec.rules.iter().map(|r| r.rhs.height()).max().unwrap_or(0);
        let mut index: BTreeMap<(Symbol, Symbol), Vec<usize>> = BTreeMap::new();
        for (i, r) in spec.rules.iter().enumerate() {
            index.entry((r.state.clone(), r.symbol.clone())).or_default().push(i);
        }
        Ok(Tdtt { spec, m, big_m, index })
    }

    /// Parses and validates `.tdtt` text.
    pub fn parse(text: &str) -> Result<Self, TransducerError> {
        Tdtt::new(parse_transducer(text)?.spec)
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn initial(&self) -> &str {
        &self.spec.initial
    }

    pub fn input(&self) -> &RankedAlphabet {
        &self.spec.input
    }

    pub fn output(&self) -> &RankedAlphabet {
        &self.spec.output
    }

    pub fn states(&self) -> impl Iterator<Item = &str> {
        self.spec.states.iter().map(String::as_str)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.spec.rules
    }

    /// Rules with left-hand side `q(f(...))`, in declaration order.
    pub fn rules_for<'a>(&'a self, q: &str, f: &str) -> impl Iterator<Item = &'a Rule> + 'a {
        let key = (Arc::<str>::from(q), Arc::<str>::from(f));
        self.index
            .get(&key)
            .into_iter()
            .flatten()
            .map(move |&i| &self.spec.rules[i])
    }

    pub fn has_rule(&self, q: &str, f: &str) -> bool {
        self.rules_for(q, f).next().is_some()
    }

    /// The largest number of output nodes produced by one rule.
    pub fn ell(&self) -> usize {
        self.spec.rules.iter().map(|r| r.rhs.out_nodes()).max().unwrap_or(0)
    }

    /// Both alphabets have rank at most one.
    pub fn is_monadic(&self) -> bool {
        self.spec.input.is_monadic() && self.spec.output.is_monadic()
    }

    /// Default step budget `|dom t| · |Q| · (M+1) · 4`.
    pub fn default_budget(&self, t: &Tree) -> usize {
        t.size() * self.spec.states.len().max(1) * (self.big_m + 1) * 4
    }

    fn check_input(&self, t: &Tree) -> Result<(), TransducerError> {
        self.spec
            .input
            .check(t, false)
            .map_err(|e| TransducerError::BadInput(e.to_string()))
    }
}

/// A map from output nodes to input nodes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OriginMapping(pub BTreeMap<Address, Address>);

impl OriginMapping {
    pub fn get(&self, u: &Address) -> Option<&Address> {
        self.0.get(u)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Address, &Address)> {
        self.0.iter()
    }

    /// Builds a mapping from `(output, input)` address literals.
    pub fn from_literals(pairs: &[(&str, &str)]) -> Result<Self, crate::trees::TreeError> {
        let mut map = BTreeMap::new();
        for (u, v) in pairs {
            map.insert(Address::parse(u)?, Address::parse(v)?);
        }
        Ok(OriginMapping(map))
    }

    /// Total on `dom(s)` with range inside `dom(t)`.
    pub fn is_valid_for(&self, t: &Tree, s: &Tree) -> bool {
        let dom = s.domain();
        dom.len() == self.0.len()
            && dom.iter().all(|u| self.0.get(u).is_some_and(|v| t.contains(v)))
    }
}

impl fmt::Display for OriginMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (u, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{u}↦{v}")?;
        }
        write!(f, "}}")
    }
}

/// `(t, t', φ)`: the input, a partial output whose state leaves are pending
/// computations, and the map from those leaves to the input nodes they read.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub input: Arc<Tree>,
    pub output: Tree,
    pub phi: BTreeMap<Address, Address>,
}

impl Configuration {
    pub fn initial(t: &Tree, q0: &str) -> Self {
        Configuration {
            input: Arc::new(t.clone()),
            output: Tree::leaf(q0),
            phi: BTreeMap::from([(Address::root(), Address::root())]),
        }
    }

    /// No pending state leaves.
    pub fn is_final(&self) -> bool {
        self.phi.is_empty()
    }

    /// The output with every pending state leaf replaced by a gap: the part
    /// that is already fixed.
    pub fn fixed_output(&self) -> Tree {
        fn go(t: &Tree, path: &mut Vec<usize>, phi: &BTreeMap<Address, Address>) -> Tree {
            if t.is_leaf() && phi.contains_key(&Address(path.clone())) {
                return Tree::gap();
            }
            let children = t
                .children
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    path.push(i + 1);
                    let r = go(c, path, phi);
                    path.pop();
                    r
                })
                .collect();
            Tree { label: t.label.clone(), children }
        }
        go(&self.output, &mut Vec::new(), &self.phi)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phi: Vec<String> = self.phi.iter().map(|(u, v)| format!("{u}↦{v}")).collect();
        write!(f, "({}, {}, {{{}}})", self.input, self.output, phi.join(", "))
    }
}

/// One rule application: the output leaf that fired, the input node it read,
/// and the rule used.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub leaf: Address,
    pub input_node: Address,
    pub rule: Rule,
}

/// A configuration sequence together with the steps connecting it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Run {
    pub configurations: Vec<Configuration>,
    pub steps: Vec<Step>,
}

impl Run {
    pub fn last(&self) -> &Configuration {
        self.configurations.last().expect("a run has an initial configuration")
    }

    pub fn input(&self) -> &Tree {
        &self.configurations[0].input
    }

    pub fn final_output(&self) -> &Tree {
        &self.last().output
    }

    /// The output fixed after applying exactly the steps that read input
    /// nodes of depth at most `depth` (`None` for the initial configuration).
    /// Steps at one depth only depend on steps at smaller depths, so this is
    /// a configuration reachable by reordering the run.
    pub fn level_output(&self, depth: Option<usize>) -> Tree {
        let mut c = self.configurations[0].clone();
        if let Some(d) = depth {
            for s in &self.steps {
                if s.input_node.len() <= d {
                    c = apply_step(&c, &s.leaf, &s.rule);
                }
            }
        }
        c.fixed_output()
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.configurations.iter().enumerate() {
            writeln!(f, "c{i} = {c}")?;
        }
        Ok(())
    }
}

fn rhs_to_output(rhs: &Rhs) -> Tree {
    match rhs {
        Rhs::Call { state, .. } => Tree::with_symbol(state.clone(), Vec::new()),
        Rhs::Out { sym, children } => {
            Tree::with_symbol(sym.clone(), children.iter().map(rhs_to_output).collect())
        }
    }
}

/// Fires `rule` at the state leaf `u` of `c`.
pub fn apply_step(c: &Configuration, u: &Address, rule: &Rule) -> Configuration {
    let v = c.phi[u].clone();
    let output = c
        .output
        .replace_at(u, rhs_to_output(&rule.rhs))
        .expect("state leaf is in the output domain");
    let mut phi = c.phi.clone();
    phi.remove(u);
    for (p, _, j) in rule.rhs.calls() {
        phi.insert(u.join(&p), v.child(j));
    }
    Configuration { input: c.input.clone(), output, phi }
}

/// Rules applicable at the state leaf `u`.
fn applicable<'a>(t: &'a Tdtt, c: &'a Configuration, u: &Address) -> Vec<&'a Rule> {
    let q = c.output.label_at(u).expect("state leaf");
    let v = &c.phi[u];
    let f = c.input.label_at(v).expect("phi points into the input");
    t.rules_for(q, f).collect()
}

/// All configurations reachable by one rule application at any state leaf.
pub fn successors(t: &Tdtt, c: &Configuration) -> Vec<Configuration> {
    let mut out = Vec::new();
    for u in c.phi.keys() {
        for r in applicable(t, c, u) {
            out.push(apply_step(c, u, r));
        }
    }
    out
}

/// A maximal run whose final output still contains states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncompleteRun {
    pub run: Run,
    pub stuck_leaves: Vec<Address>,
}

/// The outcome of run enumeration.
#[derive(Debug, Clone, Default)]
pub struct RunSet {
    /// Maximal runs with a ground final output.
    pub complete: Vec<(Run, Tree)>,
    /// Maximal runs that got stuck, kept for diagnostics.
    pub incomplete: Vec<IncompleteRun>,
}

/// Limits for enumeration.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Maximal run length; `None` selects the default `|dom t|·|Q|·(M+1)·4`.
    pub steps: Option<usize>,
    /// Maximal number of maximal runs or relation elements.
    pub results: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { steps: None, results: 100_000 }
    }
}

/// Enumerates all maximal runs, firing the leftmost state leaf that has an
/// applicable rule at each step. Stuck leaves are left in place.
pub fn enumerate_runs(t: &Tdtt, input: &Tree, budget: Budget) -> Result<RunSet, TransducerError> {
    t.check_input(input)?;
    let max_steps = budget.steps.unwrap_or_else(|| t.default_budget(input));
    let mut set = RunSet::default();
    let init = Configuration::initial(input, t.initial());
    let mut stack = vec![Run { configurations: vec![init], steps: Vec::new() }];
    while let Some(run) = stack.pop() {
        let c = run.last();
        let next = c
            .phi
            .keys()
            .map(|u| (u, applicable(t, c, u)))
            .find(|(_, rules)| !rules.is_empty());
        match next {
            None => {
                if set.complete.len() + set.incomplete.len() >= budget.results {
                    return Err(TransducerError::BudgetExceeded { budget: budget.results });
                }
                if c.is_final() {
                    let out = c.output.clone();
                    set.complete.push((run, out));
                } else {
                    let stuck_leaves = c.phi.keys().cloned().collect();
                    set.incomplete.push(IncompleteRun { run, stuck_leaves });
                }
            }
            Some((u, rules)) => {
                if run.steps.len() >= max_steps {
                    return Err(TransducerError::BudgetExceeded { budget: max_steps });
                }
                let u = u.clone();
                // Push in reverse so the first rule is explored first.
                for r in rules.into_iter().rev() {
                    let mut next_run = run.clone();
                    let nc = apply_step(c, &u, r);
                    next_run.steps.push(Step { leaf: u.clone(), input_node: c.phi[&u].clone(), rule: r.clone() });
                    next_run.configurations.push(nc);
                    stack.push(next_run);
                }
            }
        }
    }
    Ok(set)
}

/// Origins of a run: every output node maps to the input node read by the
/// step that created it.
pub fn run_origin(run: &Run) -> OriginMapping {
    let mut map = BTreeMap::new();
    for s in &run.steps {
        fn walk(r: &Rhs, path: &mut Vec<usize>, base: &Address, v: &Address, map: &mut BTreeMap<Address, Address>) {
            if let Rhs::Out { children, .. } = r {
                map.insert(base.join(&Address(path.clone())), v.clone());
                for (i, c) in children.iter().enumerate() {
                    path.push(i + 1);
                    walk(c, path, base, v, map);
                    path.pop();
                }
            }
        }
        walk(&s.rule.rhs, &mut Vec::new(), &s.leaf, &s.input_node, &mut map);
    }
    OriginMapping(map)
}

/// One element of `R_o(T)` restricted to a fixed input: output and origins.
pub type OutputWithOrigin = (Tree, OriginMapping);

/// `{(s, o) : (t, s, o) ∈ R_o(T)}`, computed bottom-up per (state, node).
pub fn relation_with_origins(
    t: &Tdtt,
    input: &Tree,
    budget: Budget,
) -> Result<BTreeSet<OutputWithOrigin>, TransducerError> {
    t.check_input(input)?;
    let mut memo: BTreeMap<(Symbol, Address), Arc<Vec<OutputWithOrigin>>> = BTreeMap::new();
    let q0: Symbol = Arc::from(t.initial());
    let all = outputs_from(t, input, &q0, &Address::root(), &mut memo, budget.results)?;
    Ok(all.iter().cloned().collect())
}

/// Outputs of state `q` started at input node `v`, with origins written
/// relative to the output root of this sub-computation.
fn outputs_from(
    t: &Tdtt,
    input: &Tree,
    q: &Symbol,
    v: &Address,
    memo: &mut BTreeMap<(Symbol, Address), Arc<Vec<OutputWithOrigin>>>,
    cap: usize,
) -> Result<Arc<Vec<OutputWithOrigin>>, TransducerError> {
    if let Some(r) = memo.get(&(q.clone(), v.clone())) {
        return Ok(r.clone());
    }
    let f = input.label_at(v).expect("node in input");
    let mut results: BTreeSet<OutputWithOrigin> = BTreeSet::new();
    let rules: Vec<Rule> = t.rules_for(q, f).cloned().collect();
    for rule in rules {
        let calls = rule.rhs.calls();
        let mut options: Vec<Arc<Vec<OutputWithOrigin>>> = Vec::new();
        for (_, qi, j) in &calls {
            options.push(outputs_from(t, input, qi, &v.child(*j), memo, cap)?);
        }
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        let mut idx = vec![0usize; options.len()];
        loop {
            let chosen: Vec<&OutputWithOrigin> = idx.iter().zip(&options).map(|(i, o)| &o[*i]).collect();
            results.insert(assemble(&rule.rhs, &calls, &chosen, v));
            if results.len() > cap {
                return Err(TransducerError::BudgetExceeded { budget: cap });
            }
            // Odometer increment.
            let mut k = idx.len();
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if idx.is_empty() || k == usize::MAX {
                break;
            }
        }
    }
    let r = Arc::new(results.into_iter().collect::<Vec<_>>());
    memo.insert((q.clone(), v.clone()), r.clone());
    Ok(r)
}

fn assemble(
    rhs: &Rhs,
    calls: &[(Address, Symbol, usize)],
    chosen: &[&OutputWithOrigin],
    v: &Address,
) -> OutputWithOrigin {
    let mut origin = BTreeMap::new();
    let mut call_index = 0;
    fn build(
        r: &Rhs,
        path: &mut Vec<usize>,
        v: &Address,
        chosen: &[&OutputWithOrigin],
        call_index: &mut usize,
        origin: &mut BTreeMap<Address, Address>,
    ) -> Tree {
        match r {
            Rhs::Call { .. } => {
                let (tree, o) = chosen[*call_index];
                *call_index += 1;
                let base = Address(path.clone());
                for (u, w) in &o.0 {
                    origin.insert(base.join(u), w.clone());
                }
                tree.clone()
            }
            Rhs::Out { sym, children } => {
                origin.insert(Address(path.clone()), v.clone());
                let kids = children
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        path.push(i + 1);
                        let t = build(c, path, v, chosen, call_index, origin);
                        path.pop();
                        t
                    })
                    .collect();
                Tree::with_symbol(sym.clone(), kids)
            }
        }
    }
    debug_assert_eq!(calls.len(), chosen.len());
    let tree = build(rhs, &mut Vec::new(), v, chosen, &mut call_index, &mut origin);
    (tree, OriginMapping(origin))
}

/// Structural flags of a transducer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub deterministic: bool,
    pub linear: bool,
    pub synchronous: bool,
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |b: bool, s: &str| if b { s.to_string() } else { format!("non-{s}") };
        write!(
            f,
            "{}, {}, {}",
            word(self.deterministic, "deterministic"),
            word(self.linear, "linear"),
            word(self.synchronous, "synchronous")
        )
    }
}

pub fn classify(t: &Tdtt) -> Flags {
    Flags {
        deterministic: t.index.values().all(|v| v.len() <= 1),
        linear: t.spec.rules.iter().all(|r| !r.rhs.is_copying()),
        synchronous: t.spec.rules.iter().all(|r| r.rhs.out_nodes() == 1),
    }
}

/// Runs a deterministic transducer. `Ok(None)` when it gets stuck.
pub fn evaluate_deterministic(t: &Tdtt, input: &Tree) -> Result<Option<OutputWithOrigin>, TransducerError> {
    if !classify(t).deterministic {
        return Err(TransducerError::NotDeterministic);
    }
    t.check_input(input)?;
    fn go(t: &Tdtt, input: &Tree, q: &str, v: &Address) -> Option<OutputWithOrigin> {
        let f = input.label_at(v)?;
        let rule = t.rules_for(q, f).next()?;
        let calls = rule.rhs.calls();
        let subs: Option<Vec<OutputWithOrigin>> =
            calls.iter().map(|(_, qi, j)| go(t, input, qi, &v.child(*j))).collect();
        let subs = subs?;
        let refs: Vec<&OutputWithOrigin> = subs.iter().collect();
        Some(assemble(&rule.rhs, &calls, &refs, v))
    }
    Ok(go(t, input, t.initial(), &Address::root()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::textio::tests::EXAMPLE1;

    pub(crate) const EXAMPLE2: &str = "alphabet input { f/2, a/0 } alphabet output { h/1, b/0 }
transducer T { initial q rule q(a) -> b rule q(f(x1,x2)) -> h(q(x1)) rule q(f(x1,x2)) -> h(q(x2)) }";

    fn tree(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    #[test]
    fn example1_first_step() {
        let t = Tdtt::parse(EXAMPLE1).unwrap();
        let c0 = Configuration::initial(&tree("f(g(h(a)),a)"), "q");
        let next = successors(&t, &c0);
        assert_eq!(next.len(), 1);
        assert_eq!(next[0].output, tree("f(q,q)"));
        let expect: BTreeMap<Address, Address> = OriginMapping::from_literals(&[("1", "1"), ("2", "2")]).unwrap().0;
        assert_eq!(next[0].phi, expect);
    }

    #[test]
    fn final_configuration_has_no_successor() {
        let t = Tdtt::parse(EXAMPLE1).unwrap();
        let c = Configuration { input: Arc::new(tree("a")), output: tree("a"), phi: BTreeMap::new() };
        assert!(successors(&t, &c).is_empty());
    }

    #[test]
    fn example2_initial_has_two_successors() {
        let t = Tdtt::parse(EXAMPLE2).unwrap();
        let c0 = Configuration::initial(&tree("f(a,a)"), "q");
        let next = successors(&t, &c0);
        assert_eq!(next.len(), 2);
        let phis: BTreeSet<Vec<Address>> = next.iter().map(|c| c.phi.values().cloned().collect()).collect();
        assert!(phis.contains(&vec![Address::parse("1").unwrap()]));
        assert!(phis.contains(&vec![Address::parse("2").unwrap()]));
    }

    #[test]
    fn example1_run_and_origin() {
        let t = Tdtt::parse(EXAMPLE1).unwrap();
        let runs = enumerate_runs(&t, &tree("f(g(h(a)),a)"), Budget::default()).unwrap();
        assert_eq!(runs.complete.len(), 1);
        let (run, out) = &runs.complete[0];
        assert_eq!(out, &tree("f(h(a),a)"));
        assert_eq!(run.configurations.len(), 6);
        let o = run_origin(run);
        let expect = OriginMapping::from_literals(&[("", ""), ("1", "11"), ("11", "111"), ("2", "2")]).unwrap();
        assert_eq!(o, expect);
    }

    #[test]
    fn single_leaf_rule_origin() {
        let t = Tdtt::parse("alphabet input { a/0 } alphabet output { b/0 } transducer T { initial q rule q(a) -> b }").unwrap();
        let runs = enumerate_runs(&t, &tree("a"), Budget::default()).unwrap();
        assert_eq!(run_origin(&runs.complete[0].0), OriginMapping::from_literals(&[("", "")]).unwrap());
    }

    #[test]
    fn example2_on_balanced_input() {
        let t = Tdtt::parse(EXAMPLE2).unwrap();
        let input = tree("f(f(f(a,a),a),f(f(a,a),a))");
        let runs = enumerate_runs(&t, &input, Budget::default()).unwrap();
        // Each run picks one child per f until it reaches an a.
        assert_eq!(runs.complete.len(), 6);
        let full: Vec<_> = runs.complete.iter().filter(|(_, s)| *s == tree("h(h(h(b)))")).collect();
        assert_eq!(full.len(), 4);
        let origins: BTreeSet<OriginMapping> = full.iter().map(|(r, _)| run_origin(r)).collect();
        assert_eq!(origins.len(), 4);
        let left = OriginMapping::from_literals(&[("", ""), ("1", "1"), ("11", "11"), ("111", "111")]).unwrap();
        assert!(origins.contains(&left));
        let rel = relation_with_origins(&t, &input, Budget::default()).unwrap();
        let projected: BTreeSet<OutputWithOrigin> =
            runs.complete.iter().map(|(r, s)| (s.clone(), run_origin(r))).collect();
        assert_eq!(rel, projected);
    }

    #[test]
    fn empty_rule_set_gets_stuck() {
        let t = Tdtt::parse("alphabet input { a/0 } alphabet output { b/0 } transducer E { initial q }").unwrap();
        let runs = enumerate_runs(&t, &tree("a"), Budget::default()).unwrap();
        assert!(runs.complete.is_empty());
        assert_eq!(runs.incomplete.len(), 1);
        assert_eq!(runs.incomplete[0].stuck_leaves, vec![Address::root()]);
        assert!(relation_with_origins(&t, &tree("a"), Budget::default()).unwrap().is_empty());
    }

    #[test]
    fn budget_is_reported() {
        let t = Tdtt::parse(EXAMPLE1).unwrap();
        let err = enumerate_runs(&t, &tree("f(g(h(a)),a)"), Budget { steps: Some(2), results: 10 }).unwrap_err();
        assert_eq!(err, TransducerError::BudgetExceeded { budget: 2 });
    }

    #[test]
    fn classification() {
        let e1 = classify(&Tdtt::parse(EXAMPLE1).unwrap());
        assert_eq!(e1, Flags { deterministic: true, linear: true, synchronous: false });
        let e2 = classify(&Tdtt::parse(EXAMPLE2).unwrap());
        assert_eq!(e2, Flags { deterministic: false, linear: true, synchronous: true });
        let empty = classify(&Tdtt::parse("alphabet input { a/0 } alphabet output { b/0 } transducer E { initial q }").unwrap());
        assert_eq!(empty, Flags { deterministic: true, linear: true, synchronous: true });
    }

    #[test]
    fn deterministic_evaluation() {
        let t = Tdtt::parse(EXAMPLE1).unwrap();
        let (s, o) = evaluate_deterministic(&t, &tree("f(g(h(a)),a)")).unwrap().unwrap();
        assert_eq!(s, tree("f(h(a),a)"));
        assert_eq!(o, OriginMapping::from_literals(&[("", ""), ("1", "11"), ("11", "111"), ("2", "2")]).unwrap());
        let partial = Tdtt::parse("alphabet input { g/1, a/0 } alphabet output { b/0 } transducer T { initial q rule q(g(x1)) -> q(x1) }").unwrap();
        assert_eq!(evaluate_deterministic(&partial, &tree("g(a)")).unwrap(), None);
        let nd = Tdtt::parse(EXAMPLE2).unwrap();
        assert_eq!(evaluate_deterministic(&nd, &tree("a")), Err(TransducerError::NotDeterministic));
    }

    #[test]
    fn level_outputs_follow_input_depth() {
        let t = Tdtt::parse(EXAMPLE1).unwrap();
        let runs = enumerate_runs(&t, &tree("f(g(h(a)),a)"), Budget::default()).unwrap();
        let run = &runs.complete[0].0;
        assert_eq!(run.level_output(None), tree("_"));
        assert_eq!(run.level_output(Some(0)), tree("f(_,_)"));
        assert_eq!(run.level_output(Some(1)), tree("f(_,a)"));
        assert_eq!(run.level_output(Some(2)), tree("f(h(_),a)"));
        assert_eq!(run.level_output(Some(3)), tree("f(h(a),a)"));
    }
}
