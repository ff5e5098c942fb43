//! The safety automaton that checks `k`-origin closeness, and its reachable
//! state graph.
//!
//! The automaton runs top-down over traces. A trace labels every input node
//! with its input symbol and, for every thread of a reference machine
//! ("Out") that is active at the node, the piece of output that thread
//! writes there: a context whose variables `x_j` continue the thread at
//! child `j`. States are sets of obligations; each obligation moves on
//! independently, choosing one of its alternatives, and the automaton
//! accepts when every obligation reaches the leaves. A state containing
//! `Err` has priority 1, every other state priority 0.
//!
//! An [`InfoTuple`] obligation tracks one output region produced by both
//! Out and the transducer T under test: Out's unmatched output with its
//! threads, and T's unmatched output with its states. Two kinds occur:
//! Out is at a single thread hole while T may be ahead (possibly with
//! states at remote nodes), or T is at a single state while Out may be
//! ahead. Remote states are simulated on a guessed input neighbourhood, and
//! Out's output in a sibling branch is guessed; both guesses are checked by
//! [`Obligation::InGuess`] and [`Obligation::OutGuess`] along their branch.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::oit::{child_slots, dec, ext_all, ext_dist, extend_out, neighborhood, AnnotatedTree, Ann};
use crate::textio::Rhs;
use crate::transducer::Tdtt;
use crate::trees::{enumerate_trees, variable_name, Symbol, Tree};

use AnnotatedTree::*;

/// One trace letter: an input symbol with its rank and one output piece
/// per active Out thread.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceLabel {
    pub sym: Symbol,
    pub rank: usize,
    pub pieces: Vec<Tree>,
}

impl TraceLabel {
    pub fn new(sym: &str, rank: usize, pieces: Vec<Tree>) -> Self {
        TraceLabel { sym: Arc::from(sym), rank, pieces }
    }

    /// Number of Out threads at each child.
    pub fn child_slot_counts(&self) -> Vec<usize> {
        crate::oit::child_slot_counts(&self.pieces, self.rank)
    }
}

impl fmt::Display for TraceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pieces: Vec<String> = self.pieces.iter().map(Tree::to_string).collect();
        write!(f, "{}[{}]", self.sym, pieces.join("; "))
    }
}

/// Out's and T's unmatched output for one region.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InfoTuple {
    pub out: AnnotatedTree,
    pub tt: AnnotatedTree,
}

impl fmt::Display for InfoTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.out, self.tt)
    }
}

/// A single obligation of the automaton.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Obligation {
    Info(InfoTuple),
    /// Out's thread `slot` writes exactly `tree`, each node no deeper than
    /// its annotation minus one.
    OutGuess { tree: AnnotatedTree, slot: usize },
    /// The input below this node agrees with the neighbourhood.
    InGuess(Arc<Tree>),
    /// T has a successful run from this state on the input below.
    Dom(Symbol),
    Acc,
    Err,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Obligation::Info(i) => write!(f, "{i}"),
            Obligation::OutGuess { tree, slot } => write!(f, "out#{slot}={tree}"),
            Obligation::InGuess(t) => write!(f, "in={t}"),
            Obligation::Dom(q) => write!(f, "dom({q})"),
            Obligation::Acc => write!(f, "acc"),
            Obligation::Err => write!(f, "err"),
        }
    }
}

/// A state of the automaton: a set of obligations.
pub type ArenaState = BTreeSet<Obligation>;

/// Priority of a state: 1 iff it contains `Err`.
pub fn priority(s: &ArenaState) -> u8 {
    u8::from(s.contains(&Obligation::Err))
}

/// One way to continue: the obligations sent to each child.
pub type Alternative = Vec<BTreeSet<Obligation>>;

/// Where the automaton's guesses come from.
pub trait Guesses {
    /// Candidate neighbourhoods (input cut at depth `k - 2`) of child `dir`.
    fn neighborhoods(&self, dir: usize) -> Vec<Arc<Tree>>;
    /// Candidate complete outputs of Out's thread `slot` at child `dir`,
    /// each node annotated with one plus the depth at which it is written.
    fn productions(&self, dir: usize, slot: usize) -> Vec<AnnotatedTree>;
}

/// The automaton for `k`-origin membership in `R_o(T)`.
#[derive(Debug, Clone, Copy)]
pub struct Automaton<'a> {
    pub t: &'a Tdtt,
    pub k: usize,
}

fn union_alts(a: &[Alternative], b: &[Alternative]) -> Vec<Alternative> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.iter().zip(y).map(|(p, q)| p.union(q).cloned().collect()).collect());
        }
    }
    out
}

fn single(rank: usize, dir: usize, ob: Obligation) -> Alternative {
    let mut alt = vec![BTreeSet::new(); rank];
    alt[dir - 1].insert(ob);
    alt
}

fn product<T: Clone>(options: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::new();
        for prefix in &out {
            for o in opts {
                let mut p = prefix.clone();
                p.push(o.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

impl<'a> Automaton<'a> {
    pub fn new(t: &'a Tdtt, k: usize) -> Self {
        Automaton { t, k }
    }

    /// Out's single root thread against T's initial state.
    pub fn initial(&self) -> Obligation {
        Obligation::Info(InfoTuple { out: Hole(0), tt: Bare(Arc::from(self.t.initial())) })
    }

    /// All alternatives of one obligation on a trace letter. No alternative
    /// means the obligation fails here.
    pub fn transitions(&self, ob: &Obligation, label: &TraceLabel, g: &dyn Guesses) -> Vec<Alternative> {
        let r = label.rank;
        match ob {
            Obligation::Acc => vec![vec![BTreeSet::new(); r]],
            Obligation::Err => Vec::new(),
            Obligation::Dom(q) => self
                .t
                .rules_for(q, &label.sym)
                .map(|rule| {
                    let mut alt = vec![BTreeSet::new(); r];
                    for (_, qi, j) in rule.rhs.calls() {
                        alt[j - 1].insert(Obligation::Dom(qi));
                    }
                    alt
                })
                .collect(),
            Obligation::InGuess(nb) => {
                if nb.label != label.sym || nb.children.len() != r {
                    return Vec::new();
                }
                let mut alt = vec![BTreeSet::new(); r];
                for (j, c) in nb.children.iter().enumerate() {
                    if !c.is_gap() {
                        alt[j].insert(Obligation::InGuess(Arc::new(c.clone())));
                    }
                }
                vec![alt]
            }
            Obligation::OutGuess { tree, slot } => self.out_guess(tree, *slot, label).into_iter().collect(),
            Obligation::Info(info) => self.info(info, label, g),
        }
    }

    fn out_guess(&self, tree: &AnnotatedTree, slot: usize, label: &TraceLabel) -> Option<Alternative> {
        let piece = label.pieces.get(slot)?;
        let slots = child_slots(&label.pieces);
        let mut occ = slots[slot].iter();
        let mut alt = vec![BTreeSet::new(); label.rank];
        fn go(
            p: &Tree,
            t: &AnnotatedTree,
            occ: &mut std::slice::Iter<'_, (usize, usize)>,
            alt: &mut Alternative,
        ) -> Option<()> {
            if p.as_var().is_some() {
                let &(dir, slot) = occ.next()?;
                alt[dir - 1].insert(Obligation::OutGuess { tree: dec(t)?, slot });
                return Some(());
            }
            let Sym { sym, kids, .. } = t else { return None };
            if *sym != p.label || kids.len() != p.children.len() {
                return None;
            }
            for (pc, tc) in p.children.iter().zip(kids) {
                go(pc, tc, occ, alt)?;
            }
            Some(())
        }
        go(piece, tree, &mut occ, &mut alt)?;
        Some(alt)
    }

    fn info(&self, info: &InfoTuple, label: &TraceLabel, g: &dyn Guesses) -> Vec<Alternative> {
        let r = label.rank;
        let slots = child_slots(&label.pieces);
        let Some(out) = extend_out(&info.out, &label.pieces, &slots, self.k) else {
            return Vec::new();
        };
        let mut result = BTreeSet::new();
        for tt in ext_all(self.t, &info.tt, &label.sym, self.k) {
            let Some(bindings) = crate::oit::sync(&out, &tt) else { continue };
            let mut alts: Vec<Alternative> = vec![vec![BTreeSet::new(); r]];
            for (o, w) in &bindings {
                let opts = self.binding(o, w, r, g);
                alts = union_alts(&alts, &opts);
                if alts.is_empty() {
                    break;
                }
            }
            result.extend(alts);
        }
        result.into_iter().collect()
    }

    /// Continuations of one frontier pair after synchronization.
    fn binding(&self, o: &AnnotatedTree, w: &AnnotatedTree, r: usize, g: &dyn Guesses) -> Vec<Alternative> {
        match (o, w) {
            (Var { dir, slot }, _) => self.thread_behind(*dir, *slot, w, r, g),
            (Sym { .. }, Call { q, dir }) => self.state_behind(q, *dir, o, r, g),
            (Sym { .. }, Virtual { q, dist, nb }) => {
                let mut out = Vec::new();
                for pairs in self.simulate(q, *dist, nb, o) {
                    let mut alts: Vec<Alternative> = vec![vec![BTreeSet::new(); r]];
                    for (dir, slot, tside) in &pairs {
                        alts = union_alts(&alts, &self.thread_behind(*dir, *slot, tside, r, g));
                        if alts.is_empty() {
                            break;
                        }
                    }
                    out.extend(alts);
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Out's thread continues at child `j`; T's output `w` is ahead of it.
    fn thread_behind(&self, j: usize, slot: usize, w: &AnnotatedTree, r: usize, g: &dyn Guesses) -> Vec<Alternative> {
        let mut remote: Vec<usize> = w
            .leaves()
            .into_iter()
            .filter_map(|l| match l {
                Call { dir, .. } if *dir != j => Some(*dir),
                _ => None,
            })
            .collect();
        remote.sort_unstable();
        remote.dedup();
        if !remote.is_empty() && self.k < 2 {
            return Vec::new();
        }
        let choices: Vec<Vec<Arc<Tree>>> = remote.iter().map(|&i| g.neighborhoods(i)).collect();
        let mut out = Vec::new();
        for nbs in product(&choices) {
            let nb_of: BTreeMap<usize, &Arc<Tree>> = remote.iter().copied().zip(nbs.iter()).collect();
            let Some(moved) = dec(w) else { return Vec::new() };
            let moved = moved.try_map_leaves(&mut |leaf| match leaf {
                Call { q, dir } if *dir == j => Some(Bare(q.clone())),
                Call { q, dir } => Some(Virtual { q: q.clone(), dist: 2, nb: nb_of[dir].clone() }),
                Virtual { q, dist, nb } if *dist < self.k => {
                    Some(Virtual { q: q.clone(), dist: dist + 1, nb: nb.clone() })
                }
                _ => None,
            });
            let Some(moved) = moved else { continue };
            let mut alt = single(r, j, Obligation::Info(InfoTuple { out: Hole(slot), tt: moved }));
            for (i, nb) in &nb_of {
                alt[i - 1].insert(Obligation::InGuess((*nb).clone()));
            }
            out.push(alt);
        }
        out
    }

    /// T's state `q` continues at child `i`; Out's output `o` is ahead of it.
    fn state_behind(&self, q: &Symbol, i: usize, o: &AnnotatedTree, r: usize, g: &dyn Guesses) -> Vec<Alternative> {
        let Some(o) = dec(o) else { return Vec::new() };
        let remote: Vec<(usize, usize)> = o
            .leaves()
            .into_iter()
            .filter_map(|l| match l {
                Var { dir, slot } if *dir != i => Some((*dir, *slot)),
                _ => None,
            })
            .collect();
        if !remote.is_empty() && self.k < 2 {
            return Vec::new();
        }
        let k = self.k as Ann;
        let choices: Vec<Vec<AnnotatedTree>> = remote
            .iter()
            .map(|&(j, s)| g.productions(j, s).into_iter().filter(|p| max_ann(p) < k).collect())
            .collect();
        let mut out = Vec::new();
        for prods in product(&choices) {
            let by_thread: BTreeMap<(usize, usize), &AnnotatedTree> = remote.iter().copied().zip(prods.iter()).collect();
            let filled = o.try_map_leaves(&mut |leaf| match leaf {
                Var { dir, slot } if *dir == i => Some(Hole(*slot)),
                Var { dir, slot } => by_thread[&(*dir, *slot)].try_map_anns(&|b| Some(k - b)),
                _ => None,
            });
            let Some(filled) = filled else { continue };
            let mut alt = single(r, i, Obligation::Info(InfoTuple { out: filled, tt: Bare(q.clone()) }));
            for ((dir, slot), p) in &by_thread {
                alt[dir - 1].insert(Obligation::OutGuess { tree: (*p).clone(), slot: *slot });
            }
            out.push(alt);
        }
        out
    }

    /// Runs a remote state of T on its neighbourhood until it has matched
    /// Out's output `o`. Each result lists, per Out variable reached, the
    /// direction, slot and T's output still ahead of that thread.
    fn simulate(&self, q: &str, dist: usize, nb: &Tree, o: &AnnotatedTree) -> Vec<Vec<(usize, usize, AnnotatedTree)>> {
        let mut out = Vec::new();
        for e in ext_dist(self.t, q, dist, nb, self.k) {
            out.extend(self.match_remote(&e, o));
        }
        out
    }

    fn match_remote(&self, e: &AnnotatedTree, o: &AnnotatedTree) -> Vec<Vec<(usize, usize, AnnotatedTree)>> {
        match (e, o) {
            (_, Var { dir, slot }) => vec![vec![(*dir, *slot, e.clone())]],
            (Sym { sym: s1, kids: k1, .. }, Sym { sym: s2, kids: k2, .. }) => {
                if s1 != s2 || k1.len() != k2.len() {
                    return Vec::new();
                }
                let parts: Vec<Vec<Vec<(usize, usize, AnnotatedTree)>>> =
                    k1.iter().zip(k2).map(|(a, b)| self.match_remote(a, b)).collect();
                product(&parts).into_iter().map(|v| v.concat()).collect()
            }
            (Virtual { q, dist, nb }, Sym { .. }) => self.simulate(q, *dist, nb, o),
            _ => Vec::new(),
        }
    }

    /// Alternatives of a whole state: every obligation picks one of its
    /// alternatives. `None` if some obligation has none.
    pub fn state_transitions(&self, s: &ArenaState, label: &TraceLabel, g: &dyn Guesses) -> Option<Vec<Vec<ArenaState>>> {
        let mut alts: Vec<Alternative> = vec![vec![BTreeSet::new(); label.rank]];
        for ob in s {
            let opts = self.transitions(ob, label, g);
            if opts.is_empty() {
                return None;
            }
            alts = union_alts(&alts, &opts);
        }
        let set: BTreeSet<Alternative> = alts.into_iter().collect();
        Some(set.into_iter().collect())
    }
}

fn max_ann(t: &AnnotatedTree) -> Ann {
    match t {
        Sym { ann, kids, .. } => kids.iter().map(max_ann).fold(*ann, Ann::max),
        _ => 0,
    }
}

/// Guesses read off a known trace: the true neighbourhoods and the true
/// outputs of Out's threads.
pub struct FixedGuesses {
    pub neighborhoods: Vec<Option<Arc<Tree>>>,
    pub productions: BTreeMap<(usize, usize), AnnotatedTree>,
}

impl Guesses for FixedGuesses {
    fn neighborhoods(&self, dir: usize) -> Vec<Arc<Tree>> {
        self.neighborhoods.get(dir - 1).cloned().flatten().into_iter().collect()
    }

    fn productions(&self, dir: usize, slot: usize) -> Vec<AnnotatedTree> {
        self.productions.get(&(dir, slot)).cloned().into_iter().collect()
    }
}

/// Guesses drawn from fixed universes, independent of position.
pub struct UniversalGuesses {
    pub neighborhoods: Vec<Arc<Tree>>,
    pub productions: Vec<AnnotatedTree>,
}

impl Guesses for UniversalGuesses {
    fn neighborhoods(&self, _dir: usize) -> Vec<Arc<Tree>> {
        self.neighborhoods.clone()
    }

    fn productions(&self, _dir: usize, _slot: usize) -> Vec<AnnotatedTree> {
        self.productions.clone()
    }
}

impl UniversalGuesses {
    /// Every neighbourhood of height `k - 2` over T's input alphabet, and
    /// every output T can write from one of its states within depth `k - 2`
    /// (including subtrees of such outputs), annotated by depth.
    pub fn for_transducer(t: &Tdtt, k: usize, cap: usize) -> Self {
        if k < 2 {
            return UniversalGuesses { neighborhoods: Vec::new(), productions: Vec::new() };
        }
        let d = k - 2;
        let neighborhoods: BTreeSet<Tree> = enumerate_trees(t.input(), d + 1)
            .into_iter()
            .map(|tr| neighborhood(&tr, d))
            .collect();
        let mut productions = BTreeSet::new();
        for q in t.states() {
            for p in producible(t, q, d, cap) {
                collect_subtrees(&p, &mut productions);
            }
        }
        UniversalGuesses {
            neighborhoods: neighborhoods.into_iter().take(cap).map(Arc::new).collect(),
            productions: productions.into_iter().take(cap).collect(),
        }
    }
}

fn collect_subtrees(t: &AnnotatedTree, out: &mut BTreeSet<AnnotatedTree>) {
    if let Sym { kids, .. } = t {
        // A subtree written deeper is shifted so that its root depth is 0.
        let base = t.ann().unwrap_or(1) - 1;
        if let Some(shifted) = t.try_map_anns(&|a| Some(a - base)) {
            out.insert(shifted);
        }
        kids.iter().for_each(|k| collect_subtrees(k, out));
    }
}

/// Complete outputs T can write from state `q` while reading at most `depth`
/// levels of input, each node annotated with one plus its input depth.
/// Copies of one input subtree are treated independently.
pub fn producible(t: &Tdtt, q: &str, depth: usize, cap: usize) -> BTreeSet<AnnotatedTree> {
    fn go(t: &Tdtt, q: &str, level: usize, depth: usize, cap: usize) -> BTreeSet<AnnotatedTree> {
        let mut out = BTreeSet::new();
        for (f, _) in t.input().iter() {
            for rule in t.rules_for(q, f) {
                let calls = rule.rhs.calls();
                if !calls.is_empty() && level == depth {
                    continue;
                }
                let subs: Vec<Vec<AnnotatedTree>> = calls
                    .iter()
                    .map(|(_, qi, _)| go(t, qi, level + 1, depth, cap).into_iter().collect())
                    .collect();
                for choice in product(&subs) {
                    let mut it = choice.into_iter();
                    fn build(r: &Rhs, ann: Ann, it: &mut std::vec::IntoIter<AnnotatedTree>) -> AnnotatedTree {
                        match r {
                            Rhs::Out { sym, children } => Sym {
                                sym: sym.clone(),
                                ann,
                                kids: children.iter().map(|c| build(c, ann, it)).collect(),
                            },
                            Rhs::Call { .. } => it.next().expect("one output per call"),
                        }
                    }
                    out.insert(build(&rule.rhs, level as Ann + 1, &mut it));
                    if out.len() >= cap {
                        return out;
                    }
                }
            }
        }
        out
    }
    go(t, q, 0, depth, cap)
}

/// The bound `M + 2kM` on the height of output choices.
pub fn choice_height(t: &Tdtt, k: usize) -> usize {
    t.big_m + 2 * k * t.big_m
}

/// Output choices for an input symbol of rank `rank`: trees over the
/// output alphabet and `x_1..x_rank` of height at most `M + 2kM`, in order
/// of height and then literal. Variables may repeat. Produced level by
/// level on demand.
pub struct OutputChoices {
    output: Vec<(Symbol, usize)>,
    max_height: usize,
    /// Trees of each exact height produced so far.
    levels: Vec<Vec<Tree>>,
    current: std::vec::IntoIter<Tree>,
}

impl OutputChoices {
    pub fn new(t: &Tdtt, k: usize, rank: usize) -> Self {
        Self::with_height(t, rank, choice_height(t, k))
    }

    pub fn with_height(t: &Tdtt, rank: usize, max_height: usize) -> Self {
        let mut output: Vec<(Symbol, usize)> = t.output().iter().map(|(s, r)| (Arc::from(s), r)).collect();
        for j in 1..=rank {
            output.push((Arc::from(variable_name(j).as_str()), 0));
        }
        let mut base: Vec<Tree> = output
            .iter()
            .filter(|(_, r)| *r == 0)
            .map(|(s, _)| Tree::with_symbol(s.clone(), Vec::new()))
            .collect();
        base.sort_by_key(Tree::to_string);
        OutputChoices { output, max_height, levels: vec![base.clone()], current: base.into_iter() }
    }

    fn next_level(&mut self) -> Option<Vec<Tree>> {
        let h = self.levels.len();
        if h > self.max_height {
            return None;
        }
        let below: Vec<Tree> = self.levels.iter().flatten().cloned().collect();
        let top = &self.levels[h - 1];
        let mut fresh = Vec::new();
        for (s, r) in &self.output {
            if *r == 0 {
                continue;
            }
            for kids in product(&vec![below.clone(); *r]) {
                if kids.iter().any(|c| top.contains(c)) {
                    fresh.push(Tree::with_symbol(s.clone(), kids));
                }
            }
        }
        fresh.sort_by_key(Tree::to_string);
        self.levels.push(fresh.clone());
        Some(fresh)
    }
}

impl Iterator for OutputChoices {
    type Item = Tree;
    fn next(&mut self) -> Option<Tree> {
        loop {
            if let Some(t) = self.current.next() {
                return Some(t);
            }
            let level = self.next_level()?;
            if level.is_empty() {
                return None;
            }
            self.current = level.into_iter();
        }
    }
}

/// Tuples of `simultaneous` output choices, ordered by the largest index
/// used, so that every prefix of the enumeration is finite.
pub fn output_choice_tuples(t: &Tdtt, k: usize, rank: usize, simultaneous: usize) -> impl Iterator<Item = Vec<Tree>> {
    let mut source = OutputChoices::new(t, k, rank);
    let mut seen: Vec<Tree> = Vec::new();
    let mut pending: VecDeque<Vec<Tree>> = VecDeque::new();
    let mut done = false;
    if simultaneous == 0 {
        pending.push_back(Vec::new());
        done = true;
    }
    std::iter::from_fn(move || loop {
        if let Some(t) = pending.pop_front() {
            return Some(t);
        }
        if done {
            return None;
        }
        let Some(next) = source.next() else {
            done = true;
            continue;
        };
        seen.push(next);
        let last = seen.len() - 1;
        // All tuples whose largest index is `last`.
        for idx in product(&vec![(0..=last).collect::<Vec<_>>(); simultaneous]) {
            if idx.contains(&last) {
                pending.push_back(idx.iter().map(|&i| seen[i].clone()).collect());
            }
        }
    })
}

/// Limits for arena exploration.
#[derive(Debug, Clone, Copy)]
pub struct ArenaCaps {
    pub max_states: usize,
    /// Output choices considered per thread and input symbol.
    pub max_choices: usize,
}

impl Default for ArenaCaps {
    fn default() -> Self {
        ArenaCaps { max_states: 2_000_000, max_choices: 64 }
    }
}

/// An explored part of the automaton's state graph.
#[derive(Debug, Clone, Default)]
pub struct ArenaGraph {
    pub states: Vec<ArenaState>,
    /// (from, letter, direction, to)
    pub edges: Vec<(usize, TraceLabel, usize, usize)>,
    /// Exploration stopped at a cap.
    pub exceeded: bool,
}

impl ArenaGraph {
    pub fn err_states(&self) -> usize {
        self.states.iter().filter(|s| priority(s) == 1).count()
    }

    /// Graphviz rendering of at most `limit` states.
    pub fn to_dot(&self, limit: usize) -> String {
        let mut out = String::from("digraph arena {\n  node [shape=box, fontsize=10];\n");
        for (i, s) in self.states.iter().enumerate().take(limit) {
            let body: Vec<String> = s.iter().map(Obligation::to_string).collect();
            let color = if priority(s) == 1 { ", color=red" } else { "" };
            out.push_str(&format!("  s{i} [label=\"{{{}}}\"{color}];\n", escape(&body.join(", "))));
        }
        for (from, label, dir, to) in &self.edges {
            if *from < limit && *to < limit {
                out.push_str(&format!("  s{from} -> s{to} [label=\"{} / {dir}\"];\n", escape(&label.to_string())));
            }
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Number of Out threads an obligation set refers to.
fn slots_used(s: &ArenaState) -> usize {
    let mut n = 0;
    for ob in s {
        match ob {
            Obligation::Info(i) => {
                for l in i.out.leaves() {
                    if let Hole(slot) = l {
                        n = n.max(slot + 1);
                    }
                }
            }
            Obligation::OutGuess { slot, .. } => n = n.max(slot + 1),
            _ => {}
        }
    }
    n
}

/// Explores the states reachable from the initial state when Out may pick
/// any output choices (up to `caps.max_choices` per thread) and guesses come
/// from [`UniversalGuesses`].
pub fn reachable_arena(t: &Tdtt, k: usize, caps: ArenaCaps) -> ArenaGraph {
    let aut = Automaton::new(t, k);
    let guesses = UniversalGuesses::for_transducer(t, k, caps.max_choices);
    let mut graph = ArenaGraph::default();
    let mut index: BTreeMap<ArenaState, usize> = BTreeMap::new();
    let init: ArenaState = [aut.initial()].into_iter().collect();
    index.insert(init.clone(), 0);
    graph.states.push(init);
    let mut queue = VecDeque::from([0usize]);
    let err: ArenaState = [Obligation::Err].into_iter().collect();
    let mut menus: BTreeMap<(usize, usize), Vec<Vec<Tree>>> = BTreeMap::new();
    while let Some(id) = queue.pop_front() {
        let state = graph.states[id].clone();
        if priority(&state) == 1 || state.is_empty() {
            continue;
        }
        let n = slots_used(&state);
        for (f, rank) in t.input().iter() {
            let menu = menus
                .entry((rank, n))
                .or_insert_with(|| output_choice_tuples(t, k, rank, n).take(caps.max_choices).collect())
                .clone();
            for pieces in menu {
                let label = TraceLabel::new(f, rank, pieces);
                let succ = aut
                    .state_transitions(&state, &label, &guesses)
                    .unwrap_or_else(|| vec![vec![err.clone(); rank]]);
                for alt in succ {
                    for (j, child) in alt.into_iter().enumerate() {
                        let next = match index.get(&child) {
                            Some(&i) => i,
                            None => {
                                if graph.states.len() >= caps.max_states {
                                    graph.exceeded = true;
                                    return graph;
                                }
                                let i = graph.states.len();
                                index.insert(child.clone(), i);
                                graph.states.push(child);
                                queue.push_back(i);
                                i
                            }
                        };
                        graph.edges.push((id, label.clone(), j + 1, next));
                    }
                }
            }
        }
    }
    graph
}
