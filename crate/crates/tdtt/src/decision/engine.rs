//! Bottom-up summaries of trace subtrees.
//!
//! The automaton's verdict on a trace subtree depends only on a finite
//! summary, its type: the number of Out threads entering it, the input
//! neighbourhood and the short thread productions its parent may guess, the
//! set of obligations it satisfies, and the states of the transducer that
//! have a run on its input. Types of a node follow from its letter and the
//! types of its children, so languages of traces can be explored over types
//! instead of traces.
//!
//! The obligation universe grows on demand. An evaluation that meets an
//! obligation outside the universe records it as missing; callers then add
//! the missing obligations and start over, so that every type they finally
//! compare is exact on every obligation the automaton can reach.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::arena::{Automaton, Guesses, Obligation, TraceLabel};
use crate::oit::{neighborhood, AnnotatedTree, Ann};
use crate::trees::{Symbol, Tree};

use super::trace::combine_productions;

/// The summary of a trace subtree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeData {
    /// Number of Out threads entering the subtree.
    pub n: usize,
    /// The input below the root, cut at depth `k - 2` (only for `k ≥ 2`).
    pub nb: Option<Arc<Tree>>,
    /// Per thread, its output if written within depth `k - 2` (only for
    /// `k ≥ 2`).
    pub prods: Vec<Option<AnnotatedTree>>,
    /// Satisfied obligations, as universe indices in increasing order.
    pub sat: Vec<u32>,
    /// States of the transducer with a run on the input subtree.
    pub dom: Vec<Symbol>,
}

/// A guess the automaton consulted: a child's neighbourhood, or the
/// production of one of its threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Query {
    Neighborhood(usize),
    Production(usize, usize),
}

fn neighborhood_of(kids: &[&TypeData], dir: usize) -> Option<Arc<Tree>> {
    kids[dir - 1].nb.clone()
}

fn production_of(kids: &[&TypeData], dir: usize, slot: usize) -> Option<AnnotatedTree> {
    kids[dir - 1].prods.get(slot).cloned().flatten()
}

/// The children's guesses, recording every query and its answer.
struct ChildGuesses<'a> {
    kids: &'a [&'a TypeData],
    log: RefCell<Vec<(Query, Answer)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Answer {
    Neighborhood(Option<Arc<Tree>>),
    Production(Option<AnnotatedTree>),
}

impl Answer {
    fn of(q: &Query, kids: &[&TypeData]) -> Answer {
        match *q {
            Query::Neighborhood(dir) => Answer::Neighborhood(neighborhood_of(kids, dir)),
            Query::Production(dir, slot) => Answer::Production(production_of(kids, dir, slot)),
        }
    }

    fn matches(&self, q: &Query, kids: &[&TypeData]) -> bool {
        match (self, *q) {
            (Answer::Neighborhood(a), Query::Neighborhood(dir)) => a.as_deref() == kids[dir - 1].nb.as_deref(),
            (Answer::Production(a), Query::Production(dir, slot)) => {
                a.as_ref() == kids[dir - 1].prods.get(slot).and_then(Option::as_ref)
            }
            _ => false,
        }
    }
}

impl Guesses for ChildGuesses<'_> {
    fn neighborhoods(&self, dir: usize) -> Vec<Arc<Tree>> {
        let q = Query::Neighborhood(dir);
        self.log.borrow_mut().push((q, Answer::of(&q, self.kids)));
        neighborhood_of(self.kids, dir).into_iter().collect()
    }

    fn productions(&self, dir: usize, slot: usize) -> Vec<AnnotatedTree> {
        let q = Query::Production(dir, slot);
        self.log.borrow_mut().push((q, Answer::of(&q, self.kids)));
        production_of(self.kids, dir, slot).into_iter().collect()
    }
}

/// Transitions of one obligation at one letter, as obligation ids per
/// alternative and child. Alternatives that fail outright are dropped;
/// obligations that always hold are omitted.
type Compiled = Vec<Vec<Vec<u32>>>;

/// A compiled transition together with the guesses it consulted. It
/// applies to every node whose children answer those guesses alike.
struct Memo {
    queries: Vec<(Query, Answer)>,
    compiled: Compiled,
}

/// Evaluates types for one transducer and distance bound.
pub struct Engine<'a> {
    pub automaton: Automaton<'a>,
    ids: BTreeMap<Obligation, u32>,
    obs: Vec<Obligation>,
    /// Threads each obligation needs at its node.
    needs: Vec<usize>,
    missing: BTreeSet<Obligation>,
    track_dom: bool,
    /// Per letter and obligation id, the compiled transitions met so far.
    memos: HashMap<TraceLabel, Vec<Vec<Memo>>>,
}

fn threads_needed(ob: &Obligation) -> usize {
    match ob {
        Obligation::Info(i) => i
            .out
            .leaves()
            .into_iter()
            .filter_map(|l| match l {
                AnnotatedTree::Hole(s) => Some(s + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0),
        _ => 0,
    }
}

impl<'a> Engine<'a> {
    pub fn new(automaton: Automaton<'a>, track_dom: bool) -> Self {
        let mut e = Engine {
            automaton,
            ids: BTreeMap::new(),
            obs: Vec::new(),
            needs: Vec::new(),
            missing: BTreeSet::new(),
            track_dom,
            memos: HashMap::new(),
        };
        e.add(automaton.initial());
        e
    }

    fn add(&mut self, ob: Obligation) {
        if !self.ids.contains_key(&ob) {
            self.ids.insert(ob.clone(), self.obs.len() as u32);
            self.needs.push(threads_needed(&ob));
            self.obs.push(ob);
        }
    }

    pub fn universe_size(&self) -> usize {
        self.obs.len()
    }

    pub fn id(&self, ob: &Obligation) -> Option<u32> {
        self.ids.get(ob).copied()
    }

    pub fn initial_id(&self) -> u32 {
        0
    }

    pub fn has_missing(&self) -> bool {
        !self.missing.is_empty()
    }

    /// Adds the missing obligations to the universe. Returns how many.
    pub fn absorb_missing(&mut self) -> usize {
        let missing = std::mem::take(&mut self.missing);
        let n = missing.len();
        missing.into_iter().for_each(|ob| self.add(ob));
        n
    }

    /// The type of a node with letter `label` and children of types `kids`.
    pub fn evaluate(&mut self, label: &TraceLabel, kids: &[&TypeData]) -> TypeData {
        let k = self.automaton.k;
        let n = label.pieces.len();
        let (nb, prods) = if k >= 2 {
            let cut: Vec<Tree> = kids.iter().map(|c| c.nb.as_deref().cloned().unwrap_or_else(Tree::gap)).collect();
            let nb = Arc::new(neighborhood(&Tree::with_symbol(label.sym.clone(), cut), k - 2));
            let kid_prods: Vec<Vec<Option<AnnotatedTree>>> = kids.iter().map(|c| c.prods.clone()).collect();
            let prods = combine_productions(&label.pieces, &kid_prods, Some((k - 1) as Ann));
            (Some(nb), prods)
        } else {
            (None, Vec::new())
        };
        let dom = if self.track_dom { self.dom(label, kids) } else { Vec::new() };
        let mut memos = self.memos.remove(label).unwrap_or_default();
        memos.resize_with(self.obs.len(), Vec::new);
        let mut sat = Vec::new();
        for (id, memo) in memos.iter_mut().enumerate() {
            if self.needs[id] > n {
                continue;
            }
            let holds = match self.compiled(id, label, kids, memo) {
                Some(alts) => alts
                    .iter()
                    .any(|alt| alt.iter().enumerate().all(|(j, ids)| ids.iter().all(|i| kids[j].sat.binary_search(i).is_ok()))),
                None => false,
            };
            if holds {
                sat.push(id as u32);
            }
        }
        self.memos.insert(label.clone(), memos);
        TypeData { n, nb, prods, sat, dom }
    }

    /// The compiled transitions of obligation `id` at `label` over `kids`.
    /// `None` if they reach an obligation outside the universe, which is
    /// then recorded as missing.
    fn compiled<'m>(
        &mut self,
        id: usize,
        label: &TraceLabel,
        kids: &[&TypeData],
        memos: &'m mut Vec<Memo>,
    ) -> Option<&'m Compiled> {
        if let Some(i) = memos.iter().position(|m| m.queries.iter().all(|(q, a)| a.matches(q, kids))) {
            return Some(&memos[i].compiled);
        }
        let guesses = ChildGuesses { kids, log: RefCell::new(Vec::new()) };
        let alts = self.automaton.transitions(&self.obs[id], label, &guesses);
        let mut compiled = Vec::new();
        let mut complete = true;
        'alts: for alt in alts {
            let mut per_child = Vec::with_capacity(alt.len());
            for obs in alt {
                let mut ids = Vec::new();
                for o in obs {
                    match o {
                        Obligation::Acc | Obligation::InGuess(_) | Obligation::OutGuess { .. } => {}
                        Obligation::Err => continue 'alts,
                        other => match self.ids.get(&other) {
                            Some(&i) => ids.push(i),
                            None => {
                                self.missing.insert(other);
                                complete = false;
                            }
                        },
                    }
                }
                per_child.push(ids);
            }
            compiled.push(per_child);
        }
        if !complete {
            return None;
        }
        memos.push(Memo { queries: guesses.log.into_inner(), compiled });
        memos.last().map(|m| &m.compiled)
    }

    fn dom(&self, label: &TraceLabel, kids: &[&TypeData]) -> Vec<Symbol> {
        let t = self.automaton.t;
        t.states()
            .filter(|q| {
                t.rules_for(q, &label.sym)
                    .any(|r| r.rhs.calls().iter().all(|(_, qi, j)| kids[j - 1].dom.contains(qi)))
            })
            .map(Symbol::from)
            .collect()
    }

    pub fn satisfies(&self, data: &TypeData, ob: &Obligation) -> bool {
        self.id(ob).is_some_and(|i| data.sat.binary_search(&i).is_ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transducer::tests::EXAMPLE2;
    use crate::transducer::Tdtt;

    fn tree(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    #[test]
    fn leaf_and_parent_types() {
        let t = Tdtt::parse(EXAMPLE2).unwrap();
        let mut e = Engine::new(Automaton::new(&t, 0), true);
        let leaf_b = e.evaluate(&TraceLabel::new("a", 0, vec![tree("b")]), &[]);
        assert_eq!(leaf_b.sat, vec![0]);
        assert_eq!(leaf_b.dom, vec![Symbol::from("q")]);
        let silent = e.evaluate(&TraceLabel::new("a", 0, vec![]), &[]);
        assert!(silent.sat.is_empty());
        let top = e.evaluate(&TraceLabel::new("f", 2, vec![tree("h(x1)")]), &[&leaf_b, &silent]);
        assert!(top.sat.contains(&0));
        assert!(!e.has_missing());
        let wrong = e.evaluate(&TraceLabel::new("f", 2, vec![tree("h(h(x1))")]), &[&leaf_b, &silent]);
        assert!(!wrong.sat.contains(&0));
    }
}

