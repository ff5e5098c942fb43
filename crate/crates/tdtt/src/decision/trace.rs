//! Traces: input trees annotated with the output each origin node writes.
//!
//! Every output node of a triple `(t, s, o)` is written at its origin. At an
//! input node `v`, each output position still pending at `v` is a thread;
//! its piece is the part of the output whose origin is `v`, and each place
//! where the output continues below `v` becomes a variable `x_j` for the
//! child `j` the continuation descends into. Threads at a child are
//! numbered by their parent's slot and then in pre-order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::arena::{Automaton, Guesses, Obligation, TraceLabel};
use crate::measures::TripleWithOrigin;
use crate::oit::{child_slots, neighborhood, AnnotatedTree, Ann};
use crate::transducer::{OriginMapping, Tdtt};
use crate::trees::{Address, Tree};

use super::DecisionError;

/// A finite trace: one [`TraceLabel`] per input node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraceTree {
    pub label: TraceLabel,
    pub children: Vec<TraceTree>,
}

impl TraceTree {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(TraceTree::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    /// The input tree.
    pub fn input(&self) -> Tree {
        Tree::with_symbol(self.label.sym.clone(), self.children.iter().map(TraceTree::input).collect())
    }
}

impl fmt::Display for TraceTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            write!(f, "(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Encodes a triple as its canonical trace. Fails if the origin of some
/// output node is not below the origin of its parent.
pub fn encode_triple(x: &TripleWithOrigin) -> Result<TraceTree, DecisionError> {
    if !x.origin.is_valid_for(&x.input, &x.output) {
        return Err(DecisionError::InvalidTriple(x.to_string()));
    }
    encode_at(x, &x.input, &Address::root(), &[Address::root()])
}

fn encode_at(x: &TripleWithOrigin, t: &Tree, v: &Address, threads: &[Address]) -> Result<TraceTree, DecisionError> {
    let mut below: Vec<Vec<Address>> = vec![Vec::new(); t.children.len()];
    let mut pieces = Vec::with_capacity(threads.len());
    for p in threads {
        pieces.push(piece_at(x, v, p, &mut below)?);
    }
    let children = t
        .children
        .iter()
        .zip(&below)
        .enumerate()
        .map(|(i, (c, th))| encode_at(x, c, &v.child(i + 1), th))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TraceTree { label: TraceLabel { sym: t.label.clone(), rank: t.children.len(), pieces }, children })
}

fn piece_at(x: &TripleWithOrigin, v: &Address, p: &Address, below: &mut [Vec<Address>]) -> Result<Tree, DecisionError> {
    let origin = x.origin.get(p).expect("origin is total");
    if !v.is_prefix_of(origin) {
        return Err(DecisionError::NonHierarchical { node: p.clone(), origin: origin.clone(), above: v.clone() });
    }
    if origin == v {
        let node = x.output.get(p).expect("output node");
        let kids = (1..=node.children.len())
            .map(|i| piece_at(x, v, &p.child(i), below))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Tree::with_symbol(node.label.clone(), kids));
    }
    let j = origin.0[v.len()];
    below[j - 1].push(p.clone());
    Ok(Tree::var(j))
}

/// Decodes a trace back into its triple.
pub fn decode_trace(tr: &TraceTree) -> Result<TripleWithOrigin, DecisionError> {
    if tr.label.pieces.len() != 1 {
        return Err(DecisionError::MalformedTrace(format!("the root carries {} threads", tr.label.pieces.len())));
    }
    let mut origin = BTreeMap::new();
    let output = decode_slot(tr, &Address::root(), 0, &Address::root(), &mut origin)?;
    Ok(TripleWithOrigin { input: tr.input(), output, origin: OriginMapping(origin) })
}

fn decode_slot(
    tr: &TraceTree,
    v: &Address,
    slot: usize,
    p: &Address,
    origin: &mut BTreeMap<Address, Address>,
) -> Result<Tree, DecisionError> {
    if tr.children.len() != tr.label.rank {
        return Err(DecisionError::MalformedTrace(format!("{} has the wrong number of children", tr.label.sym)));
    }
    let slots = child_slots(&tr.label.pieces);
    let piece = &tr.label.pieces[slot];
    let mut occ = slots[slot].iter();
    fn go(
        tr: &TraceTree,
        v: &Address,
        piece: &Tree,
        p: &Address,
        occ: &mut std::slice::Iter<'_, (usize, usize)>,
        origin: &mut BTreeMap<Address, Address>,
    ) -> Result<Tree, DecisionError> {
        if piece.as_var().is_some() {
            let &(dir, s) = occ.next().expect("one slot per variable");
            let child = tr
                .children
                .get(dir - 1)
                .ok_or_else(|| DecisionError::MalformedTrace(format!("variable x{dir} at {}", tr.label.sym)))?;
            let count = child.label.pieces.len();
            if s >= count {
                return Err(DecisionError::MalformedTrace(format!("child {dir} of {} lacks thread {s}", tr.label.sym)));
            }
            return decode_slot(child, &v.child(dir), s, p, origin);
        }
        origin.insert(p.clone(), v.clone());
        let kids = piece
            .children
            .iter()
            .enumerate()
            .map(|(i, c)| go(tr, v, c, &p.child(i + 1), occ, origin))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Tree::with_symbol(piece.label.clone(), kids))
    }
    go(tr, v, piece, p, &mut occ, origin)
}

/// Output written by each thread of a trace node below it, each node
/// annotated with one plus its depth below the node.
pub fn productions(tr: &TraceTree) -> Vec<AnnotatedTree> {
    let kids: Vec<Vec<AnnotatedTree>> = tr.children.iter().map(productions).collect();
    combine_productions(&tr.label.pieces, &kids.iter().map(|v| v.iter().map(|p| Some(p.clone())).collect()).collect::<Vec<Vec<_>>>(), None)
        .into_iter()
        .map(|p| p.expect("complete productions"))
        .collect()
}

/// Productions of the threads at a node from the productions at its
/// children. With a `limit`, productions with a node annotated above it are
/// replaced by `None`.
pub fn combine_productions(
    pieces: &[Tree],
    kids: &[Vec<Option<AnnotatedTree>>],
    limit: Option<Ann>,
) -> Vec<Option<AnnotatedTree>> {
    let slots = child_slots(pieces);
    pieces
        .iter()
        .zip(&slots)
        .map(|(piece, occ)| {
            let mut occ = occ.iter();
            fn go(
                p: &Tree,
                occ: &mut std::slice::Iter<'_, (usize, usize)>,
                kids: &[Vec<Option<AnnotatedTree>>],
                limit: Option<Ann>,
            ) -> Option<AnnotatedTree> {
                if p.as_var().is_some() {
                    let &(dir, s) = occ.next()?;
                    let below = kids.get(dir - 1)?.get(s)?.as_ref()?;
                    return below.try_map_anns(&|a| match limit {
                        Some(l) if a + 1 > l => None,
                        _ => Some(a + 1),
                    });
                }
                let kids_out = p.children.iter().map(|c| go(c, occ, kids, limit)).collect::<Option<Vec<_>>>()?;
                Some(AnnotatedTree::Sym { sym: p.label.clone(), ann: 1, kids: kids_out })
            }
            go(piece, &mut occ, kids, limit)
        })
        .collect()
}

struct NodeInfo {
    label: TraceLabel,
    children: Vec<usize>,
    nb: Option<Arc<Tree>>,
    prods: Vec<AnnotatedTree>,
}

struct NodeGuesses<'a> {
    nodes: &'a [NodeInfo],
    id: usize,
}

impl Guesses for NodeGuesses<'_> {
    fn neighborhoods(&self, dir: usize) -> Vec<Arc<Tree>> {
        let c = self.nodes[self.id].children[dir - 1];
        self.nodes[c].nb.clone().into_iter().collect()
    }

    fn productions(&self, dir: usize, slot: usize) -> Vec<AnnotatedTree> {
        let c = self.nodes[self.id].children[dir - 1];
        self.nodes[c].prods.get(slot).cloned().into_iter().collect()
    }
}

/// The safety automaton of a transducer read as an acceptor of finite
/// traces: a trace is accepted iff every obligation can be discharged at
/// the leaves without reaching `Err`. Guesses are answered by the trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceAutomaton<'a> {
    pub automaton: Automaton<'a>,
}

/// Builds the trace acceptor for `t` at distance bound `k`.
pub fn trace_automaton(t: &Tdtt, k: usize) -> TraceAutomaton<'_> {
    TraceAutomaton { automaton: Automaton::new(t, k) }
}

impl TraceAutomaton<'_> {
    pub fn accepts(&self, tr: &TraceTree) -> bool {
        let mut nodes = Vec::new();
        self.flatten(tr, &mut nodes);
        let root = nodes.len() - 1;
        let mut memo = BTreeMap::new();
        self.holds(&self.automaton.initial(), root, &nodes, &mut memo)
    }

    fn flatten(&self, tr: &TraceTree, nodes: &mut Vec<NodeInfo>) -> usize {
        let children: Vec<usize> = tr.children.iter().map(|c| self.flatten(c, nodes)).collect();
        let k = self.automaton.k;
        let nb = (k >= 2).then(|| Arc::new(neighborhood(&tr.input(), k - 2)));
        let kid_prods: Vec<Vec<Option<AnnotatedTree>>> =
            children.iter().map(|&c| nodes[c].prods.iter().cloned().map(Some).collect()).collect();
        let prods = combine_productions(&tr.label.pieces, &kid_prods, None)
            .into_iter()
            .map(|p| p.expect("complete productions"))
            .collect();
        nodes.push(NodeInfo { label: tr.label.clone(), children, nb, prods });
        nodes.len() - 1
    }

    fn holds(
        &self,
        ob: &Obligation,
        id: usize,
        nodes: &[NodeInfo],
        memo: &mut BTreeMap<(Obligation, usize), bool>,
    ) -> bool {
        if let Some(&b) = memo.get(&(ob.clone(), id)) {
            return b;
        }
        let node = &nodes[id];
        let guesses = NodeGuesses { nodes, id };
        let alts = self.automaton.transitions(ob, &node.label, &guesses);
        let dedup: BTreeSet<_> = alts.into_iter().collect();
        let result = dedup.iter().any(|alt| {
            alt.iter()
                .enumerate()
                .all(|(j, obs)| obs.iter().all(|o| self.holds(o, node.children[j], nodes, memo)))
        });
        memo.insert((ob.clone(), id), result);
        result
    }
}

/// Whether the safety automaton of `t` accepts the trace of `x`, that is,
/// whether `x` is `k`-origin close to some run of `t`.
pub fn accepts_triple(t: &Tdtt, k: usize, x: &TripleWithOrigin) -> Result<bool, DecisionError> {
    if t.input().check(&x.input, false).is_err() {
        return Ok(false);
    }
    let tr = encode_triple(x)?;
    Ok(trace_automaton(t, k).accepts(&tr))
}
