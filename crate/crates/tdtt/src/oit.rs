//! Annotated output information trees.
//!
//! While both parties of a comparison produce the same output region, each
//! side keeps the part of its output that the other side has not produced
//! yet. Output symbols carry an annotation `a ≥ 1`: the producing party may
//! still move `a - 1` input steps away before the other side must produce
//! the same node. A `k`-bounded comparison creates symbols with annotation
//! `k + 1`.
//!
//! Leaves of the trees record pending computations: thread holes and
//! variables of the reference side ("Out"), and states of the transducer
//! side, either at the current input node, at one of its children, or at a
//! remote node with a known input neighbourhood.

use std::fmt;
use std::sync::Arc;

use crate::textio::Rhs;
use crate::transducer::Tdtt;
use crate::trees::{Symbol, Tree};

/// An annotation in `1..=k+1`.
pub type Ann = u32;

/// A tree over annotated output symbols with pending computations at leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnnotatedTree {
    /// An output symbol with its annotation.
    Sym { sym: Symbol, ann: Ann, kids: Vec<AnnotatedTree> },
    /// A thread of Out at the current input node, identified by its slot.
    Hole(usize),
    /// A thread of Out at child `dir` of the current node.
    Var { dir: usize, slot: usize },
    /// A state of T at the current input node.
    Bare(Symbol),
    /// A state of T at child `dir` of the current node.
    Call { q: Symbol, dir: usize },
    /// A state of T at a node `dist` steps away from the current node and
    /// outside its subtree, with the input below that node cut at the
    /// depth where anything it produces would be too far away.
    Virtual { q: Symbol, dist: usize, nb: Arc<Tree> },
}

use AnnotatedTree::*;

impl AnnotatedTree {
    pub fn sym(sym: &str, ann: Ann, kids: Vec<AnnotatedTree>) -> Self {
        Sym { sym: Arc::from(sym), ann, kids }
    }

    /// Annotates every node of a ground tree (or context with variable
    /// leaves `x_j`, which become `Var { dir: j, slot: 0 }`) with `ann`.
    pub fn annotate(t: &Tree, ann: Ann) -> Self {
        if let Some(j) = t.as_var() {
            return Var { dir: j, slot: 0 };
        }
        if t.is_hole() {
            return Hole(0);
        }
        Sym {
            sym: t.label.clone(),
            ann,
            kids: t.children.iter().map(|c| AnnotatedTree::annotate(c, ann)).collect(),
        }
    }

    /// Removes annotations: symbols stay, holes become `HOLE`, variables
    /// `x_j`, and states become leaves labelled with the state.
    pub fn strip(&self) -> Tree {
        match self {
            Sym { sym, kids, .. } => Tree::with_symbol(sym.clone(), kids.iter().map(|k| k.strip()).collect()),
            Hole(_) => Tree::hole(),
            Var { dir, .. } => Tree::var(*dir),
            Bare(q) | Call { q, .. } | Virtual { q, .. } => Tree::with_symbol(q.clone(), Vec::new()),
        }
    }

    /// The annotation of the root, if it is a symbol.
    pub fn ann(&self) -> Option<Ann> {
        match self {
            Sym { ann, .. } => Some(*ann),
            _ => None,
        }
    }

    /// No pending computations remain.
    pub fn is_ground(&self) -> bool {
        match self {
            Sym { kids, .. } => kids.iter().all(AnnotatedTree::is_ground),
            _ => false,
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Sym { kids, .. } => kids.iter().map(|k| k.height() + 1).max().unwrap_or(0),
            _ => 0,
        }
    }

    /// Applies `f` to every leaf that is not a symbol, bottom-up; `None`
    /// from `f` aborts.
    pub fn try_map_leaves(&self, f: &mut impl FnMut(&AnnotatedTree) -> Option<AnnotatedTree>) -> Option<AnnotatedTree> {
        match self {
            Sym { sym, ann, kids } => {
                let kids = kids.iter().map(|k| k.try_map_leaves(f)).collect::<Option<Vec<_>>>()?;
                Some(Sym { sym: sym.clone(), ann: *ann, kids })
            }
            leaf => f(leaf),
        }
    }

    /// Applies `f` to every symbol annotation; `None` from `f` aborts.
    pub fn try_map_anns(&self, f: &impl Fn(Ann) -> Option<Ann>) -> Option<AnnotatedTree> {
        match self {
            Sym { sym, ann, kids } => {
                let kids = kids.iter().map(|k| k.try_map_anns(f)).collect::<Option<Vec<_>>>()?;
                Some(Sym { sym: sym.clone(), ann: f(*ann)?, kids })
            }
            leaf => Some(leaf.clone()),
        }
    }

    /// Leaves in pre-order.
    pub fn leaves(&self) -> Vec<&AnnotatedTree> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a AnnotatedTree, out: &mut Vec<&'a AnnotatedTree>) {
            match t {
                Sym { kids, .. } => kids.iter().for_each(|k| go(k, out)),
                leaf => out.push(leaf),
            }
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Display for AnnotatedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym { sym, ann, kids } => {
                write!(f, "{sym}^{ann}")?;
                if !kids.is_empty() {
                    write!(f, "(")?;
                    for (i, k) in kids.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{k}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            Hole(s) => write!(f, "∘{s}"),
            Var { dir, slot } => write!(f, "x{dir}#{slot}"),
            Bare(q) => write!(f, "{q}"),
            Call { q, dir } => write!(f, "{q}(x{dir})"),
            Virtual { q, dist, nb } => write!(f, "{q}@{dist}[{nb}]"),
        }
    }
}

/// Decreases every symbol annotation by one; undefined if some annotation
/// is already 1.
pub fn dec(s: &AnnotatedTree) -> Option<AnnotatedTree> {
    s.try_map_anns(&|a| if a > 1 { Some(a - 1) } else { None })
}

/// All ways to split a budget: pairs of annotated copies of `s` whose
/// annotations at every node are at least 1 and sum to at most `k`.
pub fn dup(s: &Tree, k: Ann) -> Vec<(AnnotatedTree, AnnotatedTree)> {
    let pairs: Vec<(Ann, Ann)> = (1..k).flat_map(|a| (1..=k - a).map(move |b| (a, b))).collect();
    fn go(t: &Tree, pairs: &[(Ann, Ann)]) -> Vec<(AnnotatedTree, AnnotatedTree)> {
        let mut kid_options: Vec<Vec<(AnnotatedTree, AnnotatedTree)>> = Vec::new();
        for c in &t.children {
            kid_options.push(go(c, pairs));
        }
        let mut combos: Vec<(Vec<AnnotatedTree>, Vec<AnnotatedTree>)> = vec![(Vec::new(), Vec::new())];
        for opts in &kid_options {
            let mut next = Vec::new();
            for (l, r) in &combos {
                for (a, b) in opts {
                    let mut l2 = l.clone();
                    l2.push(a.clone());
                    let mut r2 = r.clone();
                    r2.push(b.clone());
                    next.push((l2, r2));
                }
            }
            combos = next;
        }
        let mut out = Vec::new();
        for &(a, b) in pairs {
            for (l, r) in &combos {
                out.push((
                    Sym { sym: t.label.clone(), ann: a, kids: l.clone() },
                    Sym { sym: t.label.clone(), ann: b, kids: r.clone() },
                ));
            }
        }
        out
    }
    go(s, &pairs)
}

/// The input below a node, cut at depth `d`: nodes at depth `d` keep their
/// label and get gap children.
pub fn neighborhood(t: &Tree, d: usize) -> Tree {
    if d == 0 {
        return Tree { label: t.label.clone(), children: t.children.iter().map(|_| Tree::gap()).collect() };
    }
    Tree { label: t.label.clone(), children: t.children.iter().map(|c| neighborhood(c, d - 1)).collect() }
}

fn rhs_to_annotated(rhs: &Rhs, ann: Ann, call: &mut impl FnMut(&Symbol, usize) -> Option<AnnotatedTree>) -> Option<AnnotatedTree> {
    match rhs {
        Rhs::Out { sym, children } => {
            let kids = children
                .iter()
                .map(|c| rhs_to_annotated(c, ann, call))
                .collect::<Option<Vec<_>>>()?;
            Some(Sym { sym: sym.clone(), ann, kids })
        }
        Rhs::Call { state, var } => call(state, *var),
    }
}

/// Extensions of a state at the current node reading `f`: one tree per
/// rule, output symbols annotated `k + 1`, calls pointing to children.
pub fn ext(t: &Tdtt, q: &str, f: &str, k: usize) -> Vec<AnnotatedTree> {
    let ann = k as Ann + 1;
    t.rules_for(q, f)
        .filter_map(|r| rhs_to_annotated(&r.rhs, ann, &mut |q, j| Some(Call { q: q.clone(), dir: j })))
        .collect()
}

/// Extensions of a remote state `dist` steps away, reading the root of its
/// neighbourhood. Output symbols get the remaining budget `k - dist` (as
/// annotation `k - dist + 1`); calls become remote states one step further
/// away. Extensions that would place a state outside the neighbourhood or
/// beyond distance `k`, or that need a negative budget, are discarded.
pub fn ext_dist(t: &Tdtt, q: &str, dist: usize, nb: &Tree, k: usize) -> Vec<AnnotatedTree> {
    if dist > k || nb.is_gap() {
        return Vec::new();
    }
    let ann = (k - dist) as Ann + 1;
    t.rules_for(q, &nb.label)
        .filter_map(|r| {
            rhs_to_annotated(&r.rhs, ann, &mut |q, j| {
                let child = nb.children.get(j - 1)?;
                if child.is_gap() || dist + 1 > k {
                    return None;
                }
                Some(Virtual { q: q.clone(), dist: dist + 1, nb: Arc::new(child.clone()) })
            })
        })
        .collect()
}

/// Replaces every state at the current node by one of its extensions, in
/// all combinations.
pub fn ext_all(t: &Tdtt, s: &AnnotatedTree, f: &str, k: usize) -> Vec<AnnotatedTree> {
    match s {
        Bare(q) => ext(t, q, f, k),
        Sym { sym, ann, kids } => {
            let mut combos: Vec<Vec<AnnotatedTree>> = vec![Vec::new()];
            for kid in kids {
                let opts = ext_all(t, kid, f, k);
                let mut next = Vec::new();
                for c in &combos {
                    for o in &opts {
                        let mut c2 = c.clone();
                        c2.push(o.clone());
                        next.push(c2);
                    }
                }
                combos = next;
            }
            combos.into_iter().map(|kids| Sym { sym: sym.clone(), ann: *ann, kids }).collect()
        }
        other => vec![other.clone()],
    }
}

/// Numbering of Out's threads at the children of a node: for each slot at
/// the node (in order) and each variable occurrence in its piece (in
/// pre-order), the direction and the slot at that child.
pub fn child_slots(pieces: &[Tree]) -> Vec<Vec<(usize, usize)>> {
    let mut counters: Vec<usize> = Vec::new();
    pieces
        .iter()
        .map(|p| {
            p.var_occurrences()
                .into_iter()
                .map(|j| {
                    if counters.len() < j {
                        counters.resize(j, 0);
                    }
                    let slot = counters[j - 1];
                    counters[j - 1] += 1;
                    (j, slot)
                })
                .collect()
        })
        .collect()
}

/// Number of Out threads each child receives.
pub fn child_slot_counts(pieces: &[Tree], rank: usize) -> Vec<usize> {
    let mut counts = vec![0; rank];
    for p in pieces {
        for j in p.var_occurrences() {
            counts[j - 1] += 1;
        }
    }
    counts
}

/// Fills every hole of Out's tree with the piece of its slot, annotated
/// `k + 1`, numbering the piece's variables as child threads.
pub fn extend_out(s: &AnnotatedTree, pieces: &[Tree], slots: &[Vec<(usize, usize)>], k: usize) -> Option<AnnotatedTree> {
    let ann = k as Ann + 1;
    s.try_map_leaves(&mut |leaf| match leaf {
        Hole(slot) => {
            let piece = pieces.get(*slot)?;
            let mut occ = slots[*slot].iter();
            fn build(t: &Tree, ann: Ann, occ: &mut std::slice::Iter<'_, (usize, usize)>) -> AnnotatedTree {
                if t.as_var().is_some() {
                    let &(dir, slot) = occ.next().expect("one slot per variable occurrence");
                    return Var { dir, slot };
                }
                Sym { sym: t.label.clone(), ann, kids: t.children.iter().map(|c| build(c, ann, occ)).collect() }
            }
            Some(build(piece, ann, &mut occ))
        }
        other => Some(other.clone()),
    })
}

/// One frontier pair left after removing the common prefix: Out's side and
/// T's side at the same output position.
pub type Binding = (AnnotatedTree, AnnotatedTree);

/// Synchronizes Out's tree with T's tree. Defined if the labels agree on
/// every position where both sides have produced a symbol; the result lists
/// the frontier pairs in pre-order. Pairs of two finished symbols vanish.
pub fn sync(out: &AnnotatedTree, tt: &AnnotatedTree) -> Option<Vec<Binding>> {
    let mut bindings = Vec::new();
    fn go(a: &AnnotatedTree, b: &AnnotatedTree, acc: &mut Vec<Binding>) -> bool {
        match (a, b) {
            (Sym { sym: s1, kids: k1, .. }, Sym { sym: s2, kids: k2, .. }) => {
                s1 == s2 && k1.len() == k2.len() && k1.iter().zip(k2).all(|(x, y)| go(x, y, acc))
            }
            _ => {
                acc.push((a.clone(), b.clone()));
                true
            }
        }
    }
    go(out, tt, &mut bindings).then_some(bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::Tree;

    fn tree(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    const SWAP: &str = "alphabet input { f/2, a/0, b/0 } alphabet output { g/2, b/0 }
transducer T { initial q rule q(f(x1,x2)) -> g(q1(x2),q2(x1)) rule q1(a) -> b rule q2(a) -> b rule q2(f(x1,x2)) -> q2(x1) }";

    #[test]
    fn ext_follows_rules() {
        let t = Tdtt::parse(SWAP).unwrap();
        let e = ext(&t, "q", "f", 3);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].to_string(), "g^4(q1(x2),q2(x1))");
        assert!(ext(&t, "q", "a", 3).is_empty());
        let e = ext(&t, "q2", "f", 3);
        assert_eq!(e[0].to_string(), "q2(x1)");
    }

    #[test]
    fn remote_extension_tracks_distance() {
        let t = Tdtt::parse(SWAP).unwrap();
        let nb = tree("f(f(a,b),a)");
        let e = ext_dist(&t, "q", 2, &nb, 5);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].to_string(), "g^4(q1@3[a],q2@3[f(a,b)])");
        // At distance k the output is still allowed but no state survives.
        assert!(ext_dist(&t, "q", 5, &nb, 5).is_empty());
        assert_eq!(ext_dist(&t, "q1", 5, &tree("a"), 5)[0].to_string(), "b^1");
        assert!(ext_dist(&t, "q1", 6, &tree("a"), 5).is_empty());
        // Children outside the neighbourhood are unknown.
        assert!(ext_dist(&t, "q", 1, &tree("f(_,a)"), 5).is_empty());
    }

    #[test]
    fn ext_all_replaces_current_states() {
        let t = Tdtt::parse(SWAP).unwrap();
        let s = AnnotatedTree::sym("g", 2, vec![Bare(Arc::from("q2")), AnnotatedTree::sym("b", 1, vec![])]);
        let e = ext_all(&t, &s, "f", 3);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].to_string(), "g^2(q2(x1),b^1)");
        let ground = AnnotatedTree::sym("b", 3, vec![]);
        assert_eq!(ext_all(&t, &ground, "f", 3), vec![ground]);
    }

    #[test]
    fn extend_out_numbers_threads() {
        let pieces = vec![tree("g(x1,x2)"), tree("x1")];
        let slots = child_slots(&pieces);
        assert_eq!(slots, vec![vec![(1, 0), (2, 0)], vec![(1, 1)]]);
        assert_eq!(child_slot_counts(&pieces, 2), vec![2, 1]);
        let s = AnnotatedTree::sym("h", 2, vec![Hole(0)]);
        let e = extend_out(&s, &pieces, &slots, 6).unwrap();
        assert_eq!(e.to_string(), "h^2(g^7(x1#0,x2#0))");
        assert_eq!(extend_out(&Hole(1), &pieces, &slots, 6).unwrap().to_string(), "x1#1");
        let ground = AnnotatedTree::sym("b", 3, vec![]);
        assert_eq!(extend_out(&ground, &pieces, &slots, 6).unwrap(), ground);
        assert_eq!(e.strip(), tree("h(g(x1,x2))"));
    }

    #[test]
    fn sync_collects_frontier() {
        let out = AnnotatedTree::sym("g", 6, vec![Var { dir: 1, slot: 0 }, Var { dir: 2, slot: 0 }]);
        let tt = AnnotatedTree::sym(
            "g",
            6,
            vec![
                Call { q: Arc::from("q1"), dir: 1 },
                AnnotatedTree::sym("f", 5, vec![Call { q: Arc::from("q2"), dir: 2 }, AnnotatedTree::sym("b", 5, vec![])]),
            ],
        );
        let l = sync(&out, &tt).unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(format!("{} ↦ {}", l[0].0, l[0].1), "x1#0 ↦ q1(x1)");
        assert_eq!(format!("{} ↦ {}", l[1].0, l[1].1), "x2#0 ↦ f^5(q2(x2),b^5)");
        // Out ahead: a produced context against a pending state.
        let out = AnnotatedTree::sym(
            "g",
            3,
            vec![Var { dir: 1, slot: 0 }, AnnotatedTree::sym("f", 3, vec![Var { dir: 2, slot: 0 }, Var { dir: 3, slot: 0 }])],
        );
        let tt = AnnotatedTree::sym("g", 3, vec![Call { q: Arc::from("q1"), dir: 3 }, Call { q: Arc::from("q2"), dir: 2 }]);
        let l = sync(&out, &tt).unwrap();
        assert_eq!(format!("{} ↦ {}", l[1].0, l[1].1), "f^3(x2#0,x3#0) ↦ q2(x2)");
        let clash = sync(&AnnotatedTree::sym("g", 1, vec![]), &AnnotatedTree::sym("h", 1, vec![]));
        assert_eq!(clash, None);
    }

    #[test]
    fn dup_counts_and_strips() {
        let pairs = dup(&tree("b"), 5);
        assert!(pairs.contains(&(AnnotatedTree::sym("b", 2, vec![]), AnnotatedTree::sym("b", 3, vec![]))));
        assert!(dup(&tree("b"), 1).is_empty());
        for s in ["b", "h(b)", "g(b,b)"] {
            for k in 1..=5 {
                let s = tree(s);
                let d = dup(&s, k);
                assert!(d.iter().all(|(a, b)| a.strip() == s && b.strip() == s));
                let per_node = (1..k).map(|a| (1..=k - a).count()).sum::<usize>();
                assert_eq!(d.len(), per_node.pow(s.size() as u32));
            }
        }
    }

    #[test]
    fn dec_examples() {
        let s = AnnotatedTree::sym("f", 5, vec![Bare(Arc::from("q2")), AnnotatedTree::sym("b", 5, vec![])]);
        assert_eq!(dec(&s).unwrap().to_string(), "f^4(q2,b^4)");
        let c = AnnotatedTree::sym("h", 2, vec![AnnotatedTree::sym("c", 1, vec![])]);
        assert_eq!(dec(&c), None);
        let a = AnnotatedTree::annotate(&tree("h(b)"), 4);
        let mut cur = a;
        for _ in 0..3 {
            cur = dec(&cur).unwrap();
        }
        assert_eq!(dec(&cur), None);
    }

    #[test]
    fn neighborhoods_keep_arity() {
        let t = tree("f(f(a,b),a)");
        assert_eq!(neighborhood(&t, 0), tree("f(_,_)"));
        assert_eq!(neighborhood(&t, 1), tree("f(f(_,_),a)"));
        assert_eq!(neighborhood(&t, 5), t);
    }
}
