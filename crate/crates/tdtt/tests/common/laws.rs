//! Exhaustive law checks over small instances. Each check panics on the
//! first violation and returns how many instances it looked at.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use tdtt::decision::{decode_trace, encode_triple};
use tdtt::fixtures;
use tdtt::oit::{child_slots, dec, dup, extend_out, sync, AnnotatedTree};
use tdtt::transducer::{apply_step, enumerate_runs, run_origin, Budget, Configuration, Run, Step, Tdtt};
use tdtt::trees::{
    all_prefixes, concat, enumerate_by_size, greatest_common_prefix, is_prefix, node_distance, tree_delay,
    RankedAlphabet, Tree,
};

pub fn alphabet(pairs: &[(&str, usize)]) -> RankedAlphabet {
    RankedAlphabet::from_pairs(pairs.iter().copied())
}

fn small_trees() -> Vec<Tree> {
    let mut out = enumerate_by_size(&alphabet(&[("f", 2), ("a", 0)]), 3, 1000);
    out.extend(enumerate_by_size(&alphabet(&[("g", 1), ("a", 0)]), 3, 1000));
    out
}

/// The greatest common prefix is commutative, idempotent, a common prefix,
/// and above every other common prefix.
pub fn gcp_laws() -> usize {
    let trees = small_trees();
    let mut checked = 0;
    for t1 in &trees {
        for t2 in &trees {
            checked += 1;
            let g = greatest_common_prefix(t1, t2);
            assert_eq!(g, greatest_common_prefix(t2, t1), "commutative on {t1}, {t2}");
            let Some(g) = g else {
                assert_ne!(t1.label, t2.label);
                continue;
            };
            assert!(is_prefix(&g, t1) && is_prefix(&g, t2), "{g} below {t1}, {t2}");
            for p in all_prefixes(t1) {
                if is_prefix(&p, t2) {
                    assert!(is_prefix(&p, &g), "common prefix {p} of {t1}, {t2} exceeds {g}");
                }
            }
        }
        assert_eq!(greatest_common_prefix(t1, t1).as_ref(), Some(t1), "idempotent on {t1}");
    }
    checked
}

/// Node distance is a metric on the nodes of every small tree.
pub fn node_distance_metric() -> usize {
    let trees = enumerate_by_size(&alphabet(&[("f", 2), ("g", 1), ("a", 0)]), 4, 400);
    let mut checked = 0;
    for t in trees.iter().filter(|t| t.size() <= 20) {
        let dom = t.domain();
        for u in &dom {
            assert_eq!(node_distance(t, u, u).unwrap(), 0);
            for v in &dom {
                let d = node_distance(t, u, v).unwrap();
                assert_eq!(d, node_distance(t, v, u).unwrap());
                assert_eq!(d == 0, u == v);
                for w in &dom {
                    assert!(d <= node_distance(t, u, w).unwrap() + node_distance(t, w, v).unwrap());
                }
            }
        }
        checked += 1;
    }
    assert!(checked >= 100, "only {checked} trees checked");
    checked
}

/// Tree delay is symmetric, also on partial trees, and vanishes exactly on
/// equal ground trees.
pub fn delay_laws() -> usize {
    let ground = enumerate_by_size(&alphabet(&[("f", 2), ("g", 1), ("a", 0), ("b", 0)]), 2, 1000);
    let mut trees = ground.clone();
    for t in &ground {
        for leaf in t.find_leaves(|_| true) {
            trees.push(t.replace_at(&leaf, Tree::gap()).unwrap());
        }
    }
    let mut checked = 0;
    for t1 in &trees {
        for t2 in &trees {
            assert_eq!(tree_delay(t1, t2), tree_delay(t2, t1), "symmetric on {t1}, {t2}");
            checked += 1;
        }
    }
    for t1 in &ground {
        assert_eq!(tree_delay(t1, t1), 0);
        for t2 in &ground {
            assert_eq!(tree_delay(t1, t2) == 0, t1 == t2, "{t1}, {t2}");
        }
    }
    checked
}

/// `dup` returns every split of the budget, each once.
pub fn dup_counts() -> usize {
    let trees = ["b", "g(b)", "f(b,b)", "g(g(b))"].map(|s| Tree::parse(s).unwrap());
    let mut checked = 0;
    for t in &trees {
        for k in 1..=5u32 {
            // Brute force: every function from the nodes to pairs in
            // {1..k-1}², kept when each pair sums to at most k.
            let n = t.size() as u32;
            let base = (k.max(2) - 1) as usize;
            let total = base.pow(2 * n);
            let mut count = 0;
            for code in 0..total.max(1) {
                let mut c = code;
                let mut ok = k >= 2;
                for _ in 0..n {
                    let a = (c % base) as u32 + 1;
                    c /= base;
                    let b = (c % base) as u32 + 1;
                    c /= base;
                    ok &= a + b <= k;
                }
                count += usize::from(ok);
            }
            let splits = dup(t, k);
            assert_eq!(splits.len(), count, "dup({t}, {k})");
            let distinct: BTreeSet<_> = splits.iter().collect();
            assert_eq!(distinct.len(), splits.len());
            assert!(splits.iter().all(|(x, y)| x.strip() == *t && y.strip() == *t));
            checked += 1;
        }
    }
    checked
}

/// `dec` succeeds exactly while every annotation is above one.
pub fn dec_laws() -> usize {
    let trees = enumerate_by_size(&alphabet(&[("f", 2), ("g", 1), ("b", 0)]), 3, 300);
    let mut checked = 0;
    for t in &trees {
        for j in 1..=5 {
            let mut s = AnnotatedTree::annotate(t, j);
            for _ in 1..j {
                s = dec(&s).expect("annotation still above 1");
            }
            assert!(dec(&s).is_none(), "dec below 1 on {t}");
            checked += 1;
        }
    }
    checked
}

/// Appending a piece at the hole of a special tree is concatenation.
pub fn extend_out_laws() -> usize {
    let prefixes = enumerate_by_size(&alphabet(&[("f", 2), ("g", 1), ("a", 0)]), 2, 200);
    let pieces = enumerate_by_size(&alphabet(&[("f", 2), ("g", 1), ("b", 0)]), 1, 50);
    let mut checked = 0;
    for prefix in &prefixes {
        for leaf in prefix.find_leaves(|_| true) {
            let special = prefix.replace_at(&leaf, Tree::hole()).unwrap();
            let s = AnnotatedTree::annotate(&special, 2);
            for piece in &pieces {
                let ps = vec![piece.clone()];
                let extended = extend_out(&s, &ps, &child_slots(&ps), 3).unwrap();
                assert_eq!(extended.strip(), concat(&special, piece).unwrap());
                checked += 1;
            }
        }
    }
    checked
}

/// Annotated trees of height at most one over `f/2, g/1, b/0` with pending
/// leaves: a hole of Out or a bare state of T.
fn small_annotated() -> Vec<AnnotatedTree> {
    let mut leaves: Vec<AnnotatedTree> = (1..4).map(|a| AnnotatedTree::sym("b", a, vec![])).collect();
    leaves.push(AnnotatedTree::Hole(0));
    leaves.push(AnnotatedTree::Bare(Arc::from("q")));
    let mut out = leaves.clone();
    for a in 1..4 {
        for l in &leaves {
            out.push(AnnotatedTree::sym("g", a, vec![l.clone()]));
            for r in &leaves {
                out.push(AnnotatedTree::sym("f", a, vec![l.clone(), r.clone()]));
            }
        }
    }
    out
}

/// Positions where the two trees stop having a symbol on both sides,
/// with the subtrees found there; `None` on a label clash.
pub fn frontier(a: &AnnotatedTree, b: &AnnotatedTree) -> Option<Vec<(AnnotatedTree, AnnotatedTree)>> {
    match (a, b) {
        (AnnotatedTree::Sym { sym: s1, kids: k1, .. }, AnnotatedTree::Sym { sym: s2, kids: k2, .. }) => {
            if s1 != s2 || k1.len() != k2.len() {
                return None;
            }
            let mut out = Vec::new();
            for (x, y) in k1.iter().zip(k2) {
                out.extend(frontier(x, y)?);
            }
            Some(out)
        }
        _ => Some(vec![(a.clone(), b.clone())]),
    }
}

/// Replaces every subtree at a frontier position by the T-side binding.
pub fn replay(
    a: &AnnotatedTree,
    b: &AnnotatedTree,
    bindings: &mut std::slice::Iter<'_, (AnnotatedTree, AnnotatedTree)>,
) -> Tree {
    match (a, b) {
        (AnnotatedTree::Sym { sym, kids: k1, .. }, AnnotatedTree::Sym { kids: k2, .. }) => {
            Tree::with_symbol(sym.clone(), k1.iter().zip(k2).map(|(x, y)| replay(x, y, bindings)).collect())
        }
        _ => bindings.next().expect("one binding per frontier position").1.strip(),
    }
}

/// `sync` splits off the common prefix of two annotated trees.
pub fn check_sync(out: &AnnotatedTree, tt: &AnnotatedTree) {
    let got = sync(out, tt);
    assert_eq!(got, frontier(out, tt), "sync on {out:?}, {tt:?}");
    if let Some(bindings) = got {
        // Putting T's side back at every frontier position rebuilds T's tree.
        assert_eq!(replay(out, tt, &mut bindings.iter()), tt.strip());
        // Out's sides cover everything of Out below the common prefix.
        let out_nodes: usize = bindings.iter().map(|(o, _)| o.strip().size()).sum();
        let common = out.strip().size() - out_nodes;
        assert_eq!(common + bindings.iter().map(|(_, t)| t.strip().size()).sum::<usize>(), tt.strip().size());
    }
}

pub fn sync_laws() -> usize {
    let trees = small_annotated();
    for a in &trees {
        for b in &trees {
            check_sync(a, b);
        }
    }
    trees.len() * trees.len()
}

/// Every maximal complete run, firing state leaves in every order.
fn all_interleavings(t: &Tdtt, input: &Tree) -> Vec<Run> {
    let mut done = Vec::new();
    let mut stack = vec![Run { configurations: vec![Configuration::initial(input, t.initial())], steps: Vec::new() }];
    while let Some(run) = stack.pop() {
        let c = run.last().clone();
        if c.is_final() {
            done.push(run);
            continue;
        }
        for (u, v) in &c.phi {
            let q = c.output.label_at(u).expect("state leaf").to_string();
            let f = c.input.label_at(v).expect("input node").to_string();
            for rule in t.rules_for(&q, &f) {
                let mut next = run.clone();
                next.configurations.push(apply_step(&c, u, rule));
                next.steps.push(Step { leaf: u.clone(), input_node: v.clone(), rule: rule.clone() });
                stack.push(next);
            }
        }
    }
    done
}

/// Firing order does not change outputs or origins, and the canonical run
/// enumeration finds one run per rule choice.
pub fn firing_order_laws() -> usize {
    let mut interleavings = 0;
    for (name, t) in fixtures::all() {
        for input in enumerate_by_size(t.input(), 4, 200).into_iter().filter(|i| i.size() <= 6) {
            let mut by_choice: BTreeMap<Vec<String>, (Tree, String)> = BTreeMap::new();
            for run in all_interleavings(&t, &input) {
                interleavings += 1;
                let mut choice: Vec<String> =
                    run.steps.iter().map(|s| format!("{} {}", s.input_node, t.spec.rule_text(&s.rule))).collect();
                choice.sort();
                let result = (run.final_output().clone(), run_origin(&run).to_string());
                if let Some(prev) = by_choice.insert(choice, result.clone()) {
                    assert_eq!(prev, result, "{name} on {input}");
                }
            }
            let canonical = enumerate_runs(&t, &input, Budget::default()).unwrap().complete;
            assert_eq!(canonical.len(), by_choice.len(), "{name} on {input}");
            for (run, s) in &canonical {
                assert!(by_choice.values().any(|(s2, o2)| s2 == s && *o2 == run_origin(run).to_string()));
                assert_eq!(run_origin(run).len(), s.size(), "origin is total");
            }
        }
    }
    assert!(interleavings > 100, "{interleavings} interleavings");
    interleavings
}

/// Encoding a triple as a trace and decoding it gives the triple back.
pub fn encoding_round_trips() -> usize {
    let harvested = super::harvest(4, 200, 20);
    assert!(harvested.len() >= 500, "only {} triples", harvested.len());
    for h in &harvested {
        let trace = encode_triple(&h.triple).unwrap();
        assert_eq!(trace.input(), h.triple.input);
        assert_eq!(decode_trace(&trace).unwrap(), h.triple);
    }
    harvested.len()
}
