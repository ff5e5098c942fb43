//! Origin gap and output delay: how far two computations with the same
//! output drift apart in where they read the input, and in how much output
//! one of them has written ahead of the other.
//!
//! ```bash
//! cargo run --example similarity_measures
//! ```

use tdtt::fixtures;
use tdtt::measures::{origin_gap, run_delay};
use tdtt::transducer::{enumerate_runs, run_origin, Budget, OriginMapping};
use tdtt::trees::{difference_trees, tree_delay, Tree};

fn main() -> anyhow::Result<()> {
    // Two runs of the branching machine: one always goes left, the other
    // goes right at the root and left below.
    let t = fixtures::load("example2")?;
    let input = Tree::parse("f(f(f(a,a),a),f(f(a,a),a))")?;
    let left = OriginMapping::from_literals(&[("", ""), ("1", "1"), ("11", "11"), ("111", "111")])?;
    let right = OriginMapping::from_literals(&[("", ""), ("1", "2"), ("11", "21"), ("111", "211")])?;
    println!("origin gap: {}", origin_gap(&input, &left, &right)?);

    let runs = enumerate_runs(&t, &input, Budget::default())?.complete;
    let pick = |o: &OriginMapping| runs.iter().find(|(r, _)| run_origin(r) == *o).map(|(r, _)| r.clone());
    let (r1, r2) = (pick(&left).expect("left run"), pick(&right).expect("right run"));
    println!("run delay: {}", run_delay(&r1, &r2)?);

    // Delay of two partial outputs: the size of what remains after removing
    // their greatest common prefix.
    let (s1, s2) = (Tree::parse("g(f(a,f(b,h(a))),f)")?, Tree::parse("g(f(a,f),f(a,b))")?);
    let diff: Vec<String> = difference_trees(&s1, &s2).iter().map(Tree::to_string).collect();
    println!("difference trees of {s1} and {s2}: {{{}}}", diff.join(", "));
    println!("tree delay: {}", tree_delay(&s1, &s2));
    Ok(())
}
