//! The algebra of annotated output trees used by the automaton: annotating
//! a tree with a budget, splitting it between two parties, synchronising
//! two extensions, and decrementing budgets.
//!
//! ```bash
//! cargo run --example output_information
//! ```

use tdtt::oit::{dec, dup, sync, AnnotatedTree};
use tdtt::trees::Tree;

fn main() -> anyhow::Result<()> {
    let s = Tree::parse("h(h(b))")?;
    let a = AnnotatedTree::annotate(&s, 3);
    println!("annotated: {a}");
    println!("decremented: {}", dec(&a).map_or("undefined".into(), |t| t.to_string()));

    let splits = dup(&Tree::parse("h(b)")?, 3);
    println!("{} ways to split h(b) at budget 3", splits.len());
    for (x, y) in splits.iter().take(3) {
        println!("  {x} | {y}");
    }

    let other = AnnotatedTree::annotate(&Tree::parse("h(h(b))")?, 2);
    match sync(&a, &other) {
        Some(bindings) => println!("sync leaves {} binding(s)", bindings.len()),
        None => println!("sync is undefined"),
    }
    Ok(())
}
