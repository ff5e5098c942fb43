//! Explores the reachable part of the safety automaton of a machine and
//! prints its first states in DOT.
//!
//! ```bash
//! cargo run --example arena_dot | dot -Tsvg > arena.svg
//! ```

use tdtt::arena::{reachable_arena, ArenaCaps};
use tdtt::fixtures;

fn main() -> anyhow::Result<()> {
    let t = fixtures::load("example2")?;
    let graph = reachable_arena(&t, 1, ArenaCaps::default());
    eprintln!(
        "{} states, {} edges, {} error states{}",
        graph.states.len(),
        graph.edges.len(),
        graph.err_states(),
        if graph.exceeded { " (cap reached)" } else { "" }
    );
    print!("{}", graph.to_dot(40));
    Ok(())
}
