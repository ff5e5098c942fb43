//! Renders the origin graph of a run in DOT: the input and output trees
//! side by side, with a dashed edge from every output node to its origin.
//!
//! ```bash
//! cargo run --example origin_dot | dot -Tsvg > origin.svg
//! ```

use tdtt::fixtures;
use tdtt::textio::export_dot;
use tdtt::transducer::{enumerate_runs, run_origin, Budget};
use tdtt::trees::Tree;

fn main() -> anyhow::Result<()> {
    let t = fixtures::load("example1")?;
    let input = Tree::parse("f(g(h(a)),a)")?;
    let runs = enumerate_runs(&t, &input, Budget::default())?;
    let (run, output) = &runs.complete[0];
    print!("{}", export_dot(&input, output, &run_origin(run).0)?);
    Ok(())
}
