//! Runs a transducer on an input tree and prints every configuration of
//! the run together with the origin of each output node.
//!
//! ```bash
//! cargo run --example runs_and_origins
//! ```

use tdtt::fixtures;
use tdtt::transducer::{enumerate_runs, run_origin, Budget};
use tdtt::trees::Tree;

fn main() -> anyhow::Result<()> {
    let t = fixtures::load("example1")?;
    let input = Tree::parse("f(g(h(a)),a)")?;
    let runs = enumerate_runs(&t, &input, Budget::default())?;
    for (run, output) in &runs.complete {
        for (i, c) in run.configurations.iter().enumerate() {
            println!("c{i} = {c}");
        }
        println!("output {output}");
        println!("origin {}", run_origin(run));
    }
    Ok(())
}
