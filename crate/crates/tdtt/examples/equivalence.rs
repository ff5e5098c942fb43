//! Decides k-origin equivalence and prints the structured report.
//!
//! ```bash
//! cargo run --release --example equivalence
//! ```

use tdtt::decision::{equivalence, Caps};
use tdtt::fixtures;

fn main() -> anyhow::Result<()> {
    let t = fixtures::load("example2")?;
    let left = fixtures::load("left-only-variant")?;
    print!("{}", equivalence(&t, &t, 1, Caps::default())?.report());
    println!();
    print!("{}", equivalence(&t, &left, 1, Caps::default())?.report());
    Ok(())
}
