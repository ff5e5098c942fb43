//! Synthesises a deterministic k-origin uniformizer, verifies it on all
//! small inputs, and shows a machine that has none.
//!
//! ```bash
//! cargo run --release --example uniformize
//! ```

use tdtt::decision::{uniformize, verify_uniformizer, Caps, Verdict};
use tdtt::fixtures;
use tdtt::measures::InputBound;
use tdtt::textio::serialize_transducer;

fn main() -> anyhow::Result<()> {
    let t = fixtures::load("example2")?;
    let d = uniformize(&t, 0, Caps::default())?;
    let u = d.machine.expect("example2 has a uniformizer at k = 0");
    print!("{}", serialize_transducer(&u.spec));
    let bound = InputBound { height: 4, max_trees: 10_000 };
    println!("verification: {:?}", verify_uniformizer(&u, &t, 0, bound)?);

    // A copies its b-prefix when the word ends in A; on B it may shorten
    // it. Out must commit before seeing the last letter.
    let branching = fixtures::load("fig4a-T")?;
    let d = uniformize(&branching, 1, Caps::default())?;
    if let Verdict::No(w) = &d.verdict {
        println!("fig4a-T at k = 1: no uniformizer; {}", w.note.as_deref().unwrap_or(""));
    }
    Ok(())
}
