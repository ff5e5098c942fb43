//! Decides k-origin inclusion between two word transducers and replays the
//! counterexample with the brute-force oracle.
//!
//! ```bash
//! cargo run --release --example inclusion
//! ```

use tdtt::decision::{inclusion, Caps, Verdict};
use tdtt::fixtures;
use tdtt::measures::k_origin_member;

fn main() -> anyhow::Result<()> {
    // Both machines output a single `a`; the first writes it at the first
    // letter, the second at the letter `c`.
    let t1 = fixtures::load("fig4a-T1")?;
    let t2 = fixtures::load("fig4a-T2")?;
    for k in 0..=2 {
        let d = inclusion(&t1, &t2, k, Caps::default())?;
        match &d.verdict {
            Verdict::No(w) => {
                let x = w.triple.as_ref().expect("inclusion witnesses are triples");
                println!("k = {k}: no, witness {x}");
                println!("  oracle member: {}", k_origin_member(x, &t2, k)?.member);
            }
            other => println!("k = {k}: {other:?}"),
        }
    }
    Ok(())
}
