//! Encodes an origin triple as a trace, an input tree whose nodes carry the
//! output pieces produced there, decodes it back, and runs the trace
//! automaton of a machine on it.
//!
//! ```bash
//! cargo run --example trace_encoding
//! ```

use tdtt::decision::{accepts_triple, decode_trace, encode_triple};
use tdtt::fixtures;
use tdtt::measures::TripleWithOrigin;
use tdtt::transducer::OriginMapping;
use tdtt::trees::Tree;

fn main() -> anyhow::Result<()> {
    let x = TripleWithOrigin::new(
        Tree::parse("f(f(f(a,a),a),f(f(a,a),a))")?,
        Tree::parse("h(h(h(b)))")?,
        OriginMapping::from_literals(&[("", ""), ("1", "2"), ("11", "21"), ("111", "211")])?,
    )?;
    let trace = encode_triple(&x)?;
    println!("trace: {trace}");
    assert_eq!(decode_trace(&trace)?, x);

    let left = fixtures::load("left-only-variant")?;
    for k in 4..=6 {
        println!("left-only automaton at k = {k} accepts: {}", accepts_triple(&left, k, &x)?);
    }
    Ok(())
}
