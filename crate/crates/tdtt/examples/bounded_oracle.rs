//! The brute-force oracles: membership of one origin triple in the k-origin
//! closure of a machine, and inclusion checked on all small inputs.
//!
//! ```bash
//! cargo run --example bounded_oracle
//! ```

use tdtt::fixtures;
use tdtt::measures::{k_origin_inclusion_bounded, k_origin_member, BoundedInclusion, InputBound, TripleWithOrigin};
use tdtt::transducer::OriginMapping;
use tdtt::trees::Tree;

fn main() -> anyhow::Result<()> {
    let t = fixtures::load("example2")?;
    let left = fixtures::load("left-only-variant")?;

    // The right-then-left run of T needs origin distance 6 to be matched by
    // the left-only machine.
    let x = TripleWithOrigin::new(
        Tree::parse("f(f(f(a,a),a),f(f(a,a),a))")?,
        Tree::parse("h(h(h(b)))")?,
        OriginMapping::from_literals(&[("", ""), ("1", "2"), ("11", "21"), ("111", "211")])?,
    )?;
    for k in [5, 6] {
        let m = k_origin_member(&x, &left, k)?;
        println!("k = {k}: member = {}", m.member);
    }

    for (a, b) in [(&left, &t), (&t, &left)] {
        match k_origin_inclusion_bounded(a, b, 1, InputBound::height(3))? {
            BoundedInclusion::Ok { inputs_checked } => {
                println!("{} ⊆_1 {}: ok on {inputs_checked} inputs", a.name(), b.name())
            }
            BoundedInclusion::Counterexample(x) => println!("{} ⊆_1 {}: counterexample {x}", a.name(), b.name()),
        }
    }
    Ok(())
}
