//! Triples harvested from the bundled fixtures, shared by the integration
//! tests.

#![allow(dead_code)]

pub mod laws;

use tdtt::fixtures;
use tdtt::measures::TripleWithOrigin;
use tdtt::transducer::{relation_with_origins, Budget, Tdtt};
use tdtt::trees::enumerate_by_size;

/// A harvested triple and the fixture it is checked against.
pub struct Harvested {
    pub fixture: &'static str,
    pub machine: Tdtt,
    pub triple: TripleWithOrigin,
}

/// Triples produced on inputs of height at most `height` by every fixture,
/// its single-rule perturbations, and the other fixtures over the same
/// alphabets. Each triple is paired with the fixture it came from.
pub fn harvest(height: usize, inputs_per_fixture: usize, outputs_per_input: usize) -> Vec<Harvested> {
    let all = fixtures::all();
    let mut out = Vec::new();
    for (name, t) in &all {
        let mut sources = vec![t.clone()];
        sources.extend(fixtures::perturbations(t));
        sources.extend(
            all.iter().filter(|(n, m)| n != name && m.input() == t.input() && m.output() == t.output()).map(|(_, m)| m.clone()),
        );
        let inputs = enumerate_by_size(t.input(), height, inputs_per_fixture);
        let mut seen = std::collections::BTreeSet::new();
        for src in &sources {
            for input in &inputs {
                let rel = relation_with_origins(src, input, Budget::default()).expect("fixture runs stay within budget");
                for (s, o) in rel.into_iter().take(outputs_per_input) {
                    let triple = TripleWithOrigin::new(input.clone(), s, o).expect("run origins are valid");
                    if seen.insert(triple.clone()) {
                        out.push(Harvested { fixture: name, machine: t.clone(), triple });
                    }
                }
            }
        }
    }
    out
}
