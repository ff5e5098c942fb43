//! The bundled example transducers and their single-rule perturbations.
//!
//! The `fig4*` machines are word transducers run on monadic trees: a word
//! `w1 … wn` is the tree `w1(…wn(end)…)`. The `fig4b-*` machines loop on
//! output without reading input; their loops are cut at two iterations.

use std::sync::Arc;

use crate::textio::Rhs;
use crate::transducer::{Tdtt, TransducerError};

/// `(file name, text)` of every bundled fixture.
pub const FIXTURES: &[(&str, &str)] = &[
    ("example1.tdtt", include_str!("../fixtures/example1.tdtt")),
    ("example2.tdtt", include_str!("../fixtures/example2.tdtt")),
    ("left-only-variant.tdtt", include_str!("../fixtures/left-only-variant.tdtt")),
    ("fig4a-T1.tdtt", include_str!("../fixtures/fig4a-T1.tdtt")),
    ("fig4a-T2.tdtt", include_str!("../fixtures/fig4a-T2.tdtt")),
    ("fig4a-T.tdtt", include_str!("../fixtures/fig4a-T.tdtt")),
    ("fig4a-T-prime.tdtt", include_str!("../fixtures/fig4a-T-prime.tdtt")),
    ("fig4b-T3.tdtt", include_str!("../fixtures/fig4b-T3.tdtt")),
    ("fig4b-T4.tdtt", include_str!("../fixtures/fig4b-T4.tdtt")),
];

/// Loads a bundled fixture by file name, with or without `.tdtt`.
pub fn load(name: &str) -> Result<Tdtt, TransducerError> {
    let file = if name.ends_with(".tdtt") { name.to_string() } else { format!("{name}.tdtt") };
    let (_, text) = FIXTURES
        .iter()
        .find(|(n, _)| *n == file)
        .ok_or_else(|| TransducerError::Invalid(format!("no bundled fixture `{name}`")))?;
    Tdtt::parse(text)
}

/// Every bundled fixture.
pub fn all() -> Vec<(&'static str, Tdtt)> {
    FIXTURES
        .iter()
        .map(|(n, text)| (*n, Tdtt::parse(text).expect("bundled fixtures parse")))
        .collect()
}

/// Machines that differ from `t` in one rule: the rule removed, or the
/// root label of its output replaced by another output symbol of the same
/// rank.
pub fn perturbations(t: &Tdtt) -> Vec<Tdtt> {
    let mut out = Vec::new();
    for i in 0..t.spec.rules.len() {
        let mut spec = t.spec.clone();
        spec.rules.remove(i);
        spec.name = format!("{}_without_{i}", t.name());
        if let Ok(m) = Tdtt::new(spec) {
            out.push(m);
        }
        if let Rhs::Out { sym, children } = &t.spec.rules[i].rhs {
            let other = t.output().of_rank(children.len()).find(|s| *s != &**sym);
            if let Some(other) = other {
                let mut spec = t.spec.clone();
                spec.rules[i].rhs = Rhs::Out { sym: Arc::from(other), children: children.clone() };
                spec.name = format!("{}_relabel_{i}", t.name());
                if let Ok(m) = Tdtt::new(spec) {
                    out.push(m);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        assert_eq!(all().len(), 9);
        assert_eq!(load("example2").unwrap().name(), "T");
        assert!(load("missing").is_err());
    }

    #[test]
    fn perturbations_change_one_rule() {
        let t = load("example2").unwrap();
        let p = perturbations(&t);
        assert!(p.len() >= 3);
        assert!(p.iter().all(|m| m.spec.rules.len() <= t.spec.rules.len()));
    }
}
