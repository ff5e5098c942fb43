//! The safety automaton agrees with the brute-force membership oracle.

use tdtt::decision::accepts_triple;
use tdtt::fixtures;
use tdtt::measures::{k_origin_member, TripleWithOrigin};
use tdtt::transducer::{relation_with_origins, Budget};
use tdtt::trees::enumerate_by_size;

#[test]
fn automaton_matches_oracle_on_harvested_triples() {
    let mut checked = 0;
    let mut positives = 0;
    let mut failures = Vec::new();
    for (name, t) in fixtures::all() {
        let mut sources = vec![t.clone()];
        sources.extend(fixtures::perturbations(&t));
        // Machines over the same alphabets produce triples of a different shape.
        sources.extend(fixtures::all().into_iter().map(|(_, m)| m).filter(|m| m.input() == t.input() && m.output() == t.output()));
        let inputs = enumerate_by_size(t.input(), 3, 60);
        for src in &sources {
            for input in &inputs {
                for (s, o) in relation_with_origins(src, input, Budget::default()).unwrap().into_iter().take(20) {
                    let x = TripleWithOrigin::new(input.clone(), s, o).unwrap();
                    for k in 0..=3 {
                        let a = accepts_triple(&t, k, &x).unwrap();
                        let b = k_origin_member(&x, &t, k).unwrap().member;
                        checked += 1;
                        positives += usize::from(b);
                        if a != b {
                            failures.push(format!("{name} k={k} {x}: automaton {a}, oracle {b}"));
                        }
                    }
                }
            }
        }
    }
    for f in failures.iter().take(20) {
        eprintln!("{f}");
    }
    eprintln!("checked {checked}, members {positives}, failures {}", failures.len());
    assert!(failures.is_empty());
}

mod random {
    use super::*;
    use proptest::prelude::*;
    use tdtt::transducer::Tdtt;

    const STATES: [&str; 2] = ["q", "p"];
    const SYMBOLS: [(&str, usize); 3] = [("f", 2), ("g", 1), ("a", 0)];

    fn rhs(rank: usize, depth: u32) -> BoxedStrategy<String> {
        let mut leaves: Vec<BoxedStrategy<String>> = vec![Just("b".to_string()).boxed()];
        if rank > 0 {
            leaves.push(
                (0..STATES.len(), 1..=rank)
                    .prop_map(|(s, j)| format!("{}(x{j})", STATES[s]))
                    .boxed(),
            );
        }
        let leaf = proptest::strategy::Union::new(leaves).boxed();
        if depth == 0 {
            return leaf;
        }
        prop_oneof![
            2 => leaf,
            1 => rhs(rank, depth - 1).prop_map(|c| format!("h({c})")),
            1 => (rhs(rank, depth - 1), rhs(rank, depth - 1)).prop_map(|(l, r)| format!("f({l},{r})")),
        ]
        .boxed()
    }

    fn machine() -> impl Strategy<Value = String> {
        let mut slots = Vec::new();
        for q in STATES {
            for (f, r) in SYMBOLS {
                let lhs = match r {
                    0 => format!("{q}({f})"),
                    1 => format!("{q}({f}(x1))"),
                    _ => format!("{q}({f}(x1,x2))"),
                };
                slots.push(proptest::collection::vec(rhs(r, 2), 0..=2).prop_map(move |rs| {
                    rs.into_iter().map(|r| format!("rule {lhs} -> {r}\n")).collect::<String>()
                }));
            }
        }
        slots.prop_map(|rules| {
            format!(
                "alphabet input {{ f/2, g/1, a/0 }} alphabet output {{ f/2, h/1, b/0 }}\n\
                 transducer R {{ initial q states {{ q, p }}\n{} }}",
                rules.concat()
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]
        #[test]
        fn automaton_matches_oracle_on_random_machines(a in machine(), b in machine()) {
            let ta = Tdtt::parse(&a).unwrap();
            let tb = Tdtt::parse(&b).unwrap();
            for input in enumerate_by_size(ta.input(), 2, 25) {
                let Ok(rel) = relation_with_origins(&ta, &input, Budget::default()) else { continue };
                for (s, o) in rel.into_iter().take(6) {
                    let x = TripleWithOrigin::new(input.clone(), s, o).unwrap();
                    for m in [&ta, &tb] {
                        for k in 0..=3 {
                            let auto = accepts_triple(m, k, &x).unwrap();
                            let oracle = k_origin_member(&x, m, k).unwrap().member;
                            prop_assert_eq!(auto, oracle, "k={} {} on\n{}", k, x, m.spec.name);
                        }
                    }
                }
            }
        }
    }
}
