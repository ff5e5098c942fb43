//! `k`-origin inclusion and equivalence.
//!
//! `R_o(T1) ⊆_k R_o(T2)` holds iff every trace of a run of `T1` is accepted
//! by the automaton of `T2`. Types of run traces of `T1` are built bottom-up
//! in rounds of increasing height, each type remembering the `T1` states of
//! its threads and one trace realising it. A root type whose single thread
//! starts in `T1`'s initial state but which does not satisfy `T2`'s initial
//! obligation yields a counterexample of least height.

use std::collections::HashMap;
use std::sync::Arc;

use crate::arena::{Automaton, TraceLabel};
use crate::measures::{k_origin_member, TripleWithOrigin};
use crate::textio::Rule;
use crate::transducer::{classify, relation_with_origins, Budget, Tdtt};
use crate::trees::Symbol;

use super::engine::{Engine, TypeData};
use super::trace::{decode_trace, TraceTree};
use super::{Caps, Decision, DecisionError, Kind, Stats, Verdict, Witness};

struct RunType {
    data: TypeData,
    states: Vec<Symbol>,
    label: TraceLabel,
    kids: Vec<usize>,
}

fn check_alphabets(t1: &Tdtt, t2: &Tdtt) -> Result<(), DecisionError> {
    if t1.input() != t2.input() || t1.output() != t2.output() {
        return Err(DecisionError::AlphabetMismatch(format!(
            "{} and {} must share input and output alphabets",
            t1.name(),
            t2.name()
        )));
    }
    Ok(())
}

/// Decides `R_o(T1) ⊆_k R_o(T2)`.
pub fn inclusion(t1: &Tdtt, t2: &Tdtt, k: usize, caps: Caps) -> Result<Decision, DecisionError> {
    check_alphabets(t1, t2)?;
    let direction = format!("{} ⊆ {}", t1.name(), t2.name());
    let (verdict, stats) = include(t1, t2, k, caps, &direction)?;
    Ok(Decision { kind: Kind::Inclusion, k, verdict, stats, machine: None })
}

/// Decides `R_o(T1) ⊆_k R_o(T2)` and `R_o(T2) ⊆_k R_o(T1)`.
pub fn equivalence(t1: &Tdtt, t2: &Tdtt, k: usize, caps: Caps) -> Result<Decision, DecisionError> {
    check_alphabets(t1, t2)?;
    let forward = format!("{} ⊆ {}", t1.name(), t2.name());
    let (v1, s1) = include(t1, t2, k, caps, &forward)?;
    let mut stats = s1;
    let verdict = match v1 {
        Verdict::No(w) => Verdict::No(w),
        first => {
            let backward = format!("{} ⊆ {}", t2.name(), t1.name());
            let (v2, s2) = include(t2, t1, k, caps, &backward)?;
            stats.states += s2.states;
            stats.obligations = stats.obligations.max(s2.obligations);
            stats.restarts += s2.restarts;
            match (first, v2) {
                (_, Verdict::No(w)) => Verdict::No(w),
                (Verdict::Undetermined(r), _) | (_, Verdict::Undetermined(r)) => Verdict::Undetermined(r),
                _ => Verdict::Yes,
            }
        }
    };
    Ok(Decision { kind: Kind::Equivalence, k, verdict, stats, machine: None })
}

fn include(t1: &Tdtt, t2: &Tdtt, k: usize, caps: Caps, direction: &str) -> Result<(Verdict, Stats), DecisionError> {
    let linear = classify(t1).linear;
    let max_threads = if linear { 1 } else { caps.max_threads.max(1) };
    let mut engine = Engine::new(Automaton::new(t2, k), false);
    let mut stats = Stats::default();
    loop {
        let outcome = explore(t1, &mut engine, max_threads, caps, &mut stats);
        if engine.has_missing() {
            engine.absorb_missing();
            stats.restarts += 1;
            continue;
        }
        stats.obligations = engine.universe_size();
        return Ok((
            match outcome {
                Explored::Complete => {
                    if linear {
                        Verdict::Yes
                    } else {
                        Verdict::Undetermined(format!(
                            "{} copies its input; traces with more than {max_threads} threads per node were not explored",
                            t1.name()
                        ))
                    }
                }
                Explored::Capped => Verdict::Undetermined(format!("more than {} types", caps.max_states)),
                Explored::Counterexample(tr) => confirm(t1, t2, k, tr, direction)?,
            },
            stats,
        ));
    }
}

/// Checks a counterexample trace against the brute-force oracles.
fn confirm(t1: &Tdtt, t2: &Tdtt, k: usize, tr: TraceTree, direction: &str) -> Result<Verdict, DecisionError> {
    let triple: TripleWithOrigin = decode_trace(&tr)?;
    let of_t1 = relation_with_origins(t1, &triple.input, Budget::default())?
        .contains(&(triple.output.clone(), triple.origin.clone()));
    let in_t2 = t2.input().check(&triple.input, false).is_ok() && k_origin_member(&triple, t2, k)?.member;
    if !of_t1 || in_t2 {
        return Ok(Verdict::Undetermined(format!(
            "candidate counterexample {triple} was not confirmed by the oracle"
        )));
    }
    Ok(Verdict::No(Box::new(Witness { direction: direction.to_string(), triple: Some(triple), trace: Some(tr), note: None })))
}

enum Explored {
    Complete,
    Capped,
    Counterexample(TraceTree),
}

fn explore(t1: &Tdtt, engine: &mut Engine<'_>, max_threads: usize, caps: Caps, stats: &mut Stats) -> Explored {
    let q0: Symbol = Arc::from(t1.initial());
    let init = engine.initial_id();
    let mut types: Vec<RunType> = Vec::new();
    let mut index: HashMap<(TypeData, Vec<Symbol>), usize> = HashMap::new();
    let symbols: Vec<(Symbol, usize)> = t1.input().iter().map(|(s, r)| (Arc::from(s), r)).collect();
    let mut last_round = 0..0;
    for round in 0.. {
        let start = types.len();
        let mut bad: Vec<usize> = Vec::new();
        for (f, rank) in &symbols {
            if (round == 0) != (*rank == 0) {
                continue;
            }
            let rules: Vec<&Rule> = t1.rules().iter().filter(|r| r.symbol == *f).collect();
            for kids in child_tuples(start, *rank, &last_round) {
                let kid_states: Vec<&[Symbol]> = kids.iter().map(|&c| types[c].states.as_slice()).collect();
                for seq in rule_sequences(&rules, &kid_states, max_threads) {
                    let label = TraceLabel {
                        sym: f.clone(),
                        rank: *rank,
                        pieces: seq.iter().map(|r| r.rhs.to_context()).collect(),
                    };
                    let states: Vec<Symbol> = seq.iter().map(|r| r.state.clone()).collect();
                    let kid_data: Vec<&TypeData> = kids.iter().map(|&c| &types[c].data).collect();
                    let data = engine.evaluate(&label, &kid_data);
                    let key = (data, states);
                    if index.contains_key(&key) {
                        continue;
                    }
                    if types.len() >= caps.max_states {
                        stats.states = types.len();
                        return Explored::Capped;
                    }
                    let id = types.len();
                    if key.1 == [q0.clone()] && key.0.sat.binary_search(&init).is_err() {
                        bad.push(id);
                    }
                    index.insert(key.clone(), id);
                    types.push(RunType { data: key.0, states: key.1, label, kids: kids.clone() });
                }
            }
        }
        stats.states = types.len();
        if engine.has_missing() {
            return Explored::Complete;
        }
        if !bad.is_empty() {
            let best = bad
                .into_iter()
                .map(|id| build_trace(&types, id))
                .min_by_key(|tr| (tr.size(), tr.to_string()))
                .expect("nonempty");
            return Explored::Counterexample(best);
        }
        if types.len() == start && round > 0 {
            return Explored::Complete;
        }
        last_round = start..types.len();
    }
    unreachable!("rounds only end by returning")
}

/// Child tuples over `0..end` using at least one type from `fresh`.
pub(crate) fn child_tuples(end: usize, rank: usize, fresh: &std::ops::Range<usize>) -> Vec<Vec<usize>> {
    if rank == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; rank];
    if end == 0 {
        return out;
    }
    loop {
        if cur.iter().any(|c| fresh.contains(c)) {
            out.push(cur.clone());
        }
        let mut i = rank;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < end {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Sequences of rules for one symbol whose calls hand each child exactly
/// the states of its threads, in thread order.
fn rule_sequences<'r>(rules: &[&'r Rule], kid_states: &[&[Symbol]], max_threads: usize) -> Vec<Vec<&'r Rule>> {
    fn go<'r>(
        rules: &[&'r Rule],
        kid_states: &[&[Symbol]],
        max_threads: usize,
        used: &mut Vec<usize>,
        seq: &mut Vec<&'r Rule>,
        out: &mut Vec<Vec<&'r Rule>>,
    ) {
        if used.iter().zip(kid_states).all(|(u, s)| *u == s.len()) {
            out.push(seq.clone());
        }
        if seq.len() == max_threads {
            return;
        }
        for r in rules {
            let saved = used.clone();
            let fits = r.rhs.calls().iter().all(|(_, q, j)| {
                let ok = kid_states[j - 1].get(used[j - 1]) == Some(q);
                used[j - 1] += 1;
                ok
            });
            if fits {
                seq.push(r);
                go(rules, kid_states, max_threads, used, seq, out);
                seq.pop();
            }
            *used = saved;
        }
    }
    let mut out = Vec::new();
    go(rules, kid_states, max_threads, &mut vec![0; kid_states.len()], &mut Vec::new(), &mut out);
    out
}

fn build_trace(types: &[RunType], id: usize) -> TraceTree {
    let t = &types[id];
    TraceTree { label: t.label.clone(), children: t.kids.iter().map(|&c| build_trace(types, c)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::tests::LEFT_ONLY;
    use crate::textio::tests::EXAMPLE1;
    use crate::transducer::tests::EXAMPLE2;

    #[test]
    fn reflexive_inclusion() {
        for src in [EXAMPLE1, EXAMPLE2, LEFT_ONLY] {
            let t = Tdtt::parse(src).unwrap();
            for k in 0..3 {
                let d = inclusion(&t, &t, k, Caps::default()).unwrap();
                assert_eq!(d.verdict, Verdict::Yes, "{} at k = {k}", t.name());
            }
        }
    }

    #[test]
    fn left_only_is_included_in_example2() {
        let t = Tdtt::parse(EXAMPLE2).unwrap();
        let left = Tdtt::parse(LEFT_ONLY).unwrap();
        assert_eq!(inclusion(&left, &t, 0, Caps::default()).unwrap().verdict, Verdict::Yes);
        let back = inclusion(&t, &left, 1, Caps::default()).unwrap();
        let Verdict::No(w) = back.verdict else { panic!("expected a counterexample") };
        let x = w.triple.unwrap();
        assert_eq!(x.input.to_string(), "f(a,a)");
        assert_eq!(x.output.to_string(), "h(b)");
        // Going right twice ends four steps away from going left twice.
        let Verdict::No(w) = inclusion(&t, &left, 2, Caps::default()).unwrap().verdict else {
            panic!("expected a counterexample")
        };
        assert_eq!(w.triple.unwrap().input.height(), 2);
    }

    #[test]
    fn equivalence_reports_the_failing_direction() {
        let t = Tdtt::parse(EXAMPLE2).unwrap();
        let left = Tdtt::parse(LEFT_ONLY).unwrap();
        let d = equivalence(&left, &t, 0, Caps::default()).unwrap();
        let Verdict::No(w) = d.verdict else { panic!("expected a counterexample") };
        assert!(w.direction.ends_with(&format!("⊆ {}", left.name())));
    }

    #[test]
    fn child_tuples_need_a_fresh_member() {
        assert_eq!(child_tuples(2, 2, &(1..2)), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(child_tuples(3, 0, &(1..2)), vec![Vec::<usize>::new()]);
    }
}
