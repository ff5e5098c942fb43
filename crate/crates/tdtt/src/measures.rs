//! The two similarity measures between computations (origin distance and
//! output delay) and brute-force membership and inclusion checks on bounded
//! inputs. These checks serve as the independent reference for the automaton
//! constructions.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::textio::Rhs;
use crate::transducer::{enumerate_runs, relation_with_origins, run_origin, Budget, OriginMapping, Run, Tdtt, TransducerError};
use crate::trees::{enumerate_by_size, tree_delay, Address, Symbol, Tree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("origin mappings have different domains")]
    DomainMismatch,
    #[error("origin {0} is not a node of the input")]
    OriginOutsideInput(Address),
    #[error("runs are over different inputs")]
    InputMismatch,
    #[error("run does not end in a ground output")]
    NotGroundFinal,
    #[error("both transducers must be monadic")]
    NotMonadic,
    #[error("invalid triple: {0}")]
    InvalidTriple(String),
    #[error("delay {delay} exceeds the bound {bound} on input {input}")]
    DelayBoundViolated { input: Tree, delay: usize, bound: usize },
    #[error(transparent)]
    Transducer(#[from] TransducerError),
}

/// An input, an output, and an origin mapping of the output in the input.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleWithOrigin {
    pub input: Tree,
    pub output: Tree,
    pub origin: OriginMapping,
}

impl TripleWithOrigin {
    /// Checks that the origin is total on the output with range in the input.
    pub fn new(input: Tree, output: Tree, origin: OriginMapping) -> Result<Self, MeasureError> {
        if !origin.is_valid_for(&input, &output) {
            return Err(MeasureError::InvalidTriple(format!(
                "origin {origin} is not a total map from {output} into {input}"
            )));
        }
        Ok(TripleWithOrigin { input, output, origin })
    }
}

impl fmt::Display for TripleWithOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.input, self.output, self.origin)
    }
}

/// Bounds for input enumeration: maximal height and number of trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputBound {
    pub height: usize,
    pub max_trees: usize,
}

impl Default for InputBound {
    fn default() -> Self {
        InputBound { height: 4, max_trees: 200 }
    }
}

impl InputBound {
    pub fn height(height: usize) -> Self {
        InputBound { height, ..InputBound::default() }
    }
}

/// The largest distance between the two origins of one output node.
pub fn origin_gap(t: &Tree, o1: &OriginMapping, o2: &OriginMapping) -> Result<usize, MeasureError> {
    if o1.len() != o2.len() {
        return Err(MeasureError::DomainMismatch);
    }
    let mut gap = 0;
    for (u, v1) in o1.iter() {
        let v2 = o2.get(u).ok_or(MeasureError::DomainMismatch)?;
        for v in [v1, v2] {
            if !t.contains(v) {
                return Err(MeasureError::OriginOutsideInput(v.clone()));
            }
        }
        gap = gap.max(v1.distance(v2));
    }
    Ok(gap)
}

/// Result of a `k`-origin membership check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub member: bool,
    /// An origin of some run producing the output within distance `k`.
    pub witness: Option<OriginMapping>,
}

/// Decides `(t, s, o) ∈_k R_o(T)`: whether some run of `T` on `t` produces
/// `s` with every output node's origin within distance `k` of `o`.
///
/// The condition is a maximum over output nodes, so it is checked node by
/// node in a search over (state, input node, output node) triples.
pub fn k_origin_member(x: &TripleWithOrigin, t: &Tdtt, k: usize) -> Result<Membership, MeasureError> {
    t.input()
        .check(&x.input, false)
        .map_err(|e| TransducerError::BadInput(e.to_string()))?;
    let mut search = MemberSearch { t, x, k, memo: BTreeMap::new() };
    let q0: Symbol = t.initial().into();
    let found = search.fits(&q0, &Address::root(), &Address::root());
    Ok(match found {
        Some(map) => Membership { member: true, witness: Some(OriginMapping(map)) },
        None => Membership { member: false, witness: None },
    })
}

type Key = (Symbol, Address, Address);

struct MemberSearch<'a> {
    t: &'a Tdtt,
    x: &'a TripleWithOrigin,
    k: usize,
    memo: BTreeMap<Key, Option<BTreeMap<Address, Address>>>,
}

impl MemberSearch<'_> {
    /// Origins for the output subtree at `u` produced by state `q` at input
    /// node `v`, if some choice of rules keeps every origin close enough.
    fn fits(&mut self, q: &Symbol, v: &Address, u: &Address) -> Option<BTreeMap<Address, Address>> {
        let key = (q.clone(), v.clone(), u.clone());
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let f = self.x.input.label_at(v).expect("input node").to_string();
        let rules: Vec<Rhs> = self.t.rules_for(q, &f).map(|r| r.rhs.clone()).collect();
        let mut result = None;
        for rhs in rules {
            let mut acc = BTreeMap::new();
            if self.match_rhs(&rhs, v, u, &mut acc) {
                result = Some(acc);
                break;
            }
        }
        self.memo.insert(key, result.clone());
        result
    }

    fn match_rhs(&mut self, rhs: &Rhs, v: &Address, u: &Address, acc: &mut BTreeMap<Address, Address>) -> bool {
        match rhs {
            Rhs::Call { state, var } => match self.fits(state, &v.child(*var), u) {
                Some(m) => {
                    acc.extend(m);
                    true
                }
                None => false,
            },
            Rhs::Out { sym, children } => {
                let Some(node) = self.x.output.get(u) else { return false };
                if node.label != *sym || node.children.len() != children.len() {
                    return false;
                }
                let target = self.x.origin.get(u).expect("origin is total on the output");
                if v.distance(target) > self.k {
                    return false;
                }
                acc.insert(u.clone(), v.clone());
                children
                    .iter()
                    .enumerate()
                    .all(|(i, c)| self.match_rhs(c, v, &u.child(i + 1), acc))
            }
        }
    }
}

/// Outcome of a bounded inclusion check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundedInclusion {
    Ok { inputs_checked: usize },
    Counterexample(TripleWithOrigin),
}

/// Checks `(t, s, o) ∈_k R_o(T2)` for every `(t, s, o) ∈ R_o(T1)` with `t`
/// among the first inputs in size order. Returns the first failure.
pub fn k_origin_inclusion_bounded(
    t1: &Tdtt,
    t2: &Tdtt,
    k: usize,
    bound: InputBound,
) -> Result<BoundedInclusion, MeasureError> {
    let inputs = enumerate_by_size(t1.input(), bound.height, bound.max_trees);
    for input in &inputs {
        if t2.input().check(input, false).is_err() {
            // Inputs outside T2's alphabet have no T2 output at all.
            if let Some((s, o)) = relation_with_origins(t1, input, Budget::default())?.into_iter().next() {
                return Ok(BoundedInclusion::Counterexample(TripleWithOrigin { input: input.clone(), output: s, origin: o }));
            }
            continue;
        }
        for (s, o) in relation_with_origins(t1, input, Budget::default())? {
            let x = TripleWithOrigin { input: input.clone(), output: s, origin: o };
            if !k_origin_member(&x, t2, k)?.member {
                return Ok(BoundedInclusion::Counterexample(x));
            }
        }
    }
    Ok(BoundedInclusion::Ok { inputs_checked: inputs.len() })
}

/// Output delay between two ground-final runs over the same input: the
/// largest delay between the fixed outputs after the input has been
/// processed down to the same level.
pub fn run_delay(rho1: &Run, rho2: &Run) -> Result<usize, MeasureError> {
    if rho1.input() != rho2.input() {
        return Err(MeasureError::InputMismatch);
    }
    if !rho1.last().is_final() || !rho2.last().is_final() {
        return Err(MeasureError::NotGroundFinal);
    }
    let h = rho1.input().height();
    Ok((0..=h)
        .map(|d| tree_delay(&rho1.level_output(Some(d)), &rho2.level_output(Some(d))))
        .max()
        .unwrap_or(0))
}

fn runs_with_output(t: &Tdtt, input: &Tree, s: &Tree) -> Result<Vec<Run>, MeasureError> {
    Ok(enumerate_runs(t, input, Budget::default())?
        .complete
        .into_iter()
        .filter(|(_, out)| out == s)
        .map(|(r, _)| r)
        .collect())
}

/// Decides `(t, s) ∈_{D_k} R(T2)` for a pair of `T1`: some run of each
/// transducer produces `s` from `t` with delay at most `k`.
pub fn k_delay_member(input: &Tree, s: &Tree, t1: &Tdtt, t2: &Tdtt, k: usize) -> Result<bool, MeasureError> {
    let runs1 = runs_with_output(t1, input, s)?;
    let runs2 = runs_with_output(t2, input, s)?;
    for r1 in &runs1 {
        for r2 in &runs2 {
            if run_delay(r1, r2)? <= k {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Summary of a delay bound sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayBoundReport {
    /// Largest number of output nodes produced by one rule of either machine.
    pub ell: usize,
    /// The checked bound `ell · i`.
    pub bound: usize,
    pub pairs_checked: usize,
    pub max_delay: usize,
}

/// For monadic transducers: every pair of runs with the same output and
/// origin gap at most `i` has delay at most `ell · i`. The sweep covers the
/// inputs given by `bound`.
pub fn delay_bound_property(
    t1: &Tdtt,
    t2: &Tdtt,
    i: usize,
    bound: InputBound,
) -> Result<DelayBoundReport, MeasureError> {
    if !t1.is_monadic() || !t2.is_monadic() {
        return Err(MeasureError::NotMonadic);
    }
    let ell = t1.ell().max(t2.ell());
    let limit = ell * i;
    let mut report = DelayBoundReport { ell, bound: limit, pairs_checked: 0, max_delay: 0 };
    for input in enumerate_by_size(t1.input(), bound.height, bound.max_trees) {
        if t2.input().check(&input, false).is_err() {
            continue;
        }
        let runs1 = enumerate_runs(t1, &input, Budget::default())?.complete;
        let runs2 = enumerate_runs(t2, &input, Budget::default())?.complete;
        for (r1, s1) in &runs1 {
            let o1 = run_origin(r1);
            for (r2, s2) in &runs2 {
                if s1 != s2 || origin_gap(&input, &o1, &run_origin(r2))? > i {
                    continue;
                }
                let delay = run_delay(r1, r2)?;
                report.pairs_checked += 1;
                report.max_delay = report.max_delay.max(delay);
                if delay > limit {
                    return Err(MeasureError::DelayBoundViolated { input, delay, bound: limit });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::textio::tests::EXAMPLE1;
    use crate::transducer::tests::EXAMPLE2;

    pub(crate) const LEFT_ONLY: &str = "alphabet input { f/2, a/0 } alphabet output { h/1, b/0 }
transducer L { initial q rule q(a) -> b rule q(f(x1,x2)) -> h(q(x1)) }";

    fn tree(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    fn two_runs() -> (Tree, OriginMapping, OriginMapping) {
        let t = tree("f(f(f(a,a),a),f(f(a,a),a))");
        let o = OriginMapping::from_literals(&[("", ""), ("1", "1"), ("11", "11"), ("111", "111")]).unwrap();
        let o2 = OriginMapping::from_literals(&[("", ""), ("1", "2"), ("11", "21"), ("111", "211")]).unwrap();
        (t, o, o2)
    }

    #[test]
    fn origin_gap_of_left_and_right_runs() {
        let (t, o, o2) = two_runs();
        assert_eq!(origin_gap(&t, &o, &o2).unwrap(), 6);
        assert_eq!(origin_gap(&t, &o2, &o).unwrap(), 6);
        assert_eq!(origin_gap(&t, &o, &o).unwrap(), 0);
        let short = OriginMapping::from_literals(&[("", "")]).unwrap();
        assert_eq!(origin_gap(&t, &o, &short), Err(MeasureError::DomainMismatch));
    }

    #[test]
    fn membership_against_left_only_variant() {
        let (t, _, o2) = two_runs();
        let x = TripleWithOrigin::new(t, tree("h(h(h(b)))"), o2).unwrap();
        let e2 = Tdtt::parse(EXAMPLE2).unwrap();
        assert!(k_origin_member(&x, &e2, 0).unwrap().member);
        let left = Tdtt::parse(LEFT_ONLY).unwrap();
        assert!(!k_origin_member(&x, &left, 5).unwrap().member);
        let m = k_origin_member(&x, &left, 6).unwrap();
        assert!(m.member);
        assert_eq!(m.witness, Some(two_runs().1));
    }

    #[test]
    fn membership_matches_run_enumeration() {
        let (t, _, _) = two_runs();
        let e2 = Tdtt::parse(EXAMPLE2).unwrap();
        let left = Tdtt::parse(LEFT_ONLY).unwrap();
        for (s, o) in relation_with_origins(&e2, &t, Budget::default()).unwrap() {
            let x = TripleWithOrigin::new(t.clone(), s.clone(), o.clone()).unwrap();
            for k in 0..8 {
                let expected = relation_with_origins(&left, &t, Budget::default())
                    .unwrap()
                    .iter()
                    .any(|(s2, o2)| *s2 == s && origin_gap(&t, &o, o2).unwrap() <= k);
                assert_eq!(k_origin_member(&x, &left, k).unwrap().member, expected, "{x} k={k}");
            }
        }
    }

    #[test]
    fn wrong_output_is_not_member() {
        let (t, o, _) = two_runs();
        let x = TripleWithOrigin::new(t, tree("h(h(h(h(b))))"), o);
        assert!(x.is_err());
        let t = tree("f(a,a)");
        let x = TripleWithOrigin::new(t, tree("b"), OriginMapping::from_literals(&[("", "")]).unwrap()).unwrap();
        let left = Tdtt::parse(LEFT_ONLY).unwrap();
        assert!(!k_origin_member(&x, &left, 10).unwrap().member);
    }

    #[test]
    fn bounded_self_inclusion() {
        for text in [EXAMPLE1, EXAMPLE2, LEFT_ONLY] {
            let t = Tdtt::parse(text).unwrap();
            let r = k_origin_inclusion_bounded(&t, &t, 0, InputBound::height(3)).unwrap();
            assert!(matches!(r, BoundedInclusion::Ok { .. }), "{r:?}");
        }
    }

    #[test]
    fn bounded_inclusion_finds_counterexample() {
        let e2 = Tdtt::parse(EXAMPLE2).unwrap();
        let left = Tdtt::parse(LEFT_ONLY).unwrap();
        assert!(matches!(
            k_origin_inclusion_bounded(&left, &e2, 0, InputBound::height(3)).unwrap(),
            BoundedInclusion::Ok { .. }
        ));
        let BoundedInclusion::Counterexample(x) =
            k_origin_inclusion_bounded(&e2, &left, 1, InputBound::height(3)).unwrap()
        else {
            panic!("expected a counterexample")
        };
        assert_eq!(x.input, tree("f(a,a)"));
        assert!(!k_origin_member(&x, &left, 1).unwrap().member);
    }

    #[test]
    fn left_and_right_runs_have_zero_delay() {
        let (t, o, o2) = two_runs();
        let e2 = Tdtt::parse(EXAMPLE2).unwrap();
        let runs = enumerate_runs(&e2, &t, Budget::default()).unwrap().complete;
        let pick = |o: &OriginMapping| runs.iter().find(|(r, _)| run_origin(r) == *o).unwrap().0.clone();
        let (r1, r2) = (pick(&o), pick(&o2));
        assert_eq!(run_delay(&r1, &r2).unwrap(), 0);
        assert_eq!(run_delay(&r2, &r1).unwrap(), 0);
        assert_eq!(run_delay(&r1, &r1).unwrap(), 0);
        assert!(k_delay_member(&t, &tree("h(h(h(b)))"), &e2, &e2, 0).unwrap());
        assert!(!k_delay_member(&t, &tree("h(b)"), &e2, &e2, 5).unwrap());
    }

    #[test]
    fn delay_of_deleting_and_producing_runs() {
        // One machine outputs on the way down, the other only at the leaf.
        let eager = Tdtt::parse(
            "alphabet input { g/1, a/0 } alphabet output { g/1, a/0 }
transducer E { initial q rule q(g(x1)) -> g(q(x1)) rule q(a) -> a }",
        )
        .unwrap();
        let lazy = Tdtt::parse(
            "alphabet input { g/1, a/0 } alphabet output { g/1, a/0 }
transducer L { initial q rule q(g(x1)) -> p(x1) rule p(g(x1)) -> q(x1) rule q(a) -> a rule p(a) -> g(a) }",
        )
        .unwrap();
        let input = tree("g(a)");
        let r1 = enumerate_runs(&eager, &input, Budget::default()).unwrap().complete.remove(0).0;
        let r2 = enumerate_runs(&lazy, &input, Budget::default()).unwrap().complete.remove(0).0;
        // After level 0: g(_) against _, one pending letter.
        assert_eq!(run_delay(&r1, &r2).unwrap(), 1);
    }

    #[test]
    fn delay_bound_on_monadic_machines() {
        let e1 = Tdtt::parse(EXAMPLE1).unwrap();
        assert_eq!(e1.ell(), 1);
        let words = Tdtt::parse(
            "alphabet input { g/1, a/0 } alphabet output { g/1, a/0 }
transducer W { initial q rule q(g(x1)) -> g(q(x1)) rule q(g(x1)) -> g(p(x1)) rule p(g(x1)) -> g(p(x1)) rule p(a) -> a rule q(a) -> a }",
        )
        .unwrap();
        let r = delay_bound_property(&words, &words, 0, InputBound::height(4)).unwrap();
        assert_eq!(r.max_delay, 0);
        assert!(r.pairs_checked > 0);
        assert_eq!(delay_bound_property(&e1, &e1, 0, InputBound::height(2)), Err(MeasureError::NotMonadic));
    }
}
