//! `k`-origin uniformization by a deterministic transducer.
//!
//! Out builds a linear deterministic machine node by node: In picks the
//! input symbol, Out picks the output piece for its single thread. A
//! subtree's type tells whether the automaton of `T` accepts the resulting
//! trace and whether the input lies in the domain of `T`. Out's positions
//! are sets of types she promises to realise below; the root position holds
//! the types that are accepted or outside the domain. Out chooses a piece
//! and, per child carrying her thread, the largest set of types that keeps
//! the promise whatever the other children hold. The game is solved as a
//! greatest fixpoint and a winning strategy becomes the machine.
//!
//! Out's pieces are the linear pieces of height at most `M + 2kM` that can
//! occur in outputs of `T`, plus the least ground piece.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::arena::{choice_height, Automaton, OutputChoices, TraceLabel};
use crate::measures::{k_origin_member, InputBound, TripleWithOrigin};
use crate::textio::{Rhs, Rule, TransducerSpec};
use crate::transducer::{classify, evaluate_deterministic, relation_with_origins, Budget, Tdtt};
use crate::trees::{enumerate_by_size, Symbol, Tree};

use super::engine::{Engine, TypeData};
use super::{Caps, Decision, DecisionError, Kind, Stats, Verdict, Witness};

/// Out's pieces for input symbols of rank `rank`.
pub fn candidate_pieces(t: &Tdtt, k: usize, rank: usize, cap: usize) -> Vec<Tree> {
    let h = choice_height(t, k);
    let shapes = output_shapes(t, h, cap);
    let mut pieces = BTreeSet::new();
    for s in &shapes {
        for p in assign_variables(s, rank) {
            pieces.insert(p);
        }
    }
    if let Some(g) = OutputChoices::with_height(t, 0, h).next() {
        pieces.insert(g);
    }
    let mut out: Vec<Tree> = pieces.into_iter().collect();
    out.sort_by_key(|p| (p.height(), p.to_string()));
    out.truncate(cap);
    out
}

/// Prefixes of height at most `h` of subtrees of outputs of `t`, with cut
/// points as holes.
pub fn output_shapes(t: &Tdtt, h: usize, cap: usize) -> BTreeSet<Tree> {
    // prefixes[q][d]: prefixes of height ≤ d of outputs from q.
    let states: Vec<String> = t.states().map(String::from).collect();
    let mut prefixes: BTreeMap<(String, usize), BTreeSet<Tree>> = BTreeMap::new();
    for q in &states {
        for d in 0..=h {
            prefixes.insert((q.clone(), d), [Tree::hole()].into_iter().collect());
        }
    }
    fn inst(rhs: &Rhs, d: usize, prefixes: &BTreeMap<(String, usize), BTreeSet<Tree>>, cap: usize) -> BTreeSet<Tree> {
        match rhs {
            Rhs::Call { state, .. } => prefixes[&(state.to_string(), d)].clone(),
            Rhs::Out { sym, children } => {
                let mut out: BTreeSet<Tree> = [Tree::hole()].into_iter().collect();
                if children.is_empty() {
                    out.insert(Tree::with_symbol(sym.clone(), Vec::new()));
                } else if d >= 1 {
                    let mut combos: Vec<Vec<Tree>> = vec![Vec::new()];
                    for c in children {
                        let opts = inst(c, d - 1, prefixes, cap);
                        let mut next = Vec::new();
                        'outer: for combo in &combos {
                            for o in &opts {
                                let mut v = combo.clone();
                                v.push(o.clone());
                                next.push(v);
                                if next.len() >= cap {
                                    break 'outer;
                                }
                            }
                        }
                        combos = next;
                    }
                    out.extend(combos.into_iter().map(|kids| Tree::with_symbol(sym.clone(), kids)));
                }
                out
            }
        }
    }
    loop {
        let mut changed = false;
        for r in t.rules() {
            for d in 0..=h {
                let new = inst(&r.rhs, d, &prefixes, cap);
                let set = prefixes.get_mut(&(r.state.to_string(), d)).expect("state");
                for p in new {
                    if set.len() >= cap {
                        break;
                    }
                    changed |= set.insert(p);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut shapes = BTreeSet::new();
    for r in t.rules() {
        let mut nodes = Vec::new();
        fn out_nodes<'r>(rhs: &'r Rhs, acc: &mut Vec<&'r Rhs>) {
            if let Rhs::Out { children, .. } = rhs {
                acc.push(rhs);
                children.iter().for_each(|c| out_nodes(c, acc));
            }
        }
        out_nodes(&r.rhs, &mut nodes);
        for n in nodes {
            shapes.extend(inst(n, h, &prefixes, cap));
        }
        shapes.extend(inst(&r.rhs, h, &prefixes, cap));
    }
    shapes
}

/// All ways to replace the holes of `shape` by distinct variables `x_1..x_rank`.
fn assign_variables(shape: &Tree, rank: usize) -> Vec<Tree> {
    let holes = shape.hole_count();
    if holes > rank {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut choice: Vec<usize> = Vec::new();
    fn pick(holes: usize, rank: usize, choice: &mut Vec<usize>, shape: &Tree, out: &mut Vec<Tree>) {
        if choice.len() == holes {
            let mut it = choice.iter();
            out.push(fill(shape, &mut it));
            return;
        }
        for j in 1..=rank {
            if !choice.contains(&j) {
                choice.push(j);
                pick(holes, rank, choice, shape, out);
                choice.pop();
            }
        }
    }
    fn fill(t: &Tree, it: &mut std::slice::Iter<'_, usize>) -> Tree {
        if t.is_hole() {
            return Tree::var(*it.next().expect("one variable per hole"));
        }
        Tree::with_symbol(t.label.clone(), t.children.iter().map(|c| fill(c, it)).collect())
    }
    pick(holes, rank, &mut choice, shape, &mut out);
    out
}

/// A symbol of the input alphabet with Out's pieces for it.
struct Letter {
    sym: Symbol,
    rank: usize,
    pieces: Vec<Tree>,
    /// Per piece, the children carrying Out's thread.
    threaded: Vec<Vec<usize>>,
}

/// Realisable types: `zero` for subtrees without Out's thread, `one` for
/// subtrees with it, and the type of each combination.
struct Realisable {
    zero: Vec<TypeData>,
    one: Vec<TypeData>,
    /// (letter, piece or None, children) to the index of the result in
    /// `one` (with a piece) or `zero` (without).
    table: HashMap<(usize, Option<usize>, Vec<usize>), usize>,
}

fn realisable(letters: &[Letter], engine: &mut Engine<'_>, caps: Caps) -> Option<Realisable> {
    let mut r = Realisable { zero: Vec::new(), one: Vec::new(), table: HashMap::new() };
    let mut idx0: HashMap<TypeData, usize> = HashMap::new();
    let mut idx1: HashMap<TypeData, usize> = HashMap::new();
    loop {
        let before = (r.zero.len(), r.one.len());
        for (li, l) in letters.iter().enumerate() {
            // Without Out's thread.
            for kids in all_tuples(&vec![r.zero.len(); l.rank]) {
                let key = (li, None, kids.clone());
                if r.table.contains_key(&key) {
                    continue;
                }
                let label = TraceLabel { sym: l.sym.clone(), rank: l.rank, pieces: Vec::new() };
                let data = {
                    let kd: Vec<&TypeData> = kids.iter().map(|&c| &r.zero[c]).collect();
                    engine.evaluate(&label, &kd)
                };
                let id = *idx0.entry(data.clone()).or_insert_with(|| {
                    r.zero.push(data);
                    r.zero.len() - 1
                });
                r.table.insert(key, id);
            }
            for (pi, piece) in l.pieces.iter().enumerate() {
                let (n0, n1) = (r.zero.len(), r.one.len());
                let sizes: Vec<usize> =
                    (1..=l.rank).map(|j| if l.threaded[pi].contains(&j) { n1 } else { n0 }).collect();
                for kids in all_tuples(&sizes) {
                    let key = (li, Some(pi), kids.clone());
                    if r.table.contains_key(&key) {
                        continue;
                    }
                    let label = TraceLabel { sym: l.sym.clone(), rank: l.rank, pieces: vec![piece.clone()] };
                    let data = {
                        let kd: Vec<&TypeData> = kids
                            .iter()
                            .enumerate()
                            .map(|(j, &c)| if l.threaded[pi].contains(&(j + 1)) { &r.one[c] } else { &r.zero[c] })
                            .collect();
                        engine.evaluate(&label, &kd)
                    };
                    let id = *idx1.entry(data.clone()).or_insert_with(|| {
                        r.one.push(data);
                        r.one.len() - 1
                    });
                    r.table.insert(key, id);
                }
            }
            if r.zero.len() + r.one.len() > caps.max_states || engine.has_missing() {
                return None;
            }
        }
        if (r.zero.len(), r.one.len()) == before {
            return Some(r);
        }
    }
}

fn all_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        let mut next = Vec::with_capacity(out.len() * n);
        for prefix in &out {
            for i in 0..n {
                let mut v = prefix.clone();
                v.push(i);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// One move of Out: a piece and a target position per threaded child.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Move {
    piece: usize,
    targets: Vec<(usize, usize)>,
}

/// The safety game over sets of realisable types.
struct Game {
    positions: Vec<BTreeSet<usize>>,
    /// moves[position][letter]
    moves: Vec<Vec<Vec<Move>>>,
    /// Some threaded-children configuration was not analysed.
    incomplete: bool,
}

fn build_game(letters: &[Letter], r: &Realisable, good: BTreeSet<usize>, caps: Caps) -> Option<Game> {
    let mut game = Game { positions: Vec::new(), moves: Vec::new(), incomplete: false };
    let mut index: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    index.insert(good.clone(), 0);
    game.positions.push(good);
    let mut queue = VecDeque::from([0usize]);
    let n0 = r.zero.len();
    let n1 = r.one.len();
    while let Some(p) = queue.pop_front() {
        let z = game.positions[p].clone();
        let mut per_letter = Vec::new();
        for (li, l) in letters.iter().enumerate() {
            let mut moves = Vec::new();
            for (pi, _) in l.pieces.iter().enumerate() {
                let th = &l.threaded[pi];
                let lands = |kids: &[usize]| z.contains(&r.table[&(li, Some(pi), kids.to_vec())]);
                let sizes = |fixed: &[(usize, usize)]| -> Vec<Vec<usize>> {
                    // Tuples with the threaded children fixed.
                    let ranges: Vec<usize> = (1..=l.rank)
                        .map(|j| if fixed.iter().any(|(d, _)| *d == j) { 1 } else { n0 })
                        .collect();
                    all_tuples(&ranges)
                        .into_iter()
                        .map(|mut t| {
                            for &(d, v) in fixed {
                                t[d - 1] = v;
                            }
                            t
                        })
                        .collect()
                };
                let target_sets: Vec<Vec<BTreeSet<usize>>> = match th.len() {
                    0 => {
                        if sizes(&[]).iter().all(|t| lands(t)) {
                            vec![Vec::new()]
                        } else {
                            Vec::new()
                        }
                    }
                    1 => {
                        let d = th[0];
                        let pre: BTreeSet<usize> =
                            (0..n1).filter(|&a| sizes(&[(d, a)]).iter().all(|t| lands(t))).collect();
                        if pre.is_empty() {
                            Vec::new()
                        } else {
                            vec![vec![pre]]
                        }
                    }
                    2 => {
                        let (d1, d2) = (th[0], th[1]);
                        let rel: Vec<BTreeSet<usize>> = (0..n1)
                            .map(|a| {
                                (0..n1).filter(|&b| sizes(&[(d1, a), (d2, b)]).iter().all(|t| lands(t))).collect()
                            })
                            .collect();
                        maximal_rectangles(&rel).into_iter().map(|(a, b)| vec![a, b]).collect()
                    }
                    _ => {
                        game.incomplete = true;
                        Vec::new()
                    }
                };
                for sets in target_sets {
                    let mut targets = Vec::new();
                    for (d, set) in th.iter().zip(sets) {
                        let id = match index.get(&set) {
                            Some(&i) => i,
                            None => {
                                if game.positions.len() >= caps.max_states {
                                    return None;
                                }
                                let i = game.positions.len();
                                index.insert(set.clone(), i);
                                game.positions.push(set);
                                queue.push_back(i);
                                i
                            }
                        };
                        targets.push((*d, id));
                    }
                    moves.push(Move { piece: pi, targets });
                }
            }
            per_letter.push(moves);
        }
        if game.moves.len() <= p {
            game.moves.resize(p + 1, Vec::new());
        }
        game.moves[p] = per_letter;
    }
    Some(game)
}

/// Maximal pairs `(A, B)` with `A × B` inside the relation, both nonempty,
/// given as the row sets of the relation.
fn maximal_rectangles(rows: &[BTreeSet<usize>]) -> Vec<(BTreeSet<usize>, BTreeSet<usize>)> {
    // Closed column sets are intersections of rows.
    let mut closed: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    for r in rows.iter().filter(|r| !r.is_empty()) {
        let mut add = vec![r.clone()];
        for c in &closed {
            let i: BTreeSet<usize> = c.intersection(r).copied().collect();
            if !i.is_empty() {
                add.push(i);
            }
        }
        closed.extend(add);
    }
    closed
        .into_iter()
        .map(|b| {
            let a: BTreeSet<usize> = (0..rows.len()).filter(|&i| b.is_subset(&rows[i])).collect();
            (a, b)
        })
        .collect()
}

/// Winning positions of Out: the greatest set of nonempty positions where
/// every letter has a move into the set.
fn solve(game: &Game) -> Vec<bool> {
    let mut win: Vec<bool> = game.positions.iter().map(|p| !p.is_empty()).collect();
    loop {
        let mut changed = false;
        for p in 0..game.positions.len() {
            if win[p] && !game.moves[p].iter().all(|ms| ms.iter().any(|m| m.targets.iter().all(|&(_, t)| win[t]))) {
                win[p] = false;
                changed = true;
            }
        }
        if !changed {
            return win;
        }
    }
}

/// Whether move `a` dominates move `b`: it threads the same children into
/// positions promising at least as much. Out wins from a position whenever
/// she wins from a smaller one, so dominated moves are never needed.
fn dominates(game: &Game, a: &Move, b: &Move) -> bool {
    a.targets.len() == b.targets.len()
        && a.targets
            .iter()
            .zip(&b.targets)
            .all(|(&(da, ta), &(db, tb))| da == db && game.positions[tb].is_subset(&game.positions[ta]))
}

/// Per position and letter, the indices of moves not dominated by another
/// move. Of moves dominating each other, the first is kept.
fn undominated(game: &Game) -> Vec<Vec<Vec<usize>>> {
    game.moves
        .iter()
        .map(|per_letter| {
            per_letter
                .iter()
                .map(|ms| {
                    (0..ms.len())
                        .filter(|&i| {
                            !ms.iter().enumerate().any(|(j, o)| {
                                j != i && dominates(game, o, &ms[i]) && (j < i || !dominates(game, &ms[i], o))
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Searches positional strategies of Out, independently of [`solve`],
/// over undominated moves.
///
/// A position is losing when no positional strategy from it keeps every
/// reached position nonempty. Each position in turn is searched exhaustively
/// from scratch; a failed search marks it losing, and later searches skip
/// moves into losing positions. Rounds repeat until nothing changes. `None`
/// if more than `budget` moves were tried in total.
fn exhaust_strategies(game: &Game, budget: usize) -> Option<bool> {
    struct Search<'g> {
        game: &'g Game,
        options: Vec<Vec<Vec<usize>>>,
        losing: Vec<bool>,
        tried: usize,
        budget: usize,
    }

    impl Search<'_> {
        fn viable(&self, p: usize, l: usize) -> impl Iterator<Item = usize> + '_ {
            self.options[p][l].iter().copied().filter(move |&mi| {
                self.game.moves[p][l][mi].targets.iter().all(|&(_, t)| !self.losing[t])
            })
        }

        /// Marks `p` losing if some letter leaves no viable move there.
        fn refute(&mut self, p: usize) -> bool {
            if !self.losing[p] && (0..self.game.moves[p].len()).any(|l| self.viable(p, l).next().is_none()) {
                self.losing[p] = true;
            }
            self.losing[p]
        }

        fn run(
            &mut self,
            assigned: &mut BTreeMap<(usize, usize), usize>,
            pending: &mut Vec<(usize, usize)>,
        ) -> Option<bool> {
            let Some(next) = pending.pop() else { return Some(true) };
            let r = self.step(next, assigned, pending);
            pending.push(next);
            r
        }

        fn step(
            &mut self,
            (p, l): (usize, usize),
            assigned: &mut BTreeMap<(usize, usize), usize>,
            pending: &mut Vec<(usize, usize)>,
        ) -> Option<bool> {
            if let Some(&mi) = assigned.get(&(p, l)) {
                if self.game.moves[p][l][mi].targets.iter().any(|&(_, t)| self.losing[t]) {
                    return Some(false);
                }
                return self.run(assigned, pending);
            }
            if self.refute(p) {
                return Some(false);
            }
            let moves: Vec<usize> = self.viable(p, l).collect();
            for mi in moves {
                self.tried += 1;
                if self.tried > self.budget {
                    return None;
                }
                let targets: Vec<usize> = self.game.moves[p][l][mi].targets.iter().map(|&(_, t)| t).collect();
                if targets.iter().any(|&t| self.refute(t)) {
                    continue;
                }
                assigned.insert((p, l), mi);
                let mark = pending.len();
                for &t in &targets {
                    for l2 in (0..self.game.moves[t].len()).rev() {
                        if !assigned.contains_key(&(t, l2)) {
                            pending.push((t, l2));
                        }
                    }
                }
                let r = self.run(assigned, pending);
                pending.truncate(mark);
                assigned.remove(&(p, l));
                if r != Some(false) {
                    return r;
                }
                if self.losing[p] {
                    return Some(false);
                }
            }
            self.refute(p);
            Some(false)
        }
    }

    let mut s = Search {
        game,
        options: undominated(game),
        losing: game.positions.iter().map(BTreeSet::is_empty).collect(),
        tried: 0,
        budget,
    };
    loop {
        let mut changed = false;
        for p in (0..game.positions.len()).rev() {
            if s.losing[p] {
                continue;
            }
            let mut pending: Vec<(usize, usize)> = (0..game.moves[p].len()).map(|l| (p, l)).rev().collect();
            if !s.run(&mut BTreeMap::new(), &mut pending)? {
                s.losing[p] = true;
            }
            changed |= s.losing[p];
        }
        if !changed {
            return Some(!s.losing[0]);
        }
    }
}

/// Compiles a winning strategy into a deterministic transducer whose states
/// are the reachable winning positions. Ties go to the least piece.
fn extract(t: &Tdtt, letters: &[Letter], game: &Game, win: &[bool]) -> Result<Tdtt, DecisionError> {
    let mut names: BTreeMap<usize, String> = BTreeMap::new();
    names.insert(0, "u0".to_string());
    let mut queue = VecDeque::from([0usize]);
    let mut rules = Vec::new();
    while let Some(p) = queue.pop_front() {
        for (li, l) in letters.iter().enumerate() {
            let m = game.moves[p][li]
                .iter()
                .find(|m| m.targets.iter().all(|&(_, t)| win[t]))
                .expect("winning positions have winning moves");
            let mut calls = BTreeMap::new();
            for &(d, target) in &m.targets {
                let next = names.len();
                let name = names.entry(target).or_insert_with(|| {
                    queue.push_back(target);
                    format!("u{next}")
                });
                calls.insert(d, name.clone());
            }
            let rhs = piece_to_rhs(&l.pieces[m.piece], &calls);
            rules.push(Rule { state: Arc::from(names[&p].as_str()), symbol: l.sym.clone(), rhs });
        }
    }
    let spec = TransducerSpec {
        name: format!("{}_uniformizer", t.name()),
        input: t.input().clone(),
        output: t.output().clone(),
        states: names.values().cloned().collect(),
        initial: "u0".to_string(),
        rules,
    };
    Ok(Tdtt::new(spec)?)
}

fn piece_to_rhs(p: &Tree, calls: &BTreeMap<usize, String>) -> Rhs {
    if let Some(j) = p.as_var() {
        return Rhs::call(&calls[&j], j);
    }
    Rhs::Out { sym: p.label.clone(), children: p.children.iter().map(|c| piece_to_rhs(c, calls)).collect() }
}

/// In's winning play from a losing position: per reached position, a
/// letter for which every move of Out leaves the winning region.
fn in_strategy(letters: &[Letter], game: &Game, win: &[bool]) -> String {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([0usize]);
    let mut parts = Vec::new();
    while let Some(p) = queue.pop_front() {
        if !seen.insert(p) || win[p] || game.positions[p].is_empty() {
            continue;
        }
        let Some(li) = (0..letters.len())
            .find(|&li| !game.moves[p][li].iter().any(|m| m.targets.iter().all(|&(_, t)| win[t])))
        else {
            continue;
        };
        parts.push(format!("position {p}: play {}", letters[li].sym));
        for m in &game.moves[p][li] {
            for &(_, t) in &m.targets {
                queue.push_back(t);
            }
        }
        if parts.len() >= 16 {
            parts.push("...".to_string());
            break;
        }
    }
    parts.join("; ")
}

/// Decides whether a linear deterministic machine `U` exists with
/// `dom(U) ⊇ dom(T)` and `R_o(U) ⊆_k R_o(T)` on `dom(T)`, and extracts one.
pub fn uniformize(t: &Tdtt, k: usize, caps: Caps) -> Result<Decision, DecisionError> {
    let letters: Vec<Letter> = t
        .input()
        .iter()
        .map(|(s, rank)| {
            let pieces = candidate_pieces(t, k, rank, caps.max_pieces);
            let threaded = pieces.iter().map(|p| p.var_occurrences()).collect();
            Letter { sym: Arc::from(s), rank, pieces, threaded }
        })
        .collect();
    let mut engine = Engine::new(Automaton::new(t, k), true);
    let mut stats = Stats::default();
    let undetermined = |why: String, stats: Stats| Decision {
        kind: Kind::Uniformize,
        k,
        verdict: Verdict::Undetermined(why),
        stats,
        machine: None,
    };
    let r = loop {
        let r = realisable(&letters, &mut engine, caps);
        if engine.has_missing() {
            engine.absorb_missing();
            stats.restarts += 1;
            continue;
        }
        match r {
            Some(r) => break r,
            None => return Ok(undetermined(format!("more than {} types", caps.max_states), stats)),
        }
    };
    stats.obligations = engine.universe_size();
    let q0: Symbol = Arc::from(t.initial());
    let init = engine.initial_id();
    let good: BTreeSet<usize> = (0..r.one.len())
        .filter(|&i| !r.one[i].dom.contains(&q0) || r.one[i].sat.binary_search(&init).is_ok())
        .collect();
    let Some(game) = build_game(&letters, &r, good, caps) else {
        return Ok(undetermined(format!("more than {} positions", caps.max_states), stats));
    };
    stats.states = r.zero.len() + r.one.len() + game.positions.len();
    let win = solve(&game);
    if win[0] {
        let machine = extract(t, &letters, &game, &win)?;
        return Ok(Decision { kind: Kind::Uniformize, k, verdict: Verdict::Yes, stats, machine: Some(machine) });
    }
    if game.incomplete {
        return Ok(undetermined(
            "some pieces continue Out's thread in more than two children".to_string(),
            stats,
        ));
    }
    let note = in_strategy(&letters, &game, &win);
    let witness = Witness { direction: format!("uniformizer for {}", t.name()), triple: None, trace: None, note: Some(note) };
    Ok(Decision { kind: Kind::Uniformize, k, verdict: Verdict::No(Box::new(witness)), stats, machine: None })
}

/// Re-decides a uniformization game by exhausting Out's positional
/// strategies instead of computing the fixpoint. `None` when the search
/// exceeds `budget` steps.
pub fn uniformize_by_exhaustion(t: &Tdtt, k: usize, caps: Caps, budget: usize) -> Result<Option<bool>, DecisionError> {
    let letters: Vec<Letter> = t
        .input()
        .iter()
        .map(|(s, rank)| {
            let pieces = candidate_pieces(t, k, rank, caps.max_pieces);
            let threaded = pieces.iter().map(|p| p.var_occurrences()).collect();
            Letter { sym: Arc::from(s), rank, pieces, threaded }
        })
        .collect();
    let mut engine = Engine::new(Automaton::new(t, k), true);
    let r = loop {
        let r = realisable(&letters, &mut engine, caps);
        if engine.has_missing() {
            engine.absorb_missing();
            continue;
        }
        match r {
            Some(r) => break r,
            None => return Ok(None),
        }
    };
    let q0: Symbol = Arc::from(t.initial());
    let good: BTreeSet<usize> = (0..r.one.len())
        .filter(|&i| !r.one[i].dom.contains(&q0) || r.one[i].sat.binary_search(&engine.initial_id()).is_ok())
        .collect();
    let Some(game) = build_game(&letters, &r, good, caps) else { return Ok(None) };
    if game.positions[0].is_empty() {
        return Ok(Some(false));
    }
    Ok(exhaust_strategies(&game, budget))
}

/// Outcome of checking a candidate uniformizer on bounded inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UniformizerCheck {
    Ok { inputs_checked: usize },
    Counterexample { input: Tree, reason: String },
}

/// Checks on every input within `bound` that lies in the domain of `t` that
/// the deterministic `u` produces an output whose triple is `k`-origin
/// close to a run of `t`.
pub fn verify_uniformizer(u: &Tdtt, t: &Tdtt, k: usize, bound: InputBound) -> Result<UniformizerCheck, DecisionError> {
    if !classify(u).deterministic {
        return Err(crate::transducer::TransducerError::NotDeterministic.into());
    }
    let inputs = enumerate_by_size(t.input(), bound.height, bound.max_trees);
    for input in &inputs {
        if relation_with_origins(t, input, Budget::default())?.is_empty() {
            continue;
        }
        let Some((s, o)) = evaluate_deterministic(u, input)? else {
            return Ok(UniformizerCheck::Counterexample {
                input: input.clone(),
                reason: format!("{} has no output", u.name()),
            });
        };
        let x = TripleWithOrigin { input: input.clone(), output: s, origin: o };
        if !k_origin_member(&x, t, k)?.member {
            return Ok(UniformizerCheck::Counterexample {
                input: input.clone(),
                reason: format!("{x} is not {k}-origin close to {}", t.name()),
            });
        }
    }
    Ok(UniformizerCheck::Ok { inputs_checked: inputs.len() })
}
