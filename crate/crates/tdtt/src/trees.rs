//! Ranked alphabets, finite ranked trees, node addresses and the prefix algebra
//! (greatest common prefix, difference trees, delay) shared by every other module.
//!
//! One representation covers ground trees, partial trees, contexts and special
//! trees. Reserved labels mark the non-alphabet leaves:
//!
//! * `x1`, `x2`, ... are context variables,
//! * `HOLE` is the hole of a special tree,
//! * `_` is a gap in a partial tree (a position whose content is not known).
//!
//! A partial tree may also carry a symbol of positive rank at a leaf; that is
//! how prefixes cut off at some depth are written.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned-by-sharing symbol name.
pub type Symbol = Arc<str>;

/// Reserved label of the hole of a special tree.
pub const HOLE: &str = "HOLE";
/// Reserved label of a gap inside a partial tree.
pub const GAP: &str = "_";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("address {0} is not in the domain of the tree")]
    AddressOutOfDomain(Address),
    #[error("special tree has no hole")]
    NoHole,
    #[error("special tree has {0} holes, expected exactly one")]
    MultipleHoles(usize),
    #[error("context uses variable x{used} but only {given} arguments were supplied")]
    ArityMismatch { used: usize, given: usize },
    #[error("tree literal: {msg} at offset {offset}")]
    Syntax { msg: String, offset: usize },
    #[error("symbol `{symbol}` used with {found} children but has rank {rank}")]
    RankMismatch { symbol: String, rank: usize, found: usize },
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
}

/// A finite ranked alphabet: symbol name to rank.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RankedAlphabet {
    symbols: BTreeMap<String, usize>,
}

impl RankedAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an alphabet from `(name, rank)` pairs.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Self {
        let mut alphabet = Self::new();
        for (name, rank) in pairs {
            alphabet.insert(name, rank);
        }
        alphabet
    }

    /// Inserts a symbol; returns the previous rank if the name was already present.
    pub fn insert(&mut self, name: &str, rank: usize) -> Option<usize> {
        self.symbols.insert(name.to_string(), rank)
    }

    pub fn rank(&self, name: &str) -> Option<usize> {
        self.symbols.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    pub fn max_rank(&self) -> usize {
        self.symbols.values().copied().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbols in name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.symbols.iter().map(|(n, r)| (n.as_str(), *r))
    }

    /// Symbols of the given rank, in name order.
    pub fn of_rank(&self, rank: usize) -> impl Iterator<Item = &str> {
        self.symbols
            .iter()
            .filter(move |(_, r)| **r == rank)
            .map(|(n, _)| n.as_str())
    }

    /// True when every symbol has rank at most one (a word alphabet).
    pub fn is_monadic(&self) -> bool {
        self.symbols.values().all(|r| *r <= 1)
    }

    /// Checks that every node of `t` is labelled by a symbol of this alphabet
    /// with exactly as many children as its rank. With `partial` set, nodes may
    /// also be leaves regardless of rank, and gaps are allowed.
    pub fn check(&self, t: &Tree, partial: bool) -> Result<(), TreeError> {
        if partial && t.is_gap() {
            return Ok(());
        }
        let rank = self
            .rank(&t.label)
            .ok_or_else(|| TreeError::UnknownSymbol(t.label.to_string()))?;
        let found = t.children.len();
        if found != rank && !(partial && found == 0) {
            return Err(TreeError::RankMismatch {
                symbol: t.label.to_string(),
                rank,
                found,
            });
        }
        t.children.iter().try_for_each(|c| self.check(c, partial))
    }
}

/// A node address: the path of 1-based child indices from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address(pub Vec<usize>);

impl Address {
    pub fn root() -> Self {
        Address(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The address of the `j`-th child (1-based).
    pub fn child(&self, j: usize) -> Self {
        let mut path = self.0.clone();
        path.push(j);
        Address(path)
    }

    /// Concatenation `self · other`.
    pub fn join(&self, other: &Address) -> Self {
        let mut path = self.0.clone();
        path.extend_from_slice(&other.0);
        Address(path)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(Address(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// True if `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Address) -> bool {
        other.0.starts_with(&self.0)
    }

    /// Length of the longest common prefix of two addresses.
    pub fn common_prefix_len(&self, other: &Address) -> usize {
        self.0
            .iter()
            .zip(other.0.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Undirected path length between two nodes of a tree.
    pub fn distance(&self, other: &Address) -> usize {
        self.len() + other.len() - 2 * self.common_prefix_len(other)
    }

    /// Parses `ε`, the empty string, `1.1.2`, or the undotted form `112`
    /// (only valid when every index is a single digit).
    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let text = text.trim();
        if text.is_empty() || text == "ε" || text == "eps" {
            return Ok(Address::root());
        }
        let bad = |offset| TreeError::Syntax {
            msg: format!("invalid address `{text}`"),
            offset,
        };
        let parts: Vec<&str> = if text.contains('.') {
            text.split('.').collect()
        } else {
            text.char_indices().map(|(i, _)| &text[i..i + 1]).collect()
        };
        let mut path = Vec::with_capacity(parts.len());
        for (i, p) in parts.iter().enumerate() {
            let n: usize = p.parse().map_err(|_| bad(i))?;
            if n == 0 {
                return Err(bad(i));
            }
            path.push(n);
        }
        Ok(Address(path))
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl From<Vec<usize>> for Address {
    fn from(v: Vec<usize>) -> Self {
        Address(v)
    }
}

/// A finite ordered labelled tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    pub label: Symbol,
    pub children: Vec<Tree>,
}

/// Returns the variable index of a label `x<i>` (`i ≥ 1`), if it is one.
pub fn variable_index(label: &str) -> Option<usize> {
    let digits = label.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// The reserved label of variable `x_i`.
pub fn variable_name(i: usize) -> String {
    format!("x{i}")
}

impl Tree {
    pub fn leaf(label: &str) -> Self {
        Tree { label: Arc::from(label), children: Vec::new() }
    }

    pub fn node(label: &str, children: Vec<Tree>) -> Self {
        Tree { label: Arc::from(label), children }
    }

    pub fn with_symbol(label: Symbol, children: Vec<Tree>) -> Self {
        Tree { label, children }
    }

    pub fn hole() -> Self {
        Tree::leaf(HOLE)
    }

    pub fn gap() -> Self {
        Tree::leaf(GAP)
    }

    pub fn var(i: usize) -> Self {
        Tree::leaf(&variable_name(i))
    }

    pub fn is_hole(&self) -> bool {
        &*self.label == HOLE
    }

    pub fn is_gap(&self) -> bool {
        &*self.label == GAP
    }

    pub fn as_var(&self) -> Option<usize> {
        if self.children.is_empty() {
            variable_index(&self.label)
        } else {
            None
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Parses a tree literal such as `f(g(h(a)), a)`.
    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let mut p = LiteralParser { src: text.as_bytes(), pos: 0 };
        let t = p.tree()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(TreeError::Syntax { msg: "trailing input".into(), offset: p.pos });
        }
        Ok(t)
    }

    /// Height: number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.children.iter().map(|c| c.height() + 1).max().unwrap_or(0)
    }

    /// Height after removing gap leaves.
    pub fn solid_height(&self) -> usize {
        self.children
            .iter()
            .filter(|c| !c.is_gap())
            .map(|c| c.solid_height() + 1)
            .max()
            .unwrap_or(0)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    /// All addresses of the tree in pre-order (which is lexicographic order).
    pub fn domain(&self) -> Vec<Address> {
        let mut out = Vec::new();
        fn walk(t: &Tree, path: &mut Vec<usize>, out: &mut Vec<Address>) {
            out.push(Address(path.clone()));
            for (i, c) in t.children.iter().enumerate() {
                path.push(i + 1);
                walk(c, path, out);
                path.pop();
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn get(&self, u: &Address) -> Option<&Tree> {
        let mut cur = self;
        for &i in &u.0 {
            cur = cur.children.get(i.checked_sub(1)?)?;
        }
        Some(cur)
    }

    pub fn contains(&self, u: &Address) -> bool {
        self.get(u).is_some()
    }

    /// The label at address `u`.
    pub fn label_at(&self, u: &Address) -> Option<&str> {
        self.get(u).map(|t| &*t.label)
    }

    /// Replaces the subtree at `u` with `s`.
    pub fn replace_at(&self, u: &Address, s: Tree) -> Result<Tree, TreeError> {
        fn go(t: &Tree, path: &[usize], s: Tree) -> Option<Tree> {
            match path.split_first() {
                None => Some(s),
                Some((&i, rest)) => {
                    let idx = i.checked_sub(1)?;
                    let child = t.children.get(idx)?;
                    let new_child = go(child, rest, s)?;
                    let mut children = t.children.clone();
                    children[idx] = new_child;
                    Some(Tree { label: t.label.clone(), children })
                }
            }
        }
        go(self, &u.0, s).ok_or_else(|| TreeError::AddressOutOfDomain(u.clone()))
    }

    /// Addresses of all leaves carrying the given label, in pre-order.
    pub fn find_leaves(&self, pred: impl Fn(&Tree) -> bool) -> Vec<Address> {
        self.domain()
            .into_iter()
            .filter(|u| {
                let n = self.get(u).expect("domain address");
                n.is_leaf() && pred(n)
            })
            .collect()
    }

    /// Largest variable index used, 0 if none.
    pub fn max_var(&self) -> usize {
        let own = self.as_var().unwrap_or(0);
        self.children.iter().map(Tree::max_var).fold(own, usize::max)
    }

    /// Variables in pre-order of occurrence (with repetitions).
    pub fn var_occurrences(&self) -> Vec<usize> {
        let mut out = Vec::new();
        fn walk(t: &Tree, out: &mut Vec<usize>) {
            if let Some(i) = t.as_var() {
                out.push(i);
            }
            t.children.iter().for_each(|c| walk(c, out));
        }
        walk(self, &mut out);
        out
    }

    pub fn hole_count(&self) -> usize {
        usize::from(self.is_hole() && self.is_leaf())
            + self.children.iter().map(Tree::hole_count).sum::<usize>()
    }

    /// No variables, holes or gaps.
    pub fn is_ground(&self) -> bool {
        !(self.is_leaf() && (self.as_var().is_some() || self.is_hole() || self.is_gap()))
            && self.children.iter().all(Tree::is_ground)
    }

    /// A context: no holes or gaps, variables allowed.
    pub fn is_context(&self) -> bool {
        !(self.is_leaf() && (self.is_hole() || self.is_gap()))
            && self.children.iter().all(Tree::is_context)
    }

    /// A special tree: exactly one hole, no variables.
    pub fn is_special(&self) -> bool {
        self.hole_count() == 1 && self.max_var() == 0
    }

    /// Applies `f` to every label.
    pub fn map_labels(&self, f: &impl Fn(&Symbol) -> Symbol) -> Tree {
        Tree {
            label: f(&self.label),
            children: self.children.iter().map(|c| c.map_labels(f)).collect(),
        }
    }

    /// Cuts the tree below depth `d`: nodes at depth `d` become leaves.
    pub fn truncate(&self, d: usize) -> Tree {
        if d == 0 {
            return Tree { label: self.label.clone(), children: Vec::new() };
        }
        Tree {
            label: self.label.clone(),
            children: self.children.iter().map(|c| c.truncate(d - 1)).collect(),
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            write!(f, "(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Tree {
    type Err = TreeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tree::parse(s)
    }
}

/// Characters allowed in symbol names of tree literals.
pub fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '$'
}

struct LiteralParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl LiteralParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn name(&mut self) -> Result<String, TreeError> {
        self.skip_ws();
        let rest = std::str::from_utf8(&self.src[self.pos..]).map_err(|_| TreeError::Syntax {
            msg: "invalid UTF-8".into(),
            offset: self.pos,
        })?;
        let len: usize = rest
            .chars()
            .take_while(|c| is_name_char(*c) || *c == '∘')
            .map(char::len_utf8)
            .sum();
        if len == 0 {
            return Err(TreeError::Syntax { msg: "expected a symbol name".into(), offset: self.pos });
        }
        let name = rest[..len].to_string();
        self.pos += len;
        Ok(if name == "∘" { HOLE.to_string() } else { name })
    }

    fn tree(&mut self) -> Result<Tree, TreeError> {
        let name = self.name()?;
        self.skip_ws();
        let mut children = Vec::new();
        if self.pos < self.src.len() && self.src[self.pos] == b'(' {
            self.pos += 1;
            loop {
                children.push(self.tree()?);
                self.skip_ws();
                match self.src.get(self.pos) {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => {
                        return Err(TreeError::Syntax {
                            msg: "expected `,` or `)`".into(),
                            offset: self.pos,
                        })
                    }
                }
            }
        }
        Ok(Tree::node(&name, children))
    }
}

/// `t|_u`.
pub fn subtree(t: &Tree, u: &Address) -> Result<Tree, TreeError> {
    t.get(u).cloned().ok_or_else(|| TreeError::AddressOutOfDomain(u.clone()))
}

/// `special · s`: replaces the unique hole of `special` by `s`.
pub fn concat(special: &Tree, s: &Tree) -> Result<Tree, TreeError> {
    match special.hole_count() {
        0 => Err(TreeError::NoHole),
        1 => Ok(fill_holes(special, s)),
        n => Err(TreeError::MultipleHoles(n)),
    }
}

fn fill_holes(t: &Tree, s: &Tree) -> Tree {
    if t.is_hole() && t.is_leaf() {
        return s.clone();
    }
    Tree {
        label: t.label.clone(),
        children: t.children.iter().map(|c| fill_holes(c, s)).collect(),
    }
}

/// `ctx[x1 ← args[0], ..., xn ← args[n-1]]`.
pub fn substitute(ctx: &Tree, args: &[Tree]) -> Result<Tree, TreeError> {
    let used = ctx.max_var();
    if used > args.len() {
        return Err(TreeError::ArityMismatch { used, given: args.len() });
    }
    fn go(t: &Tree, args: &[Tree]) -> Tree {
        if let Some(i) = t.as_var() {
            return args[i - 1].clone();
        }
        Tree {
            label: t.label.clone(),
            children: t.children.iter().map(|c| go(c, args)).collect(),
        }
    }
    Ok(go(ctx, args))
}

/// Greatest common prefix. `None` is the empty prefix, returned when the root
/// labels differ. Where only one side continues below a common node, the
/// common prefix keeps that node as a leaf; where both continue but some
/// children differ, the differing children become gaps.
pub fn greatest_common_prefix(t1: &Tree, t2: &Tree) -> Option<Tree> {
    if t1.label != t2.label || t1.is_gap() {
        return None;
    }
    if t1.children.len() != t2.children.len() || t1.is_leaf() {
        return Some(Tree { label: t1.label.clone(), children: Vec::new() });
    }
    let children: Vec<Tree> = t1
        .children
        .iter()
        .zip(&t2.children)
        .map(|(a, b)| greatest_common_prefix(a, b).unwrap_or_else(Tree::gap))
        .collect();
    if children.iter().all(Tree::is_gap) {
        return Some(Tree { label: t1.label.clone(), children: Vec::new() });
    }
    Some(Tree { label: t1.label.clone(), children })
}

/// `p ⊑ t`: every node of `p` (gaps excluded) is a node of `t` with the same label.
pub fn is_prefix(p: &Tree, t: &Tree) -> bool {
    if p.is_gap() {
        return true;
    }
    if p.label != t.label {
        return false;
    }
    if p.is_leaf() {
        return true;
    }
    p.children.len() == t.children.len()
        && p.children.iter().zip(&t.children).all(|(a, b)| is_prefix(a, b))
}

/// Every prefix of `t` that contains the root, with absent children written as
/// gaps and nodes without present children written as leaves.
pub fn all_prefixes(t: &Tree) -> Vec<Tree> {
    let mut out = vec![Tree { label: t.label.clone(), children: Vec::new() }];
    if t.is_leaf() {
        return out;
    }
    let options: Vec<Vec<Tree>> = t
        .children
        .iter()
        .map(|c| {
            let mut o = vec![Tree::gap()];
            o.extend(all_prefixes(c));
            o
        })
        .collect();
    let mut combos: Vec<Vec<Tree>> = vec![Vec::new()];
    for opts in &options {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect();
    }
    for children in combos {
        if !children.iter().all(Tree::is_gap) {
            out.push(Tree { label: t.label.clone(), children });
        }
    }
    out
}

/// The partial trees left over when the greatest common prefix is removed
/// from both trees: first those of `t1` in address order, then those of `t2`.
pub fn difference_trees(t1: &Tree, t2: &Tree) -> Vec<Tree> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    collect_differences(t1, t2, &mut left, &mut right);
    left.extend(right);
    left
}

fn collect_differences(t1: &Tree, t2: &Tree, left: &mut Vec<Tree>, right: &mut Vec<Tree>) {
    let keep = |t: &Tree, out: &mut Vec<Tree>| {
        if !t.is_gap() {
            out.push(t.clone());
        }
    };
    if t1.label != t2.label || t1.is_gap() {
        keep(t1, left);
        keep(t2, right);
        return;
    }
    if t1.children.len() != t2.children.len() || t1.is_leaf() {
        t1.children.iter().for_each(|c| keep(c, left));
        t2.children.iter().for_each(|c| keep(c, right));
        return;
    }
    for (a, b) in t1.children.iter().zip(&t2.children) {
        collect_differences(a, b, left, right);
    }
}

/// `max { h(t) + 1 : t a difference tree }`, 0 when there is none. Gaps do
/// not count towards the height.
pub fn tree_delay(t1: &Tree, t2: &Tree) -> usize {
    difference_trees(t1, t2).iter().map(|t| t.solid_height() + 1).max().unwrap_or(0)
}

/// Undirected distance between two nodes of `t`.
pub fn node_distance(t: &Tree, u: &Address, v: &Address) -> Result<usize, TreeError> {
    for a in [u, v] {
        if !t.contains(a) {
            return Err(TreeError::AddressOutOfDomain(a.clone()));
        }
    }
    Ok(u.distance(v))
}

/// All level-closed prefixes of `t`: the truncations at depth `0..=h(t)`.
pub fn prefs_level(t: &Tree) -> Vec<Tree> {
    (0..=t.height()).map(|d| t.truncate(d)).collect()
}

/// Height of a tree.
pub fn height(t: &Tree) -> usize {
    t.height()
}

/// Enumerates all ground trees over `alphabet` of height at most `h`, in
/// order of increasing height and then by their literal.
pub fn enumerate_trees(alphabet: &RankedAlphabet, h: usize) -> Vec<Tree> {
    let mut by_height: Vec<Vec<Tree>> = Vec::new();
    let mut upto: Vec<Tree> = Vec::new();
    for level in 0..=h {
        let mut fresh = Vec::new();
        for (sym, rank) in alphabet.iter() {
            if rank == 0 {
                if level == 0 {
                    fresh.push(Tree::leaf(sym));
                }
                continue;
            }
            if level == 0 {
                continue;
            }
            let prev_all = &upto;
            let prev_top = &by_height[level - 1];
            for combo in product(prev_all, rank) {
                if combo.iter().any(|c| prev_top.contains(c)) {
                    fresh.push(Tree::node(sym, combo));
                }
            }
        }
        fresh.sort_by_key(|t| t.to_string());
        upto.extend(fresh.iter().cloned());
        by_height.push(fresh);
    }
    by_height.into_iter().flatten().collect()
}

/// Enumerates ground trees of height at most `max_height` in order of
/// increasing node count, stopping after `cap` trees. Within one size the
/// order follows the alphabet, then the children left to right.
pub fn enumerate_by_size(alphabet: &RankedAlphabet, max_height: usize, cap: usize) -> Vec<Tree> {
    // by_size[n] holds every tree with n nodes and height <= max_height.
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new()];
    let mut out = Vec::new();
    let m = alphabet.max_rank();
    let mut max_size: usize = 0;
    let mut level = 1usize;
    for _ in 0..=max_height {
        max_size = max_size.saturating_add(level);
        level = level.saturating_mul(m.max(1));
    }
    if m <= 1 {
        max_size = max_height + 1;
    }
    let mut n = 1;
    while out.len() < cap && n <= max_size {
        let mut fresh = Vec::new();
        for (sym, rank) in alphabet.iter() {
            if rank == 0 {
                if n == 1 {
                    fresh.push(Tree::leaf(sym));
                }
                continue;
            }
            if n <= rank {
                continue;
            }
            for parts in compositions(n - 1, rank) {
                let lists: Vec<Vec<&Tree>> = parts
                    .iter()
                    .map(|&p| by_size[p].iter().filter(|t| t.height() < max_height).collect())
                    .collect();
                if lists.iter().any(Vec::is_empty) {
                    continue;
                }
                let mut idx = vec![0usize; rank];
                'odometer: loop {
                    let kids = idx.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect();
                    fresh.push(Tree::node(sym, kids));
                    if out.len() + fresh.len() >= cap {
                        break 'odometer;
                    }
                    let mut k = rank;
                    loop {
                        if k == 0 {
                            break 'odometer;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < lists[k].len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
                if out.len() + fresh.len() >= cap {
                    break;
                }
            }
            if out.len() + fresh.len() >= cap {
                break;
            }
        }
        fresh.truncate(cap - out.len());
        out.extend(fresh.iter().cloned());
        by_size.push(fresh);
        n += 1;
    }
    out
}

/// Ordered ways of writing `n` as a sum of `parts` positive integers.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(parts - 1) {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All `n`-tuples over `items`, in lexicographic index order.
pub fn product<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * items.len());
        for prefix in &out {
            for it in items {
                let mut p = prefix.clone();
                p.push(it.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    fn a(s: &str) -> Address {
        Address::parse(s).unwrap()
    }

    #[test]
    fn subtree_examples() {
        assert_eq!(subtree(&t("f(g(h(a)),a)"), &a("1")).unwrap(), t("g(h(a))"));
        assert_eq!(subtree(&t("f(a,b)"), &Address::root()).unwrap(), t("f(a,b)"));
        assert_eq!(subtree(&t("f(a,b)"), &a("2")).unwrap(), t("b"));
        assert!(matches!(subtree(&t("f(a,b)"), &a("3")), Err(TreeError::AddressOutOfDomain(_))));
    }

    #[test]
    fn concat_examples() {
        assert_eq!(concat(&Tree::hole(), &t("a")).unwrap(), t("a"));
        assert_eq!(concat(&t("h(HOLE)"), &t("b")).unwrap(), t("h(b)"));
        assert_eq!(concat(&t("g(HOLE,c)"), &t("h(a)")).unwrap(), t("g(h(a),c)"));
        assert_eq!(concat(&t("g(a,c)"), &t("a")), Err(TreeError::NoHole));
        assert_eq!(concat(&t("g(HOLE,HOLE)"), &t("a")), Err(TreeError::MultipleHoles(2)));
    }

    #[test]
    fn concat_matches_structural_substitution() {
        // Replacing the hole equals replacing the hole's address.
        let special = t("g(f(a,HOLE),c)");
        let hole_at = special.find_leaves(|n| n.is_hole())[0].clone();
        let expect = special.replace_at(&hole_at, t("h(a)")).unwrap();
        assert_eq!(concat(&special, &t("h(a)")).unwrap(), expect);
    }

    #[test]
    fn substitute_examples() {
        assert_eq!(substitute(&t("f(x1,x2)"), &[t("a"), t("b")]).unwrap(), t("f(a,b)"));
        assert_eq!(substitute(&t("g(x1,x1)"), &[t("h(a)")]).unwrap(), t("g(h(a),h(a))"));
        assert_eq!(substitute(&t("h(x1)"), &[t("q")]).unwrap(), t("h(q)"));
        assert!(substitute(&t("f(x1,x2)"), &[t("a")]).is_err());
    }

    #[test]
    fn gcp_examples() {
        let t1 = t("g(f(a,f(b,h(a))),f)");
        let t2 = t("g(f(a,f),f(a,b))");
        assert_eq!(greatest_common_prefix(&t1, &t1), Some(t1.clone()));
        assert_eq!(greatest_common_prefix(&t1, &t2), Some(t("g(f(a,f),f)")));
        assert_eq!(greatest_common_prefix(&t("a"), &t("b")), None);
    }

    #[test]
    fn difference_and_delay_examples() {
        let t1 = t("g(f(a,f(b,h(a))),f)");
        let t2 = t("g(f(a,f),f(a,b))");
        assert_eq!(difference_trees(&t1, &t2), vec![t("b"), t("h(a)"), t("a"), t("b")]);
        assert_eq!(tree_delay(&t1, &t2), 2);
        assert!(difference_trees(&t1, &t1).is_empty());
        assert_eq!(tree_delay(&t1, &t1), 0);
        assert_eq!(difference_trees(&t("h(a)"), &t("h(b)")), vec![t("a"), t("b")]);
        assert_eq!(difference_trees(&t("a"), &t("h(h(a))")), vec![t("a"), t("h(h(a))")]);
        assert_eq!(tree_delay(&t("a"), &t("h(h(a))")), 3);
    }

    #[test]
    fn gaps_are_not_difference_trees() {
        // f(a,_) against f(a,h): only h is left over.
        assert_eq!(difference_trees(&t("f(a,_)"), &t("f(a,h)")), vec![t("h")]);
        assert_eq!(tree_delay(&t("f(_,_)"), &t("f(_,_)")), 0);
        assert_eq!(tree_delay(&t("h(_)"), &t("_")), 1);
    }

    #[test]
    fn distance_examples() {
        let balanced = t("f(f(f(a,a),a),f(f(a,a),a))");
        assert_eq!(node_distance(&balanced, &a("111"), &a("211")).unwrap(), 6);
        assert_eq!(node_distance(&balanced, &a("12"), &a("12")).unwrap(), 0);
        assert_eq!(node_distance(&balanced, &Address::root(), &a("12")).unwrap(), 2);
        assert!(node_distance(&balanced, &a("3"), &a("1")).is_err());
    }

    #[test]
    fn prefs_level_examples() {
        let p = prefs_level(&t("f(h(a),h(a))"));
        assert!(p.contains(&t("f(h,h)")));
        assert!(!p.contains(&t("f(h(a),h)")));
        assert_eq!(prefs_level(&t("a")), vec![t("a")]);
        assert_eq!(prefs_level(&t("f(a,a)")), vec![t("f"), t("f(a,a)")]);
    }

    #[test]
    fn height_examples() {
        assert_eq!(height(&t("a")), 0);
        assert_eq!(height(&t("h(a)")), 1);
        assert_eq!(height(&t("f(g(h(a)),a)")), 3);
    }

    #[test]
    fn addresses_print_and_parse() {
        assert_eq!(a("1.1.2").to_string(), "1.1.2");
        assert_eq!(a("112"), a("1.1.2"));
        assert_eq!(Address::root().to_string(), "ε");
        assert_eq!(a("ε"), Address::root());
        assert_eq!(a(""), Address::root());
        assert!(Address::parse("1.0").is_err());
    }

    #[test]
    fn literal_round_trip_and_predicates() {
        let s = "f(g(x1,HOLE),_)";
        assert_eq!(t(s).to_string(), s);
        assert_eq!(t(" f ( a , b ) "), t("f(a,b)"));
        assert!(t("f(x1,a)").is_context());
        assert!(!t("f(x1,a)").is_ground());
        assert!(t("f(HOLE,a)").is_special());
        assert!(t("f(a,a)").is_ground());
        assert_eq!(t("∘"), Tree::hole());
        assert!(Tree::parse("f(a,").is_err());
        assert!(Tree::parse("f(a) b").is_err());
    }

    #[test]
    fn alphabet_checks() {
        let sigma = RankedAlphabet::from_pairs([("f", 2), ("g", 1), ("a", 0)]);
        assert_eq!(sigma.max_rank(), 2);
        assert!(sigma.check(&t("f(g(a),a)"), false).is_ok());
        assert!(sigma.check(&t("f(g,a)"), false).is_err());
        assert!(sigma.check(&t("f(g,_)"), true).is_ok());
        assert!(sigma.check(&t("k"), true).is_err());
    }

    #[test]
    fn size_enumeration_order_and_caps() {
        let al = RankedAlphabet::from_pairs([("f", 2), ("g", 1), ("a", 0)]);
        let all = enumerate_by_size(&al, 2, usize::MAX);
        assert_eq!(all.len(), enumerate_trees(&al, 2).len());
        assert!(all.windows(2).all(|w| w[0].size() <= w[1].size()));
        assert_eq!(&all[..3], &[t("a"), t("g(a)"), t("f(a,a)")]);
        assert_eq!(enumerate_by_size(&al, 2, 5).len(), 5);
        let words = RankedAlphabet::from_pairs([("a", 1), ("b", 1), ("end", 0)]);
        assert_eq!(enumerate_by_size(&words, 3, 1000).len(), 1 + 2 + 4 + 8);
    }

    #[test]
    fn tree_enumeration_counts() {
        let sigma = RankedAlphabet::from_pairs([("f", 2), ("a", 0)]);
        // heights 0, 1, 2: 1 + 1 + 3 trees.
        assert_eq!(enumerate_trees(&sigma, 2).len(), 5);
        let words = RankedAlphabet::from_pairs([("a", 1), ("b", 1), ("e", 0)]);
        assert_eq!(enumerate_trees(&words, 3).len(), 1 + 2 + 4 + 8);
    }
}
