//! Rooted L-trees: the combinatorial types of essential separating sphere
//! systems for an n-piece split link.
//!
//! A rooted L-tree carries each label 1..n on exactly one vertex; remaining
//! vertices are unlabeled. Every unlabeled vertex has at least two children
//! (equivalently: no univalent or bivalent unlabeled vertex, except that the
//! root, having no parent edge, may be bivalent). Such a tree has at most
//! 2n-1 vertices.
//!
//! Trees are kept in a canonical form (children sorted), so structural
//! equality is label- and root-preserving isomorphism. [`enumerate`] lists
//! all trees for a given n, [`apply_move`] grows a tree by one vertex via
//! one of the three local moves, and [`to_laminar`]/[`from_laminar`]
//! translate to the equivalent laminar set family (each non-root vertex
//! contributes the label set of its branch). [`tree_motion_generators`]
//! emits the generators of the motion subgroup fixing a realization of the
//! tree: partial conjugations by each generator of a labeled vertex's piece
//! on the label set of each child branch, together with the piece motions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::catalog::LinkSpec;
use crate::motion::{multiply, MotionElement, MotionError};

#[derive(Debug, Error)]
pub enum LtreeError {
    #[error("invalid L-tree: {0}")]
    Invalid(String),
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("sets cross: {0}")]
    NotLaminar(String),
    #[error("family is not the branch family of an L-tree: {0}")]
    NotRealizable(String),
    #[error("cannot parse L-tree: {0}")]
    Parse(String),
    #[error("tree labels do not match the link specification")]
    SpecMismatch,
    #[error(transparent)]
    Motion(#[from] MotionError),
}

/// A rooted tree with optional 0-based labels, stored canonically: children
/// are sorted, so derived equality is isomorphism. Use [`LTree::check`] to
/// verify the L-tree invariants for a given label count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LTree {
    label: Option<usize>,
    children: Vec<LTree>,
}

impl LTree {
    pub fn new(label: Option<usize>, mut children: Vec<LTree>) -> LTree {
        children.sort();
        LTree { label, children }
    }

    pub fn leaf(label: usize) -> LTree {
        LTree::new(Some(label), Vec::new())
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn children(&self) -> &[LTree] {
        &self.children
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.children.iter().map(LTree::vertex_count).sum::<usize>()
    }

    /// All labels in the subtree rooted here.
    pub fn labels_below(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut BTreeSet<usize>) {
        if let Some(l) = self.label {
            out.insert(l);
        }
        for c in &self.children {
            c.collect_labels(out);
        }
    }

    /// Verifies the L-tree invariants: labels 0..n each exactly once, and
    /// every unlabeled vertex has at least two children.
    pub fn check(&self, n: usize) -> Result<(), LtreeError> {
        let mut counts = vec![0usize; n];
        self.check_walk(n, &mut counts)?;
        for (l, c) in counts.iter().enumerate() {
            if *c != 1 {
                return Err(LtreeError::Invalid(format!(
                    "label {} appears {} times",
                    l + 1,
                    c
                )));
            }
        }
        Ok(())
    }

    fn check_walk(&self, n: usize, counts: &mut [usize]) -> Result<(), LtreeError> {
        match self.label {
            Some(l) if l >= n => {
                return Err(LtreeError::Invalid(format!("label {} out of range", l + 1)));
            }
            Some(l) => counts[l] += 1,
            None => {
                if self.children.len() < 2 {
                    return Err(LtreeError::Invalid(
                        "unlabeled vertex with fewer than two children".into(),
                    ));
                }
            }
        }
        for c in &self.children {
            c.check_walk(n, counts)?;
        }
        Ok(())
    }

    /// Canonical key: equal keys exactly when the trees are isomorphic as
    /// labeled rooted trees. Doubles as the serialization format: the root
    /// carries a `root:` marker and unlabeled vertices print as `∅`.
    pub fn canonical_form(&self) -> String {
        let mut out = String::new();
        self.render(&mut out, true);
        out
    }

    fn render(&self, out: &mut String, is_root: bool) {
        out.push('(');
        if is_root {
            out.push_str("root:");
        }
        match self.label {
            Some(l) => out.push_str(&(l + 1).to_string()),
            None => out.push('∅'),
        }
        for c in &self.children {
            out.push(' ');
            c.render(out, false);
        }
        out.push(')');
    }

    /// Preorder vertex count before reaching the subtree at `target`;
    /// rebuilds the tree with `f` applied to that subtree.
    fn rebuild_at<F>(&self, target: usize, next: &mut usize, f: &F) -> Result<Option<LTree>, LtreeError>
    where
        F: Fn(&LTree) -> Result<LTree, LtreeError>,
    {
        let here = *next;
        *next += 1;
        if here == target {
            return Ok(Some(f(self)?));
        }
        for (pos, c) in self.children.iter().enumerate() {
            if let Some(replaced) = c.rebuild_at(target, next, f)? {
                let mut children = self.children.clone();
                children[pos] = replaced;
                return Ok(Some(LTree::new(self.label, children)));
            }
        }
        Ok(None)
    }
}

impl fmt::Display for LTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.canonical_form())
    }
}

impl FromStr for LTree {
    type Err = LtreeError;

    /// Grammar: `tree := "(" ["root:"] label { " " tree } ")"`, label a
    /// 1-based integer or `∅` (ASCII alias `-`) for an unlabeled vertex.
    /// The `root:` marker is optional on input; child order is irrelevant.
    fn from_str(s: &str) -> Result<LTree, LtreeError> {
        let mut chars = s.trim().chars().peekable();
        let t = parse_tree(&mut chars)?;
        if let Some(c) = chars.find(|c| !c.is_whitespace()) {
            return Err(LtreeError::Parse(format!("trailing input at '{c}'")));
        }
        Ok(t)
    }
}

fn parse_tree(chars: &mut std::iter::Peekable<std::str::Chars>) -> Result<LTree, LtreeError> {
    while chars.peek().is_some_and(|c| c.is_whitespace()) {
        chars.next();
    }
    if chars.next() != Some('(') {
        return Err(LtreeError::Parse("expected '('".into()));
    }
    while chars.peek().is_some_and(|c| c.is_whitespace()) {
        chars.next();
    }
    for expected in "root:".chars() {
        if chars.peek() != Some(&expected) {
            break;
        }
        chars.next();
    }
    let label = if chars.peek() == Some(&'-') || chars.peek() == Some(&'∅') {
        chars.next();
        None
    } else {
        let mut digits = String::new();
        while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
            digits.push(chars.next().unwrap());
        }
        let v: usize = digits
            .parse()
            .map_err(|_| LtreeError::Parse("expected a label, '∅', or '-'".into()))?;
        if v == 0 {
            return Err(LtreeError::Parse("labels are 1-based".into()));
        }
        Some(v - 1)
    };
    let mut children = Vec::new();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        match chars.peek() {
            Some(')') => {
                chars.next();
                return Ok(LTree::new(label, children));
            }
            Some('(') => children.push(parse_tree(chars)?),
            other => {
                return Err(LtreeError::Parse(format!("unexpected {other:?}")));
            }
        }
    }
}

/// The three moves, each growing a valid tree by one vertex and one edge.
/// Labels, vertex indices (preorder over the canonical form), and child
/// positions are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Relabels the `label`-vertex unlabeled and hangs a fresh `label` leaf
    /// under it. Requires the vertex to have at least one child already.
    MakeLeaf { label: usize },
    /// Splits a non-root unlabeled vertex: the children at positions
    /// `moved` (at least two) go under a fresh unlabeled child; at least
    /// one child stays.
    SplitEmpty { vertex: usize, moved: Vec<usize> },
    /// Splits an unlabeled root the same way.
    SplitRoot { moved: Vec<usize> },
}

fn split_children(
    t: &LTree,
    moved: &[usize],
) -> Result<LTree, LtreeError> {
    let k = t.children.len();
    let moved: BTreeSet<usize> = moved.iter().copied().collect();
    if moved.iter().any(|&p| p >= k) {
        return Err(LtreeError::InvalidMove("child position out of range".into()));
    }
    if moved.len() < 2 || k - moved.len() < 1 {
        return Err(LtreeError::InvalidMove(
            "split must move at least two children and keep at least one".into(),
        ));
    }
    let mut kept = Vec::new();
    let mut taken = Vec::new();
    for (pos, c) in t.children.iter().enumerate() {
        if moved.contains(&pos) {
            taken.push(c.clone());
        } else {
            kept.push(c.clone());
        }
    }
    kept.push(LTree::new(None, taken));
    Ok(LTree::new(t.label, kept))
}

pub fn apply_move(t: &LTree, n: usize, m: &Move) -> Result<LTree, LtreeError> {
    t.check(n)?;
    let out = match m {
        Move::MakeLeaf { label } => {
            if *label >= n {
                return Err(LtreeError::InvalidMove("no such label".into()));
            }
            let mut next = 0usize;
            let target = preorder_find(t, &mut next, &|v: &LTree| v.label == Some(*label))
                .expect("label exists in a checked tree");
            let mut next = 0usize;
            t.rebuild_at(target, &mut next, &|v| {
                if v.children.is_empty() {
                    return Err(LtreeError::InvalidMove(
                        "the labeled vertex must have a child".into(),
                    ));
                }
                let mut children = v.children.clone();
                children.push(LTree::leaf(v.label.unwrap()));
                Ok(LTree::new(None, children))
            })?
            .expect("target index is in range")
        }
        Move::SplitEmpty { vertex, moved } => {
            if *vertex == 0 {
                return Err(LtreeError::InvalidMove(
                    "the root splits with SplitRoot".into(),
                ));
            }
            let mut next = 0usize;
            t.rebuild_at(*vertex, &mut next, &|v| {
                if v.label.is_some() {
                    return Err(LtreeError::InvalidMove("vertex is labeled".into()));
                }
                if v.children.len() < 3 {
                    return Err(LtreeError::InvalidMove(
                        "vertex needs at least three children to split".into(),
                    ));
                }
                split_children(v, moved)
            })?
            .ok_or_else(|| LtreeError::InvalidMove("vertex index out of range".into()))?
        }
        Move::SplitRoot { moved } => {
            if t.label.is_some() {
                return Err(LtreeError::InvalidMove("root is labeled".into()));
            }
            if t.children.len() < 3 {
                return Err(LtreeError::InvalidMove(
                    "root needs at least three children to split".into(),
                ));
            }
            split_children(t, moved)?
        }
    };
    debug_assert!(out.check(n).is_ok());
    Ok(out)
}

fn preorder_find(
    t: &LTree,
    next: &mut usize,
    pred: &impl Fn(&LTree) -> bool,
) -> Option<usize> {
    let here = *next;
    *next += 1;
    if pred(t) {
        return Some(here);
    }
    for c in &t.children {
        if let Some(found) = preorder_find(c, next, pred) {
            return Some(found);
        }
    }
    None
}

/// Every move applicable to `t`, including all admissible child partitions
/// of the split moves.
pub fn available_moves(t: &LTree) -> Vec<Move> {
    let mut out = Vec::new();
    let mut idx = 0usize;
    collect_moves(t, true, &mut idx, &mut out);
    out.sort_by_key(|m| format!("{m:?}"));
    out
}

fn collect_moves(t: &LTree, is_root: bool, idx: &mut usize, out: &mut Vec<Move>) {
    let here = *idx;
    *idx += 1;
    match t.label {
        Some(l) => {
            if !t.children.is_empty() {
                out.push(Move::MakeLeaf { label: l });
            }
        }
        None => {
            let k = t.children.len();
            if k >= 3 {
                // Every subset of size >= 2 leaving at least one child.
                for mask in 1u32..(1 << k) {
                    let moved: Vec<usize> = (0..k).filter(|p| mask >> p & 1 == 1).collect();
                    if moved.len() >= 2 && moved.len() < k {
                        if is_root {
                            out.push(Move::SplitRoot { moved });
                        } else {
                            out.push(Move::SplitEmpty { vertex: here, moved });
                        }
                    }
                }
            }
        }
    }
    for c in &t.children {
        collect_moves(c, false, idx, out);
    }
}

/// All rooted L-trees for n pieces, canonical and deduplicated, ordered by
/// vertex count then canonical key. Exhaustive: every rooted tree shape on
/// at most 2n-1 vertices is generated (as an increasing parent array) with
/// every label placement, then filtered by the invariants.
pub fn enumerate(n: usize) -> Vec<LTree> {
    let mut seen: BTreeMap<(usize, String), LTree> = BTreeMap::new();
    if n == 0 {
        return Vec::new();
    }
    for v in n..=2 * n - 1 {
        let mut parents = vec![0usize; v];
        loop {
            for_each_labeling(v, n, &mut |labels| {
                let t = build_tree(&parents, labels, 0);
                if t.check(n).is_ok() {
                    seen.entry((v, t.canonical_form())).or_insert(t);
                }
            });
            // Odometer over increasing parent arrays: parents[k] < k.
            let mut k = v.saturating_sub(1);
            loop {
                if k <= 1 {
                    k = 0;
                    break;
                }
                if parents[k] + 1 < k {
                    parents[k] += 1;
                    break;
                }
                parents[k] = 0;
                k -= 1;
            }
            if k == 0 {
                break;
            }
        }
    }
    seen.into_values().collect()
}

fn for_each_labeling(v: usize, n: usize, f: &mut impl FnMut(&[Option<usize>])) {
    fn rec(
        labels: &mut Vec<Option<usize>>,
        next: usize,
        n: usize,
        f: &mut impl FnMut(&[Option<usize>]),
    ) {
        if next == n {
            f(labels);
            return;
        }
        for pos in 0..labels.len() {
            if labels[pos].is_none() {
                labels[pos] = Some(next);
                rec(labels, next + 1, n, f);
                labels[pos] = None;
            }
        }
    }
    let mut labels = vec![None; v];
    rec(&mut labels, 0, n, f);
}

fn build_tree(parents: &[usize], labels: &[Option<usize>], root: usize) -> LTree {
    let children = (root + 1..parents.len())
        .filter(|&c| parents[c] == root)
        .map(|c| build_tree(parents, labels, c))
        .collect();
    LTree::new(labels[root], children)
}

/// The trees with no unlabeled vertices: exactly the n-vertex trees, which
/// no move can produce.
pub fn minimal_trees(n: usize) -> Vec<LTree> {
    enumerate(n).into_iter().filter(|t| t.vertex_count() == n).collect()
}

/// Closure of the minimal trees under the three moves.
pub fn move_closure(n: usize) -> Result<Vec<LTree>, LtreeError> {
    let mut seen: BTreeMap<(usize, String), LTree> = BTreeMap::new();
    let mut queue: VecDeque<LTree> = VecDeque::new();
    for t in minimal_trees(n) {
        seen.insert((t.vertex_count(), t.canonical_form()), t.clone());
        queue.push_back(t);
    }
    while let Some(t) = queue.pop_front() {
        for m in available_moves(&t) {
            let next = apply_move(&t, n, &m)?;
            let key = (next.vertex_count(), next.canonical_form());
            if let std::collections::btree_map::Entry::Vacant(slot) = seen.entry(key) {
                slot.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(seen.into_values().collect())
}

/// A multiset of nonempty subsets of the 0-based label universe `0..n`,
/// kept in a canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaminarFamily {
    n: usize,
    sets: Vec<BTreeSet<usize>>,
}

impl LaminarFamily {
    pub fn new(n: usize, mut sets: Vec<BTreeSet<usize>>) -> Result<LaminarFamily, LtreeError> {
        for s in &sets {
            if s.is_empty() {
                return Err(LtreeError::Invalid("empty set in family".into()));
            }
            if s.iter().any(|&x| x >= n) {
                return Err(LtreeError::Invalid("set element out of range".into()));
            }
        }
        sets.sort();
        Ok(LaminarFamily { n, sets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    /// Pairwise nested or disjoint.
    pub fn is_laminar(&self) -> bool {
        sets_laminar(&self.sets)
    }
}

fn sets_laminar(sets: &[BTreeSet<usize>]) -> bool {
    for (a, s) in sets.iter().enumerate() {
        for t in &sets[a + 1..] {
            let nested = s.is_subset(t) || t.is_subset(s) || s.is_disjoint(t);
            if !nested {
                return false;
            }
        }
    }
    true
}

impl fmt::Display for LaminarFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sets.is_empty() {
            return write!(f, "{{}}");
        }
        let rendered: Vec<String> = self
            .sets
            .iter()
            .map(|s| {
                let inner: Vec<String> = s.iter().map(|x| (x + 1).to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        write!(f, "{}", rendered.join(" "))
    }
}

/// The branch family of a valid tree: one set per non-root vertex, holding
/// the labels at or below that vertex.
pub fn to_laminar(t: &LTree) -> LaminarFamily {
    let n = t.labels_below().len();
    let mut sets = Vec::new();
    collect_branches(t, &mut sets);
    LaminarFamily::new(n, sets).expect("branch sets of a valid tree are nonempty and in range")
}

fn collect_branches(t: &LTree, out: &mut Vec<BTreeSet<usize>>) {
    for c in &t.children {
        out.push(c.labels_below());
        collect_branches(c, out);
    }
}

/// Rebuilds the unique tree whose branch family is `f`.
pub fn from_laminar(f: &LaminarFamily) -> Result<LTree, LtreeError> {
    if !f.is_laminar() {
        for (a, s) in f.sets.iter().enumerate() {
            for t in &f.sets[a + 1..] {
                if !(s.is_subset(t) || t.is_subset(s) || s.is_disjoint(t)) {
                    return Err(LtreeError::NotLaminar(format!(
                        "{} and {}",
                        render_set(s),
                        render_set(t)
                    )));
                }
            }
        }
    }
    for w in f.sets.windows(2) {
        if w[0] == w[1] {
            return Err(LtreeError::NotRealizable(format!(
                "duplicate set {}",
                render_set(&w[0])
            )));
        }
    }
    // Laminar forest: parent of a set is its smallest strict superset.
    let k = f.sets.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..k {
        let parent = (0..k)
            .filter(|&j| f.sets[i].is_subset(&f.sets[j]) && f.sets[i] != f.sets[j])
            .min_by_key(|&j| f.sets[j].len());
        match parent {
            Some(j) => children[j].push(i),
            None => roots.push(i),
        }
    }
    fn build(
        f: &LaminarFamily,
        children: &[Vec<usize>],
        i: usize,
    ) -> Result<LTree, LtreeError> {
        let mut covered = BTreeSet::new();
        let mut built = Vec::new();
        for &c in &children[i] {
            covered.extend(f.sets[c].iter().copied());
            built.push(build(f, children, c)?);
        }
        let own: Vec<usize> = f.sets[i].difference(&covered).copied().collect();
        label_of(&own, &mut built)
    }
    fn label_of(own: &[usize], built: &mut Vec<LTree>) -> Result<LTree, LtreeError> {
        match own {
            [] => Ok(LTree::new(None, std::mem::take(built))),
            [l] => Ok(LTree::new(Some(*l), std::mem::take(built))),
            many => Err(LtreeError::NotRealizable(format!(
                "{} labels share one vertex",
                many.len()
            ))),
        }
    }
    let mut covered = BTreeSet::new();
    let mut built = Vec::new();
    for &r in &roots {
        covered.extend(f.sets[r].iter().copied());
        built.push(build(f, &children, r)?);
    }
    let own: Vec<usize> = (0..f.n).filter(|x| !covered.contains(x)).collect();
    let tree = label_of(&own, &mut built)?;
    tree.check(f.n)
        .map_err(|e| LtreeError::NotRealizable(e.to_string()))?;
    Ok(tree)
}

fn render_set(s: &BTreeSet<usize>) -> String {
    let inner: Vec<String> = s.iter().map(|x| (x + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

/// Whether the two trees' branch families stay laminar when merged, the
/// combinatorial model for realizing both sphere systems disjointly.
/// Parallel copies of a set across the two families are allowed.
pub fn compatible(a: &LTree, b: &LTree) -> bool {
    let mut sets = to_laminar(a).sets.clone();
    sets.extend(to_laminar(b).sets.iter().cloned());
    sets_laminar(&sets)
}

/// Generators of the motion subgroup stabilizing a realization of `t`: for
/// each labeled vertex i and each child branch with label set A, the
/// product of partial conjugations of every piece of A by each generator of
/// piece i's factor, followed by all piece motion generators.
pub fn tree_motion_generators(
    t: &LTree,
    spec: &Arc<LinkSpec>,
) -> Result<Vec<MotionElement>, LtreeError> {
    let n = spec.piece_count();
    t.check(n).map_err(|_| LtreeError::SpecMismatch)?;
    let hctx = spec.complement_product();
    let mut out = Vec::new();
    for i in 0..n {
        let mut idx = 0usize;
        let Some(target) = preorder_find(t, &mut idx, &|v: &LTree| v.label == Some(i)) else {
            continue;
        };
        let mut idx = 0usize;
        let mut vertex = None;
        find_by_index(t, target, &mut idx, &mut vertex);
        let vertex = vertex.expect("preorder index is in range");
        for child in vertex.children() {
            let supports = child.labels_below();
            for s in hctx.generators_of(i).map_err(MotionError::from)? {
                let mut acc = MotionElement::identity(spec)?;
                for &j in &supports {
                    let x = MotionElement::partial_conjugation(spec, s.clone(), j)?;
                    acc = multiply(&acc, &x)?;
                }
                out.push(acc);
            }
        }
    }
    for i in 0..n {
        for g in spec.motion_generators(i).map_err(MotionError::from)? {
            out.push(MotionElement::motion_of(spec, i, g)?);
        }
    }
    Ok(out)
}

fn find_by_index<'a>(t: &'a LTree, target: usize, next: &mut usize, out: &mut Option<&'a LTree>) {
    let here = *next;
    *next += 1;
    if here == target {
        *out = Some(t);
        return;
    }
    for c in &t.children {
        if out.is_some() {
            return;
        }
        find_by_index(c, target, next, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::unlink;

    fn t(s: &str) -> LTree {
        s.parse().unwrap()
    }

    #[test]
    fn enumerate_counts_small_n() {
        assert_eq!(enumerate(1).len(), 1);
        assert_eq!(enumerate(2).len(), 3);
        assert_eq!(enumerate(3).len(), 22);
    }

    #[test]
    fn enumerated_trees_are_valid_and_bounded() {
        for n in 1..=3 {
            for tree in enumerate(n) {
                tree.check(n).unwrap();
                assert!(tree.vertex_count() <= 2 * n - 1);
            }
        }
    }

    #[test]
    fn canonical_form_ignores_child_order() {
        let a = t("(- (1) (2 (3)))");
        let b = t("(- (2 (3)) (1))");
        assert_eq!(a, b);
        assert_eq!(a.canonical_form(), b.canonical_form());
        assert_ne!(t("(1 (2))").canonical_form(), t("(2 (1))").canonical_form());
    }

    #[test]
    fn display_round_trips() {
        for n in 1..=3 {
            for tree in enumerate(n) {
                let back: LTree = tree.canonical_form().parse().unwrap();
                assert_eq!(back, tree);
            }
        }
        assert!("(0)".parse::<LTree>().is_err());
        assert!("(1".parse::<LTree>().is_err());
        assert!("(1) (2)".parse::<LTree>().is_err());
    }

    #[test]
    fn make_leaf_turns_chain_into_star() {
        let chain = t("(1 (2))");
        let star = apply_move(&chain, 2, &Move::MakeLeaf { label: 0 }).unwrap();
        assert_eq!(star, t("(- (1) (2))"));
        assert_eq!(star.vertex_count(), chain.vertex_count() + 1);
        // A leaf label cannot be re-leafed.
        assert!(matches!(
            apply_move(&chain, 2, &Move::MakeLeaf { label: 1 }),
            Err(LtreeError::InvalidMove(_))
        ));
    }

    #[test]
    fn split_root_needs_three_children() {
        let star = t("(- (1) (2) (3))");
        let split = apply_move(&star, 3, &Move::SplitRoot { moved: vec![0, 1] }).unwrap();
        assert_eq!(split, t("(- (- (1) (2)) (3))"));
        assert!(matches!(
            apply_move(&t("(- (1) (2))"), 2, &Move::SplitRoot { moved: vec![0, 1] }),
            Err(LtreeError::InvalidMove(_))
        ));
    }

    #[test]
    fn split_empty_needs_valence_four() {
        // The inner unlabeled vertex has a parent and three children; it
        // sorts before the labeled leaf, so its preorder index is 1.
        let tree = t("(- (1) (- (2) (3) (4)))");
        let m = Move::SplitEmpty { vertex: 1, moved: vec![0, 1] };
        let split = apply_move(&tree, 4, &m).unwrap();
        assert_eq!(split, t("(- (1) (- (- (2) (3)) (4)))"));
        // Valence three (two children) cannot split.
        let small = t("(- (1) (- (2) (3)))");
        assert!(matches!(
            apply_move(&small, 3, &Move::SplitEmpty { vertex: 1, moved: vec![0, 1] }),
            Err(LtreeError::InvalidMove(_))
        ));
    }

    #[test]
    fn move_closure_matches_enumeration() {
        for n in 1..=3 {
            let closure = move_closure(n).unwrap();
            let all = enumerate(n);
            assert_eq!(closure, all, "n = {n}");
        }
    }

    #[test]
    fn branch_families_match_the_worked_examples() {
        let f = to_laminar(&t("(- (1) (2))"));
        assert_eq!(f.to_string(), "{1} {2}");
        let f = to_laminar(&t("(1 (2))"));
        assert_eq!(f.to_string(), "{2}");
    }

    #[test]
    fn laminar_round_trips_over_all_trees() {
        for n in 1..=3 {
            for tree in enumerate(n) {
                let family = to_laminar(&tree);
                // No parallel spheres within one system.
                let mut sets = family.sets().to_vec();
                sets.dedup();
                assert_eq!(sets.len(), family.sets().len());
                assert!(family.is_laminar());
                assert_eq!(from_laminar(&family).unwrap(), tree);
            }
        }
    }

    #[test]
    fn from_laminar_rejects_bad_families() {
        let crossing = LaminarFamily::new(
            3,
            vec![BTreeSet::from([0, 1]), BTreeSet::from([1, 2])],
        )
        .unwrap();
        assert!(matches!(from_laminar(&crossing), Err(LtreeError::NotLaminar(_))));
        let gap = LaminarFamily::new(3, vec![BTreeSet::from([0, 1])]).unwrap();
        assert!(matches!(from_laminar(&gap), Err(LtreeError::NotRealizable(_))));
        let dup = LaminarFamily::new(
            2,
            vec![BTreeSet::from([0]), BTreeSet::from([0]), BTreeSet::from([1])],
        )
        .unwrap();
        assert!(matches!(from_laminar(&dup), Err(LtreeError::NotRealizable(_))));
    }

    #[test]
    fn compatibility_is_reflexive_and_detects_crossing() {
        for tree in enumerate(2) {
            for other in enumerate(2) {
                assert!(compatible(&tree, &other));
            }
        }
        let a = t("(3 (- (1) (2)))");
        let b = t("(1 (- (2) (3)))");
        assert!(compatible(&a, &a));
        assert!(!compatible(&a, &b));
    }

    #[test]
    fn tree_generators_for_the_two_piece_chain() {
        let spec = Arc::new(unlink(2).unwrap());
        let gens = tree_motion_generators(&t("(1 (2))"), &spec).unwrap();
        let shown: Vec<String> = gens.iter().map(|g| g.display()).collect();
        assert_eq!(shown, vec!["X(a1,2)", "G[1]:t", "G[2]:t"]);
    }

    #[test]
    fn tree_generators_cover_multi_piece_branches() {
        let spec = Arc::new(unlink(3).unwrap());
        let gens = tree_motion_generators(&t("(1 (- (2) (3)))"), &spec).unwrap();
        let shown: Vec<String> = gens.iter().map(|g| g.display()).collect();
        assert_eq!(shown, vec!["X(a1,2) X(a1,3)", "G[1]:t", "G[2]:t", "G[3]:t"]);
    }

    #[test]
    fn leaf_only_trees_have_no_partial_conjugations() {
        let spec = Arc::new(unlink(3).unwrap());
        let gens = tree_motion_generators(&t("(- (3) (- (1) (2)))"), &spec).unwrap();
        assert!(gens.iter().map(|g| g.display()).all(|s| s.starts_with("G[")));
    }

    #[test]
    fn spec_mismatch_is_reported() {
        let spec = Arc::new(unlink(3).unwrap());
        assert!(matches!(
            tree_motion_generators(&t("(1 (2))"), &spec),
            Err(LtreeError::SpecMismatch)
        ));
    }
}
