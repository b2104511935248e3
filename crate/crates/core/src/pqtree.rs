//! Unrooted PQ-trees over a finite label set.
//!
//! A tree is stored rooted at an arbitrary inner node; the represented set
//! is the set of cyclic frontiers, which does not depend on the choice of
//! root. P-nodes order their neighbours freely, Q-nodes keep their cyclic
//! neighbour order up to reversal.
//!
//! Text form: `P(a, Q(b, c, d))`. A tree is either a label or `P(...)` /
//! `Q(...)` around a comma separated list of subtrees. Labels are runs of
//! characters other than whitespace, `(`, `)` and `,`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{invalid, Error, Result};
use crate::graph::{EdgeId, MultiGraph, VertexId};
use crate::order::CyclicOrder;

/// Largest label count `orders` enumerates unless told otherwise.
pub const DEFAULT_ORDER_BOUND: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PQNode<L> {
    Leaf(L),
    P(Vec<PQNode<L>>),
    Q(Vec<PQNode<L>>),
}

impl<L: Ord + Clone> PQNode<L> {
    fn collect_labels(&self, out: &mut Vec<L>) {
        match self {
            PQNode::Leaf(l) => out.push(l.clone()),
            PQNode::P(cs) | PQNode::Q(cs) => cs.iter().for_each(|c| c.collect_labels(out)),
        }
    }

    fn labels(&self) -> BTreeSet<L> {
        let mut v = Vec::new();
        self.collect_labels(&mut v);
        v.into_iter().collect()
    }

    fn count_in(&self, s: &BTreeSet<L>) -> (usize, usize) {
        match self {
            PQNode::Leaf(l) => (usize::from(s.contains(l)), 1),
            PQNode::P(cs) | PQNode::Q(cs) => cs.iter().fold((0, 0), |(a, b), c| {
                let (x, y) = c.count_in(s);
                (a + x, b + y)
            }),
        }
    }

    fn class(&self, s: &BTreeSet<L>) -> Class {
        match self.count_in(s) {
            (0, _) => Class::Empty,
            (k, n) if k == n => Class::Full,
            _ => Class::Partial,
        }
    }

    fn map<M>(&self, f: &mut impl FnMut(&L) -> M) -> PQNode<M> {
        match self {
            PQNode::Leaf(l) => PQNode::Leaf(f(l)),
            PQNode::P(cs) => PQNode::P(cs.iter().map(|c| c.map(f)).collect()),
            PQNode::Q(cs) => PQNode::Q(cs.iter().map(|c| c.map(f)).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Empty,
    Full,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PQTree<L> {
    root: PQNode<L>,
}

impl<L: Ord + Clone> PQTree<L> {
    /// Validates and normalizes a node structure into a tree.
    pub fn new(root: PQNode<L>) -> Result<Self> {
        let mut labels = Vec::new();
        root.collect_labels(&mut labels);
        if labels.is_empty() {
            return invalid("PQ-tree without leaves");
        }
        let distinct: BTreeSet<_> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return invalid("PQ-tree with repeated leaf label");
        }
        check_nonempty(&root)?;
        Ok(Self { root: normalize_root(root) })
    }

    /// The tree representing every cyclic order of `labels`.
    pub fn universal(labels: &BTreeSet<L>) -> Result<Self> {
        match labels.len() {
            0 => invalid("universal tree over an empty label set"),
            1 => Self::new(PQNode::Leaf(labels.iter().next().unwrap().clone())),
            _ => Self::new(PQNode::P(labels.iter().cloned().map(PQNode::Leaf).collect())),
        }
    }

    /// A single Q-node over the labels in the given cyclic order.
    pub fn q_node(labels: &[L]) -> Result<Self> {
        Self::new(PQNode::Q(labels.iter().cloned().map(PQNode::Leaf).collect()))
    }

    pub fn root(&self) -> &PQNode<L> {
        &self.root
    }

    pub fn labels(&self) -> BTreeSet<L> {
        self.root.labels()
    }

    pub fn len(&self) -> usize {
        self.root.count_in(&BTreeSet::new()).1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn map_labels<M: Ord + Clone>(&self, mut f: impl FnMut(&L) -> M) -> Result<PQTree<M>> {
        PQTree::new(self.root.map(&mut f))
    }

    /// Every represented cyclic order. Fails when the tree has more than
    /// `bound` leaves.
    pub fn orders_bounded(&self, bound: usize) -> Result<BTreeSet<CyclicOrder<L>>> {
        let n = self.len();
        if n > bound {
            return Err(Error::Capacity {
                what: format!("enumerating orders of a PQ-tree with {n} leaves"),
                limit: bound as u64,
            });
        }
        let seqs = match &self.root {
            PQNode::P(cs) if cs.len() > 1 => {
                // Fixing the first child removes rotational duplicates.
                let first = frontiers(&cs[0]);
                let mut out = Vec::new();
                for perm in cs[1..].iter().permutations(cs.len() - 1) {
                    let parts: Vec<_> = std::iter::once(first.clone())
                        .chain(perm.into_iter().map(frontiers))
                        .collect();
                    out.extend(concat_product(&parts));
                }
                out
            }
            other => frontiers(other),
        };
        Ok(seqs.into_iter().map(CyclicOrder::new).collect())
    }

    pub fn orders(&self) -> Result<BTreeSet<CyclicOrder<L>>> {
        self.orders_bounded(DEFAULT_ORDER_BOUND)
    }

    /// Is `o` one of the represented orders?
    pub fn permits(&self, o: &CyclicOrder<L>) -> Result<bool> {
        if o.labels() != self.labels() || o.len() != self.len() {
            return invalid("order and tree have different label sets");
        }
        let seq = o.as_slice();
        let Some(body) = self.hang_from(&seq[0]) else {
            return Ok(true);
        };
        let pos: BTreeMap<L, usize> = seq[1..].iter().cloned().zip(0..).collect();
        Ok(span(&body, &pos).is_some())
    }

    /// Restricts the tree to orders in which `s` is consecutive; `None` if
    /// no such order exists.
    pub fn reduce(&self, s: &BTreeSet<L>) -> Result<Option<Self>> {
        let labels = self.labels();
        if !s.is_subset(&labels) {
            return invalid("reduction set is not a subset of the tree's labels");
        }
        if s.len() <= 1 || s.len() + 1 >= labels.len() {
            return Ok(Some(self.clone()));
        }
        let anchor = labels.iter().next().unwrap().clone();
        // Cyclic consecutivity of s is consecutivity of whichever side of
        // the bipartition avoids the anchor leaf.
        let s: BTreeSet<L> = if s.contains(&anchor) {
            labels.difference(s).cloned().collect()
        } else {
            s.clone()
        };
        let body = self.hang_from(&anchor).expect("tree has at least two leaves");
        let Some(body) = reduce_below(body, &s) else {
            return Ok(None);
        };
        Ok(Some(Self {
            root: normalize_root(PQNode::P(vec![PQNode::Leaf(anchor), body])),
        }))
    }

    /// The subtree hanging below leaf `l` when the tree is rooted there;
    /// its linear frontiers, prefixed with `l`, are the represented orders.
    pub(crate) fn hang_from(&self, l: &L) -> Option<PQNode<L>> {
        let arena = Arena::from_node(&self.root);
        let leaf = arena.leaf_index(l)?;
        let &next = arena.nodes[leaf].adj.first()?;
        Some(arena.build(next, leaf))
    }

    /// Joins two trees along the leaves `a` of `self` and `b` of `other`:
    /// the leaves of `other` (minus `b`) take the place of `a`.
    pub fn glue(&self, a: &L, other: &Self, b: &L) -> Result<Self> {
        let left = self.hang_from(a);
        let right = other.hang_from(b);
        match (left, right) {
            (Some(l), Some(r)) => Self::new(PQNode::P(vec![l, r])),
            _ => invalid("gluing requires trees with at least two leaves"),
        }
    }
}

impl<L: Ord + Clone> PQTree<L> {
    /// Planar gadget of the tree: every P-node becomes a vertex, every
    /// Q-node a wheel, and all leaves are joined to a common apex. The
    /// edge orderings of the apex over the planar embeddings are exactly
    /// the represented orders.
    pub fn gadget(&self) -> (MultiGraph, VertexId, BTreeMap<L, EdgeId>) {
        let mut g = MultiGraph::new();
        let apex = VertexId(0);
        g.add_vertex(apex);
        let mut next_v = 1u32;
        let mut next_e = 0u32;
        let mut fresh_v = |g: &mut MultiGraph| {
            let v = VertexId(next_v);
            next_v += 1;
            g.add_vertex(v);
            v
        };
        let mut leaf_edges = BTreeMap::new();

        if let PQNode::Leaf(l) = &self.root {
            let x = fresh_v(&mut g);
            g.add_edge(EdgeId(0), apex, x).unwrap();
            leaf_edges.insert(l.clone(), EdgeId(0));
            return (g, apex, leaf_edges);
        }

        let arena = Arena::from_node(&self.root);
        // Vertex representing node `i` on its side of the tree edge to adj[slot].
        let mut attach: Vec<Vec<VertexId>> = Vec::with_capacity(arena.nodes.len());
        for node in &arena.nodes {
            let slots = node.adj.len();
            match node.kind {
                Kind::Leaf(_) => attach.push(vec![apex; slots]),
                Kind::P => {
                    let v = fresh_v(&mut g);
                    attach.push(vec![v; slots]);
                }
                Kind::Q => {
                    let hub = fresh_v(&mut g);
                    let rim: Vec<_> = (0..slots).map(|_| fresh_v(&mut g)).collect();
                    for (i, &r) in rim.iter().enumerate() {
                        g.add_edge(EdgeId(next_e), hub, r).unwrap();
                        next_e += 1;
                        g.add_edge(EdgeId(next_e), r, rim[(i + 1) % slots]).unwrap();
                        next_e += 1;
                    }
                    attach.push(rim);
                }
            }
        }
        for (i, node) in arena.nodes.iter().enumerate() {
            for (slot, &j) in node.adj.iter().enumerate() {
                if j < i {
                    continue;
                }
                let back = arena.nodes[j].adj.iter().position(|&x| x == i).unwrap();
                let id = EdgeId(next_e);
                next_e += 1;
                g.add_edge(id, attach[i][slot], attach[j][back]).unwrap();
                for k in [i, j] {
                    if let Kind::Leaf(l) = &arena.nodes[k].kind {
                        leaf_edges.insert(l.clone(), id);
                    }
                }
            }
        }
        (g, apex, leaf_edges)
    }
}

fn check_nonempty<L>(node: &PQNode<L>) -> Result<()> {
    match node {
        PQNode::Leaf(_) => Ok(()),
        PQNode::P(cs) | PQNode::Q(cs) if cs.is_empty() => invalid("inner PQ-node without children"),
        PQNode::P(cs) | PQNode::Q(cs) => cs.iter().try_for_each(check_nonempty),
    }
}

/// Normalizes a non-root node: dissolves single-child nodes and turns
/// degree-3 Q-nodes (two children plus parent) into P-nodes.
fn normalize_inner<L>(node: PQNode<L>) -> PQNode<L> {
    match node {
        PQNode::Leaf(l) => PQNode::Leaf(l),
        PQNode::P(cs) | PQNode::Q(cs) if cs.len() == 1 => {
            normalize_inner(cs.into_iter().next().unwrap())
        }
        PQNode::P(cs) => PQNode::P(cs.into_iter().map(normalize_inner).collect()),
        PQNode::Q(cs) if cs.len() == 2 => PQNode::P(cs.into_iter().map(normalize_inner).collect()),
        PQNode::Q(cs) => PQNode::Q(cs.into_iter().map(normalize_inner).collect()),
    }
}

fn normalize_root<L>(node: PQNode<L>) -> PQNode<L> {
    match node {
        PQNode::P(cs) | PQNode::Q(cs) if cs.len() == 1 => {
            normalize_root(cs.into_iter().next().unwrap())
        }
        PQNode::P(cs) | PQNode::Q(cs) if cs.len() == 2 => {
            let mut cs: Vec<_> = cs.into_iter().map(normalize_inner).collect();
            // A root of degree two is just an edge: let one side absorb it.
            match cs.iter().position(|c| !matches!(c, PQNode::Leaf(_))) {
                None => PQNode::P(cs),
                Some(i) => {
                    let other = cs.remove(1 - i);
                    match cs.pop().unwrap() {
                        PQNode::P(mut inner) => {
                            inner.push(other);
                            normalize_root(PQNode::P(inner))
                        }
                        PQNode::Q(mut inner) => {
                            inner.push(other);
                            normalize_root(PQNode::Q(inner))
                        }
                        PQNode::Leaf(_) => unreachable!(),
                    }
                }
            }
        }
        PQNode::Q(cs) if cs.len() == 3 => PQNode::P(cs.into_iter().map(normalize_inner).collect()),
        PQNode::P(cs) => PQNode::P(cs.into_iter().map(normalize_inner).collect()),
        PQNode::Q(cs) => PQNode::Q(cs.into_iter().map(normalize_inner).collect()),
        leaf => leaf,
    }
}

fn concat_product<L: Clone>(parts: &[Vec<Vec<L>>]) -> Vec<Vec<L>> {
    let mut acc: Vec<Vec<L>> = vec![Vec::new()];
    for options in parts {
        let mut next = Vec::with_capacity(acc.len() * options.len());
        for prefix in &acc {
            for o in options {
                let mut v = prefix.clone();
                v.extend(o.iter().cloned());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// All linear frontiers of a subtree.
fn frontiers<L: Clone>(node: &PQNode<L>) -> Vec<Vec<L>> {
    match node {
        PQNode::Leaf(l) => vec![vec![l.clone()]],
        PQNode::P(cs) => {
            let subs: Vec<_> = cs.iter().map(frontiers).collect();
            let mut out = Vec::new();
            for perm in (0..cs.len()).permutations(cs.len()) {
                let parts: Vec<_> = perm.iter().map(|&i| subs[i].clone()).collect();
                out.extend(concat_product(&parts));
            }
            out
        }
        PQNode::Q(cs) => {
            let subs: Vec<_> = cs.iter().map(frontiers).collect();
            let mut out = concat_product(&subs);
            let mut rev = subs;
            rev.reverse();
            out.extend(concat_product(&rev));
            out
        }
    }
}

/// Position span of a subtree's leaves if every node's leaves are
/// contiguous and Q-children appear in (possibly reversed) order.
fn span<L: Ord>(node: &PQNode<L>, pos: &BTreeMap<L, usize>) -> Option<(usize, usize, usize)> {
    match node {
        PQNode::Leaf(l) => {
            let p = pos[l];
            Some((p, p, 1))
        }
        PQNode::P(cs) | PQNode::Q(cs) => {
            let mut spans = Vec::with_capacity(cs.len());
            for c in cs {
                let (lo, hi, n) = span(c, pos)?;
                if hi - lo + 1 != n {
                    return None;
                }
                spans.push((lo, hi, n));
            }
            if let PQNode::Q(_) = node {
                let increasing = spans.windows(2).all(|w| w[0].1 < w[1].0);
                let decreasing = spans.windows(2).all(|w| w[0].0 > w[1].1);
                if !increasing && !decreasing {
                    return None;
                }
            }
            let lo = spans.iter().map(|s| s.0).min()?;
            let hi = spans.iter().map(|s| s.1).max()?;
            Some((lo, hi, spans.iter().map(|s| s.2).sum()))
        }
    }
}

fn group<L>(mut nodes: Vec<PQNode<L>>) -> PQNode<L> {
    if nodes.len() == 1 {
        nodes.pop().unwrap()
    } else {
        PQNode::P(nodes)
    }
}

/// Descends to the pertinent root (deepest node holding all of `s`) and
/// reduces there.
fn reduce_below<L: Ord + Clone>(node: PQNode<L>, s: &BTreeSet<L>) -> Option<PQNode<L>> {
    let holder = match &node {
        PQNode::Leaf(_) => None,
        PQNode::P(cs) | PQNode::Q(cs) => cs.iter().position(|c| c.count_in(s).0 == s.len()),
    };
    match (node, holder) {
        (PQNode::P(mut cs), Some(i)) => {
            cs[i] = reduce_below(cs[i].clone(), s)?;
            Some(PQNode::P(cs))
        }
        (PQNode::Q(mut cs), Some(i)) => {
            cs[i] = reduce_below(cs[i].clone(), s)?;
            Some(PQNode::Q(cs))
        }
        (node, _) => reduce_root(node, s),
    }
}

fn reduce_root<L: Ord + Clone>(node: PQNode<L>, s: &BTreeSet<L>) -> Option<PQNode<L>> {
    if node.class(s) == Class::Full {
        return Some(node);
    }
    match node {
        PQNode::Leaf(_) => Some(node),
        PQNode::P(cs) => {
            let (mut empty, mut full, mut partial) = (Vec::new(), Vec::new(), Vec::new());
            for c in cs {
                match c.class(s) {
                    Class::Empty => empty.push(c),
                    Class::Full => full.push(c),
                    Class::Partial => partial.push(c),
                }
            }
            if partial.len() > 2 {
                return None;
            }
            if partial.is_empty() {
                empty.push(group(full));
                return Some(PQNode::P(empty));
            }
            let mut core = make_end(partial.remove(0), s)?;
            if !full.is_empty() {
                core.push(group(full));
            }
            if let Some(second) = partial.pop() {
                let mut tail = make_end(second, s)?;
                tail.reverse();
                core.extend(tail);
            }
            let q = PQNode::Q(core);
            if empty.is_empty() {
                Some(q)
            } else {
                empty.push(q);
                Some(PQNode::P(empty))
            }
        }
        PQNode::Q(cs) => {
            let classes: Vec<_> = cs.iter().map(|c| c.class(s)).collect();
            let first = classes.iter().position(|&c| c != Class::Empty)?;
            let last = classes.iter().rposition(|&c| c != Class::Empty)?;
            let mut out = Vec::new();
            for (i, c) in cs.into_iter().enumerate() {
                let class = classes[i];
                if i < first || i > last {
                    out.push(c);
                } else if class == Class::Partial && i == first {
                    out.extend(make_end(c, s)?);
                } else if class == Class::Partial && i == last {
                    let mut tail = make_end(c, s)?;
                    tail.reverse();
                    out.extend(tail);
                } else if class == Class::Full {
                    out.push(c);
                } else {
                    return None;
                }
            }
            Some(PQNode::Q(out))
        }
    }
}

/// Rearranges a partial subtree so that its full leaves form a suffix of
/// its frontier. Returns the resulting sequence of Q-children, empty side
/// first.
fn make_end<L: Ord + Clone>(node: PQNode<L>, s: &BTreeSet<L>) -> Option<Vec<PQNode<L>>> {
    match node {
        PQNode::Leaf(_) => None,
        PQNode::P(cs) => {
            let (mut empty, mut full, mut partial) = (Vec::new(), Vec::new(), Vec::new());
            for c in cs {
                match c.class(s) {
                    Class::Empty => empty.push(c),
                    Class::Full => full.push(c),
                    Class::Partial => partial.push(c),
                }
            }
            if partial.len() > 1 {
                return None;
            }
            let mut seq = Vec::new();
            if !empty.is_empty() {
                seq.push(group(std::mem::take(&mut empty)));
            }
            if let Some(p) = partial.pop() {
                seq.extend(make_end(p, s)?);
            }
            if !full.is_empty() {
                seq.push(group(full));
            }
            Some(seq)
        }
        PQNode::Q(cs) => {
            let attempt = |children: Vec<PQNode<L>>| -> Option<Vec<PQNode<L>>> {
                let mut seq = Vec::new();
                let mut in_full = false;
                for c in children {
                    match (c.class(s), in_full) {
                        (Class::Empty, false) => seq.push(c),
                        (Class::Partial, false) => {
                            seq.extend(make_end(c, s)?);
                            in_full = true;
                        }
                        (Class::Full, _) => {
                            seq.push(c);
                            in_full = true;
                        }
                        _ => return None,
                    }
                }
                Some(seq)
            };
            let mut rev = cs.clone();
            rev.reverse();
            attempt(cs).or_else(|| attempt(rev))
        }
    }
}

#[derive(Debug, Clone)]
enum Kind<L> {
    Leaf(L),
    P,
    Q,
}

#[derive(Debug, Clone)]
struct ArenaNode<L> {
    kind: Kind<L>,
    /// Neighbours; cyclic order is meaningful for Q-nodes.
    adj: Vec<usize>,
}

/// Unrooted adjacency view of a tree.
struct Arena<L> {
    nodes: Vec<ArenaNode<L>>,
}

impl<L: Ord + Clone> Arena<L> {
    fn from_node(root: &PQNode<L>) -> Self {
        let mut arena = Arena { nodes: Vec::new() };
        arena.add(root, None);
        arena
    }

    fn add(&mut self, node: &PQNode<L>, parent: Option<usize>) -> usize {
        let idx = self.nodes.len();
        let kind = match node {
            PQNode::Leaf(l) => Kind::Leaf(l.clone()),
            PQNode::P(_) => Kind::P,
            PQNode::Q(_) => Kind::Q,
        };
        self.nodes.push(ArenaNode {
            kind,
            adj: parent.into_iter().collect(),
        });
        if let PQNode::P(cs) | PQNode::Q(cs) = node {
            for c in cs {
                let ci = self.add(c, Some(idx));
                self.nodes[idx].adj.push(ci);
            }
        }
        idx
    }

    fn leaf_index(&self, l: &L) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| matches!(&n.kind, Kind::Leaf(x) if x == l))
    }

    fn build(&self, at: usize, from: usize) -> PQNode<L> {
        let node = &self.nodes[at];
        let pos = node.adj.iter().position(|&x| x == from).unwrap();
        let mut rest = node.adj.clone();
        rest.rotate_left(pos);
        let children: Vec<_> = rest[1..].iter().map(|&c| self.build(c, at)).collect();
        match &node.kind {
            Kind::Leaf(l) => PQNode::Leaf(l.clone()),
            Kind::P => PQNode::P(children),
            Kind::Q => PQNode::Q(children),
        }
    }
}

impl<L: fmt::Display> fmt::Display for PQNode<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, cs) = match self {
            PQNode::Leaf(l) => return write!(f, "{l}"),
            PQNode::P(cs) => ("P", cs),
            PQNode::Q(cs) => ("Q", cs),
        };
        write!(f, "{tag}(")?;
        for (i, c) in cs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl<L: fmt::Display> fmt::Display for PQTree<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl<L: Ord + Clone + FromStr> FromStr for PQTree<L> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { chars: s.chars().collect(), pos: 0 };
        let node = p.tree()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::Parse(format!("trailing input at offset {}", p.pos)));
        }
        PQTree::new(node)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn tree<L: FromStr>(&mut self) -> Result<PQNode<L>> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| !c.is_whitespace() && !"(),".contains(*c))
        {
            self.pos += 1;
        }
        let token: String = self.chars[start..self.pos].iter().collect();
        if token.is_empty() {
            return Err(Error::Parse(format!("expected a label or node at offset {start}")));
        }
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&'(') && (token == "P" || token == "Q") {
            self.pos += 1;
            let mut children = vec![self.tree()?];
            loop {
                self.skip_ws();
                match self.chars.get(self.pos) {
                    Some(',') => {
                        self.pos += 1;
                        children.push(self.tree()?);
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(Error::Parse(format!("expected ',' or ')' at offset {}", self.pos))),
                }
            }
            return Ok(if token == "P" {
                PQNode::P(children)
            } else {
                PQNode::Q(children)
            });
        }
        token
            .parse()
            .map(PQNode::Leaf)
            .map_err(|_| Error::Parse(format!("bad label '{token}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::all_cyclic_orders;

    fn t(s: &str) -> PQTree<String> {
        s.parse().unwrap()
    }

    fn o(s: &[&str]) -> CyclicOrder<String> {
        CyclicOrder::new(s.iter().map(|x| x.to_string()).collect())
    }

    fn set(s: &[&str]) -> BTreeSet<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn universal_order_counts() {
        assert_eq!(PQTree::universal(&set(&["a", "b", "c"])).unwrap().orders().unwrap().len(), 2);
        assert_eq!(PQTree::universal(&set(&["a", "b"])).unwrap().orders().unwrap().len(), 1);
        let four = PQTree::universal(&set(&["a", "b", "c", "d"])).unwrap();
        let expected: BTreeSet<_> = all_cyclic_orders(&set(&["a", "b", "c", "d"])).into_iter().collect();
        assert_eq!(four.orders().unwrap(), expected);
        assert!(PQTree::<String>::universal(&BTreeSet::new()).is_err());
    }

    #[test]
    fn reduce_examples() {
        let u: PQTree<u32> = PQTree::universal(&(1..=4).collect()).unwrap();
        let r = u.reduce(&[1, 2].into_iter().collect()).unwrap().unwrap();
        assert_eq!(r.orders().unwrap().len(), 4);

        let q = PQTree::q_node(&[1, 2, 3, 4]).unwrap();
        assert!(q.reduce(&[1, 3].into_iter().collect()).unwrap().is_none());
        assert_eq!(q.reduce(&(1..=4).collect()).unwrap().unwrap(), q);
        assert!(q.reduce(&[1, 9].into_iter().collect()).is_err());
    }

    #[test]
    fn permits_examples() {
        assert!(t("P(a, b, c)").permits(&o(&["a", "c", "b"])).unwrap());
        let q = t("Q(a, b, c, d)");
        assert!(q.permits(&o(&["a", "b", "c", "d"])).unwrap());
        assert!(!q.permits(&o(&["a", "c", "b", "d"])).unwrap());
        assert!(q.permits(&o(&["d", "c", "b", "a"])).unwrap());
        assert!(q.permits(&o(&["a", "b", "c"])).is_err());
    }

    #[test]
    fn orders_examples() {
        // The Q-node has degree four here (three children plus the edge
        // towards d), so d sits between c and a in both directions.
        let tree = t("P(d, Q(a, b, c))");
        let expected: BTreeSet<_> = [o(&["d", "a", "b", "c"]), o(&["d", "c", "b", "a"])].into();
        assert_eq!(tree.orders().unwrap(), expected);
        // A Q-node of degree three acts like a P-node: only {b, c} stays together.
        assert_eq!(t("P(d, P(a, Q(b, c)))").orders().unwrap(), t("P(d, a, P(b, c))").orders().unwrap());
        assert_eq!(t("P(d, a, P(b, c))").orders().unwrap().len(), 4);
        assert_eq!(t("Q(a, b, c, d)").orders().unwrap().len(), 2);
        assert_eq!(t("P(e, Q(a, b, c, d))").orders().unwrap().len(), 2);
        assert_eq!(t("P(e, f, Q(a, b, c))").orders().unwrap().len(), 4);
    }

    #[test]
    fn orders_capacity() {
        let big: PQTree<u32> = PQTree::universal(&(0..12).collect()).unwrap();
        assert!(matches!(big.orders(), Err(Error::Capacity { .. })));
    }

    #[test]
    fn text_round_trip() {
        let tree = t("P(a, Q(b, c, d, e), f)");
        let again: PQTree<String> = tree.to_string().parse().unwrap();
        assert_eq!(tree.orders().unwrap(), again.orders().unwrap());
        assert!("P(a, b".parse::<PQTree<String>>().is_err());
        assert!("P(a, a)".parse::<PQTree<String>>().is_err());
    }

    #[test]
    fn gadget_shapes() {
        let (g, apex, map) = t("a").gadget();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.degree(apex), 1);
        assert_eq!(map.len(), 1);

        let (g, apex, map) = t("Q(a, b, c, d)").gadget();
        assert_eq!(g.degree(apex), 4);
        assert_eq!(map.len(), 4);
        assert!(g.is_connected());
    }

    #[test]
    fn glue_substitutes_leaf() {
        let left = t("Q(a, b, c, x)");
        let right = t("P(y, d, e)");
        let glued = left.glue(&"x".to_string(), &right, &"y".to_string()).unwrap();
        assert_eq!(glued.labels(), set(&["a", "b", "c", "d", "e"]));
        assert_eq!(glued.orders().unwrap().len(), 4);
    }
}
