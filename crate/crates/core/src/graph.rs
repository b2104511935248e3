//! Loop-free multigraphs with stable edge identities.
//!
//! Edge ids survive contraction, so an edge of a contracted graph can always
//! be traced back to the edge it came from. Edges may additionally carry a
//! label naming the edge of the original input graph they represent.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl std::str::FromStr for EdgeId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.strip_prefix('e').unwrap_or(s).parse().map(EdgeId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    /// Edge of the input graph this edge stands for, if any.
    pub label: Option<EdgeId>,
}

impl Edge {
    pub fn other(&self, w: VertexId) -> VertexId {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected multigraph without loops.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, Edge>,
    incidence: BTreeMap<VertexId, Vec<EdgeId>>,
}

impl MultiGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from endpoint pairs; edge `i` gets id `i`.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self> {
        let mut g = Self::new();
        for (i, &(u, v)) in pairs.iter().enumerate() {
            g.add_vertex(VertexId(u));
            g.add_vertex(VertexId(v));
            g.add_edge(EdgeId(i as u32), VertexId(u), VertexId(v))?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: VertexId) -> bool {
        self.incidence.entry(v).or_default();
        self.vertices.insert(v)
    }

    pub fn add_edge(&mut self, id: EdgeId, u: VertexId, v: VertexId) -> Result<()> {
        self.add_labeled_edge(id, u, v, None)
    }

    pub fn add_labeled_edge(
        &mut self,
        id: EdgeId,
        u: VertexId,
        v: VertexId,
        label: Option<EdgeId>,
    ) -> Result<()> {
        if u == v {
            return invalid(format!("loop at {u} (edge {id})"));
        }
        for w in [u, v] {
            if !self.vertices.contains(&w) {
                return invalid(format!("edge {id} uses unknown vertex {w}"));
            }
        }
        if self.edges.contains_key(&id) {
            return invalid(format!("duplicate edge id {id}"));
        }
        self.edges.insert(id, Edge { u, v, label });
        self.incidence.get_mut(&u).unwrap().push(id);
        self.incidence.get_mut(&v).unwrap().push(id);
        Ok(())
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Option<Edge> {
        let e = self.edges.remove(&id)?;
        for w in [e.u, e.v] {
            if let Some(inc) = self.incidence.get_mut(&w) {
                inc.retain(|&x| x != id);
            }
        }
        Some(e)
    }

    /// Removes `v` together with its incident edges.
    pub fn remove_vertex(&mut self, v: VertexId) -> Vec<(EdgeId, Edge)> {
        let incident = self.incidence.remove(&v).unwrap_or_default();
        self.vertices.remove(&v);
        incident
            .into_iter()
            .filter_map(|e| self.remove_edge(e).map(|edge| (e, edge)))
            .collect()
    }

    /// Re-attaches the `from` end of edge `id` to vertex `to`.
    pub fn reattach(&mut self, id: EdgeId, from: VertexId, to: VertexId) -> Result<()> {
        let Some(edge) = self.edges.get(&id).copied() else {
            return invalid(format!("unknown edge {id}"));
        };
        let other = if edge.u == from {
            edge.v
        } else if edge.v == from {
            edge.u
        } else {
            return invalid(format!("edge {id} is not incident to {from}"));
        };
        self.remove_edge(id);
        self.add_labeled_edge(id, other, to, edge.label)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> + '_ {
        self.edges.iter().map(|(&id, e)| (id, e))
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.keys().copied()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        self.incidence.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incident(v).len()
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.incident(v).iter().map(move |e| self.edges[e].other(v))
    }

    pub fn has_edge_between(&self, u: VertexId, v: VertexId) -> bool {
        self.incident(u).iter().any(|e| self.edges[e].other(u) == v)
    }

    /// True when there are no parallel edges.
    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges
            .values()
            .all(|e| seen.insert((e.u.min(e.v), e.u.max(e.v))))
    }

    pub fn fresh_vertex_id(&self) -> VertexId {
        VertexId(self.vertices.iter().next_back().map_or(0, |v| v.0 + 1))
    }

    pub fn fresh_edge_id(&self) -> EdgeId {
        EdgeId(self.edges.keys().next_back().map_or(0, |e| e.0 + 1))
    }

    pub fn induced_subgraph(&self, keep: &BTreeSet<VertexId>) -> MultiGraph {
        let mut h = MultiGraph::new();
        for &v in keep.iter().filter(|v| self.vertices.contains(v)) {
            h.add_vertex(v);
        }
        for (&id, e) in &self.edges {
            if keep.contains(&e.u) && keep.contains(&e.v) {
                h.add_labeled_edge(id, e.u, e.v, e.label).unwrap();
            }
        }
        h
    }

    /// Subgraph formed by the given edges and their endpoints.
    pub fn edge_subgraph(&self, keep: &BTreeSet<EdgeId>) -> MultiGraph {
        let mut h = MultiGraph::new();
        for id in keep {
            if let Some(e) = self.edges.get(id) {
                h.add_vertex(e.u);
                h.add_vertex(e.v);
                h.add_labeled_edge(*id, e.u, e.v, e.label).unwrap();
            }
        }
        h
    }

    pub fn is_connected(&self) -> bool {
        components(self).len() <= 1
    }
}

/// Result of [`contract`]: the contracted graph and the vertex each part became.
#[derive(Debug, Clone)]
pub struct Contraction {
    pub graph: MultiGraph,
    pub part_vertex: Vec<VertexId>,
}

/// Contracts each part into a fresh vertex. Edges inside a part disappear;
/// parallel edges are kept and surviving edges keep their ids and labels.
pub fn contract(g: &MultiGraph, parts: &[BTreeSet<VertexId>]) -> Result<Contraction> {
    let mut next = g.fresh_vertex_id().0;
    let named: Vec<_> = parts
        .iter()
        .map(|p| {
            let id = VertexId(next);
            next += 1;
            (id, p.clone())
        })
        .collect();
    let graph = contract_into(g, &named)?;
    Ok(Contraction {
        graph,
        part_vertex: named.into_iter().map(|(v, _)| v).collect(),
    })
}

/// Like [`contract`], with caller-chosen ids for the contracted vertices.
pub fn contract_into(g: &MultiGraph, parts: &[(VertexId, BTreeSet<VertexId>)]) -> Result<MultiGraph> {
    let mut owner: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for (new_id, part) in parts {
        for &v in part {
            if !g.contains_vertex(v) {
                return invalid(format!("part vertex {v} not in graph"));
            }
            if owner.insert(v, *new_id).is_some() {
                return invalid(format!("vertex {v} occurs in more than one part"));
            }
        }
    }
    let mut h = MultiGraph::new();
    for v in g.vertices().filter(|v| !owner.contains_key(v)) {
        h.add_vertex(v);
    }
    for (new_id, _) in parts {
        if !h.add_vertex(*new_id) {
            return invalid(format!("contracted vertex id {new_id} collides"));
        }
    }
    let image = |v: VertexId| owner.get(&v).copied().unwrap_or(v);
    for (id, e) in g.edges() {
        let (a, b) = (image(e.u), image(e.v));
        if a != b {
            h.add_labeled_edge(id, a, b, e.label)?;
        }
    }
    Ok(h)
}

/// Connected components, each as a vertex set, ordered by smallest vertex.
pub fn components(g: &MultiGraph) -> Vec<BTreeSet<VertexId>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for start in g.vertices() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for w in g.neighbors(v) {
                if seen.insert(w) {
                    comp.insert(w);
                    queue.push_back(w);
                }
            }
        }
        out.push(comp);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub edges: BTreeSet<EdgeId>,
    pub vertices: BTreeSet<VertexId>,
}

impl Block {
    /// A block is trivial when it is a single edge (a bridge).
    pub fn is_trivial(&self) -> bool {
        self.edges.len() == 1
    }
}

#[derive(Debug, Clone, Default)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    pub cutvertices: BTreeSet<VertexId>,
    /// Indices of the blocks each vertex belongs to.
    pub incidence: BTreeMap<VertexId, BTreeSet<usize>>,
}

impl BlockDecomposition {
    pub fn block_of_edge(&self, e: EdgeId) -> Option<usize> {
        self.blocks.iter().position(|b| b.edges.contains(&e))
    }

    pub fn blocks_at(&self, v: VertexId) -> impl Iterator<Item = &Block> + '_ {
        self.incidence
            .get(&v)
            .into_iter()
            .flatten()
            .map(move |&i| &self.blocks[i])
    }

    pub fn nontrivial_blocks_at(&self, v: VertexId) -> usize {
        self.blocks_at(v).filter(|b| !b.is_trivial()).count()
    }
}

/// Biconnected components via the classic lowpoint DFS with an edge stack.
pub fn blocks(g: &MultiGraph) -> BlockDecomposition {
    struct Dfs<'a> {
        g: &'a MultiGraph,
        disc: BTreeMap<VertexId, usize>,
        low: BTreeMap<VertexId, usize>,
        time: usize,
        stack: Vec<EdgeId>,
        out: Vec<BTreeSet<EdgeId>>,
    }

    impl Dfs<'_> {
        fn visit(&mut self, v: VertexId, via: Option<EdgeId>) {
            self.disc.insert(v, self.time);
            self.low.insert(v, self.time);
            self.time += 1;
            for &e in self.g.incident(v) {
                if Some(e) == via {
                    continue;
                }
                let w = self.g.edge(e).unwrap().other(v);
                match self.disc.get(&w).copied() {
                    None => {
                        self.stack.push(e);
                        self.visit(w, Some(e));
                        let lw = self.low[&w];
                        if lw < self.low[&v] {
                            self.low.insert(v, lw);
                        }
                        if lw >= self.disc[&v] {
                            let mut block = BTreeSet::new();
                            while let Some(top) = self.stack.pop() {
                                block.insert(top);
                                if top == e {
                                    break;
                                }
                            }
                            self.out.push(block);
                        }
                    }
                    Some(dw) => {
                        if dw < self.disc[&v] {
                            self.stack.push(e);
                        }
                        if dw < self.low[&v] {
                            self.low.insert(v, dw);
                        }
                    }
                }
            }
        }
    }

    let mut dfs = Dfs {
        g,
        disc: BTreeMap::new(),
        low: BTreeMap::new(),
        time: 0,
        stack: Vec::new(),
        out: Vec::new(),
    };
    for v in g.vertices() {
        if !dfs.disc.contains_key(&v) {
            dfs.visit(v, None);
        }
    }
    let mut edge_sets = dfs.out;
    edge_sets.sort();

    let mut decomposition = BlockDecomposition::default();
    for (i, edges) in edge_sets.into_iter().enumerate() {
        let vertices: BTreeSet<_> = edges
            .iter()
            .flat_map(|e| {
                let edge = g.edge(*e).unwrap();
                [edge.u, edge.v]
            })
            .collect();
        for &v in &vertices {
            decomposition.incidence.entry(v).or_default().insert(i);
        }
        decomposition.blocks.push(Block { edges, vertices });
    }
    decomposition.cutvertices = decomposition
        .incidence
        .iter()
        .filter(|(_, bs)| bs.len() > 1)
        .map(|(&v, _)| v)
        .collect();
    decomposition
}
