//! Clustered graphs and their cd-trees.
//!
//! Every tree edge splits the vertices of `G` into a cluster and its
//! co-cluster. The skeleton of a node is `G` with the vertex set behind
//! each incident tree edge contracted into a virtual vertex. Leaves are
//! removed: vertices of `G` sit as ordinary vertices in the skeleton of the
//! innermost cluster containing them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{contract_into, EdgeId, MultiGraph, VertexId};

/// Nested cluster description; the top level is the root cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub name: String,
    /// Vertices directly in this cluster and in none of its children.
    pub vertices: Vec<VertexId>,
    pub children: Vec<Cluster>,
}

impl Cluster {
    pub fn new(name: impl Into<String>, vertices: Vec<VertexId>, children: Vec<Cluster>) -> Self {
        Self { name: name.into(), vertices, children }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterNode {
    pub name: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub vertices: BTreeSet<VertexId>,
}

/// A connected simple graph together with its inclusion tree.
///
/// Cluster 0 is the root. Clusters with fewer than two vertices or with all
/// vertices are dissolved into their parent on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteredGraph {
    g: MultiGraph,
    clusters: Vec<ClusterNode>,
}

impl ClusteredGraph {
    pub fn new(g: MultiGraph, root: Cluster) -> Result<Self> {
        if g.num_vertices() == 0 {
            return invalid("empty graph");
        }
        if !g.is_simple() {
            return invalid("graph must be simple");
        }
        let mut clusters = Vec::new();
        flatten(&root, None, &mut clusters);
        let mut seen = BTreeSet::new();
        let mut stack = vec![&root];
        while let Some(c) = stack.pop() {
            stack.extend(c.children.iter());
            for &v in &c.vertices {
                if !g.contains_vertex(v) {
                    return invalid(format!("cluster '{}' names unknown vertex {v}", c.name));
                }
                if !seen.insert(v) {
                    return invalid(format!("vertex {v} is a leaf of the cluster tree twice"));
                }
            }
        }
        if let Some(v) = g.vertices().find(|v| !seen.contains(v)) {
            return invalid(format!("vertex {v} is not a leaf of the cluster tree"));
        }
        if !g.is_connected() {
            return Err(Error::Unsupported("graph is disconnected".into()));
        }
        let mut cg = Self { g, clusters };
        cg.dissolve_improper();
        Ok(cg)
    }

    /// Builds the inclusion tree from a laminar family of proper clusters.
    pub fn from_sets(g: MultiGraph, sets: &[BTreeSet<VertexId>]) -> Result<Self> {
        let mut order: Vec<usize> = (0..sets.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(sets[i].len()));
        let mut parent: Vec<Option<usize>> = vec![None; sets.len()];
        for (pos, &i) in order.iter().enumerate() {
            for &j in order[..pos].iter().rev() {
                if sets[i].is_subset(&sets[j]) {
                    parent[i] = Some(j);
                    break;
                }
                if !sets[i].is_disjoint(&sets[j]) {
                    return invalid("cluster sets are not laminar");
                }
            }
        }
        fn build(i: Option<usize>, sets: &[BTreeSet<VertexId>], parent: &[Option<usize>], all: &BTreeSet<VertexId>) -> Cluster {
            let kids: Vec<usize> = (0..sets.len()).filter(|&j| parent[j] == i).collect();
            let own: BTreeSet<VertexId> = i.map_or_else(|| all.clone(), |i| sets[i].clone());
            let covered: BTreeSet<VertexId> = kids.iter().flat_map(|&j| sets[j].iter().copied()).collect();
            Cluster {
                name: i.map_or_else(|| "root".to_string(), |i| format!("C{i}")),
                vertices: own.difference(&covered).copied().collect(),
                children: kids.iter().map(|&j| build(Some(j), sets, parent, all)).collect(),
            }
        }
        let all = g.vertex_set().clone();
        let root = build(None, sets, &parent, &all);
        Self::new(g, root)
    }

    fn dissolve_improper(&mut self) {
        let n = self.g.num_vertices();
        loop {
            let victim = (1..self.clusters.len()).find(|&i| {
                let k = self.cluster_vertices(i).len();
                k <= 1 || k == n
            });
            let Some(i) = victim else { break };
            let node = self.clusters[i].clone();
            let p = node.parent.unwrap();
            self.clusters[p].vertices.extend(node.vertices.iter().copied());
            self.clusters[p].children.retain(|&c| c != i);
            self.clusters[p].children.extend(node.children.iter().copied());
            for &c in &node.children {
                self.clusters[c].parent = Some(p);
            }
            self.remove_cluster(i);
        }
    }

    fn remove_cluster(&mut self, i: usize) {
        self.clusters.remove(i);
        let fix = |x: usize| if x > i { x - 1 } else { x };
        for c in &mut self.clusters {
            c.parent = c.parent.map(fix);
            for ch in &mut c.children {
                *ch = fix(*ch);
            }
        }
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.g
    }

    pub fn clusters(&self) -> &[ClusterNode] {
        &self.clusters
    }

    /// All vertices of cluster `i`, including those of its descendants.
    pub fn cluster_vertices(&self, i: usize) -> BTreeSet<VertexId> {
        let mut out = self.clusters[i].vertices.clone();
        for &c in &self.clusters[i].children {
            out.extend(self.cluster_vertices(c));
        }
        out
    }

    /// Vertex sets of all proper (non-root) clusters.
    pub fn proper_clusters(&self) -> Vec<BTreeSet<VertexId>> {
        (1..self.clusters.len()).map(|i| self.cluster_vertices(i)).collect()
    }

    /// Proper clusters are pairwise disjoint.
    pub fn is_flat(&self) -> bool {
        self.clusters.iter().skip(1).all(|c| c.children.is_empty())
    }

    pub fn to_nested(&self) -> Cluster {
        self.nested(0)
    }

    fn nested(&self, i: usize) -> Cluster {
        let c = &self.clusters[i];
        Cluster {
            name: c.name.clone(),
            vertices: c.vertices.iter().copied().collect(),
            children: c.children.iter().map(|&k| self.nested(k)).collect(),
        }
    }

    /// Same tree over a different graph on the same vertex set.
    pub fn with_graph(&self, g: MultiGraph) -> Result<Self> {
        Self::new(g, self.to_nested())
    }
}

fn flatten(c: &Cluster, parent: Option<usize>, out: &mut Vec<ClusterNode>) -> usize {
    let i = out.len();
    out.push(ClusterNode {
        name: c.name.clone(),
        parent,
        children: Vec::new(),
        vertices: c.vertices.iter().copied().collect(),
    });
    for child in &c.children {
        let k = flatten(child, Some(i), out);
        out[i].children.push(k);
    }
    i
}

/// Link from a virtual vertex to the tree neighbor it represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualLink {
    pub neighbor: usize,
    pub twin: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdNode {
    pub name: String,
    /// Skeleton edges keep the id of the edge of `G` they stand for and
    /// carry it as label.
    pub skeleton: MultiGraph,
    pub virtuals: BTreeMap<VertexId, VirtualLink>,
}

impl CdNode {
    pub fn is_virtual(&self, v: VertexId) -> bool {
        self.virtuals.contains_key(&v)
    }

    pub fn real_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.skeleton.vertices().filter(|v| !self.virtuals.contains_key(v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdTree {
    g: MultiGraph,
    nodes: Vec<CdNode>,
    root: usize,
    parent: Vec<Option<usize>>,
    /// Vertices of `G` behind each virtual vertex.
    behind: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl CdTree {
    pub fn build(cg: &ClusteredGraph) -> Result<Self> {
        let g = &cg.g;
        if !g.is_connected() {
            return Err(Error::Unsupported("graph is disconnected".into()));
        }
        let mut labeled = MultiGraph::new();
        for v in g.vertices() {
            labeled.add_vertex(v);
        }
        for (id, e) in g.edges() {
            labeled.add_labeled_edge(id, e.u, e.v, Some(id))?;
        }
        let base = g.fresh_vertex_id().0;
        let all = g.vertex_set().clone();
        // Tree edge of cluster k (k >= 1): `inner` sits in the parent's
        // skeleton and stands for the cluster, `outer` sits in the
        // cluster's skeleton and stands for the rest of the graph.
        let inner = |k: usize| VertexId(base + 2 * k as u32);
        let outer = |k: usize| VertexId(base + 2 * k as u32 + 1);

        let mut behind = BTreeMap::new();
        let mut nodes = Vec::new();
        for (k, c) in cg.clusters.iter().enumerate() {
            let mut parts = Vec::new();
            let mut virtuals = BTreeMap::new();
            for &ch in &c.children {
                let vs = cg.cluster_vertices(ch);
                behind.insert(inner(ch), vs.clone());
                parts.push((inner(ch), vs));
                virtuals.insert(inner(ch), VirtualLink { neighbor: ch, twin: outer(ch) });
            }
            if let Some(p) = c.parent {
                let vs: BTreeSet<VertexId> = all.difference(&cg.cluster_vertices(k)).copied().collect();
                behind.insert(outer(k), vs.clone());
                parts.push((outer(k), vs));
                virtuals.insert(outer(k), VirtualLink { neighbor: p, twin: inner(k) });
            }
            nodes.push(CdNode {
                name: c.name.clone(),
                skeleton: contract_into(&labeled, &parts)?,
                virtuals,
            });
        }
        let parent = cg.clusters.iter().map(|c| c.parent).collect();
        Ok(Self { g: g.clone(), nodes, root: 0, parent, behind })
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.g
    }

    pub fn nodes(&self) -> &[CdNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &CdNode {
        &self.nodes[i]
    }

    /// Mutable access, meant for tests that corrupt a tree on purpose.
    pub fn node_mut(&mut self, i: usize) -> &mut CdNode {
        &mut self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        self.neighbors(i).filter(|&j| Some(j) != self.parent[i]).collect()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.nodes[i].virtuals.values().map(|l| l.neighbor)
    }

    /// Virtual vertex of node `i` standing for neighbor `j`.
    pub fn virtual_towards(&self, i: usize, j: usize) -> Option<VertexId> {
        self.nodes[i]
            .virtuals
            .iter()
            .find(|(_, l)| l.neighbor == j)
            .map(|(&v, _)| v)
    }

    /// The virtual vertex pointing to the parent (none at the root).
    pub fn parent_vertex(&self, i: usize) -> Option<VertexId> {
        self.parent[i].and_then(|p| self.virtual_towards(i, p))
    }

    pub fn twin(&self, i: usize, v: VertexId) -> Option<(usize, VertexId)> {
        self.nodes[i].virtuals.get(&v).map(|l| (l.neighbor, l.twin))
    }

    /// Nodes with every child before its parent.
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((i, done)) = stack.pop() {
            if done {
                out.push(i);
                continue;
            }
            stack.push((i, true));
            for c in self.children(i).into_iter().rev() {
                stack.push((c, false));
            }
        }
        out
    }

    /// Depth of every node below the root.
    pub fn depths(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for i in self.postorder().into_iter().rev() {
            if let Some(p) = self.parent[i] {
                d[i] = d[p] + 1;
            }
        }
        d
    }

    /// Vertices of `G` represented by a virtual vertex.
    pub fn behind(&self, v: VertexId) -> Option<&BTreeSet<VertexId>> {
        self.behind.get(&v)
    }

    /// Subgraph of `G` induced by the vertices behind virtual vertex `v` of
    /// node `i`.
    pub fn expansion(&self, i: usize, v: VertexId) -> Result<MultiGraph> {
        if !self.nodes.get(i).is_some_and(|n| n.is_virtual(v)) {
            return invalid(format!("{v} is not a virtual vertex of node {i}"));
        }
        Ok(self.g.induced_subgraph(&self.behind[&v]))
    }

    /// Total number of skeleton edges.
    pub fn size_c(&self) -> usize {
        self.nodes.iter().map(|n| n.skeleton.num_edges()).sum()
    }

    /// Sum of the cut sizes over all tree edges.
    pub fn total_cut_size(&self) -> usize {
        (0..self.nodes.len())
            .filter_map(|i| self.parent_vertex(i).map(|v| self.nodes[i].skeleton.degree(v)))
            .sum()
    }

    /// Star-shaped tree: some node is adjacent to every other node.
    pub fn is_flat(&self) -> bool {
        self.nodes.len() <= 2 || (0..self.nodes.len()).any(|i| self.nodes[i].virtuals.len() + 1 == self.nodes.len())
    }

    pub fn reroot(&self, node: usize) -> Result<CdTree> {
        if node >= self.nodes.len() {
            return invalid(format!("no cd-tree node {node}"));
        }
        let mut t = self.clone();
        t.root = node;
        t.parent = vec![None; t.nodes.len()];
        let mut seen = BTreeSet::from([node]);
        let mut queue = VecDeque::from([node]);
        while let Some(i) = queue.pop_front() {
            let next: Vec<usize> = t.neighbors(i).collect();
            for j in next {
                if seen.insert(j) {
                    t.parent[j] = Some(i);
                    queue.push_back(j);
                }
            }
        }
        Ok(t)
    }

    /// Every violated structural invariant, one line each.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let mut owner: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let name = &node.name;
            for v in node.real_vertices() {
                owner.entry(v).or_default().push(i);
                if !self.g.contains_vertex(v) {
                    report.push(format!("node '{name}': {v} is neither virtual nor a vertex of G"));
                }
            }
            let tree_degree = self.neighbors(i).collect::<BTreeSet<_>>().len();
            if tree_degree != node.virtuals.len() {
                report.push(format!("node '{name}': {} virtual vertices for {tree_degree} tree neighbors", node.virtuals.len()));
            }
            for (&v, link) in &node.virtuals {
                let Some(other) = self.nodes.get(link.neighbor) else {
                    report.push(format!("node '{name}': {v} links to missing node {}", link.neighbor));
                    continue;
                };
                match other.virtuals.get(&link.twin) {
                    Some(back) if back.neighbor == i && back.twin == v => {}
                    _ => report.push(format!(
                        "node '{name}': twin link of {v} is not an involution (twin {} in node '{}')",
                        link.twin, other.name
                    )),
                }
                let mine = labels_at(&node.skeleton, v);
                if other.skeleton.contains_vertex(link.twin) {
                    let theirs = labels_at(&other.skeleton, link.twin);
                    if mine != theirs {
                        report.push(format!(
                            "node '{name}': label multiset mismatch between {v} and its twin {} in node '{}'",
                            link.twin, other.name
                        ));
                    }
                }
                match self.behind.get(&v) {
                    Some(side) => {
                        let cut: Vec<EdgeId> = self
                            .g
                            .edges()
                            .filter(|(_, e)| side.contains(&e.u) != side.contains(&e.v))
                            .map(|(id, _)| id)
                            .collect();
                        if mine != cut {
                            report.push(format!("node '{name}': edges at {v} differ from the cut they represent"));
                        }
                    }
                    None => report.push(format!("node '{name}': {v} has no recorded expansion")),
                }
            }
            for (id, e) in node.skeleton.edges() {
                if e.label.is_none_or(|l| self.g.edge(l).is_none()) {
                    report.push(format!("node '{name}': skeleton edge {id} carries no edge of G"));
                }
            }
            if !node.skeleton.is_connected() {
                report.push(format!("node '{name}': skeleton is disconnected"));
            }
        }
        for v in self.g.vertices() {
            match owner.get(&v).map(Vec::len) {
                Some(1) => {}
                Some(k) => report.push(format!("{v} is a real vertex of {k} skeletons")),
                None => report.push(format!("{v} is a real vertex of no skeleton")),
            }
        }
        report
    }
}

fn labels_at(g: &MultiGraph, v: VertexId) -> Vec<EdgeId> {
    let mut out: Vec<EdgeId> = g
        .incident(v)
        .iter()
        .filter_map(|&e| g.edge(e).and_then(|e| e.label))
        .collect();
    out.sort();
    out
}
