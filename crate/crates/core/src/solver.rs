//! C-planarity deciders over the cd-tree.
//!
//! An instance is c-planar iff the skeletons admit planar embeddings in
//! which every virtual vertex has the same edge ordering as its twin.
//! Orders are compared exactly, never up to reversal: mirror images are
//! part of every enumeration, and the certificate builder mirrors every
//! skeleton at odd depth to put all of them on one sphere.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::cdtree::{CdTree, ClusteredGraph};
use crate::constraints::OrderConstraint;
use crate::error::{invalid, precondition, Error, Result};
use crate::graph::{blocks, components, EdgeId, MultiGraph, VertexId};
use crate::order::CyclicOrder;
use crate::planarity::{
    embedding_tree, is_planar, rotation_is_planar, search_capacity, HalfEdge, HalfEdgeEmbedding, PlanarEnumerator,
    RotationSystem, Visit,
};
use crate::pqtree::PQTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exact,
    Connected,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub nodes: usize,
    /// Total size of the order sets computed bottom-up.
    pub enumerated_orders: usize,
    pub search_steps: u64,
}

/// One rotation system per cd-tree node, twins with identical orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub rotations: Vec<RotationSystem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub c_planar: bool,
    pub witness: Option<Witness>,
    pub algorithm: Algorithm,
    pub stats: Stats,
}

/// Orders at `v` realizable by planar rotation systems of `g` whose
/// constrained vertices respect their constraints.
pub fn phi_explicit(
    g: &MultiGraph,
    v: VertexId,
    constraints: &BTreeMap<VertexId, OrderConstraint>,
) -> Result<OrderConstraint> {
    let (orders, _) = phi_bounded(g, v, constraints, search_capacity())?;
    OrderConstraint::explicit(g.incident(v).iter().copied().collect(), orders)
}

fn phi_bounded(
    g: &MultiGraph,
    v: VertexId,
    constraints: &BTreeMap<VertexId, OrderConstraint>,
    limit: u64,
) -> Result<(BTreeSet<CyclicOrder<EdgeId>>, u64)> {
    if !g.contains_vertex(v) {
        return invalid(format!("{v} is not a vertex of the graph"));
    }
    if constraints.contains_key(&v) {
        return invalid(format!("{v} is both target and constrained"));
    }
    let found = RefCell::new(BTreeSet::new());
    let failure = RefCell::new(None);
    let mut first = vec![v];
    first.extend(constraints.keys().copied());
    let mut search = PlanarEnumerator::new(g, &first, limit);
    search.run(
        &mut |x, o| {
            if x == v {
                return !found.borrow().contains(o);
            }
            match constraints.get(&x).map(|c| c.allows(o)) {
                None | Some(Ok(true)) => true,
                Some(Ok(false)) => false,
                Some(Err(e)) => {
                    failure.borrow_mut().get_or_insert(e);
                    false
                }
            }
        },
        &mut |r| {
            found.borrow_mut().insert(r.get(v).cloned().unwrap_or_else(|| CyclicOrder::new(Vec::new())));
            Visit::Unwind(v)
        },
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((found.into_inner(), search.steps()))
}

/// One planar rotation system respecting the constraints, if any.
fn constrained_search(
    g: &MultiGraph,
    constraints: &BTreeMap<VertexId, OrderConstraint>,
    stats: &mut Stats,
) -> Result<Option<RotationSystem>> {
    let first: Vec<VertexId> = constraints.keys().copied().collect();
    let mut witness = None;
    let mut failure = None;
    let mut search = PlanarEnumerator::new(g, &first, search_capacity());
    search.run(
        &mut |x, o| match constraints.get(&x).map(|c| c.allows(o)) {
            None | Some(Ok(true)) => true,
            Some(Ok(false)) => false,
            Some(Err(e)) => {
                failure.get_or_insert(e);
                false
            }
        },
        &mut |r| {
            witness = Some(r.clone());
            Visit::Stop
        },
    )?;
    stats.search_steps += search.steps();
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(witness)
}

/// Exact decision by dynamic programming over explicit order sets.
pub fn test_exact(cg: &ClusteredGraph) -> Result<Verdict> {
    test_exact_tree(&CdTree::build(cg)?)
}

/// [`test_exact`] on a given (possibly rerooted) cd-tree.
pub fn test_exact_tree(ct: &CdTree) -> Result<Verdict> {
    let mut stats = Stats { nodes: ct.len(), ..Stats::default() };
    let no = |stats: Stats| Verdict { c_planar: false, witness: None, algorithm: Algorithm::Exact, stats };
    if is_planar(ct.graph()).is_none() || ct.nodes().iter().any(|n| is_planar(&n.skeleton).is_none()) {
        return Ok(no(stats));
    }

    let mut sets: Vec<BTreeSet<CyclicOrder<EdgeId>>> = vec![BTreeSet::new(); ct.len()];
    for mu in ct.postorder() {
        if mu == ct.root() {
            continue;
        }
        let constraints = child_constraints(ct, mu, &sets)?;
        if constraints.values().any(|c| matches!(c, OrderConstraint::Explicit { orders, .. } if orders.is_empty())) {
            return Ok(no(stats));
        }
        let tau = ct.parent_vertex(mu).unwrap();
        let skeleton = &ct.node(mu).skeleton;
        let (orders, steps) = phi_bounded(skeleton, tau, &constraints, search_capacity())
            .map_err(|e| with_cut_size(e, skeleton.degree(tau)))?;
        stats.search_steps += steps;
        stats.enumerated_orders += orders.len();
        if orders.is_empty() {
            return Ok(no(stats));
        }
        sets[mu] = orders;
    }

    let root = ct.root();
    let constraints = child_constraints(ct, root, &sets)?;
    let Some(root_rotation) = constrained_search(&ct.node(root).skeleton, &constraints, &mut stats)? else {
        return Ok(no(stats));
    };

    // Replay top-down: fix each child's parent vertex to the order its
    // twin received and pick any completion.
    let mut rotations: Vec<Option<RotationSystem>> = vec![None; ct.len()];
    rotations[root] = Some(root_rotation);
    let mut queue = VecDeque::from([root]);
    while let Some(mu) = queue.pop_front() {
        for c in ct.children(mu) {
            let nu = ct.virtual_towards(mu, c).unwrap();
            let required = rotations[mu].as_ref().unwrap().get(nu).cloned().unwrap();
            let mut constraints = child_constraints(ct, c, &sets)?;
            constraints.insert(ct.parent_vertex(c).unwrap(), OrderConstraint::Full(required));
            let r = constrained_search(&ct.node(c).skeleton, &constraints, &mut stats)?.ok_or_else(|| {
                Error::Certification(format!("no embedding of '{}' extends its twin order", ct.node(c).name))
            })?;
            rotations[c] = Some(r);
            queue.push_back(c);
        }
    }
    Ok(Verdict {
        c_planar: true,
        witness: Some(Witness { rotations: rotations.into_iter().map(Option::unwrap).collect() }),
        algorithm: Algorithm::Exact,
        stats,
    })
}

fn with_cut_size(e: Error, cut: usize) -> Error {
    match e {
        Error::Capacity { what, limit } => Error::Capacity { what: format!("{what} (cut of size {cut})"), limit },
        other => other,
    }
}

fn child_constraints(
    ct: &CdTree,
    mu: usize,
    sets: &[BTreeSet<CyclicOrder<EdgeId>>],
) -> Result<BTreeMap<VertexId, OrderConstraint>> {
    let skeleton = &ct.node(mu).skeleton;
    let mut out = BTreeMap::new();
    for c in ct.children(mu) {
        let nu = ct.virtual_towards(mu, c).unwrap();
        let ground = skeleton.incident(nu).iter().copied().collect();
        out.insert(nu, OrderConstraint::explicit(ground, sets[c].clone())?);
    }
    Ok(out)
}

/// Polynomial decision when every cluster is connected: child subtrees are
/// summarized by PQ-trees, plugged into the parent skeleton as gadgets, and
/// the embedding tree of the parent vertex summarizes the node in turn.
pub fn test_connected(cg: &ClusteredGraph) -> Result<Verdict> {
    for (i, c) in cg.clusters().iter().enumerate().skip(1) {
        if !cg.graph().induced_subgraph(&cg.cluster_vertices(i)).is_connected() {
            return precondition(format!("cluster '{}' is disconnected", c.name));
        }
    }
    let ct = CdTree::build(cg)?;
    let stats = Stats { nodes: ct.len(), ..Stats::default() };
    let verdict = |c_planar, stats| Verdict { c_planar, witness: None, algorithm: Algorithm::Connected, stats };
    let mut trees: Vec<Option<PQTree<EdgeId>>> = vec![None; ct.len()];
    for mu in ct.postorder() {
        let mut h = ct.node(mu).skeleton.clone();
        for c in ct.children(mu) {
            let nu = ct.virtual_towards(mu, c).unwrap();
            h = substitute_gadget(&h, nu, trees[c].as_ref().unwrap())?;
        }
        if is_planar(&h).is_none() {
            return Ok(verdict(false, stats));
        }
        if mu == ct.root() {
            return Ok(verdict(true, stats));
        }
        trees[mu] = Some(embedding_tree(&h, ct.parent_vertex(mu).unwrap())?);
    }
    unreachable!("postorder ends at the root")
}

/// Replaces vertex `v` of `h` by the gadget of `tree` (apex removed); the
/// edges of `v` move to the gadget vertices their leaves hang from.
pub fn substitute_gadget(h: &MultiGraph, v: VertexId, tree: &PQTree<EdgeId>) -> Result<MultiGraph> {
    let at_v: BTreeSet<EdgeId> = h.incident(v).iter().copied().collect();
    if tree.labels() != at_v {
        return invalid(format!("gadget labels do not match the edges at {v}"));
    }
    let (gadget, apex, leaf_edges) = tree.gadget();
    let vshift = h.fresh_vertex_id().0;
    let eshift = h.fresh_edge_id().0;
    let mut out = h.clone();
    for x in gadget.vertices().filter(|&x| x != apex) {
        out.add_vertex(VertexId(vshift + x.0));
    }
    for (id, e) in gadget.edges() {
        if e.u != apex && e.v != apex {
            out.add_edge(EdgeId(eshift + id.0), VertexId(vshift + e.u.0), VertexId(vshift + e.v.0))?;
        }
    }
    for (label, gadget_edge) in leaf_edges {
        let x = gadget.edge(gadget_edge).unwrap().other(apex);
        out.reattach(label, v, VertexId(vshift + x.0))?;
    }
    out.remove_vertex(v);
    Ok(out)
}

/// [`test_connected`] when every cluster is connected, else [`test_exact`].
pub fn test_auto(cg: &ClusteredGraph) -> Result<Verdict> {
    if classify(cg)?.all_connected {
        test_connected(cg)
    } else {
        test_exact(cg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterStats {
    pub name: String,
    pub size: usize,
    pub components: usize,
    pub outgoing_edges: usize,
    pub cocluster_components: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VirtualStats {
    pub node: String,
    pub vertex: VertexId,
    pub degree: usize,
    pub nontrivial_blocks: usize,
    pub is_cutvertex: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterProfile {
    pub clusters: Vec<ClusterStats>,
    pub virtuals: Vec<VirtualStats>,
    /// Every proper cluster induces a connected subgraph.
    pub all_connected: bool,
    /// No parent vertex is a cutvertex of its skeleton (cd-tree rooted at
    /// the root cluster). Always equal to `all_connected`.
    pub no_parent_cutvertex: bool,
    pub flat: bool,
    /// Every virtual vertex meets at most two non-trivial blocks.
    pub at_most_two_nontrivial_blocks: bool,
    /// Every cluster and co-cluster has at most two components.
    pub at_most_two_components: bool,
    /// Every cluster has at most five outgoing edges.
    pub at_most_five_outgoing: bool,
    /// Cutvertex virtual vertices whose blocks lead into a shared
    /// component of the expansion of the twin. Always empty.
    pub block_component_violations: Vec<String>,
}

pub fn classify(cg: &ClusteredGraph) -> Result<ClusterProfile> {
    let g = cg.graph();
    let all = g.vertex_set().clone();
    let mut clusters = Vec::new();
    for (i, c) in cg.clusters().iter().enumerate().skip(1) {
        let inside = cg.cluster_vertices(i);
        let outside: BTreeSet<VertexId> = all.difference(&inside).copied().collect();
        clusters.push(ClusterStats {
            name: c.name.clone(),
            size: inside.len(),
            components: components(&g.induced_subgraph(&inside)).len(),
            outgoing_edges: g.edges().filter(|(_, e)| inside.contains(&e.u) != inside.contains(&e.v)).count(),
            cocluster_components: components(&g.induced_subgraph(&outside)).len(),
        });
    }

    let ct = CdTree::build(cg)?;
    let mut virtuals = Vec::new();
    let mut violations = Vec::new();
    let mut no_parent_cutvertex = true;
    for (i, node) in ct.nodes().iter().enumerate() {
        let decomposition = blocks(&node.skeleton);
        for (&nu, link) in &node.virtuals {
            let is_cut = decomposition.cutvertices.contains(&nu);
            if is_cut && ct.parent_vertex(i) == Some(nu) {
                no_parent_cutvertex = false;
            }
            virtuals.push(VirtualStats {
                node: node.name.clone(),
                vertex: nu,
                degree: node.skeleton.degree(nu),
                nontrivial_blocks: decomposition.nontrivial_blocks_at(nu),
                is_cutvertex: is_cut,
            });
            if is_cut {
                let twin_side = ct.behind(link.twin).unwrap();
                let comp_of: BTreeMap<VertexId, usize> = components(&g.induced_subgraph(twin_side))
                    .into_iter()
                    .enumerate()
                    .flat_map(|(k, c)| c.into_iter().map(move |v| (v, k)))
                    .collect();
                let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
                for (b, block) in decomposition.blocks_at(nu).enumerate() {
                    for &x in block.vertices.iter().filter(|&&x| x != nu) {
                        let members = match ct.behind(x) {
                            Some(side) if node.is_virtual(x) => side.clone(),
                            _ => BTreeSet::from([x]),
                        };
                        for m in members {
                            if let Some(prev) = owner.insert(comp_of[&m], b) {
                                if prev != b {
                                    violations.push(format!(
                                        "node '{}': blocks at {nu} share a component behind its twin",
                                        node.name
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    violations.dedup();
    let all_connected = clusters.iter().all(|c| c.components == 1);
    Ok(ClusterProfile {
        all_connected,
        no_parent_cutvertex,
        flat: cg.is_flat(),
        at_most_two_nontrivial_blocks: virtuals.iter().all(|v| v.nontrivial_blocks <= 2),
        at_most_two_components: clusters.iter().all(|c| c.components <= 2 && c.cocluster_components <= 2),
        at_most_five_outgoing: clusters.iter().all(|c| c.outgoing_edges <= 5),
        clusters,
        virtuals,
        block_component_violations: violations,
    })
}

/// Where an edge of the certificate graph comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertEdge {
    /// The part of edge `edge` of `G` drawn inside the skeleton of `node`.
    Segment { node: usize, edge: EdgeId },
    /// Edge `index` of the boundary cycle of the cluster of `node`.
    Boundary { node: usize, index: usize },
}

/// The embedded graph `G⁺`: a subdivision of `G` plus one boundary cycle
/// per tree edge, through the subdivision vertices of its cut edges.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub embedding: HalfEdgeEmbedding,
    pub origin: Vec<CertEdge>,
    /// Boundary cycle vertices, keyed by the child node of the tree edge.
    pub cycles: BTreeMap<usize, Vec<VertexId>>,
    pub subdivision: BTreeMap<(usize, EdgeId), VertexId>,
}

/// Glues the witness skeletons into `G⁺` and checks it.
pub fn certify(ct: &CdTree, witness: &Witness) -> Result<Certificate> {
    if witness.rotations.len() != ct.len() {
        return Err(Error::Certification("witness does not cover every node".into()));
    }
    for (i, node) in ct.nodes().iter().enumerate() {
        if !rotation_is_planar(&node.skeleton, &witness.rotations[i])? {
            return Err(Error::Certification(format!("rotation of '{}' is not planar", node.name)));
        }
        if let Some(p) = ct.parent(i) {
            let tau = ct.parent_vertex(i).unwrap();
            let nu = ct.virtual_towards(p, i).unwrap();
            if witness.rotations[i].get(tau) != witness.rotations[p].get(nu) {
                return Err(Error::Certification(format!(
                    "twin orders differ on tree edge '{}'-'{}'",
                    node.name,
                    ct.node(p).name
                )));
            }
        }
    }
    let depth = ct.depths();
    let rot: Vec<RotationSystem> = witness
        .rotations
        .iter()
        .enumerate()
        .map(|(i, r)| if depth[i] % 2 == 1 { r.mirrored() } else { r.clone() })
        .collect();

    let mut next = ct
        .nodes()
        .iter()
        .flat_map(|n| n.skeleton.vertices())
        .max()
        .map_or(0, |v| v.0 + 1);
    let mut subdivision = BTreeMap::new();
    for i in 0..ct.len() {
        if let Some(tau) = ct.parent_vertex(i) {
            for &e in ct.node(i).skeleton.incident(tau) {
                subdivision.insert((i, e), VertexId(next));
                next += 1;
            }
        }
    }
    // Child node of the tree edge between `mu` and its neighbor behind `x`.
    let tree_edge = |mu: usize, x: VertexId| {
        let j = ct.node(mu).virtuals[&x].neighbor;
        if ct.parent(j) == Some(mu) {
            j
        } else {
            mu
        }
    };
    let point = |mu: usize, x: VertexId, e: EdgeId| {
        if ct.node(mu).is_virtual(x) {
            subdivision[&(tree_edge(mu, x), e)]
        } else {
            x
        }
    };

    let mut emb = HalfEdgeEmbedding::default();
    let mut origin = Vec::new();
    let mut segment = BTreeMap::new();
    for (mu, node) in ct.nodes().iter().enumerate() {
        for (e, edge) in node.skeleton.edges() {
            segment.insert((mu, e), emb.ends.len());
            emb.ends.push((point(mu, edge.u, e), point(mu, edge.v, e)));
            origin.push(CertEdge::Segment { node: mu, edge: e });
        }
    }
    let half_at = |emb: &HalfEdgeEmbedding, idx: usize, v: VertexId| HalfEdge {
        edge: idx,
        end: u8::from(emb.ends[idx].0 != v),
    };
    for (mu, node) in ct.nodes().iter().enumerate() {
        for x in node.real_vertices() {
            let order = rot[mu].get(x).map(|o| o.as_slice().to_vec()).unwrap_or_default();
            let hs = order.iter().map(|&e| half_at(&emb, segment[&(mu, e)], x)).collect();
            emb.rotation.insert(x, hs);
        }
    }
    let mut cycles = BTreeMap::new();
    for c in 0..ct.len() {
        let Some(p) = ct.parent(c) else { continue };
        let nu = ct.virtual_towards(p, c).unwrap();
        let order = rot[p].get(nu).unwrap().as_slice().to_vec();
        let l = order.len();
        let first = emb.ends.len();
        let s: Vec<VertexId> = order.iter().map(|&e| subdivision[&(c, e)]).collect();
        for j in 0..l {
            emb.ends.push((s[j], s[(j + 1) % l]));
            origin.push(CertEdge::Boundary { node: c, index: j });
        }
        for (j, &e) in order.iter().enumerate() {
            let outer = segment[&(p, e)];
            let inner = segment[&(c, e)];
            emb.rotation.insert(
                s[j],
                vec![
                    half_at(&emb, outer, s[j]),
                    HalfEdge { edge: first + j, end: 0 },
                    half_at(&emb, inner, s[j]),
                    HalfEdge { edge: first + (j + l - 1) % l, end: 1 },
                ],
            );
        }
        cycles.insert(c, s);
    }
    let cert = Certificate { embedding: emb, origin, cycles, subdivision };
    cert.check(ct)?;
    Ok(cert)
}

impl Certificate {
    /// Planarity, subdivision of `G`, cycle contents and disjointness.
    pub fn check(&self, ct: &CdTree) -> Result<()> {
        let fail = |m: String| Err(Error::Certification(m));
        if !self.embedding.is_planar()? {
            return fail("glued rotation system is not planar".into());
        }
        let subdivision_vertices: BTreeSet<VertexId> = self.subdivision.values().copied().collect();
        let g = ct.graph();
        for (e, edge) in g.edges() {
            let pieces: Vec<usize> = (0..self.origin.len())
                .filter(|&i| matches!(self.origin[i], CertEdge::Segment { edge: x, .. } if x == e))
                .collect();
            let mut degree: BTreeMap<VertexId, usize> = BTreeMap::new();
            let mut h = MultiGraph::new();
            for &i in &pieces {
                let (a, b) = self.embedding.ends[i];
                *degree.entry(a).or_default() += 1;
                *degree.entry(b).or_default() += 1;
                h.add_vertex(a);
                h.add_vertex(b);
                if a == b || h.add_edge(EdgeId(i as u32), a, b).is_err() {
                    return fail(format!("edge {e} is not subdivided into a path"));
                }
            }
            let is_path = h.is_connected()
                && degree.get(&edge.u) == Some(&1)
                && degree.get(&edge.v) == Some(&1)
                && degree
                    .iter()
                    .all(|(v, &d)| *v == edge.u || *v == edge.v || (d == 2 && subdivision_vertices.contains(v)));
            if !is_path {
                return fail(format!("edge {e} is not subdivided into a path"));
            }
        }
        let mut used = BTreeSet::new();
        for (&c, s) in &self.cycles {
            let tau = ct.parent_vertex(c).unwrap();
            let expected: BTreeSet<VertexId> =
                ct.node(c).skeleton.incident(tau).iter().map(|&e| self.subdivision[&(c, e)]).collect();
            let actual: BTreeSet<VertexId> = s.iter().copied().collect();
            if actual != expected || s.len() != expected.len() {
                return fail(format!("cycle of '{}' does not match its cut", ct.node(c).name));
            }
            let edges: Vec<(VertexId, VertexId)> = (0..self.origin.len())
                .filter(|&i| matches!(self.origin[i], CertEdge::Boundary { node, .. } if node == c))
                .map(|i| self.embedding.ends[i])
                .collect();
            let closes = edges.len() == s.len()
                && (0..s.len()).all(|j| edges.contains(&(s[j], s[(j + 1) % s.len()])));
            if !closes {
                return fail(format!("cycle of '{}' is not closed", ct.node(c).name));
            }
            if !used.is_disjoint(&actual) {
                return fail(format!("cycle of '{}' meets another cycle", ct.node(c).name));
            }
            used.extend(actual);
        }
        Ok(())
    }
}
