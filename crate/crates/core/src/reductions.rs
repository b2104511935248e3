//! Flat c-planarity versus constrained planarity, in both directions.
//!
//! Forward, the root skeleton of the cd-tree of a flat instance becomes the
//! constrained graph and every virtual vertex is constrained to the orders
//! its leaf skeleton can realize. Backward, every constrained vertex is
//! replaced by a cluster whose skeleton realizes the constraint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::cdtree::{CdTree, Cluster, ClusteredGraph};
use crate::constraints::{constrained_planar_bounded, ConstrainedInstance, InnerConstraint, OrderConstraint};
use crate::error::{invalid, precondition, Error, Result};
use crate::graph::{blocks, components, EdgeId, MultiGraph, VertexId};
use crate::order::CyclicOrder;
use crate::planarity::{embedding_tree, rotation_is_planar, search_capacity, RotationSystem};
use crate::pqtree::PQTree;
use crate::solver::test_auto;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// Clusters of isolated vertices and partition constraints.
    I,
    /// Connected clusters and PQ-constraints.
    II,
    /// Fixed embedding of `G` and partitioned full constraints.
    III,
    /// No restriction and partitioned PQ-constraints.
    IV,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::I, Variant::II, Variant::III, Variant::IV];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::I => "i",
            Variant::II => "ii",
            Variant::III => "iii",
            Variant::IV => "iv",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(Variant::I),
            "ii" | "2" => Ok(Variant::II),
            "iii" | "3" => Ok(Variant::III),
            "iv" | "4" => Ok(Variant::IV),
            _ => invalid(format!("unknown variant '{s}' (expected i, ii, iii or iv)")),
        }
    }
}

/// Result of [`flat_to_constrained`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedReduction {
    pub instance: ConstrainedInstance,
    /// Real vertices keep their names, virtual vertices get their cluster's.
    pub names: BTreeMap<VertexId, String>,
    /// Set when the fixed embedding already rules out every drawing.
    pub trivially_infeasible: bool,
}

impl ConstrainedReduction {
    pub fn is_feasible(&self) -> Result<bool> {
        if self.trivially_infeasible {
            return Ok(false);
        }
        Ok(constrained_planar_bounded(&self.instance, search_capacity())?.is_some())
    }
}

/// Result of [`constrained_to_flat`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatReduction {
    pub instance: ClusteredGraph,
    /// Prescribed rotation system of `G` (variant iii only).
    pub embedding: Option<RotationSystem>,
    pub names: BTreeMap<VertexId, String>,
    /// Set when the prescribed rotation system is not planar.
    pub trivially_infeasible: bool,
}

impl FlatReduction {
    pub fn is_c_planar(&self) -> Result<bool> {
        if self.trivially_infeasible {
            return Ok(false);
        }
        match &self.embedding {
            Some(r) => test_fixed_embedding(&self.instance, r),
            None => Ok(test_auto(&self.instance)?.c_planar),
        }
    }
}

fn default_names(g: &MultiGraph) -> BTreeMap<VertexId, String> {
    g.vertices().map(|v| (v, format!("v{}", v.0))).collect()
}

fn unlabeled(g: &MultiGraph) -> MultiGraph {
    let mut h = MultiGraph::new();
    for v in g.vertices() {
        h.add_vertex(v);
    }
    for (id, e) in g.edges() {
        h.add_edge(id, e.u, e.v).expect("copied edge");
    }
    h
}

pub fn flat_to_constrained(
    cg: &ClusteredGraph,
    variant: Variant,
    fixed_embedding: Option<&RotationSystem>,
) -> Result<ConstrainedReduction> {
    flat_to_constrained_named(cg, variant, fixed_embedding, &default_names(cg.graph()))
}

pub fn flat_to_constrained_named(
    cg: &ClusteredGraph,
    variant: Variant,
    fixed_embedding: Option<&RotationSystem>,
    names: &BTreeMap<VertexId, String>,
) -> Result<ConstrainedReduction> {
    if !cg.is_flat() {
        return invalid("reductions need a flat clustering");
    }
    let g = cg.graph();
    let embedding = match (variant, fixed_embedding) {
        (Variant::III, Some(r)) => {
            check_rotation(g, r)?;
            Some(r)
        }
        (Variant::III, None) => return precondition("variant iii needs a fixed embedding"),
        _ => None,
    };
    let ct = CdTree::build(cg)?;
    let root = ct.root();
    let skeleton = &ct.node(root).skeleton;
    let mut constraints = BTreeMap::new();
    let mut out_names = BTreeMap::new();
    let mut trivially_infeasible = false;

    for v in ct.node(root).real_vertices() {
        out_names.insert(v, names.get(&v).cloned().unwrap_or_else(|| format!("v{}", v.0)));
        if let Some(r) = embedding {
            if skeleton.degree(v) >= 3 {
                let o = r.get(v).expect("checked rotation").clone();
                constraints.insert(v, OrderConstraint::partitioned(vec![InnerConstraint::Full(o)])?);
            }
        }
    }

    for leaf in ct.children(root) {
        let node = ct.node(leaf);
        let nu = ct.virtual_towards(root, leaf).expect("star cd-tree");
        let tau = ct.parent_vertex(leaf).expect("leaf has a parent");
        let sk = &node.skeleton;
        out_names.insert(nu, node.name.clone());
        let at_tau: Vec<EdgeId> = sk.incident(tau).to_vec();
        let c = match variant {
            Variant::I => {
                if sk.edges().any(|(_, e)| e.u != tau && e.v != tau) {
                    return precondition(format!("cluster '{}' has internal edges", node.name));
                }
                let mut by_vertex: BTreeMap<VertexId, BTreeSet<EdgeId>> = BTreeMap::new();
                for &e in &at_tau {
                    by_vertex.entry(sk.edge(e).unwrap().other(tau)).or_default().insert(e);
                }
                OrderConstraint::partition(by_vertex.into_values().collect())?
            }
            Variant::II => {
                let inside: BTreeSet<VertexId> = node.real_vertices().collect();
                if components(&sk.induced_subgraph(&inside)).len() != 1 {
                    return precondition(format!("cluster '{}' is disconnected", node.name));
                }
                OrderConstraint::PQ(embedding_tree(sk, tau)?)
            }
            Variant::III => {
                let r = embedding.expect("checked above");
                let mut inner = Vec::new();
                let mut planar = true;
                for block in blocks(sk).blocks_at(tau) {
                    let o = match block_order(sk, &block.edges, tau, r)? {
                        Some(o) => o,
                        None => {
                            planar = false;
                            CyclicOrder::new(at_tau.iter().copied().filter(|e| block.edges.contains(e)).collect())
                        }
                    };
                    inner.push(InnerConstraint::Full(o));
                }
                // A cluster vertex may interleave the edges of two blocks, so
                // the whole skeleton is checked with the blocks side by side.
                if planar && !leaf_is_planar(sk, tau, &inner, r)? {
                    planar = false;
                }
                trivially_infeasible |= !planar;
                OrderConstraint::partitioned(inner)?
            }
            Variant::IV => {
                let mut inner = Vec::new();
                for block in blocks(sk).blocks_at(tau) {
                    let b = sk.edge_subgraph(&block.edges);
                    inner.push(InnerConstraint::PQ(embedding_tree(&b, tau)?));
                }
                OrderConstraint::partitioned(inner)?
            }
        };
        constraints.insert(nu, c);
    }
    let instance = ConstrainedInstance::new(unlabeled(skeleton), constraints)?;
    Ok(ConstrainedReduction { instance, names: out_names, trivially_infeasible })
}

fn check_rotation(g: &MultiGraph, r: &RotationSystem) -> Result<()> {
    for v in g.vertices() {
        let incident: BTreeSet<EdgeId> = g.incident(v).iter().copied().collect();
        let given = r.get(v).map(|o| o.labels()).unwrap_or_default();
        if given != incident {
            return invalid(format!("fixed embedding does not cover the edges at {v}"));
        }
    }
    if !rotation_is_planar(g, r)? {
        return precondition("fixed embedding is not planar");
    }
    Ok(())
}

/// Order at `tau` of one block of a leaf skeleton whose real vertices
/// rotate as in `r`, or `None` if no order makes the block planar.
///
/// Skeletons below the root are drawn mirrored, so real vertices use the
/// reversed rotation. In a planar embedding of a block every face is a
/// cycle through `tau` at most once: leaving `tau` along `f` and coming
/// back along `e` means `f` follows `e` at `tau`.
fn block_order(
    sk: &MultiGraph,
    block: &BTreeSet<EdgeId>,
    tau: VertexId,
    r: &RotationSystem,
) -> Result<Option<CyclicOrder<EdgeId>>> {
    let b = sk.edge_subgraph(block);
    let at_tau: Vec<EdgeId> = b.incident(tau).to_vec();
    if at_tau.len() <= 2 {
        return Ok(Some(CyclicOrder::new(at_tau)));
    }
    let mut rot = RotationSystem::new();
    for x in b.vertices().filter(|&x| x != tau) {
        let restricted = r.get(x).expect("checked rotation").restrict(&b.incident(x).iter().copied().collect());
        rot.set(x, restricted.reversed());
    }
    let mut next_at_tau: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for &f in &at_tau {
        let mut e = f;
        let mut w = b.edge(f).unwrap().other(tau);
        let mut steps = 0;
        while w != tau {
            steps += 1;
            if steps > 2 * b.num_edges() {
                return Ok(None);
            }
            e = *rot.get(w).unwrap().successor(&e).unwrap();
            w = b.edge(e).unwrap().other(w);
        }
        if next_at_tau.insert(e, f).is_some() {
            return Ok(None);
        }
    }
    let mut seq = vec![at_tau[0]];
    while seq.len() < at_tau.len() {
        let next = next_at_tau[seq.last().unwrap()];
        if next == seq[0] {
            return Ok(None);
        }
        seq.push(next);
    }
    let order = CyclicOrder::new(seq);
    rot.set(tau, order.clone());
    Ok(rotation_is_planar(&b, &rot)?.then_some(order))
}

fn leaf_is_planar(sk: &MultiGraph, tau: VertexId, inner: &[InnerConstraint], r: &RotationSystem) -> Result<bool> {
    let mut rot = RotationSystem::new();
    for x in sk.vertices().filter(|&x| x != tau) {
        rot.set(x, r.get(x).expect("checked rotation").reversed());
    }
    let mut at_tau = Vec::new();
    for c in inner {
        if let InnerConstraint::Full(o) = c {
            at_tau.extend_from_slice(o.as_slice());
        }
    }
    rot.set(tau, CyclicOrder::new(at_tau));
    rotation_is_planar(sk, &rot)
}

/// C-planarity of a flat instance whose rotation system is prescribed.
pub fn test_fixed_embedding(cg: &ClusteredGraph, r: &RotationSystem) -> Result<bool> {
    check_rotation(cg.graph(), r)?;
    flat_to_constrained(cg, Variant::III, Some(r))?.is_feasible()
}

struct Builder {
    g: MultiGraph,
    names: BTreeMap<VertexId, String>,
    used: BTreeSet<String>,
    rotation: BTreeMap<VertexId, Vec<EdgeId>>,
}

impl Builder {
    fn vertex(&mut self, name: String) -> VertexId {
        let v = self.g.fresh_vertex_id();
        self.g.add_vertex(v);
        let mut name = name;
        while !self.used.insert(name.clone()) {
            name.push('\'');
        }
        self.names.insert(v, name);
        v
    }

    fn edge(&mut self, x: VertexId, y: VertexId) -> EdgeId {
        let e = self.g.fresh_edge_id();
        self.g.add_edge(e, x, y).expect("distinct endpoints");
        e
    }

    /// Joins `x` and `y`, subdividing when they are already adjacent so the
    /// graph stays simple. Returns the edge at `x`, the edge at `y` and the
    /// subdivision vertex, if any.
    fn join(&mut self, x: VertexId, y: VertexId, mid: &str) -> (EdgeId, EdgeId, Option<VertexId>) {
        if !self.g.has_edge_between(x, y) {
            let e = self.edge(x, y);
            return (e, e, None);
        }
        let s = self.vertex(mid.to_string());
        let a = self.edge(x, s);
        let b = self.edge(s, y);
        self.rotation.insert(s, vec![a, b]);
        (a, b, Some(s))
    }
}

/// Per constrained vertex: the vertex standing for each incident edge, the
/// vertices forming the cluster and, in variant iii, center rotations.
struct Part {
    port: BTreeMap<EdgeId, VertexId>,
    members: Vec<VertexId>,
    centers: Vec<(VertexId, CyclicOrder<EdgeId>)>,
}

pub fn constrained_to_flat(ci: &ConstrainedInstance, variant: Variant) -> Result<FlatReduction> {
    constrained_to_flat_named(ci, variant, &default_names(&ci.graph))
}

pub fn constrained_to_flat_named(
    ci: &ConstrainedInstance,
    variant: Variant,
    names: &BTreeMap<VertexId, String>,
) -> Result<FlatReduction> {
    let h = &ci.graph;
    let name_of = |v: VertexId| names.get(&v).cloned().unwrap_or_else(|| format!("v{}", v.0));
    let mut b = Builder { g: MultiGraph::new(), names: BTreeMap::new(), used: BTreeSet::new(), rotation: BTreeMap::new() };
    let mut parts: BTreeMap<VertexId, Part> = BTreeMap::new();

    for v in h.vertices() {
        let incident: Vec<EdgeId> = h.incident(v).to_vec();
        let part = match (variant, ci.constraints.get(&v)) {
            (Variant::III, c) => star_part(&mut b, &name_of(v), &incident, blocks_iii(c, &incident)?),
            (_, None) => single_part(&mut b, name_of(v), &incident),
            (Variant::I, Some(OrderConstraint::Partition(bs))) => {
                let mut part = Part { port: BTreeMap::new(), members: Vec::new(), centers: Vec::new() };
                for (j, block) in bs.iter().enumerate() {
                    let x = b.vertex(format!("{}.{j}", name_of(v)));
                    part.members.push(x);
                    part.port.extend(block.iter().map(|&e| (e, x)));
                }
                part
            }
            (Variant::II, Some(OrderConstraint::PQ(t))) => {
                let mut part = Part { port: BTreeMap::new(), members: Vec::new(), centers: Vec::new() };
                gadget_part(&mut b, &name_of(v), t, &mut part);
                part
            }
            (Variant::IV, Some(c)) => {
                let trees = blocks_iv(c)?;
                let mut part = Part { port: BTreeMap::new(), members: Vec::new(), centers: Vec::new() };
                for t in &trees {
                    gadget_part(&mut b, &name_of(v), t, &mut part);
                }
                part
            }
            (_, Some(c)) => {
                return invalid(format!("{} constraint at {v} does not fit variant {variant}", c.family()));
            }
        };
        parts.insert(v, part);
    }

    // Edge of `G` at each end of every input edge.
    let mut side: BTreeMap<(VertexId, EdgeId), EdgeId> = BTreeMap::new();
    for (e, edge) in h.edges() {
        let (x, y) = (parts[&edge.u].port[&e], parts[&edge.v].port[&e]);
        let (at_x, at_y, _) = b.join(x, y, &format!("e{}", e.0));
        side.insert((edge.u, e), at_x);
        side.insert((edge.v, e), at_y);
    }

    if !b.g.is_connected() {
        return Err(Error::Unsupported("the flat instance would be disconnected".into()));
    }

    let mut embedding = None;
    let mut trivially_infeasible = false;
    if variant == Variant::III {
        let mut r = RotationSystem::new();
        for (&s, order) in &b.rotation {
            r.set(s, CyclicOrder::new(order.clone()));
        }
        for (&v, part) in &parts {
            for (x, o) in &part.centers {
                r.set(*x, o.map(|f| side[&(v, *f)]));
            }
        }
        trivially_infeasible = !rotation_is_planar(&b.g, &r)?;
        embedding = Some(r);
    }

    let mut root_vertices: BTreeSet<VertexId> = b.g.vertices().collect();
    let mut children = Vec::new();
    for (&v, part) in &parts {
        for x in &part.members {
            root_vertices.remove(x);
        }
        if !part.members.is_empty() {
            children.push(Cluster::new(name_of(v), part.members.clone(), Vec::new()));
        }
    }
    let root = Cluster::new("root", root_vertices.into_iter().collect(), children);
    let instance = ClusteredGraph::new(b.g, root)?;
    Ok(FlatReduction { instance, embedding, names: b.names, trivially_infeasible })
}

fn single_part(b: &mut Builder, name: String, incident: &[EdgeId]) -> Part {
    let x = b.vertex(name);
    Part { port: incident.iter().map(|&e| (e, x)).collect(), members: Vec::new(), centers: Vec::new() }
}

/// Block orders for variant iii. Unconstrained vertices of degree at least
/// three allow every order, which singleton blocks express.
fn blocks_iii(c: Option<&OrderConstraint>, incident: &[EdgeId]) -> Result<Vec<CyclicOrder<EdgeId>>> {
    match c {
        None if incident.len() <= 2 => Ok(vec![CyclicOrder::new(incident.to_vec())]),
        None => Ok(incident.iter().map(|&e| CyclicOrder::new(vec![e])).collect()),
        Some(OrderConstraint::Full(o)) => Ok(vec![o.clone()]),
        Some(OrderConstraint::Partitioned(bs)) => bs
            .iter()
            .map(|b| match b {
                InnerConstraint::Full(o) => Ok(o.clone()),
                InnerConstraint::PQ(_) => invalid("PQ block in a partitioned full constraint"),
            })
            .collect(),
        Some(c) => invalid(format!("{} constraint does not fit variant iii", c.family())),
    }
}

fn blocks_iv(c: &OrderConstraint) -> Result<Vec<PQTree<EdgeId>>> {
    match c {
        OrderConstraint::PQ(t) => Ok(vec![t.clone()]),
        OrderConstraint::Partition(bs) => bs.iter().map(PQTree::universal).collect(),
        OrderConstraint::Partitioned(bs) => bs
            .iter()
            .map(|b| match b {
                InnerConstraint::PQ(t) => Ok(t.clone()),
                InnerConstraint::Full(_) => invalid("full block in a partitioned PQ constraint"),
            })
            .collect(),
        c => invalid(format!("{} constraint does not fit variant iv", c.family())),
    }
}

/// One center per block, rotating exactly as the block order. The edge ids
/// are still those of the constrained graph at this point.
fn star_part(b: &mut Builder, name: &str, incident: &[EdgeId], orders: Vec<CyclicOrder<EdgeId>>) -> Part {
    let mut part = Part { port: BTreeMap::new(), members: Vec::new(), centers: Vec::new() };
    let single = orders.len() == 1;
    for (j, o) in orders.into_iter().enumerate() {
        let x = b.vertex(if single { name.to_string() } else { format!("{name}.{j}") });
        part.members.push(x);
        part.port.extend(o.iter().map(|&e| (e, x)));
        part.centers.push((x, o));
    }
    debug_assert_eq!(part.port.len(), incident.len());
    if single {
        part.members.clear();
    }
    part
}

/// Copies the gadget of `t` without its apex; leaf edges become ports.
fn gadget_part(b: &mut Builder, name: &str, t: &PQTree<EdgeId>, part: &mut Part) {
    let (gg, apex, leaf_edges) = t.gadget();
    let mut image = BTreeMap::new();
    for x in gg.vertices().filter(|&x| x != apex) {
        let y = b.vertex(format!("{name}.{}", part.members.len()));
        part.members.push(y);
        image.insert(x, y);
    }
    for (_, e) in gg.edges() {
        if e.u != apex && e.v != apex {
            let (_, _, mid) = b.join(image[&e.u], image[&e.v], &format!("{name}.{}", part.members.len()));
            part.members.extend(mid);
        }
    }
    for (label, ge) in leaf_edges {
        part.port.insert(label, image[&gg.edge(ge).unwrap().other(apex)]);
    }
}

/// Drops every two-vertex cluster, adding the edge between its vertices
/// when they are not adjacent. The result is equivalent.
pub fn saturate_two_clusters(cg: &ClusteredGraph) -> Result<ClusteredGraph> {
    let mut g = cg.graph().clone();
    fn walk(c: &Cluster, g: &mut MultiGraph) -> Cluster {
        let mut vertices = c.vertices.clone();
        let mut children = Vec::new();
        for k in &c.children {
            if k.children.is_empty() && k.vertices.len() == 2 {
                let (u, v) = (k.vertices[0], k.vertices[1]);
                if !g.has_edge_between(u, v) {
                    let e = g.fresh_edge_id();
                    g.add_edge(e, u, v).expect("distinct cluster vertices");
                }
                vertices.extend_from_slice(&k.vertices);
            } else {
                children.push(walk(k, g));
            }
        }
        Cluster::new(c.name.clone(), vertices, children)
    }
    let root = walk(&cg.to_nested(), &mut g);
    ClusteredGraph::new(g, root)
}
