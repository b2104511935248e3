//! JSON instance files (`"format": 1`).
//!
//! Vertices are referenced by name, edges of constrained instances by their
//! position in the `edges` list. A clustered file looks like
//!
//! ```json
//! {
//!   "format": 1,
//!   "kind": "clustered",
//!   "vertices": ["a", "b", "c", "d"],
//!   "edges": [["a", "b"], ["b", "c"], ["c", "d"]],
//!   "clusters": {"name": "root", "children": [
//!     {"name": "X", "children": ["a", "b"]},
//!     {"name": "Y", "children": ["c", "d"]}
//!   ]}
//! }
//! ```
//!
//! Constrained files carry `"constraints"` keyed by vertex name instead of
//! `"clusters"`; see the README for the constraint encodings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cdtree::{Cluster, ClusteredGraph};
use crate::constraints::{ConstrainedInstance, InnerConstraint, OrderConstraint};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, MultiGraph, VertexId};
use crate::order::CyclicOrder;
use crate::planarity::RotationSystem;
use crate::pqtree::PQTree;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Clustered,
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: u32,
    pub kind: Kind,
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<ClusterFile>,
    /// Rotation per vertex, as neighbor names (clustered files only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<BTreeMap<String, ConstraintFile>>,
    /// Set by reductions whose input is infeasible for trivial reasons.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub trivially_infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterFile {
    pub name: String,
    pub children: Vec<ClusterItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClusterItem {
    Vertex(String),
    Cluster(ClusterFile),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConstraintFile {
    Partition { blocks: Vec<Vec<usize>> },
    /// Tree text with edge positions as labels, e.g. `P(e0, Q(e1, e2, e3))`.
    Pq { tree: String },
    Full { order: Vec<usize> },
    Partitioned { blocks: Vec<InnerFile> },
    Explicit { ground: Vec<usize>, orders: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerFile {
    Full(Vec<usize>),
    Pq(String),
}

/// A parsed instance with the vertex names of its file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Clustered {
        cg: ClusteredGraph,
        names: BTreeMap<VertexId, String>,
        embedding: Option<RotationSystem>,
        trivially_infeasible: bool,
    },
    Constrained {
        ci: ConstrainedInstance,
        names: BTreeMap<VertexId, String>,
        trivially_infeasible: bool,
    },
}

fn schema<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Instance::from_file(&file)
}

/// Default names `v0, v1, ...` by vertex id.
pub fn default_names(g: &MultiGraph) -> BTreeMap<VertexId, String> {
    g.vertices().map(|v| (v, format!("v{}", v.0))).collect()
}

impl Instance {
    pub fn clustered(cg: ClusteredGraph) -> Self {
        let names = default_names(cg.graph());
        Instance::Clustered { cg, names, embedding: None, trivially_infeasible: false }
    }

    pub fn constrained(ci: ConstrainedInstance) -> Self {
        let names = default_names(&ci.graph);
        Instance::Constrained { ci, names, trivially_infeasible: false }
    }

    pub fn names(&self) -> &BTreeMap<VertexId, String> {
        match self {
            Instance::Clustered { names, .. } | Instance::Constrained { names, .. } => names,
        }
    }

    pub fn from_file(f: &InstanceFile) -> Result<Self> {
        if f.format != FORMAT_VERSION {
            return schema(format!("format: unsupported version {}", f.format));
        }
        let mut ids: BTreeMap<&str, VertexId> = BTreeMap::new();
        for (i, name) in f.vertices.iter().enumerate() {
            if ids.insert(name.as_str(), VertexId(i as u32)).is_some() {
                return schema(format!("vertices: duplicate name '{name}'"));
            }
        }
        let lookup = |field: &str, name: &str| {
            ids.get(name)
                .copied()
                .ok_or_else(|| Error::Parse(format!("{field}: unknown vertex '{name}'")))
        };
        let mut g = MultiGraph::new();
        for &v in ids.values() {
            g.add_vertex(v);
        }
        for (i, (a, b)) in f.edges.iter().enumerate() {
            let (u, v) = (lookup("edges", a)?, lookup("edges", b)?);
            g.add_edge(EdgeId(i as u32), u, v)
                .map_err(|_| Error::Parse(format!("edges[{i}]: loop at '{a}'")))?;
        }
        let names: BTreeMap<VertexId, String> = ids.iter().map(|(n, &v)| (v, n.to_string())).collect();

        match f.kind {
            Kind::Clustered => {
                if f.constraints.is_some() {
                    return schema("constraints: not allowed in a clustered file");
                }
                if !g.is_simple() {
                    return schema("edges: clustered instances must be simple");
                }
                let root = match &f.clusters {
                    Some(c) => to_cluster(c, &lookup)?,
                    None => Cluster::new("root", g.vertices().collect(), Vec::new()),
                };
                let embedding = match &f.embedding {
                    Some(emb) => Some(to_rotation(&g, emb, &lookup)?),
                    None => None,
                };
                let cg = ClusteredGraph::new(g, root).map_err(|e| match e {
                    Error::InvalidArgument(m) => Error::Parse(format!("clusters: {m}")),
                    other => other,
                })?;
                Ok(Instance::Clustered { cg, names, embedding, trivially_infeasible: f.trivially_infeasible })
            }
            Kind::Constrained => {
                if f.clusters.is_some() || f.embedding.is_some() {
                    return schema("clusters/embedding: not allowed in a constrained file");
                }
                let mut constraints = BTreeMap::new();
                for (name, c) in f.constraints.iter().flatten() {
                    let v = lookup("constraints", name)?;
                    let c = to_constraint(c, f.edges.len())
                        .map_err(|e| Error::Parse(format!("constraints.{name}: {e}")))?;
                    constraints.insert(v, c);
                }
                let ci = ConstrainedInstance::new(g, constraints).map_err(|e| Error::Parse(format!("constraints: {e}")))?;
                Ok(Instance::Constrained { ci, names, trivially_infeasible: f.trivially_infeasible })
            }
        }
    }

    pub fn to_file(&self) -> InstanceFile {
        let names = self.names();
        let g = match self {
            Instance::Clustered { cg, .. } => cg.graph(),
            Instance::Constrained { ci, .. } => &ci.graph,
        };
        let name = |v: VertexId| names.get(&v).cloned().unwrap_or_else(|| format!("v{}", v.0));
        let position: BTreeMap<EdgeId, usize> = g.edge_ids().zip(0..).collect();
        let mut file = InstanceFile {
            format: FORMAT_VERSION,
            kind: Kind::Clustered,
            vertices: g.vertices().map(name).collect(),
            edges: g.edges().map(|(_, e)| (name(e.u), name(e.v))).collect(),
            clusters: None,
            embedding: None,
            constraints: None,
            trivially_infeasible: false,
        };
        match self {
            Instance::Clustered { cg, embedding, trivially_infeasible, .. } => {
                file.clusters = Some(from_cluster(&cg.to_nested(), &name));
                file.embedding = embedding.as_ref().map(|r| {
                    r.iter()
                        .map(|(v, o)| {
                            let nbrs = o.as_slice().iter().map(|&e| name(g.edge(e).unwrap().other(v))).collect();
                            (name(v), nbrs)
                        })
                        .collect()
                });
                file.trivially_infeasible = *trivially_infeasible;
            }
            Instance::Constrained { ci, trivially_infeasible, .. } => {
                file.trivially_infeasible = *trivially_infeasible;
                file.kind = Kind::Constrained;
                file.constraints = Some(
                    ci.constraints
                        .iter()
                        .map(|(&v, c)| (name(v), from_constraint(c, &position)))
                        .collect(),
                );
            }
        }
        file
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance files always serialize")
    }
}

fn to_cluster(c: &ClusterFile, lookup: &dyn Fn(&str, &str) -> Result<VertexId>) -> Result<Cluster> {
    let mut vertices = Vec::new();
    let mut children = Vec::new();
    for item in &c.children {
        match item {
            ClusterItem::Vertex(n) => vertices.push(lookup("clusters", n)?),
            ClusterItem::Cluster(sub) => children.push(to_cluster(sub, lookup)?),
        }
    }
    Ok(Cluster::new(c.name.clone(), vertices, children))
}

fn from_cluster(c: &Cluster, name: &dyn Fn(VertexId) -> String) -> ClusterFile {
    let mut children: Vec<ClusterItem> = c.vertices.iter().map(|&v| ClusterItem::Vertex(name(v))).collect();
    children.extend(c.children.iter().map(|k| ClusterItem::Cluster(from_cluster(k, name))));
    ClusterFile { name: c.name.clone(), children }
}

fn to_rotation(
    g: &MultiGraph,
    emb: &BTreeMap<String, Vec<String>>,
    lookup: &dyn Fn(&str, &str) -> Result<VertexId>,
) -> Result<RotationSystem> {
    let mut r = RotationSystem::new();
    for (vname, nbrs) in emb {
        let v = lookup("embedding", vname)?;
        let mut order = Vec::new();
        for n in nbrs {
            let w = lookup("embedding", n)?;
            let e = g
                .incident(v)
                .iter()
                .copied()
                .find(|&e| g.edge(e).unwrap().other(v) == w)
                .ok_or_else(|| Error::Parse(format!("embedding.{vname}: '{n}' is not a neighbor")))?;
            order.push(e);
        }
        if order.len() != g.degree(v) || order.iter().collect::<BTreeSet<_>>().len() != order.len() {
            return schema(format!("embedding.{vname}: must list every neighbor once"));
        }
        r.set(v, CyclicOrder::new(order));
    }
    for v in g.vertices() {
        if r.get(v).is_none() && g.degree(v) > 0 {
            return schema(format!("embedding: no rotation for vertex {}", v.0));
        }
    }
    Ok(r)
}

fn edge_ref(i: usize, m: usize) -> Result<EdgeId> {
    if i < m {
        Ok(EdgeId(i as u32))
    } else {
        schema(format!("edge index {i} out of range"))
    }
}

fn edge_set(xs: &[usize], m: usize) -> Result<BTreeSet<EdgeId>> {
    xs.iter().map(|&i| edge_ref(i, m)).collect()
}

fn edge_order(xs: &[usize], m: usize) -> Result<CyclicOrder<EdgeId>> {
    Ok(CyclicOrder::new(xs.iter().map(|&i| edge_ref(i, m)).collect::<Result<_>>()?))
}

fn edge_tree(text: &str, m: usize) -> Result<PQTree<EdgeId>> {
    let t: PQTree<EdgeId> = text.parse()?;
    if t.labels().iter().any(|e| e.0 as usize >= m) {
        return schema("tree label out of range");
    }
    Ok(t)
}

fn to_constraint(c: &ConstraintFile, m: usize) -> Result<OrderConstraint> {
    match c {
        ConstraintFile::Partition { blocks } => {
            OrderConstraint::partition(blocks.iter().map(|b| edge_set(b, m)).collect::<Result<_>>()?)
        }
        ConstraintFile::Pq { tree } => Ok(OrderConstraint::PQ(edge_tree(tree, m)?)),
        ConstraintFile::Full { order } => Ok(OrderConstraint::Full(edge_order(order, m)?)),
        ConstraintFile::Partitioned { blocks } => OrderConstraint::partitioned(
            blocks
                .iter()
                .map(|b| match b {
                    InnerFile::Full(o) => edge_order(o, m).map(InnerConstraint::Full),
                    InnerFile::Pq(t) => edge_tree(t, m).map(InnerConstraint::PQ),
                })
                .collect::<Result<_>>()?,
        ),
        ConstraintFile::Explicit { ground, orders } => OrderConstraint::explicit(
            edge_set(ground, m)?,
            orders.iter().map(|o| edge_order(o, m)).collect::<Result<_>>()?,
        ),
    }
}

fn from_constraint(c: &OrderConstraint, position: &BTreeMap<EdgeId, usize>) -> ConstraintFile {
    let list = |o: &CyclicOrder<EdgeId>| o.as_slice().iter().map(|e| position[e]).collect::<Vec<_>>();
    let tree = |t: &PQTree<EdgeId>| {
        t.map_labels(|e| EdgeId(position[e] as u32))
            .expect("relabeling keeps labels distinct")
            .to_string()
    };
    match c {
        OrderConstraint::Partition(bs) => ConstraintFile::Partition {
            blocks: bs.iter().map(|b| b.iter().map(|e| position[e]).collect()).collect(),
        },
        OrderConstraint::PQ(t) => ConstraintFile::Pq { tree: tree(t) },
        OrderConstraint::Full(o) => ConstraintFile::Full { order: list(o) },
        OrderConstraint::Partitioned(bs) => ConstraintFile::Partitioned {
            blocks: bs
                .iter()
                .map(|b| match b {
                    InnerConstraint::Full(o) => InnerFile::Full(list(o)),
                    InnerConstraint::PQ(t) => InnerFile::Pq(tree(t)),
                })
                .collect(),
        },
        OrderConstraint::Explicit { ground, orders } => ConstraintFile::Explicit {
            ground: ground.iter().map(|e| position[e]).collect(),
            orders: orders.iter().map(list).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATH: &str = r#"{
  "format": 1,
  "kind": "clustered",
  "vertices": ["a", "b", "c", "d"],
  "edges": [["a", "b"], ["b", "c"], ["c", "d"]],
  "clusters": {"name": "root", "children": [
    {"name": "X", "children": ["a", "b"]},
    {"name": "Y", "children": ["c", "d"]}
  ]}
}"#;

    #[test]
    fn round_trip() {
        let inst = parse_instance(PATH).unwrap();
        let back: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        let orig: serde_json::Value = serde_json::from_str(PATH).unwrap();
        assert_eq!(back, orig);
    }

    #[test]
    fn schema_errors() {
        let twice = PATH.replace(r#"["c", "d"]}"#, r#"["c", "d", "a"]}"#);
        assert!(matches!(parse_instance(&twice), Err(Error::Parse(m)) if m.contains("twice")));
        let unknown = PATH.replace(r#"["c", "d"]]"#, r#"["c", "z"]]"#);
        assert!(matches!(parse_instance(&unknown), Err(Error::Parse(m)) if m.contains("'z'")));
        let broken = PATH.replace("\"kind\"", "\"kinds\"");
        assert!(matches!(parse_instance(&broken), Err(Error::Parse(m)) if m.contains("line")));
    }

    #[test]
    fn constrained_round_trip() {
        let text = r#"{
  "format": 1,
  "kind": "constrained",
  "vertices": ["u", "v"],
  "edges": [["u", "v"], ["u", "v"], ["u", "v"], ["u", "v"]],
  "constraints": {
    "u": {"type": "full", "order": [0, 1, 2, 3]},
    "v": {"type": "partitioned", "blocks": [{"pq": "P(e0, e1)"}, {"full": [2, 3]}]}
  }
}"#;
        let inst = parse_instance(text).unwrap();
        let back: serde_json::Value = serde_json::from_str(&inst.to_json()).unwrap();
        assert_eq!(back, serde_json::from_str::<serde_json::Value>(text).unwrap());
    }
}
