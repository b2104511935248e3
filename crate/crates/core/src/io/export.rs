//! DOT and JSON views of cd-trees and witnesses.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde_json::{json, Value};

use crate::cdtree::CdTree;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, MultiGraph, VertexId};
use crate::order::CyclicOrder;
use crate::planarity::RotationSystem;
use crate::solver::Witness;

fn vertex_name(ct: &CdTree, node: usize, v: VertexId, names: &BTreeMap<VertexId, String>) -> String {
    match ct.node(node).virtuals.get(&v) {
        Some(link) => format!("<{}>", ct.node(link.neighbor).name),
        None => names.get(&v).cloned().unwrap_or_else(|| v.to_string()),
    }
}

fn skeleton_json(ct: &CdTree, i: usize, names: &BTreeMap<VertexId, String>) -> Value {
    let sk = &ct.node(i).skeleton;
    let vertices: Vec<String> = sk.vertices().map(|v| vertex_name(ct, i, v, names)).collect();
    let edges: Vec<Value> = sk
        .edges()
        .map(|(id, e)| json!({"id": id.0, "ends": [vertex_name(ct, i, e.u, names), vertex_name(ct, i, e.v, names)]}))
        .collect();
    json!({"vertices": vertices, "edges": edges})
}

/// The cd-tree as JSON: one entry per node with its skeleton.
pub fn cdtree_json(ct: &CdTree, names: &BTreeMap<VertexId, String>) -> Value {
    let nodes: Vec<Value> = (0..ct.len())
        .map(|i| {
            json!({
                "index": i,
                "name": ct.node(i).name,
                "parent": ct.parent(i),
                "children": ct.children(i),
                "skeleton": skeleton_json(ct, i, names),
            })
        })
        .collect();
    json!({"root": ct.root(), "size_c": ct.size_c(), "total_cut_size": ct.total_cut_size(), "nodes": nodes})
}

/// The cd-tree in Graphviz DOT: one subgraph per skeleton, dashed edges
/// joining twin virtual vertices.
pub fn cdtree_dot(ct: &CdTree, names: &BTreeMap<VertexId, String>) -> String {
    let mut out = String::from("graph cdtree {\n  node [shape=circle];\n");
    let id = |i: usize, v: VertexId| format!("n{i}_{}", v.0);
    for i in 0..ct.len() {
        let node = ct.node(i);
        let _ = writeln!(out, "  subgraph cluster_{i} {{\n    label=\"{}\";", escape(&node.name));
        for v in node.skeleton.vertices() {
            let shape = if node.is_virtual(v) { ", shape=box" } else { "" };
            let _ = writeln!(out, "    {} [label=\"{}\"{shape}];", id(i, v), escape(&vertex_name(ct, i, v, names)));
        }
        for (e, edge) in node.skeleton.edges() {
            let _ = writeln!(out, "    {} -- {} [label=\"{e}\"];", id(i, edge.u), id(i, edge.v));
        }
        out.push_str("  }\n");
    }
    for i in 0..ct.len() {
        if let (Some(p), Some(tau)) = (ct.parent(i), ct.parent_vertex(i)) {
            let nu = ct.virtual_towards(p, i).expect("parent holds a virtual vertex for each child");
            let _ = writeln!(out, "  {} -- {} [style=dashed];", id(p, nu), id(i, tau));
        }
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn rotation_json(g: &MultiGraph, w: &Witness, i: usize, ct: &CdTree, names: &BTreeMap<VertexId, String>) -> Value {
    let entries: Vec<Value> = w.rotations[i]
        .iter()
        .map(|(v, o)| {
            let order: Vec<Value> = o
                .as_slice()
                .iter()
                .map(|&e| {
                    let far = g.edge(e).map(|ed| vertex_name(ct, i, ed.other(v), names));
                    json!({"edge": e.0, "to": far})
                })
                .collect();
            json!({"vertex": v.0, "name": vertex_name(ct, i, v, names), "order": order})
        })
        .collect();
    Value::Array(entries)
}

/// Witness rotations per cd-tree node plus the shared order of each pair of
/// twins, as seen from the child.
pub fn witness_json(ct: &CdTree, w: &Witness, names: &BTreeMap<VertexId, String>) -> Value {
    let nodes: Vec<Value> = (0..ct.len().min(w.rotations.len()))
        .map(|i| json!({"name": ct.node(i).name, "rotation": rotation_json(&ct.node(i).skeleton, w, i, ct, names)}))
        .collect();
    let twins: Vec<Value> = (0..ct.len().min(w.rotations.len()))
        .filter_map(|i| {
            let p = ct.parent(i)?;
            let order = w.rotations[i].get(ct.parent_vertex(i)?)?;
            let edges: Vec<u32> = order.as_slice().iter().map(|e| e.0).collect();
            Some(json!({"child": ct.node(i).name, "parent": ct.node(p).name, "order": edges}))
        })
        .collect();
    json!({"nodes": nodes, "twins": twins})
}

/// Reads back the output of [`witness_json`] for the same cd-tree.
pub fn witness_from_json(ct: &CdTree, v: &Value) -> Result<Witness> {
    let bad = |m: &str| Error::Parse(format!("witness: {m}"));
    let nodes = v["nodes"].as_array().ok_or_else(|| bad("missing nodes"))?;
    if nodes.len() != ct.len() {
        return Err(bad("node count does not match the cd-tree"));
    }
    let mut rotations = Vec::new();
    for node in nodes {
        let mut rot = RotationSystem::new();
        for entry in node["rotation"].as_array().ok_or_else(|| bad("missing rotation"))? {
            let id = |x: &Value| x.as_u64().and_then(|x| u32::try_from(x).ok());
            let vertex = id(&entry["vertex"]).ok_or_else(|| bad("bad vertex id"))?;
            let order = entry["order"]
                .as_array()
                .ok_or_else(|| bad("missing order"))?
                .iter()
                .map(|e| id(&e["edge"]).map(EdgeId).ok_or_else(|| bad("bad edge id")))
                .collect::<Result<Vec<_>>>()?;
            rot.set(VertexId(vertex), CyclicOrder::new(order));
        }
        rotations.push(rot);
    }
    Ok(Witness { rotations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdtree::ClusteredGraph;
    use crate::graph::MultiGraph;
    use crate::io::format::default_names;
    use crate::solver::test_exact;
    use std::collections::BTreeSet;

    fn path() -> ClusteredGraph {
        let g = MultiGraph::from_pairs(&[(0, 1), (1, 2), (2, 3)]).unwrap();
        let x: BTreeSet<VertexId> = [0, 1].map(VertexId).into();
        ClusteredGraph::from_sets(g, &[x]).unwrap()
    }

    #[test]
    fn dot_mentions_every_skeleton() {
        let cg = path();
        let ct = CdTree::build(&cg).unwrap();
        let dot = cdtree_dot(&ct, &default_names(cg.graph()));
        assert!(dot.starts_with("graph cdtree {"));
        assert_eq!(dot.matches("subgraph cluster_").count(), ct.len());
        assert_eq!(dot.matches("style=dashed").count(), ct.len() - 1);
    }

    #[test]
    fn json_shapes() {
        let cg = path();
        let ct = CdTree::build(&cg).unwrap();
        let names = default_names(cg.graph());
        let v = cdtree_json(&ct, &names);
        assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
        let w = test_exact(&cg).unwrap().witness.unwrap();
        let wj = witness_json(&ct, &w, &names);
        assert_eq!(wj["nodes"].as_array().unwrap().len(), 2);
        assert_eq!(wj["twins"].as_array().unwrap().len(), 1);
        let back = witness_from_json(&ct, &wj).unwrap();
        assert_eq!(back, w);
        crate::solver::certify(&ct, &back).unwrap().check(&ct).unwrap();
    }
}
