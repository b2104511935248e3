//! Independent reference deciders and instance families for integration
//! tests. Nothing here calls the library's planarity or cd-tree code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cdplan::{ClusteredGraph, EdgeId, MultiGraph, VertexId};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;

/// Plain copy of a graph: vertex list and `(id, u, v)` edges.
#[derive(Clone, Debug)]
pub struct Plain {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(EdgeId, VertexId, VertexId)>,
}

impl Plain {
    pub fn of(g: &MultiGraph) -> Self {
        Plain {
            vertices: g.vertices().collect(),
            edges: g.edges().map(|(id, e)| (id, e.u, e.v)).collect(),
        }
    }

    fn incident(&self, v: VertexId) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].1 == v || self.edges[i].2 == v).collect()
    }

    fn other(&self, i: usize, v: VertexId) -> VertexId {
        let (_, a, b) = self.edges[i];
        if a == v { b } else { a }
    }
}

/// Rotation: per vertex, edge indices (into `Plain::edges`) in cyclic order.
pub type Rot = BTreeMap<VertexId, Vec<usize>>;

/// A dart is an edge index traversed from the given vertex.
type Dart = (usize, VertexId);

fn trace_faces(p: &Plain, rot: &Rot) -> Vec<Vec<Dart>> {
    let mut seen = BTreeSet::new();
    let mut faces = Vec::new();
    for i in 0..p.edges.len() {
        let (_, a, b) = p.edges[i];
        for start in [(i, a), (i, b)] {
            if seen.contains(&start) {
                continue;
            }
            let mut face = Vec::new();
            let mut d = start;
            loop {
                seen.insert(d);
                face.push(d);
                let w = p.other(d.0, d.1);
                let r = &rot[&w];
                let k = r.iter().position(|&x| x == d.0).unwrap();
                d = (r[(k + 1) % r.len()], w);
                if d == start {
                    break;
                }
            }
            faces.push(face);
        }
    }
    faces
}

/// Every planar rotation system of a connected graph, by listing the full
/// product of per-vertex cyclic orders and counting faces. Graphs with
/// more than `3n - 6` edges are skipped outright.
pub fn planar_rotations(p: &Plain) -> Vec<Rot> {
    let n = p.vertices.len();
    if n >= 3 && p.edges.len() > 3 * n - 6 {
        return Vec::new();
    }
    let per_vertex: Vec<Vec<Vec<usize>>> = p
        .vertices
        .iter()
        .map(|&v| {
            let inc = p.incident(v);
            if inc.len() <= 2 {
                return vec![inc];
            }
            inc[1..]
                .iter()
                .copied()
                .permutations(inc.len() - 1)
                .map(|rest| std::iter::once(inc[0]).chain(rest).collect())
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for choice in per_vertex.iter().map(|c| c.iter()).multi_cartesian_product() {
        let rot: Rot = p.vertices.iter().copied().zip(choice.into_iter().cloned()).collect();
        let f = trace_faces(p, &rot).len() as i64;
        if p.vertices.len() as i64 - p.edges.len() as i64 + f == 2 {
            out.push(rot);
        }
    }
    if p.vertices.len() == 1 {
        out.push(p.vertices.iter().map(|&v| (v, Vec::new())).collect());
    }
    out
}

/// Crossing points of cluster boundaries on each edge, listed from `u` to
/// `v`: leave the clusters of `u` innermost first, then enter those of `v`
/// outermost first. Returns `(edge index, cluster index)` per point.
fn crossing_points(p: &Plain, clusters: &[BTreeSet<VertexId>]) -> Vec<Vec<usize>> {
    (0..p.edges.len())
        .map(|i| {
            let (_, u, v) = p.edges[i];
            let mut leave: Vec<usize> =
                (0..clusters.len()).filter(|&c| clusters[c].contains(&u) && !clusters[c].contains(&v)).collect();
            leave.sort_by_key(|&c| clusters[c].len());
            let mut enter: Vec<usize> =
                (0..clusters.len()).filter(|&c| clusters[c].contains(&v) && !clusters[c].contains(&u)).collect();
            enter.sort_by_key(|&c| std::cmp::Reverse(clusters[c].len()));
            leave.into_iter().chain(enter).collect()
        })
        .collect()
}

/// All non-crossing perfect matchings of `slots` (positions in a cyclic
/// sequence) that only pair equal labels.
fn matchings(slots: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    if slots.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let (p0, l0) = slots[0];
    for j in (1..slots.len()).step_by(2) {
        if slots[j].1 != l0 {
            continue;
        }
        let inner = matchings(&slots[1..j]);
        if inner.is_empty() {
            continue;
        }
        let outer = matchings(&slots[j + 1..]);
        for a in &inner {
            for b in &outer {
                let mut m = vec![(p0, slots[j].0)];
                m.extend_from_slice(a);
                m.extend_from_slice(b);
                out.push(m);
            }
        }
    }
    out
}

struct CurveSearch<'a> {
    face_options: Vec<Vec<Vec<(usize, usize)>>>,
    label: &'a [usize],
    per_cluster: Vec<usize>,
}

impl CurveSearch<'_> {
    fn find(parent: &[usize], mut x: usize) -> usize {
        while parent[x] != x {
            x = parent[x];
        }
        x
    }

    fn run(&self, face: usize, parent: &mut Vec<usize>, size: &mut Vec<usize>) -> bool {
        if face == self.face_options.len() {
            return true;
        }
        'options: for m in &self.face_options[face] {
            let saved = (parent.clone(), size.clone());
            for &(a, b) in m {
                let (ra, rb) = (Self::find(parent, a), Self::find(parent, b));
                if ra == rb {
                    // Closing a curve: it must carry every point of its cluster.
                    if size[ra] != self.per_cluster[self.label[a]] {
                        *parent = saved.0;
                        *size = saved.1;
                        continue 'options;
                    }
                } else {
                    parent[rb] = ra;
                    size[ra] += size[rb];
                }
            }
            if self.run(face + 1, parent, size) {
                return true;
            }
            *parent = saved.0;
            *size = saved.1;
        }
        false
    }
}

/// Whether the clusters can be drawn as disjoint simple closed curves that
/// cross exactly the cut edges, once each, in the given embedding.
pub fn curves_exist(p: &Plain, clusters: &[BTreeSet<VertexId>], rot: &Rot) -> bool {
    let points = crossing_points(p, clusters);
    let mut first = Vec::with_capacity(points.len());
    let mut label = Vec::new();
    for pts in &points {
        first.push(label.len());
        label.extend_from_slice(pts);
    }
    let mut per_cluster = vec![0; clusters.len()];
    for &l in &label {
        per_cluster[l] += 1;
    }
    if per_cluster.contains(&0) {
        return false;
    }
    let mut face_options = Vec::new();
    for face in trace_faces(p, rot) {
        let mut slots = Vec::new();
        for (e, from) in face {
            let k = points[e].len();
            let forward = p.edges[e].1 == from;
            let idx: Vec<usize> = if forward { (0..k).collect() } else { (0..k).rev().collect() };
            for j in idx {
                let point = first[e] + j;
                slots.push((point, label[point]));
            }
        }
        let ms = matchings(&slots);
        if ms.is_empty() {
            return false;
        }
        face_options.push(ms);
    }
    let search = CurveSearch { face_options, label: &label, per_cluster };
    let mut parent: Vec<usize> = (0..label.len()).collect();
    let mut size = vec![1; label.len()];
    search.run(0, &mut parent, &mut size)
}

/// Reference c-planarity: some planar rotation system admits the curves.
pub fn naive_c_planar(cg: &ClusteredGraph) -> bool {
    let p = Plain::of(cg.graph());
    let clusters = cg.proper_clusters();
    planar_rotations(&p).iter().any(|rot| curves_exist(&p, &clusters, rot))
}

/// Same, reusing a precomputed list of planar rotation systems.
pub fn naive_c_planar_among(p: &Plain, clusters: &[BTreeSet<VertexId>], rots: &[Rot]) -> bool {
    rots.iter().any(|rot| curves_exist(p, clusters, rot))
}

/// Reference c-planarity with the rotation system of `G` prescribed.
pub fn naive_c_planar_fixed(cg: &ClusteredGraph, r: &cdplan::RotationSystem) -> bool {
    let p = Plain::of(cg.graph());
    let index: BTreeMap<EdgeId, usize> = p.edges.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
    let rot: Rot = p
        .vertices
        .iter()
        .map(|&v| (v, r.get(v).map(|o| o.iter().map(|e| index[e]).collect()).unwrap_or_default()))
        .collect();
    let f = trace_faces(&p, &rot).len() as i64;
    if p.vertices.len() as i64 - p.edges.len() as i64 + f != 2 {
        return false;
    }
    curves_exist(&p, &cg.proper_clusters(), &rot)
}

/// Converts an oracle rotation to the library type.
pub fn to_rotation_system(p: &Plain, rot: &Rot) -> cdplan::RotationSystem {
    let mut r = cdplan::RotationSystem::new();
    for (&v, order) in rot {
        r.set(v, cdplan::CyclicOrder::new(order.iter().map(|&i| p.edges[i].0).collect()));
    }
    r
}

pub fn graph_from_mask(n: usize, mask: u32) -> MultiGraph {
    let mut g = MultiGraph::new();
    for v in 0..n as u32 {
        g.add_vertex(VertexId(v));
    }
    let mut id = 0;
    for (k, (u, v)) in (0..n as u32).tuple_combinations().enumerate() {
        if mask >> k & 1 == 1 {
            g.add_edge(EdgeId(id), VertexId(u), VertexId(v)).unwrap();
            id += 1;
        }
    }
    g
}

fn connected_mask(n: usize, mask: u32) -> bool {
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let mut reach = 1u32;
    loop {
        let mut next = reach;
        for (k, &(u, v)) in pairs.iter().enumerate() {
            if mask >> k & 1 == 1 && (reach >> u & 1 == 1 || reach >> v & 1 == 1) {
                next |= 1 << u | 1 << v;
            }
        }
        if next == reach {
            return reach == (1 << n) - 1;
        }
        reach = next;
    }
}

/// One representative per isomorphism class of connected simple graphs on
/// `n` vertices (the smallest edge mask among all relabelings).
pub fn connected_graphs(n: usize) -> Vec<MultiGraph> {
    let pairs: Vec<(usize, usize)> = (0..n).tuple_combinations().collect();
    let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let mut reps = BTreeSet::new();
    for mask in 0..1u32 << pairs.len() {
        if !connected_mask(n, mask) {
            continue;
        }
        let canon = perms
            .iter()
            .map(|pi| {
                let mut m = 0u32;
                for (k, &(u, v)) in pairs.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        let (a, b) = (pi[u].min(pi[v]), pi[u].max(pi[v]));
                        m |= 1 << index[&(a, b)];
                    }
                }
                m
            })
            .min()
            .unwrap();
        reps.insert(canon);
    }
    reps.into_iter().map(|m| graph_from_mask(n, m)).collect()
}

/// Every laminar family of proper clusters (sizes 2..n-1) over `n` vertices.
pub fn laminar_families(n: usize) -> Vec<Vec<BTreeSet<VertexId>>> {
    let candidates: Vec<BTreeSet<VertexId>> = (1u32..(1 << n) - 1)
        .filter(|m| m.count_ones() >= 2)
        .map(|m| (0..n as u32).filter(|&v| m >> v & 1 == 1).map(VertexId).collect())
        .collect();
    let mut out = Vec::new();
    fn extend(
        from: usize,
        candidates: &[BTreeSet<VertexId>],
        current: &mut Vec<BTreeSet<VertexId>>,
        out: &mut Vec<Vec<BTreeSet<VertexId>>>,
    ) {
        out.push(current.clone());
        for i in from..candidates.len() {
            let c = &candidates[i];
            if current.iter().all(|d| c.is_disjoint(d) || c.is_subset(d) || d.is_subset(c)) {
                current.push(c.clone());
                extend(i + 1, candidates, current, out);
                current.pop();
            }
        }
    }
    extend(0, &candidates, &mut Vec::new(), &mut out);
    out
}

/// Random connected simple graph with `n` vertices and up to `extra` edges
/// beyond a spanning tree.
pub fn random_connected(n: usize, extra: usize, rng: &mut impl Rng) -> MultiGraph {
    let mut pairs: BTreeSet<(u32, u32)> = BTreeSet::new();
    for v in 1..n as u32 {
        let u = rng.gen_range(0..v);
        pairs.insert((u, v));
    }
    let mut all: Vec<(u32, u32)> = (0..n as u32).tuple_combinations().collect();
    all.shuffle(rng);
    for p in all {
        if pairs.len() >= n - 1 + extra {
            break;
        }
        pairs.insert(p);
    }
    let mut g = MultiGraph::new();
    for v in 0..n as u32 {
        g.add_vertex(VertexId(v));
    }
    for (i, &(u, v)) in pairs.iter().enumerate() {
        g.add_edge(EdgeId(i as u32), VertexId(u), VertexId(v)).unwrap();
    }
    g
}

/// Random laminar family over the vertices of `g`.
pub fn random_laminar(g: &MultiGraph, count: usize, nested: bool, rng: &mut impl Rng) -> Vec<BTreeSet<VertexId>> {
    let vs: Vec<VertexId> = g.vertices().collect();
    let n = vs.len();
    let mut family: Vec<BTreeSet<VertexId>> = Vec::new();
    for _ in 0..count * 20 {
        if family.len() == count || n < 3 {
            break;
        }
        let k = rng.gen_range(2..n);
        let c: BTreeSet<VertexId> = vs.choose_multiple(rng, k).copied().collect();
        let ok = family.iter().all(|d| {
            c.is_disjoint(d) || (nested && (c.is_subset(d) || d.is_subset(&c)))
        }) && !family.contains(&c);
        if ok {
            family.push(c);
        }
    }
    family
}

/// Largest number of edges leaving a single cluster.
pub fn max_cut(g: &MultiGraph, family: &[BTreeSet<VertexId>]) -> usize {
    family
        .iter()
        .map(|c| g.edges().filter(|(_, e)| c.contains(&e.u) != c.contains(&e.v)).count())
        .max()
        .unwrap_or(0)
}
