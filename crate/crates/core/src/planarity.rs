//! Rotation systems, face tracing, planarity testing and embedding trees.
//!
//! Rotations are clockwise. Face tracing follows one fixed rule: after
//! arriving at `w` along edge `e`, leave `w` along the successor of `e` in
//! the rotation of `w`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{invalid, precondition, Error, Result};
use crate::graph::{blocks, components, EdgeId, MultiGraph, VertexId};
use crate::order::CyclicOrder;
use crate::pqtree::{PQNode, PQTree};

/// Default bound on search steps of exhaustive embedding enumerations.
pub const DEFAULT_CAPACITY: u64 = 3_628_800;

/// Search-step bound: `CDPLAN_CAPACITY` if set, else [`DEFAULT_CAPACITY`].
pub fn search_capacity() -> u64 {
    std::env::var("CDPLAN_CAPACITY")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_CAPACITY)
}

/// A clockwise cyclic order of incident edges for every vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RotationSystem {
    orders: BTreeMap<VertexId, CyclicOrder<EdgeId>>,
}

impl RotationSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: VertexId, order: CyclicOrder<EdgeId>) {
        self.orders.insert(v, order);
    }

    pub fn get(&self, v: VertexId) -> Option<&CyclicOrder<EdgeId>> {
        self.orders.get(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &CyclicOrder<EdgeId>)> + '_ {
        self.orders.iter().map(|(&v, o)| (v, o))
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// The mirror image: every rotation reversed.
    pub fn mirrored(&self) -> Self {
        Self {
            orders: self.orders.iter().map(|(&v, o)| (v, o.reversed())).collect(),
        }
    }

    /// Rotation system induced on a subgraph of the embedded graph.
    pub fn restrict_to(&self, h: &MultiGraph) -> Self {
        let mut out = Self::new();
        for v in h.vertices() {
            let keep: BTreeSet<EdgeId> = h.incident(v).iter().copied().collect();
            let order = self
                .orders
                .get(&v)
                .map(|o| o.restrict(&keep))
                .unwrap_or_else(|| CyclicOrder::new(Vec::new()));
            out.set(v, order);
        }
        out
    }

    fn check_total(&self, g: &MultiGraph) -> Result<()> {
        for v in g.vertices() {
            let incident: BTreeSet<EdgeId> = g.incident(v).iter().copied().collect();
            match self.orders.get(&v) {
                Some(o) if o.len() == incident.len() && o.labels() == incident => {}
                Some(_) => return invalid(format!("rotation at {v} does not match its incident edges")),
                None if incident.is_empty() => {}
                None => return invalid(format!("no rotation given for {v}")),
            }
        }
        Ok(())
    }
}

/// A directed traversal of an edge: `(edge, tail)`.
pub type Dart = (EdgeId, VertexId);

/// Traces all faces; each face is its cyclic sequence of darts.
pub fn faces(g: &MultiGraph, r: &RotationSystem) -> Result<Vec<Vec<Dart>>> {
    r.check_total(g)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (e, edge) in g.edges() {
        for tail in [edge.u, edge.v] {
            if seen.contains(&(e, tail)) {
                continue;
            }
            let mut face = Vec::new();
            let mut dart = (e, tail);
            while seen.insert(dart) {
                face.push(dart);
                dart = next_dart(g, r, dart);
            }
            out.push(face);
        }
    }
    Ok(out)
}

fn next_dart(g: &MultiGraph, r: &RotationSystem, (e, tail): Dart) -> Dart {
    let head = g.edge(e).unwrap().other(tail);
    let next = *r.orders[&head].successor(&e).unwrap();
    (next, head)
}

/// Euler check per connected component: `V - E + F = 2`.
pub fn rotation_is_planar(g: &MultiGraph, r: &RotationSystem) -> Result<bool> {
    let fs = faces(g, r)?;
    let comps = components(g);
    let face_count = fs.len() + g.vertices().filter(|&v| g.degree(v) == 0).count();
    let euler = g.num_vertices() as i64 - g.num_edges() as i64 + face_count as i64;
    Ok(euler == 2 * comps.len() as i64)
}

/// One end of an edge in a [`HalfEdgeEmbedding`]; `end` 0 sits at the
/// first endpoint, 1 at the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfEdge {
    pub edge: usize,
    pub end: u8,
}

/// Embedded multigraph that may contain loops: a loop contributes two
/// half-edges to the rotation of its vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HalfEdgeEmbedding {
    pub ends: Vec<(VertexId, VertexId)>,
    pub rotation: BTreeMap<VertexId, Vec<HalfEdge>>,
}

impl HalfEdgeEmbedding {
    fn vertex_of(&self, h: HalfEdge) -> VertexId {
        let (a, b) = self.ends[h.edge];
        if h.end == 0 {
            a
        } else {
            b
        }
    }

    fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (&v, rot) in &self.rotation {
            for &h in rot {
                if h.edge >= self.ends.len() || h.end > 1 || self.vertex_of(h) != v || !seen.insert(h) {
                    return invalid(format!("half-edge {h:?} misplaced in the rotation of {v}"));
                }
            }
        }
        if seen.len() != 2 * self.ends.len() {
            return invalid("rotation does not cover every half-edge");
        }
        Ok(())
    }

    /// Number of faces, by the same tracing rule as [`faces`].
    pub fn face_count(&self) -> Result<usize> {
        self.check()?;
        let mut succ = BTreeMap::new();
        for rot in self.rotation.values() {
            for i in 0..rot.len() {
                succ.insert(rot[i], rot[(i + 1) % rot.len()]);
            }
        }
        let mut seen = BTreeSet::new();
        let mut count = 0;
        for &start in succ.keys() {
            if seen.contains(&start) {
                continue;
            }
            count += 1;
            let mut h = start;
            while seen.insert(h) {
                h = succ[&HalfEdge { edge: h.edge, end: 1 - h.end }];
            }
        }
        Ok(count)
    }

    /// Euler check per connected component, isolated vertices included.
    pub fn is_planar(&self) -> Result<bool> {
        let mut g = MultiGraph::new();
        for &v in self.rotation.keys() {
            g.add_vertex(v);
        }
        for (i, &(a, b)) in self.ends.iter().enumerate() {
            g.add_vertex(a);
            g.add_vertex(b);
            if a != b {
                g.add_edge(EdgeId(i as u32), a, b)?;
            }
        }
        let isolated = g.vertices().filter(|v| self.rotation.get(v).is_none_or(Vec::is_empty)).count();
        let f = self.face_count()? + isolated;
        let euler = g.num_vertices() as i64 - self.ends.len() as i64 + f as i64;
        Ok(euler == 2 * components(&g).len() as i64)
    }
}

/// What the enumeration should do after a complete rotation system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visit {
    Continue,
    Stop,
    /// Abandon every completion of the current rotation of this vertex
    /// and continue with its next rotation.
    Unwind(VertexId),
}

/// Exhaustive enumeration of planar rotation systems.
///
/// Edges are inserted one at a time at every possible position of the
/// partial rotations of their endpoints; a partial embedding is kept only
/// while it stays planar, so every planar rotation system is produced
/// exactly once. `accept` is consulted as soon as a vertex has received
/// all its edges and prunes the branch when it returns false.
pub struct PlanarEnumerator<'a> {
    g: &'a MultiGraph,
    order: Vec<EdgeId>,
    target_degree: BTreeMap<VertexId, usize>,
    limit: u64,
    steps: u64,
}

impl<'a> PlanarEnumerator<'a> {
    /// `first` lists vertices whose edges should be inserted early.
    pub fn new(g: &'a MultiGraph, first: &[VertexId], limit: u64) -> Self {
        let order = insertion_order(g, first);
        let target_degree = g.vertices().map(|v| (v, g.degree(v))).collect();
        Self { g, order, target_degree, limit, steps: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn run(
        &mut self,
        accept: &mut dyn FnMut(VertexId, &CyclicOrder<EdgeId>) -> bool,
        visit: &mut dyn FnMut(&RotationSystem) -> Visit,
    ) -> Result<()> {
        for v in self.g.vertices() {
            if self.g.degree(v) == 0 && !accept(v, &CyclicOrder::new(Vec::new())) {
                return Ok(());
            }
        }
        let mut state = Partial {
            rot: self.g.vertices().map(|v| (v, Vec::new())).collect(),
        };
        self.search(0, &mut state, accept, visit)?;
        Ok(())
    }

    fn search(
        &mut self,
        i: usize,
        state: &mut Partial,
        accept: &mut dyn FnMut(VertexId, &CyclicOrder<EdgeId>) -> bool,
        visit: &mut dyn FnMut(&RotationSystem) -> Visit,
    ) -> Result<Visit> {
        if i == self.order.len() {
            let mut r = RotationSystem::new();
            for (&v, seq) in &state.rot {
                r.set(v, CyclicOrder::new(seq.clone()));
            }
            return Ok(visit(&r));
        }
        let e = self.order[i];
        let edge = *self.g.edge(e).unwrap();
        let (u, w) = (edge.u, edge.v);
        let slots_u = state.rot[&u].len().max(1);
        let slots_w = state.rot[&w].len().max(1);
        for pu in 0..slots_u {
            for pw in 0..slots_w {
                self.steps += 1;
                if self.steps > self.limit {
                    return Err(Error::Capacity {
                        what: format!(
                            "planar embedding search over {} edges",
                            self.g.num_edges()
                        ),
                        limit: self.limit,
                    });
                }
                if !state.insertion_is_planar(self.g, e, u, pu, w, pw) {
                    continue;
                }
                let iu = if state.rot[&u].is_empty() { 0 } else { pu + 1 };
                state.rot.get_mut(&u).unwrap().insert(iu, e);
                let iw = if state.rot[&w].is_empty() { 0 } else { pw + 1 };
                state.rot.get_mut(&w).unwrap().insert(iw, e);

                let completed: Vec<VertexId> =
                    [u, w].into_iter().filter(|x| state.rot[x].len() == self.target_degree[x]).collect();
                let ok = completed
                    .iter()
                    .all(|&x| accept(x, &CyclicOrder::new(state.rot[&x].clone())));
                let flow = if ok {
                    self.search(i + 1, state, accept, visit)?
                } else {
                    Visit::Continue
                };

                state.rot.get_mut(&w).unwrap().retain(|&x| x != e);
                state.rot.get_mut(&u).unwrap().retain(|&x| x != e);
                match flow {
                    Visit::Continue => {}
                    Visit::Unwind(x) if completed.contains(&x) => {}
                    other => return Ok(other),
                }
            }
        }
        Ok(Visit::Continue)
    }
}

/// Edges grouped by vertex in BFS order, so that vertices complete one
/// after another and the inserted prefix stays connected.
fn insertion_order(g: &MultiGraph, first: &[VertexId]) -> Vec<EdgeId> {
    let mut vertex_order = Vec::new();
    let mut seen = BTreeSet::new();
    let starts = first.iter().copied().filter(|v| g.contains_vertex(*v)).chain(g.vertices());
    for s in starts {
        if !seen.insert(s) {
            continue;
        }
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            vertex_order.push(v);
            // Preferred vertices jump the queue once discovered.
            let mut next: Vec<VertexId> = g.neighbors(v).filter(|w| !seen.contains(w)).collect();
            next.sort_by_key(|w| (!first.contains(w), *w));
            next.dedup();
            for w in next {
                if seen.insert(w) {
                    if first.contains(&w) {
                        queue.push_front(w);
                    } else {
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    let mut added = BTreeSet::new();
    let mut out = Vec::new();
    for v in vertex_order {
        for &e in g.incident(v) {
            if added.insert(e) {
                out.push(e);
            }
        }
    }
    out
}

struct Partial {
    rot: BTreeMap<VertexId, Vec<EdgeId>>,
}

impl Partial {
    /// Would inserting `e` after slot `pu` at `u` and slot `pw` at `w` keep
    /// the partial embedding planar? That holds iff the endpoints lie in
    /// different components or the two corners share a face.
    fn insertion_is_planar(
        &self,
        g: &MultiGraph,
        _e: EdgeId,
        u: VertexId,
        pu: usize,
        w: VertexId,
        pw: usize,
    ) -> bool {
        let (ru, rw) = (&self.rot[&u], &self.rot[&w]);
        if ru.is_empty() || rw.is_empty() {
            return true;
        }
        // Corner after slot p is entered by the dart leaving along rot[p+1].
        let start = (ru[(pu + 1) % ru.len()], u);
        let target = (rw[(pw + 1) % rw.len()], w);
        let mut dart = start;
        loop {
            if dart == target {
                return true;
            }
            dart = self.next(g, dart);
            if dart == start {
                break;
            }
        }
        !self.connected(g, u, w)
    }

    fn next(&self, g: &MultiGraph, (e, tail): Dart) -> Dart {
        let head = g.edge(e).unwrap().other(tail);
        let r = &self.rot[&head];
        let i = r.iter().position(|&x| x == e).unwrap();
        (r[(i + 1) % r.len()], head)
    }

    fn connected(&self, g: &MultiGraph, u: VertexId, w: VertexId) -> bool {
        let mut seen = BTreeSet::from([u]);
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if x == w {
                return true;
            }
            for &e in &self.rot[&x] {
                let y = g.edge(e).unwrap().other(x);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        false
    }
}

/// Planarity test returning a witness rotation system.
///
/// Blocks are embedded independently with the Demoucron-Malgrange-Pertuiset
/// face-splitting method on their simple underlying graph; parallel edges
/// are then fanned in next to their representative and block rotations are
/// concatenated at cutvertices.
pub fn is_planar(g: &MultiGraph) -> Option<RotationSystem> {
    let mut seqs: BTreeMap<VertexId, Vec<EdgeId>> = g.vertices().map(|v| (v, Vec::new())).collect();
    for block in blocks(g).blocks {
        let local = embed_block(g, &block.edges)?;
        for (v, seq) in local {
            seqs.get_mut(&v).unwrap().extend(seq);
        }
    }
    let mut r = RotationSystem::new();
    for (v, seq) in seqs {
        r.set(v, CyclicOrder::new(seq));
    }
    debug_assert!(rotation_is_planar(g, &r).unwrap());
    Some(r)
}

fn embed_block(g: &MultiGraph, edges: &BTreeSet<EdgeId>) -> Option<BTreeMap<VertexId, Vec<EdgeId>>> {
    // Representative edge per vertex pair; the rest are parallel copies.
    let mut bundles: BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = BTreeMap::new();
    for &e in edges {
        let edge = g.edge(e).unwrap();
        bundles
            .entry((edge.u.min(edge.v), edge.u.max(edge.v)))
            .or_default()
            .push(e);
    }
    let simple_rot: BTreeMap<VertexId, Vec<(VertexId, VertexId)>> = if bundles.len() == 1 {
        let &(x, y) = bundles.keys().next().unwrap();
        BTreeMap::from([(x, vec![(x, y)]), (y, vec![(x, y)])])
    } else {
        dmp_embed(&bundles.keys().copied().collect())?
    };
    let mut out = BTreeMap::new();
    for (v, pairs) in simple_rot {
        let mut seq = Vec::new();
        for pair in pairs {
            let bundle = &bundles[&pair];
            if v == pair.0 {
                seq.extend(bundle.iter().copied());
            } else {
                seq.extend(bundle[1..].iter().rev().copied());
                seq.push(bundle[0]);
            }
        }
        out.insert(v, seq);
    }
    Some(out)
}

type Pair = (VertexId, VertexId);

fn key(a: VertexId, b: VertexId) -> Pair {
    (a.min(b), a.max(b))
}

/// Face-splitting embedding of a simple biconnected graph with at least
/// three vertices; returns rotations as sequences of vertex pairs.
fn dmp_embed(edge_set: &BTreeSet<Pair>) -> Option<BTreeMap<VertexId, Vec<Pair>>> {
    let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
    for &(a, b) in edge_set {
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default().insert(a);
    }
    let cycle = find_cycle(&adj)?;
    let mut embedded_v: BTreeSet<VertexId> = cycle.iter().copied().collect();
    let mut embedded_e: BTreeSet<Pair> = BTreeSet::new();
    for i in 0..cycle.len() {
        embedded_e.insert(key(cycle[i], cycle[(i + 1) % cycle.len()]));
    }
    let mut reversed = cycle.clone();
    reversed.reverse();
    let mut faces: Vec<Vec<VertexId>> = vec![cycle, reversed];

    loop {
        let fragments = fragments(&adj, &embedded_v, &embedded_e);
        if fragments.is_empty() {
            break;
        }
        let mut choice: Option<(usize, usize)> = None;
        for (fi, frag) in fragments.iter().enumerate() {
            let admissible: Vec<usize> = faces
                .iter()
                .enumerate()
                .filter(|(_, f)| frag.attachments.iter().all(|a| f.contains(a)))
                .map(|(i, _)| i)
                .collect();
            match admissible.len() {
                0 => return None,
                1 => {
                    choice = Some((fi, admissible[0]));
                    break;
                }
                _ => {
                    if choice.is_none() {
                        choice = Some((fi, admissible[0]));
                    }
                }
            }
        }
        let (fi, face_idx) = choice.unwrap();
        let path = fragment_path(&adj, &embedded_v, &fragments[fi]);
        let face = faces.swap_remove(face_idx);
        let (a, b) = (path[0], *path.last().unwrap());
        let ia = face.iter().position(|&x| x == a).unwrap();
        let ib = face.iter().position(|&x| x == b).unwrap();
        let n = face.len();
        let interior = &path[1..path.len() - 1];

        let mut f1: Vec<VertexId> = (0..=((ib + n - ia) % n)).map(|k| face[(ia + k) % n]).collect();
        f1.extend(interior.iter().rev());
        let mut f2: Vec<VertexId> = (0..=((ia + n - ib) % n)).map(|k| face[(ib + k) % n]).collect();
        f2.extend(interior.iter());
        faces.push(f1);
        faces.push(f2);

        for w in path.windows(2) {
            embedded_e.insert(key(w[0], w[1]));
        }
        embedded_v.extend(interior.iter().copied());
    }

    // succ_y(yx) = yz for every traced triple x -> y -> z.
    let mut succ: BTreeMap<(VertexId, VertexId), VertexId> = BTreeMap::new();
    for f in &faces {
        let n = f.len();
        for i in 0..n {
            let (x, y, z) = (f[i], f[(i + 1) % n], f[(i + 2) % n]);
            succ.insert((y, x), z);
        }
    }
    let mut out = BTreeMap::new();
    for (&v, nbrs) in &adj {
        let first = *nbrs.iter().next().unwrap();
        let mut seq = vec![key(v, first)];
        let mut cur = first;
        loop {
            let nxt = succ[&(v, cur)];
            if nxt == first {
                break;
            }
            seq.push(key(v, nxt));
            cur = nxt;
        }
        out.insert(v, seq);
    }
    Some(out)
}

fn find_cycle(adj: &BTreeMap<VertexId, BTreeSet<VertexId>>) -> Option<Vec<VertexId>> {
    let start = *adj.keys().next()?;
    let mut parent: BTreeMap<VertexId, Option<VertexId>> = BTreeMap::from([(start, None)]);
    let mut depth: BTreeMap<VertexId, usize> = BTreeMap::from([(start, 0)]);
    let mut stack = vec![(start, adj[&start].iter().copied().collect::<Vec<_>>())];
    while let Some((v, pending)) = stack.last_mut() {
        let v = *v;
        let Some(w) = pending.pop() else {
            stack.pop();
            continue;
        };
        if Some(w) == parent[&v] {
            continue;
        }
        if depth.contains_key(&w) {
            if depth[&w] < depth[&v] {
                let mut cyc = vec![v];
                let mut x = v;
                while x != w {
                    x = parent[&x].unwrap();
                    cyc.push(x);
                }
                return Some(cyc);
            }
            continue;
        }
        parent.insert(w, Some(v));
        depth.insert(w, depth[&v] + 1);
        stack.push((w, adj[&w].iter().copied().collect()));
    }
    None
}

struct Fragment {
    /// Unembedded vertices (empty for a chord).
    inner: BTreeSet<VertexId>,
    attachments: BTreeSet<VertexId>,
    chord: Option<Pair>,
}

fn fragments(
    adj: &BTreeMap<VertexId, BTreeSet<VertexId>>,
    embedded_v: &BTreeSet<VertexId>,
    embedded_e: &BTreeSet<Pair>,
) -> Vec<Fragment> {
    let mut out = Vec::new();
    for (&a, nbrs) in adj {
        for &b in nbrs {
            if a < b && embedded_v.contains(&a) && embedded_v.contains(&b) && !embedded_e.contains(&(a, b)) {
                out.push(Fragment {
                    inner: BTreeSet::new(),
                    attachments: BTreeSet::from([a, b]),
                    chord: Some((a, b)),
                });
            }
        }
    }
    let mut seen = BTreeSet::new();
    for &s in adj.keys() {
        if embedded_v.contains(&s) || !seen.insert(s) {
            continue;
        }
        let mut inner = BTreeSet::from([s]);
        let mut attachments = BTreeSet::new();
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[&x] {
                if embedded_v.contains(&y) {
                    attachments.insert(y);
                } else if seen.insert(y) {
                    inner.insert(y);
                    queue.push_back(y);
                }
            }
        }
        out.push(Fragment { inner, attachments, chord: None });
    }
    out
}

/// A path through the fragment between two distinct attachment vertices.
fn fragment_path(
    adj: &BTreeMap<VertexId, BTreeSet<VertexId>>,
    embedded_v: &BTreeSet<VertexId>,
    frag: &Fragment,
) -> Vec<VertexId> {
    if let Some((a, b)) = frag.chord {
        return vec![a, b];
    }
    let a = *frag.attachments.iter().next().unwrap();
    let x = *adj[&a].iter().find(|y| frag.inner.contains(y)).unwrap();
    let mut parent: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut seen = BTreeSet::from([x]);
    let mut queue = VecDeque::from([x]);
    while let Some(y) = queue.pop_front() {
        if let Some(&b) = adj[&y].iter().find(|&&z| z != a && embedded_v.contains(&z)) {
            let mut path = vec![b, y];
            let mut cur = y;
            while let Some(&p) = parent.get(&cur) {
                path.push(p);
                cur = p;
            }
            path.push(a);
            path.reverse();
            return path;
        }
        for &z in &adj[&y] {
            if frag.inner.contains(&z) && seen.insert(z) {
                parent.insert(z, y);
                queue.push_back(z);
            }
        }
    }
    unreachable!("fragment of a biconnected graph has two attachments")
}

/// PQ-tree of the edge orderings of `v` over all planar embeddings of `g`.
///
/// Only the block containing `v` matters. Inside it, a separation pair
/// `{v, x}` splits the edges at `v` into freely arrangeable groups (a
/// P-node over recursively computed subtrees); without such a pair the
/// edges of `v` belong to a rigid part and their order is fixed up to
/// reversal (a Q-node).
pub fn embedding_tree(g: &MultiGraph, v: VertexId) -> Result<PQTree<EdgeId>> {
    if !g.contains_vertex(v) {
        return invalid(format!("{v} is not a vertex of the graph"));
    }
    if g.degree(v) == 0 {
        return invalid(format!("{v} has no incident edges"));
    }
    let decomposition = blocks(g);
    if decomposition.cutvertices.contains(&v) {
        return precondition(format!("{v} is a cutvertex"));
    }
    if is_planar(g).is_none() {
        return precondition("graph is not planar");
    }
    let block = decomposition.blocks_at(v).next().unwrap();
    let b = g.edge_subgraph(&block.edges);
    let mut next_id = g.fresh_edge_id().0;
    block_tree(&b, v, &mut next_id)
}

fn block_tree(b: &MultiGraph, v: VertexId, next_id: &mut u32) -> Result<PQTree<EdgeId>> {
    let at_v: BTreeSet<EdgeId> = b.incident(v).iter().copied().collect();
    if at_v.len() <= 2 || b.num_vertices() == 2 {
        return PQTree::universal(&at_v);
    }
    for x in b.vertices().filter(|&x| x != v) {
        let groups = split_components(b, v, x);
        let useful = groups.len() >= 3 || (groups.len() == 2 && groups.iter().all(|g| g.len() >= 2));
        if !useful {
            continue;
        }
        let mut children = Vec::new();
        for group in groups {
            if group.len() == 1 {
                children.push(PQNode::Leaf(*group.iter().next().unwrap()));
                continue;
            }
            let mut part = b.edge_subgraph(&group);
            let virtual_edge = EdgeId(*next_id);
            *next_id += 1;
            part.add_edge(virtual_edge, v, x)?;
            let sub = block_tree(&part, v, next_id)?;
            children.push(sub.hang_from(&virtual_edge).expect("subtree has several leaves"));
        }
        return PQTree::new(PQNode::P(children));
    }
    let witness = is_planar(b).ok_or_else(|| Error::Precondition("graph is not planar".into()))?;
    PQTree::q_node(witness.get(v).unwrap().as_slice())
}

/// Edge sets of the split components of `{v, x}`: one per component of
/// `b - {v, x}` plus one per direct `v`-`x` edge.
fn split_components(b: &MultiGraph, v: VertexId, x: VertexId) -> Vec<BTreeSet<EdgeId>> {
    let rest: BTreeSet<VertexId> = b.vertices().filter(|&y| y != v && y != x).collect();
    let inner = b.induced_subgraph(&rest);
    let mut out = Vec::new();
    for comp in components(&inner) {
        let edges: BTreeSet<EdgeId> = b
            .edges()
            .filter(|(_, e)| comp.contains(&e.u) || comp.contains(&e.v))
            .map(|(id, _)| id)
            .collect();
        out.push(edges);
    }
    for &e in b.incident(v) {
        if b.edge(e).unwrap().other(v) == x {
            out.push(BTreeSet::from([e]));
        }
    }
    out
}

/// Edge orderings of `v` over all planar rotation systems, by enumeration.
pub fn embedding_orders_bruteforce(
    g: &MultiGraph,
    v: VertexId,
    limit: u64,
) -> Result<BTreeSet<CyclicOrder<EdgeId>>> {
    let mut out = BTreeSet::new();
    PlanarEnumerator::new(g, &[v], limit).run(&mut |_, _| true, &mut |r| {
        out.insert(r.get(v).cloned().unwrap_or_else(|| CyclicOrder::new(Vec::new())));
        Visit::Continue
    })?;
    Ok(out)
}

/// Smallest PQ-tree containing `orders`, or `None` when the set is not
/// PQ-representable: the universal tree reduced by every subset that is
/// consecutive in all given orders.
pub fn pq_tree_from_orders(orders: &BTreeSet<CyclicOrder<EdgeId>>) -> Result<Option<PQTree<EdgeId>>> {
    let Some(first) = orders.iter().next() else {
        return Ok(None);
    };
    let labels: Vec<EdgeId> = first.labels().into_iter().collect();
    let n = labels.len();
    if n > 16 {
        return Err(Error::Capacity {
            what: "subset scan for PQ-tree reconstruction".into(),
            limit: 16,
        });
    }
    let mut tree = PQTree::universal(&first.labels())?;
    for mask in 0u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if k < 2 || k + 2 > n {
            continue;
        }
        let subset: BTreeSet<EdgeId> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| labels[i]).collect();
        if orders.iter().all(|o| is_consecutive(o, &subset)) {
            tree = tree.reduce(&subset)?.expect("subset consecutive in a nonempty order set");
        }
    }
    Ok((tree.orders_bounded(n)? == *orders).then_some(tree))
}

/// Are the members of `s` consecutive in the cyclic order?
pub fn is_consecutive<L: Ord + Clone>(o: &CyclicOrder<L>, s: &BTreeSet<L>) -> bool {
    let seq = o.as_slice();
    let n = seq.len();
    let boundaries = (0..n)
        .filter(|&i| s.contains(&seq[i]) != s.contains(&seq[(i + 1) % n]))
        .count();
    boundaries <= 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::all_cyclic_orders;

    fn k(n: u32) -> MultiGraph {
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                pairs.push((a, b));
            }
        }
        MultiGraph::from_pairs(&pairs).unwrap()
    }

    fn k33() -> MultiGraph {
        let mut pairs = Vec::new();
        for a in 0..3 {
            for b in 3..6 {
                pairs.push((a, b));
            }
        }
        MultiGraph::from_pairs(&pairs).unwrap()
    }

    /// Every rotation system, by plain product enumeration.
    fn all_rotations(g: &MultiGraph) -> Vec<RotationSystem> {
        let mut acc = vec![RotationSystem::new()];
        for v in g.vertices() {
            let inc: BTreeSet<_> = g.incident(v).iter().copied().collect();
            let options = all_cyclic_orders(&inc);
            let mut next = Vec::new();
            for r in &acc {
                for o in &options {
                    let mut r = r.clone();
                    r.set(v, o.clone());
                    next.push(r);
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn triangle_always_planar() {
        let g = MultiGraph::from_pairs(&[(0, 1), (1, 2), (2, 0)]).unwrap();
        for r in all_rotations(&g) {
            assert!(rotation_is_planar(&g, &r).unwrap());
        }
    }

    #[test]
    fn k5_never_planar() {
        let g = k(5);
        let rs = all_rotations(&g);
        assert_eq!(rs.len(), 6usize.pow(5));
        assert!(rs.iter().all(|r| !rotation_is_planar(&g, r).unwrap()));
        assert!(is_planar(&g).is_none());
    }

    #[test]
    fn parallel_pair_is_planar() {
        let g = MultiGraph::from_pairs(&[(0, 1), (0, 1)]).unwrap();
        let r = all_rotations(&g);
        assert_eq!(r.len(), 1);
        assert!(rotation_is_planar(&g, &r[0]).unwrap());
    }

    #[test]
    fn partial_rotation_rejected() {
        let g = MultiGraph::from_pairs(&[(0, 1), (1, 2)]).unwrap();
        assert!(rotation_is_planar(&g, &RotationSystem::new()).is_err());
    }

    #[test]
    fn witnesses_and_refutations() {
        let g = k(4);
        let r = is_planar(&g).unwrap();
        assert!(rotation_is_planar(&g, &r).unwrap());
        assert!(is_planar(&k33()).is_none());
        let bundle = MultiGraph::from_pairs(&[(0, 1); 5]).unwrap();
        let r = is_planar(&bundle).unwrap();
        assert!(rotation_is_planar(&bundle, &r).unwrap());
    }

    #[test]
    fn k33_has_no_planar_rotation() {
        let g = k33();
        let mut found = false;
        PlanarEnumerator::new(&g, &[], u64::MAX)
            .run(&mut |_, _| true, &mut |_| {
                found = true;
                Visit::Stop
            })
            .unwrap();
        assert!(!found);
    }

    #[test]
    fn enumerator_matches_product_on_k4() {
        let g = k(4);
        let planar_count = all_rotations(&g)
            .iter()
            .filter(|r| rotation_is_planar(&g, r).unwrap())
            .count();
        let mut enumerated = BTreeSet::new();
        PlanarEnumerator::new(&g, &[], u64::MAX)
            .run(&mut |_, _| true, &mut |r| {
                enumerated.insert(r.clone());
                Visit::Continue
            })
            .unwrap();
        assert_eq!(enumerated.len(), planar_count);
        assert_eq!(planar_count, 2);
    }

    #[test]
    fn embedding_tree_examples() {
        let c4 = MultiGraph::from_pairs(&[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(embedding_tree(&c4, VertexId(0)).unwrap().orders().unwrap().len(), 1);

        // Wheel W4: hub 0, rim 1-2-3-4.
        let w4 = MultiGraph::from_pairs(&[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4), (4, 1)]).unwrap();
        let t = embedding_tree(&w4, VertexId(0)).unwrap();
        assert_eq!(t.orders().unwrap().len(), 2);
        assert_eq!(t.orders().unwrap(), embedding_orders_bruteforce(&w4, VertexId(0), u64::MAX).unwrap());

        let bundle = MultiGraph::from_pairs(&[(0, 1); 3]).unwrap();
        let t = embedding_tree(&bundle, VertexId(1)).unwrap();
        assert_eq!(t.orders().unwrap().len(), 2);

        let path = MultiGraph::from_pairs(&[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(embedding_tree(&path, VertexId(1)), Err(Error::Precondition(_))));
        let mut k5 = k(5);
        k5.add_vertex(VertexId(9));
        k5.add_edge(EdgeId(99), VertexId(0), VertexId(9)).unwrap();
        assert!(matches!(embedding_tree(&k5, VertexId(9)), Err(Error::Precondition(_))));
    }

    #[test]
    fn half_edge_loops() {
        let v = VertexId(0);
        let loop_once = HalfEdgeEmbedding {
            ends: vec![(v, v)],
            rotation: BTreeMap::from([(v, vec![HalfEdge { edge: 0, end: 0 }, HalfEdge { edge: 0, end: 1 }])]),
        };
        assert_eq!(loop_once.face_count().unwrap(), 2);
        assert!(loop_once.is_planar().unwrap());
        // Two loops interleaved at one vertex form a torus embedding.
        let h = |edge, end| HalfEdge { edge, end };
        let twisted = HalfEdgeEmbedding {
            ends: vec![(v, v), (v, v)],
            rotation: BTreeMap::from([(v, vec![h(0, 0), h(1, 0), h(0, 1), h(1, 1)])]),
        };
        assert!(!twisted.is_planar().unwrap());
        let nested = HalfEdgeEmbedding {
            ends: vec![(v, v), (v, v)],
            rotation: BTreeMap::from([(v, vec![h(0, 0), h(0, 1), h(1, 0), h(1, 1)])]),
        };
        assert!(nested.is_planar().unwrap());
    }

    #[test]
    fn consecutive_sets() {
        let o = CyclicOrder::new(vec![1, 2, 3, 4, 5]);
        assert!(is_consecutive(&o, &[5, 1].into_iter().collect()));
        assert!(!is_consecutive(&o, &[1, 3].into_iter().collect()));
    }
}
