//! Order constraints on the edge orderings of single vertices, and a
//! brute-force decider for planarity under such constraints.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{invalid, Result};
use crate::graph::{EdgeId, MultiGraph, VertexId};
use crate::order::{all_cyclic_orders, CyclicOrder};
use crate::planarity::{search_capacity, PlanarEnumerator, RotationSystem, Visit};
use crate::pqtree::PQTree;

/// Constraint applied inside one block of a partitioned constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InnerConstraint {
    Full(CyclicOrder<EdgeId>),
    PQ(PQTree<EdgeId>),
}

impl InnerConstraint {
    fn labels(&self) -> BTreeSet<EdgeId> {
        match self {
            InnerConstraint::Full(o) => o.labels(),
            InnerConstraint::PQ(t) => t.labels(),
        }
    }

    fn allows(&self, o: &CyclicOrder<EdgeId>) -> Result<bool> {
        match self {
            InnerConstraint::Full(f) => Ok(f == o),
            InnerConstraint::PQ(t) => t.permits(o),
        }
    }
}

/// A set of allowed cyclic orders of a vertex's incident edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderConstraint {
    /// No two blocks may alternate.
    Partition(Vec<BTreeSet<EdgeId>>),
    PQ(PQTree<EdgeId>),
    /// Exactly this order, up to rotation only.
    Full(CyclicOrder<EdgeId>),
    /// A partition whose blocks carry their own constraint.
    Partitioned(Vec<InnerConstraint>),
    Explicit {
        ground: BTreeSet<EdgeId>,
        orders: BTreeSet<CyclicOrder<EdgeId>>,
    },
}

impl OrderConstraint {
    pub fn partition(blocks: Vec<BTreeSet<EdgeId>>) -> Result<Self> {
        let c = OrderConstraint::Partition(blocks);
        c.check()?;
        Ok(c)
    }

    pub fn partitioned(blocks: Vec<InnerConstraint>) -> Result<Self> {
        let c = OrderConstraint::Partitioned(blocks);
        c.check()?;
        Ok(c)
    }

    pub fn explicit(ground: BTreeSet<EdgeId>, orders: BTreeSet<CyclicOrder<EdgeId>>) -> Result<Self> {
        let c = OrderConstraint::Explicit { ground, orders };
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        let blocks: Vec<BTreeSet<EdgeId>> = match self {
            OrderConstraint::Partition(bs) => bs.clone(),
            OrderConstraint::Partitioned(bs) => bs.iter().map(InnerConstraint::labels).collect(),
            OrderConstraint::Explicit { ground, orders } => {
                if orders.iter().any(|o| o.len() != ground.len() || o.labels() != *ground) {
                    return invalid("explicit order over a different ground set");
                }
                return Ok(());
            }
            _ => return Ok(()),
        };
        let mut seen = BTreeSet::new();
        for b in &blocks {
            if b.is_empty() {
                return invalid("empty partition block");
            }
            for &e in b {
                if !seen.insert(e) {
                    return invalid(format!("edge {e} in two partition blocks"));
                }
            }
        }
        Ok(())
    }

    pub fn ground_set(&self) -> BTreeSet<EdgeId> {
        match self {
            OrderConstraint::Partition(bs) => bs.iter().flatten().copied().collect(),
            OrderConstraint::PQ(t) => t.labels(),
            OrderConstraint::Full(o) => o.labels(),
            OrderConstraint::Partitioned(bs) => bs.iter().flat_map(InnerConstraint::labels).collect(),
            OrderConstraint::Explicit { ground, .. } => ground.clone(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            OrderConstraint::Partition(_) => "partition",
            OrderConstraint::PQ(_) => "pq",
            OrderConstraint::Full(_) => "full",
            OrderConstraint::Partitioned(bs) if bs.iter().all(|b| matches!(b, InnerConstraint::Full(_))) => {
                "partitioned-full"
            }
            OrderConstraint::Partitioned(bs) if bs.iter().all(|b| matches!(b, InnerConstraint::PQ(_))) => {
                "partitioned-pq"
            }
            OrderConstraint::Partitioned(_) => "partitioned",
            OrderConstraint::Explicit { .. } => "explicit",
        }
    }

    /// Whether the family has a representation polynomial in the ground
    /// set size. Recorded for reporting only.
    pub fn is_compact(&self) -> bool {
        !matches!(self, OrderConstraint::Explicit { .. })
    }

    pub fn allows(&self, o: &CyclicOrder<EdgeId>) -> Result<bool> {
        let ground = self.ground_set();
        if o.len() != ground.len() || o.labels() != ground {
            return invalid("order and constraint have different ground sets");
        }
        Ok(match self {
            OrderConstraint::Partition(bs) => non_crossing(o, bs),
            OrderConstraint::PQ(t) => t.permits(o)?,
            OrderConstraint::Full(f) => f == o,
            OrderConstraint::Partitioned(bs) => {
                let blocks: Vec<BTreeSet<EdgeId>> = bs.iter().map(InnerConstraint::labels).collect();
                if !non_crossing(o, &blocks) {
                    return Ok(false);
                }
                for (b, labels) in bs.iter().zip(&blocks) {
                    if !b.allows(&o.restrict(labels))? {
                        return Ok(false);
                    }
                }
                true
            }
            OrderConstraint::Explicit { orders, .. } => orders.contains(o),
        })
    }

    /// All allowed orders, by filtering every cyclic order of the ground set.
    pub fn allowed_orders(&self, max_labels: usize) -> Result<BTreeSet<CyclicOrder<EdgeId>>> {
        if let OrderConstraint::Explicit { orders, .. } = self {
            return Ok(orders.clone());
        }
        let ground = self.ground_set();
        if ground.len() > max_labels {
            return Err(crate::Error::Capacity {
                what: format!("listing the orders of a constraint on {} edges", ground.len()),
                limit: max_labels as u64,
            });
        }
        let mut out = BTreeSet::new();
        for o in all_cyclic_orders(&ground) {
            if self.allows(&o)? {
                out.insert(o);
            }
        }
        Ok(out)
    }
}

/// No two blocks alternate: restricted to any two blocks, the order
/// switches between them at most twice.
fn non_crossing(o: &CyclicOrder<EdgeId>, blocks: &[BTreeSet<EdgeId>]) -> bool {
    let block_of: BTreeMap<EdgeId, usize> = blocks
        .iter()
        .enumerate()
        .flat_map(|(i, b)| b.iter().map(move |&e| (e, i)))
        .collect();
    let seq: Vec<usize> = o.iter().map(|e| block_of[e]).collect();
    for i in 0..blocks.len() {
        for j in i + 1..blocks.len() {
            let two: Vec<usize> = seq.iter().copied().filter(|&b| b == i || b == j).collect();
            let switches = (0..two.len()).filter(|&k| two[k] != two[(k + 1) % two.len()]).count();
            if switches > 2 {
                return false;
            }
        }
    }
    true
}

/// A multigraph with constraints on some of its vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedInstance {
    pub graph: MultiGraph,
    pub constraints: BTreeMap<VertexId, OrderConstraint>,
}

impl ConstrainedInstance {
    pub fn new(graph: MultiGraph, constraints: BTreeMap<VertexId, OrderConstraint>) -> Result<Self> {
        for (&v, c) in &constraints {
            let incident: BTreeSet<EdgeId> = graph.incident(v).iter().copied().collect();
            if !graph.contains_vertex(v) || c.ground_set() != incident {
                return invalid(format!("constraint at {v} does not cover exactly its incident edges"));
            }
        }
        Ok(Self { graph, constraints })
    }

    /// Shared family name of all constraints, if they agree.
    pub fn family(&self) -> Option<&'static str> {
        let fams: BTreeSet<&str> = self.constraints.values().map(OrderConstraint::family).collect();
        (fams.len() == 1).then(|| *fams.iter().next().unwrap())
    }
}

/// Planar rotation system meeting every constraint, by exhaustive search.
pub fn constrained_planar_bruteforce(ci: &ConstrainedInstance) -> Result<Option<RotationSystem>> {
    constrained_planar_bounded(ci, search_capacity())
}

pub fn constrained_planar_bounded(ci: &ConstrainedInstance, limit: u64) -> Result<Option<RotationSystem>> {
    let first: Vec<VertexId> = ci.constraints.keys().copied().collect();
    let mut witness = None;
    let mut failure = None;
    PlanarEnumerator::new(&ci.graph, &first, limit).run(
        &mut |v, o| match ci.constraints.get(&v).map(|c| c.allows(o)) {
            None | Some(Ok(true)) => true,
            Some(Ok(false)) => false,
            Some(Err(e)) => {
                failure = Some(e);
                false
            }
        },
        &mut |r| {
            witness = Some(r.clone());
            Visit::Stop
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(xs: &[u32]) -> Vec<EdgeId> {
        xs.iter().map(|&x| EdgeId(x)).collect()
    }

    fn set(xs: &[u32]) -> BTreeSet<EdgeId> {
        e(xs).into_iter().collect()
    }

    /// Alternation by scanning every 4-tuple of positions.
    fn alternates_by_scan(o: &CyclicOrder<EdgeId>, blocks: &[BTreeSet<EdgeId>]) -> bool {
        let s = o.as_slice();
        let block = |x: &EdgeId| blocks.iter().position(|b| b.contains(x)).unwrap();
        let n = s.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        let (p, q, r, t) = (block(&s[a]), block(&s[b]), block(&s[c]), block(&s[d]));
                        if p == r && q == t && p != q {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn partition_examples() {
        // a=0 b=1 c=2 d=3 e=4 f=5
        let c = OrderConstraint::partition(vec![set(&[0, 1]), set(&[2, 3])]).unwrap();
        assert!(!c.allows(&CyclicOrder::new(e(&[0, 2, 1, 3]))).unwrap());
        let c = OrderConstraint::partition(vec![set(&[0, 1]), set(&[2, 3, 5]), set(&[4])]).unwrap();
        assert!(c.allows(&CyclicOrder::new(e(&[0, 1, 4, 2, 3, 5]))).unwrap());
        assert!(c.allows(&CyclicOrder::new(e(&[0, 1]))).is_err());
    }

    #[test]
    fn full_is_rotation_only() {
        let c = OrderConstraint::Full(CyclicOrder::new(e(&[1, 2, 3])));
        assert!(c.allows(&CyclicOrder::new(e(&[2, 3, 1]))).unwrap());
        assert!(!c.allows(&CyclicOrder::new(e(&[3, 2, 1]))).unwrap());
    }

    #[test]
    fn partition_matches_quadruple_scan() {
        let labels = set(&[0, 1, 2, 3, 4, 5, 6]);
        let partitions = [
            vec![set(&[0, 1, 2]), set(&[3, 4]), set(&[5, 6])],
            vec![set(&[0, 3]), set(&[1, 4, 6]), set(&[2]), set(&[5])],
            vec![set(&[0, 1, 2, 3, 4, 5, 6])],
        ];
        for p in &partitions {
            let c = OrderConstraint::partition(p.clone()).unwrap();
            for o in all_cyclic_orders(&labels) {
                assert_eq!(c.allows(&o).unwrap(), !alternates_by_scan(&o, p));
            }
        }
    }

    #[test]
    fn single_block_partitioned_collapses() {
        let labels = set(&[0, 1, 2, 3, 4]);
        let full = CyclicOrder::new(e(&[0, 2, 1, 4, 3]));
        let tree: PQTree<EdgeId> = "P(e0, Q(e1, e2, e3), e4)".parse().unwrap();
        let a = OrderConstraint::partitioned(vec![InnerConstraint::Full(full.clone())]).unwrap();
        let b = OrderConstraint::Full(full);
        let c = OrderConstraint::partitioned(vec![InnerConstraint::PQ(tree.clone())]).unwrap();
        let d = OrderConstraint::PQ(tree);
        for o in all_cyclic_orders(&labels) {
            assert_eq!(a.allows(&o).unwrap(), b.allows(&o).unwrap());
            assert_eq!(c.allows(&o).unwrap(), d.allows(&o).unwrap());
        }
    }

    #[test]
    fn bundle_with_fixed_side() {
        let g = MultiGraph::from_pairs(&[(0, 1); 4]).unwrap();
        let full = CyclicOrder::new(e(&[0, 1, 2, 3]));
        let ci = ConstrainedInstance::new(g, [(VertexId(0), OrderConstraint::Full(full.clone()))].into()).unwrap();
        let r = constrained_planar_bruteforce(&ci).unwrap().unwrap();
        assert_eq!(r.get(VertexId(0)), Some(&full));
        assert_eq!(r.get(VertexId(1)), Some(&full.reversed()));
    }

    #[test]
    fn unconstrained_k4_is_feasible() {
        let g = MultiGraph::from_pairs(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let ci = ConstrainedInstance::new(g, BTreeMap::new()).unwrap();
        assert!(constrained_planar_bruteforce(&ci).unwrap().is_some());
    }

    #[test]
    fn ground_set_mismatch_rejected() {
        let g = MultiGraph::from_pairs(&[(0, 1), (1, 2)]).unwrap();
        let c = OrderConstraint::Full(CyclicOrder::new(e(&[0])));
        assert!(ConstrainedInstance::new(g, [(VertexId(1), c)].into()).is_err());
    }
}
