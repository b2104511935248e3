//! Seeded random clustered graphs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cdtree::ClusteredGraph;
use crate::error::{invalid, Result};
use crate::graph::{components, EdgeId, MultiGraph, VertexId};
use crate::planarity::is_planar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Flat,
    Nested,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    /// Edges added on top of a random spanning tree. Only edges that keep
    /// the graph planar are kept, so the result may have fewer.
    pub extra_edges: usize,
    pub mode: Mode,
    pub clusters: usize,
    pub min_cluster: usize,
    pub max_cluster: usize,
    /// Only accept clusters inducing a connected subgraph.
    pub connected_clusters: bool,
    /// Upper bound on edges leaving a cluster, if any.
    pub max_outgoing: Option<usize>,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 8,
            extra_edges: 4,
            mode: Mode::Flat,
            clusters: 2,
            min_cluster: 2,
            max_cluster: 4,
            connected_clusters: false,
            max_outgoing: None,
            seed: 0,
        }
    }
}

const ATTEMPTS_PER_CLUSTER: usize = 200;

/// Draws a connected simple planar graph and a laminar cluster family.
///
/// The same configuration always yields the same instance. Fewer clusters
/// than requested are returned when the constraints make them hard to find.
pub fn generate(cfg: &GeneratorConfig) -> Result<ClusteredGraph> {
    if cfg.n < 2 {
        return invalid("need at least two vertices");
    }
    if cfg.min_cluster < 2 || cfg.min_cluster > cfg.max_cluster || cfg.max_cluster >= cfg.n {
        return invalid("cluster sizes must satisfy 2 <= min <= max < n");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let g = random_planar_graph(cfg.n, cfg.extra_edges, &mut rng);

    let mut family: Vec<BTreeSet<VertexId>> = Vec::new();
    let mut attempts = 0;
    while family.len() < cfg.clusters && attempts < cfg.clusters * ATTEMPTS_PER_CLUSTER {
        attempts += 1;
        let candidate = match cfg.mode {
            Mode::Flat => {
                let used: BTreeSet<VertexId> = family.iter().flatten().copied().collect();
                let free: Vec<VertexId> = g.vertices().filter(|v| !used.contains(v)).collect();
                draw_subset(&free, cfg, &mut rng)
            }
            Mode::Nested => {
                // Either inside an existing cluster or among all vertices.
                let pool: Vec<VertexId> = match family.choose(&mut rng) {
                    Some(c) if rng.gen_bool(0.5) => c.iter().copied().collect(),
                    _ => g.vertices().collect(),
                };
                draw_subset(&pool, cfg, &mut rng)
            }
        };
        let Some(c) = candidate else { continue };
        if family.contains(&c) || !laminar_with(&family, &c) || !acceptable(&g, &c, cfg) {
            continue;
        }
        family.push(c);
    }
    ClusteredGraph::from_sets(g, &family)
}

fn draw_subset(pool: &[VertexId], cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Option<BTreeSet<VertexId>> {
    let hi = cfg.max_cluster.min(pool.len());
    if hi < cfg.min_cluster {
        return None;
    }
    let k = rng.gen_range(cfg.min_cluster..=hi);
    let picked: BTreeSet<VertexId> = pool.choose_multiple(rng, k).copied().collect();
    // A cluster equal to its pool adds nothing when the pool is a cluster.
    (picked.len() < pool.len() || cfg.mode == Mode::Flat).then_some(picked)
}

fn laminar_with(family: &[BTreeSet<VertexId>], c: &BTreeSet<VertexId>) -> bool {
    family.iter().all(|d| c.is_disjoint(d) || c.is_subset(d) || d.is_subset(c))
}

fn acceptable(g: &MultiGraph, c: &BTreeSet<VertexId>, cfg: &GeneratorConfig) -> bool {
    if c.len() >= g.num_vertices() {
        return false;
    }
    if cfg.connected_clusters && components(&g.induced_subgraph(c)).len() != 1 {
        return false;
    }
    if let Some(max) = cfg.max_outgoing {
        let out = g.edges().filter(|(_, e)| c.contains(&e.u) != c.contains(&e.v)).count();
        if out > max {
            return false;
        }
    }
    true
}

fn random_planar_graph(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> MultiGraph {
    let mut g = MultiGraph::new();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    for &v in &order {
        g.add_vertex(VertexId(v));
    }
    let mut next = 0u32;
    for i in 1..n {
        let parent = order[rng.gen_range(0..i)];
        g.add_edge(EdgeId(next), VertexId(parent), VertexId(order[i])).expect("distinct endpoints");
        next += 1;
    }
    let mut pairs: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
        .filter(|&(u, v)| !g.has_edge_between(VertexId(u), VertexId(v)))
        .collect();
    pairs.shuffle(rng);
    let mut added = 0;
    for (u, v) in pairs {
        if added == extra {
            break;
        }
        g.add_edge(EdgeId(next), VertexId(u), VertexId(v)).expect("distinct endpoints");
        if is_planar(&g).is_some() {
            next += 1;
            added += 1;
        } else {
            g.remove_edge(EdgeId(next));
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let cfg = GeneratorConfig { n: 10, extra_edges: 8, mode: Mode::Nested, clusters: 3, seed: 7, ..Default::default() };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = GeneratorConfig { seed: 8, ..cfg.clone() };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn respects_bounds() {
        for seed in 0..30 {
            let cfg = GeneratorConfig {
                n: 9,
                extra_edges: 6,
                clusters: 2,
                connected_clusters: true,
                max_outgoing: Some(4),
                seed,
                ..Default::default()
            };
            let cg = generate(&cfg).unwrap();
            let g = cg.graph();
            assert!(is_planar(g).is_some() && g.is_connected() && g.is_simple());
            assert!(cg.is_flat());
            for c in cg.proper_clusters() {
                assert!((2..=4).contains(&c.len()));
                assert_eq!(components(&g.induced_subgraph(&c)).len(), 1);
            }
        }
    }
}
