//! Multi-level Louvain modularity optimization.
//!
//! Each level runs local moving: vertices are visited in order and moved to
//! the neighboring community with the largest modularity gain, until a sweep
//! makes no move. Communities are then collapsed into single vertices (with
//! self-loops carrying their internal weight) and the process repeats on the
//! smaller graph until a level makes no move.
//!
//! Modularity with resolution `γ`:
//!
//! ```text
//! Q = (1/2m) Σ_ij [ w_ij − γ k_i k_j / 2m ] δ(c_i, c_j)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LouvainConfig {
    pub resolution: f64,
    /// A vertex moves only when its modularity gain exceeds this.
    pub min_gain: f64,
    /// Maximum local-moving sweeps per level.
    pub max_passes: usize,
    pub seed: u64,
    /// `true`: sweep vertices in ascending id order. `false`: shuffle the
    /// sweep order with `seed`.
    pub ordered: bool,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        Self { resolution: 1.0, min_gain: 1e-9, max_passes: 100, seed: 0, ordered: true }
    }
}

impl LouvainConfig {
    pub fn with_resolution(resolution: f64) -> Self {
        Self { resolution, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return Err(Error::InvalidConfig("resolution must be > 0".into()));
        }
        if !(self.min_gain >= 0.0) {
            return Err(Error::InvalidConfig("min_gain must be >= 0".into()));
        }
        if self.max_passes < 1 {
            return Err(Error::InvalidConfig("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainResult {
    pub partition: Partition,
    pub modularity: f64,
    pub levels: usize,
    /// Partition of the original vertices after each level.
    pub level_partitions: Vec<Partition>,
    /// Modularity after each level; nondecreasing.
    pub level_modularity: Vec<f64>,
}

/// Modularity of `p` on `g` at resolution `resolution`.
pub fn modularity(g: &WeightedGraph, p: &Partition, resolution: f64) -> Result<f64> {
    let two_m = g.total_weight();
    if !(two_m > 0.0) {
        return Err(Error::EmptyGraph);
    }
    if p.len() != g.vertex_count() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} vertices, graph has {}",
            p.len(),
            g.vertex_count()
        )));
    }
    let k = p.community_count();
    let mut internal = vec![0.0f64; k];
    let mut total = vec![0.0f64; k];
    for u in 0..g.vertex_count() {
        let cu = p.community_of(u);
        for (v, w) in g.neighbors_weighted(u) {
            total[cu] += w;
            if p.community_of(v) == cu {
                internal[cu] += w;
            }
        }
    }
    Ok(community_modularity(&internal, &total, two_m, resolution))
}

fn community_modularity(internal: &[f64], total: &[f64], two_m: f64, resolution: f64) -> f64 {
    internal
        .iter()
        .zip(total)
        .map(|(&inside, &tot)| inside / two_m - resolution * (tot / two_m) * (tot / two_m))
        .sum()
}

/// Working graph for one level. Unlike [`WeightedGraph`] it carries a
/// self-loop weight per vertex: the internal weight of the community the
/// vertex stands for, counted in both orientations.
struct LevelGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    self_loops: Vec<f64>,
    degrees: Vec<f64>,
    two_m: f64,
}

impl LevelGraph {
    fn from_graph(g: &WeightedGraph) -> Self {
        let n = g.vertex_count();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(2 * g.edge_count());
        let mut weights = Vec::with_capacity(2 * g.edge_count());
        for v in 0..n {
            neighbors.extend_from_slice(g.neighbors(v));
            weights.extend_from_slice(g.edge_weights(v));
            offsets.push(neighbors.len());
        }
        let degrees = g.weighted_degrees();
        Self { offsets, neighbors, weights, self_loops: vec![0.0; n], degrees, two_m: g.total_weight() }
    }

    fn len(&self) -> usize {
        self.self_loops.len()
    }

    fn row(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[range.clone()].iter().zip(&self.weights[range]).map(|(&u, &w)| (u as usize, w))
    }

    /// Collapses each community into one vertex. `community` must be dense.
    fn aggregate(&self, community: &[usize], k: usize) -> LevelGraph {
        let mut members = vec![Vec::new(); k];
        for (v, &c) in community.iter().enumerate() {
            members[c].push(v);
        }
        let mut self_loops = vec![0.0; k];
        let mut degrees = vec![0.0; k];
        let mut offsets = Vec::with_capacity(k + 1);
        offsets.push(0);
        let mut neighbors = Vec::new();
        let mut weights = Vec::new();
        let mut acc = vec![0.0f64; k];
        let mut touched: Vec<usize> = Vec::new();
        for (c, group) in members.iter().enumerate() {
            for &v in group {
                self_loops[c] += self.self_loops[v];
                degrees[c] += self.degrees[v];
                for (u, w) in self.row(v) {
                    let cu = community[u];
                    if cu == c {
                        self_loops[c] += w;
                    } else {
                        if acc[cu] == 0.0 {
                            touched.push(cu);
                        }
                        acc[cu] += w;
                    }
                }
            }
            touched.sort_unstable();
            for &cu in &touched {
                neighbors.push(cu as u32);
                weights.push(acc[cu]);
                acc[cu] = 0.0;
            }
            touched.clear();
            offsets.push(neighbors.len());
        }
        LevelGraph { offsets, neighbors, weights, self_loops, degrees, two_m: self.two_m }
    }

    fn modularity(&self, community: &[usize], k: usize, resolution: f64) -> f64 {
        let mut internal = vec![0.0; k];
        let mut total = vec![0.0; k];
        for v in 0..self.len() {
            let c = community[v];
            internal[c] += self.self_loops[v];
            total[c] += self.degrees[v];
            for (u, w) in self.row(v) {
                if community[u] == c {
                    internal[c] += w;
                }
            }
        }
        community_modularity(&internal, &total, self.two_m, resolution)
    }
}

/// Local moving on one level. Returns the (not yet dense) community of every
/// vertex and whether anything moved.
fn local_moving(g: &LevelGraph, cfg: &LouvainConfig, order: &[usize]) -> (Vec<usize>, bool) {
    let n = g.len();
    let m = g.two_m / 2.0;
    let mut community: Vec<usize> = (0..n).collect();
    let mut totals = g.degrees.clone();
    let mut link = vec![0.0f64; n];
    let mut candidates: Vec<usize> = Vec::new();
    let mut is_candidate = vec![false; n];
    let mut any_move = false;

    for _ in 0..cfg.max_passes {
        let mut moved = 0usize;
        for &v in order {
            let k_v = g.degrees[v];
            if g.offsets[v] == g.offsets[v + 1] {
                continue;
            }
            let own = community[v];
            for (u, w) in g.row(v) {
                let c = community[u];
                if c != own && !is_candidate[c] {
                    is_candidate[c] = true;
                    candidates.push(c);
                }
                link[c] += w;
            }
            totals[own] -= k_v;
            let gain = |link_c: f64, total_c: f64| link_c / m - cfg.resolution * k_v * total_c / (2.0 * m * m);
            let own_gain = gain(link[own], totals[own]);
            let mut best = own;
            let mut best_gain = f64::NEG_INFINITY;
            candidates.sort_unstable();
            for &c in &candidates {
                let g_c = gain(link[c], totals[c]);
                if g_c > best_gain {
                    best_gain = g_c;
                    best = c;
                }
            }
            let target = if best != own && best_gain - own_gain > cfg.min_gain { best } else { own };
            totals[target] += k_v;
            if target != own {
                community[v] = target;
                moved += 1;
            }
            link[own] = 0.0;
            for &c in &candidates {
                link[c] = 0.0;
                is_candidate[c] = false;
            }
            candidates.clear();
        }
        if moved == 0 {
            break;
        }
        any_move = true;
    }
    (community, any_move)
}

/// Renumbers labels densely in first-appearance order.
fn densify(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = vec![usize::MAX; labels.iter().copied().max().map_or(0, |m| m + 1)];
    let mut next = 0;
    let dense = labels
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect();
    (dense, next)
}

pub fn louvain(g: &WeightedGraph, cfg: &LouvainConfig) -> Result<LouvainResult> {
    cfg.validate()?;
    if !(g.total_weight() > 0.0) {
        return Err(Error::EmptyGraph);
    }
    let n = g.vertex_count();
    let mut rng = SplitMix64::new(cfg.seed);
    let mut level = LevelGraph::from_graph(g);
    let mut membership: Vec<usize> = (0..n).collect();
    let mut level_partitions = Vec::new();
    let mut level_modularity = Vec::new();

    loop {
        let mut order: Vec<usize> = (0..level.len()).collect();
        if !cfg.ordered {
            rng.fork().shuffle(&mut order);
        }
        let (labels, moved) = local_moving(&level, cfg, &order);
        if !moved {
            break;
        }
        let (dense, k) = densify(&labels);
        let q = level.modularity(&dense, k, cfg.resolution);
        if let Some(&prev) = level_modularity.last() {
            if q <= prev {
                break;
            }
        }
        for c in membership.iter_mut() {
            *c = dense[*c];
        }
        level_partitions.push(Partition::new(membership.clone())?);
        level_modularity.push(q);
        level = level.aggregate(&dense, k);
    }

    let partition = level_partitions.last().cloned().unwrap_or_else(|| Partition::singletons(n));
    let modularity = modularity(g, &partition, cfg.resolution)?;
    Ok(LouvainResult { partition, modularity, levels: level_partitions.len(), level_partitions, level_modularity })
}

/// Renumbers communities so that 0 is the largest; equal sizes are ordered by
/// their smallest member.
pub fn relabel_by_size(p: &Partition) -> Partition {
    let sizes = p.sizes();
    let mut first_member = vec![usize::MAX; p.community_count()];
    for (v, &c) in p.assignment().iter().enumerate() {
        first_member[c] = first_member[c].min(v);
    }
    let mut order: Vec<usize> = (0..p.community_count()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(first_member[a].cmp(&first_member[b])));
    let mut new_id = vec![0; order.len()];
    for (rank, &c) in order.iter().enumerate() {
        new_id[c] = rank;
    }
    Partition::new(p.assignment().iter().map(|&c| new_id[c]).collect()).expect("relabeling keeps ids dense")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Q by the pairwise definition over a dense adjacency matrix.
    fn dense_modularity(g: &WeightedGraph, assignment: &[usize], gamma: f64) -> f64 {
        let n = g.vertex_count();
        let mut a = vec![vec![0.0; n]; n];
        for (u, v, w) in g.edges() {
            a[u][v] = w;
            a[v][u] = w;
        }
        let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
        let two_m: f64 = k.iter().sum();
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                if assignment[i] == assignment[j] {
                    q += a[i][j] - gamma * k[i] * k[j] / two_m;
                }
            }
        }
        q / two_m
    }

    fn unit(edges: &[(usize, usize)]) -> WeightedGraph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        WeightedGraph::from_edges(&e).unwrap()
    }

    fn clique_edges(offset: usize, size: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..size {
            for j in i + 1..size {
                e.push((offset + i, offset + j));
            }
        }
        e
    }

    #[test]
    fn all_in_one_is_zero() {
        let g = unit(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        let q = modularity(&g, &Partition::all_in_one(4), 1.0).unwrap();
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn single_edge_singletons() {
        let g = unit(&[(0, 1)]);
        let q = modularity(&g, &Partition::singletons(2), 1.0).unwrap();
        assert!((q + 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_disjoint_edges() {
        let g = unit(&[(0, 1), (2, 3)]);
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let q = modularity(&g, &p, 1.0).unwrap();
        assert!((q - dense_modularity(&g, p.assignment(), 1.0)).abs() < 1e-12);
        assert!((q - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = WeightedGraph::with_vertex_count(3, &[]).unwrap();
        assert!(matches!(modularity(&g, &Partition::singletons(3), 1.0), Err(Error::EmptyGraph)));
        assert!(matches!(louvain(&g, &LouvainConfig::default()), Err(Error::EmptyGraph)));
    }

    #[test]
    fn partition_length_checked() {
        let g = unit(&[(0, 1)]);
        assert!(modularity(&g, &Partition::singletons(3), 1.0).is_err());
    }

    #[test]
    fn two_triangles() {
        let g = unit(&[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        let r = louvain(&g, &LouvainConfig::default()).unwrap();
        assert_eq!(r.partition.assignment(), &[0, 0, 0, 1, 1, 1]);
        assert!((r.modularity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn k4_stays_whole() {
        let g = unit(&clique_edges(0, 4));
        let r = louvain(&g, &LouvainConfig::default()).unwrap();
        assert_eq!(r.partition.community_count(), 1);
        assert!(r.modularity.abs() < 1e-12);
    }

    #[test]
    fn bridged_cliques_split() {
        let mut e = clique_edges(0, 8);
        e.extend(clique_edges(8, 8));
        e.push((7, 8));
        let g = unit(&e);
        let r = louvain(&g, &LouvainConfig::default()).unwrap();
        let expected: Vec<usize> = (0..16).map(|v| v / 8).collect();
        assert_eq!(r.partition.assignment(), expected.as_slice());
        let block = Partition::new(expected).unwrap();
        assert!((r.modularity - modularity(&g, &block, 1.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn isolated_vertices_stay_singletons() {
        let g = WeightedGraph::with_vertex_count(5, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let r = louvain(&g, &LouvainConfig::default()).unwrap();
        let a = r.partition.assignment();
        assert_eq!(a[0], a[1]);
        assert_eq!(a[1], a[2]);
        assert_ne!(a[3], a[4]);
        assert_ne!(a[3], a[0]);
    }

    #[test]
    fn level_modularity_nondecreasing() {
        let mut e = Vec::new();
        for b in 0..6 {
            e.extend(clique_edges(b * 5, 5));
            e.push((b * 5, ((b + 1) % 6) * 5 + 1));
        }
        let g = unit(&e);
        let r = louvain(&g, &LouvainConfig::default()).unwrap();
        assert!(r.level_modularity.windows(2).all(|w| w[0] <= w[1]));
        assert!((r.modularity - r.level_modularity.last().unwrap()).abs() < 1e-9);
        assert!((r.modularity - dense_modularity(&g, r.partition.assignment(), 1.0)).abs() < 1e-12);
    }

    #[test]
    fn shuffled_order_is_seed_deterministic() {
        let mut e = clique_edges(0, 6);
        e.extend(clique_edges(6, 6));
        e.push((0, 6));
        let g = unit(&e);
        let cfg = LouvainConfig { ordered: false, seed: 9, ..LouvainConfig::default() };
        let a = louvain(&g, &cfg).unwrap();
        let b = louvain(&g, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_config_rejected() {
        let g = unit(&[(0, 1)]);
        for cfg in [
            LouvainConfig { resolution: 0.0, ..LouvainConfig::default() },
            LouvainConfig { min_gain: -1.0, ..LouvainConfig::default() },
            LouvainConfig { max_passes: 0, ..LouvainConfig::default() },
        ] {
            assert!(matches!(louvain(&g, &cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn relabel_examples() {
        let p = Partition::new(vec![1, 1, 0]).unwrap();
        assert_eq!(relabel_by_size(&p).assignment(), &[0, 0, 1]);
        let tie = Partition::new(vec![1, 0]).unwrap();
        assert_eq!(relabel_by_size(&tie).assignment(), &[0, 1]);
    }

    proptest::proptest! {
        #[test]
        fn relabel_is_idempotent(labels in proptest::collection::vec(0usize..6, 1..40)) {
            let p = Partition::from_labels(&labels);
            let once = relabel_by_size(&p);
            proptest::prop_assert_eq!(relabel_by_size(&once), once.clone());
            let sizes = once.sizes();
            proptest::prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
