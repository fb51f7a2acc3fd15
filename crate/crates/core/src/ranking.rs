//! Weighted PageRank on undirected graphs and rank-band partitions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Partition, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankConfig {
    pub damping: f64,
    /// Stop once the L1 change between iterates drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self { damping: 0.85, tolerance: 1e-10, max_iterations: 200 }
    }
}

impl RankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidConfig("damping must lie in (0, 1)".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be > 0".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankVector {
    pub scores: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
}

/// Power iteration for
///
/// ```text
/// p(v) = (1-d)/n + d * [ Σ_{u ~ v} w_uv / s(u) * p(u) + D/n ]
/// ```
///
/// where `s(u)` is the weighted degree and `D` the mass on isolated vertices.
/// Each step pulls from neighbors in stored order, so the result is the same
/// for any number of worker threads.
pub fn pagerank(g: &WeightedGraph, cfg: &RankConfig) -> Result<RankVector> {
    cfg.validate()?;
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidInput("pagerank of an empty graph".into()));
    }
    let strength = g.weighted_degrees();
    let isolated: Vec<usize> = (0..n).filter(|&v| strength[v] == 0.0).collect();
    let d = cfg.damping;
    let nf = n as f64;

    let mut scores = vec![1.0 / nf; n];
    let mut share = vec![0.0; n];
    let mut iterations_used = 0;
    let mut converged = false;

    while iterations_used < cfg.max_iterations {
        iterations_used += 1;
        share.par_iter_mut().enumerate().for_each(|(u, s)| {
            *s = if strength[u] > 0.0 { scores[u] / strength[u] } else { 0.0 };
        });
        let dangling: f64 = isolated.iter().map(|&u| scores[u]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        let mut next: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|v| {
                let pulled: f64 = g.neighbors_weighted(v).map(|(u, w)| w * share[u]).sum();
                base + d * pulled
            })
            .collect();
        let total: f64 = next.iter().sum();
        for x in next.iter_mut() {
            *x /= total;
        }
        let delta: f64 = next.iter().zip(&scores).map(|(a, b)| (a - b).abs()).sum();
        scores = next;
        if delta < cfg.tolerance {
            converged = true;
            break;
        }
    }
    Ok(RankVector { scores, iterations_used, converged })
}

/// Vertex ids sorted by score descending, ties by ascending id.
pub fn rank_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Cuts the rank order into consecutive bands. Band `b` takes the next
/// `round(fractions[b] * n)` vertices and the last band takes the remainder.
/// Empty bands are dropped and later bands renumbered, so the band id is
/// always a dense community id.
pub fn percentile_partition(ranks: &RankVector, fractions: &[f64]) -> Result<Partition> {
    let sizes = band_sizes(ranks.scores.len(), fractions)?;
    let order = rank_order(&ranks.scores);
    let mut assignment = vec![0; order.len()];
    let mut band = 0;
    let mut pos = 0;
    for size in sizes.into_iter().filter(|&s| s > 0) {
        for &v in &order[pos..pos + size] {
            assignment[v] = band;
        }
        pos += size;
        band += 1;
    }
    Partition::new(assignment)
}

/// Band sizes for `n` vertices; always sums to `n`.
pub fn band_sizes(n: usize, fractions: &[f64]) -> Result<Vec<usize>> {
    if fractions.is_empty() {
        return Err(Error::InvalidConfig("no band fractions given".into()));
    }
    if fractions.iter().any(|&f| !(f >= 0.0) || !f.is_finite()) {
        return Err(Error::InvalidConfig("band fractions must be non-negative".into()));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("band fractions sum to {sum}, expected 1")));
    }
    let mut sizes = Vec::with_capacity(fractions.len());
    let mut left = n;
    for (i, &f) in fractions.iter().enumerate() {
        let size = if i + 1 == fractions.len() { left } else { ((f * n as f64).round() as usize).min(left) };
        sizes.push(size);
        left -= size;
    }
    Ok(sizes)
}

/// Band fractions mirroring a partition: one band per community, sized like
/// it, with the community of highest mean score first.
pub fn bands_like(partition: &Partition, scores: &[f64]) -> Vec<f64> {
    let sizes = partition.sizes();
    let mut mean = vec![0.0; sizes.len()];
    for (v, &c) in partition.assignment().iter().enumerate() {
        mean[c] += scores[v];
    }
    for (m, &s) in mean.iter_mut().zip(&sizes) {
        *m /= s as f64;
    }
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| mean[b].total_cmp(&mean[a]).then(a.cmp(&b)));
    let n = partition.len() as f64;
    order.into_iter().map(|c| sizes[c] as f64 / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranks(scores: Vec<f64>) -> RankVector {
        RankVector { scores, iterations_used: 0, converged: true }
    }

    #[test]
    fn single_vertex() {
        let g = WeightedGraph::with_vertex_count(1, &[]).unwrap();
        let r = pagerank(&g, &RankConfig::default()).unwrap();
        assert_eq!(r.scores, vec![1.0]);
    }

    #[test]
    fn empty_graph_rejected() {
        let g = WeightedGraph::with_vertex_count(0, &[]).unwrap();
        assert!(pagerank(&g, &RankConfig::default()).is_err());
    }

    #[test]
    fn four_cycle_uniform() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        for d in [0.5, 0.85, 0.99] {
            let r = pagerank(&g, &RankConfig { damping: d, ..RankConfig::default() }).unwrap();
            for s in &r.scores {
                assert!((s - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isolated_vertices_are_dangling() {
        let g = WeightedGraph::with_vertex_count(4, &[(0, 1, 2.0)]).unwrap();
        let r = pagerank(&g, &RankConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.scores[0] > r.scores[2]);
        assert!((r.scores[2] - r.scores[3]).abs() < 1e-15);
    }

    #[test]
    fn bad_damping_rejected() {
        let g = WeightedGraph::from_edges(&[(0, 1, 1.0)]).unwrap();
        for d in [0.0, 1.0, -0.2] {
            assert!(pagerank(&g, &RankConfig { damping: d, ..RankConfig::default() }).is_err());
        }
    }

    #[test]
    fn direct_sort_and_cut() {
        let p = percentile_partition(&ranks(vec![0.4, 0.3, 0.2, 0.1]), &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(p.assignment(), &[0, 1, 2, 2]);
    }

    #[test]
    fn uniform_scores_split_by_id() {
        let p = percentile_partition(&ranks(vec![0.2; 5]), &[0.5, 0.5]).unwrap();
        // round(2.5) = 3 goes to the first band; ties keep ascending ids.
        assert_eq!(p.assignment(), &[0, 0, 0, 1, 1]);
    }

    #[test]
    fn three_band_split_of_923() {
        let sizes = band_sizes(923, &[0.0238, 0.0997, 0.8765]).unwrap();
        assert_eq!(sizes, vec![22, 92, 809]);
    }

    #[test]
    fn fraction_errors() {
        assert!(band_sizes(10, &[]).is_err());
        assert!(band_sizes(10, &[0.5, 0.4]).is_err());
        assert!(band_sizes(10, &[1.5, -0.5]).is_err());
    }

    #[test]
    fn empty_bands_are_dropped() {
        let p = percentile_partition(&ranks(vec![0.5, 0.3, 0.2]), &[0.1, 0.9]).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 0]);
    }

    #[test]
    fn bands_follow_community_scores() {
        let p = Partition::new(vec![0, 0, 0, 1]).unwrap();
        let f = bands_like(&p, &[0.1, 0.1, 0.1, 0.7]);
        assert_eq!(f, vec![0.25, 0.75]);
    }

    proptest::proptest! {
        #[test]
        fn band_sizes_sum_to_n(n in 0usize..2000, raw in proptest::collection::vec(0.01f64..1.0, 1..6)) {
            let total: f64 = raw.iter().sum();
            let mut fractions: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let head: f64 = fractions[..fractions.len() - 1].iter().sum();
            *fractions.last_mut().unwrap() = 1.0 - head;
            let sizes = band_sizes(n, &fractions).unwrap();
            proptest::prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        }
    }
}
