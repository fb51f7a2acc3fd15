//! Deterministic synthetic data: preferential-attachment fan/artist markets
//! with genre structure, and planted-partition graphs.
//!
//! All randomness comes from [`SplitMix64`] so outputs are reproducible from
//! the seed alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Partition, WeightedGraph};
use crate::io::IdInterner;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketGenConfig {
    pub n_fans: usize,
    pub n_artists: usize,
    /// Poisson mean of memberships per fan (at least one is always drawn).
    pub memberships_per_fan: f64,
    /// Exponent on `(degree + 1)` in the artist choice weight. 0 is uniform.
    pub attachment_bias: f64,
    pub n_genres: usize,
    /// Probability that a membership is drawn from the fan's own genre.
    pub genre_affinity: f64,
    pub seed: u64,
}

impl Default for MarketGenConfig {
    fn default() -> Self {
        Self {
            n_fans: 10_000,
            n_artists: 1_000,
            memberships_per_fan: 5.0,
            attachment_bias: 1.0,
            n_genres: 1,
            genre_affinity: 1.0,
            seed: 0,
        }
    }
}

impl MarketGenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.n_fans < 1 || self.n_artists < 1 {
            return bad("n_fans and n_artists must be >= 1");
        }
        if !(self.memberships_per_fan >= 1.0) || !self.memberships_per_fan.is_finite() {
            return bad("memberships_per_fan must be >= 1");
        }
        if !(self.attachment_bias >= 0.0) || !self.attachment_bias.is_finite() {
            return bad("attachment_bias must be >= 0");
        }
        if self.n_genres < 1 || self.n_genres > self.n_artists {
            return bad("n_genres must lie in 1..=n_artists");
        }
        if !(0.0..=1.0).contains(&self.genre_affinity) {
            return bad("genre_affinity must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Output of [`gen_market`].
#[derive(Debug, Clone)]
pub struct Market {
    pub graph: BipartiteGraph,
    /// Genre of every artist.
    pub artist_genre: Vec<usize>,
    /// Preferred genre of every fan.
    pub fan_genre: Vec<usize>,
    pub fans: IdInterner,
    pub artists: IdInterner,
}

/// Binary indexed tree over non-negative weights with weighted sampling.
struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl Fenwick {
    fn new(values: Vec<f64>) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &v) in values.iter().enumerate() {
            let j = i + 1;
            tree[j] += v;
            let parent = j + (j & j.wrapping_neg());
            if parent <= n {
                tree[parent] += tree[j];
            }
        }
        Self { tree, values }
    }

    fn set(&mut self, i: usize, value: f64) {
        let delta = value - self.values[i];
        self.values[i] = value;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut j = self.tree.len() - 1;
        let mut sum = 0.0;
        while j > 0 {
            sum += self.tree[j];
            j &= j - 1;
        }
        sum
    }

    /// Index whose cumulative range contains `target` (0 <= target < total).
    /// Never returns an index of zero weight.
    fn find(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        // Floating error can land on a zero-weight slot or past the end.
        let mut idx = pos.min(n - 1);
        while self.values[idx] == 0.0 && idx > 0 {
            idx -= 1;
        }
        while self.values[idx] == 0.0 && idx + 1 < n {
            idx += 1;
        }
        idx
    }
}

/// Generates a fan/artist market.
///
/// Artist `i` belongs to genre `i % n_genres`; each fan draws a preferred
/// genre uniformly. A fan takes `max(1, Poisson(memberships_per_fan))`
/// memberships (capped at the artists available). Each membership picks,
/// with probability `genre_affinity`, an artist of the fan's genre, otherwise
/// an artist of any genre, with probability proportional to
/// `(degree + 1)^attachment_bias` among artists the fan has not joined yet.
pub fn gen_market(cfg: &MarketGenConfig) -> Result<Market> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let artist_genre: Vec<usize> = (0..cfg.n_artists).map(|a| a % cfg.n_genres).collect();
    // Per-genre trees hold the artists of that genre in ascending id order.
    let genre_members: Vec<Vec<usize>> =
        (0..cfg.n_genres).map(|g| (g..cfg.n_artists).step_by(cfg.n_genres).collect()).collect();
    let slot = |a: usize| (a % cfg.n_genres, a / cfg.n_genres);
    let mut trees: Vec<Fenwick> = genre_members.iter().map(|m| Fenwick::new(vec![1.0; m.len()])).collect();
    let mut degree = vec![0usize; cfg.n_artists];
    let weight = |d: usize| ((d + 1) as f64).powf(cfg.attachment_bias);

    let mut fan_genre = Vec::with_capacity(cfg.n_fans);
    let mut edges = Vec::new();
    let mut joined: Vec<usize> = Vec::new();
    let genre_sizes: Vec<usize> = genre_members.iter().map(Vec::len).collect();
    let mut available = genre_sizes.clone();
    for fan in 0..cfg.n_fans {
        let own = rng.below(cfg.n_genres as u64) as usize;
        fan_genre.push(own);
        let wanted = (rng.poisson(cfg.memberships_per_fan).max(1) as usize).min(cfg.n_artists);
        joined.clear();
        available.copy_from_slice(&genre_sizes);
        while joined.len() < wanted {
            let use_own = rng.bernoulli(cfg.genre_affinity);
            let genre = if use_own && available[own] > 0 {
                own
            } else {
                let totals: Vec<f64> =
                    trees.iter().zip(&available).map(|(t, &left)| if left > 0 { t.total() } else { 0.0 }).collect();
                let mut target = rng.next_f64() * totals.iter().sum::<f64>();
                let mut chosen = None;
                for (g, &t) in totals.iter().enumerate() {
                    if t > 0.0 {
                        chosen = Some(g);
                        if target < t {
                            break;
                        }
                        target -= t;
                    }
                }
                chosen.expect("an artist is always available")
            };
            let tree = &mut trees[genre];
            let idx = tree.find(rng.next_f64() * tree.total());
            let artist = genre_members[genre][idx];
            tree.set(idx, 0.0);
            available[genre] -= 1;
            joined.push(artist);
        }
        for &artist in &joined {
            degree[artist] += 1;
            let (g, idx) = slot(artist);
            trees[g].set(idx, weight(degree[artist]));
            edges.push((fan, artist));
        }
    }

    let graph = BipartiteGraph::with_sizes(cfg.n_fans, cfg.n_artists, &edges);
    let fans = IdInterner::from_labels((0..cfg.n_fans).map(|i| format!("f{i}")));
    let artists = IdInterner::from_labels((0..cfg.n_artists).map(|i| format!("a{i}")));
    Ok(Market { graph, artist_genre, fan_genre, fans, artists })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl PlantedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_in > 0.0 && self.p_in <= 1.0) {
            return Err(Error::InvalidConfig("p_in must lie in (0, 1]".into()));
        }
        if !(self.p_out >= 0.0 && self.p_out < 1.0) {
            return Err(Error::InvalidConfig("p_out must lie in [0, 1)".into()));
        }
        if !(self.p_in > self.p_out) {
            return Err(Error::InvalidConfig("p_in must exceed p_out".into()));
        }
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(Error::InvalidConfig("blocks must be non-empty".into()));
        }
        Ok(())
    }
}

/// Unit-weight planted-partition graph. Pairs `(u, v)`, `u < v`, are visited in
/// ascending order and each draws one Bernoulli trial.
pub fn gen_planted(cfg: &PlantedConfig) -> Result<(WeightedGraph, Partition)> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let block: Vec<usize> = cfg.block_sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let n = block.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if block[u] == block[v] { cfg.p_in } else { cfg.p_out };
            if rng.bernoulli(p) {
                edges.push((u, v, 1.0));
            }
        }
    }
    let g = WeightedGraph::from_sorted_unique(n, edges.into_iter());
    Ok((g, Partition::new(block)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenwick_sampling_respects_weights() {
        let mut f = Fenwick::new(vec![1.0, 0.0, 3.0, 0.0]);
        assert_eq!(f.total(), 4.0);
        assert_eq!(f.find(0.5), 0);
        assert_eq!(f.find(1.0), 2);
        assert_eq!(f.find(3.99), 2);
        f.set(2, 0.0);
        f.set(3, 2.0);
        assert_eq!(f.total(), 3.0);
        assert_eq!(f.find(2.5), 3);
    }

    #[test]
    fn fenwick_prefix_sums_are_exact() {
        let values: Vec<f64> = (0..37).map(|i| (i % 5) as f64).collect();
        let f = Fenwick::new(values.clone());
        assert_eq!(f.total(), values.iter().sum::<f64>());
    }

    #[test]
    fn single_fan_single_membership() {
        let cfg = MarketGenConfig { n_fans: 1, n_artists: 5, memberships_per_fan: 1.0, ..MarketGenConfig::default() };
        let m = gen_market(&cfg).unwrap();
        assert!(m.graph.edge_count() >= 1);
        assert_eq!(m.graph.n_left(), 1);
    }

    #[test]
    fn uniform_choice_is_balanced() {
        let cfg = MarketGenConfig {
            n_fans: 10_000,
            n_artists: 100,
            memberships_per_fan: 5.0,
            attachment_bias: 0.0,
            n_genres: 1,
            genre_affinity: 1.0,
            seed: 5,
        };
        let m = gen_market(&cfg).unwrap();
        let deg = m.graph.right_degrees();
        let (lo, hi) = (*deg.iter().min().unwrap(), *deg.iter().max().unwrap());
        assert!(lo > 0 && (hi as f64) / (lo as f64) < 3.0, "min {lo} max {hi}");
    }

    #[test]
    fn same_seed_same_market() {
        let cfg = MarketGenConfig { n_fans: 2000, n_artists: 200, n_genres: 3, genre_affinity: 0.7, ..MarketGenConfig::default() };
        let a = gen_market(&cfg).unwrap();
        let b = gen_market(&cfg).unwrap();
        assert_eq!(a.graph, b.graph);
        let c = gen_market(&MarketGenConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn genre_affinity_one_keeps_fans_in_genre() {
        let cfg = MarketGenConfig { n_fans: 500, n_artists: 60, n_genres: 3, genre_affinity: 1.0, ..MarketGenConfig::default() };
        let m = gen_market(&cfg).unwrap();
        for fan in 0..cfg.n_fans {
            for &a in m.graph.neighbors_of_left(fan) {
                assert_eq!(m.artist_genre[a as usize], m.fan_genre[fan]);
            }
        }
    }

    #[test]
    fn invalid_market_config() {
        for cfg in [
            MarketGenConfig { n_fans: 0, ..MarketGenConfig::default() },
            MarketGenConfig { attachment_bias: -1.0, ..MarketGenConfig::default() },
            MarketGenConfig { genre_affinity: 1.5, ..MarketGenConfig::default() },
            MarketGenConfig { n_genres: 0, ..MarketGenConfig::default() },
        ] {
            assert!(gen_market(&cfg).is_err());
        }
    }

    #[test]
    fn planted_cliques() {
        let cfg = PlantedConfig { block_sizes: vec![8, 8], p_in: 1.0, p_out: 0.0, seed: 1 };
        let (g, truth) = gen_planted(&cfg).unwrap();
        assert_eq!(g.edge_count(), 2 * 28);
        assert_eq!(truth.assignment(), (0..16).map(|v| v / 8).collect::<Vec<_>>().as_slice());
        g.check_invariants().unwrap();
    }

    #[test]
    fn planted_rejects_equal_probabilities() {
        let cfg = PlantedConfig { block_sizes: vec![5, 5], p_in: 0.3, p_out: 0.3, seed: 0 };
        assert!(matches!(gen_planted(&cfg), Err(Error::InvalidConfig(_))));
    }
}
