//! One-mode projection of a membership graph: same-side vertices are linked by
//! the number of opposite-side neighbors they share, and links lighter than a
//! threshold are dropped.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Fans.
    Left,
    /// Artists.
    Right,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" | "fans" => Ok(Side::Left),
            "right" | "artists" => Ok(Side::Right),
            other => Err(Error::InvalidConfig(format!("unknown side {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    pub side: Side,
    /// Edges with fewer shared neighbors than this are dropped; equal is kept.
    pub min_weight: u32,
    /// Skip pivots with more than this many members. 0 disables the cap.
    pub pivot_degree_cap: usize,
}

impl ProjectionConfig {
    pub fn new(side: Side, min_weight: u32) -> Self {
        Self { side, min_weight, pivot_degree_cap: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_weight < 1 {
            return Err(Error::InvalidConfig("min_weight must be >= 1".into()));
        }
        Ok(())
    }
}

const ROW_CHUNK: usize = 256;

/// Projects `b` onto `cfg.side`. Every vertex of the projected side is kept,
/// isolated or not.
///
/// For each vertex `u` the shared-neighbor counts with all `v > u` are
/// accumulated in a dense per-worker counter by walking `u`'s pivots and
/// their members. Total work is the sum of squared pivot degrees; memory
/// stays proportional to the surviving output. Rows are computed in parallel
/// chunks and concatenated in vertex order, so the result does not depend on
/// the worker count.
pub fn project(b: &BipartiteGraph, cfg: &ProjectionConfig) -> Result<WeightedGraph> {
    cfg.validate()?;
    let (rows_of, pivots) = match cfg.side {
        Side::Left => (b.clone(), b.transpose()),
        Side::Right => (b.transpose(), b.clone()),
    };
    let n = rows_of.n_left();

    let skipped: Vec<bool> = (0..pivots.n_left())
        .map(|p| cfg.pivot_degree_cap > 0 && pivots.left_degree(p) > cfg.pivot_degree_cap)
        .collect();
    let n_skipped = skipped.iter().filter(|&&s| s).count();
    if n_skipped > 0 {
        warn!(
            "projection: skipping {n_skipped} pivot(s) with degree above {}; result is not exact",
            cfg.pivot_degree_cap
        );
    }

    let min_weight = cfg.min_weight;
    let chunks: Vec<Vec<Vec<(u32, u32)>>> = (0..n.div_ceil(ROW_CHUNK))
        .into_par_iter()
        .map_init(
            || (vec![0u32; n], Vec::<u32>::new()),
            |(acc, touched), chunk| {
                let lo = chunk * ROW_CHUNK;
                let hi = (lo + ROW_CHUNK).min(n);
                (lo..hi)
                    .map(|u| {
                        for &p in rows_of.neighbors_of_left(u) {
                            if skipped[p as usize] {
                                continue;
                            }
                            let members = pivots.neighbors_of_left(p as usize);
                            let start = members.partition_point(|&v| v as usize <= u);
                            for &v in &members[start..] {
                                let slot = &mut acc[v as usize];
                                if *slot == 0 {
                                    touched.push(v);
                                }
                                *slot += 1;
                            }
                        }
                        touched.sort_unstable();
                        let row: Vec<(u32, u32)> = touched
                            .iter()
                            .filter_map(|&v| {
                                let w = acc[v as usize];
                                acc[v as usize] = 0;
                                (w >= min_weight).then_some((v, w))
                            })
                            .collect();
                        touched.clear();
                        row
                    })
                    .collect()
            },
        )
        .collect();

    Ok(symmetric_from_upper(n, chunks.into_iter().flatten()))
}

/// Builds the symmetric compressed form from upper-triangle rows (`v > u`,
/// ascending within each row), given in vertex order.
fn symmetric_from_upper(n: usize, rows: impl Iterator<Item = Vec<(u32, u32)>>) -> WeightedGraph {
    let upper: Vec<Vec<(u32, u32)>> = rows.collect();
    let mut degree = vec![0usize; n + 1];
    for (u, row) in upper.iter().enumerate() {
        degree[u + 1] += row.len();
        for &(v, _) in row {
            degree[v as usize + 1] += 1;
        }
    }
    for i in 0..n {
        degree[i + 1] += degree[i];
    }
    let offsets = degree;
    let mut cursor = offsets.clone();
    let mut neighbors = vec![0u32; offsets[n]];
    let mut weights = vec![0f64; offsets[n]];
    // Lower-triangle entries first (ascending source), then each row's own
    // upper entries; this keeps every row sorted.
    for (u, row) in upper.iter().enumerate() {
        for &(v, w) in row {
            let slot = cursor[v as usize];
            neighbors[slot] = u as u32;
            weights[slot] = w as f64;
            cursor[v as usize] += 1;
        }
    }
    for (u, row) in upper.iter().enumerate() {
        for &(v, w) in row {
            neighbors[cursor[u]] = v;
            weights[cursor[u]] = w as f64;
            cursor[u] += 1;
        }
    }
    WeightedGraph::from_csr(offsets, neighbors, weights)
}
