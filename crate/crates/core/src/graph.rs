//! Immutable graph types shared by every stage.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense vertex index (`0..n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i)
    }
}

/// Fan→artist membership graph. Left vertices are fans, right vertices are
/// artists; edges only run left→right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl BipartiteGraph {
    /// Builds from `(left, right)` pairs. Duplicate memberships collapse to one.
    pub fn from_edges(edges: &[(usize, usize)]) -> Self {
        let n_left = edges.iter().map(|&(l, _)| l + 1).max().unwrap_or(0);
        let n_right = edges.iter().map(|&(_, r)| r + 1).max().unwrap_or(0);
        Self::with_sizes(n_left, n_right, edges)
    }

    /// Builds with explicit side sizes so trailing vertices without memberships
    /// are kept. Sizes grow to cover every referenced id.
    pub fn with_sizes(n_left: usize, n_right: usize, edges: &[(usize, usize)]) -> Self {
        let n_left = edges.iter().map(|&(l, _)| l + 1).max().unwrap_or(0).max(n_left);
        let n_right = edges.iter().map(|&(_, r)| r + 1).max().unwrap_or(0).max(n_right);
        assert!(n_right <= u32::MAX as usize, "right side exceeds u32 ids");

        let mut counts = vec![0usize; n_left + 1];
        for &(l, _) in edges {
            counts[l + 1] += 1;
        }
        for i in 0..n_left {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut scratch = vec![0u32; edges.len()];
        for &(l, r) in edges {
            scratch[cursor[l]] = r as u32;
            cursor[l] += 1;
        }

        let mut offsets = Vec::with_capacity(n_left + 1);
        let mut targets = Vec::with_capacity(edges.len());
        offsets.push(0);
        for l in 0..n_left {
            let row = &mut scratch[counts[l]..counts[l + 1]];
            row.sort_unstable();
            let mut last = None;
            for &r in row.iter() {
                if last != Some(r) {
                    targets.push(r);
                    last = Some(r);
                }
            }
            offsets.push(targets.len());
        }
        Self { n_left, n_right, offsets, targets }
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Sorted artists joined by fan `left`.
    pub fn neighbors_of_left(&self, left: usize) -> &[u32] {
        &self.targets[self.offsets[left]..self.offsets[left + 1]]
    }

    pub fn left_degree(&self, left: usize) -> usize {
        self.offsets[left + 1] - self.offsets[left]
    }

    pub fn right_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n_right];
        for &r in &self.targets {
            deg[r as usize] += 1;
        }
        deg
    }

    pub fn left_degrees(&self) -> Vec<usize> {
        (0..self.n_left).map(|l| self.left_degree(l)).collect()
    }

    /// The same memberships seen from the artist side: for every right vertex,
    /// its sorted fans.
    pub fn transpose(&self) -> BipartiteGraph {
        let mut counts = vec![0usize; self.n_right + 1];
        for &r in &self.targets {
            counts[r as usize + 1] += 1;
        }
        for i in 0..self.n_right {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut targets = vec![0u32; self.targets.len()];
        // Rows come out sorted because fans are visited in ascending order.
        for l in 0..self.n_left {
            for &r in self.neighbors_of_left(l) {
                targets[cursor[r as usize]] = l as u32;
                cursor[r as usize] += 1;
            }
        }
        BipartiteGraph { n_left: self.n_right, n_right: self.n_left, offsets: counts, targets }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_left).flat_map(move |l| self.neighbors_of_left(l).iter().map(move |&r| (l, r as usize)))
    }
}

/// Undirected weighted graph in compressed adjacency form. Every edge is stored
/// under both endpoints with the same weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    total_weight: f64,
}

impl WeightedGraph {
    /// Builds from `(u, v, w)` triples. Duplicate pairs (in either orientation)
    /// have their weights summed.
    pub fn from_edges(edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0);
        Self::with_vertex_count(n, edges)
    }

    /// Like [`WeightedGraph::from_edges`] but keeps `n` vertices even when the
    /// highest ids are isolated.
    pub fn with_vertex_count(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(u, v, w) in edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { u, v, weight: w });
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        let n = merged.keys().map(|&(_, v)| v + 1).max().unwrap_or(0).max(n);
        Ok(Self::from_sorted_unique(n, merged.into_iter().map(|((u, v), w)| (u, v, w))))
    }

    /// Builds from undirected edges with `u < v`, each pair given once, in
    /// ascending `(u, v)` order. Callers guarantee the preconditions.
    pub(crate) fn from_sorted_unique(n: usize, edges: impl Iterator<Item = (usize, usize, f64)>) -> Self {
        let edges: Vec<(usize, usize, f64)> = edges.collect();
        let mut degree = vec![0usize; n + 1];
        for &(u, v, _) in &edges {
            degree[u + 1] += 1;
            degree[v + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n]];
        let mut weights = vec![0f64; offsets[n]];
        // Ascending (u, v) order fills each row in ascending neighbor order:
        // lower neighbors arrive as `v` entries of earlier `u`s first.
        for &(u, v, w) in &edges {
            neighbors[cursor[v]] = u as u32;
            weights[cursor[v]] = w;
            cursor[v] += 1;
        }
        for &(u, v, w) in &edges {
            neighbors[cursor[u]] = v as u32;
            weights[cursor[u]] = w;
            cursor[u] += 1;
        }
        let total_weight = weights.iter().sum();
        Self { offsets, neighbors, weights, total_weight }
    }

    /// Assembles a graph from per-vertex sorted neighbor rows already in
    /// symmetric form.
    pub(crate) fn from_csr(offsets: Vec<usize>, neighbors: Vec<u32>, weights: Vec<f64>) -> Self {
        let total_weight = weights.iter().sum();
        Self { offsets, neighbors, weights, total_weight }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Sum of all stored weights (2m).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn edge_weights(&self, v: usize) -> &[f64] {
        &self.weights[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbors_weighted(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbors(v).iter().zip(self.edge_weights(v)).map(|(&u, &w)| (u as usize, w))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn weighted_degree(&self, v: NodeId) -> Result<f64> {
        let n = self.vertex_count();
        if v.0 >= n {
            return Err(Error::VertexOutOfRange { index: v.0, n });
        }
        Ok(self.edge_weights(v.0).iter().sum())
    }

    pub fn weighted_degrees(&self) -> Vec<f64> {
        (0..self.vertex_count()).map(|v| self.edge_weights(v).iter().sum()).collect()
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.degree(v) == 0
    }

    pub fn isolated_count(&self) -> usize {
        (0..self.vertex_count()).filter(|&v| self.is_isolated(v)).count()
    }

    /// Undirected edges as `(u, v, w)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.vertex_count())
            .flat_map(move |u| self.neighbors_weighted(u).filter(move |&(v, _)| v > u).map(move |(v, w)| (u, v, w)))
    }

    /// Induced subgraph on the non-isolated vertices. Returns the subgraph and
    /// the original id of each of its vertices.
    pub fn without_isolated(&self) -> (WeightedGraph, Vec<usize>) {
        let keep: Vec<usize> = (0..self.vertex_count()).filter(|&v| !self.is_isolated(v)).collect();
        let mut new_id = vec![u32::MAX; self.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            new_id[v] = i as u32;
        }
        let mut offsets = Vec::with_capacity(keep.len() + 1);
        offsets.push(0);
        let mut neighbors = Vec::with_capacity(self.neighbors.len());
        let mut weights = Vec::with_capacity(self.weights.len());
        for &v in &keep {
            for (u, w) in self.neighbors_weighted(v) {
                neighbors.push(new_id[u]);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }
        (WeightedGraph::from_csr(offsets, neighbors, weights), keep)
    }

    /// Full scan of the structural invariants. Used by tests and debug checks.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.vertex_count();
        let bad = |m: String| Err(Error::InvalidInput(m));
        for u in 0..n {
            let row = self.neighbors(u);
            for pair in row.windows(2) {
                if pair[0] >= pair[1] {
                    return bad(format!("row {u} not strictly increasing"));
                }
            }
            for (v, w) in self.neighbors_weighted(u) {
                if v == u {
                    return bad(format!("self-loop at {u}"));
                }
                if !(w > 0.0) {
                    return bad(format!("non-positive weight on ({u}, {v})"));
                }
                match self.neighbors(v).binary_search(&(u as u32)) {
                    Ok(pos) if self.edge_weights(v)[pos] == w => {}
                    _ => return bad(format!("asymmetric edge ({u}, {v})")),
                }
            }
        }
        let sum: f64 = self.weights.iter().sum();
        if sum != self.total_weight {
            return bad("total weight mismatch".into());
        }
        Ok(())
    }
}

/// Dense community assignment: ids `0..k`, every id used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validates that ids are dense and all used.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        let k = assignment.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut used = vec![false; k];
        for &c in &assignment {
            used[c] = true;
        }
        if let Some(missing) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidPartition(format!("community id {missing} is unused")));
        }
        Ok(Self { assignment, k })
    }

    /// Accepts arbitrary labels and renumbers them densely in first-appearance order.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        let k = map.len();
        Self { assignment, k }
    }

    pub fn singletons(n: usize) -> Self {
        Self { assignment: (0..n).collect(), k: n }
    }

    pub fn all_in_one(n: usize) -> Self {
        Self { assignment: vec![0; n], k: usize::from(n > 0) }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_of(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn community_count(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Size of every community, indexed by id.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Members of every community, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (v, &c) in self.assignment.iter().enumerate() {
            members[c].push(v);
        }
        members
    }

    pub fn into_assignment(self) -> Vec<usize> {
        self.assignment
    }
}
