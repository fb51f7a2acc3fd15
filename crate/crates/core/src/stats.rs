//! Degree distributions, power-law fits, community profiles, dominance and
//! partition concordance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Partition};
use crate::io::{IdInterner, LabeledTable};
use crate::projection::Side;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub side: Side,
    /// `(degree, count)` ascending by degree, degrees >= 1 only.
    pub counts: Vec<(usize, usize)>,
    pub zero_degree: usize,
    /// Log-binned density for plotting: `(bin lower edge, bin upper edge
    /// exclusive, vertices per unit degree)` with bin ratio 2.
    pub log_bins: Vec<(usize, usize, f64)>,
}

impl DegreeHistogram {
    pub fn from_degrees(side: Side, degrees: &[usize]) -> Self {
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        let mut zero_degree = 0;
        for &d in degrees {
            if d == 0 {
                zero_degree += 1;
            } else {
                *map.entry(d).or_insert(0) += 1;
            }
        }
        let counts: Vec<(usize, usize)> = map.into_iter().collect();
        let log_bins = log_bin(&counts);
        Self { side, counts, zero_degree, log_bins }
    }

    /// Number of vertices with degree >= 1.
    pub fn vertex_count(&self) -> usize {
        self.counts.iter().map(|&(_, c)| c).sum()
    }

    /// Expands back into one degree per (non-isolated) vertex, ascending.
    pub fn samples(&self) -> Vec<usize> {
        self.counts.iter().flat_map(|&(k, c)| std::iter::repeat_n(k, c)).collect()
    }
}

fn log_bin(counts: &[(usize, usize)]) -> Vec<(usize, usize, f64)> {
    let Some(&(max, _)) = counts.last() else {
        return Vec::new();
    };
    let mut bins = Vec::new();
    let mut lo = 1usize;
    let mut i = 0;
    while lo <= max {
        let hi = lo * 2;
        let mut total = 0;
        while i < counts.len() && counts[i].0 < hi {
            total += counts[i].1;
            i += 1;
        }
        bins.push((lo, hi, total as f64 / (hi - lo) as f64));
        lo = hi;
    }
    bins
}

/// Fan out-degrees (`Side::Left`) or artist in-degrees (`Side::Right`).
pub fn degree_histogram(b: &BipartiteGraph, side: Side) -> DegreeHistogram {
    let degrees = match side {
        Side::Left => b.left_degrees(),
        Side::Right => b.right_degrees(),
    };
    DegreeHistogram::from_degrees(side, &degrees)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub kmin: usize,
    pub ks_statistic: f64,
    pub n_tail: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kmin {
    Fixed(usize),
    /// Choose the cutoff with the smallest KS distance.
    Auto,
}

/// Tail size the automatic cutoff keeps when the sample allows it.
pub const MIN_AUTO_TAIL: usize = 50;

/// Hurwitz zeta `ζ(s, q) = Σ_{k>=0} (q + k)^-s` for `s > 1`, `q > 0`, by
/// direct summation of the first terms plus an Euler-Maclaurin tail.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const N: usize = 12;
    // B_2j / (2j)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + N as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // Rising factorial s (s+1) ... (s+2j-2) times a^(-s-2j+1).
    let mut factor = s * a.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * factor;
        let two_j = 2.0 * (j as f64 + 1.0);
        factor *= (s + two_j - 1.0) * (s + two_j) / (a * a);
    }
    sum
}

/// Discrete power-law estimate `α = 1 + n / Σ ln(k_i / (kmin - 1/2))` over
/// the samples `>= kmin`, with the KS distance between the empirical tail
/// CDF and the fitted discrete power law.
pub fn fit_power_law(degrees: &[usize], kmin: Kmin) -> Result<PowerLawFit> {
    let mut sorted: Vec<usize> = degrees.iter().copied().filter(|&k| k >= 1).collect();
    sorted.sort_unstable();
    if sorted.len() >= 2 && sorted.first() == sorted.last() {
        return Err(Error::DegenerateSample(format!("all {} samples equal {}", sorted.len(), sorted[0])));
    }
    match kmin {
        Kmin::Fixed(k) => fit_tail(&sorted, k.max(1)),
        Kmin::Auto => {
            let mut candidates: Vec<usize> = sorted.clone();
            candidates.dedup();
            let want_tail = if sorted.len() >= MIN_AUTO_TAIL { MIN_AUTO_TAIL } else { 2 };
            let mut best: Option<PowerLawFit> = None;
            for k in candidates {
                let start = sorted.partition_point(|&x| x < k);
                let tail = &sorted[start..];
                if tail.len() < want_tail || tail.first() == tail.last() {
                    continue;
                }
                let fit = fit_tail(&sorted, k)?;
                if best.is_none_or(|b| fit.ks_statistic < b.ks_statistic) {
                    best = Some(fit);
                }
            }
            best.ok_or_else(|| Error::DegenerateSample("no cutoff leaves a usable tail".into()))
        }
    }
}

fn fit_tail(sorted: &[usize], kmin: usize) -> Result<PowerLawFit> {
    let start = sorted.partition_point(|&x| x < kmin);
    let tail = &sorted[start..];
    let n = tail.len();
    if n < 2 {
        return Err(Error::DegenerateSample(format!("{n} sample(s) at or above kmin = {kmin}")));
    }
    let shift = kmin as f64 - 0.5;
    let log_sum: f64 = tail.iter().map(|&k| (k as f64 / shift).ln()).sum();
    if !(log_sum > 0.0) {
        return Err(Error::DegenerateSample("zero log-likelihood spread".into()));
    }
    let alpha = 1.0 + n as f64 / log_sum;

    let z = hurwitz_zeta(alpha, kmin as f64);
    let fitted_cdf = |k: usize| 1.0 - hurwitz_zeta(alpha, k as f64 + 1.0) / z;
    let mut ks: f64 = 0.0;
    let mut i = 0;
    let mut below = 0.0;
    while i < n {
        let k = tail[i];
        let mut j = i;
        while j < n && tail[j] == k {
            j += 1;
        }
        // Just before the jump at k the empirical CDF still equals `below`.
        if k > kmin {
            ks = ks.max((below - fitted_cdf(k - 1)).abs());
        }
        let emp = j as f64 / n as f64;
        ks = ks.max((emp - fitted_cdf(k)).abs());
        below = emp;
        i = j;
    }
    Ok(PowerLawFit { alpha, kmin, ks_statistic: ks, n_tail: n })
}

/// `(community id, size)` by size descending, ties by id.
pub fn community_sizes(p: &Partition) -> Vec<(usize, usize)> {
    let mut sizes: Vec<(usize, usize)> = p.sizes().into_iter().enumerate().collect();
    sizes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    sizes
}

/// For every fan community, the number of its fans following each artist,
/// as a full table.
pub fn community_item_counts(
    b: &BipartiteGraph,
    fan_partition: &Partition,
    artists: &IdInterner,
) -> Result<Vec<LabeledTable>> {
    if fan_partition.len() != b.n_left() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} fans, graph has {}",
            fan_partition.len(),
            b.n_left()
        )));
    }
    let mut counts: Vec<BTreeMap<u32, usize>> = vec![BTreeMap::new(); fan_partition.community_count()];
    for fan in 0..b.n_left() {
        let c = fan_partition.community_of(fan);
        for &a in b.neighbors_of_left(fan) {
            *counts[c].entry(a).or_insert(0) += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|m| LabeledTable::new(m.into_iter().map(|(a, n)| (artists.label(a as usize).to_owned(), n as f64))))
        .collect())
}

/// Top `k` artists per fan community.
pub fn top_items_per_community(
    b: &BipartiteGraph,
    fan_partition: &Partition,
    artists: &IdInterner,
    k: usize,
) -> Result<Vec<LabeledTable>> {
    if k < 1 {
        return Err(Error::InvalidConfig("top-k must be >= 1".into()));
    }
    Ok(community_item_counts(b, fan_partition, artists)?.into_iter().map(|t| t.truncated(k)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceMetrics {
    pub top1_share: f64,
    pub top1_over_top10: f64,
    pub gini: f64,
}

pub fn dominance_metrics(table: &LabeledTable) -> Result<DominanceMetrics> {
    let values = table.values();
    if values.is_empty() {
        return Err(Error::InvalidInput("dominance of an empty table".into()));
    }
    let total: f64 = values.iter().sum();
    let top10: f64 = values.iter().take(10).sum();
    Ok(DominanceMetrics { top1_share: values[0] / total, top1_over_top10: values[0] / top10, gini: gini(&values) })
}

/// Gini coefficient `Σ_i Σ_j |x_i - x_j| / (2 n² mean)`. Summed over the
/// gaps of the sorted values, so equal values give exactly 0.
pub fn gini(values: &[f64]) -> f64 {
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n < 2 || total == 0.0 {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let spread: f64 = (1..n).map(|k| (k * (n - k)) as f64 * (sorted[k] - sorted[k - 1])).sum();
    spread / (n as f64 * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceResult {
    /// Fraction of vertices on matched community/band pairs under the best
    /// one-to-one matching.
    pub agreement: f64,
    pub nmi: f64,
}

pub fn contingency(a: &Partition, b: &Partition) -> Vec<Vec<usize>> {
    let mut table = vec![vec![0usize; b.community_count()]; a.community_count()];
    for (&x, &y) in a.assignment().iter().zip(b.assignment()) {
        table[x][y] += 1;
    }
    table
}

pub fn partition_concordance(a: &Partition, b: &Partition) -> Result<ConcordanceResult> {
    if a.len() != b.len() {
        return Err(Error::InvalidPartition(format!("partitions cover {} and {} vertices", a.len(), b.len())));
    }
    let n = a.len();
    if n == 0 {
        return Ok(ConcordanceResult { agreement: 1.0, nmi: 1.0 });
    }
    let table = contingency(a, b);
    let matched = max_weight_matching(&table);
    Ok(ConcordanceResult { agreement: matched as f64 / n as f64, nmi: nmi_from_table(&table, n) })
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts.filter(|&c| c > 0).map(|c| {
        let p = c as f64 / n;
        -p * p.ln()
    }).sum()
}

/// Mutual information normalized by the arithmetic mean of the two entropies.
fn nmi_from_table(table: &[Vec<usize>], n: usize) -> f64 {
    let nf = n as f64;
    let rows: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<usize> = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let h_a = entropy(rows.iter().copied(), nf);
    let h_b = entropy(cols.iter().copied(), nf);
    if h_a + h_b == 0.0 {
        return 1.0;
    }
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (c * nf / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    (mi / (0.5 * (h_a + h_b))).clamp(0.0, 1.0)
}

/// Maximum total weight of a one-to-one row/column matching, by the
/// Hungarian method with potentials on the negated (cost) matrix.
pub fn max_weight_matching(table: &[Vec<usize>]) -> usize {
    if table.is_empty() || table[0].is_empty() {
        return 0;
    }
    // The algorithm needs rows <= cols.
    let transposed;
    let table: &[Vec<usize>] = if table.len() > table[0].len() {
        transposed = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).collect()).collect::<Vec<Vec<usize>>>();
        &transposed
    } else {
        table
    };
    let rows = table.len();
    let cols = table[0].len();
    let max = table.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |i: usize, j: usize| max - table[i][j] as i64;

    // 1-based arrays; column 0 is the virtual start.
    let mut u = vec![0i64; rows + 1];
    let mut v = vec![0i64; cols + 1];
    let mut matched_row = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];
    for i in 1..=rows {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut min_v = vec![i64::MAX; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=cols {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < min_v[j] {
                        min_v[j] = cur;
                        way[j] = j0;
                    }
                    if min_v[j] < delta {
                        delta = min_v[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_v[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=cols).filter(|&j| matched_row[j] != 0).map(|j| table[matched_row[j] - 1][j - 1]).sum()
}
