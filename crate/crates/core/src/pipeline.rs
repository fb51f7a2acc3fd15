//! The end-to-end segmentation analysis behind `fanseg analyze`.
//!
//! Fan side: project with `fan_min_weight`, run Louvain on the non-isolated
//! fans, and tabulate each community's most-followed artists with dominance
//! metrics. Artist side: project with `artist_min_weight`, run Louvain and
//! weighted PageRank on the non-isolated artists, cut PageRank bands and
//! measure how well the communities coincide with them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::community::{louvain, relabel_by_size, LouvainConfig};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Partition, WeightedGraph};
use crate::io::{write_graphml, write_report, IdInterner};
use crate::projection::{project, ProjectionConfig, Side};
use crate::ranking::{band_sizes, bands_like, pagerank, percentile_partition, rank_order, RankConfig, RankVector};
use crate::report::{
    CommunityEntry, CommunitySummary, ConcordanceReport, GraphSummary, PowerLawReport, PowerLawSummary,
    ProjectionSummary, RankSummary, RunManifest, SegmentationReport, SCHEMA_VERSION,
};
use crate::stats::{
    community_item_counts, degree_histogram, dominance_metrics, fit_power_law, partition_concordance, DegreeHistogram,
    Kmin,
};

/// Analysis parameters. Loaded from TOML; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub schema_version: u32,
    pub delimiter: char,
    pub fan_min_weight: u32,
    pub artist_min_weight: u32,
    pub pivot_degree_cap: usize,
    pub resolution: f64,
    pub damping: f64,
    pub rank_tolerance: f64,
    pub rank_max_iterations: usize,
    /// Rank-band fractions, highest band first. When absent, bands mirror
    /// the artist communities' sizes, ordered by mean PageRank.
    pub band_fractions: Option<Vec<f64>>,
    pub top_k: usize,
    pub dominating_count: usize,
    /// Fixed power-law cutoff; absent selects it by KS distance.
    pub kmin: Option<usize>,
    pub seed: u64,
    /// Shuffle the Louvain sweep order with `seed` instead of ascending ids.
    pub shuffle: bool,
    pub graphml: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            schema_version: 1,
            delimiter: '\t',
            fan_min_weight: 3,
            artist_min_weight: 2,
            pivot_degree_cap: 0,
            resolution: 1.0,
            damping: 0.85,
            rank_tolerance: 1e-10,
            rank_max_iterations: 200,
            band_fractions: None,
            top_k: 10,
            dominating_count: 6,
            kmin: None,
            seed: 0,
            shuffle: false,
            graphml: false,
        }
    }
}

impl AnalyzeConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != 1 {
            return Err(Error::InvalidConfig(format!("unsupported config schema_version {}", self.schema_version)));
        }
        self.louvain().validate()?;
        self.rank().validate()?;
        ProjectionConfig::new(Side::Left, self.fan_min_weight).validate()?;
        ProjectionConfig::new(Side::Right, self.artist_min_weight).validate()?;
        if self.top_k < 1 {
            return Err(Error::InvalidConfig("top_k must be >= 1".into()));
        }
        if let Some(f) = &self.band_fractions {
            band_sizes(0, f)?;
        }
        Ok(())
    }

    pub fn louvain(&self) -> LouvainConfig {
        LouvainConfig { resolution: self.resolution, seed: self.seed, ordered: !self.shuffle, ..LouvainConfig::default() }
    }

    pub fn rank(&self) -> RankConfig {
        RankConfig { damping: self.damping, tolerance: self.rank_tolerance, max_iterations: self.rank_max_iterations }
    }
}

/// Community structure of one projected side.
#[derive(Debug, Clone)]
pub struct SideCommunities {
    pub projection: WeightedGraph,
    /// Original ids of the non-isolated vertices.
    pub core_ids: Vec<usize>,
    /// Communities of the core vertices, relabeled largest first.
    pub core_partition: Option<Partition>,
    pub modularity: Option<f64>,
    pub levels: usize,
}

impl SideCommunities {
    fn detect(b: &BipartiteGraph, side: Side, min_weight: u32, cfg: &AnalyzeConfig) -> Result<Self> {
        let pcfg = ProjectionConfig { side, min_weight, pivot_degree_cap: cfg.pivot_degree_cap };
        let projection = project(b, &pcfg)?;
        let (core, core_ids) = projection.without_isolated();
        info!(
            "{side:?} projection: {} vertices, {} edges, {} non-isolated",
            projection.vertex_count(),
            projection.edge_count(),
            core_ids.len()
        );
        if core.edge_count() == 0 {
            return Ok(Self { projection, core_ids, core_partition: None, modularity: None, levels: 0 });
        }
        let result = louvain(&core, &cfg.louvain())?;
        Ok(Self {
            projection,
            core_ids,
            core_partition: Some(relabel_by_size(&result.partition)),
            modularity: Some(result.modularity),
            levels: result.levels,
        })
    }

    fn summary(&self, dominating_count: usize) -> CommunitySummary {
        let sizes = self.core_partition.as_ref().map(Partition::sizes).unwrap_or_default();
        let core = self.core_ids.len();
        let top: usize = sizes.iter().take(dominating_count).sum();
        CommunitySummary {
            count: sizes.len(),
            singleton_isolates: self.projection.vertex_count() - core,
            modularity: self.modularity,
            levels: self.levels,
            dominating_count,
            dominating_share: if core > 0 { top as f64 / core as f64 } else { 0.0 },
            sizes,
        }
    }

    fn projection_summary(&self, min_weight: u32) -> ProjectionSummary {
        ProjectionSummary {
            min_weight,
            vertices: self.projection.vertex_count(),
            edges: self.projection.edge_count(),
            isolated: self.projection.vertex_count() - self.core_ids.len(),
        }
    }

    /// Partition over every vertex of the side: core communities keep their
    /// ids and all isolated vertices share one extra id.
    fn full_partition(&self) -> Option<Partition> {
        let core = self.core_partition.as_ref()?;
        let k = core.community_count();
        let mut assignment = vec![k; self.projection.vertex_count()];
        for (i, &v) in self.core_ids.iter().enumerate() {
            assignment[v] = core.community_of(i);
        }
        Some(Partition::new(assignment).expect("core ids are dense and the isolated id is used when present"))
    }
}

/// Artist-side rank analysis.
#[derive(Debug, Clone)]
pub struct RankAnalysis {
    pub ranks: RankVector,
    pub bands: Partition,
    pub fractions: Vec<f64>,
}

/// Every intermediate product of a run, plus the report.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: AnalyzeConfig,
    pub fan_degrees: DegreeHistogram,
    pub artist_degrees: DegreeHistogram,
    pub fans: SideCommunities,
    pub artists: SideCommunities,
    pub rank: Option<RankAnalysis>,
    pub report: SegmentationReport,
}

/// Runs the full analysis on an in-memory membership graph.
pub fn analyze(
    b: &BipartiteGraph,
    artist_labels: &IdInterner,
    artist_genres: Option<&[Option<usize>]>,
    cfg: &AnalyzeConfig,
    manifest: RunManifest,
) -> Result<Analysis> {
    cfg.validate()?;
    if b.edge_count() == 0 {
        return Err(Error::InvalidInput("input has no memberships".into()));
    }
    let kmin = cfg.kmin.map_or(Kmin::Auto, Kmin::Fixed);
    let fan_degrees = degree_histogram(b, Side::Left);
    let artist_degrees = degree_histogram(b, Side::Right);
    let powerlaw = PowerLawReport {
        artist_in_degree: fit_power_law(&artist_degrees.samples(), kmin).ok().map(PowerLawSummary::from),
        fan_out_degree: fit_power_law(&fan_degrees.samples(), kmin).ok().map(PowerLawSummary::from),
    };

    let fans = SideCommunities::detect(b, Side::Left, cfg.fan_min_weight, cfg)?;
    let communities = match fans.full_partition() {
        Some(full) => fan_community_entries(b, &full, fans.core_partition.as_ref().unwrap(), artist_labels, artist_genres, cfg)?,
        None => Vec::new(),
    };

    let artists = SideCommunities::detect(b, Side::Right, cfg.artist_min_weight, cfg)?;
    let (rank, concordance, pagerank_summary) = match &artists.core_partition {
        Some(core_partition) => {
            let (core, _) = artists.projection.without_isolated();
            let ranks = pagerank(&core, &cfg.rank())?;
            let fractions = match &cfg.band_fractions {
                Some(f) => f.clone(),
                None => bands_like(core_partition, &ranks.scores),
            };
            let bands = percentile_partition(&ranks, &fractions)?;
            let c = partition_concordance(core_partition, &bands)?;
            let summary = RankSummary { damping: cfg.damping, iterations: ranks.iterations_used, converged: ranks.converged };
            let report = ConcordanceReport {
                agreement: c.agreement,
                nmi: c.nmi,
                bands: fractions.clone(),
                band_sizes: band_sizes(core.vertex_count(), &fractions)?,
            };
            (Some(RankAnalysis { ranks, bands, fractions }), Some(report), Some(summary))
        }
        None => (None, None, None),
    };

    let report = SegmentationReport {
        schema_version: SCHEMA_VERSION,
        manifest,
        graph: GraphSummary {
            fans: b.n_left(),
            artists: b.n_right(),
            memberships: b.edge_count(),
            fan_projection: fans.projection_summary(cfg.fan_min_weight),
            artist_projection: artists.projection_summary(cfg.artist_min_weight),
        },
        communities,
        fan_communities: fans.summary(cfg.dominating_count),
        artist_communities: artists.summary(cfg.dominating_count),
        powerlaw,
        pagerank: pagerank_summary,
        concordance,
        series: Vec::new(),
    };
    Ok(Analysis { config: cfg.clone(), fan_degrees, artist_degrees, fans, artists, rank, report })
}

fn fan_community_entries(
    b: &BipartiteGraph,
    full: &Partition,
    core: &Partition,
    artist_labels: &IdInterner,
    artist_genres: Option<&[Option<usize>]>,
    cfg: &AnalyzeConfig,
) -> Result<Vec<CommunityEntry>> {
    let tables = community_item_counts(b, full, artist_labels)?;
    let sizes = core.sizes();
    let purity = artist_genres.map(|genres| genre_purity(b, full, genres));
    (0..core.community_count())
        .map(|c| {
            let table = &tables[c];
            Ok(CommunityEntry {
                id: c,
                size: sizes[c],
                memberships: table.values().iter().sum::<f64>() as usize,
                top_items: table.truncated(cfg.top_k).rows,
                dominance: if table.is_empty() { None } else { Some(dominance_metrics(table)?) },
                genre_purity: purity.as_ref().map(|p| p[c]),
            })
        })
        .collect()
}

/// Per community, the largest share of its memberships that falls in a
/// single genre. Memberships of artists without a genre count toward the
/// total only.
pub fn genre_purity(b: &BipartiteGraph, fan_partition: &Partition, genres: &[Option<usize>]) -> Vec<f64> {
    let n_genres = genres.iter().flatten().map(|&g| g + 1).max().unwrap_or(0);
    let mut counts = vec![vec![0usize; n_genres]; fan_partition.community_count()];
    let mut totals = vec![0usize; fan_partition.community_count()];
    for fan in 0..b.n_left() {
        let c = fan_partition.community_of(fan);
        for &a in b.neighbors_of_left(fan) {
            totals[c] += 1;
            if let Some(g) = genres.get(a as usize).copied().flatten() {
                counts[c][g] += 1;
            }
        }
    }
    counts
        .iter()
        .zip(&totals)
        .map(|(row, &t)| if t == 0 { 0.0 } else { row.iter().copied().max().unwrap_or(0) as f64 / t as f64 })
        .collect()
}

/// Writes the report, plot series and optional GraphML into `dir`. On
/// failure every file this call created is removed again.
pub fn write_outputs(analysis: &mut Analysis, artist_labels: &IdInterner, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let result = write_outputs_inner(analysis, artist_labels, dir, &mut written);
    if result.is_err() {
        for path in &written {
            let _ = std::fs::remove_file(path);
        }
    }
    result.map(|()| written)
}

fn create(dir: &Path, name: &str, written: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::file(&path, e))?;
    written.push(path);
    Ok(BufWriter::new(file))
}

fn write_outputs_inner(
    analysis: &mut Analysis,
    artist_labels: &IdInterner,
    dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let mut series = Vec::new();

    for (name, hist) in [("degrees_fans.tsv", &analysis.fan_degrees), ("degrees_artists.tsv", &analysis.artist_degrees)] {
        let mut out = create(dir, name, written)?;
        writeln!(out, "degree\tcount")?;
        for (k, c) in &hist.counts {
            writeln!(out, "{k}\t{c}")?;
        }
        out.flush()?;
        series.push(name.to_string());

        let binned = name.replace(".tsv", "_logbin.tsv");
        let mut out = create(dir, &binned, written)?;
        writeln!(out, "bin_start\tbin_end\tdensity")?;
        for (lo, hi, d) in &hist.log_bins {
            writeln!(out, "{lo}\t{hi}\t{d}")?;
        }
        out.flush()?;
        series.push(binned);
    }

    let mut out = create(dir, "community_sizes.tsv", written)?;
    writeln!(out, "community\tsize")?;
    for (c, size) in analysis.report.fan_communities.sizes.iter().enumerate() {
        writeln!(out, "{c}\t{size}")?;
    }
    out.flush()?;
    series.push("community_sizes.tsv".to_string());

    if let (Some(rank), Some(core_partition)) = (&analysis.rank, &analysis.artists.core_partition) {
        let mut out = create(dir, "artist_pagerank.tsv", written)?;
        writeln!(out, "artist\tpagerank\tcommunity\tband")?;
        for v in rank_order(&rank.ranks.scores) {
            let label = artist_labels.label(analysis.artists.core_ids[v]);
            writeln!(
                out,
                "{label}\t{}\t{}\t{}",
                rank.ranks.scores[v],
                core_partition.community_of(v),
                rank.bands.community_of(v)
            )?;
        }
        out.flush()?;
        series.push("artist_pagerank.tsv".to_string());

        if analysis.config.graphml {
            let (core, ids) = analysis.artists.projection.without_isolated();
            let labels = IdInterner::from_labels(ids.iter().map(|&v| artist_labels.label(v).to_owned()));
            let mut out = create(dir, "artist_projection.graphml", written)?;
            write_graphml(&core, &labels, Some(core_partition), &mut out)?;
            out.flush()?;
            series.push("artist_projection.graphml".to_string());
        }
    }

    analysis.report.series = series;
    let mut out = create(dir, "report.json", written)?;
    write_report(&analysis.report, &mut out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = AnalyzeConfig { band_fractions: Some(vec![0.1, 0.9]), kmin: Some(3), ..AnalyzeConfig::default() };
        assert_eq!(AnalyzeConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn config_rejects_unknown_and_invalid() {
        assert!(AnalyzeConfig::from_toml("bogus = 1").is_err());
        assert!(AnalyzeConfig::from_toml("fan_min_weight = 0").is_err());
        assert!(AnalyzeConfig::from_toml("damping = 1.0").is_err());
        assert!(AnalyzeConfig::from_toml("band_fractions = [0.5, 0.2]").is_err());
        assert!(AnalyzeConfig::from_toml("schema_version = 2").is_err());
        assert_eq!(AnalyzeConfig::from_toml("").unwrap(), AnalyzeConfig::default());
    }

    #[test]
    fn empty_graph_is_rejected() {
        let b = BipartiteGraph::from_edges(&[]);
        let r = analyze(&b, &IdInterner::new(), None, &AnalyzeConfig::default(), RunManifest::default());
        assert!(r.is_err());
    }

    #[test]
    fn tiny_market_without_fan_edges() {
        // No pair of fans shares 3 artists: fan side has no communities.
        let b = BipartiteGraph::from_edges(&[(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)]);
        let artists = IdInterner::from_labels(["a1", "a2"]);
        let a = analyze(&b, &artists, None, &AnalyzeConfig::default(), RunManifest::default()).unwrap();
        assert!(a.report.communities.is_empty());
        assert_eq!(a.report.fan_communities.singleton_isolates, 3);
        // Artists share two fans, enough for min weight 2.
        assert_eq!(a.report.graph.artist_projection.edges, 1);
        assert_eq!(a.report.concordance.as_ref().unwrap().agreement, 1.0);
    }

    #[test]
    fn purity_counts_memberships() {
        let b = BipartiteGraph::from_edges(&[(0, 0), (0, 1), (1, 2)]);
        let p = Partition::new(vec![0, 1]).unwrap();
        let purity = genre_purity(&b, &p, &[Some(0), Some(1), Some(1)]);
        assert_eq!(purity, vec![0.5, 1.0]);
    }
}
