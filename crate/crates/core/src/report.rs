//! The segmentation report document.
//!
//! Serialized as a single JSON object. `schema_version` is bumped whenever a
//! field changes meaning or disappears.

use serde::{Deserialize, Serialize};

use crate::io::LabeledRow;
use crate::stats::{DominanceMetrics, PowerLawFit};

pub const SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub toolkit_version: String,
    pub input: Option<String>,
    pub genres: Option<String>,
    pub output: Option<String>,
    /// Fully resolved parameters.
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSummary {
    pub min_weight: u32,
    pub vertices: usize,
    pub edges: usize,
    pub isolated: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub fans: usize,
    pub artists: usize,
    pub memberships: usize,
    pub fan_projection: ProjectionSummary,
    pub artist_projection: ProjectionSummary,
}

/// One fan community: its size, most-followed artists and concentration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityEntry {
    pub id: usize,
    pub size: usize,
    /// Memberships held by the community's fans.
    pub memberships: usize,
    pub top_items: Vec<LabeledRow>,
    pub dominance: Option<DominanceMetrics>,
    /// Largest single-genre share of the memberships, when genres are known.
    pub genre_purity: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    /// Communities among non-isolated vertices.
    pub count: usize,
    /// Isolated vertices, each its own singleton and not listed as a community.
    pub singleton_isolates: usize,
    pub modularity: Option<f64>,
    pub levels: usize,
    /// Share of non-isolated vertices held by the `dominating_count` largest
    /// communities.
    pub dominating_count: usize,
    pub dominating_share: f64,
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSummary {
    pub alpha: f64,
    pub kmin: usize,
    pub ks: f64,
    pub n_tail: usize,
}

impl From<PowerLawFit> for PowerLawSummary {
    fn from(f: PowerLawFit) -> Self {
        Self { alpha: f.alpha, kmin: f.kmin, ks: f.ks_statistic, n_tail: f.n_tail }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerLawReport {
    pub artist_in_degree: Option<PowerLawSummary>,
    pub fan_out_degree: Option<PowerLawSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcordanceReport {
    pub agreement: f64,
    pub nmi: f64,
    /// Rank-band fractions, highest-ranked band first.
    pub bands: Vec<f64>,
    pub band_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub damping: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub graph: GraphSummary,
    /// Fan communities, largest first.
    pub communities: Vec<CommunityEntry>,
    pub fan_communities: CommunitySummary,
    pub artist_communities: CommunitySummary,
    pub powerlaw: PowerLawReport,
    pub pagerank: Option<RankSummary>,
    pub concordance: Option<ConcordanceReport>,
    /// Plot-series files written next to the report.
    pub series: Vec<String>,
}

impl Default for SegmentationReport {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            manifest: RunManifest::default(),
            graph: GraphSummary::default(),
            communities: Vec::new(),
            fan_communities: CommunitySummary::default(),
            artist_communities: CommunitySummary::default(),
            powerlaw: PowerLawReport::default(),
            pagerank: None,
            concordance: None,
            series: Vec::new(),
        }
    }
}
