//! Market-segmentability analytics over bipartite fan/artist membership networks.
//!
//! The pipeline:
//!
//! 1. ingest a fan→artist membership edge list ([`io`]),
//! 2. project it onto fans or artists with a minimum shared-neighbor threshold ([`projection`]),
//! 3. detect communities with multi-level Louvain ([`community`]),
//! 4. rank vertices with weighted PageRank and cut rank bands ([`ranking`]),
//! 5. summarize degree distributions, community profiles, dominance and
//!    community/rank concordance ([`stats`]).
//!
//! [`synth`] provides deterministic stand-in markets and planted-partition graphs,
//! [`pipeline`] wires everything into the `analyze` report, and [`cli`] backs the
//! `fanseg` binary.

pub mod cli;
pub mod community;
pub mod error;
pub mod graph;
pub mod io;
pub mod pipeline;
pub mod projection;
pub mod ranking;
pub mod report;
pub mod rng;
pub mod stats;
pub mod synth;

pub use community::{louvain, modularity, relabel_by_size, LouvainConfig, LouvainResult};
pub use error::{Error, Result};
pub use graph::{BipartiteGraph, NodeId, Partition, WeightedGraph};
pub use projection::{project, ProjectionConfig, Side};
pub use ranking::{pagerank, percentile_partition, RankConfig, RankVector};
