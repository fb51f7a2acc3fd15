//! Command-line front end for the `fanseg` binary.
//!
//! Exit codes: 0 success, 1 I/O or data error, 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::community::{louvain, relabel_by_size, LouvainConfig};
use crate::error::{Error, Result};
use crate::io::{
    read_bipartite_edges, read_genre_map, read_weighted_edges, write_bipartite_edges, write_genre_map, write_graphml,
    write_weighted_edges, IdInterner,
};
use crate::pipeline::{analyze, write_outputs, AnalyzeConfig};
use crate::projection::{project, ProjectionConfig, Side};
use crate::ranking::{pagerank, rank_order, RankConfig};
use crate::report::{RunManifest, SegmentationReport};
use crate::stats::{degree_histogram, fit_power_law, Kmin};
use crate::synth::{gen_market, gen_planted, MarketGenConfig, PlantedConfig};

pub const THREADS_ENV: &str = "FANSEG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fanseg", version, about = "Market-segmentability analytics for fan/artist networks")]
pub struct Cli {
    /// Worker threads for projection and PageRank.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 1)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic data.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Project a fan/artist membership file onto one side.
    Project(ProjectArgs),
    /// Louvain communities of a weighted edge file.
    Communities(CommunitiesArgs),
    /// Weighted PageRank of a weighted edge file.
    Pagerank(PagerankArgs),
    /// Degree histogram and power-law fit of one side of a membership file.
    Degrees(DegreesArgs),
    /// Full segmentation analysis of a membership file.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Preferential-attachment fan/artist market.
    Market(MarketArgs),
    /// Planted-partition weighted graph.
    Planted(PlantedArgs),
}

#[derive(Debug, Args)]
pub struct MarketArgs {
    #[arg(long, default_value_t = 10_000)]
    pub fans: usize,
    #[arg(long, default_value_t = 1_000)]
    pub artists: usize,
    /// Mean memberships per fan.
    #[arg(long, default_value_t = 5.0)]
    pub memberships: f64,
    #[arg(long, default_value_t = 1.0)]
    pub bias: f64,
    #[arg(long, default_value_t = 1)]
    pub genres: usize,
    #[arg(long, default_value_t = 1.0)]
    pub affinity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Membership edge file to write.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Genre map file to write (`<artist>\t<genre>`).
    #[arg(long)]
    pub genres_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlantedArgs {
    /// Comma-separated block sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub blocks: Vec<usize>,
    #[arg(long)]
    pub p_in: f64,
    #[arg(long)]
    pub p_out: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Ground-truth file to write (`<vertex>\t<block>`).
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// Membership edge file.
    pub input: PathBuf,
    #[arg(long, value_parser = parse_side)]
    pub side: Side,
    #[arg(long, default_value_t = 1)]
    pub min_weight: u32,
    /// Skip pivots above this degree (0 = exact).
    #[arg(long, default_value_t = 0)]
    pub pivot_cap: usize,
    #[arg(long, default_value_t = '\t')]
    pub delimiter: char,
    /// Weighted edge file to write.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CommunitiesArgs {
    /// Weighted edge file.
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub min_gain: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shuffle the sweep order with the seed.
    #[arg(long)]
    pub shuffle: bool,
    #[arg(long, default_value_t = '\t')]
    pub delimiter: char,
    /// Partition file to write (`<vertex>\t<community>`).
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub graphml: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PagerankArgs {
    /// Weighted edge file.
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.85)]
    pub damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = '\t')]
    pub delimiter: char,
    /// Score file to write (`<vertex>\t<score>`, highest first).
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DegreesArgs {
    /// Membership edge file.
    pub input: PathBuf,
    #[arg(long, value_parser = parse_side)]
    pub side: Side,
    /// Fixed power-law cutoff; chosen automatically when absent.
    #[arg(long)]
    pub kmin: Option<usize>,
    #[arg(long, default_value_t = '\t')]
    pub delimiter: char,
    /// Histogram file to write (`<degree>\t<count>`).
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Membership edge file. Optional with --replay.
    pub input: Option<PathBuf>,
    /// TOML configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Re-run the manifest embedded in an earlier report.json.
    #[arg(long, conflicts_with = "config")]
    pub replay: Option<PathBuf>,
    /// Artist genre map (`<artist>\t<genre>`), enables genre purity.
    #[arg(long)]
    pub genres: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub fan_min_weight: Option<u32>,
    #[arg(long)]
    pub artist_min_weight: Option<u32>,
    #[arg(long)]
    pub resolution: Option<f64>,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated rank-band fractions, highest band first.
    #[arg(long, value_delimiter = ',')]
    pub bands: Option<Vec<f64>>,
    #[arg(long)]
    pub graphml: bool,
}

fn parse_side(s: &str) -> std::result::Result<Side, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be >= 1");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) => 2,
        _ => 1,
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::file(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::file(path, e))
}

/// Writes through `f` into `path`, removing the file if anything fails.
fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut out = create(path)?;
    let result = f(&mut out).and_then(|()| out.flush().map_err(Error::from));
    if result.is_err() {
        drop(out);
        let _ = std::fs::remove_file(path);
    }
    result
}

fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Synth(SynthCommand::Market(a)) => cmd_synth_market(a),
        Command::Synth(SynthCommand::Planted(a)) => cmd_synth_planted(a),
        Command::Project(a) => cmd_project(a),
        Command::Communities(a) => cmd_communities(a),
        Command::Pagerank(a) => cmd_pagerank(a),
        Command::Degrees(a) => cmd_degrees(a),
        Command::Analyze(a) => cmd_analyze(a),
    }
}

fn cmd_synth_market(a: &MarketArgs) -> Result<()> {
    let cfg = MarketGenConfig {
        n_fans: a.fans,
        n_artists: a.artists,
        memberships_per_fan: a.memberships,
        attachment_bias: a.bias,
        n_genres: a.genres,
        genre_affinity: a.affinity,
        seed: a.seed,
    };
    let market = gen_market(&cfg)?;
    write_file(&a.out, |out| write_bipartite_edges(&market.graph, &market.fans, &market.artists, out))?;
    if let Some(path) = &a.genres_out {
        write_file(path, |out| write_genre_map(&market.artists, &market.artist_genre, out))?;
    }
    println!(
        "fans {} artists {} memberships {}",
        market.graph.n_left(),
        market.graph.n_right(),
        market.graph.edge_count()
    );
    Ok(())
}

fn cmd_synth_planted(a: &PlantedArgs) -> Result<()> {
    let cfg = PlantedConfig { block_sizes: a.blocks.clone(), p_in: a.p_in, p_out: a.p_out, seed: a.seed };
    let (g, truth) = gen_planted(&cfg)?;
    let ids = IdInterner::from_labels((0..g.vertex_count()).map(|v| format!("v{v}")));
    write_file(&a.out, |out| write_weighted_edges(&g, &ids, out))?;
    if let Some(path) = &a.truth_out {
        write_file(path, |out| {
            for (v, c) in truth.assignment().iter().enumerate() {
                writeln!(out, "{}\t{c}", ids.label(v))?;
            }
            Ok(())
        })?;
    }
    println!("vertices {} edges {}", g.vertex_count(), g.edge_count());
    Ok(())
}

fn cmd_project(a: &ProjectArgs) -> Result<()> {
    let cfg = ProjectionConfig { side: a.side, min_weight: a.min_weight, pivot_degree_cap: a.pivot_cap };
    cfg.validate()?;
    let (b, fans, artists) = read_bipartite_edges(open(&a.input)?, a.delimiter)?;
    let g = project(&b, &cfg)?;
    let ids = match a.side {
        Side::Left => &fans,
        Side::Right => &artists,
    };
    write_file(&a.out, |out| write_weighted_edges(&g, ids, out))?;
    println!("vertices {} edges {} isolated {}", g.vertex_count(), g.edge_count(), g.isolated_count());
    Ok(())
}

fn cmd_communities(a: &CommunitiesArgs) -> Result<()> {
    let cfg = LouvainConfig {
        resolution: a.resolution,
        min_gain: a.min_gain,
        seed: a.seed,
        ordered: !a.shuffle,
        ..LouvainConfig::default()
    };
    cfg.validate()?;
    let (g, ids) = read_weighted_edges(open(&a.input)?, a.delimiter)?;
    let result = louvain(&g, &cfg)?;
    let partition = relabel_by_size(&result.partition);
    write_file(&a.out, |out| {
        for (v, c) in partition.assignment().iter().enumerate() {
            writeln!(out, "{}\t{c}", ids.label(v))?;
        }
        Ok(())
    })?;
    if let Some(path) = &a.graphml {
        write_file(path, |out| write_graphml(&g, &ids, Some(&partition), out))?;
    }
    println!(
        "communities {} modularity {:.6} levels {}",
        partition.community_count(),
        result.modularity,
        result.levels
    );
    Ok(())
}

fn cmd_pagerank(a: &PagerankArgs) -> Result<()> {
    let cfg = RankConfig { damping: a.damping, tolerance: a.tolerance, max_iterations: a.max_iterations };
    cfg.validate()?;
    let (g, ids) = read_weighted_edges(open(&a.input)?, a.delimiter)?;
    let ranks = pagerank(&g, &cfg)?;
    write_file(&a.out, |out| {
        for v in rank_order(&ranks.scores) {
            writeln!(out, "{}\t{}", ids.label(v), ranks.scores[v])?;
        }
        Ok(())
    })?;
    println!("vertices {} iterations {} converged {}", g.vertex_count(), ranks.iterations_used, ranks.converged);
    Ok(())
}

fn cmd_degrees(a: &DegreesArgs) -> Result<()> {
    let (b, _, _) = read_bipartite_edges(open(&a.input)?, a.delimiter)?;
    let hist = degree_histogram(&b, a.side);
    write_file(&a.out, |out| {
        writeln!(out, "degree\tcount")?;
        for (k, c) in &hist.counts {
            writeln!(out, "{k}\t{c}")?;
        }
        Ok(())
    })?;
    match fit_power_law(&hist.samples(), a.kmin.map_or(Kmin::Auto, Kmin::Fixed)) {
        Ok(fit) => println!(
            "vertices {} alpha {:.4} kmin {} ks {:.4} n_tail {}",
            hist.vertex_count(),
            fit.alpha,
            fit.kmin,
            fit.ks_statistic,
            fit.n_tail
        ),
        Err(e) => println!("vertices {} power-law fit unavailable: {e}", hist.vertex_count()),
    }
    Ok(())
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<()> {
    let (mut cfg, mut input, mut genres) = match &a.replay {
        Some(path) => {
            let report: SegmentationReport = serde_json::from_reader(open(path)?)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
            let cfg: AnalyzeConfig = serde_json::from_value(report.manifest.params.clone())
                .map_err(|e| Error::InvalidConfig(format!("manifest parameters: {e}")))?;
            (cfg, report.manifest.input.map(PathBuf::from), report.manifest.genres.map(PathBuf::from))
        }
        None => {
            let cfg = match &a.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
                    AnalyzeConfig::from_toml(&text)?
                }
                None => AnalyzeConfig::default(),
            };
            (cfg, None, None)
        }
    };
    if a.input.is_some() {
        input = a.input.clone();
    }
    if a.genres.is_some() {
        genres = a.genres.clone();
    }
    if let Some(v) = a.fan_min_weight {
        cfg.fan_min_weight = v;
    }
    if let Some(v) = a.artist_min_weight {
        cfg.artist_min_weight = v;
    }
    if let Some(v) = a.resolution {
        cfg.resolution = v;
    }
    if let Some(v) = a.damping {
        cfg.damping = v;
    }
    if let Some(v) = a.top_k {
        cfg.top_k = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = &a.bands {
        cfg.band_fractions = Some(v.clone());
    }
    cfg.graphml |= a.graphml;
    cfg.validate()?;
    let input = input.ok_or_else(|| Error::InvalidConfig("no input file given".into()))?;

    let (b, _fans, artists) = read_bipartite_edges(open(&input)?, cfg.delimiter)?;
    let genre_map = match &genres {
        Some(path) => Some(read_genre_map(open(path)?, cfg.delimiter, &artists)?),
        None => None,
    };
    let manifest = RunManifest {
        subcommand: "analyze".into(),
        toolkit_version: env!("CARGO_PKG_VERSION").into(),
        input: Some(input.display().to_string()),
        genres: genres.as_ref().map(|p| p.display().to_string()),
        output: Some(a.out.display().to_string()),
        params: json!(cfg),
    };
    let mut analysis = analyze(&b, &artists, genre_map.as_deref(), &cfg, manifest)?;
    write_outputs(&mut analysis, &artists, &a.out)?;

    let r = &analysis.report;
    println!(
        "fans {} artists {} memberships {}",
        r.graph.fans, r.graph.artists, r.graph.memberships
    );
    println!(
        "fan projection: vertices {} edges {} isolated {}; communities {} (top-{} share {:.3})",
        r.graph.fan_projection.vertices,
        r.graph.fan_projection.edges,
        r.graph.fan_projection.isolated,
        r.fan_communities.count,
        r.fan_communities.dominating_count,
        r.fan_communities.dominating_share
    );
    println!(
        "artist projection: vertices {} edges {} isolated {}; communities {}",
        r.graph.artist_projection.vertices,
        r.graph.artist_projection.edges,
        r.graph.artist_projection.isolated,
        r.artist_communities.count
    );
    if let Some(c) = &r.concordance {
        println!("concordance: agreement {:.4} nmi {:.4}", c.agreement, c.nmi);
    }
    println!("report: {}", a.out.join("report.json").display());
    Ok(())
}
