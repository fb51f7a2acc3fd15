//! Weighted PageRank on an artist projection, cut into percentile bands and
//! compared with the artist communities.

use fanseg::community::{louvain, relabel_by_size, LouvainConfig};
use fanseg::projection::{project, ProjectionConfig, Side};
use fanseg::ranking::{bands_like, pagerank, percentile_partition, rank_order, RankConfig};
use fanseg::stats::partition_concordance;
use fanseg::synth::{gen_market, MarketGenConfig};

pub fn run_example() -> fanseg::Result<()> {
    let market = gen_market(&MarketGenConfig {
        n_fans: 3_000,
        n_artists: 300,
        memberships_per_fan: 4.0,
        attachment_bias: 1.0,
        n_genres: 3,
        genre_affinity: 0.9,
        seed: 11,
    })?;
    let projected = project(&market.graph, &ProjectionConfig::new(Side::Right, 2))?;
    let (core, ids) = projected.without_isolated();
    println!("artist graph: {} of {} artists connected, {} edges", ids.len(), projected.vertex_count(), core.edge_count());

    let ranks = pagerank(&core, &RankConfig::default())?;
    println!("pagerank converged: {} after {} iterations", ranks.converged, ranks.iterations_used);
    for &v in rank_order(&ranks.scores).iter().take(5) {
        println!("  {}  {:.5}", market.artists.label(ids[v]), ranks.scores[v]);
    }

    // Fixed fractions: top 2.38%, next 9.97%, rest.
    let bands = percentile_partition(&ranks, &[0.0238, 0.0997, 0.8765])?;
    println!("fixed bands {:?}", bands.sizes());

    let communities = relabel_by_size(&louvain(&core, &LouvainConfig::default())?.partition);
    let fractions = bands_like(&communities, &ranks.scores);
    let matched = percentile_partition(&ranks, &fractions)?;
    let c = partition_concordance(&communities, &matched)?;
    println!("communities {:?} vs rank bands {:?}", communities.sizes(), matched.sizes());
    println!("agreement {:.3}, NMI {:.3}", c.agreement, c.nmi);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
