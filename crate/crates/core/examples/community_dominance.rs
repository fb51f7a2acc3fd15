//! Fan communities of a market with their most-followed artists and how
//! strongly the top artist dominates each one.

use fanseg::community::{louvain, relabel_by_size, LouvainConfig};
use fanseg::graph::Partition;
use fanseg::io::LabeledTable;
use fanseg::projection::{project, ProjectionConfig, Side};
use fanseg::stats::{dominance_metrics, top_items_per_community};
use fanseg::synth::{gen_market, MarketGenConfig};

pub fn run_example() -> fanseg::Result<()> {
    let market = gen_market(&MarketGenConfig {
        n_fans: 3_000,
        n_artists: 300,
        memberships_per_fan: 6.0,
        attachment_bias: 1.0,
        n_genres: 4,
        genre_affinity: 0.9,
        seed: 2,
    })?;
    let fans = project(&market.graph, &ProjectionConfig::new(Side::Left, 2))?;
    let (core, ids) = fans.without_isolated();
    let communities = relabel_by_size(&louvain(&core, &LouvainConfig::default())?.partition);
    println!("{} connected fans in {} communities", ids.len(), communities.community_count());

    // Isolated fans go into one trailing group that is not reported.
    let k = communities.community_count();
    let mut assignment = vec![k; fans.vertex_count()];
    for (i, &fan) in ids.iter().enumerate() {
        assignment[fan] = communities.community_of(i);
    }
    let full = Partition::from_labels(&assignment);
    let tables = top_items_per_community(&market.graph, &full, &market.artists, 10)?;
    for (c, table) in tables.iter().enumerate().take(k.min(4)) {
        let d = dominance_metrics(table)?;
        println!("community {c}: top1/top10 {:.3}, top1 share {:.3}, gini {:.3}", d.top1_over_top10, d.top1_share, d.gini);
        for row in table.rows.iter().take(3) {
            println!("  {:>6}  {}", row.value, row.label);
        }
    }

    // A hand-made table where one artist draws most of the attention.
    let skewed = LabeledTable::new(
        [("lead", 9000.0), ("b", 900.0), ("c", 700.0), ("d", 650.0), ("e", 600.0)]
            .into_iter()
            .map(|(l, v)| (l.to_string(), v)),
    );
    let d = dominance_metrics(&skewed)?;
    println!("skewed table: top1/top10 {:.3}, gini {:.3}", d.top1_over_top10, d.gini);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
