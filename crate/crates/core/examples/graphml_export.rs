//! Export an artist projection with community labels as GraphML, and the
//! same graph as a weighted edge list.

use std::fs::File;
use std::io::BufWriter;

use fanseg::community::{louvain, relabel_by_size, LouvainConfig};
use fanseg::io::{write_graphml, write_weighted_edges, IdInterner};
use fanseg::projection::{project, ProjectionConfig, Side};
use fanseg::synth::{gen_market, MarketGenConfig};

pub fn run_example() -> fanseg::Result<()> {
    let market = gen_market(&MarketGenConfig {
        n_fans: 1_000,
        n_artists: 80,
        memberships_per_fan: 4.0,
        attachment_bias: 0.8,
        n_genres: 2,
        genre_affinity: 0.9,
        seed: 13,
    })?;
    let projected = project(&market.graph, &ProjectionConfig::new(Side::Right, 2))?;
    let (core, ids) = projected.without_isolated();
    let labels = IdInterner::from_labels(ids.iter().map(|&a| market.artists.label(a)));
    let communities = relabel_by_size(&louvain(&core, &LouvainConfig::default())?.partition);

    let dir = std::env::temp_dir().join("fanseg-graphml-export");
    std::fs::create_dir_all(&dir)?;
    let graphml = dir.join("artists.graphml");
    write_graphml(&core, &labels, Some(&communities), &mut BufWriter::new(File::create(&graphml)?))?;
    let edges = dir.join("artists.tsv");
    write_weighted_edges(&core, &labels, &mut BufWriter::new(File::create(&edges)?))?;

    println!("{} artists, {} edges, {} communities", core.vertex_count(), core.edge_count(), communities.community_count());
    println!("wrote {} and {}", graphml.display(), edges.display());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
