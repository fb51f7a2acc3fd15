//! Generate a preferential-attachment fan/artist market and save it as
//! tab-separated membership and genre files.

use std::fs::File;
use std::io::BufWriter;

use fanseg::io::{write_bipartite_edges, write_genre_map};
use fanseg::synth::{gen_market, MarketGenConfig};

pub fn run_example() -> fanseg::Result<()> {
    let cfg = MarketGenConfig {
        n_fans: 2_000,
        n_artists: 200,
        memberships_per_fan: 4.0,
        attachment_bias: 1.2,
        n_genres: 3,
        genre_affinity: 0.8,
        seed: 7,
    };
    let market = gen_market(&cfg)?;

    let mut degrees = market.graph.right_degrees();
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    let median = degrees[degrees.len() / 2];
    println!("{} fans, {} artists, {} memberships", market.graph.n_left(), market.graph.n_right(), market.graph.edge_count());
    println!("most followed artist: {} fans (median {median})", degrees[0]);

    let dir = std::env::temp_dir().join("fanseg-synth-market");
    std::fs::create_dir_all(&dir)?;
    let mut out = BufWriter::new(File::create(dir.join("memberships.tsv"))?);
    write_bipartite_edges(&market.graph, &market.fans, &market.artists, &mut out)?;
    let mut out = BufWriter::new(File::create(dir.join("genres.tsv"))?);
    write_genre_map(&market.artists, &market.artist_genre, &mut out)?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
