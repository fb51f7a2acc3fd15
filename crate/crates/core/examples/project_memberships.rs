//! One-mode projections of a small membership table: fans linked by shared
//! artists, artists linked by shared fans, with a weight threshold.

use std::io::Cursor;

use fanseg::io::{read_bipartite_edges, write_weighted_edges};
use fanseg::projection::{project, ProjectionConfig, Side};

const MEMBERSHIPS: &str = "\
# fan\tartist
alice\tnova
alice\tkite
alice\tember
bob\tnova
bob\tkite
carol\tnova
carol\tember
dave\tkite
";

pub fn run_example() -> fanseg::Result<()> {
    let (b, fans, artists) = read_bipartite_edges(Cursor::new(MEMBERSHIPS), '\t')?;

    for min_weight in [1, 2] {
        let g = project(&b, &ProjectionConfig::new(Side::Left, min_weight))?;
        println!("fan projection, min weight {min_weight}: {} edges", g.edge_count());
        let mut out = Vec::new();
        write_weighted_edges(&g, &fans, &mut out)?;
        print!("{}", String::from_utf8_lossy(&out));
    }

    let g = project(&b, &ProjectionConfig::new(Side::Right, 1))?;
    println!("artist projection: {} edges", g.edge_count());
    for (u, v, w) in g.edges() {
        println!("  {} -- {}  shared fans: {w}", artists.label(u), artists.label(v));
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
