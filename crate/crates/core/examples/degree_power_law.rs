//! Degree histograms of both sides of a market and discrete power-law fits.

use fanseg::projection::Side;
use fanseg::stats::{degree_histogram, fit_power_law, Kmin};
use fanseg::synth::{gen_market, MarketGenConfig};

pub fn run_example() -> fanseg::Result<()> {
    let market = gen_market(&MarketGenConfig {
        n_fans: 20_000,
        n_artists: 2_000,
        memberships_per_fan: 5.0,
        attachment_bias: 1.2,
        n_genres: 1,
        genre_affinity: 1.0,
        seed: 5,
    })?;

    for side in [Side::Left, Side::Right] {
        let hist = degree_histogram(&market.graph, side);
        println!("{side:?}: {} vertices, {} with degree zero", hist.vertex_count(), hist.zero_degree);
        for (lo, hi, density) in hist.log_bins.iter().take(8) {
            println!("  [{lo}, {hi})  {density:.3e}");
        }
        match fit_power_law(&hist.samples(), Kmin::Auto) {
            Ok(fit) => println!(
                "  alpha {:.3}, kmin {}, KS {:.4}, tail {}",
                fit.alpha, fit.kmin, fit.ks_statistic, fit.n_tail
            ),
            Err(e) => println!("  no fit: {e}"),
        }
    }

    let fixed = fit_power_law(&market.graph.right_degrees(), Kmin::Fixed(10))?;
    println!("artists with kmin 10: alpha {:.3} over {} samples", fixed.alpha, fixed.n_tail);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
