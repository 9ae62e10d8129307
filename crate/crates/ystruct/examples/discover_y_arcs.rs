//! The tetrad posterior: score all 543 four-node structures on data sampled
//! from a Y-structure network and read off the causal-arc posteriors.
//!
//! ```bash
//! cargo run -p ystruct --example discover_y_arcs
//! ```

use ystruct::discovery::y_posterior;
use ystruct::experiment::{fixture_net, generate_dataset};
use ystruct::scoring::ScoreParams;

fn main() {
    let fixture = fixture_net("y_net", 2).unwrap();
    let (net, data) = generate_dataset(&fixture, 42, 20_000, 0.04, 5_000).unwrap();
    println!("generator: {}", net.dag());
    println!(
        "sampled {} cases over {:?}",
        data.n_rows(),
        data.var_names()
    );

    let report = y_posterior(&data, &ScoreParams::default()).unwrap();
    println!("\ntop of the 543-structure posterior:");
    let mut indexed: Vec<(usize, f64)> = report.posteriors.iter().copied().enumerate().collect();
    indexed.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let dags = ystruct::equivalence::enumerate_dags(&report.tetrad).unwrap();
    let all: Vec<_> = dags.collect();
    for (index, mass) in indexed.into_iter().take(3) {
        println!("  #{index:<3} {:<40} {mass:.4}", all[index].to_string());
    }

    println!("\nsink-arc posteriors (all twelve ordered pairs):");
    for arc in &report.y_arcs {
        println!("  P({} => {} | D) = {:.6}", arc.x, arc.z, arc.posterior);
    }
    println!(
        "\nthe true arc X => Z concentrates the mass; every other pairing\n\
         competes with structures that explain the data at least as well"
    );
}
