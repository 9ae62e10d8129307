//! Random parameterization, the faithfulness screen, forward sampling, and
//! BDe scores: equivalent structures tie, the generator pulls ahead of
//! everything else as the sample grows.
//!
//! ```bash
//! cargo run -p ystruct --example sample_and_score
//! ```

use ystruct::bayes_net::{forward_sample, random_parameterization, verify_perfect_map};
use ystruct::graph::{node_set, Dag};
use ystruct::scoring::{bde_log_score, ScoreParams};

fn main() {
    let chain = Dag::from_strs(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
    let net = random_parameterization(&chain, &[2, 2, 2], 11, 1.0).unwrap();
    let faithful = verify_perfect_map(&net, &node_set(["A", "B", "C"]), 1e-6).unwrap();
    println!("random chain parameterization faithful at 1e-6: {faithful}");

    let params = ScoreParams::default();
    let reversed = Dag::from_strs(&["A", "B", "C"], &[("C", "B"), ("B", "A")]).unwrap();
    let collider = Dag::from_strs(&["A", "B", "C"], &[("A", "B"), ("C", "B")]).unwrap();
    let empty = Dag::from_strs(&["A", "B", "C"], &[]).unwrap();

    println!(
        "\n{:>8}  {:>12}  {:>12}  {:>12}  {:>12}",
        "m", "chain", "reversed", "collider", "empty"
    );
    for m in [100usize, 1_000, 10_000] {
        let data = forward_sample(&net, m, 500 + m as u64);
        let row: Vec<f64> = [&chain, &reversed, &collider, &empty]
            .iter()
            .map(|g| bde_log_score(g, &data, &params).unwrap())
            .collect();
        println!(
            "{m:>8}  {:>12.2}  {:>12.2}  {:>12.2}  {:>12.2}",
            row[0], row[1], row[2], row[3]
        );
    }
    println!(
        "\nthe reversed chain is Markov equivalent to the generator, so the two\n\
         first columns agree to floating-point precision at every m; the\n\
         collider and the empty graph fall behind as the sample grows"
    );
}
