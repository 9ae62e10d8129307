//! Markov equivalence classes over all labeled DAGs on up to four nodes and
//! the uniqueness of the Y and Near-Y classes.
//!
//! ```bash
//! cargo run -p ystruct --example markov_equivalence
//! ```

use std::collections::BTreeMap;

use ystruct::equivalence::{equivalence_classes, markov_equivalent};
use ystruct::graph::Dag;

fn main() {
    for n in 2..=4usize {
        let names: Vec<String> = (0..n)
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect();
        let classes = equivalence_classes(&names).unwrap();
        let total: usize = classes.iter().map(|c| c.len()).sum();
        let mut size_histogram: BTreeMap<usize, usize> = BTreeMap::new();
        for class in &classes {
            *size_histogram.entry(class.len()).or_insert(0) += 1;
        }
        println!(
            "{n} nodes: {total} DAGs fall into {} classes; sizes {size_histogram:?}",
            classes.len()
        );
    }

    let y = Dag::from_strs(
        &["W1", "W2", "X", "Z"],
        &[("W1", "X"), ("W2", "X"), ("X", "Z")],
    )
    .unwrap();
    let near_y = Dag::from_strs(
        &["W1", "W2", "X", "Z"],
        &[("W1", "X"), ("W2", "X"), ("X", "Z"), ("W1", "Z")],
    )
    .unwrap();
    let chain = Dag::from_strs(&["W1", "W2", "X", "Z"], &[("W1", "X"), ("X", "Z")]).unwrap();
    let chain_rev = Dag::from_strs(&["W1", "W2", "X", "Z"], &[("X", "W1"), ("Z", "X")]).unwrap();

    println!(
        "\nchain vs reversed chain equivalent: {}",
        markov_equivalent(&chain, &chain_rev).unwrap()
    );
    println!(
        "Y vs Near-Y equivalent:            {}",
        markov_equivalent(&y, &near_y).unwrap()
    );

    // Both the Y and the Near-Y structures are alone in their classes, which
    // is what makes them recoverable from scores.
    let all = ystruct::equivalence::enumerate_dags(&["W1", "W2", "X", "Z"]).unwrap();
    let mut y_class = 0usize;
    let mut near_y_class = 0usize;
    for dag in all {
        if markov_equivalent(&y, &dag).unwrap() {
            y_class += 1;
        }
        if markov_equivalent(&near_y, &dag).unwrap() {
            near_y_class += 1;
        }
    }
    println!("Y class size: {y_class}; Near-Y class size: {near_y_class}");
}
