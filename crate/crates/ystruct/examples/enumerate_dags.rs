//! Exhaustive DAG enumeration: golden counts and the deterministic indexing
//! that tetrad posteriors rely on.
//!
//! ```bash
//! cargo run -p ystruct --example enumerate_dags
//! ```

use ystruct::equivalence::enumerate_dags;

fn main() {
    for n in 1..=5usize {
        let names: Vec<String> = (0..n)
            .map(|i| ((b'A' + i as u8) as char).to_string())
            .collect();
        let count = enumerate_dags(&names).unwrap().len();
        println!("labeled DAGs on {n} node(s): {count}");
    }

    println!("\nfirst and last few graphs on four nodes (stable indices):");
    let names = ["A", "B", "C", "D"];
    let enumeration = enumerate_dags(&names).unwrap();
    let total = enumeration.len();
    for (i, dag) in enumeration.enumerate() {
        if i < 3 || i + 3 >= total {
            println!("  {i:>3}: {dag}");
        }
    }

    let y_count = enumerate_dags(&names)
        .unwrap()
        .filter(|d| d.classify_tetrad().unwrap().is_y())
        .count();
    println!("\nY structures among the 543: {y_count} (4 collider choices x 3 sink choices)");
}
