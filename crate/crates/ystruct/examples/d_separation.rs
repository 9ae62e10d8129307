//! d-separation queries, Markov blankets, and tetrad classification on the
//! Y and Near-Y structures.
//!
//! ```bash
//! cargo run -p ystruct --example d_separation
//! ```

use ystruct::graph::{node_set, Dag};

fn main() {
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

    println!("Y structure: {y}");
    for (a, b, cond) in [
        ("W1", "W2", vec![]),
        ("W1", "W2", vec!["X"]),
        ("W1", "Z", vec![]),
        ("W1", "Z", vec!["X"]),
        ("W1", "Z", vec!["X", "W2"]),
    ] {
        let cset = node_set(cond.clone());
        let verdict = if y.d_separated(a, b, &cset).unwrap() {
            "d-separated"
        } else {
            "d-connected"
        };
        println!("  {a} vs {b} given {{{}}}: {verdict}", cond.join(","));
    }

    println!("\nNear-Y structure: {near_y}");
    println!(
        "  W1 vs Z given {{X}}: {}",
        if near_y.d_separated("W1", "Z", &node_set(["X"])).unwrap() {
            "d-separated"
        } else {
            "d-connected (the extra arc keeps the pair dependent)"
        }
    );

    println!("\nMarkov blankets in the Y structure:");
    for node in ["W1", "X", "Z"] {
        let blanket: Vec<String> = y
            .graphical_markov_blanket(node)
            .unwrap()
            .into_iter()
            .collect();
        println!("  MB({node}) = {{{}}}", blanket.join(","));
    }

    println!("\nUnshielded colliders: {:?}", y.unshielded_colliders());
    println!("Y classified as:      {:?}", y.classify_tetrad().unwrap());
    println!(
        "Near-Y classified as: {:?}",
        near_y.classify_tetrad().unwrap()
    );

    // Signatures compare structures over their observed margins, so a
    // latent-variable network can be matched against a plain DAG.
    let latent = Dag::from_strs(
        &["H1", "H2", "W1", "W2", "X", "Z"],
        &[
            ("H1", "W1"),
            ("H1", "X"),
            ("H2", "W2"),
            ("H2", "X"),
            ("X", "Z"),
        ],
    )
    .unwrap();
    let observed = node_set(["W1", "W2", "X", "Z"]);
    let same = latent.d_separation_signature(&observed).unwrap()
        == y.d_separation_signature(&observed).unwrap();
    println!("\nLatent witness has the Y signature over the observed margin: {same}");
}
