//! Partial ancestral graphs from witness families: endpoint marks, the
//! DAG-PAG test, and embedded-pure-Y detection.
//!
//! ```bash
//! cargo run -p ystruct --example build_pag
//! ```

use ystruct::graph::{node_set, Dag};
use ystruct::pag::{build_pag_from_witnesses, epys_holds, is_dag_pag};

fn main() {
    let observed = node_set(["W1", "W2", "X", "Z"]);
    let y = Dag::from_strs(
        &["W1", "W2", "X", "Z"],
        &[("W1", "X"), ("W2", "X"), ("X", "Z")],
    )
    .unwrap();
    let latent_witness = Dag::from_strs(
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

    // A single witness pins every endpoint.
    let singleton = build_pag_from_witnesses(std::slice::from_ref(&y), &observed).unwrap();
    println!("PAG from the Y DAG alone:");
    for line in singleton.render_lines() {
        println!("  {line}");
    }

    // Adding a latent-variable witness with the same observed signature
    // turns the source marks into circles: the data cannot tell whether the
    // W's cause X or share hidden causes with it.
    let pag = build_pag_from_witnesses(&[y.clone(), latent_witness], &observed).unwrap();
    println!("\nPAG from the Y DAG plus a hidden-cause witness:");
    for line in pag.render_lines() {
        println!("  {line}");
    }
    println!("circles: {}", pag.circle_count());

    // The sink arc stays fully oriented, and some orientation of the circles
    // reproduces the shared signature, so this is a DAG PAG.
    match is_dag_pag(&pag) {
        Some(dag) => println!("DAG PAG: yes, witnessed by {dag}"),
        None => println!("DAG PAG: no"),
    }

    let sig = y.d_separation_signature(&observed).unwrap();
    match epys_holds(&sig).unwrap() {
        Some(label) => println!(
            "\nembedded pure Y signature holds with w1={} w2={} x={} z={}",
            label.w1, label.w2, label.x, label.z
        ),
        None => println!("\nno embedded pure Y signature"),
    }

    // The Near-Y signature misses one separation, so it is not a pure
    // embedding.
    let near_y = Dag::from_strs(
        &["W1", "W2", "X", "Z"],
        &[("W1", "X"), ("W2", "X"), ("X", "Z"), ("W1", "Z")],
    )
    .unwrap();
    let near_sig = near_y.d_separation_signature(&observed).unwrap();
    println!(
        "Near-Y signature is a pure embedding: {}",
        epys_holds(&near_sig).unwrap().is_some()
    );
}
