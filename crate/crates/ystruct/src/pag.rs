//! Endpoint-marked graphs over observed variables, built from finite witness
//! families of DAGs that agree on their observed d-separation signature.
//!
//! Marks summarize ancestor relations common to every witness: a tail means
//! "ancestor in every member", a head means "ancestor in no member", a circle
//! means the witnesses disagree. The marks are therefore relative to the
//! supplied member list, not to the full (unbounded) equivalence class; the
//! separation semantics of a `Pag` is the common witness signature it carries.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Dag, DsepSignature, GraphError, NodeSet, Separation};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PagError {
    #[error("witness list is empty")]
    NoWitnesses,
    #[error("witnesses disagree on the observed d-separation signature")]
    SignatureMismatch,
    #[error("edge `{0}` - `{1}` is invalid: {2}")]
    InvalidEdge(String, String, String),
    #[error("expected a signature over exactly {expected} variables, got {got}")]
    WrongVariableCount { expected: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Mark at one end of a PAG edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Tail,
    Head,
    Circle,
}

/// One edge with its two endpoint marks. Stored with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PagEdge {
    pub a: String,
    pub b: String,
    pub at_a: Mark,
    pub at_b: Mark,
}

impl PagEdge {
    /// Renders in the four-token grammar `o->`, `-->`, `<->`, `o-o`,
    /// flipping the endpoint order when needed.
    pub fn render(&self) -> String {
        match (self.at_a, self.at_b) {
            (Mark::Tail, Mark::Head) => format!("{} --> {}", self.a, self.b),
            (Mark::Head, Mark::Tail) => format!("{} --> {}", self.b, self.a),
            (Mark::Circle, Mark::Head) => format!("{} o-> {}", self.a, self.b),
            (Mark::Head, Mark::Circle) => format!("{} o-> {}", self.b, self.a),
            (Mark::Head, Mark::Head) => format!("{} <-> {}", self.a, self.b),
            (Mark::Circle, Mark::Circle) => format!("{} o-o {}", self.a, self.b),
            // Tail-tail and tail-circle cannot arise from witnesses: a tail
            // at one end forces a head at the other (acyclicity).
            (x, y) => format!("{} {:?}/{:?} {}", self.a, x, y, self.b),
        }
    }
}

/// Partial ancestral graph over observed variables, carrying the common
/// witness signature that defines its separation semantics.
#[derive(Debug, Clone, PartialEq)]
pub struct Pag {
    nodes: Vec<String>,
    edges: Vec<PagEdge>,
    signature: DsepSignature,
}

impl Pag {
    /// Assembles a PAG from explicit parts; used for hand-built fixtures.
    pub fn from_parts(
        nodes: Vec<String>,
        mut edges: Vec<PagEdge>,
        signature: DsepSignature,
    ) -> Result<Self, PagError> {
        let known: BTreeSet<&String> = nodes.iter().collect();
        let mut seen = BTreeSet::new();
        for e in &mut edges {
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
                std::mem::swap(&mut e.at_a, &mut e.at_b);
            }
            if e.a == e.b {
                return Err(PagError::InvalidEdge(
                    e.a.clone(),
                    e.b.clone(),
                    "self edge".into(),
                ));
            }
            if !known.contains(&e.a) || !known.contains(&e.b) {
                return Err(PagError::InvalidEdge(
                    e.a.clone(),
                    e.b.clone(),
                    "unknown endpoint".into(),
                ));
            }
            if !seen.insert((e.a.clone(), e.b.clone())) {
                return Err(PagError::InvalidEdge(
                    e.a.clone(),
                    e.b.clone(),
                    "duplicate pair".into(),
                ));
            }
        }
        edges.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        let mut nodes = nodes;
        nodes.sort();
        Ok(Pag {
            nodes,
            edges,
            signature,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[PagEdge] {
        &self.edges
    }

    pub fn signature(&self) -> &DsepSignature {
        &self.signature
    }

    pub fn circle_count(&self) -> usize {
        self.edges
            .iter()
            .map(|e| (e.at_a == Mark::Circle) as usize + (e.at_b == Mark::Circle) as usize)
            .sum()
    }

    /// One rendered line per edge, sorted; isolated nodes contribute nothing.
    pub fn render_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self.edges.iter().map(PagEdge::render).collect();
        lines.sort();
        lines
    }
}

/// Builds the PAG for a witness family of DAGs sharing one observed
/// d-separation signature.
///
/// Adjacency: `a`, `b` adjacent iff no subset of the remaining observed
/// variables separates them. Tail at `a` iff `a` is an ancestor of `b` in
/// every member; head at `a` iff it is an ancestor in none; circle otherwise.
pub fn build_pag_from_witnesses(members: &[Dag], observed: &NodeSet) -> Result<Pag, PagError> {
    if members.is_empty() {
        return Err(PagError::NoWitnesses);
    }
    let signature = members[0].d_separation_signature(observed)?;
    for member in &members[1..] {
        if member.d_separation_signature(observed)? != signature {
            return Err(PagError::SignatureMismatch);
        }
    }
    let nodes: Vec<String> = observed.iter().cloned().collect();
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let (a, b) = (&nodes[i], &nodes[j]);
            let separated_somewhere = signature
                .separations()
                .iter()
                .any(|s| s.a == *a && s.b == *b);
            if separated_somewhere {
                continue;
            }
            let mark_for = |from: &str, to: &str| -> Result<Mark, PagError> {
                let mut always = true;
                let mut never = true;
                for m in members {
                    if m.is_ancestor(from, to)? {
                        never = false;
                    } else {
                        always = false;
                    }
                }
                Ok(if always {
                    Mark::Tail
                } else if never {
                    Mark::Head
                } else {
                    Mark::Circle
                })
            };
            let at_a = mark_for(a, b)?;
            let at_b = mark_for(b, a)?;
            debug_assert!(
                !(at_a == Mark::Tail && at_b != Mark::Head)
                    && !(at_b == Mark::Tail && at_a != Mark::Head),
                "a tail at one end forces a head at the other"
            );
            edges.push(PagEdge {
                a: a.clone(),
                b: b.clone(),
                at_a,
                at_b,
            });
        }
    }
    Ok(Pag {
        nodes,
        edges,
        signature,
    })
}

/// Searches every tail/head assignment of the circle endpoints for a DAG over
/// the PAG's own nodes whose d-separation signature equals the PAG's.
///
/// Returns the first hit in lexicographic assignment order (tail before
/// head), or `None`; absence is a valid outcome, not an error.
pub fn is_dag_pag(p: &Pag) -> Option<Dag> {
    // Collect circle slots in (edge, end) order.
    let mut slots = Vec::new();
    for (e_idx, e) in p.edges().iter().enumerate() {
        if e.at_a == Mark::Circle {
            slots.push((e_idx, 0u8));
        }
        if e.at_b == Mark::Circle {
            slots.push((e_idx, 1u8));
        }
    }
    let n_slots = slots.len();
    for assignment in 0u64..(1 << n_slots) {
        let resolved: Vec<(Mark, Mark)> = p
            .edges()
            .iter()
            .enumerate()
            .map(|(e_idx, e)| {
                let pick = |end: u8, fixed: Mark| -> Mark {
                    match slots.iter().position(|&(i, s)| i == e_idx && s == end) {
                        Some(bit) => {
                            if assignment >> bit & 1 == 0 {
                                Mark::Tail
                            } else {
                                Mark::Head
                            }
                        }
                        None => fixed,
                    }
                };
                (pick(0, e.at_a), pick(1, e.at_b))
            })
            .collect();

        // Every edge must come out directed: one tail, one head.
        let mut edges = Vec::with_capacity(p.edges().len());
        let mut ok = true;
        for (e, (at_a, at_b)) in p.edges().iter().zip(&resolved) {
            match (at_a, at_b) {
                (Mark::Tail, Mark::Head) => edges.push((e.a.clone(), e.b.clone())),
                (Mark::Head, Mark::Tail) => edges.push((e.b.clone(), e.a.clone())),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let Ok(candidate) = Dag::new(p.nodes().to_vec(), edges) else {
            continue; // cyclic orientation
        };
        let vars: NodeSet = p.nodes().iter().cloned().collect();
        if candidate.d_separation_signature(&vars).ok().as_ref() == Some(p.signature()) {
            return Some(candidate);
        }
    }
    None
}

/// The labeling under which a four-variable signature is exactly the pure
/// Y-structure pattern; `w1 < w2` since the two sources are interchangeable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YLabeling {
    pub w1: String,
    pub w2: String,
    pub x: String,
    pub z: String,
}

/// The five separations a pure Y structure entails over `{w1, w2, x, z}`.
pub fn y_structure_separations(w1: &str, w2: &str, x: &str, z: &str) -> BTreeSet<Separation> {
    [
        Separation::new(w1, w2, []),
        Separation::new(w1, z, [x]),
        Separation::new(w1, z, [x, w2]),
        Separation::new(w2, z, [x]),
        Separation::new(w2, z, [x, w1]),
    ]
    .into_iter()
    .collect()
}

/// Tests whether a four-variable signature holds all and only the five pure
/// Y-structure separations for some labeling; returns that labeling when so.
pub fn epys_holds(sig: &DsepSignature) -> Result<Option<YLabeling>, PagError> {
    let vars = sig.vars();
    if vars.len() != 4 {
        return Err(PagError::WrongVariableCount {
            expected: 4,
            got: vars.len(),
        });
    }
    // Choose x, then z from the rest; the remaining pair are the sources.
    for xi in 0..4 {
        for zi in 0..4 {
            if zi == xi {
                continue;
            }
            let rest: Vec<&String> = (0..4)
                .filter(|&k| k != xi && k != zi)
                .map(|k| &vars[k])
                .collect();
            let (w1, w2) = (rest[0], rest[1]);
            let expected = y_structure_separations(w1, w2, &vars[xi], &vars[zi]);
            if *sig.separations() == expected {
                return Ok(Some(YLabeling {
                    w1: w1.clone(),
                    w2: w2.clone(),
                    x: vars[xi].clone(),
                    z: vars[zi].clone(),
                }));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::enumerate_dags;
    use crate::graph::node_set;

    fn y_dag() -> Dag {
        Dag::from_strs(
            &["W1", "W2", "X", "Z"],
            &[("W1", "X"), ("W2", "X"), ("X", "Z")],
        )
        .unwrap()
    }

    fn latent_y_witness() -> Dag {
        Dag::from_strs(
            &["H1", "H2", "W1", "W2", "X", "Z"],
            &[
                ("H1", "W1"),
                ("H1", "X"),
                ("H2", "W2"),
                ("H2", "X"),
                ("X", "Z"),
            ],
        )
        .unwrap()
    }

    fn near_y_dag() -> Dag {
        Dag::from_strs(
            &["W1", "W2", "X", "Z"],
            &[("W1", "X"), ("W2", "X"), ("X", "Z"), ("W1", "Z")],
        )
        .unwrap()
    }

    #[test]
    fn singleton_witness_determines_every_mark() {
        let observed = node_set(["W1", "W2", "X", "Z"]);
        let pag = build_pag_from_witnesses(&[y_dag()], &observed).unwrap();
        assert_eq!(pag.circle_count(), 0);
        assert_eq!(pag.render_lines(), vec!["W1 --> X", "W2 --> X", "X --> Z"]);
    }

    #[test]
    fn y_witness_pair_yields_the_y_pag() {
        let observed = node_set(["W1", "W2", "X", "Z"]);
        let pag = build_pag_from_witnesses(&[y_dag(), latent_y_witness()], &observed).unwrap();
        assert_eq!(pag.render_lines(), vec!["W1 o-> X", "W2 o-> X", "X --> Z"]);
    }

    #[test]
    fn two_node_witnesses_give_circle_circle() {
        let ab = Dag::from_strs(&["A", "B"], &[("A", "B")]).unwrap();
        let ba = Dag::from_strs(&["A", "B"], &[("B", "A")]).unwrap();
        let pag = build_pag_from_witnesses(&[ab, ba], &node_set(["A", "B"])).unwrap();
        assert_eq!(pag.render_lines(), vec!["A o-o B"]);
        assert_eq!(pag.circle_count(), 2);
    }

    #[test]
    fn witness_disagreement_is_rejected() {
        let chain = Dag::from_strs(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        let collider = Dag::from_strs(&["A", "B", "C"], &[("A", "B"), ("C", "B")]).unwrap();
        let err = build_pag_from_witnesses(&[chain, collider], &node_set(["A", "B", "C"]));
        assert_eq!(err.unwrap_err(), PagError::SignatureMismatch);
        assert_eq!(
            build_pag_from_witnesses(&[], &node_set(["A"])).unwrap_err(),
            PagError::NoWitnesses
        );
    }

    #[test]
    fn y_pag_is_a_dag_pag() {
        let observed = node_set(["W1", "W2", "X", "Z"]);
        let pag = build_pag_from_witnesses(&[y_dag(), latent_y_witness()], &observed).unwrap();
        let dag = is_dag_pag(&pag).expect("the Y PAG is a DAG PAG");
        assert_eq!(
            dag.d_separation_signature(&observed).unwrap(),
            *pag.signature()
        );
        assert!(dag.classify_tetrad().unwrap().is_y());
    }

    #[test]
    fn fully_determined_near_y_pag_returns_that_dag() {
        let observed = node_set(["W1", "W2", "X", "Z"]);
        let pag = build_pag_from_witnesses(&[near_y_dag()], &observed).unwrap();
        assert_eq!(pag.circle_count(), 0);
        let dag = is_dag_pag(&pag).unwrap();
        assert_eq!(dag.edges(), near_y_dag().edges());
    }

    #[test]
    fn contradictory_signature_admits_no_dag() {
        // A - B, B - C adjacencies with both A _||_ C | {} and A _||_ C | {B}
        // demanded: no three-node DAG entails both, so the search must fail.
        let nodes: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let separations: BTreeSet<Separation> = [
            Separation::new("A", "C", Vec::<&str>::new()),
            Separation::new("A", "C", vec!["B"]),
        ]
        .into_iter()
        .collect();
        let sig = DsepSignature::new(nodes.clone(), separations.clone());
        let pag = Pag::from_parts(
            nodes,
            vec![
                PagEdge {
                    a: "A".into(),
                    b: "B".into(),
                    at_a: Mark::Circle,
                    at_b: Mark::Circle,
                },
                PagEdge {
                    a: "B".into(),
                    b: "C".into(),
                    at_a: Mark::Circle,
                    at_b: Mark::Circle,
                },
            ],
            sig,
        )
        .unwrap();
        assert!(is_dag_pag(&pag).is_none());

        // Independent confirmation over all 25 three-node DAGs: none matches
        // the demanded signature, and among DAGs with the PAG's adjacencies
        // the two separations never co-occur.
        for dag in enumerate_dags(&["A", "B", "C"]).unwrap() {
            let s = dag
                .d_separation_signature(&node_set(["A", "B", "C"]))
                .unwrap();
            assert_ne!(*s.separations(), separations);
            let skeleton: BTreeSet<(String, String)> = dag
                .edges()
                .iter()
                .map(|(p, c)| {
                    let (a, b) = if p < c { (p, c) } else { (c, p) };
                    (a.to_string(), b.to_string())
                })
                .collect();
            let pag_skeleton: BTreeSet<(String, String)> = [
                ("A".to_string(), "B".to_string()),
                ("B".to_string(), "C".to_string()),
            ]
            .into_iter()
            .collect();
            if skeleton == pag_skeleton {
                assert!(!(s.contains("A", "C", &[]) && s.contains("A", "C", &["B"])));
            }
        }
    }

    #[test]
    fn epys_holds_on_y_and_latent_witness_but_not_near_y() {
        let observed = node_set(["W1", "W2", "X", "Z"]);
        let y_sig = y_dag().d_separation_signature(&observed).unwrap();
        let label = epys_holds(&y_sig).unwrap().expect("Y DAG is an EPYS");
        assert_eq!(
            label,
            YLabeling {
                w1: "W1".into(),
                w2: "W2".into(),
                x: "X".into(),
                z: "Z".into()
            }
        );

        let latent_sig = latent_y_witness()
            .d_separation_signature(&observed)
            .unwrap();
        assert!(epys_holds(&latent_sig).unwrap().is_some());

        let near_sig = near_y_dag().d_separation_signature(&observed).unwrap();
        assert!(epys_holds(&near_sig).unwrap().is_none());
    }

    #[test]
    fn extra_separations_violate_only() {
        let independent = Dag::from_strs(&["W1", "W2", "X", "Z"], &[]).unwrap();
        let sig = independent
            .d_separation_signature(&node_set(["W1", "W2", "X", "Z"]))
            .unwrap();
        assert!(epys_holds(&sig).unwrap().is_none());
    }

    #[test]
    fn epys_requires_four_variables() {
        let g = Dag::from_strs(&["A", "B", "C"], &[]).unwrap();
        let sig = g
            .d_separation_signature(&node_set(["A", "B", "C"]))
            .unwrap();
        assert_eq!(
            epys_holds(&sig).unwrap_err(),
            PagError::WrongVariableCount {
                expected: 4,
                got: 3
            }
        );
    }

    #[test]
    fn growing_witness_lists_only_move_marks_toward_circles() {
        // Witness families drawn from one Markov class over four nodes.
        let names = ["A", "B", "C", "D"];
        let all: Vec<Dag> = enumerate_dags(&names).unwrap().collect();
        let observed = node_set(names);
        for (i, base) in all.iter().enumerate().step_by(37) {
            let family: Vec<Dag> = all
                .iter()
                .filter(|d| crate::equivalence::markov_equivalent(base, d).unwrap())
                .cloned()
                .collect();
            let singleton = build_pag_from_witnesses(&family[..1], &observed).unwrap();
            assert_eq!(singleton.circle_count(), 0, "dag #{i}");
            for cut in 1..=family.len() {
                let prefix = build_pag_from_witnesses(&family[..cut], &observed).unwrap();
                let full = build_pag_from_witnesses(&family, &observed).unwrap();
                for (pe, fe) in prefix.edges().iter().zip(full.edges()) {
                    for (pm, fm) in [(pe.at_a, fe.at_a), (pe.at_b, fe.at_b)] {
                        if pm == Mark::Circle {
                            assert_eq!(fm, Mark::Circle, "circles never revert");
                        }
                    }
                }
            }
        }
    }
}
