//! Exhaustive DAG enumeration for small node counts and Markov-equivalence
//! computation via the Verma-Pearl criterion (same adjacencies, same
//! unshielded colliders).

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::graph::{Dag, GraphError};

/// Hard cap for [`enumerate_dags`]; the labeled-DAG count explodes beyond it.
pub const MAX_ENUM_NODES: usize = 5;
/// Hard cap for [`equivalence_classes`].
pub const MAX_PARTITION_NODES: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EquivalenceError {
    #[error("node count {0} outside supported range 1..={1}")]
    UnsupportedNodeCount(usize, usize),
    #[error("graphs are over different node sets")]
    DifferentNodeSets,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Deterministic stream over every labeled DAG on a fixed node list.
///
/// Order: ascending row-major adjacency bitmask over the given node order
/// (bit `i*n + j` set iff edge `i -> j`), so index `k` names the same graph
/// in every run. Graphs are materialized lazily.
pub struct DagEnumeration {
    names: Vec<String>,
    keys: Vec<u32>,
    pos: usize,
}

impl DagEnumeration {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// The DAG at a given enumeration index, independent of iterator state.
    pub fn get(&self, index: usize) -> Dag {
        dag_from_key(&self.names, self.keys[index])
    }
}

impl Iterator for DagEnumeration {
    type Item = Dag;

    fn next(&mut self) -> Option<Dag> {
        let key = *self.keys.get(self.pos)?;
        self.pos += 1;
        Some(dag_from_key(&self.names, key))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.keys.len() - self.pos;
        (rest, Some(rest))
    }
}

impl ExactSizeIterator for DagEnumeration {}

fn dag_from_key(names: &[String], key: u32) -> Dag {
    let n = names.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && key >> (i * n + j) & 1 == 1 {
                edges.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    Dag::new(names.to_vec(), edges).expect("enumeration only emits acyclic keys")
}

// Index arithmetic carries the bit positions, so range loops stay.
#[allow(clippy::needless_range_loop)]
fn key_is_acyclic(n: usize, key: u32) -> bool {
    // Kahn's algorithm on the bitmask.
    let mut indeg = [0usize; MAX_ENUM_NODES];
    for i in 0..n {
        for j in 0..n {
            if i != j && key >> (i * n + j) & 1 == 1 {
                indeg[j] += 1;
            }
        }
    }
    let mut removed = 0usize;
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    while let Some(i) = ready.pop() {
        removed += 1;
        for j in 0..n {
            if i != j && key >> (i * n + j) & 1 == 1 {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    removed == n
}

/// Yields every labeled DAG on the given nodes exactly once, in the
/// deterministic order documented on [`DagEnumeration`]. Supports 1..=5
/// nodes (1, 3, 25, 543, 29281 graphs).
pub fn enumerate_dags<S: AsRef<str>>(node_names: &[S]) -> Result<DagEnumeration, EquivalenceError> {
    let n = node_names.len();
    if n == 0 || n > MAX_ENUM_NODES {
        return Err(EquivalenceError::UnsupportedNodeCount(n, MAX_ENUM_NODES));
    }
    let names: Vec<String> = node_names.iter().map(|s| s.as_ref().to_string()).collect();

    // Walk unordered pairs with three states each (none, i->j, j->i); that
    // visits every simple digraph without 2-cycles, then cycle-filter.
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let mut keys = Vec::new();
    let mut stack = vec![(0usize, 0u32)];
    while let Some((depth, key)) = stack.pop() {
        if depth == pairs.len() {
            if key_is_acyclic(n, key) {
                keys.push(key);
            }
            continue;
        }
        let (i, j) = pairs[depth];
        stack.push((depth + 1, key));
        stack.push((depth + 1, key | 1 << (i * n + j)));
        stack.push((depth + 1, key | 1 << (j * n + i)));
    }
    keys.sort_unstable();
    Ok(DagEnumeration {
        names,
        keys,
        pos: 0,
    })
}

/// Markov (independence) equivalence via the Verma-Pearl criterion: same
/// vertices, same adjacencies, same unshielded colliders.
pub fn markov_equivalent(g1: &Dag, g2: &Dag) -> Result<bool, EquivalenceError> {
    let v1: BTreeSet<&String> = g1.node_names().iter().collect();
    let v2: BTreeSet<&String> = g2.node_names().iter().collect();
    if v1 != v2 {
        return Err(EquivalenceError::DifferentNodeSets);
    }
    Ok(adjacency_set(g1) == adjacency_set(g2)
        && g1.unshielded_colliders() == g2.unshielded_colliders())
}

fn adjacency_set(g: &Dag) -> BTreeSet<(String, String)> {
    g.edges()
        .into_iter()
        .map(|(p, c)| {
            let (a, b) = if p < c { (p, c) } else { (c, p) };
            (a.to_string(), b.to_string())
        })
        .collect()
}

/// One Markov equivalence class out of the exhaustive partition.
#[derive(Debug, Clone)]
pub struct EquivClass {
    /// Members in enumeration order; `members[0]` is the canonical
    /// representative (minimal enumeration key).
    pub members: Vec<Dag>,
}

impl EquivClass {
    pub fn representative(&self) -> &Dag {
        &self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Adjacencies plus unshielded colliders: the invariant that decides class
/// membership.
type ClassKey = (BTreeSet<(String, String)>, Vec<(String, String, String)>);

/// Partition of all labeled DAGs on the given nodes into Markov equivalence
/// classes, sorted by representative. Supports 1..=4 nodes.
pub fn equivalence_classes<S: AsRef<str>>(
    node_names: &[S],
) -> Result<Vec<EquivClass>, EquivalenceError> {
    let n = node_names.len();
    if n == 0 || n > MAX_PARTITION_NODES {
        return Err(EquivalenceError::UnsupportedNodeCount(
            n,
            MAX_PARTITION_NODES,
        ));
    }
    let mut groups: HashMap<ClassKey, Vec<Dag>> = HashMap::new();
    let mut order: Vec<ClassKey> = Vec::new();
    for dag in enumerate_dags(node_names)? {
        let key = (adjacency_set(&dag), dag.unshielded_colliders());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(dag);
    }
    // Enumeration order is ascending, so first-seen order sorts classes by
    // representative and members arrive already sorted.
    Ok(order
        .into_iter()
        .map(|key| EquivClass {
            members: groups.remove(&key).unwrap(),
        })
        .collect())
}
