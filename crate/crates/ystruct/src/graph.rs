//! Labeled directed acyclic graphs, d-separation, graphical Markov blankets,
//! and structural pattern tests (unshielded colliders, Y, Near-Y).
//!
//! Node identity is by name. Triples and labelings are canonicalized with the
//! lexicographic order on names so every query has one deterministic answer.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// A set of variable names with sorted, deterministic iteration order.
pub type NodeSet = BTreeSet<String>;

/// Builds a [`NodeSet`] from anything yielding name-like values.
pub fn node_set<I, S>(names: I) -> NodeSet
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("self loop on `{0}`")]
    SelfLoop(String),
    #[error("edge set contains a directed cycle")]
    Cyclic,
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// A labeled DAG over named variables.
///
/// Immutable after construction; all query methods are pure, so shared
/// references may be used concurrently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    n_edges: usize,
}

impl Dag {
    /// Builds a DAG from declared nodes and `(parent, child)` edges.
    ///
    /// Rejects duplicate nodes, unknown endpoints, self loops, duplicate
    /// edges, and directed cycles.
    pub fn new(names: Vec<String>, edges: Vec<(String, String)>) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(name.clone()));
            }
        }
        let n = names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for (p, c) in &edges {
            let pi = *index
                .get(p)
                .ok_or_else(|| GraphError::UnknownNode(p.clone()))?;
            let ci = *index
                .get(c)
                .ok_or_else(|| GraphError::UnknownNode(c.clone()))?;
            if pi == ci {
                return Err(GraphError::SelfLoop(p.clone()));
            }
            if !seen.insert((pi, ci)) {
                return Err(GraphError::DuplicateEdge(p.clone(), c.clone()));
            }
            parents[ci].push(pi);
            children[pi].push(ci);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let dag = Dag {
            names,
            index,
            parents,
            children,
            n_edges: seen.len(),
        };
        if dag.topological_order().is_none() {
            return Err(GraphError::Cyclic);
        }
        Ok(dag)
    }

    /// Convenience constructor over string slices; handy for fixtures and tests.
    pub fn from_strs(names: &[&str], edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        Dag::new(
            names.iter().map(|s| s.to_string()).collect(),
            edges
                .iter()
                .map(|(p, c)| (p.to_string(), c.to_string()))
                .collect(),
        )
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    /// Node names in declaration order.
    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn node_index(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn name_of(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn parent_indices(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn child_indices(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.children[parent].binary_search(&child).is_ok()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Edges as `(parent, child)` name pairs, sorted by node index.
    pub fn edges(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::with_capacity(self.n_edges);
        for p in 0..self.names.len() {
            for &c in &self.children[p] {
                out.push((self.names[p].as_str(), self.names[c].as_str()));
            }
        }
        out
    }

    /// A topological order (smallest index first among ready nodes), or
    /// `None` if the edge set is cyclic.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.names.len();
        let mut indeg: Vec<usize> = (0..n).map(|i| self.parents[i].len()).collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&i) = ready.iter().next() {
            ready.remove(&i);
            order.push(i);
            for &c in &self.children[i] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Mask of ancestors of the seed set, seeds included.
    pub(crate) fn ancestral_mask(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut mask = vec![false; self.names.len()];
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut mask[v], true) {
                continue;
            }
            stack.extend_from_slice(&self.parents[v]);
        }
        mask
    }

    /// Mask of descendants of `i`, `i` excluded.
    pub(crate) fn descendant_mask(&self, i: usize) -> Vec<bool> {
        let mut mask = vec![false; self.names.len()];
        let mut stack: Vec<usize> = self.children[i].to_vec();
        while let Some(v) = stack.pop() {
            if std::mem::replace(&mut mask[v], true) {
                continue;
            }
            stack.extend_from_slice(&self.children[v]);
        }
        mask
    }

    /// True iff there is a directed path of length >= 1 from `a` to `b`.
    pub fn is_ancestor(&self, a: &str, b: &str) -> Result<bool, GraphError> {
        let ai = self.node_index(a)?;
        let bi = self.node_index(b)?;
        Ok(self.is_ancestor_idx(ai, bi))
    }

    pub(crate) fn is_ancestor_idx(&self, a: usize, b: usize) -> bool {
        a != b && self.descendant_mask(a)[b]
    }

    /// d-separation of `a` and `b` given the conditioning set `cond`.
    ///
    /// Decided by the linear-time reachability formulation: an active trail
    /// from `a` reaches `b` iff they are d-connected. The path-enumeration
    /// reading lives in [`reference`] and is used to cross-check this one.
    pub fn d_separated(&self, a: &str, b: &str, cond: &NodeSet) -> Result<bool, GraphError> {
        let ai = self.node_index(a)?;
        let bi = self.node_index(b)?;
        if ai == bi {
            return Err(GraphError::Precondition(format!(
                "endpoints must differ, got `{a}` twice"
            )));
        }
        if cond.contains(a) || cond.contains(b) {
            return Err(GraphError::Precondition(format!(
                "conditioning set must exclude the endpoints `{a}` and `{b}`"
            )));
        }
        let mut cond_mask = vec![false; self.names.len()];
        for name in cond {
            cond_mask[self.node_index(name)?] = true;
        }
        Ok(!self.d_connected_idx(ai, bi, &cond_mask))
    }

    /// Active-trail reachability from `a` to `b` given the conditioning mask.
    pub(crate) fn d_connected_idx(&self, a: usize, b: usize, cond: &[bool]) -> bool {
        let n = self.names.len();
        // Colliders may pass the trail iff they are conditioned or have a
        // conditioned descendant, i.e. iff they are ancestral to the set.
        let open_collider = self.ancestral_mask((0..n).filter(|&i| cond[i]));

        // State (v, dir): dir = FROM_CHILD when the trail entered v against an
        // edge v -> c (or v is the source), FROM_PARENT when it entered along
        // an edge p -> v.
        const FROM_CHILD: usize = 0;
        const FROM_PARENT: usize = 1;
        let mut visited = vec![[false; 2]; n];
        let mut stack = vec![(a, FROM_CHILD)];
        while let Some((v, dir)) = stack.pop() {
            if std::mem::replace(&mut visited[v][dir], true) {
                continue;
            }
            if v == b {
                return true;
            }
            match dir {
                FROM_CHILD => {
                    if !cond[v] {
                        for &p in &self.parents[v] {
                            stack.push((p, FROM_CHILD));
                        }
                        for &c in &self.children[v] {
                            stack.push((c, FROM_PARENT));
                        }
                    }
                }
                _ => {
                    if !cond[v] {
                        for &c in &self.children[v] {
                            stack.push((c, FROM_PARENT));
                        }
                    }
                    if open_collider[v] {
                        for &p in &self.parents[v] {
                            stack.push((p, FROM_CHILD));
                        }
                    }
                }
            }
        }
        false
    }

    /// Every d-separation triple `(a, b, C)` with `a, b` in `vars` and
    /// `C` ranging over all subsets of `vars \ {a, b}`.
    ///
    /// The graph may contain nodes outside `vars`; they contribute paths but
    /// never appear in triples, which is how latent-variable structures are
    /// compared over their observed margins.
    pub fn d_separation_signature(&self, vars: &NodeSet) -> Result<DsepSignature, GraphError> {
        if vars.len() < 2 {
            return Err(GraphError::Precondition(format!(
                "signature needs at least 2 variables, got {}",
                vars.len()
            )));
        }
        if vars.len() > 16 {
            // Subset enumeration is exponential; anything past this is a
            // caller bug, not a workload.
            return Err(GraphError::Precondition(format!(
                "signature over {} variables would enumerate 2^{} conditioning sets",
                vars.len(),
                vars.len() - 2
            )));
        }
        let sorted: Vec<String> = vars.iter().cloned().collect();
        let idx: Vec<usize> = sorted
            .iter()
            .map(|v| self.node_index(v))
            .collect::<Result<_, _>>()?;
        let mut separations = BTreeSet::new();
        let n = self.names.len();
        for i in 0..sorted.len() {
            for j in (i + 1)..sorted.len() {
                let rest: Vec<usize> = (0..sorted.len()).filter(|&k| k != i && k != j).collect();
                for subset in 0u32..(1 << rest.len()) {
                    let mut cond_mask = vec![false; n];
                    let mut given = Vec::new();
                    for (bit, &k) in rest.iter().enumerate() {
                        if subset >> bit & 1 == 1 {
                            cond_mask[idx[k]] = true;
                            given.push(sorted[k].clone());
                        }
                    }
                    if !self.d_connected_idx(idx[i], idx[j], &cond_mask) {
                        given.sort();
                        separations.insert(Separation {
                            a: sorted[i].clone(),
                            b: sorted[j].clone(),
                            given,
                        });
                    }
                }
            }
        }
        Ok(DsepSignature {
            vars: sorted,
            separations,
        })
    }

    /// Markov blanket of `x`: parents, children, and the children's other
    /// parents.
    pub fn graphical_markov_blanket(&self, x: &str) -> Result<NodeSet, GraphError> {
        let xi = self.node_index(x)?;
        let mut blanket = BTreeSet::new();
        for &p in &self.parents[xi] {
            blanket.insert(self.names[p].clone());
        }
        for &c in &self.children[xi] {
            blanket.insert(self.names[c].clone());
            for &s in &self.parents[c] {
                if s != xi {
                    blanket.insert(self.names[s].clone());
                }
            }
        }
        Ok(blanket)
    }

    /// All unshielded colliders `a -> x <- b` with `a`, `b` non-adjacent,
    /// canonicalized `a < b` and sorted.
    pub fn unshielded_colliders(&self) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        for x in 0..self.names.len() {
            let ps = &self.parents[x];
            for i in 0..ps.len() {
                for j in (i + 1)..ps.len() {
                    if !self.adjacent(ps[i], ps[j]) {
                        let mut a = self.names[ps[i]].as_str();
                        let mut b = self.names[ps[j]].as_str();
                        if a > b {
                            std::mem::swap(&mut a, &mut b);
                        }
                        out.push((a.to_string(), self.names[x].clone(), b.to_string()));
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Classifies a four-node DAG as a Y structure, a Near-Y structure, or
    /// neither. See [`TetradClass`] for the labeling conventions.
    pub fn classify_tetrad(&self) -> Result<TetradClass, GraphError> {
        if self.names.len() != 4 {
            return Err(GraphError::Precondition(format!(
                "tetrad classification needs exactly 4 nodes, got {}",
                self.names.len()
            )));
        }
        let indeg = |i: usize| self.parents[i].len();
        let outdeg = |i: usize| self.children[i].len();
        match self.n_edges {
            3 => {
                // w1 -> x <- w2, x -> z and nothing else.
                for x in 0..4 {
                    if indeg(x) == 2 && outdeg(x) == 1 {
                        let z = self.children[x][0];
                        if indeg(z) == 1 && outdeg(z) == 0 {
                            let mut w1 = self.names[self.parents[x][0]].clone();
                            let mut w2 = self.names[self.parents[x][1]].clone();
                            if w1 > w2 {
                                std::mem::swap(&mut w1, &mut w2);
                            }
                            return Ok(TetradClass::YStructure {
                                w1,
                                w2,
                                x: self.names[x].clone(),
                                z: self.names[z].clone(),
                            });
                        }
                    }
                }
                Ok(TetradClass::Other)
            }
            4 => {
                // A Y structure plus exactly one extra arc from one parent of
                // x to z; that parent is reported as w1.
                for x in 0..4 {
                    if indeg(x) == 2 && outdeg(x) == 1 {
                        let z = self.children[x][0];
                        if indeg(z) == 2 && outdeg(z) == 0 {
                            let extra: Vec<usize> = self.parents[z]
                                .iter()
                                .copied()
                                .filter(|&p| p != x)
                                .collect();
                            if extra.len() == 1 && self.parents[x].contains(&extra[0]) {
                                let w1 = extra[0];
                                let w2 = *self.parents[x].iter().find(|&&p| p != w1).unwrap();
                                if indeg(w1) == 0 && indeg(w2) == 0 && outdeg(w2) == 1 {
                                    return Ok(TetradClass::NearY {
                                        w1: self.names[w1].clone(),
                                        w2: self.names[w2].clone(),
                                        x: self.names[x].clone(),
                                        z: self.names[z].clone(),
                                    });
                                }
                            }
                        }
                    }
                }
                Ok(TetradClass::Other)
            }
            _ => Ok(TetradClass::Other),
        }
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self
            .edges()
            .iter()
            .map(|(p, c)| format!("{p}->{c}"))
            .collect();
        if edges.is_empty() {
            write!(f, "{{{}; no edges}}", self.names.join(","))
        } else {
            write!(f, "{{{}}}", edges.join(", "))
        }
    }
}

/// Verdict of [`Dag::classify_tetrad`].
///
/// For `YStructure` the two source parents are interchangeable, so `w1 < w2`
/// lexicographically. For `NearY`, `w1` is the parent carrying the extra arc
/// into `z` (the two parents are not interchangeable there).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TetradClass {
    YStructure {
        w1: String,
        w2: String,
        x: String,
        z: String,
    },
    NearY {
        w1: String,
        w2: String,
        x: String,
        z: String,
    },
    Other,
}

impl TetradClass {
    pub fn is_y(&self) -> bool {
        matches!(self, TetradClass::YStructure { .. })
    }

    pub fn is_near_y(&self) -> bool {
        matches!(self, TetradClass::NearY { .. })
    }
}

/// One d-separation statement `a` and `b` given `given`, with `a < b` and
/// `given` sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Separation {
    pub a: String,
    pub b: String,
    pub given: Vec<String>,
}

impl Separation {
    pub fn new<S: Into<String>>(a: S, b: S, given: impl IntoIterator<Item = S>) -> Self {
        let mut a = a.into();
        let mut b = b.into();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let mut given: Vec<String> = given.into_iter().map(Into::into).collect();
        given.sort();
        Separation { a, b, given }
    }
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} _||_ {} | {{{}}}",
            self.a,
            self.b,
            self.given.join(",")
        )
    }
}

/// The complete set of d-separation statements a graph entails over a chosen
/// variable subset; the comparison object for independence equivalence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DsepSignature {
    vars: Vec<String>,
    separations: BTreeSet<Separation>,
}

impl DsepSignature {
    pub fn new(vars: Vec<String>, separations: BTreeSet<Separation>) -> Self {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]), "vars must be sorted");
        DsepSignature { vars, separations }
    }

    /// Variables the signature ranges over, sorted.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn separations(&self) -> &BTreeSet<Separation> {
        &self.separations
    }

    pub fn contains(&self, a: &str, b: &str, given: &[&str]) -> bool {
        self.separations
            .contains(&Separation::new(a, b, given.iter().copied()))
    }

    pub fn len(&self) -> usize {
        self.separations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.separations.is_empty()
    }
}

/// Reference implementations kept independent of the optimized query paths,
/// plus seeded generators. Used by the test suites as oracles; not intended
/// for production use.
pub mod reference {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// d-separation by brute-force enumeration of every simple undirected
    /// path: `a` and `b` are d-separated given `cond` iff no such path is
    /// active (every collider conditioned or with a conditioned descendant,
    /// every non-collider unconditioned).
    pub fn d_separated_by_paths(
        g: &Dag,
        a: &str,
        b: &str,
        cond: &NodeSet,
    ) -> Result<bool, GraphError> {
        let ai = g.node_index(a)?;
        let bi = g.node_index(b)?;
        if ai == bi {
            return Err(GraphError::Precondition("endpoints must differ".into()));
        }
        if cond.contains(a) || cond.contains(b) {
            return Err(GraphError::Precondition(
                "conditioning set must exclude endpoints".into(),
            ));
        }
        let n = g.node_count();
        let mut cond_mask = vec![false; n];
        for name in cond {
            cond_mask[g.node_index(name)?] = true;
        }
        let open_collider = g.ancestral_mask((0..n).filter(|&i| cond_mask[i]));

        fn active(g: &Dag, path: &[usize], cond: &[bool], open_collider: &[bool]) -> bool {
            for w in path.windows(3) {
                let (prev, v, next) = (w[0], w[1], w[2]);
                let collider = g.has_edge(prev, v) && g.has_edge(next, v);
                if collider {
                    if !open_collider[v] {
                        return false;
                    }
                } else if cond[v] {
                    return false;
                }
            }
            true
        }

        fn dfs(
            g: &Dag,
            v: usize,
            target: usize,
            path: &mut Vec<usize>,
            on_path: &mut Vec<bool>,
            cond: &[bool],
            open_collider: &[bool],
        ) -> bool {
            if v == target {
                return active(g, path, cond, open_collider);
            }
            let neighbors: Vec<usize> = g
                .parent_indices(v)
                .iter()
                .chain(g.child_indices(v))
                .copied()
                .collect();
            for w in neighbors {
                if !on_path[w] {
                    on_path[w] = true;
                    path.push(w);
                    let hit = dfs(g, w, target, path, on_path, cond, open_collider);
                    path.pop();
                    on_path[w] = false;
                    if hit {
                        return true;
                    }
                }
            }
            false
        }

        let mut on_path = vec![false; n];
        on_path[ai] = true;
        let mut path = vec![ai];
        let connected = dfs(
            g,
            ai,
            bi,
            &mut path,
            &mut on_path,
            &cond_mask,
            &open_collider,
        );
        Ok(!connected)
    }

    /// Seeded random DAG on `V1..Vn`: draws a random topological order and
    /// keeps each forward pair as an edge with probability `edge_prob`.
    pub fn random_dag(seed: u64, n: usize, edge_prob: f64) -> Dag {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (1..=n).map(|i| format!("V{i}")).collect();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < edge_prob {
                    edges.push((names[order[i]].clone(), names[order[j]].clone()));
                }
            }
        }
        Dag::new(names, edges).expect("forward edges over a permutation are acyclic")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn y_dag() -> Dag {
        Dag::from_strs(
            &["W1", "W2", "X", "Z"],
            &[("W1", "X"), ("W2", "X"), ("X", "Z")],
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

    fn latent_y_witness() -> Dag {
        // Two hidden common causes of the W's and X; same observed signature
        // as the Y DAG over {W1, W2, X, Z}.
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

    #[test]
    fn construction_rejects_malformed_input() {
        assert_eq!(
            Dag::from_strs(&["A", "A"], &[]),
            Err(GraphError::DuplicateNode("A".into()))
        );
        assert_eq!(
            Dag::from_strs(&["A"], &[("A", "B")]),
            Err(GraphError::UnknownNode("B".into()))
        );
        assert_eq!(
            Dag::from_strs(&["A"], &[("A", "A")]),
            Err(GraphError::SelfLoop("A".into()))
        );
        assert_eq!(
            Dag::from_strs(&["A", "B"], &[("A", "B"), ("A", "B")]),
            Err(GraphError::DuplicateEdge("A".into(), "B".into()))
        );
        assert_eq!(
            Dag::from_strs(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("C", "A")]),
            Err(GraphError::Cyclic)
        );
    }

    #[test]
    fn collider_blocks_and_opens() {
        let g = Dag::from_strs(&["W1", "W2", "X"], &[("W1", "X"), ("W2", "X")]).unwrap();
        assert!(g.d_separated("W1", "W2", &node_set::<_, &str>([])).unwrap());
        assert!(!g.d_separated("W1", "W2", &node_set(["X"])).unwrap());
    }

    #[test]
    fn y_dag_separates_w1_from_z_given_x() {
        let g = y_dag();
        assert!(g.d_separated("W1", "Z", &node_set(["X"])).unwrap());
        assert!(g.d_separated("W1", "Z", &node_set(["X", "W2"])).unwrap());
        assert!(!g.d_separated("W1", "Z", &node_set::<_, &str>([])).unwrap());
    }

    #[test]
    fn near_y_dag_keeps_w1_connected_to_z_given_x() {
        let g = near_y_dag();
        assert!(!g.d_separated("W1", "Z", &node_set(["X"])).unwrap());
        assert!(g.d_separated("W2", "Z", &node_set(["X", "W1"])).unwrap());
    }

    #[test]
    fn d_separated_checks_preconditions() {
        let g = y_dag();
        assert!(matches!(
            g.d_separated("W1", "W1", &node_set::<_, &str>([])),
            Err(GraphError::Precondition(_))
        ));
        assert!(matches!(
            g.d_separated("W1", "Z", &node_set(["W1"])),
            Err(GraphError::Precondition(_))
        ));
        assert!(matches!(
            g.d_separated("W1", "Q", &node_set::<_, &str>([])),
            Err(GraphError::UnknownNode(_))
        ));
    }

    fn expected_y_signature() -> BTreeSet<Separation> {
        [
            Separation::new("W1", "W2", []),
            Separation::new("W1", "Z", ["X"]),
            Separation::new("W1", "Z", ["X", "W2"]),
            Separation::new("W2", "Z", ["X"]),
            Separation::new("W2", "Z", ["X", "W1"]),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn y_signature_is_the_five_conditions() {
        let sig = y_dag()
            .d_separation_signature(&node_set(["W1", "W2", "X", "Z"]))
            .unwrap();
        assert_eq!(*sig.separations(), expected_y_signature());
    }

    #[test]
    fn adjacent_pair_has_empty_signature() {
        let g = Dag::from_strs(&["A", "B"], &[("A", "B")]).unwrap();
        let sig = g.d_separation_signature(&node_set(["A", "B"])).unwrap();
        assert!(sig.is_empty());
    }

    #[test]
    fn latent_witness_matches_y_signature_over_observed() {
        let observed = node_set(["W1", "W2", "X", "Z"]);
        let lat = latent_y_witness()
            .d_separation_signature(&observed)
            .unwrap();
        let y = y_dag().d_separation_signature(&observed).unwrap();
        assert_eq!(lat, y);
    }

    #[test]
    fn signature_requires_subset_of_nodes() {
        let g = y_dag();
        assert!(matches!(
            g.d_separation_signature(&node_set(["W1", "Q"])),
            Err(GraphError::UnknownNode(_))
        ));
        assert!(matches!(
            g.d_separation_signature(&node_set(["W1"])),
            Err(GraphError::Precondition(_))
        ));
    }

    #[test]
    fn markov_blanket_examples() {
        let g = y_dag();
        assert_eq!(
            g.graphical_markov_blanket("X").unwrap(),
            node_set(["W1", "W2", "Z"])
        );
        assert_eq!(g.graphical_markov_blanket("Z").unwrap(), node_set(["X"]));
        let isolated = Dag::from_strs(&["A", "B", "C"], &[("B", "C")]).unwrap();
        assert!(isolated.graphical_markov_blanket("A").unwrap().is_empty());
    }

    #[test]
    fn unshielded_collider_examples() {
        let m1 = Dag::from_strs(&["W1", "W2", "X"], &[("W1", "X"), ("W2", "X")]).unwrap();
        assert_eq!(
            m1.unshielded_colliders(),
            vec![("W1".to_string(), "X".to_string(), "W2".to_string())]
        );
        let m2 = Dag::from_strs(
            &["W1", "W2", "X"],
            &[("W1", "X"), ("W2", "X"), ("W1", "W2")],
        )
        .unwrap();
        assert!(m2.unshielded_colliders().is_empty());
        let edgeless = Dag::from_strs(&["A", "B", "C"], &[]).unwrap();
        assert!(edgeless.unshielded_colliders().is_empty());
    }

    #[test]
    fn classify_tetrad_examples() {
        assert_eq!(
            y_dag().classify_tetrad().unwrap(),
            TetradClass::YStructure {
                w1: "W1".into(),
                w2: "W2".into(),
                x: "X".into(),
                z: "Z".into()
            }
        );
        assert_eq!(
            near_y_dag().classify_tetrad().unwrap(),
            TetradClass::NearY {
                w1: "W1".into(),
                w2: "W2".into(),
                x: "X".into(),
                z: "Z".into()
            }
        );
        let complete = Dag::from_strs(
            &["A", "B", "C", "D"],
            &[
                ("A", "B"),
                ("A", "C"),
                ("A", "D"),
                ("B", "C"),
                ("B", "D"),
                ("C", "D"),
            ],
        )
        .unwrap();
        assert_eq!(complete.classify_tetrad().unwrap(), TetradClass::Other);
        let three = Dag::from_strs(&["A", "B", "C"], &[]).unwrap();
        assert!(three.classify_tetrad().is_err());
    }

    #[test]
    fn reachability_agrees_with_path_enumeration_on_random_dags() {
        // Small standing version of the full oracle sweep in the acceptance
        // suite.
        for seed in 0..100u64 {
            let g = reference::random_dag(seed, 2 + (seed % 5) as usize, 0.4);
            let names = g.node_names().to_vec();
            for i in 0..names.len() {
                for j in (i + 1)..names.len() {
                    let rest: Vec<&String> = names
                        .iter()
                        .filter(|v| **v != names[i] && **v != names[j])
                        .collect();
                    for mask in 0u32..(1 << rest.len()) {
                        let cond: NodeSet = rest
                            .iter()
                            .enumerate()
                            .filter(|(k, _)| mask >> k & 1 == 1)
                            .map(|(_, v)| (*v).clone())
                            .collect();
                        let fast = g.d_separated(&names[i], &names[j], &cond).unwrap();
                        let slow = reference::d_separated_by_paths(&g, &names[i], &names[j], &cond)
                            .unwrap();
                        assert_eq!(
                            fast, slow,
                            "seed {seed}, {} vs {} given {cond:?}",
                            names[i], names[j]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn markov_condition_as_graphical_identity() {
        // Each node is d-separated from its non-descendants given its parents.
        for seed in 200..260u64 {
            let g = reference::random_dag(seed, 2 + (seed % 5) as usize, 0.5);
            for i in 0..g.node_count() {
                let parents: NodeSet = g
                    .parent_indices(i)
                    .iter()
                    .map(|&p| g.name_of(p).to_string())
                    .collect();
                let desc = g.descendant_mask(i);
                for (j, &is_descendant) in desc.iter().enumerate() {
                    if j == i || is_descendant || parents.contains(g.name_of(j)) {
                        continue;
                    }
                    assert!(
                        g.d_separated(g.name_of(i), g.name_of(j), &parents).unwrap(),
                        "seed {seed}: {} not separated from non-descendant {} given parents",
                        g.name_of(i),
                        g.name_of(j)
                    );
                }
            }
        }
    }

    #[test]
    fn markov_blanket_is_minimal_separator() {
        for seed in 300..340u64 {
            let g = reference::random_dag(seed, 3 + (seed % 4) as usize, 0.5);
            for x in g.node_names() {
                let blanket = g.graphical_markov_blanket(x).unwrap();
                // Conditioning on the blanket separates x from everything else.
                for other in g.node_names() {
                    if other == x || blanket.contains(other) {
                        continue;
                    }
                    assert!(g.d_separated(x, other, &blanket).unwrap());
                }
                // Dropping any member breaks separation somewhere.
                for member in &blanket {
                    let mut reduced = blanket.clone();
                    reduced.remove(member);
                    let leak = g.node_names().iter().any(|other| {
                        other != x
                            && !reduced.contains(other)
                            && !g.d_separated(x, other, &reduced).unwrap()
                    });
                    assert!(leak, "seed {seed}: blanket of {x} not minimal at {member}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn d_separation_is_symmetric(seed in 0u64..5_000, n in 2usize..7, mask in 0u32..64) {
            let g = reference::random_dag(seed, n, 0.5);
            let names = g.node_names();
            let a = &names[seed as usize % n];
            let b = &names[(seed as usize + 1 + mask as usize) % n];
            prop_assume!(a != b);
            let cond: NodeSet = names
                .iter()
                .enumerate()
                .filter(|(i, v)| mask >> i & 1 == 1 && *v != a && *v != b)
                .map(|(_, v)| v.clone())
                .collect();
            prop_assert_eq!(
                g.d_separated(a, b, &cond).unwrap(),
                g.d_separated(b, a, &cond).unwrap()
            );
        }

        #[test]
        fn adjacent_nodes_are_never_separated(seed in 0u64..2_000, n in 2usize..7, mask in 0u32..64) {
            let g = reference::random_dag(seed, n, 0.6);
            let edges = g.edges();
            prop_assume!(!edges.is_empty());
            let (p, c) = edges[seed as usize % edges.len()];
            let cond: NodeSet = g
                .node_names()
                .iter()
                .enumerate()
                .filter(|(i, v)| mask >> i & 1 == 1 && v.as_str() != p && v.as_str() != c)
                .map(|(_, v)| v.clone())
                .collect();
            prop_assert!(!g.d_separated(p, c, &cond).unwrap());
        }
    }
}
