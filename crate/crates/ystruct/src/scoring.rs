//! BDe marginal-likelihood scoring of DAG structures on complete discrete
//! data, with likelihood equivalence across Markov-equivalent structures.
//!
//! Everything accumulates in log space; the Dirichlet prior splits the
//! equivalent sample size evenly over each family's cells.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes_net::{Dataset, NetError};
use crate::graph::Dag;

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    #[error("equivalent sample size must be positive and finite, got {0}")]
    BadEss(f64),
    #[error("dataset lacks variable `{0}`")]
    MissingVariable(String),
    #[error("graph and dataset share no variables")]
    EmptyOverlap,
    #[error("structure list is empty")]
    NoStructures,
    #[error("structures must share one node set")]
    MixedNodeSets,
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Prior strength and the uniform structure prior, in log space.
///
/// The structure prior is a constant, so it cancels in posterior
/// normalization; it is kept so reported joint log scores are complete.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    pub ess: f64,
    pub log_structure_prior: f64,
}

impl ScoreParams {
    pub fn new(ess: f64) -> Result<Self, ScoreError> {
        if !ess.is_finite() || ess <= 0.0 {
            return Err(ScoreError::BadEss(ess));
        }
        Ok(ScoreParams {
            ess,
            log_structure_prior: -(543.0f64.ln()),
        })
    }

    pub fn with_log_structure_prior(mut self, log_prior: f64) -> Self {
        self.log_structure_prior = log_prior;
        self
    }
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams::new(1.0).unwrap()
    }
}

/// Sufficient statistics of one family: counts indexed by parent
/// configuration (lexicographic, first parent most significant) and child
/// state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub q: usize,
    pub r: usize,
    /// `counts[j * r + k]`.
    pub counts: Vec<u64>,
}

impl CountTable {
    pub fn row_total(&self, j: usize) -> u64 {
        self.counts[j * self.r..(j + 1) * self.r].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Log marginal likelihood contribution of one family under a symmetric
/// Dirichlet prior with total mass `ess / q` per parent configuration.
pub fn family_log_marginal(table: &CountTable, ess: f64) -> f64 {
    let alpha_jk = ess / (table.q as f64 * table.r as f64);
    let alpha_j = ess / table.q as f64;
    let mut total = 0.0;
    for j in 0..table.q {
        let n_j = table.row_total(j);
        if n_j == 0 {
            continue; // the terms cancel exactly
        }
        total += libm::lgamma(alpha_j) - libm::lgamma(alpha_j + n_j as f64);
        for k in 0..table.r {
            let n_jk = table.counts[j * table.r + k];
            if n_jk > 0 {
                total += libm::lgamma(alpha_jk + n_jk as f64) - libm::lgamma(alpha_jk);
            }
        }
    }
    total
}

/// Shared counting and caching backend for scoring many structures over one
/// variable set.
///
/// Variables are handled in sorted-name order internally, so a family's score
/// is bit-identical however the calling structure declares its nodes.
pub struct FamilyScorer<'a> {
    data: &'a Dataset,
    names: Vec<String>,
    cols: Vec<usize>,
    arities: Vec<usize>,
    cube: Option<Vec<u64>>,
    cache: HashMap<(usize, Vec<usize>), f64>,
    ess: f64,
}

const CUBE_CELL_LIMIT: usize = 1 << 16;

impl<'a> FamilyScorer<'a> {
    pub fn new<S: AsRef<str>>(data: &'a Dataset, vars: &[S], ess: f64) -> Result<Self, ScoreError> {
        if vars.is_empty() {
            return Err(ScoreError::EmptyOverlap);
        }
        let mut names: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        let cols: Vec<usize> = names
            .iter()
            .map(|n| {
                data.column_index(n)
                    .map_err(|_| ScoreError::MissingVariable(n.clone()))
            })
            .collect::<Result<_, _>>()?;
        let arities: Vec<usize> = cols.iter().map(|&c| data.arity_of(c)).collect();

        let cells: usize = arities
            .iter()
            .try_fold(1usize, |acc, &r| {
                let next = acc.checked_mul(r)?;
                (next <= CUBE_CELL_LIMIT).then_some(next)
            })
            .unwrap_or(CUBE_CELL_LIMIT + 1);
        let cube = (cells <= CUBE_CELL_LIMIT).then(|| {
            let mut cube = vec![0u64; cells];
            for row in 0..data.n_rows() {
                let mut cell = 0usize;
                for (slot, &c) in cols.iter().enumerate() {
                    cell = cell * arities[slot] + data.value(row, c) as usize;
                }
                cube[cell] += 1;
            }
            cube
        });
        Ok(FamilyScorer {
            data,
            names,
            cols,
            arities,
            cube,
            cache: HashMap::new(),
            ess,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn slot_of(&self, name: &str) -> Result<usize, ScoreError> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .map_err(|_| ScoreError::MissingVariable(name.to_string()))
    }

    /// Counts for child `slot` given `parents` (sorted slots).
    pub fn counts(&self, child: usize, parents: &[usize]) -> CountTable {
        let r = self.arities[child];
        let q: usize = parents.iter().map(|&p| self.arities[p]).product();
        let mut counts = vec![0u64; q * r];
        match &self.cube {
            Some(cube) => {
                for (cell, &c) in cube.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    // Decode cell -> per-slot values (last slot fastest).
                    let mut values = vec![0usize; self.arities.len()];
                    let mut rem = cell;
                    for slot in (0..self.arities.len()).rev() {
                        values[slot] = rem % self.arities[slot];
                        rem /= self.arities[slot];
                    }
                    let mut j = 0usize;
                    for &p in parents {
                        j = j * self.arities[p] + values[p];
                    }
                    counts[j * r + values[child]] += c;
                }
            }
            None => {
                for row in 0..self.data.n_rows() {
                    let mut j = 0usize;
                    for &p in parents {
                        j = j * self.arities[p] + self.data.value(row, self.cols[p]) as usize;
                    }
                    let k = self.data.value(row, self.cols[child]) as usize;
                    counts[j * r + k] += 1;
                }
            }
        }
        CountTable { q, r, counts }
    }

    /// Cached family score for child `slot` with `parents` (any order).
    pub fn family_score(&mut self, child: usize, parents: &[usize]) -> f64 {
        let mut key_parents = parents.to_vec();
        key_parents.sort_unstable();
        if let Some(&hit) = self.cache.get(&(child, key_parents.clone())) {
            return hit;
        }
        let table = self.counts(child, &key_parents);
        let score = family_log_marginal(&table, self.ess);
        self.cache.insert((child, key_parents), score);
        score
    }

    /// Data term of a structure's score: the sum of its family scores,
    /// accumulated in sorted-name order.
    pub fn structure_log_marginal(&mut self, dag: &Dag) -> Result<f64, ScoreError> {
        let slots: Vec<usize> = dag
            .node_names()
            .iter()
            .map(|n| self.slot_of(n))
            .collect::<Result<_, _>>()?;
        let mut by_slot: Vec<(usize, Vec<usize>)> = (0..dag.node_count())
            .map(|i| {
                let parents: Vec<usize> = dag.parent_indices(i).iter().map(|&p| slots[p]).collect();
                (slots[i], parents)
            })
            .collect();
        by_slot.sort_by_key(|(child, _)| *child);
        let mut total = 0.0;
        for (child, parents) in by_slot {
            total += self.family_score(child, &parents);
        }
        Ok(total)
    }
}

/// Log of the joint structure-and-data score `log P(S) + log P(D | S)`.
pub fn bde_log_score(g: &Dag, d: &Dataset, p: &ScoreParams) -> Result<f64, ScoreError> {
    if !p.ess.is_finite() || p.ess <= 0.0 {
        return Err(ScoreError::BadEss(p.ess));
    }
    let mut scorer = FamilyScorer::new(d, g.node_names(), p.ess)?;
    Ok(p.log_structure_prior + scorer.structure_log_marginal(g)?)
}

/// Normalized posterior over a list of structures sharing one node set.
///
/// Computed stably by shifting log scores by their max before
/// exponentiating; sums to one within 1e-12.
pub fn posterior_over_dags(
    dags: &[Dag],
    d: &Dataset,
    p: &ScoreParams,
) -> Result<Vec<f64>, ScoreError> {
    if dags.is_empty() {
        return Err(ScoreError::NoStructures);
    }
    if !p.ess.is_finite() || p.ess <= 0.0 {
        return Err(ScoreError::BadEss(p.ess));
    }
    let mut base: Vec<&String> = dags[0].node_names().iter().collect();
    base.sort();
    for dag in &dags[1..] {
        let mut names: Vec<&String> = dag.node_names().iter().collect();
        names.sort();
        if names != base {
            return Err(ScoreError::MixedNodeSets);
        }
    }
    let mut scorer = FamilyScorer::new(d, dags[0].node_names(), p.ess)?;
    let mut logs = Vec::with_capacity(dags.len());
    for dag in dags {
        logs.push(p.log_structure_prior + scorer.structure_log_marginal(dag)?);
    }
    let max = logs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let weights: Vec<f64> = logs.iter().map(|&s| (s - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let posterior: Vec<f64> = weights.iter().map(|w| w / total).collect();
    debug_assert!((posterior.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    Ok(posterior)
}
