//! Discrete complete-table Bayesian networks: parameterization, exact joint
//! computation, latent-variable marginalization, forward sampling, and
//! in-distribution independence testing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::graph::{Dag, GraphError, NodeSet};

/// Guard on the configuration count of an exact joint.
pub const MAX_JOINT_CELLS: usize = 1 << 24;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("arity of `{0}` must be at least 2, got {1}")]
    BadArity(String, usize),
    #[error("arity of `{0}` exceeds the cell type limit of 256")]
    ArityTooLarge(String),
    #[error("concentration must be positive and finite, got {0}")]
    BadConcentration(f64),
    #[error("CPT of `{node}` has {got} rows, expected {expected}")]
    CptRowCount {
        node: String,
        got: usize,
        expected: usize,
    },
    #[error("CPT row {row} of `{node}` has length {got}, expected {expected}")]
    CptRowLength {
        node: String,
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("CPT row {row} of `{node}` is not a probability vector")]
    CptRowNotDistribution { node: String, row: usize },
    #[error("joint would need {0} cells, over the {1} guard")]
    JointTooLarge(usize, usize),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variables overlap: {0}")]
    InvalidQuery(String),
    #[error("dataset value {value} out of range for `{name}` (arity {arity})")]
    ValueOutOfRange {
        name: String,
        value: usize,
        arity: usize,
    },
    #[error("row {0} has {1} cells, expected {2}")]
    RaggedRow(usize, usize, usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

const ROW_SUM_TOL: f64 = 1e-12;

/// Probability mass tolerance for joint tables.
pub const MASS_TOL: f64 = 1e-9;

/// A DAG with per-node arities, latent flags, and complete conditional
/// probability tables.
///
/// CPT rows are indexed by parent configuration in lexicographic parent-value
/// order; parents are taken in node-declaration order with the first parent
/// most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBayesNet {
    dag: Dag,
    arities: Vec<usize>,
    latent: Vec<bool>,
    cpts: Vec<Vec<Vec<f64>>>,
}

impl DiscreteBayesNet {
    pub fn new(
        dag: Dag,
        arities: Vec<usize>,
        latent: Vec<bool>,
        cpts: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self, NetError> {
        let n = dag.node_count();
        assert_eq!(arities.len(), n, "one arity per node");
        assert_eq!(latent.len(), n, "one latent flag per node");
        assert_eq!(cpts.len(), n, "one CPT per node");
        for i in 0..n {
            let name = dag.name_of(i);
            if arities[i] < 2 {
                return Err(NetError::BadArity(name.to_string(), arities[i]));
            }
            if arities[i] > 256 {
                return Err(NetError::ArityTooLarge(name.to_string()));
            }
            let q: usize = dag.parent_indices(i).iter().map(|&p| arities[p]).product();
            if cpts[i].len() != q {
                return Err(NetError::CptRowCount {
                    node: name.to_string(),
                    got: cpts[i].len(),
                    expected: q,
                });
            }
            for (j, row) in cpts[i].iter().enumerate() {
                if row.len() != arities[i] {
                    return Err(NetError::CptRowLength {
                        node: name.to_string(),
                        row: j,
                        got: row.len(),
                        expected: arities[i],
                    });
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > ROW_SUM_TOL
                {
                    return Err(NetError::CptRowNotDistribution {
                        node: name.to_string(),
                        row: j,
                    });
                }
            }
        }
        Ok(DiscreteBayesNet {
            dag,
            arities,
            latent,
            cpts,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn arity(&self, i: usize) -> usize {
        self.arities[i]
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn is_latent(&self, i: usize) -> bool {
        self.latent[i]
    }

    pub fn latent_flags(&self) -> &[bool] {
        &self.latent
    }

    pub fn cpt(&self, i: usize) -> &[Vec<f64>] {
        &self.cpts[i]
    }

    /// Marks the named variables latent; the rest stay observed.
    pub fn with_latent<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self, NetError> {
        self.latent = vec![false; self.dag.node_count()];
        for name in names {
            let i = self.dag.node_index(name.as_ref())?;
            self.latent[i] = true;
        }
        Ok(self)
    }

    /// Observed variable names in declaration order.
    pub fn observed_names(&self) -> Vec<String> {
        self.dag
            .node_names()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.latent[*i])
            .map(|(_, n)| n.clone())
            .collect()
    }

    /// Row index into a node's CPT for a full configuration.
    fn cpt_row(&self, node: usize, config: &[usize]) -> usize {
        let mut row = 0;
        for &p in self.dag.parent_indices(node) {
            row = row * self.arities[p] + config[p];
        }
        row
    }

    /// Probability of one full configuration under the factored joint.
    pub fn config_probability(&self, config: &[usize]) -> f64 {
        let mut p = 1.0;
        for i in 0..self.dag.node_count() {
            p *= self.cpts[i][self.cpt_row(i, config)][config[i]];
        }
        p
    }

    /// Log-likelihood of a dataset under this net's parameters; rows must
    /// cover every observed variable of the net and the net must have no
    /// latent variables (otherwise the factored form does not marginalize).
    pub fn log_likelihood(&self, data: &Dataset) -> Result<f64, NetError> {
        let n = self.dag.node_count();
        let cols: Vec<usize> = self
            .dag
            .node_names()
            .iter()
            .map(|name| data.column_index(name))
            .collect::<Result<_, _>>()?;
        let mut total = 0.0;
        let mut config = vec![0usize; n];
        for r in 0..data.n_rows() {
            for i in 0..n {
                config[i] = data.value(r, cols[i]) as usize;
            }
            total += self.config_probability(&config).ln();
        }
        Ok(total)
    }
}

/// Draws every CPT row from a symmetric Dirichlet with the given
/// concentration; deterministic given the seed.
pub fn random_parameterization(
    dag: &Dag,
    arities: &[usize],
    seed: u64,
    concentration: f64,
) -> Result<DiscreteBayesNet, NetError> {
    if !concentration.is_finite() || concentration <= 0.0 {
        return Err(NetError::BadConcentration(concentration));
    }
    for (i, &r) in arities.iter().enumerate() {
        if r < 2 {
            return Err(NetError::BadArity(dag.name_of(i).to_string(), r));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = Gamma::new(concentration, 1.0).expect("validated above");
    let n = dag.node_count();
    let mut cpts = Vec::with_capacity(n);
    for i in 0..n {
        let q: usize = dag.parent_indices(i).iter().map(|&p| arities[p]).product();
        let mut rows = Vec::with_capacity(q);
        for _ in 0..q {
            let mut row: Vec<f64> = (0..arities[i]).map(|_| gamma.sample(&mut rng)).collect();
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                row = vec![1.0 / arities[i] as f64; arities[i]];
            } else {
                for v in &mut row {
                    *v /= sum;
                }
            }
            rows.push(row);
        }
        cpts.push(rows);
    }
    DiscreteBayesNet::new(dag.clone(), arities.to_vec(), vec![false; n], cpts)
}

/// Dense joint distribution over named discrete variables.
///
/// Cell layout: first variable most significant, mirroring the CPT row
/// convention.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    vars: Vec<(String, usize)>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn vars(&self) -> &[(String, usize)] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn var_index(&self, name: &str) -> Result<usize, NetError> {
        self.vars
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| NetError::UnknownVariable(name.to_string()))
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].1;
        }
        strides
    }
}

/// Exact joint of a net by enumerating every configuration.
pub fn exact_joint(net: &DiscreteBayesNet) -> Result<JointTable, NetError> {
    let n = net.dag().node_count();
    let mut cells = 1usize;
    for i in 0..n {
        cells = cells.saturating_mul(net.arity(i));
        if cells > MAX_JOINT_CELLS {
            return Err(NetError::JointTooLarge(cells, MAX_JOINT_CELLS));
        }
    }
    let vars: Vec<(String, usize)> = (0..n)
        .map(|i| (net.dag().name_of(i).to_string(), net.arity(i)))
        .collect();
    let mut probs = Vec::with_capacity(cells);
    let mut config = vec![0usize; n];
    loop {
        probs.push(net.config_probability(&config));
        // Odometer, last variable fastest.
        let mut k = n;
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            config[k] += 1;
            if config[k] < net.arity(k) {
                break;
            }
            config[k] = 0;
        }
        if config.iter().all(|&v| v == 0) {
            break;
        }
    }
    debug_assert_eq!(probs.len(), cells);
    let table = JointTable { vars, probs };
    debug_assert!((table.mass() - 1.0).abs() < MASS_TOL);
    Ok(table)
}

/// Sums out every variable not in `keep`, preserving the table's variable
/// order and total mass.
pub fn marginalize(joint: &JointTable, keep: &NodeSet) -> Result<JointTable, NetError> {
    for name in keep {
        joint.var_index(name)?;
    }
    let kept: Vec<usize> = (0..joint.vars.len())
        .filter(|&i| keep.contains(&joint.vars[i].0))
        .collect();
    let out_vars: Vec<(String, usize)> = kept.iter().map(|&i| joint.vars[i].clone()).collect();
    let out_cells: usize = out_vars.iter().map(|(_, r)| r).product::<usize>().max(1);
    let mut out = vec![0.0f64; out_cells];

    let in_strides = joint.strides();
    let mut out_strides = vec![1usize; kept.len()];
    for i in (0..kept.len().saturating_sub(1)).rev() {
        out_strides[i] = out_strides[i + 1] * out_vars[i + 1].1;
    }
    for (cell, p) in joint.probs.iter().enumerate() {
        let mut idx = 0;
        for (k, &i) in kept.iter().enumerate() {
            let v = cell / in_strides[i] % joint.vars[i].1;
            idx += v * out_strides[k];
        }
        out[idx] += p;
    }
    Ok(JointTable {
        vars: out_vars,
        probs: out,
    })
}

/// Tests `a` independent of `b` given `cond` inside a joint table: the max
/// deviation `|P(a,b|c) - P(a|c) P(b|c)|` over all configurations must stay
/// within `tol`. Zero-probability conditioning contexts are skipped.
pub fn independent_in_dist(
    joint: &JointTable,
    a: &str,
    b: &str,
    cond: &NodeSet,
    tol: f64,
) -> Result<bool, NetError> {
    if a == b {
        return Err(NetError::InvalidQuery(format!("`{a}` against itself")));
    }
    if cond.contains(a) || cond.contains(b) {
        return Err(NetError::InvalidQuery(format!(
            "conditioning set contains an endpoint of the pair ({a}, {b})"
        )));
    }
    let mut keep: NodeSet = cond.clone();
    keep.insert(a.to_string());
    keep.insert(b.to_string());
    let reduced = marginalize(joint, &keep)?;
    let ai = reduced.var_index(a)?;
    let bi = reduced.var_index(b)?;
    let (ra, rb) = (reduced.vars[ai].1, reduced.vars[bi].1);
    let strides = reduced.strides();
    let cond_axes: Vec<usize> = (0..reduced.vars.len())
        .filter(|&i| i != ai && i != bi)
        .collect();
    let cond_cells: usize = cond_axes
        .iter()
        .map(|&i| reduced.vars[i].1)
        .product::<usize>()
        .max(1);

    for ctx in 0..cond_cells {
        // Base offset of this conditioning configuration.
        let mut base = 0usize;
        let mut rem = ctx;
        for &axis in cond_axes.iter().rev() {
            let r = reduced.vars[axis].1;
            base += (rem % r) * strides[axis];
            rem /= r;
        }
        let cell = |va: usize, vb: usize| reduced.probs[base + va * strides[ai] + vb * strides[bi]];
        let mass: f64 = (0..ra)
            .map(|va| (0..rb).map(|vb| cell(va, vb)).sum::<f64>())
            .sum();
        if mass == 0.0 {
            continue;
        }
        for va in 0..ra {
            let pa: f64 = (0..rb).map(|vb| cell(va, vb)).sum::<f64>() / mass;
            for vb in 0..rb {
                let pb: f64 = (0..ra).map(|u| cell(u, vb)).sum::<f64>() / mass;
                let pab = cell(va, vb) / mass;
                if (pab - pa * pb).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Checks that the net's distribution, marginalized onto `observed`, is a
/// perfect-map image of its graph there: for every pair and every
/// conditioning subset of `observed`, in-distribution independence holds iff
/// d-separation holds in the full graph.
pub fn verify_perfect_map(
    net: &DiscreteBayesNet,
    observed: &NodeSet,
    tol: f64,
) -> Result<bool, NetError> {
    if observed.len() > 16 {
        return Err(NetError::InvalidQuery(format!(
            "perfect-map check over {} observed variables enumerates 2^{} conditioning sets",
            observed.len(),
            observed.len() - 2
        )));
    }
    let joint = exact_joint(net)?;
    let marginal = marginalize(&joint, observed)?;
    let names: Vec<&String> = observed.iter().collect();
    for i in 0..names.len() {
        for j in (i + 1)..names.len() {
            let rest: Vec<&String> = names
                .iter()
                .filter(|v| **v != names[i] && **v != names[j])
                .copied()
                .collect();
            for mask in 0u32..(1 << rest.len()) {
                let cond: NodeSet = rest
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, v)| (*v).clone())
                    .collect();
                let independent = independent_in_dist(&marginal, names[i], names[j], &cond, tol)?;
                let separated = net.dag().d_separated(names[i], names[j], &cond)?;
                if independent != separated {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Complete discrete cases over named variables with known arities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    vars: Vec<(String, usize)>,
    rows: Vec<u8>, // row-major
}

impl Dataset {
    pub fn new(vars: Vec<(String, usize)>, rows: Vec<Vec<u8>>) -> Result<Self, NetError> {
        for (name, arity) in &vars {
            if *arity < 2 {
                return Err(NetError::BadArity(name.clone(), *arity));
            }
            if *arity > 256 {
                return Err(NetError::ArityTooLarge(name.clone()));
            }
        }
        let width = vars.len();
        let mut flat = Vec::with_capacity(width * rows.len());
        for (r, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(NetError::RaggedRow(r, row.len(), width));
            }
            for (c, &v) in row.iter().enumerate() {
                if v as usize >= vars[c].1 {
                    return Err(NetError::ValueOutOfRange {
                        name: vars[c].0.clone(),
                        value: v as usize,
                        arity: vars[c].1,
                    });
                }
            }
            flat.extend_from_slice(row);
        }
        Ok(Dataset { vars, rows: flat })
    }

    pub fn empty(vars: Vec<(String, usize)>) -> Result<Self, NetError> {
        Dataset::new(vars, Vec::new())
    }

    pub fn n_rows(&self) -> usize {
        if self.vars.is_empty() {
            0
        } else {
            self.rows.len() / self.vars.len()
        }
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[(String, usize)] {
        &self.vars
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn arity_of(&self, col: usize) -> usize {
        self.vars[col].1
    }

    pub fn value(&self, row: usize, col: usize) -> u8 {
        self.rows[row * self.vars.len() + col]
    }

    pub fn column_index(&self, name: &str) -> Result<usize, NetError> {
        self.vars
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| NetError::UnknownVariable(name.to_string()))
    }

    /// Projection onto the named columns, in the order given.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset, NetError> {
        let cols: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n.as_ref()))
            .collect::<Result<_, _>>()?;
        let vars: Vec<(String, usize)> = cols.iter().map(|&c| self.vars[c].clone()).collect();
        let mut rows = Vec::with_capacity(self.n_rows() * cols.len());
        for r in 0..self.n_rows() {
            for &c in &cols {
                rows.push(self.value(r, c));
            }
        }
        Ok(Dataset { vars, rows })
    }

    /// Empirical frequency of each value of one column.
    pub fn column_frequencies(&self, col: usize) -> Vec<f64> {
        let mut counts = vec![0usize; self.vars[col].1];
        for r in 0..self.n_rows() {
            counts[self.value(r, col) as usize] += 1;
        }
        let m = self.n_rows().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / m).collect()
    }
}

/// Ancestral sampling of `m` iid cases; latent columns are dropped from the
/// returned dataset. Deterministic given the seed.
pub fn forward_sample(net: &DiscreteBayesNet, m: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = net.dag().topological_order().expect("nets hold DAGs");
    let n = net.dag().node_count();
    let observed: Vec<usize> = (0..n).filter(|&i| !net.is_latent(i)).collect();
    let vars: Vec<(String, usize)> = observed
        .iter()
        .map(|&i| (net.dag().name_of(i).to_string(), net.arity(i)))
        .collect();
    let mut rows = Vec::with_capacity(m * observed.len());
    let mut config = vec![0usize; n];
    for _ in 0..m {
        for &i in &order {
            let row = &net.cpts[i][net.cpt_row(i, &config)];
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut value = net.arity(i) - 1;
            for (k, p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    value = k;
                    break;
                }
            }
            config[i] = value;
        }
        for &i in &observed {
            rows.push(config[i] as u8);
        }
    }
    Dataset { vars, rows }
}
