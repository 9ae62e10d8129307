//! File formats shared by the library and the command line: a JSON schema
//! for networks (structure, arities, latent flags, optional CPTs) and a
//! plain CSV form for datasets (header row of names, integer category codes,
//! no missing cells).

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes_net::{Dataset, DiscreteBayesNet, NetError};
use crate::graph::{Dag, GraphError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("network file has no CPTs")]
    MissingCpts,
    #[error("no CPT for variable `{0}`")]
    MissingCptFor(String),
    #[error("CPTs given for unknown variable `{0}`")]
    UnknownCptVariable(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub arity: usize,
    #[serde(default)]
    pub latent: bool,
}

/// On-disk network document.
///
/// `cpts` maps node name to rows in lexicographic parent-configuration order
/// (parents in declaration order, first parent most significant); it may be
/// omitted for structure-only uses such as d-separation queries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetFile {
    pub variables: Vec<VarDecl>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpts: Option<BTreeMap<String, Vec<Vec<f64>>>>,
}

impl NetFile {
    pub fn to_dag(&self) -> Result<Dag, FormatError> {
        Ok(Dag::new(
            self.variables.iter().map(|v| v.name.clone()).collect(),
            self.edges.clone(),
        )?)
    }

    pub fn latent_names(&self) -> Vec<String> {
        self.variables
            .iter()
            .filter(|v| v.latent)
            .map(|v| v.name.clone())
            .collect()
    }

    pub fn arities(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.arity).collect()
    }

    /// Materializes a full net; errors when CPTs are absent or malformed.
    pub fn to_net(&self) -> Result<DiscreteBayesNet, FormatError> {
        let dag = self.to_dag()?;
        let cpts_by_name = self.cpts.as_ref().ok_or(FormatError::MissingCpts)?;
        for name in cpts_by_name.keys() {
            if !self.variables.iter().any(|v| &v.name == name) {
                return Err(FormatError::UnknownCptVariable(name.clone()));
            }
        }
        let mut cpts = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let rows = cpts_by_name
                .get(&v.name)
                .ok_or_else(|| FormatError::MissingCptFor(v.name.clone()))?;
            cpts.push(rows.clone());
        }
        let latent: Vec<bool> = self.variables.iter().map(|v| v.latent).collect();
        Ok(DiscreteBayesNet::new(dag, self.arities(), latent, cpts)?)
    }

    pub fn from_net(net: &DiscreteBayesNet) -> NetFile {
        let dag = net.dag();
        let variables = (0..dag.node_count())
            .map(|i| VarDecl {
                name: dag.name_of(i).to_string(),
                arity: net.arity(i),
                latent: net.is_latent(i),
            })
            .collect();
        let edges = dag
            .edges()
            .into_iter()
            .map(|(p, c)| (p.to_string(), c.to_string()))
            .collect();
        let cpts = (0..dag.node_count())
            .map(|i| (dag.name_of(i).to_string(), net.cpt(i).to_vec()))
            .collect();
        NetFile {
            variables,
            edges,
            cpts: Some(cpts),
        }
    }

    pub fn load(path: &Path) -> Result<NetFile, FormatError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(fs::write(path, text)?)
    }
}

/// Writes header plus one integer-coded row per case.
pub fn write_dataset_csv<W: Write>(d: &Dataset, mut out: W) -> std::io::Result<()> {
    use std::fmt::Write as _;
    writeln!(out, "{}", d.var_names().join(","))?;
    let width = d.n_vars();
    let mut line = String::new();
    for r in 0..d.n_rows() {
        line.clear();
        for c in 0..width {
            if c > 0 {
                line.push(',');
            }
            let _ = write!(line, "{}", d.value(r, c));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads a CSV dataset, inferring each column's arity as `max(code) + 1`
/// with a floor of 2. Rejects ragged rows and anything that is not an
/// integer category code.
pub fn read_dataset_csv<R: BufRead>(input: R) -> Result<Dataset, FormatError> {
    let mut lines = input.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => {
            return Err(FormatError::Csv {
                line: 1,
                message: "empty file, expected a header row".into(),
            })
        }
    };
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(|n| n.is_empty()) {
        return Err(FormatError::Csv {
            line: 1,
            message: "empty column name".into(),
        });
    }
    let width = names.len();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(FormatError::Csv {
                line: line_no,
                message: format!("expected {width} cells, found {}", cells.len()),
            });
        }
        let mut row = Vec::with_capacity(width);
        for cell in cells {
            let value: u8 = cell.trim().parse().map_err(|_| FormatError::Csv {
                line: line_no,
                message: format!("`{}` is not an integer category code", cell.trim()),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    let mut arities = vec![2usize; width];
    for row in &rows {
        for (c, &v) in row.iter().enumerate() {
            arities[c] = arities[c].max(v as usize + 1);
        }
    }
    let vars: Vec<(String, usize)> = names.into_iter().zip(arities).collect();
    Ok(Dataset::new(vars, rows)?)
}

pub fn load_dataset(path: &Path) -> Result<Dataset, FormatError> {
    let file = fs::File::open(path)?;
    read_dataset_csv(std::io::BufReader::new(file))
}

pub fn save_dataset(d: &Dataset, path: &Path) -> Result<(), FormatError> {
    let mut file = fs::File::create(path)?;
    write_dataset_csv(d, &mut file)?;
    Ok(())
}
