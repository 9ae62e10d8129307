//! Convergence-experiment harness: named generator fixtures, a faithfulness
//! screen for their random parameterizations, and a seeded replicate runner
//! whose reports are byte-identical across runs for a fixed configuration.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes_net::{
    forward_sample, random_parameterization, verify_perfect_map, Dataset, DiscreteBayesNet,
    NetError,
};
use crate::discovery::{blcd_search_report, y_posterior, DiscoveryError, DiscoveryReport, YArc};
use crate::equivalence::{enumerate_dags, EquivalenceError};
use crate::graph::{Dag, GraphError, NodeSet};
use crate::io::{FormatError, NetFile};
use crate::pag::{epys_holds, PagError};
use crate::scoring::{ScoreError, ScoreParams};

/// Environment variable capping the harness worker count.
pub const THREADS_ENV: &str = "YSTRUCT_THREADS";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(
        "fixture failed the faithfulness screen after {attempts} attempts \
         (m = {m}, replicate = {replicate}); skipped seeds: {skipped:?}"
    )]
    FaithfulnessScreen {
        m: usize,
        replicate: usize,
        attempts: usize,
        skipped: Vec<u64>,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Pag(#[from] PagError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
}

/// splitmix64 of the concatenated parts; the seed-derivation function for
/// replicates, screen attempts, and sampling streams.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        let mut z = h ^ p;
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

const SAMPLE_STREAM_TAG: u64 = 0x5A4D;

/// Success-rate thresholds echoed into reports; nothing is hard-coded in the
/// runner itself.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// An arc posterior at or above this counts as a confident discovery.
    pub high_posterior: f64,
    /// An arc posterior at or below this counts as a confident rejection.
    pub low_posterior: f64,
    /// Arc-collection threshold handed to the blanket-guided search.
    pub blcd: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            high_posterior: 0.9,
            low_posterior: 0.1,
            blcd: 0.5,
        }
    }
}

/// Full description of one convergence study.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Named fixture (`y_net`, `near_y_net`, `latent_confounder_net`,
    /// `epys_latent_net`, `independent_net`) or a path to a network JSON
    /// file.
    pub generator: String,
    pub master_seed: u64,
    pub replicates: usize,
    /// Strictly ascending positive case counts.
    pub sample_sizes: Vec<usize>,
    pub ess: f64,
    /// Arity used for every fixture variable.
    pub arity: usize,
    /// The faithfulness screen rejects parameterizations whose weakest
    /// entailed dependence falls at or below this deviation; detectability at
    /// the configured sample sizes needs a margin well above the 1e-6 floor.
    pub faithfulness_tol: f64,
    pub max_screen_attempts: usize,
    pub thresholds: Thresholds,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generator: "y_net".into(),
            master_seed: 1,
            replicates: 20,
            sample_sizes: vec![100, 1_000, 10_000, 50_000],
            ess: 1.0,
            arity: 2,
            faithfulness_tol: 0.02,
            max_screen_attempts: 5000,
            thresholds: Thresholds::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |msg: String| Err(ExperimentError::InvalidConfig(msg));
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        if self.sample_sizes.is_empty() {
            return fail("sample_sizes must be nonempty".into());
        }
        if self.sample_sizes.contains(&0) {
            return fail("sample sizes must be positive".into());
        }
        if self.sample_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return fail("sample sizes must be strictly ascending".into());
        }
        if !self.ess.is_finite() || self.ess <= 0.0 {
            return fail(format!("ess must be positive, got {}", self.ess));
        }
        if self.arity < 2 {
            return fail(format!("arity must be at least 2, got {}", self.arity));
        }
        if !self.faithfulness_tol.is_finite() || self.faithfulness_tol < 0.0 {
            return fail(format!(
                "faithfulness_tol must be nonnegative, got {}",
                self.faithfulness_tol
            ));
        }
        if self.max_screen_attempts == 0 {
            return fail("max_screen_attempts must be at least 1".into());
        }
        for (name, t) in [
            ("high_posterior", self.thresholds.high_posterior),
            ("low_posterior", self.thresholds.low_posterior),
            ("blcd", self.thresholds.blcd),
        ] {
            if !t.is_finite() || !(0.0..=1.0).contains(&t) {
                return fail(format!("threshold {name} must lie in [0, 1], got {t}"));
            }
        }
        Ok(())
    }

    pub fn score_params(&self) -> Result<ScoreParams, ScoreError> {
        ScoreParams::new(self.ess)
    }
}

/// A generator: structure, latent flags, optional fixed CPTs, and the
/// fixture's designated sink arc plus expected large-sample winner over the
/// observed margin.
#[derive(Debug, Clone)]
pub struct FixtureNet {
    pub label: String,
    pub dag: Dag,
    pub arities: Vec<usize>,
    pub latent: Vec<String>,
    pub cpts: Option<Vec<Vec<Vec<f64>>>>,
    pub designated: Option<(String, String)>,
    pub expected_observed_edges: Option<Vec<(String, String)>>,
}

impl FixtureNet {
    pub fn observed_sorted(&self) -> Vec<String> {
        let mut observed: Vec<String> = self
            .dag
            .node_names()
            .iter()
            .filter(|n| !self.latent.contains(n))
            .cloned()
            .collect();
        observed.sort();
        observed
    }
}

/// Resolves a generator name (or a path to a network JSON file) into a
/// fixture at the requested arity.
pub fn fixture_net(generator: &str, arity: usize) -> Result<FixtureNet, ExperimentError> {
    let quad = ["W1", "W2", "X", "Z"];
    let sink = Some(("X".to_string(), "Z".to_string()));
    let own = |edges: &[(&str, &str)]| -> Vec<(String, String)> {
        edges
            .iter()
            .map(|(p, c)| (p.to_string(), c.to_string()))
            .collect()
    };
    let fixture = match generator {
        "y_net" => {
            let edges = [("W1", "X"), ("W2", "X"), ("X", "Z")];
            FixtureNet {
                label: generator.into(),
                dag: Dag::from_strs(&quad, &edges)?,
                arities: vec![arity; 4],
                latent: vec![],
                cpts: None,
                designated: sink,
                expected_observed_edges: Some(own(&edges)),
            }
        }
        "near_y_net" => {
            let edges = [("W1", "X"), ("W2", "X"), ("X", "Z"), ("W1", "Z")];
            FixtureNet {
                label: generator.into(),
                dag: Dag::from_strs(&quad, &edges)?,
                arities: vec![arity; 4],
                latent: vec![],
                cpts: None,
                designated: sink,
                expected_observed_edges: Some(own(&edges)),
            }
        }
        "latent_confounder_net" => {
            // The hidden cause of both X and Z breaks the pure pattern; over
            // the margin the everything-into-X collider wins instead.
            let edges = [("H", "X"), ("H", "Z"), ("W1", "X"), ("W2", "X")];
            FixtureNet {
                label: generator.into(),
                dag: Dag::from_strs(&["H", "W1", "W2", "X", "Z"], &edges)?,
                arities: vec![arity; 5],
                latent: vec!["H".into()],
                cpts: None,
                designated: sink,
                expected_observed_edges: Some(own(&[("W1", "X"), ("W2", "X"), ("Z", "X")])),
            }
        }
        "epys_latent_net" => {
            // The full Y pattern plus hidden ancestors that confound each
            // source with the collider but leave the sink arc unconfounded:
            // the observed margin keeps exactly the pure-pattern separations.
            let edges = [
                ("W1", "X"),
                ("W2", "X"),
                ("X", "Z"),
                ("H1", "W1"),
                ("H1", "X"),
                ("H2", "W2"),
                ("H2", "X"),
            ];
            FixtureNet {
                label: generator.into(),
                dag: Dag::from_strs(&["H1", "H2", "W1", "W2", "X", "Z"], &edges)?,
                arities: vec![arity; 6],
                latent: vec!["H1".into(), "H2".into()],
                cpts: None,
                designated: sink,
                expected_observed_edges: Some(own(&[("W1", "X"), ("W2", "X"), ("X", "Z")])),
            }
        }
        "independent_net" => FixtureNet {
            label: generator.into(),
            dag: Dag::from_strs(&quad, &[])?,
            arities: vec![arity; 4],
            latent: vec![],
            cpts: None,
            designated: None,
            expected_observed_edges: Some(vec![]),
        },
        path => {
            let file = NetFile::load(Path::new(path))?;
            let dag = file.to_dag()?;
            let cpts = match file.to_net() {
                Ok(net) => Some((0..dag.node_count()).map(|i| net.cpt(i).to_vec()).collect()),
                Err(FormatError::MissingCpts) => None,
                Err(e) => return Err(e.into()),
            };
            FixtureNet {
                label: PathBuf::from(path).display().to_string(),
                dag,
                arities: file.arities(),
                latent: file.latent_names(),
                cpts,
                designated: None,
                expected_observed_edges: None,
            }
        }
    };
    Ok(fixture)
}

/// Draws parameterizations until one passes the faithfulness screen over the
/// observed margin, or the attempt budget runs out. Fixed-CPT fixtures get a
/// single screened attempt.
pub fn screened_parameterization(
    fixture: &FixtureNet,
    base_seed: u64,
    tol: f64,
    max_attempts: usize,
) -> Result<(DiscreteBayesNet, usize, Vec<u64>), ExperimentError> {
    let observed: NodeSet = fixture.observed_sorted().into_iter().collect();
    let mut skipped = Vec::new();
    if let Some(cpts) = &fixture.cpts {
        let latent_flags: Vec<bool> = fixture
            .dag
            .node_names()
            .iter()
            .map(|n| fixture.latent.contains(n))
            .collect();
        let net = DiscreteBayesNet::new(
            fixture.dag.clone(),
            fixture.arities.clone(),
            latent_flags,
            cpts.clone(),
        )?;
        if verify_perfect_map(&net, &observed, tol)? {
            return Ok((net, 1, skipped));
        }
        return Err(ExperimentError::FaithfulnessScreen {
            m: 0,
            replicate: 0,
            attempts: 1,
            skipped: vec![base_seed],
        });
    }
    let latent_refs: Vec<&str> = fixture.latent.iter().map(|s| s.as_str()).collect();
    for attempt in 0..max_attempts {
        let seed = mix_seed(&[base_seed, attempt as u64]);
        let net = random_parameterization(&fixture.dag, &fixture.arities, seed, 1.0)?
            .with_latent(&latent_refs)?;
        if verify_perfect_map(&net, &observed, tol)? {
            return Ok((net, attempt + 1, skipped));
        }
        skipped.push(seed);
    }
    Err(ExperimentError::FaithfulnessScreen {
        m: 0,
        replicate: 0,
        attempts: max_attempts,
        skipped,
    })
}

/// Screened net plus a sampled dataset; the generation path behind both the
/// harness and the `gen` subcommand.
pub fn generate_dataset(
    fixture: &FixtureNet,
    seed: u64,
    m: usize,
    tol: f64,
    max_attempts: usize,
) -> Result<(DiscreteBayesNet, Dataset), ExperimentError> {
    let (net, _, _) = screened_parameterization(fixture, seed, tol, max_attempts)?;
    let data = forward_sample(&net, m, mix_seed(&[seed, SAMPLE_STREAM_TAG]));
    Ok((net, data))
}

/// One replicate's results.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicateOutcome {
    pub m: usize,
    pub replicate: usize,
    pub seed: u64,
    pub screen_attempts: usize,
    pub skipped_seeds: Vec<u64>,
    /// Whether the generating net's observed signature is exactly the pure
    /// Y-structure pattern (only meaningful for four observed variables).
    pub epys: Option<bool>,
    pub argmax_index: Option<usize>,
    pub argmax_edges: Option<String>,
    pub argmax_is_expected: Option<bool>,
    pub argmax_is_designated_y: Option<bool>,
    /// Posterior of the fixture's designated sink arc.
    pub designated_posterior: Option<f64>,
    /// Largest posterior among all twelve sink-arc hypotheses.
    pub max_arc_posterior: Option<f64>,
    pub top_arc: Option<YArc>,
    pub blcd_arcs: Vec<YArc>,
}

/// Per-sample-size success rates.
#[derive(Debug, Clone, Serialize)]
pub struct SampleSizeSummary {
    pub m: usize,
    pub replicates: usize,
    pub rate_argmax_expected: Option<f64>,
    pub rate_argmax_designated_y: Option<f64>,
    pub rate_designated_at_or_above_high: Option<f64>,
    pub rate_designated_below_low: Option<f64>,
    pub median_designated_posterior: Option<f64>,
}

/// Full study output; serializes to JSON and renders as an aligned table.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub fixture: String,
    pub observed: Vec<String>,
    pub designated: Option<(String, String)>,
    pub expected_argmax_index: Option<usize>,
    pub designated_y_index: Option<usize>,
    pub note: &'static str,
    pub outcomes: Vec<ReplicateOutcome>,
    pub summaries: Vec<SampleSizeSummary>,
}

fn canonical_index(observed_sorted: &[String], edges: &[(String, String)]) -> Option<usize> {
    let target: std::collections::BTreeSet<(String, String)> = edges.iter().cloned().collect();
    for (i, dag) in enumerate_dags(observed_sorted).ok()?.enumerate() {
        let set: std::collections::BTreeSet<(String, String)> = dag
            .edges()
            .into_iter()
            .map(|(p, c)| (p.to_string(), c.to_string()))
            .collect();
        if set == target {
            return Some(i);
        }
    }
    None
}

fn run_replicate(
    cfg: &ExperimentConfig,
    fixture: &FixtureNet,
    params: &ScoreParams,
    expected_index: Option<usize>,
    designated_y_index: Option<usize>,
    m: usize,
    replicate: usize,
) -> Result<ReplicateOutcome, ExperimentError> {
    let seed = mix_seed(&[cfg.master_seed, replicate as u64, m as u64]);
    let (net, attempts, skipped) =
        screened_parameterization(fixture, seed, cfg.faithfulness_tol, cfg.max_screen_attempts)
            .map_err(|e| match e {
                ExperimentError::FaithfulnessScreen {
                    attempts, skipped, ..
                } => ExperimentError::FaithfulnessScreen {
                    m,
                    replicate,
                    attempts,
                    skipped,
                },
                other => other,
            })?;
    let data = forward_sample(&net, m, mix_seed(&[seed, SAMPLE_STREAM_TAG]));
    let observed = fixture.observed_sorted();

    let tetrad_report: Option<DiscoveryReport> = if observed.len() == 4 {
        Some(y_posterior(&data.restrict(&observed)?, params)?)
    } else {
        None
    };
    let epys = if observed.len() == 4 {
        let sig = net
            .dag()
            .d_separation_signature(&observed.iter().cloned().collect())?;
        Some(epys_holds(&sig)?.is_some())
    } else {
        None
    };
    let blcd_arcs = blcd_search_report(&data, params, cfg.thresholds.blcd)?.arcs;

    let (argmax_index, argmax_edges, designated_posterior, max_arc, top_arc) = match &tetrad_report
    {
        Some(report) => {
            let idx = report.argmax_index();
            let dag = enumerate_dags(&observed)?.get(idx);
            let designated = fixture
                .designated
                .as_ref()
                .and_then(|(x, z)| report.arc_posterior(x, z));
            (
                Some(idx),
                Some(dag.to_string()),
                designated,
                Some(report.top_arc().posterior),
                Some(report.top_arc().clone()),
            )
        }
        None => (None, None, None, None, None),
    };

    Ok(ReplicateOutcome {
        m,
        replicate,
        seed,
        screen_attempts: attempts,
        skipped_seeds: skipped,
        epys,
        argmax_index,
        argmax_edges,
        argmax_is_expected: argmax_index.and_then(|i| expected_index.map(|e| i == e)),
        argmax_is_designated_y: argmax_index.and_then(|i| designated_y_index.map(|y| i == y)),
        designated_posterior,
        max_arc_posterior: max_arc,
        top_arc,
        blcd_arcs,
    })
}

fn rate(values: impl Iterator<Item = Option<bool>>) -> Option<f64> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for v in values {
        match v {
            Some(true) => {
                hits += 1;
                total += 1;
            }
            Some(false) => total += 1,
            None => return None,
        }
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

/// Runs the full grid of sample sizes and replicates for the configured
/// generator. Replicates run concurrently (worker count capped by the
/// `YSTRUCT_THREADS` environment variable) and results merge in grid order,
/// so the report is deterministic for a fixed config.
pub fn run_convergence_experiment(
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let fixture = fixture_net(&cfg.generator, cfg.arity)?;
    let params = cfg.score_params()?;
    let observed = fixture.observed_sorted();
    let expected_index = fixture
        .expected_observed_edges
        .as_ref()
        .filter(|_| observed.len() == 4)
        .and_then(|edges| canonical_index(&observed, edges));
    let designated_y_index = fixture
        .designated
        .as_ref()
        .filter(|_| observed.len() == 4)
        .and_then(|(x, z)| {
            let sources: Vec<String> = observed
                .iter()
                .filter(|n| *n != x && *n != z)
                .cloned()
                .collect();
            let edges = vec![
                (sources[0].clone(), x.clone()),
                (sources[1].clone(), x.clone()),
                (x.clone(), z.clone()),
            ];
            canonical_index(&observed, &edges)
        });

    let grid: Vec<(usize, usize)> = cfg
        .sample_sizes
        .iter()
        .flat_map(|&m| (0..cfg.replicates).map(move |r| (m, r)))
        .collect();

    let job = || -> Result<Vec<ReplicateOutcome>, ExperimentError> {
        grid.par_iter()
            .map(|&(m, r)| {
                run_replicate(
                    cfg,
                    &fixture,
                    &params,
                    expected_index,
                    designated_y_index,
                    m,
                    r,
                )
            })
            .collect()
    };
    let outcomes = match thread_cap() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ExperimentError::InvalidConfig(format!("thread pool: {e}")))?
            .install(job),
        None => job(),
    }?;

    let summaries = cfg
        .sample_sizes
        .iter()
        .map(|&m| {
            let rows: Vec<&ReplicateOutcome> = outcomes.iter().filter(|o| o.m == m).collect();
            let designated: Vec<f64> = rows.iter().filter_map(|o| o.designated_posterior).collect();
            SampleSizeSummary {
                m,
                replicates: rows.len(),
                rate_argmax_expected: rate(rows.iter().map(|o| o.argmax_is_expected)),
                rate_argmax_designated_y: rate(rows.iter().map(|o| o.argmax_is_designated_y)),
                rate_designated_at_or_above_high: rate(rows.iter().map(|o| {
                    o.designated_posterior
                        .map(|p| p >= cfg.thresholds.high_posterior)
                })),
                rate_designated_below_low: rate(rows.iter().map(|o| {
                    o.designated_posterior
                        .map(|p| p < cfg.thresholds.low_posterior)
                })),
                median_designated_posterior: median(designated),
            }
        })
        .collect();

    Ok(ExperimentReport {
        config: cfg.clone(),
        fixture: fixture.label.clone(),
        observed,
        designated: fixture.designated.clone(),
        expected_argmax_index: expected_index,
        designated_y_index,
        note: crate::discovery::POSTERIOR_NOTE,
        outcomes,
        summaries,
    })
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
}

impl ExperimentReport {
    /// Aligned plain-text table, one row per sample size.
    pub fn render_table(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let arc = self
            .designated
            .as_ref()
            .map(|(x, z)| format!("{x} => {z}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "fixture: {}  observed: {}  designated arc: {arc}",
            self.fixture,
            self.observed.join(",")
        );
        let _ = writeln!(
            out,
            "ess {}  arity {}  faithfulness_tol {}  master_seed {}  replicates {}  thresholds: high {} low {} blcd {}",
            self.config.ess,
            self.config.arity,
            self.config.faithfulness_tol,
            self.config.master_seed,
            self.config.replicates,
            self.config.thresholds.high_posterior,
            self.config.thresholds.low_posterior,
            self.config.thresholds.blcd,
        );
        let _ = writeln!(
            out,
            "{:>8}  {:>15}  {:>15}  {:>14}  {:>8}  {:>8}",
            "m", "argmax=expected", "argmax=Y(sink)", "median P(arc)", "P>=high", "P<low"
        );
        let fmt_rate = |r: Option<f64>| r.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
        let fmt_med = |r: Option<f64>| r.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:>8}  {:>15}  {:>15}  {:>14}  {:>8}  {:>8}",
                s.m,
                fmt_rate(s.rate_argmax_expected),
                fmt_rate(s.rate_argmax_designated_y),
                fmt_med(s.median_designated_posterior),
                fmt_rate(s.rate_designated_at_or_above_high),
                fmt_rate(s.rate_designated_below_low),
            );
        }
        out
    }
}
