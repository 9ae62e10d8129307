//! Score-based local causal discovery with Y structures for discrete data.
//!
//! A Y structure is the four-node pattern `W1 -> X <- W2`, `X -> Z`. When
//! data over four observed variables are best explained by that pattern, the
//! sink arc `X -> Z` can be read as an unconfounded causal relation even if
//! hidden common causes are allowed elsewhere. This crate provides the
//! machinery end to end:
//!
//! - [`graph`]: labeled DAGs, d-separation, d-separation signatures,
//!   graphical Markov blankets, and Y / Near-Y tetrad classification;
//! - [`equivalence`]: exhaustive DAG enumeration for up to five nodes and
//!   Markov equivalence (same adjacencies, same unshielded colliders);
//! - [`pag`]: endpoint-marked graphs built from witness DAG families, the
//!   DAG-PAG test, and detection of embedded pure Y-structure signatures;
//! - [`bayes_net`]: discrete complete-table networks, exact joints,
//!   marginalization, forward sampling, and a perfect-map screen;
//! - [`scoring`]: BDe marginal-likelihood scores and normalized posteriors
//!   over structure lists;
//! - [`discovery`]: tetrad posteriors, the arc posterior `P(X => Z | D)`,
//!   score-guided Markov blanket estimation, and the blanket-guided search;
//! - [`experiment`]: seeded convergence studies over named generator
//!   fixtures;
//! - [`io`]: the network JSON schema and dataset CSV format;
//! - [`cli`]: the `ystruct` binary's command dispatch.
//!
//! Each major capability has a runnable example under `examples/`; start
//! with `d_separation` and work down the list in the README.

pub mod bayes_net;
pub mod cli;
pub mod discovery;
pub mod equivalence;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod pag;
pub mod scoring;

pub use bayes_net::{Dataset, DiscreteBayesNet, JointTable};
pub use discovery::{DiscoveryReport, MbEstimate, YArc};
pub use equivalence::EquivClass;
pub use experiment::{ExperimentConfig, ExperimentReport};
pub use graph::{Dag, DsepSignature, NodeSet, Separation, TetradClass};
pub use pag::{Mark, Pag, PagEdge, YLabeling};
pub use scoring::ScoreParams;
