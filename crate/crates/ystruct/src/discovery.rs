//! The discovery procedure: posterior mass of Y-structure causal arcs over
//! four-variable sets, score-guided Markov blanket estimation, and the
//! blanket-guided tetrad search.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::bayes_net::{Dataset, NetError};
use crate::equivalence::{enumerate_dags, EquivalenceError};
use crate::graph::TetradClass;
use crate::scoring::{posterior_over_dags, FamilyScorer, ScoreError, ScoreParams};

/// Caveat attached to serialized reports: the arc probabilities are
/// normalized scores over the 543 four-variable structures, and the
/// asymptotic guarantees cover only which structure scores highest in the
/// large-sample limit, not the probability reading itself.
pub const POSTERIOR_NOTE: &str = "arc posteriors are normalized scores over the 543 \
four-variable DAG hypotheses; treating them as probabilities is a heuristic, and the \
asymptotic guarantees cover only the top-scoring structure in the large-sample limit";

#[derive(Debug, Error, PartialEq)]
pub enum DiscoveryError {
    #[error("expected exactly 4 variables, got {0}")]
    WrongVariableCount(usize),
    #[error("need at least 4 variables, got {0}")]
    InsufficientVariables(usize),
    #[error("blanket size cap must be at least 3, got {0}")]
    BadMaxSize(usize),
    #[error("threshold must lie in [0, 1], got {0}")]
    BadThreshold(f64),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
}

/// One ordered causal-arc hypothesis with its posterior mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YArc {
    pub x: String,
    pub z: String,
    pub posterior: f64,
}

/// Scores of all 543 structures over one tetrad and the Y-arc posteriors
/// derived from them.
///
/// `posteriors[i]` belongs to the `i`-th structure of the canonical
/// enumeration over the sorted tetrad names, so indices are stable across
/// runs and machines.
#[derive(Debug, Clone, Serialize)]
pub struct DiscoveryReport {
    pub tetrad: Vec<String>,
    pub posteriors: Vec<f64>,
    /// All twelve ordered sink arcs, sorted by descending posterior, ties by
    /// name pair.
    pub y_arcs: Vec<YArc>,
}

impl DiscoveryReport {
    pub fn arc_posterior(&self, x: &str, z: &str) -> Option<f64> {
        self.y_arcs
            .iter()
            .find(|a| a.x == x && a.z == z)
            .map(|a| a.posterior)
    }

    pub fn top_arc(&self) -> &YArc {
        &self.y_arcs[0]
    }

    /// Index of the highest-posterior structure (first on ties).
    pub fn argmax_index(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.posteriors.iter().enumerate() {
            if *p > self.posteriors[best] {
                best = i;
            }
        }
        best
    }
}

/// Scores every labeled DAG on the dataset's four variables and aggregates
/// the Y-structure sink arcs: the posterior of `x => z` is the mass of the
/// unique Y structure with collider `x` and sink `z`.
pub fn y_posterior(d: &Dataset, params: &ScoreParams) -> Result<DiscoveryReport, DiscoveryError> {
    if d.n_vars() != 4 {
        return Err(DiscoveryError::WrongVariableCount(d.n_vars()));
    }
    let mut tetrad: Vec<String> = d.var_names().iter().map(|s| s.to_string()).collect();
    tetrad.sort();
    let data = d.restrict(&tetrad)?;
    let dags: Vec<_> = enumerate_dags(&tetrad)?.collect();
    debug_assert_eq!(dags.len(), 543);
    let posteriors = posterior_over_dags(&dags, &data, params)?;

    let mut arcs: BTreeMap<(String, String), f64> = BTreeMap::new();
    for (dag, p) in dags.iter().zip(&posteriors) {
        if let TetradClass::YStructure { x, z, .. } = dag.classify_tetrad().expect("four nodes") {
            let previous = arcs.insert((x, z), *p);
            assert!(
                previous.is_none(),
                "one labeled Y structure per ordered pair"
            );
        }
    }
    assert_eq!(arcs.len(), 12, "4 collider choices x 3 sink choices");
    let mut y_arcs: Vec<YArc> = arcs
        .into_iter()
        .map(|((x, z), posterior)| YArc { x, z, posterior })
        .collect();
    y_arcs.sort_by(|a, b| {
        b.posterior
            .partial_cmp(&a.posterior)
            .unwrap()
            .then_with(|| (&a.x, &a.z).cmp(&(&b.x, &b.z)))
    });
    Ok(DiscoveryReport {
        tetrad,
        posteriors,
        y_arcs,
    })
}

/// One evaluation round of the blanket search.
#[derive(Debug, Clone, Serialize)]
pub struct MbStep {
    pub action: &'static str,
    /// Candidate variable and the family score its change would give.
    pub considered: Vec<(String, f64)>,
    pub chosen: Option<String>,
    pub score_after: f64,
}

/// Estimated Markov blanket of a target variable with its audit trail.
#[derive(Debug, Clone, Serialize)]
pub struct MbEstimate {
    pub target: String,
    pub members: Vec<String>,
    pub trace: Vec<MbStep>,
}

/// Greedy forward-backward selection on the target's family score: grow by
/// the variable whose addition most improves the score of `target` given the
/// members as parents, then prune members whose removal improves it.
/// Deterministic with lexicographic tie-breaking; capped at `max_size`.
pub fn estimate_markov_blanket(
    d: &Dataset,
    target: &str,
    params: &ScoreParams,
    max_size: usize,
) -> Result<MbEstimate, DiscoveryError> {
    if d.n_vars() < 4 {
        return Err(DiscoveryError::InsufficientVariables(d.n_vars()));
    }
    if max_size < 3 {
        return Err(DiscoveryError::BadMaxSize(max_size));
    }
    let names: Vec<&str> = d.var_names();
    let mut scorer = FamilyScorer::new(d, &names, params.ess)?;
    let target_slot = scorer
        .names()
        .iter()
        .position(|n| n == target)
        .ok_or_else(|| ScoreError::MissingVariable(target.to_string()))?;
    let all_slots: Vec<usize> = (0..scorer.names().len()).collect();

    let mut members: Vec<usize> = Vec::new();
    let mut score = scorer.family_score(target_slot, &members);
    let mut trace = Vec::new();

    loop {
        if members.len() >= max_size {
            break;
        }
        let mut considered = Vec::new();
        let mut best: Option<(usize, f64)> = None;
        for &cand in &all_slots {
            if cand == target_slot || members.contains(&cand) {
                continue;
            }
            let mut trial = members.clone();
            trial.push(cand);
            let s = scorer.family_score(target_slot, &trial);
            considered.push((scorer.names()[cand].clone(), s));
            if s > score && best.is_none_or(|(_, bs)| s > bs) {
                best = Some((cand, s));
            }
        }
        match best {
            Some((cand, s)) => {
                members.push(cand);
                members.sort_unstable();
                score = s;
                trace.push(MbStep {
                    action: "add",
                    considered,
                    chosen: Some(scorer.names()[cand].clone()),
                    score_after: score,
                });
            }
            None => {
                trace.push(MbStep {
                    action: "add",
                    considered,
                    chosen: None,
                    score_after: score,
                });
                break;
            }
        }
    }

    loop {
        let mut considered = Vec::new();
        let mut best: Option<(usize, f64)> = None;
        for &member in &members {
            let trial: Vec<usize> = members.iter().copied().filter(|&m| m != member).collect();
            let s = scorer.family_score(target_slot, &trial);
            considered.push((scorer.names()[member].clone(), s));
            if s > score && best.is_none_or(|(_, bs)| s > bs) {
                best = Some((member, s));
            }
        }
        match best {
            Some((member, s)) => {
                members.retain(|&m| m != member);
                score = s;
                trace.push(MbStep {
                    action: "remove",
                    considered,
                    chosen: Some(scorer.names()[member].clone()),
                    score_after: score,
                });
            }
            None => {
                if !members.is_empty() {
                    trace.push(MbStep {
                        action: "remove",
                        considered,
                        chosen: None,
                        score_after: score,
                    });
                }
                break;
            }
        }
    }

    Ok(MbEstimate {
        target: target.to_string(),
        members: members
            .into_iter()
            .map(|s| scorer.names()[s].clone())
            .collect(),
        trace,
    })
}

/// Everything one search run produced, for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub method: &'static str,
    pub threshold: f64,
    pub params: ScoreParams,
    pub note: &'static str,
    /// Arcs meeting the threshold, deduplicated to the maximum posterior per
    /// ordered pair, sorted by descending posterior.
    pub arcs: Vec<YArc>,
    pub blankets: Vec<MbEstimate>,
    pub tetrads: Vec<DiscoveryReport>,
}

fn collect_arcs(reports: &[DiscoveryReport], threshold: f64) -> Vec<YArc> {
    let mut best: BTreeMap<(String, String), f64> = BTreeMap::new();
    for report in reports {
        for arc in &report.y_arcs {
            if arc.posterior >= threshold {
                let entry = best
                    .entry((arc.x.clone(), arc.z.clone()))
                    .or_insert(arc.posterior);
                if arc.posterior > *entry {
                    *entry = arc.posterior;
                }
            }
        }
    }
    let mut arcs: Vec<YArc> = best
        .into_iter()
        .map(|((x, z), posterior)| YArc { x, z, posterior })
        .collect();
    arcs.sort_by(|a, b| {
        b.posterior
            .partial_cmp(&a.posterior)
            .unwrap()
            .then_with(|| (&a.x, &a.z).cmp(&(&b.x, &b.z)))
    });
    arcs
}

fn validate_search_inputs(d: &Dataset, threshold: f64) -> Result<(), DiscoveryError> {
    if d.n_vars() < 4 {
        return Err(DiscoveryError::InsufficientVariables(d.n_vars()));
    }
    if !threshold.is_finite() || !(0.0..=1.0).contains(&threshold) {
        return Err(DiscoveryError::BadThreshold(threshold));
    }
    Ok(())
}

/// Blanket-guided search: estimate each variable's Markov blanket, score the
/// four-variable sets formed by the target plus every 3-subset of its
/// blanket, and keep arcs whose posterior reaches the threshold.
pub fn blcd_search_report(
    d: &Dataset,
    params: &ScoreParams,
    threshold: f64,
) -> Result<SearchReport, DiscoveryError> {
    validate_search_inputs(d, threshold)?;
    let mut targets: Vec<String> = d.var_names().iter().map(|s| s.to_string()).collect();
    targets.sort();
    let max_size = d.n_vars() - 1;

    let mut blankets = Vec::new();
    let mut seen: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut tetrads = Vec::new();
    for target in &targets {
        let mb = estimate_markov_blanket(d, target, params, max_size)?;
        for triple in subsets_of_three(&mb.members) {
            let mut tetrad: Vec<String> = triple.clone();
            tetrad.push(target.clone());
            tetrad.sort();
            if !seen.insert(tetrad.clone()) {
                continue;
            }
            let report = y_posterior(&d.restrict(&tetrad)?, params)?;
            tetrads.push(report);
        }
        blankets.push(mb);
    }
    let arcs = collect_arcs(&tetrads, threshold);
    Ok(SearchReport {
        method: "blcd",
        threshold,
        params: *params,
        note: POSTERIOR_NOTE,
        arcs,
        blankets,
        tetrads,
    })
}

/// Scores every four-variable subset of the dataset; the reference search the
/// blanket-guided one restricts.
pub fn exhaustive_search_report(
    d: &Dataset,
    params: &ScoreParams,
    threshold: f64,
) -> Result<SearchReport, DiscoveryError> {
    validate_search_inputs(d, threshold)?;
    let mut names: Vec<String> = d.var_names().iter().map(|s| s.to_string()).collect();
    names.sort();
    let n = names.len();
    let mut tetrads = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for e in (c + 1)..n {
                    let tetrad = vec![
                        names[a].clone(),
                        names[b].clone(),
                        names[c].clone(),
                        names[e].clone(),
                    ];
                    tetrads.push(y_posterior(&d.restrict(&tetrad)?, params)?);
                }
            }
        }
    }
    let arcs = collect_arcs(&tetrads, threshold);
    Ok(SearchReport {
        method: "exhaustive",
        threshold,
        params: *params,
        note: POSTERIOR_NOTE,
        arcs,
        blankets: Vec::new(),
        tetrads,
    })
}

/// Arc list of the blanket-guided search, sorted by descending posterior.
pub fn blcd_search(
    d: &Dataset,
    params: &ScoreParams,
    threshold: f64,
) -> Result<Vec<YArc>, DiscoveryError> {
    Ok(blcd_search_report(d, params, threshold)?.arcs)
}

fn subsets_of_three(items: &[String]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let n = items.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                out.push(vec![items[i].clone(), items[j].clone(), items[k].clone()]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes_net::{forward_sample, random_parameterization};
    use crate::graph::Dag;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn y_net_data(m: usize, seed: u64) -> Dataset {
        let dag = Dag::from_strs(
            &["W1", "W2", "X", "Z"],
            &[("W1", "X"), ("W2", "X"), ("X", "Z")],
        )
        .unwrap();
        let net = random_parameterization(&dag, &[2; 4], seed, 1.0).unwrap();
        forward_sample(&net, m, seed ^ 0x5eed)
    }

    #[test]
    fn empty_data_spreads_mass_uniformly() {
        let data = Dataset::empty(vec![
            ("W1".into(), 2),
            ("W2".into(), 2),
            ("X".into(), 2),
            ("Z".into(), 2),
        ])
        .unwrap();
        let report = y_posterior(&data, &ScoreParams::default()).unwrap();
        assert_eq!(report.posteriors.len(), 543);
        assert_eq!(report.y_arcs.len(), 12);
        for arc in &report.y_arcs {
            assert!((arc.posterior - 1.0 / 543.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_variable_count_is_rejected() {
        let data = Dataset::empty(vec![("A".into(), 2), ("B".into(), 2)]).unwrap();
        assert_eq!(
            y_posterior(&data, &ScoreParams::default()).unwrap_err(),
            DiscoveryError::WrongVariableCount(2)
        );
    }

    #[test]
    fn arc_mass_stays_in_bounds() {
        let data = y_net_data(2_000, 42);
        let report = y_posterior(&data, &ScoreParams::default()).unwrap();
        let total: f64 = report.y_arcs.iter().map(|a| a.posterior).sum();
        assert!(total <= 1.0 + 1e-12);
        for arc in &report.y_arcs {
            assert!((0.0..=1.0).contains(&arc.posterior));
        }
        assert!((report.posteriors.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_order_does_not_change_results() {
        let data = y_net_data(500, 7);
        let rows: Vec<Vec<u8>> = (0..data.n_rows())
            .map(|r| (0..data.n_vars()).map(|c| data.value(r, c)).collect())
            .collect();
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
        assert_ne!(rows, shuffled);
        let permuted = Dataset::new(data.vars().to_vec(), shuffled).unwrap();
        let a = y_posterior(&data, &ScoreParams::default()).unwrap();
        let b = y_posterior(&permuted, &ScoreParams::default()).unwrap();
        assert_eq!(a.posteriors, b.posteriors);
    }

    #[test]
    fn column_order_does_not_change_results() {
        let data = y_net_data(500, 8);
        let permuted = data.restrict(&["Z", "X", "W2", "W1"]).unwrap();
        let a = y_posterior(&data, &ScoreParams::default()).unwrap();
        let b = y_posterior(&permuted, &ScoreParams::default()).unwrap();
        assert_eq!(a.tetrad, b.tetrad);
        assert_eq!(a.posteriors, b.posteriors);
        for (x, y) in a.y_arcs.iter().zip(&b.y_arcs) {
            assert_eq!((&x.x, &x.z), (&y.x, &y.z));
            assert_eq!(x.posterior, y.posterior);
        }
    }

    #[test]
    fn blanket_estimation_validates_inputs() {
        let small =
            Dataset::empty(vec![("A".into(), 2), ("B".into(), 2), ("C".into(), 2)]).unwrap();
        assert_eq!(
            estimate_markov_blanket(&small, "A", &ScoreParams::default(), 3).unwrap_err(),
            DiscoveryError::InsufficientVariables(3)
        );
        let data = y_net_data(10, 1);
        assert_eq!(
            estimate_markov_blanket(&data, "X", &ScoreParams::default(), 2).unwrap_err(),
            DiscoveryError::BadMaxSize(2)
        );
        assert!(matches!(
            estimate_markov_blanket(&data, "Q", &ScoreParams::default(), 3).unwrap_err(),
            DiscoveryError::Score(ScoreError::MissingVariable(_))
        ));
    }

    #[test]
    fn blanket_size_respects_the_cap() {
        let data = y_net_data(5_000, 11);
        let mb = estimate_markov_blanket(&data, "X", &ScoreParams::default(), 3).unwrap();
        assert!(mb.members.len() <= 3);
        assert!(!mb.members.contains(&"X".to_string()));
    }

    #[test]
    fn threshold_bounds_are_enforced() {
        let data = y_net_data(10, 2);
        assert_eq!(
            blcd_search(&data, &ScoreParams::default(), 1.0 + 1e-9).unwrap_err(),
            DiscoveryError::BadThreshold(1.0 + 1e-9)
        );
        assert_eq!(
            blcd_search(&data, &ScoreParams::default(), -0.1).unwrap_err(),
            DiscoveryError::BadThreshold(-0.1)
        );
        // At exactly 1.0 only exact-certainty arcs could qualify.
        let arcs = blcd_search(&data, &ScoreParams::default(), 1.0).unwrap();
        assert!(arcs.iter().all(|a| a.posterior >= 1.0));
    }

    #[test]
    fn blanket_recovers_the_graphical_blanket_at_scale() {
        let fixture = crate::experiment::fixture_net("y_net", 2).unwrap();
        let (_, data) =
            crate::experiment::generate_dataset(&fixture, 42, 50_000, 0.04, 5_000).unwrap();
        let p = ScoreParams::default();
        let mb_x = estimate_markov_blanket(&data, "X", &p, 3).unwrap();
        assert_eq!(mb_x.members, vec!["W1", "W2", "Z"]);
        let mb_z = estimate_markov_blanket(&data, "Z", &p, 3).unwrap();
        assert_eq!(mb_z.members, vec!["X"]);
        assert!(mb_x
            .trace
            .iter()
            .any(|s| s.action == "add" && s.chosen.is_some()));
    }

    #[test]
    fn independent_data_yields_empty_blankets_and_no_arcs() {
        let fixture = crate::experiment::fixture_net("independent_net", 2).unwrap();
        let (_, data) =
            crate::experiment::generate_dataset(&fixture, 7, 50_000, 0.02, 100).unwrap();
        let p = ScoreParams::default();
        for target in ["W1", "W2", "X", "Z"] {
            let mb = estimate_markov_blanket(&data, target, &p, 3).unwrap();
            assert!(mb.members.is_empty(), "MB({target}) = {:?}", mb.members);
        }
        assert!(blcd_search(&data, &p, 0.5).unwrap().is_empty());
    }

    #[test]
    fn blcd_agrees_with_exhaustive_on_shared_tetrads() {
        // Six observed variables: the Y quartet plus independent noise.
        let dag = Dag::from_strs(
            &["N1", "N2", "W1", "W2", "X", "Z"],
            &[("W1", "X"), ("W2", "X"), ("X", "Z")],
        )
        .unwrap();
        let net = random_parameterization(&dag, &[2; 6], 33, 1.0).unwrap();
        let data = forward_sample(&net, 4_000, 34);
        let p = ScoreParams::default();
        let blcd = blcd_search_report(&data, &p, 0.0).unwrap();
        let exhaustive = exhaustive_search_report(&data, &p, 0.0).unwrap();

        let visited: BTreeSet<&Vec<String>> = blcd.tetrads.iter().map(|t| &t.tetrad).collect();
        let restricted: Vec<DiscoveryReport> = exhaustive
            .tetrads
            .iter()
            .filter(|t| visited.contains(&t.tetrad))
            .cloned()
            .collect();
        assert_eq!(restricted.len(), blcd.tetrads.len());
        let expected = collect_arcs(&restricted, 0.0);
        assert_eq!(blcd.arcs.len(), expected.len());
        for (a, b) in blcd.arcs.iter().zip(&expected) {
            assert_eq!((&a.x, &a.z), (&b.x, &b.z));
            assert_eq!(a.posterior, b.posterior, "scores must be bit-identical");
        }
    }
}
