//! Greedy search for the partition minimizing an expected loss given a
//! pairwise similarity matrix.
//!
//! Each run allocates the items one by one in random order, each to the
//! cluster (or new cluster) with the smallest increase of the objective over
//! the items placed so far, then sweeps over all items reassigning each to its
//! best cluster until nothing moves. The best of several runs is returned.
//!
//! Odd-numbered runs cap the initial allocation at 1, 2, 3, ... clusters (run
//! `2m + 1` at `m + 1`); the sweeps that follow are uncapped. Without this an
//! all-singletons start can be a local minimum of the VI lower bound that no
//! single-item move escapes.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::loss::{expected_loss, LossKind};
use crate::parallel::map_indexed;
use crate::partition::Partition;
use crate::psm::PairwiseSimilarityMatrix;
use crate::seed::stream_rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub n_runs: usize,
    pub max_sweeps: usize,
    pub max_clusters: Option<usize>,
    pub seed: u64,
    pub loss: LossKind,
    /// See [`crate::parallel::map_indexed`].
    pub parallelism: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_runs: 16,
            max_sweeps: 10,
            max_clusters: None,
            seed: 0,
            loss: LossKind::Binder,
            parallelism: 1,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::InvalidParameter("n_runs must be >= 1".into()));
        }
        if self.max_clusters == Some(0) {
            return Err(Error::InvalidParameter("max_clusters must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub partition: Partition,
    /// Objective recomputed on `partition`.
    pub loss: f64,
}

/// Partial allocation with per-cluster member lists. Clusters emptied by a
/// removal are dropped at once, moving the last cluster into the hole.
struct Working {
    label: Vec<Option<usize>>,
    members: Vec<Vec<usize>>,
}

impl Working {
    fn new(n: usize) -> Self {
        Self {
            label: vec![None; n],
            members: Vec::new(),
        }
    }

    fn n_clusters(&self) -> usize {
        self.members.len()
    }

    /// Adds `item` to cluster `k`; `k == n_clusters()` opens a new one.
    fn add(&mut self, item: usize, k: usize) {
        if k == self.members.len() {
            self.members.push(Vec::new());
        }
        self.members[k].push(item);
        self.label[item] = Some(k);
    }

    /// Removes `item`; returns its cluster and, if that cluster vanished, the
    /// old index of the cluster that was moved into its slot.
    fn remove(&mut self, item: usize) -> (usize, Option<usize>) {
        let k = self.label[item].take().expect("item allocated");
        let pos = self.members[k].iter().position(|&j| j == item).expect("member");
        self.members[k].swap_remove(pos);
        if !self.members[k].is_empty() {
            return (k, None);
        }
        let last = self.members.len() - 1;
        self.members.swap_remove(k);
        if k != last {
            for &j in &self.members[k] {
                self.label[j] = Some(k);
            }
            (k, Some(last))
        } else {
            (k, None)
        }
    }

    fn to_partition(&self) -> Partition {
        let labels: Vec<usize> = self.label.iter().map(|l| l.expect("all allocated")).collect();
        Partition::canonicalize(&labels).expect("n >= 1")
    }
}

/// Incremental objective: the change caused by adding an item to each
/// cluster, relative to leaving it out. Opening a new cluster always costs 0
/// for both supported losses.
trait Objective {
    fn join_costs(&mut self, w: &Working, item: usize, costs: &mut Vec<f64>);
    fn added(&mut self, w: &Working, item: usize, k: usize);
    fn removed(&mut self, w: &Working, item: usize, from: usize, moved: Option<usize>);
}

/// Binder: joining cluster S adds `sum_{j in S} (1 - 2 psm_ij)`.
struct BinderObjective<'a> {
    psm: &'a PairwiseSimilarityMatrix,
}

impl Objective for BinderObjective<'_> {
    fn join_costs(&mut self, w: &Working, item: usize, costs: &mut Vec<f64>) {
        let row = self.psm.row(item);
        costs.clear();
        costs.extend(w.members.iter().map(|m| m.iter().map(|&j| 1.0 - 2.0 * row[j]).sum::<f64>()));
    }

    fn added(&mut self, _: &Working, _: usize, _: usize) {}

    fn removed(&mut self, _: &Working, _: usize, _: usize, _: Option<usize>) {}
}

/// VI lower bound: cluster S contributes
/// `|S| ln |S| - 2 sum_{j in S} ln r_j` with `r_j = sum_{l in S} psm_jl`.
struct ViLowerBoundObjective<'a> {
    psm: &'a PairwiseSimilarityMatrix,
    within: Vec<f64>,
    term: Vec<f64>,
}

impl<'a> ViLowerBoundObjective<'a> {
    fn new(psm: &'a PairwiseSimilarityMatrix) -> Self {
        Self {
            psm,
            within: vec![0.0; psm.n_items()],
            term: Vec::new(),
        }
    }

    fn cluster_term(&self, members: &[usize]) -> f64 {
        let size = members.len() as f64;
        size * size.ln() - 2.0 * members.iter().map(|&j| self.within[j].ln()).sum::<f64>()
    }
}

impl Objective for ViLowerBoundObjective<'_> {
    fn join_costs(&mut self, w: &Working, item: usize, costs: &mut Vec<f64>) {
        let row = self.psm.row(item);
        costs.clear();
        costs.extend(w.members.iter().enumerate().map(|(k, m)| {
            let size = m.len() as f64 + 1.0;
            let mut logs = 0.0;
            let mut own = 1.0;
            for &j in m {
                logs += (self.within[j] + row[j]).ln();
                own += row[j];
            }
            logs += own.ln();
            size * size.ln() - 2.0 * logs - self.term[k]
        }));
    }

    fn added(&mut self, w: &Working, item: usize, k: usize) {
        let row = self.psm.row(item);
        let mut own = 1.0;
        for &j in &w.members[k] {
            if j != item {
                self.within[j] += row[j];
                own += row[j];
            }
        }
        self.within[item] = own;
        if k == self.term.len() {
            self.term.push(0.0);
        }
        self.term[k] = self.cluster_term(&w.members[k]);
    }

    fn removed(&mut self, w: &Working, item: usize, from: usize, moved: Option<usize>) {
        let row = self.psm.row(item);
        self.within[item] = 0.0;
        match moved {
            Some(last) => {
                self.term.swap_remove(from);
                debug_assert_eq!(self.term.len(), last);
            }
            None if from >= w.members.len() => {
                self.term.pop();
            }
            None => {
                for &j in &w.members[from] {
                    self.within[j] -= row[j];
                }
                self.term[from] = self.cluster_term(&w.members[from]);
            }
        }
    }
}

/// Index of the chosen cluster: lowest cost, earliest label on ties, a new
/// cluster only if strictly better. `keep` is preferred when tied with the
/// best.
fn choose(costs: &[f64], new_allowed: bool, keep: Option<usize>) -> usize {
    let mut best = costs.len();
    let mut best_cost = if new_allowed { 0.0 } else { f64::INFINITY };
    for (k, &c) in costs.iter().enumerate() {
        if c < best_cost || (best == costs.len() && c <= best_cost) {
            best = k;
            best_cost = c;
        }
    }
    if let Some(k) = keep {
        let c = if k < costs.len() { costs[k] } else { 0.0 };
        let tol = 1e-12 * (1.0 + best_cost.abs());
        if (k < costs.len() || new_allowed) && c <= best_cost + tol {
            return k;
        }
    }
    best
}

pub(crate) struct RunTrace {
    pub partition: Partition,
    /// Objective after the initial allocation and after every sweep.
    #[cfg_attr(not(test), allow(dead_code))]
    pub objective_after_sweep: Vec<f64>,
}

fn run_once<O: Objective>(
    psm: &PairwiseSimilarityMatrix,
    cfg: &SearchConfig,
    run: usize,
    mut objective: O,
    trace: bool,
) -> RunTrace {
    let n = psm.n_items();
    let cap = cfg.max_clusters.unwrap_or(usize::MAX);
    let initial_cap = if run % 2 == 1 { cap.min(run / 2 + 1) } else { cap };
    let mut rng = stream_rng(cfg.seed, run as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut w = Working::new(n);
    let mut costs = Vec::new();
    for &item in &order {
        objective.join_costs(&w, item, &mut costs);
        let k = choose(&costs, w.n_clusters() < initial_cap, None);
        w.add(item, k);
        objective.added(&w, item, k);
    }
    let mut history = Vec::new();
    let mut snapshot = |w: &Working| {
        if trace {
            history.push(expected_loss(cfg.loss, &w.to_partition(), psm).expect("sizes match"));
        }
    };
    snapshot(&w);
    for _ in 0..cfg.max_sweeps {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &item in &order {
            let (from, moved) = w.remove(item);
            objective.removed(&w, item, from, moved);
            // where the item would return to: its old cluster, or a fresh one
            let keep = if moved.is_some() || from >= w.n_clusters() {
                w.n_clusters()
            } else {
                from
            };
            objective.join_costs(&w, item, &mut costs);
            let k = choose(&costs, w.n_clusters() < cap, Some(keep));
            if k != keep {
                changed = true;
            }
            w.add(item, k);
            objective.added(&w, item, k);
        }
        snapshot(&w);
        if !changed {
            break;
        }
    }
    RunTrace {
        partition: w.to_partition(),
        objective_after_sweep: history,
    }
}

pub(crate) fn run_traced(psm: &PairwiseSimilarityMatrix, cfg: &SearchConfig, run: usize, trace: bool) -> RunTrace {
    match cfg.loss {
        LossKind::Binder => run_once(psm, cfg, run, BinderObjective { psm }, trace),
        LossKind::Vi => run_once(psm, cfg, run, ViLowerBoundObjective::new(psm), trace),
    }
}

/// Greedy minimization of the expected Binder loss or the VI lower bound.
///
/// Ties between runs go to fewer clusters, then to the lexicographically
/// smallest canonical labels. The result does not depend on `parallelism`.
pub fn minimize_expected_loss(psm: &PairwiseSimilarityMatrix, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let candidates = map_indexed(cfg.n_runs, cfg.parallelism, |run| {
        let partition = run_traced(psm, cfg, run, false).partition;
        let loss = expected_loss(cfg.loss, &partition, psm).expect("sizes match");
        SearchResult { partition, loss }
    });
    let best = candidates
        .into_iter()
        .reduce(|best, c| if is_better(&c, &best) { c } else { best })
        .expect("n_runs >= 1");
    Ok(best)
}

fn is_better(c: &SearchResult, best: &SearchResult) -> bool {
    let tol = 1e-12 * (1.0 + best.loss.abs());
    if c.loss < best.loss - tol {
        return true;
    }
    if c.loss > best.loss + tol {
        return false;
    }
    (c.partition.n_clusters(), c.partition.labels()) < (best.partition.n_clusters(), best.partition.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psm::pairwise_similarity;
    use proptest::prelude::*;

    fn random_psm(n: usize, values: &[f64]) -> PairwiseSimilarityMatrix {
        let mut rows = vec![vec![1.0; n]; n];
        let mut it = values.iter();
        for i in 0..n {
            for j in i + 1..n {
                let v = *it.next().unwrap();
                rows[i][j] = v;
                rows[j][i] = v;
            }
        }
        PairwiseSimilarityMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn recovers_exact_association_matrix() {
        let q = Partition::canonicalize(&[0, 1, 1, 2, 0, 2, 2, 3]).unwrap();
        let psm = pairwise_similarity(std::slice::from_ref(&q)).unwrap();
        for loss in [LossKind::Binder, LossKind::Vi] {
            let cfg = SearchConfig {
                loss,
                ..SearchConfig::default()
            };
            let r = minimize_expected_loss(&psm, &cfg).unwrap();
            assert_eq!(r.partition, q);
            assert!(r.loss.abs() < 1e-12);
        }
    }

    #[test]
    fn three_item_binder_fixture() {
        let psm = random_psm(3, &[0.9, 0.05, 0.05]);
        let r = minimize_expected_loss(&psm, &SearchConfig::default()).unwrap();
        assert_eq!(r.partition.labels(), &[0, 0, 1]);
        assert!((r.loss - 0.015).abs() < 1e-12);
    }

    #[test]
    fn max_clusters_is_respected() {
        let psm = pairwise_similarity(&[Partition::singletons(6)]).unwrap();
        let cfg = SearchConfig {
            max_clusters: Some(2),
            ..SearchConfig::default()
        };
        assert!(minimize_expected_loss(&psm, &cfg).unwrap().partition.n_clusters() <= 2);
    }

    #[test]
    fn rejects_zero_runs() {
        let psm = pairwise_similarity(&[Partition::singletons(2)]).unwrap();
        let cfg = SearchConfig {
            n_runs: 0,
            ..SearchConfig::default()
        };
        assert!(minimize_expected_loss(&psm, &cfg).is_err());
    }

    #[test]
    fn choose_tie_rules() {
        assert_eq!(choose(&[-1.0, -1.0], true, None), 0);
        assert_eq!(choose(&[1.0, 1.0], true, None), 2);
        assert_eq!(choose(&[0.0, -1.0], true, None), 1);
        assert_eq!(choose(&[0.0], true, None), 0);
        assert_eq!(choose(&[0.5], true, None), 1);
        assert_eq!(choose(&[0.5], false, None), 0);
        assert_eq!(choose(&[-1.0, -1.0], true, Some(1)), 1);
    }

    fn arb_psm() -> impl Strategy<Value = PairwiseSimilarityMatrix> {
        (2usize..=9).prop_flat_map(|n| {
            prop::collection::vec(0.0f64..=1.0, n * (n - 1) / 2).prop_map(move |v| random_psm(n, &v))
        })
    }

    proptest! {
        #[test]
        fn sweeps_never_increase_objective(psm in arb_psm(), seed in any::<u64>(), vi in any::<bool>()) {
            let cfg = SearchConfig {
                seed,
                loss: if vi { LossKind::Vi } else { LossKind::Binder },
                ..SearchConfig::default()
            };
            let t = run_traced(&psm, &cfg, 0, true);
            for pair in t.objective_after_sweep.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-10, "{:?}", t.objective_after_sweep);
            }
        }

        #[test]
        fn reported_loss_is_recomputed(psm in arb_psm(), seed in any::<u64>(), vi in any::<bool>()) {
            let loss = if vi { LossKind::Vi } else { LossKind::Binder };
            let cfg = SearchConfig { seed, loss, ..SearchConfig::default() };
            let r = minimize_expected_loss(&psm, &cfg).unwrap();
            let again = expected_loss(loss, &r.partition, &psm).unwrap();
            prop_assert!((r.loss - again).abs() < 1e-10);
            let parallel = minimize_expected_loss(&psm, &SearchConfig { parallelism: 4, ..cfg }).unwrap();
            prop_assert_eq!(parallel, r);
        }
    }
}
