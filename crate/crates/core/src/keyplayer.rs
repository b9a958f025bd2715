//! Key-player selection.
//!
//! Two objectives are supported:
//!
//! * **NEG**: choose `k` nodes whose removal leaves the most fragmented
//!   residual graph. The fit is the fragmentation of the residual (on `n - k`
//!   nodes), not of the original graph.
//! * **POS**: choose `k` nodes that reach the largest share of the network
//!   within `m` hops. Chosen nodes count as reached.
//!
//! For a fixed `k` both objectives share one denominator across every
//! candidate set (`C(n - k, 2)` pairs for NEG, `n` nodes for POS), so the
//! optimizers compare integer numerators and never see float ties.
//!
//! [`select_key_players`] runs a best-improvement single-swap ascent from
//! several random starting sets. Restart `i` draws from ChaCha8 stream `i` of
//! the configured seed, so restarts are independent of scheduling and can run
//! on the rayon pool.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{self, pair_fraction_from_sizes, Graph, GraphError, NodeId, PairFraction};

/// Upper bound on subsets the exhaustive oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyPlayerError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("only {remaining} node(s) would remain after removal; at least 2 are required")]
    DegenerateResidual { remaining: usize },
    #[error("the key-player set is empty")]
    EmptySet,
    #[error("{0}")]
    InvalidConfig(String),
    #[error("{combinations} candidate sets exceed the exhaustive search limit of {BRUTE_FORCE_LIMIT}")]
    TooLarge { combinations: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum KpMethod {
    #[serde(rename = "NEG")]
    Neg,
    #[serde(rename = "POS")]
    Pos,
}

impl fmt::Display for KpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KpMethod::Neg => f.write_str("KPP-NEG"),
            KpMethod::Pos => f.write_str("KPP-POS"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpConfig {
    pub k: usize,
    pub restarts: usize,
    pub rng_seed: u64,
    pub reach_distance_m: u32,
    pub max_sweeps: usize,
}

impl Default for KpConfig {
    fn default() -> Self {
        KpConfig { k: 5, restarts: 20, rng_seed: 0, reach_distance_m: 1, max_sweeps: 1000 }
    }
}

impl KpConfig {
    pub fn with_k(k: usize) -> Self {
        KpConfig { k, ..Default::default() }
    }

    /// Checks the configuration against a graph of `node_count` nodes.
    pub fn validate(&self, node_count: usize) -> Result<(), KeyPlayerError> {
        let invalid = |msg: String| Err(KeyPlayerError::InvalidConfig(msg));
        if self.k < 1 {
            return invalid("k must be ≥ 1".into());
        }
        if self.k >= node_count {
            return invalid(format!("k must be < node count ({node_count}), got {}", self.k));
        }
        if self.restarts < 1 {
            return invalid("restarts must be ≥ 1".into());
        }
        if self.reach_distance_m < 1 {
            return invalid("reach distance m must be ≥ 1".into());
        }
        if self.max_sweeps < 1 {
            return invalid("max sweeps must be ≥ 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyPlayerResult {
    pub method: KpMethod,
    pub chosen: BTreeSet<NodeId>,
    /// Residual fragmentation for NEG, reach share for POS.
    pub fit: f64,
    /// Hop radius used by POS; absent for NEG.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reach_distance_m: Option<u32>,
    pub restarts_run: usize,
    /// Sweeps evaluated per restart, including the final non-improving one.
    pub sweeps_per_restart: Vec<usize>,
    pub seed_used: u64,
}

impl KeyPlayerResult {
    pub fn fit_label(&self) -> String {
        match (self.method, self.reach_distance_m) {
            (KpMethod::Neg, _) => "residual fragmentation".to_string(),
            (KpMethod::Pos, m) => format!("reach within {} hop(s)", m.unwrap_or(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FragmentationDelta {
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_: f64,
    pub change: f64,
}

impl FragmentationDelta {
    pub fn new(initial: f64, final_: f64) -> Self {
        FragmentationDelta { initial, final_, change: final_ - initial }
    }
}

/// Integer-valued objective over index sets of one graph.
struct Objective<'g> {
    graph: &'g Graph,
    method: KpMethod,
    reach_m: u32,
}

impl<'g> Objective<'g> {
    fn new(graph: &'g Graph, method: KpMethod, reach_m: u32) -> Self {
        Objective { graph, method, reach_m }
    }

    /// Numerator of the fit; `members` and `mask` describe the same set.
    fn score(&self, members: &[usize], mask: &[bool]) -> u64 {
        match self.method {
            KpMethod::Neg => pair_fraction_from_sizes(&self.graph.component_sizes_masked(mask)).unreachable,
            KpMethod::Pos => {
                self.graph.multi_source_hops(members, Some(self.reach_m)).iter().filter(|d| d.is_some()).count() as u64
            }
        }
    }

    fn value(&self, score: u64, k: usize) -> f64 {
        let n = self.graph.node_count() as u64;
        match self.method {
            KpMethod::Neg => {
                let r = n - k as u64;
                PairFraction { unreachable: score, total: r * (r - 1) / 2 }.value()
            }
            KpMethod::Pos => score as f64 / n as f64,
        }
    }

    fn check_set_size(&self, k: usize) -> Result<(), KeyPlayerError> {
        let n = self.graph.node_count();
        match self.method {
            KpMethod::Neg if n < k + 2 => Err(KeyPlayerError::DegenerateResidual { remaining: n.saturating_sub(k) }),
            KpMethod::Pos if k == 0 => Err(KeyPlayerError::EmptySet),
            _ => Ok(()),
        }
    }
}

fn members_and_mask(g: &Graph, s: &BTreeSet<NodeId>) -> Result<(Vec<usize>, Vec<bool>), KeyPlayerError> {
    let members: Vec<usize> = s.iter().map(|id| g.require(id)).collect::<Result<_, _>>()?;
    let mut mask = vec![false; g.node_count()];
    for &i in &members {
        mask[i] = true;
    }
    Ok((members, mask))
}

fn evaluate(g: &Graph, s: &BTreeSet<NodeId>, method: KpMethod, m: u32) -> Result<f64, KeyPlayerError> {
    let objective = Objective::new(g, method, m);
    let (members, mask) = members_and_mask(g, s)?;
    objective.check_set_size(members.len())?;
    Ok(objective.value(objective.score(&members, &mask), members.len()))
}

/// Fragmentation of the graph left after removing `s`.
pub fn fit_neg(g: &Graph, s: &BTreeSet<NodeId>) -> Result<f64, KeyPlayerError> {
    evaluate(g, s, KpMethod::Neg, 1)
}

/// Share of all nodes within `m` hops of `s`, members of `s` included.
pub fn fit_pos(g: &Graph, s: &BTreeSet<NodeId>, m: u32) -> Result<f64, KeyPlayerError> {
    if m < 1 {
        return Err(KeyPlayerError::InvalidConfig("reach distance m must be ≥ 1".into()));
    }
    evaluate(g, s, KpMethod::Pos, m)
}

pub fn fit(g: &Graph, s: &BTreeSet<NodeId>, method: KpMethod, m: u32) -> Result<f64, KeyPlayerError> {
    match method {
        KpMethod::Neg => fit_neg(g, s),
        KpMethod::Pos => fit_pos(g, s, m),
    }
}

struct RestartOutcome {
    set: Vec<usize>,
    score: u64,
    sweeps: usize,
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart(objective: &Objective<'_>, cfg: &KpConfig, restart: usize) -> RestartOutcome {
    let n = objective.graph.node_count();
    let mut rng = restart_rng(cfg.rng_seed, restart);
    let mut set = rand::seq::index::sample(&mut rng, n, cfg.k).into_vec();
    set.sort_unstable();
    let mut mask = vec![false; n];
    for &i in &set {
        mask[i] = true;
    }
    let mut score = objective.score(&set, &mask);
    let mut sweeps = 0;
    let mut trial = set.clone();

    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        // (position in set, replacement); scanned in ascending (u, v) order
        let mut best: Option<(usize, usize, u64)> = None;
        for (pos, &u) in set.iter().enumerate() {
            mask[u] = false;
            for v in 0..n {
                if mask[v] || v == u {
                    continue;
                }
                mask[v] = true;
                trial.copy_from_slice(&set);
                trial[pos] = v;
                let s = objective.score(&trial, &mask);
                mask[v] = false;
                if s > best.map_or(score, |b| b.2) {
                    best = Some((pos, v, s));
                }
            }
            mask[u] = true;
        }
        let Some((pos, v, s)) = best else { break };
        mask[set[pos]] = false;
        mask[v] = true;
        set[pos] = v;
        set.sort_unstable();
        trial.copy_from_slice(&set);
        score = s;
    }
    RestartOutcome { set, score, sweeps }
}

/// Greedy swap optimization with random restarts. The best set across
/// restarts wins; equal fits go to the lexicographically smallest set.
pub fn select_key_players(g: &Graph, method: KpMethod, cfg: &KpConfig) -> Result<KeyPlayerResult, KeyPlayerError> {
    cfg.validate(g.node_count())?;
    let objective = Objective::new(g, method, cfg.reach_distance_m);
    objective.check_set_size(cfg.k)?;

    let outcomes: Vec<RestartOutcome> =
        (0..cfg.restarts).into_par_iter().map(|r| run_restart(&objective, cfg, r)).collect();

    let best =
        outcomes.iter().max_by(|a, b| a.score.cmp(&b.score).then_with(|| b.set.cmp(&a.set))).expect("restarts ≥ 1");

    Ok(KeyPlayerResult {
        method,
        chosen: best.set.iter().map(|&i| g.node(i).clone()).collect(),
        fit: objective.value(best.score, cfg.k),
        reach_distance_m: (method == KpMethod::Pos).then_some(cfg.reach_distance_m),
        restarts_run: outcomes.len(),
        sweeps_per_restart: outcomes.iter().map(|o| o.sweeps).collect(),
        seed_used: cfg.rng_seed,
    })
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exhaustive optimum over every `k`-subset; ties go to the
/// lexicographically smallest set.
pub fn brute_force_key_players(
    g: &Graph,
    method: KpMethod,
    k: usize,
    m: u32,
) -> Result<(BTreeSet<NodeId>, f64), KeyPlayerError> {
    let n = g.node_count();
    let combinations = binomial(n, k);
    if combinations > BRUTE_FORCE_LIMIT {
        return Err(KeyPlayerError::TooLarge { combinations });
    }
    if k > n {
        return Err(KeyPlayerError::InvalidConfig(format!("k must be ≤ node count ({n}), got {k}")));
    }
    if m < 1 {
        return Err(KeyPlayerError::InvalidConfig("reach distance m must be ≥ 1".into()));
    }
    let objective = Objective::new(g, method, m);
    objective.check_set_size(k)?;

    let mut mask = vec![false; n];
    let mut best: Option<(Vec<usize>, u64)> = None;
    for combo in (0..n).combinations(k) {
        for &i in &combo {
            mask[i] = true;
        }
        let s = objective.score(&combo, &mask);
        for &i in &combo {
            mask[i] = false;
        }
        if best.as_ref().is_none_or(|b| s > b.1) {
            best = Some((combo, s));
        }
    }
    let (set, score) = best.expect("at least one subset");
    Ok((set.iter().map(|&i| g.node(i).clone()).collect(), objective.value(score, k)))
}

/// Fragmentation before and after removing `s`.
pub fn removal_impact(g: &Graph, s: &BTreeSet<NodeId>) -> Result<FragmentationDelta, KeyPlayerError> {
    let after = fit_neg(g, s)?;
    let before = graph::fragmentation(g)?;
    Ok(FragmentationDelta::new(before, after))
}

/// Smallest set size whose POS reach meets a threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoK {
    pub threshold: f64,
    pub k: usize,
    /// `(k, reach)` for every size tried, ascending.
    pub reach_by_k: Vec<(usize, f64)>,
}

/// Grows `k` from 1 until greedy POS reach is at least `threshold`.
pub fn auto_k_by_reach(g: &Graph, cfg: &KpConfig, threshold: f64) -> Result<(AutoK, KeyPlayerResult), KeyPlayerError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(KeyPlayerError::InvalidConfig(format!("reach threshold must be in (0, 1], got {threshold}")));
    }
    let mut reach_by_k = Vec::new();
    for k in 1..g.node_count() {
        let result = select_key_players(g, KpMethod::Pos, &KpConfig { k, ..cfg.clone() })?;
        reach_by_k.push((k, result.fit));
        if result.fit >= threshold {
            return Ok((AutoK { threshold, k, reach_by_k }, result));
        }
    }
    Err(KeyPlayerError::InvalidConfig(format!("no k < node count ({}) reaches {threshold}", g.node_count())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::*;

    const TOL: f64 = 1e-9;

    fn five_path() -> Graph {
        path(&["a", "b", "c", "d", "e"])
    }

    #[test]
    fn fit_neg_examples() {
        assert_eq!(fit_neg(&star(), &set(&["c"])).unwrap(), 1.0);
        assert_eq!(fit_neg(&five_path(), &BTreeSet::new()).unwrap(), 0.0);
        assert!((fit_neg(&five_path(), &set(&["c"])).unwrap() - 2.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn fit_neg_errors() {
        assert!(matches!(fit_neg(&five_path(), &set(&["zz"])), Err(KeyPlayerError::Graph(GraphError::UnknownNode(_)))));
        assert_eq!(
            fit_neg(&five_path(), &set(&["a", "b", "c", "d"])),
            Err(KeyPlayerError::DegenerateResidual { remaining: 1 })
        );
    }

    #[test]
    fn fit_pos_examples() {
        assert_eq!(fit_pos(&star(), &set(&["c"]), 1).unwrap(), 1.0);
        assert!((fit_pos(&five_path(), &set(&["c"]), 1).unwrap() - 0.6).abs() < TOL);
        assert_eq!(fit_pos(&five_path(), &set(&["b", "d"]), 1).unwrap(), 1.0);
        assert_eq!(fit_pos(&five_path(), &set(&["a"]), 2).unwrap(), 0.6);
    }

    #[test]
    fn fit_pos_errors() {
        assert_eq!(fit_pos(&five_path(), &BTreeSet::new(), 1), Err(KeyPlayerError::EmptySet));
        assert!(fit_pos(&five_path(), &set(&["q"]), 1).is_err());
        assert!(matches!(fit_pos(&five_path(), &set(&["a"]), 0), Err(KeyPlayerError::InvalidConfig(_))));
    }

    #[test]
    fn greedy_structured_cases() {
        let r = select_key_players(&star(), KpMethod::Neg, &KpConfig::with_k(1)).unwrap();
        assert_eq!(r.chosen, set(&["c"]));
        assert_eq!(r.fit, 1.0);

        let r = select_key_players(&barbell(), KpMethod::Neg, &KpConfig::with_k(1)).unwrap();
        assert_eq!(r.chosen, set(&["x"]));
        assert!((r.fit - 0.6).abs() < TOL);

        let cfg = KpConfig { k: 2, reach_distance_m: 1, ..Default::default() };
        let r = select_key_players(&five_path(), KpMethod::Pos, &cfg).unwrap();
        assert_eq!(r.fit, 1.0);
        // {a,d}, {b,d} and {b,e} all cover the path; ties go to the smallest set
        assert_eq!(r.chosen, set(&["a", "d"]));
        assert_eq!(r.reach_distance_m, Some(1));
    }

    #[test]
    fn barbell_hub_removal_is_worse_than_bridge() {
        // removing a1 leaves {a2,a3} and {x,b1,b2,b3}: 1 - (2 + 12)/30
        let f = fit_neg(&barbell(), &set(&["a1"])).unwrap();
        assert!((f - 16.0 / 30.0).abs() < TOL);
        assert_eq!(graph::degree_ranking(&barbell())[0].0, id("a1"));
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_key_players(&star(), KpMethod::Neg, 1, 1).unwrap(), (set(&["c"]), 1.0));
        let tri = complete(&["a", "b", "c"]);
        assert_eq!(brute_force_key_players(&tri, KpMethod::Neg, 1, 1).unwrap(), (set(&["a"]), 0.0));
        let (s, f) = brute_force_key_players(&barbell(), KpMethod::Neg, 1, 1).unwrap();
        assert_eq!(s, set(&["x"]));
        assert!((f - 0.6).abs() < TOL);
        let (s, f) = brute_force_key_players(&five_path(), KpMethod::Pos, 2, 1).unwrap();
        assert_eq!((s, f), (set(&["a", "d"]), 1.0));
    }

    #[test]
    fn brute_force_guard() {
        let labels: Vec<String> = (0..40).map(|i| format!("v{i:02}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let g = graph(&refs, &[]);
        // C(40, 20) is far beyond the limit
        assert!(matches!(brute_force_key_players(&g, KpMethod::Neg, 20, 1), Err(KeyPlayerError::TooLarge { .. })));
        assert!(brute_force_key_players(&g, KpMethod::Neg, 3, 1).is_ok());
    }

    #[test]
    fn config_validation() {
        let g = five_path();
        let err = select_key_players(&g, KpMethod::Neg, &KpConfig::with_k(0)).unwrap_err();
        assert_eq!(err, KeyPlayerError::InvalidConfig("k must be ≥ 1".into()));
        assert!(select_key_players(&g, KpMethod::Pos, &KpConfig::with_k(5)).is_err());
        let cfg = KpConfig { restarts: 0, ..KpConfig::with_k(1) };
        assert!(select_key_players(&g, KpMethod::Pos, &cfg).is_err());
        // NEG with k = n - 1 leaves one node
        assert_eq!(
            select_key_players(&g, KpMethod::Neg, &KpConfig::with_k(4)),
            Err(KeyPlayerError::DegenerateResidual { remaining: 1 })
        );
    }

    #[test]
    fn removal_impact_examples() {
        let d = FragmentationDelta::new(0.854, 0.947);
        assert!((d.change - 0.093).abs() < TOL);

        let g = barbell();
        assert_eq!(removal_impact(&g, &BTreeSet::new()).unwrap().change, 0.0);

        let d = removal_impact(&five_path(), &set(&["c"])).unwrap();
        assert_eq!(d.initial, 0.0);
        assert!((d.final_ - 2.0 / 3.0).abs() < TOL);
        assert!((d.change - 2.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn removal_impact_can_be_negative() {
        // an isolate plus a triangle; removing the isolate leaves a connected graph
        let g = graph(&["a", "b", "c", "z"], &[("a", "b"), ("b", "c"), ("a", "c")]);
        let d = removal_impact(&g, &set(&["z"])).unwrap();
        assert!(d.change < 0.0);
        assert!((d.change + 0.5).abs() < TOL);
    }

    #[test]
    fn result_is_deterministic_and_self_consistent() {
        let g = barbell();
        let cfg = KpConfig { k: 2, rng_seed: 99, ..Default::default() };
        for method in [KpMethod::Neg, KpMethod::Pos] {
            let a = select_key_players(&g, method, &cfg).unwrap();
            let b = select_key_players(&g, method, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.chosen.len(), 2);
            assert_eq!(a.restarts_run, 20);
            assert_eq!(a.sweeps_per_restart.len(), 20);
            let refit = fit(&g, &a.chosen, method, cfg.reach_distance_m).unwrap();
            assert!((refit - a.fit).abs() < TOL);
        }
    }

    #[test]
    fn max_sweeps_caps_ascent() {
        let cfg = KpConfig { k: 2, restarts: 3, max_sweeps: 1, ..Default::default() };
        let r = select_key_players(&barbell(), KpMethod::Neg, &cfg).unwrap();
        assert!(r.sweeps_per_restart.iter().all(|&s| s == 1));
    }

    #[test]
    fn auto_k_on_path() {
        let cfg = KpConfig::default();
        let (auto, result) = auto_k_by_reach(&five_path(), &cfg, 0.9).unwrap();
        assert_eq!(auto.k, 2);
        assert_eq!(auto.reach_by_k.len(), 2);
        assert!((auto.reach_by_k[0].1 - 0.6).abs() < TOL);
        assert_eq!(result.fit, 1.0);
        assert!(auto_k_by_reach(&five_path(), &cfg, 1.5).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 3), 220);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }
}
