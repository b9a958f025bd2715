//! Synthetic datasets: clustered networks bridged by planted animators, and
//! Erdős–Rényi graphs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};
use crate::ingest::{Dataset, InteractionKind, InteractionRecord, Role, RoleTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid scenario: {0}")]
pub struct SynthError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub clusters: usize,
    pub cluster_size: usize,
    pub animators: usize,
    pub intra_cluster_density: f64,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig { clusters: 5, cluster_size: 6, animators: 2, intra_cluster_density: 0.8, rng_seed: 42 }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.clusters < 2 {
            return Err(SynthError(format!("clusters must be ≥ 2, got {}", self.clusters)));
        }
        if self.cluster_size < 2 {
            return Err(SynthError(format!("cluster size must be ≥ 2, got {}", self.cluster_size)));
        }
        if self.animators < 1 {
            return Err(SynthError("animators must be ≥ 1".into()));
        }
        let d = self.intra_cluster_density;
        if !(d > 0.0 && d <= 1.0) {
            return Err(SynthError(format!("intra-cluster density must be in (0, 1], got {d}")));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.clusters * self.cluster_size + self.animators
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTruth {
    pub dataset: Dataset,
    pub planted_animators: BTreeSet<NodeId>,
    /// The interaction log the network was built from.
    pub interactions: Vec<InteractionRecord>,
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).max(1).to_string().len()
}

fn label(s: String) -> NodeId {
    NodeId::new(s).expect("generated labels are non-empty")
}

/// Builds `clusters` internally connected groups and `animators` extra nodes,
/// each tied to one random member of every group. Groups touch only through
/// animators.
pub fn generate_animator_scenario(cfg: &ScenarioConfig) -> Result<ScenarioTruth, SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let cw = width(cfg.clusters + 1);
    let mw = width(cfg.cluster_size + 1);
    let aw = width(cfg.animators + 1);

    let groups: Vec<Vec<NodeId>> = (1..=cfg.clusters)
        .map(|c| (1..=cfg.cluster_size).map(|i| label(format!("g{c:0cw$}_{i:0mw$}"))).collect())
        .collect();
    let animators: Vec<NodeId> = (1..=cfg.animators).map(|a| label(format!("animator{a:0aw$}"))).collect();

    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    for members in &groups {
        let s = members.len();
        let mut linked: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut order: Vec<usize> = (0..s).collect();
        order.shuffle(&mut rng);
        for i in 1..s {
            let parent = order[rng.gen_range(0..i)];
            let child = order[i];
            linked.insert((parent.min(child), parent.max(child)));
        }
        for i in 0..s {
            for j in i + 1..s {
                if !linked.contains(&(i, j)) && rng.gen::<f64>() < cfg.intra_cluster_density {
                    linked.insert((i, j));
                }
            }
        }
        pairs.extend(linked.into_iter().map(|(i, j)| (members[i].clone(), members[j].clone())));
    }
    for a in &animators {
        for members in &groups {
            let anchor = &members[rng.gen_range(0..members.len())];
            pairs.push((a.clone(), anchor.clone()));
        }
    }

    let interactions: Vec<InteractionRecord> = pairs
        .into_iter()
        .map(|(x, y)| {
            let (source, target) = if rng.gen::<bool>() { (x, y) } else { (y, x) };
            let kind = InteractionKind::ALL[rng.gen_range(0..InteractionKind::ALL.len())];
            InteractionRecord { source, target, kind, timestamp: None }
        })
        .collect();

    let nodes = groups.iter().flatten().chain(&animators).cloned();
    let edges = interactions.iter().map(|r| (r.source.clone(), r.target.clone()));
    let graph = Graph::new(nodes, edges).expect("generated edges join generated nodes");
    let roles: RoleTable = graph
        .nodes()
        .iter()
        .map(|n| {
            let role = if animators.contains(n) { Role::SeededDeveloper } else { Role::Participant };
            (n.clone(), role)
        })
        .collect();
    let provenance = format!(
        "synthetic animator scenario: clusters={} cluster_size={} animators={} density={} seed={}",
        cfg.clusters, cfg.cluster_size, cfg.animators, cfg.intra_cluster_density, cfg.rng_seed
    );

    Ok(ScenarioTruth {
        dataset: Dataset::new(graph, roles, provenance),
        planted_animators: animators.into_iter().collect(),
        interactions,
    })
}

/// G(n, p) on nodes `v0..v{n-1}` (zero-padded so labels sort numerically).
pub fn generate_random_graph(n: usize, p: f64, rng_seed: u64) -> Result<Graph, SynthError> {
    if n < 2 {
        return Err(SynthError(format!("n must be ≥ 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(SynthError(format!("p must be in [0, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let w = width(n);
    let ids: Vec<NodeId> = (0..n).map(|i| label(format!("v{i:0w$}"))).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    Ok(Graph::new(ids, edges).expect("generated edges join generated nodes"))
}
