//! Undirected simple graphs over participant identifiers and the
//! whole-network measures computed on them.
//!
//! Nodes are stored in ascending [`NodeId`] order, so a node's internal index
//! orders the same way as its identifier. Every listing produced here
//! (neighbors, components, rankings) follows that order.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node identifiers must be non-empty")]
    EmptyId,
    #[error("edge ({0}, {1}) references a node that is not in the node set")]
    UnknownEndpoint(NodeId, NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("unknown node: {0}")]
    UnknownNode(NodeId),
    #[error("graph has {0} node(s); at least 2 are required")]
    DegenerateGraph(usize),
    #[error("source set is empty")]
    EmptySources,
}

/// Participant handle or synthetic label. Comparison is exact and
/// case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self, GraphError> {
        let id = id.into();
        if id.is_empty() {
            return Err(GraphError::EmptyId);
        }
        Ok(NodeId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for NodeId {
    type Error = GraphError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl TryFrom<&str> for NodeId {
    type Error = GraphError;

    fn try_from(value: &str) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> String {
        id.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for NodeId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Immutable undirected simple graph. Isolates are permitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from a node set and an edge list. Duplicate edges (in
    /// either orientation) collapse to one.
    pub fn new<N, E>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = NodeId>,
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let ids: Vec<NodeId> = nodes.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let mut adj_sets = vec![BTreeSet::new(); ids.len()];
        for (a, b) in edges {
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
                return Err(GraphError::UnknownEndpoint(a, b));
            };
            if ia == ib {
                return Err(GraphError::SelfLoop(a));
            }
            adj_sets[ia].insert(ib);
            adj_sets[ib].insert(ia);
        }
        let adj: Vec<Vec<usize>> = adj_sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Ok(Graph { ids, index, adj, edge_count })
    }

    /// Graph whose node set is exactly the edge endpoints.
    pub fn from_edges<E>(edges: E) -> Result<Self, GraphError>
    where
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let edges: Vec<_> = edges.into_iter().collect();
        let nodes: Vec<NodeId> = edges.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        Graph::new(nodes, edges)
    }

    pub fn empty() -> Self {
        Graph { ids: Vec::new(), index: HashMap::new(), adj: Vec::new(), edge_count: 0 }
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Nodes in ascending identifier order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.index.contains_key(id)
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node(&self, idx: usize) -> &NodeId {
        &self.ids[idx]
    }

    /// Neighbor indices in ascending order.
    pub fn neighbor_indices(&self, idx: usize) -> &[usize] {
        &self.adj[idx]
    }

    pub fn neighbors(&self, id: &NodeId) -> Result<impl Iterator<Item = &NodeId>, GraphError> {
        let idx = self.require(id)?;
        Ok(self.adj[idx].iter().map(move |&j| &self.ids[j]))
    }

    pub fn has_edge(&self, a: &NodeId, b: &NodeId) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(ia), Some(ib)) => self.adj[ia].binary_search(&ib).is_ok(),
            _ => false,
        }
    }

    pub fn degree(&self, id: &NodeId) -> Result<usize, GraphError> {
        Ok(self.adj[self.require(id)?].len())
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(move |(i, nbrs)| nbrs.iter().filter(move |&&j| j > i).map(move |&j| (&self.ids[i], &self.ids[j])))
    }

    pub(crate) fn require(&self, id: &NodeId) -> Result<usize, GraphError> {
        self.index_of(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))
    }

    /// Resolves a set of identifiers to a removal mask.
    pub(crate) fn mask_of<'a, I>(&self, ids: I) -> Result<Vec<bool>, GraphError>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let mut mask = vec![false; self.node_count()];
        for id in ids {
            mask[self.require(id)?] = true;
        }
        Ok(mask)
    }

    /// Component sizes of the subgraph induced by nodes with `removed[i] == false`,
    /// in order of each component's smallest index.
    pub(crate) fn component_sizes_masked(&self, removed: &[bool]) -> Vec<usize> {
        let n = self.node_count();
        let mut seen = removed.to_vec();
        let mut queue = VecDeque::new();
        let mut sizes = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut size = 0;
            while let Some(u) = queue.pop_front() {
                size += 1;
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            sizes.push(size);
        }
        sizes
    }

    /// Hop distances from a source set; `None` marks unreachable nodes.
    /// Search stops expanding past `limit` hops when given.
    pub(crate) fn multi_source_hops(&self, sources: &[usize], limit: Option<u32>) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes have a distance");
            if limit.is_some_and(|m| du >= m) {
                continue;
            }
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Disjoint maximal connected node sets, ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentPartition {
    pub components: Vec<Vec<NodeId>>,
    pub sizes: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn largest(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }
}

/// Exact count of unreachable unordered pairs over all unordered pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairFraction {
    pub unreachable: u64,
    pub total: u64,
}

impl PairFraction {
    pub fn value(self) -> f64 {
        self.unreachable as f64 / self.total as f64
    }
}

/// Hop distance, or unreachable from every source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Distance {
    Hops(u32),
    Unreachable,
}

impl Distance {
    pub fn hops(self) -> Option<u32> {
        match self {
            Distance::Hops(h) => Some(h),
            Distance::Unreachable => None,
        }
    }
}

pub fn build_graph<N, E>(nodes: N, edges: E) -> Result<Graph, GraphError>
where
    N: IntoIterator<Item = NodeId>,
    E: IntoIterator<Item = (NodeId, NodeId)>,
{
    Graph::new(nodes, edges)
}

pub fn connected_components(g: &Graph) -> ComponentPartition {
    let n = g.node_count();
    let mut comp_of = vec![usize::MAX; n];
    let mut components: Vec<Vec<NodeId>> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp_of[start] != usize::MAX {
            continue;
        }
        let c = components.len();
        comp_of[start] = c;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(u) = queue.pop_front() {
            members.push(u);
            for &v in g.neighbor_indices(u) {
                if comp_of[v] == usize::MAX {
                    comp_of[v] = c;
                    queue.push_back(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members.into_iter().map(|i| g.node(i).clone()).collect());
    }
    let sizes = components.iter().map(Vec::len).collect();
    ComponentPartition { components, sizes }
}

/// Unreachable pairs given component sizes over `n` nodes.
pub(crate) fn pair_fraction_from_sizes(sizes: &[usize]) -> PairFraction {
    let n: u64 = sizes.iter().map(|&s| s as u64).sum();
    let ordered_total = n * n.saturating_sub(1);
    let ordered_reachable: u64 = sizes.iter().map(|&s| (s as u64) * (s as u64).saturating_sub(1)).sum();
    PairFraction { unreachable: (ordered_total - ordered_reachable) / 2, total: ordered_total / 2 }
}

/// Fragmentation as an exact pair count.
pub fn fragmentation_exact(g: &Graph) -> Result<PairFraction, GraphError> {
    let n = g.node_count();
    if n < 2 {
        return Err(GraphError::DegenerateGraph(n));
    }
    let removed = vec![false; n];
    Ok(pair_fraction_from_sizes(&g.component_sizes_masked(&removed)))
}

/// Proportion of unordered node pairs joined by no path:
/// `1 - Σ s_k(s_k - 1) / (n(n - 1))` over component sizes `s_k`.
pub fn fragmentation(g: &Graph) -> Result<f64, GraphError> {
    fragmentation_exact(g).map(PairFraction::value)
}

pub fn degree_centrality(g: &Graph) -> BTreeMap<NodeId, usize> {
    g.nodes().iter().enumerate().map(|(i, id)| (id.clone(), g.neighbor_indices(i).len())).collect()
}

/// Nodes by descending degree, ties by ascending identifier.
pub fn degree_ranking(g: &Graph) -> Vec<(NodeId, usize)> {
    let mut ranked: Vec<(usize, usize)> = (0..g.node_count()).map(|i| (i, g.neighbor_indices(i).len())).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.into_iter().map(|(i, d)| (g.node(i).clone(), d)).collect()
}

pub fn graph_density(g: &Graph) -> Result<f64, GraphError> {
    let n = g.node_count();
    if n < 2 {
        return Err(GraphError::DegenerateGraph(n));
    }
    let possible = (n as u64) * (n as u64 - 1) / 2;
    Ok(g.edge_count() as f64 / possible as f64)
}

pub fn bfs_distances(g: &Graph, sources: &BTreeSet<NodeId>) -> Result<BTreeMap<NodeId, Distance>, GraphError> {
    if sources.is_empty() {
        return Err(GraphError::EmptySources);
    }
    let src: Vec<usize> = sources.iter().map(|s| g.require(s)).collect::<Result<_, _>>()?;
    let hops = g.multi_source_hops(&src, None);
    Ok(g.nodes()
        .iter()
        .zip(hops)
        .map(|(id, h)| (id.clone(), h.map_or(Distance::Unreachable, Distance::Hops)))
        .collect())
}

/// Induced subgraph on the nodes not in `removed`. The input is untouched.
pub fn remove_nodes(g: &Graph, removed: &BTreeSet<NodeId>) -> Result<Graph, GraphError> {
    let mask = g.mask_of(removed)?;
    let keep: Vec<usize> = (0..g.node_count()).filter(|&i| !mask[i]).collect();
    let mut remap = vec![usize::MAX; g.node_count()];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = new;
    }
    let adj: Vec<Vec<usize>> = keep
        .iter()
        .map(|&old| g.neighbor_indices(old).iter().filter(|&&j| !mask[j]).map(|&j| remap[j]).collect())
        .collect();
    let ids: Vec<NodeId> = keep.iter().map(|&i| g.node(i).clone()).collect();
    let index = ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
    let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
    Ok(Graph { ids, index, adj, edge_count })
}
