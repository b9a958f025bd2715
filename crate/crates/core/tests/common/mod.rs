//! Reference computations that share no code with the library's graph
//! algorithms. They work on plain edge lists.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use kpkit::graph::{Graph, NodeId};

pub fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

pub fn set(ids: &[&str]) -> BTreeSet<NodeId> {
    ids.iter().map(|s| id(s)).collect()
}

pub fn graph(nodes: &[&str], edges: &[(&str, &str)]) -> Graph {
    Graph::new(nodes.iter().map(|s| id(s)), edges.iter().map(|(a, b)| (id(a), id(b)))).unwrap()
}

pub fn path(labels: &[&str]) -> Graph {
    let edges: Vec<_> = labels.windows(2).map(|w| (w[0], w[1])).collect();
    graph(labels, &edges)
}

pub fn complete(labels: &[&str]) -> Graph {
    let mut edges = Vec::new();
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            edges.push((labels[i], labels[j]));
        }
    }
    graph(labels, &edges)
}

pub fn star() -> Graph {
    graph(&["c", "l1", "l2", "l3", "l4"], &[("c", "l1"), ("c", "l2"), ("c", "l3"), ("c", "l4")])
}

pub fn barbell() -> Graph {
    graph(
        &["a1", "a2", "a3", "b1", "b2", "b3", "x"],
        &[("a1", "a2"), ("a2", "a3"), ("a1", "a3"), ("b1", "b2"), ("b2", "b3"), ("b1", "b3"), ("x", "a1"), ("x", "b1")],
    )
}

/// Plain adjacency lists keyed by position in `g.nodes()`, skipping `removed`.
pub struct EdgeList {
    pub names: Vec<NodeId>,
    pub adj: Vec<Vec<usize>>,
}

impl EdgeList {
    pub fn from_graph(g: &Graph, removed: &BTreeSet<NodeId>) -> Self {
        let names: Vec<NodeId> = g.nodes().iter().filter(|n| !removed.contains(n)).cloned().collect();
        let pos = |n: &NodeId| names.iter().position(|m| m == n);
        let mut adj = vec![Vec::new(); names.len()];
        for (a, b) in g.edges() {
            if let (Some(i), Some(j)) = (pos(a), pos(b)) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        EdgeList { names, adj }
    }

    fn reachable(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.names.len()];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            if u == to {
                return true;
            }
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    fn within(&self, sources: &[usize], m: u32) -> usize {
        let n = self.names.len();
        (0..n)
            .filter(|&v| {
                sources.iter().any(|&s| {
                    // depth-limited BFS per source
                    let mut dist = vec![u32::MAX; n];
                    dist[s] = 0;
                    let mut q = VecDeque::from([s]);
                    while let Some(u) = q.pop_front() {
                        if dist[u] == m {
                            continue;
                        }
                        for &w in &self.adj[u] {
                            if dist[w] == u32::MAX {
                                dist[w] = dist[u] + 1;
                                q.push_back(w);
                            }
                        }
                    }
                    dist[v] <= m
                })
            })
            .count()
    }
}

/// Unreachable unordered pairs and total pairs, by a separate search per pair.
pub fn pair_count_oracle(g: &Graph, removed: &BTreeSet<NodeId>) -> (u64, u64) {
    let el = EdgeList::from_graph(g, removed);
    let n = el.names.len();
    let mut unreachable = 0;
    let mut total = 0;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if !el.reachable(i, j) {
                unreachable += 1;
            }
        }
    }
    (unreachable, total)
}

pub fn fragmentation_oracle(g: &Graph, removed: &BTreeSet<NodeId>) -> f64 {
    let (u, t) = pair_count_oracle(g, removed);
    u as f64 / t as f64
}

pub fn reach_oracle(g: &Graph, chosen: &BTreeSet<NodeId>, m: u32) -> f64 {
    let el = EdgeList::from_graph(g, &BTreeSet::new());
    let sources: Vec<usize> = chosen.iter().map(|c| el.names.iter().position(|n| n == c).unwrap()).collect();
    el.within(&sources, m) as f64 / el.names.len() as f64
}

/// All k-subsets of the node list, lexicographic.
pub fn subsets(g: &Graph, k: usize) -> Vec<BTreeSet<NodeId>> {
    fn rec(names: &[NodeId], k: usize, start: usize, cur: &mut Vec<NodeId>, out: &mut Vec<BTreeSet<NodeId>>) {
        if cur.len() == k {
            out.push(cur.iter().cloned().collect());
            return;
        }
        for i in start..names.len() {
            cur.push(names[i].clone());
            rec(names, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(g.nodes(), k, 0, &mut Vec::new(), &mut out);
    out
}

/// Every k-subset that attains the best NEG fit, per the pair oracle.
pub fn neg_optima(g: &Graph, k: usize) -> (f64, Vec<BTreeSet<NodeId>>) {
    let scored: Vec<(BTreeSet<NodeId>, (u64, u64))> = subsets(g, k)
        .into_iter()
        .map(|s| {
            let c = pair_count_oracle(g, &s);
            (s, c)
        })
        .collect();
    let best = scored.iter().map(|(_, c)| c.0).max().unwrap();
    let total = scored[0].1 .1;
    let winners = scored.into_iter().filter(|(_, c)| c.0 == best).map(|(s, _)| s).collect();
    (best as f64 / total as f64, winners)
}
