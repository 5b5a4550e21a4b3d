//! Undirected graphs with a semantically meaningful edge order.
//!
//! Edge order is part of a [`Graph`]'s identity: edge tokenization, node
//! locality and the streaming connectivity automaton all read edges in stored
//! order, and two graphs with the same edge set in different orders compare
//! unequal.

mod generators;
mod oracle;

pub use generators::{
    color_connectivity_instance, complete, generate_cycles, generate_erdos_renyi,
    generate_factored, generate_regular, grid, path, star, FactoredGraph, BLUE, RED,
};
pub use oracle::{
    all_pairs_shortest_paths, bfs_distances, color_counts, component_count, degrees, has_cycle,
    is_connected, oracle, triangle_count, TaskKind, TaskLabel, UNREACHABLE,
};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// An undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    colors: Option<Vec<usize>>,
    features: Option<Vec<Vec<f64>>>,
    adj: Vec<Vec<usize>>,
}

/// Wire form; field order is fixed by the interchange format.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
    colors: Option<Vec<usize>>,
    features: Option<Vec<Vec<f64>>>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        let mut g = Graph::new(r.n, r.edges.into_iter().map(|[u, v]| (u, v)).collect())?;
        if let Some(colors) = r.colors {
            g = g.with_colors(colors)?;
        }
        if let Some(features) = r.features {
            g = g.with_features(features)?;
        }
        Ok(g)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            n: g.n,
            edges: g.edges.into_iter().map(|(u, v)| [u, v]).collect(),
            colors: g.colors,
            features: g.features,
        }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range
    /// endpoints.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} = ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {i} is a self-loop on {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge between {v} and {}",
                    w[0]
                )));
            }
        }
        Ok(Graph {
            n,
            edges,
            colors: None,
            features: None,
            adj,
        })
    }

    pub fn with_colors(mut self, colors: Vec<usize>) -> Result<Self> {
        if colors.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} colors for {} nodes",
                colors.len(),
                self.n
            )));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn with_features(mut self, features: Vec<Vec<f64>>) -> Result<Self> {
        if features.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} feature rows for {} nodes",
                features.len(),
                self.n
            )));
        }
        if let Some(first) = features.first() {
            let d = first.len();
            if features.iter().any(|f| f.len() != d) {
                return Err(Error::InvalidGraph("feature rows differ in dimension".into()));
            }
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn without_colors(mut self) -> Self {
        self.colors = None;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> (usize, usize) {
        self.edges[idx]
    }

    pub fn colors(&self) -> Option<&[usize]> {
        self.colors.as_deref()
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        self.features.as_deref()
    }

    /// Feature dimension, if features are present.
    pub fn feature_dim(&self) -> Option<usize> {
        self.features
            .as_ref()
            .map(|f| f.first().map_or(0, Vec::len))
    }

    /// Neighbors of `v` in ascending id order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges listed in the order given by `order` (a permutation of edge
    /// indices).
    pub fn ordered_edges(&self, order: &[usize]) -> Result<Vec<(usize, usize)>> {
        check_permutation(order, self.edges.len())?;
        Ok(order.iter().map(|&i| self.edges[i]).collect())
    }

    /// The same graph with node `v` renamed to `perm[v]`. Edge order, colors
    /// and features travel with their nodes.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Graph> {
        check_permutation(perm, self.n)?;
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let mut g = Graph::new(self.n, edges)?;
        if let Some(colors) = &self.colors {
            let mut c = vec![0; self.n];
            for v in 0..self.n {
                c[perm[v]] = colors[v];
            }
            g = g.with_colors(c)?;
        }
        if let Some(features) = &self.features {
            let mut f = vec![Vec::new(); self.n];
            for v in 0..self.n {
                f[perm[v]] = features[v].clone();
            }
            g = g.with_features(f)?;
        }
        Ok(g)
    }

    /// Subgraph induced by `nodes` (must be sorted and distinct). Node `nodes[i]`
    /// becomes `i`; edges keep their relative order.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let index = |v: usize| nodes.binary_search(&v).ok();
        let edges = self
            .edges
            .iter()
            .filter_map(|&(u, v)| Some((index(u)?, index(v)?)))
            .collect();
        let mut g = Graph::new(nodes.len(), edges).expect("induced subgraph of a valid graph");
        if let Some(features) = &self.features {
            g.features = Some(nodes.iter().map(|&v| features[v].clone()).collect());
        }
        if let Some(colors) = &self.colors {
            g.colors = Some(nodes.iter().map(|&v| colors[v]).collect());
        }
        g
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Graph> {
        Ok(serde_json::from_str(s)?)
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn fingerprint(&self) -> String {
        fingerprint_bytes(self.to_json().as_bytes())
    }
}

pub(crate) fn fingerprint_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn check_permutation(perm: &[usize], len: usize) -> Result<()> {
    if perm.len() != len {
        return Err(Error::InvalidPermutation(format!(
            "length {} but expected {len}",
            perm.len()
        )));
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidPermutation(format!(
                "entry {p} is out of range or repeated"
            )));
        }
    }
    Ok(())
}

/// Disjoint sets with union by rank and path compression.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
            sets: n,
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Returns true if `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.sets -= 1;
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Number of disjoint sets.
    pub fn sets(&self) -> usize {
        self.sets
    }
}
