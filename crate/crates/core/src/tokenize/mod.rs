//! Graph-to-sequence tokenizers.
//!
//! A [`Tokenization`] is a list of token sequences. Node tokenization is the
//! degenerate case with one single-node sequence per node; edge tokenization
//! is one sequence over all edges; k-hop and random-walk tokenizers produce
//! one or more sequences per node.

mod locality;
mod mot;

pub use locality::{node_locality, sequence_locality};
pub use mot::{mot_combine, mot_route, MotChoice, RouterWeights};

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{check_permutation, fingerprint_bytes, Graph};
use crate::rng;

/// A single token: a node, an edge (by index into the graph's edge list), or
/// a sorted node set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Token {
    Node { node: usize },
    Edge { edge: usize },
    /// `empty` marks a placeholder for an empty k-hop ring; its `subgraph`
    /// then holds only the anchor node.
    Subgraph { subgraph: Vec<usize>, empty: bool },
}

impl Token {
    pub fn node(v: usize) -> Token {
        Token::Node { node: v }
    }

    pub fn edge(i: usize) -> Token {
        Token::Edge { edge: i }
    }

    pub fn subgraph(mut nodes: Vec<usize>) -> Token {
        nodes.sort_unstable();
        Token::Subgraph {
            subgraph: nodes,
            empty: false,
        }
    }

    pub fn empty_marker(anchor: usize) -> Token {
        Token::Subgraph {
            subgraph: vec![anchor],
            empty: true,
        }
    }

    pub fn is_empty_marker(&self) -> bool {
        matches!(self, Token::Subgraph { empty: true, .. })
    }

    /// Nodes covered by the token. An empty marker covers nothing.
    pub fn members(&self, g: &Graph) -> Vec<usize> {
        match self {
            Token::Node { node } => vec![*node],
            Token::Edge { edge } => {
                let (u, v) = g.edge(*edge);
                if u < v {
                    vec![u, v]
                } else {
                    vec![v, u]
                }
            }
            Token::Subgraph { empty: true, .. } => Vec::new(),
            Token::Subgraph { subgraph, .. } => subgraph.clone(),
        }
    }

    fn validate(&self, g: &Graph) -> Result<()> {
        match self {
            Token::Node { node } if *node >= g.n() => {
                Err(Error::InvalidToken(format!("node {node} outside 0..{}", g.n())))
            }
            Token::Edge { edge } if *edge >= g.edge_count() => Err(Error::InvalidToken(format!(
                "edge {edge} outside 0..{}",
                g.edge_count()
            ))),
            Token::Subgraph { subgraph, .. } => {
                if subgraph.is_empty() {
                    return Err(Error::InvalidToken("empty subgraph token".into()));
                }
                if subgraph.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidToken("subgraph members not sorted".into()));
                }
                if subgraph.iter().any(|&v| v >= g.n()) {
                    return Err(Error::InvalidToken("subgraph member out of range".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Token sequences plus the tokenizer that produced them and the fingerprint
/// of the source graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tokenization {
    pub tokenizer: String,
    pub params: serde_json::Value,
    pub graph_fingerprint: String,
    pub sequences: Vec<Vec<Token>>,
}

impl Tokenization {
    pub(crate) fn new(
        g: &Graph,
        tokenizer: &str,
        params: serde_json::Value,
        sequences: Vec<Vec<Token>>,
    ) -> Tokenization {
        Tokenization {
            tokenizer: tokenizer.to_string(),
            params,
            graph_fingerprint: g.fingerprint(),
            sequences,
        }
    }

    /// Checks the structural invariants against the source graph.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.graph_fingerprint != g.fingerprint() {
            return Err(Error::InvalidToken("tokenization was built from a different graph".into()));
        }
        if self.sequences.is_empty() && g.n() > 0 {
            return Err(Error::InvalidToken("no sequences".into()));
        }
        for seq in &self.sequences {
            if seq.is_empty() {
                return Err(Error::InvalidToken("empty sequence".into()));
            }
            for t in seq {
                t.validate(g)?;
            }
        }
        Ok(())
    }

    /// Each token replaced by its member node set.
    pub fn member_sets(&self, g: &Graph) -> Vec<Vec<Vec<usize>>> {
        self.sequences
            .iter()
            .map(|s| s.iter().map(|t| t.members(g)).collect())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tokenization serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Tokenization> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_bytes(self.to_json().as_bytes())
    }
}

/// One single-token sequence per node, in node-id order.
pub fn node_tokenize(g: &Graph) -> Tokenization {
    let sequences = (0..g.n()).map(|v| vec![Token::node(v)]).collect();
    Tokenization::new(g, "node", serde_json::json!({}), sequences)
}

/// Node tokenization with sequences listed in `node_order`.
pub fn node_tokenize_ordered(g: &Graph, node_order: &[usize]) -> Result<Tokenization> {
    check_permutation(node_order, g.n())?;
    let sequences = node_order.iter().map(|&v| vec![Token::node(v)]).collect();
    Ok(Tokenization::new(
        g,
        "node",
        serde_json::json!({ "order": node_order }),
        sequences,
    ))
}

/// A single sequence of edge tokens, in stored order unless `order` is given.
pub fn edge_tokenize(g: &Graph, order: Option<&[usize]>) -> Result<Tokenization> {
    let order: Vec<usize> = match order {
        Some(o) => {
            check_permutation(o, g.edge_count())?;
            o.to_vec()
        }
        None => (0..g.edge_count()).collect(),
    };
    let params = serde_json::json!({ "order": &order });
    Ok(Tokenization::new(
        g,
        "edge",
        params,
        vec![order.into_iter().map(Token::edge).collect()],
    ))
}

/// Exact-distance BFS rings around `v` for hops `0..=k`.
pub(crate) fn hop_rings(g: &Graph, v: usize, k: usize) -> Vec<Vec<usize>> {
    let mut rings = vec![Vec::new(); k + 1];
    let mut dist = vec![usize::MAX; g.n()];
    dist[v] = 0;
    rings[0].push(v);
    let mut queue = VecDeque::from([v]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == k {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                rings[dist[w]].push(w);
                queue.push_back(w);
            }
        }
    }
    for r in &mut rings {
        r.sort_unstable();
    }
    rings
}

/// All nodes within `k` hops of `v`, sorted.
pub fn hop_ball(g: &Graph, v: usize, k: usize) -> Vec<usize> {
    let mut ball: Vec<usize> = hop_rings(g, v, k).into_iter().flatten().collect();
    ball.sort_unstable();
    ball
}

/// For each node, the sequence `[{v}, ring_1, ..., ring_K]` of exact-distance
/// rings. Empty rings become empty markers so every sequence has length
/// `K + 1`.
pub fn khop_tokenize(g: &Graph, k: usize) -> Tokenization {
    let sequences = (0..g.n())
        .map(|v| {
            hop_rings(g, v, k)
                .into_iter()
                .map(|ring| {
                    if ring.is_empty() {
                        Token::empty_marker(v)
                    } else {
                        Token::subgraph(ring)
                    }
                })
                .collect()
        })
        .collect();
    Tokenization::new(g, "khop", serde_json::json!({ "k": k }), sequences)
}

/// `walks_per_node` uniform random walks of `walk_len` nodes from every node,
/// grouped by start node. A walk stuck on an isolated node repeats it.
pub fn random_walk_tokenize(
    g: &Graph,
    walk_len: usize,
    walks_per_node: usize,
    seed: u64,
) -> Result<Tokenization> {
    if walk_len == 0 {
        return Err(Error::InvalidParameter("walk_len must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let mut sequences = Vec::with_capacity(g.n() * walks_per_node);
    for start in 0..g.n() {
        for _ in 0..walks_per_node {
            let mut walk = Vec::with_capacity(walk_len);
            let mut at = start;
            walk.push(Token::node(at));
            for _ in 1..walk_len {
                if let Some(&next) = g.neighbors(at).choose(&mut rng) {
                    at = next;
                }
                walk.push(Token::node(at));
            }
            sequences.push(walk);
        }
    }
    let params = serde_json::json!({
        "walk_len": walk_len,
        "walks_per_node": walks_per_node,
        "seed": seed,
    });
    Ok(Tokenization::new(g, "random_walk", params, sequences))
}
