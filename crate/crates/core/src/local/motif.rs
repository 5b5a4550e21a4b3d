//! Per-node motif counts over k-hop balls.

use std::collections::HashSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{all_pairs_shortest_paths, Graph, UNREACHABLE};
use crate::tokenize::hop_rings;

const MAX_PATTERN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    Triangle,
    /// Path on three vertices.
    Path3,
    Cycle4,
}

impl Pattern {
    pub fn graph(self) -> Graph {
        let edges = match self {
            Pattern::Triangle => vec![(0, 1), (1, 2), (0, 2)],
            Pattern::Path3 => vec![(0, 1), (1, 2)],
            Pattern::Cycle4 => vec![(0, 1), (1, 2), (2, 3), (0, 3)],
        };
        Graph::new(edges.iter().flat_map(|&(u, v)| [u, v]).max().unwrap_or(0) + 1, edges)
            .expect("pattern graphs are valid")
    }

    /// Smallest hop radius the pattern fits in.
    pub fn radius(self) -> usize {
        match self {
            Pattern::Triangle => 1,
            Pattern::Path3 | Pattern::Cycle4 => 2,
        }
    }
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Pattern> {
        match s {
            "triangle" => Ok(Pattern::Triangle),
            "path3" | "path-3" | "3-path" => Ok(Pattern::Path3),
            "cycle4" | "4-cycle" | "c4" => Ok(Pattern::Cycle4),
            other => Err(Error::InvalidParameter(format!("unknown pattern {other:?}"))),
        }
    }
}

/// Pair index of `(i, j)`, `i < j`, in an `h`-vertex adjacency bitmask.
fn pair_bit(i: usize, j: usize, h: usize) -> u32 {
    let idx = i * h - i * (i + 1) / 2 + (j - i - 1);
    1 << idx
}

fn induced_mask(g: &Graph, nodes: &[usize]) -> u32 {
    let h = nodes.len();
    let mut m = 0;
    for i in 0..h {
        for j in i + 1..h {
            if g.has_edge(nodes[i], nodes[j]) {
                m |= pair_bit(i, j, h);
            }
        }
    }
    m
}

fn pattern_masks(pattern: &Graph) -> HashSet<u32> {
    let h = pattern.n();
    (0..h)
        .permutations(h)
        .map(|perm| {
            let mut m = 0;
            for &(a, b) in pattern.edges() {
                let (i, j) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                m |= pair_bit(i, j, h);
            }
            m
        })
        .collect()
}

fn diameter(g: &Graph) -> Option<usize> {
    let d = all_pairs_shortest_paths(g);
    if d.iter().flatten().any(|&x| x == UNREACHABLE) {
        return None;
    }
    Some(d.into_iter().flatten().max().unwrap_or(0) as usize)
}

/// `s_i = (#vertex subsets of the k-ball of i, containing i, whose induced
/// subgraph is isomorphic to H) / |V(H)|`. Summing over all nodes gives the
/// number of induced copies of `H` in `g`.
pub fn subgraph_count_encoding(g: &Graph, pattern: &Graph, k: usize) -> Result<Vec<f64>> {
    let h = pattern.n();
    if h == 0 || h > MAX_PATTERN {
        return Err(Error::InvalidParameter(format!(
            "pattern must have 1..={MAX_PATTERN} nodes, got {h}"
        )));
    }
    let diam = diameter(pattern).unwrap_or(usize::MAX);
    if diam > k {
        return Err(Error::PatternTooWide { diameter: diam, k });
    }
    let masks = pattern_masks(pattern);
    let z = h as f64;
    Ok((0..g.n())
        .map(|i| {
            let others: Vec<usize> = hop_rings(g, i, k).into_iter().skip(1).flatten().collect();
            let hits = others
                .into_iter()
                .combinations(h - 1)
                .filter(|rest| {
                    let mut nodes = rest.clone();
                    nodes.push(i);
                    nodes.sort_unstable();
                    masks.contains(&induced_mask(g, &nodes))
                })
                .count();
            hits as f64 / z
        })
        .collect())
}
