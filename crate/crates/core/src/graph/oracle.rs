//! Exact task labels used as ground truth by every other module.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Graph, UnionFind};
use crate::error::{Error, Result};

/// Distance reported for unreachable node pairs.
pub const UNREACHABLE: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    NodeDegree,
    CycleCheck,
    TriangleCount,
    Connectivity,
    ColorCounts,
    ShortestPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskLabel {
    NodeDegree(Vec<usize>),
    CycleCheck(bool),
    TriangleCount(u64),
    Connectivity(bool),
    ColorCounts(Vec<usize>),
    ShortestPath(Vec<Vec<i64>>),
}

impl TaskLabel {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskLabel::NodeDegree(_) => TaskKind::NodeDegree,
            TaskLabel::CycleCheck(_) => TaskKind::CycleCheck,
            TaskLabel::TriangleCount(_) => TaskKind::TriangleCount,
            TaskLabel::Connectivity(_) => TaskKind::Connectivity,
            TaskLabel::ColorCounts(_) => TaskKind::ColorCounts,
            TaskLabel::ShortestPath(_) => TaskKind::ShortestPath,
        }
    }
}

/// Computes the exact label for `kind`. Color counts have one entry per color
/// id up to the largest one present.
pub fn oracle(g: &Graph, kind: TaskKind) -> Result<TaskLabel> {
    Ok(match kind {
        TaskKind::NodeDegree => TaskLabel::NodeDegree(degrees(g)),
        TaskKind::CycleCheck => TaskLabel::CycleCheck(has_cycle(g)),
        TaskKind::TriangleCount => TaskLabel::TriangleCount(triangle_count(g)),
        TaskKind::Connectivity => TaskLabel::Connectivity(is_connected(g)),
        TaskKind::ColorCounts => {
            let colors = g.colors().ok_or(Error::MissingColors)?;
            let c = colors.iter().max().map_or(0, |&m| m + 1);
            TaskLabel::ColorCounts(color_counts(g, c)?)
        }
        TaskKind::ShortestPath => TaskLabel::ShortestPath(all_pairs_shortest_paths(g)),
    })
}

pub fn degrees(g: &Graph) -> Vec<usize> {
    (0..g.n()).map(|v| g.degree(v)).collect()
}

/// Cycle detection by iterative DFS; a non-tree edge to a visited node other
/// than the DFS parent closes a cycle.
pub fn has_cycle(g: &Graph) -> bool {
    let mut visited = vec![false; g.n()];
    for root in 0..g.n() {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, usize::MAX)];
        while let Some((v, parent)) = stack.pop() {
            for &w in g.neighbors(v) {
                if w == parent {
                    continue;
                }
                if visited[w] {
                    return true;
                }
                visited[w] = true;
                stack.push((w, v));
            }
        }
    }
    false
}

/// Counts unordered node triples inducing K3 by intersecting sorted
/// adjacency lists along each edge.
pub fn triangle_count(g: &Graph) -> u64 {
    let mut count = 0u64;
    for &(a, b) in g.edges() {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        let (nu, nv) = (g.neighbors(u), g.neighbors(v));
        let (mut i, mut j) = (0, 0);
        while i < nu.len() && j < nv.len() {
            match nu[i].cmp(&nv[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    // Count each triangle once, at its two smallest nodes.
                    if nu[i] > v {
                        count += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    count
}

pub fn component_count(g: &Graph) -> usize {
    let mut uf = UnionFind::new(g.n());
    for &(u, v) in g.edges() {
        uf.union(u, v);
    }
    uf.sets()
}

/// Union-find connectivity. The empty graph counts as connected.
pub fn is_connected(g: &Graph) -> bool {
    component_count(g) <= 1
}

/// Per-color node counts for colors `0..num_colors`.
pub fn color_counts(g: &Graph, num_colors: usize) -> Result<Vec<usize>> {
    let colors = g.colors().ok_or(Error::MissingColors)?;
    let mut counts = vec![0; num_colors];
    for &c in colors {
        if c >= num_colors {
            return Err(Error::InvalidParameter(format!(
                "color {c} outside 0..{num_colors}"
            )));
        }
        counts[c] += 1;
    }
    Ok(counts)
}

/// BFS distances from `src`, [`UNREACHABLE`] where there is no path.
pub fn bfs_distances(g: &Graph, src: usize) -> Vec<i64> {
    let mut dist = vec![UNREACHABLE; g.n()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if dist[w] == UNREACHABLE {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn all_pairs_shortest_paths(g: &Graph) -> Vec<Vec<i64>> {
    (0..g.n()).map(|s| bfs_distances(g, s)).collect()
}
