use std::collections::VecDeque;

use super::HacTree;
use crate::error::{Error, Result};
use crate::graph::{Graph, UNREACHABLE};

/// Quotient graph of a level: clusters adjacent iff an edge of `g` crosses
/// them.
fn cluster_adjacency(g: &Graph, k: usize, of: &[usize]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); k];
    for &(u, v) in g.edges() {
        let (a, b) = (of[u], of[v]);
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn bfs(adj: &[Vec<usize>], src: usize) -> Vec<i64> {
    let mut dist = vec![UNREACHABLE; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(c) = queue.pop_front() {
        for &d in &adj[c] {
            if dist[d] == UNREACHABLE {
                dist[d] = dist[c] + 1;
                queue.push_back(d);
            }
        }
    }
    dist
}

fn check_tree(tree: &HacTree, g: &Graph) -> Result<()> {
    if tree.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: tree.n(),
        });
    }
    Ok(())
}

/// Relative positional encoding of `u` and `v`: one distance per tree level
/// from the root down to the leaves, measured in that level's cluster graph.
/// The last entry is the plain shortest-path distance.
pub fn hierarchical_pe(tree: &HacTree, g: &Graph, u: usize, v: usize) -> Result<Vec<i64>> {
    check_tree(tree, g)?;
    for x in [u, v] {
        if x >= g.n() {
            return Err(Error::InvalidParameter(format!("node {x} outside 0..{}", g.n())));
        }
    }
    Ok((0..=tree.depth)
        .rev()
        .map(|l| {
            let (k, of) = tree.level_assignment(l);
            bfs(&cluster_adjacency(g, k, &of), of[u])[of[v]]
        })
        .collect())
}

/// All-pairs encodings: `table[u][v]` equals `hierarchical_pe(tree, g, u, v)`.
pub fn hierarchical_pe_table(tree: &HacTree, g: &Graph) -> Result<Vec<Vec<Vec<i64>>>> {
    check_tree(tree, g)?;
    let n = g.n();
    let mut table = vec![vec![Vec::with_capacity(tree.depth + 1); n]; n];
    for l in (0..=tree.depth).rev() {
        let (k, of) = tree.level_assignment(l);
        let adj = cluster_adjacency(g, k, &of);
        let dist: Vec<Vec<i64>> = (0..k).map(|c| bfs(&adj, c)).collect();
        for (u, row) in table.iter_mut().enumerate() {
            for (v, cell) in row.iter_mut().enumerate() {
                cell.push(dist[of[u]][of[v]]);
            }
        }
    }
    Ok(table)
}
