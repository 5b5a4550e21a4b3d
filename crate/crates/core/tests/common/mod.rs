#![allow(dead_code)]

use std::collections::VecDeque;

use gsm_core::graph::generate_erdos_renyi;
use gsm_core::Graph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_perm(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut rng(seed));
    p
}

/// ER graph whose stored edge order is shuffled.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let g = generate_erdos_renyi(n, p, seed).unwrap();
    let order = random_perm(g.edge_count(), seed ^ 0x5eed);
    Graph::new(n, g.ordered_edges(&order).unwrap()).unwrap()
}

/// Reachability from node 0 by BFS over an adjacency matrix; independent of
/// the library's union-find.
pub fn bfs_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut q = VecDeque::from([0]);
    while let Some(u) = q.pop_front() {
        for w in 0..n {
            if adj[u][w] && !seen[w] {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Connectivity of the nodes the edges touch, ignoring all others.
pub fn touched_connected(edges: &[(usize, usize)]) -> bool {
    let mut nodes: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let idx = |x: usize| nodes.binary_search(&x).unwrap();
    let relabeled: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (idx(u), idx(v))).collect();
    bfs_connected(nodes.len(), &relabeled)
}

/// BFS distance matrix over an adjacency matrix, -1 when unreachable.
pub fn distances(g: &Graph) -> Vec<Vec<i64>> {
    let n = g.n();
    (0..n)
        .map(|s| {
            let mut d = vec![-1i64; n];
            d[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for w in 0..n {
                    if g.has_edge(u, w) && d[w] < 0 {
                        d[w] = d[u] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}

/// Connected ER graph: retries seeds until connected.
pub fn connected_graph(n: usize, p: f64, seed: u64) -> Graph {
    (0..)
        .map(|k| random_graph(n, p, seed.wrapping_mul(1000).wrapping_add(k)))
        .find(|g| bfs_connected(g.n(), g.edges()))
        .unwrap()
}
