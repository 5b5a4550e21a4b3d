//! Seeded synthetic graph generators.
//!
//! Ordering rules: Erdős–Rényi, regular, complete and factored graphs store
//! edges lexicographically by `(min, max)` endpoint; paths and grids store
//! them in construction order; cycle instances store them shuffled by seed.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{is_connected, Graph};
use crate::error::{Error, Result};
use crate::rng;

/// Color id assigned to red nodes by [`color_connectivity_instance`].
pub const RED: usize = 1;
/// Color id assigned to blue nodes by [`color_connectivity_instance`].
pub const BLUE: usize = 0;

fn normalized(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// G(n, p): every unordered pair is included independently with probability `p`.
pub fn generate_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} is not a probability")));
    }
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}

/// A simple `d`-regular graph from the pairing model, restarting whenever the
/// partial pairing cannot be completed. Gives up after `100 * n` attempts.
pub fn generate_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("n*d = {} is odd", n * d)));
    }
    if d >= n {
        return Err(Error::InvalidParameter(format!("degree {d} must be below n = {n}")));
    }
    let mut rng = rng(seed);
    let budget = 100 * n.max(1);
    for _ in 0..budget {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            return Graph::new(n, edges);
        }
    }
    Err(Error::BudgetExhausted { budget })
}

fn try_pairing(n: usize, d: usize, rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    points.shuffle(rng);
    let mut adjacent = vec![vec![false; n]; n];
    let mut edges = Vec::with_capacity(n * d / 2);
    while let Some(u) = points.pop() {
        let candidates: Vec<usize> = (0..points.len())
            .filter(|&j| points[j] != u && !adjacent[u][points[j]])
            .collect();
        let &j = candidates.choose(rng)?;
        let v = points.swap_remove(j);
        adjacent[u][v] = true;
        adjacent[v][u] = true;
        edges.push(normalized(u, v));
    }
    edges.sort_unstable();
    Some(edges)
}

/// One `n`-cycle, or two disjoint `n/2`-cycles when `split` is set. Nodes
/// `0..n` (resp. `0..n/2` and `n/2..n`) are visited in id order; the edge
/// order is shuffled by `seed`.
pub fn generate_cycles(n: usize, split: bool, seed: u64) -> Result<Graph> {
    let ring = |start: usize, len: usize| {
        (0..len).map(move |i| normalized(start + i, start + (i + 1) % len))
    };
    let mut edges: Vec<(usize, usize)> = if split {
        if !n.is_multiple_of(2) || n / 2 < 3 {
            return Err(Error::InvalidParameter(format!(
                "split cycles need an even n >= 6, got {n}"
            )));
        }
        ring(0, n / 2).chain(ring(n / 2, n / 2)).collect()
    } else {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("a cycle needs n >= 3, got {n}")));
        }
        ring(0, n).collect()
    };
    edges.shuffle(&mut rng(seed));
    Graph::new(n, edges)
}

pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i)).collect()).expect("valid path")
}

/// Star `K_{1,leaves}` with center 0.
pub fn star(leaves: usize) -> Graph {
    Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i)).collect()).expect("valid star")
}

pub fn complete(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    Graph::new(n, edges).expect("valid complete graph")
}

/// `rows x cols` grid, node `r * cols + c`, edges in row-major order (right
/// neighbor before lower neighbor).
pub fn grid(rows: usize, cols: usize) -> Graph {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::new(rows * cols, edges).expect("valid grid")
}

/// Colors `floor(n/2)` nodes [`RED`] by two alternating random walks from two
/// distinct random start nodes, and the rest [`BLUE`]. Walks continue until
/// the red quota is met.
pub fn color_connectivity_instance(g: &Graph, seed: u64) -> Result<Graph> {
    let n = g.n();
    if n < 4 {
        return Err(Error::InvalidParameter(format!("need n >= 4, got {n}")));
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let mut rng = rng(seed);
    let quota = n / 2;
    let first = rng.gen_range(0..n);
    let second = loop {
        let s = rng.gen_range(0..n);
        if s != first {
            break s;
        }
    };
    let mut colors = vec![BLUE; n];
    colors[first] = RED;
    colors[second] = RED;
    let mut red = 2;
    let mut walkers = [first, second];
    let mut turn = 0;
    while red < quota {
        let at = walkers[turn];
        let next = *g.neighbors(at).choose(&mut rng).expect("connected graph, n >= 4");
        walkers[turn] = next;
        if colors[next] != RED {
            colors[next] = RED;
            red += 1;
        }
        turn ^= 1;
    }
    g.clone().with_colors(colors)
}

/// A k-local factored graph together with the blockwise edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredGraph {
    pub graph: Graph,
    /// Block-concatenated order: position `p` holds an index into `graph.edges()`.
    pub edge_order: Vec<usize>,
    /// Super-nodes are graph nodes `0..kernel_nodes`.
    pub kernel_nodes: usize,
    /// Super-node pair of each block, in block order.
    pub pairs: Vec<(usize, usize)>,
    pub n_prime: usize,
    pub k: usize,
}

/// Builds one `n_prime`-edge super-edge gadget per ordered pair of distinct
/// super-nodes.
///
/// A gadget is a path `v1 - p1 - ... - pa` and a path `qb - ... - q1 - v2`,
/// joined by the edge `pa - qb` when the pair is a kernel edge and otherwise
/// separated by a pendant filler edge `pa - f`. Emitted in path order every
/// node spans at most two consecutive positions; the order is then shuffled
/// within chunks of `(k + 1) / 2` edges, which keeps each block's node
/// locality at most `k`.
pub fn generate_factored(kernel: &Graph, n_prime: usize, k: usize, seed: u64) -> Result<FactoredGraph> {
    if n_prime < 3 {
        return Err(Error::InvalidParameter(format!(
            "n_prime = {n_prime} is too small for a super-edge gadget (need >= 3)"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("locality k must be at least 1".into()));
    }
    let kn = kernel.n();
    if kn == 0 {
        return Err(Error::InvalidParameter("kernel graph has no nodes".into()));
    }
    let mut rng = rng(seed);
    let mut pairs: Vec<(usize, usize)> = (0..kn)
        .flat_map(|a| (0..kn).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    pairs.shuffle(&mut rng);

    let chunk = k.div_ceil(2).max(1);
    let mut next_node = kn;
    let mut fresh = || {
        next_node += 1;
        next_node - 1
    };
    let mut sequence: Vec<(usize, usize)> = Vec::with_capacity(pairs.len() * n_prime);
    for &(v1, v2) in &pairs {
        let left = rng.gen_range(1..=n_prime - 2);
        let right = n_prime - 1 - left;
        let mut block = Vec::with_capacity(n_prime);
        let mut prev = v1;
        for _ in 0..left {
            let p = fresh();
            block.push((prev, p));
            prev = p;
        }
        let left_end = prev;
        let right_nodes: Vec<usize> = (0..right).map(|_| fresh()).collect();
        let right_end = *right_nodes.last().expect("right >= 1");
        if kernel.has_edge(v1, v2) {
            block.push((left_end, right_end));
        } else {
            block.push((left_end, fresh()));
        }
        // right path, walked from its far end back to v2
        for w in right_nodes.windows(2).rev() {
            block.push((w[1], w[0]));
        }
        block.push((right_nodes[0], v2));
        for c in block.chunks_mut(chunk) {
            c.shuffle(&mut rng);
        }
        sequence.extend(block);
    }

    let total_nodes = next_node;
    let mut sorted: Vec<(usize, usize)> = sequence.iter().map(|&(u, v)| normalized(u, v)).collect();
    sorted.sort_unstable();
    let edge_order = sequence
        .iter()
        .map(|&(u, v)| sorted.binary_search(&normalized(u, v)).expect("edge present"))
        .collect();
    Ok(FactoredGraph {
        graph: Graph::new(total_nodes, sorted)?,
        edge_order,
        kernel_nodes: kn,
        pairs,
        n_prime,
        k,
    })
}
