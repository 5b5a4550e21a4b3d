//! Two-phase connectivity on k-local factored graphs: the streaming automaton
//! decides, block by block, whether each super-edge gadget joins its two
//! super-nodes, and the recovered kernel graph is then checked as a whole.

use super::{LabelEvent, StreamMode, StreamState};
use crate::error::{Error, Result};
use crate::graph::{FactoredGraph, Graph, UnionFind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Anchor {
    Unseen,
    Live(usize),
    Closed,
}

/// Whether `t1` and `t2` end up in the same component of the edge stream,
/// decided with the windowed automaton by following the labels of the two
/// terminals.
pub fn terminals_joined(edges: &[(usize, usize)], k: usize, t1: usize, t2: usize) -> Result<bool> {
    let mut st = StreamState::new(k, StreamMode::Relaxed);
    let mut anchors = [Anchor::Unseen; 2];
    let mut joined = t1 == t2;
    for &(u, v) in edges {
        let (label, events) = st.push_observed((u, v))?;
        for ev in events {
            match ev {
                LabelEvent::Closed(l) => {
                    if anchors == [Anchor::Live(l); 2] {
                        joined = true;
                    }
                    for a in &mut anchors {
                        if *a == Anchor::Live(l) {
                            *a = Anchor::Closed;
                        }
                    }
                }
                LabelEvent::Merged { from, to } => {
                    for a in &mut anchors {
                        if *a == Anchor::Live(from) {
                            *a = Anchor::Live(to);
                        }
                    }
                }
            }
        }
        for (a, t) in anchors.iter_mut().zip([t1, t2]) {
            if *a == Anchor::Unseen && (u == t || v == t) {
                *a = Anchor::Live(label);
            }
        }
    }
    Ok(joined || matches!(anchors, [Anchor::Live(a), Anchor::Live(b)] if a == b))
}

/// Phase 1 runs [`terminals_joined`] on every `n_prime`-edge block with the
/// block's two super-nodes as terminals; phase 2 checks connectivity of the
/// kernel graph those answers describe.
pub fn hybrid_connectivity(f: &FactoredGraph, k: usize, n_prime: usize) -> Result<bool> {
    if n_prime == 0 || f.edge_order.len() != f.pairs.len() * n_prime {
        return Err(Error::MalformedBlocks(format!(
            "{} edges do not split into {} blocks of {n_prime}",
            f.edge_order.len(),
            f.pairs.len()
        )));
    }
    let seq = f.graph.ordered_edges(&f.edge_order)?;
    let mut kernel_edges = Vec::new();
    for (block, &(v1, v2)) in seq.chunks(n_prime).zip(&f.pairs) {
        if v1 >= f.kernel_nodes || v2 >= f.kernel_nodes {
            return Err(Error::MalformedBlocks(format!("pair ({v1}, {v2}) is not a super-node pair")));
        }
        if terminals_joined(block, k, v1, v2)? {
            kernel_edges.push((v1, v2));
        }
    }
    // Both orientations of a kernel edge get a block; keep one.
    kernel_edges.retain(|&(a, b)| a < b);
    let kernel = Graph::new(f.kernel_nodes, kernel_edges)?;
    let mut uf = UnionFind::new(kernel.n());
    for &(a, b) in kernel.edges() {
        uf.union(a, b);
    }
    Ok(uf.sets() <= 1)
}
