use crate::error::Result;
use crate::graph::Graph;

/// Node locality of `g`'s edges listed in `edge_order`: the largest gap
/// between the first and last position of an edge touching the same node.
pub fn node_locality(g: &Graph, edge_order: &[usize]) -> Result<usize> {
    let seq = g.ordered_edges(edge_order)?;
    Ok(sequence_locality(&seq))
}

/// Node locality of an explicit edge sequence.
pub fn sequence_locality(edges: &[(usize, usize)]) -> usize {
    let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let mut first = vec![usize::MAX; n];
    let mut span = 0;
    for (pos, &(u, v)) in edges.iter().enumerate() {
        for w in [u, v] {
            if first[w] == usize::MAX {
                first[w] = pos;
            }
            span = span.max(pos - first[w]);
        }
    }
    span
}
