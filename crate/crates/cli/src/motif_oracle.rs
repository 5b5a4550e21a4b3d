//! Brute-force induced motif counts, independent of the local encoder.

use gsm_core::Graph;
use itertools::Itertools;

/// Number of node subsets of `g` whose induced subgraph is isomorphic to `h`.
pub fn induced_count(g: &Graph, h: &Graph) -> u64 {
    let k = h.n();
    let h_adj: Vec<Vec<bool>> = (0..k).map(|a| (0..k).map(|b| h.has_edge(a, b)).collect()).collect();
    let mut count = 0;
    for subset in (0..g.n()).combinations(k) {
        let iso = (0..k).permutations(k).any(|p| {
            (0..k).all(|a| (a + 1..k).all(|b| g.has_edge(subset[p[a]], subset[p[b]]) == h_adj[a][b]))
        });
        count += u64::from(iso);
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use gsm_core::graph::{complete, path};

    #[test]
    fn small_cases() {
        let tri = complete(3);
        assert_eq!(induced_count(&complete(4), &tri), 4);
        assert_eq!(induced_count(&path(4), &path(3)), 2);
        assert_eq!(induced_count(&complete(4), &path(3)), 0);
    }
}
