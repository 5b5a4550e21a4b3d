mod common;

use common::{random_graph, random_perm};
use gsm_core::graph::{generate_factored, generate_erdos_renyi};
use gsm_core::tokenize::{
    edge_tokenize, khop_tokenize, mot_route, node_locality, node_tokenize, random_walk_tokenize,
    RouterWeights, Token,
};
use gsm_core::Graph;
use proptest::prelude::*;

/// Span of positions per node, computed by a double loop over nodes and
/// positions.
fn brute_locality(g: &Graph, order: &[usize]) -> usize {
    let mut best = 0;
    for v in 0..g.n() {
        let pos: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|&(_, &e)| {
                let (a, b) = g.edge(e);
                a == v || b == v
            })
            .map(|(p, _)| p)
            .collect();
        if let (Some(lo), Some(hi)) = (pos.first(), pos.last()) {
            best = best.max(hi - lo);
        }
    }
    best
}

#[test]
fn factored_edge_tokens_are_blockwise() {
    let kernel = generate_erdos_renyi(5, 0.5, 2).unwrap();
    let f = generate_factored(&kernel, 9, 4, 6).unwrap();
    let tok = edge_tokenize(&f.graph, Some(&f.edge_order)).unwrap();
    let seq = &tok.sequences[0];
    assert_eq!(seq.len(), f.pairs.len() * 9);
    for (block, &(v1, v2)) in seq.chunks(9).zip(&f.pairs) {
        let edges: Vec<(usize, usize)> = block
            .iter()
            .map(|t| match t {
                Token::Edge { edge } => f.graph.edge(*edge),
                _ => unreachable!(),
            })
            .collect();
        assert!(edges.iter().any(|&(a, b)| a == v1 || b == v1));
        assert!(edges.iter().any(|&(a, b)| a == v2 || b == v2));
        let span = {
            let sub = Graph::new(f.graph.n(), edges.clone()).unwrap();
            brute_locality(&sub, &(0..edges.len()).collect::<Vec<_>>())
        };
        assert!(span <= 4, "block locality {span}");
    }
}

#[test]
fn mot_matches_argsort_oracle() {
    let mut r = common::rng(41);
    use rand::Rng;
    for _ in 0..50 {
        let d = 3;
        let w: Vec<Vec<f64>> = (0..d).map(|_| (0..4).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
        let x: Vec<Vec<f64>> = (0..10).map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let names: Vec<String> = (0..4).map(|i| format!("c{i}")).collect();
        let out = mot_route(&x, &RouterWeights::new(w.clone()).unwrap(), &names).unwrap();
        for (xi, choice) in x.iter().zip(&out) {
            let logits: Vec<f64> = (0..4).map(|j| (0..d).map(|k| xi[k] * w[k][j]).sum()).collect();
            // sigmoid is monotone, so ranking logits ranks scores
            let mut idx: Vec<usize> = (0..4).collect();
            idx.sort_by(|&a, &b| logits[b].partial_cmp(&logits[a]).unwrap());
            assert_eq!(choice.top2, (idx[0], idx[1]));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn locality_matches_double_loop_and_ignores_labels(n in 2usize..=40, p in 0.02f64..0.5, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let order = random_perm(g.edge_count(), seed.wrapping_add(1));
        let loc = node_locality(&g, &order).unwrap();
        prop_assert_eq!(loc, brute_locality(&g, &order));
        let relabeled = g.relabeled(&random_perm(n, seed.wrapping_add(2))).unwrap();
        prop_assert_eq!(node_locality(&relabeled, &order).unwrap(), loc);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn node_tokens_equal_zero_hop_tokens(n in 1usize..=30, p in 0.0f64..0.5, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let node = node_tokenize(&g);
        let hop0 = khop_tokenize(&g, 0);
        let as_nodes: Vec<Vec<Token>> = hop0
            .sequences
            .iter()
            .map(|s| s.iter().map(|t| match t {
                Token::Subgraph { subgraph, .. } => Token::node(subgraph[0]),
                other => other.clone(),
            }).collect())
            .collect();
        prop_assert_eq!(
            serde_json::to_vec(&as_nodes).unwrap(),
            serde_json::to_vec(&node.sequences).unwrap()
        );
    }

    #[test]
    fn khop_rings_are_exact(n in 1usize..=25, p in 0.0f64..0.4, seed in any::<u64>(), k in 0usize..4) {
        let g = random_graph(n, p, seed);
        let d = common::distances(&g);
        let t = khop_tokenize(&g, k);
        for (v, seq) in t.sequences.iter().enumerate() {
            prop_assert_eq!(seq.len(), k + 1);
            for (hop, tok) in seq.iter().enumerate() {
                let ring: Vec<usize> = (0..n).filter(|&u| d[v][u] == hop as i64).collect();
                if ring.is_empty() {
                    prop_assert!(tok.is_empty_marker());
                } else {
                    prop_assert_eq!(tok, &Token::subgraph(ring));
                }
            }
        }
    }

    #[test]
    fn walks_follow_edges(n in 1usize..=30, p in 0.0f64..0.4, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let t = random_walk_tokenize(&g, 6, 2, seed).unwrap();
        prop_assert_eq!(t.sequences.len(), 2 * n);
        for walk in &t.sequences {
            let nodes: Vec<usize> = walk.iter().map(|t| match t { Token::Node { node } => *node, _ => unreachable!() }).collect();
            for w in nodes.windows(2) {
                prop_assert!(g.has_edge(w[0], w[1]) || (w[0] == w[1] && g.degree(w[0]) == 0));
            }
        }
        prop_assert_eq!(&t, &random_walk_tokenize(&g, 6, 2, seed).unwrap());
        prop_assert!(t.validate(&g).is_ok());
        prop_assert_eq!(gsm_core::tokenize::Tokenization::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn mot_candidate_permutation_is_consistent(seed in any::<u64>()) {
        use rand::Rng;
        let mut r = common::rng(seed);
        let w: Vec<Vec<f64>> = (0..2).map(|_| (0..5).map(|_| r.gen_range(-3.0..3.0)).collect()).collect();
        let x: Vec<Vec<f64>> = (0..6).map(|_| (0..2).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let names: Vec<String> = (0..5).map(|i| format!("c{i}")).collect();
        let perm = random_perm(5, seed ^ 7);
        // column j of the permuted matrix is original column perm[j]
        let wp: Vec<Vec<f64>> = w.iter().map(|row| perm.iter().map(|&j| row[j]).collect()).collect();
        let np: Vec<String> = perm.iter().map(|&j| names[j].clone()).collect();
        let a = mot_route(&x, &RouterWeights::new(w).unwrap(), &names).unwrap();
        let b = mot_route(&x, &RouterWeights::new(wp).unwrap(), &np).unwrap();
        for (ca, cb) in a.iter().zip(&b) {
            prop_assert_eq!(ca.top2, (perm[cb.top2.0], perm[cb.top2.1]));
        }
    }
}
