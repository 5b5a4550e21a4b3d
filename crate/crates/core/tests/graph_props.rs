mod common;

use common::{bfs_connected, random_graph};
use gsm_core::graph::{
    color_connectivity_instance, component_count, generate_cycles, generate_erdos_renyi,
    generate_factored, generate_regular, grid, is_connected, oracle, triangle_count, TaskKind,
    TaskLabel, RED,
};
use gsm_core::Graph;
use proptest::prelude::*;

fn brute_triangles(g: &Graph) -> u64 {
    let n = g.n();
    let mut c = 0;
    for a in 0..n {
        for b in a + 1..n {
            for d in b + 1..n {
                if g.has_edge(a, b) && g.has_edge(b, d) && g.has_edge(a, d) {
                    c += 1;
                }
            }
        }
    }
    c
}

#[test]
fn er_triangles_match_triple_enumeration() {
    let g = generate_erdos_renyi(10, 0.5, 7).unwrap();
    assert_eq!(
        oracle(&g, TaskKind::TriangleCount).unwrap(),
        TaskLabel::TriangleCount(brute_triangles(&g))
    );
}

#[test]
fn regular_four_two_is_c4() {
    for seed in 0..20 {
        let g = generate_regular(4, 2, seed).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(brute_triangles(&g), 0);
        assert!(bfs_connected(4, g.edges()));
    }
}

#[test]
fn factored_examples() {
    let k2 = Graph::new(2, vec![(0, 1)]).unwrap();
    let f = generate_factored(&k2, 8, 4, 3).unwrap();
    assert!(bfs_connected(f.graph.n(), f.graph.edges()));
    let iso = Graph::new(2, vec![]).unwrap();
    let f = generate_factored(&iso, 8, 4, 3).unwrap();
    assert!(!bfs_connected(f.graph.n(), f.graph.edges()));
}

#[test]
fn grid_color_components_are_one_or_two() {
    let g = color_connectivity_instance(&grid(16, 16), 1).unwrap();
    let colors = g.colors().unwrap();
    let red: Vec<usize> = (0..g.n()).filter(|&v| colors[v] == RED).collect();
    let idx = |v: usize| red.binary_search(&v).ok();
    let sub: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter_map(|&(u, v)| Some((idx(u)?, idx(v)?)))
        .collect();
    let sub = Graph::new(red.len(), sub).unwrap();
    assert!((1..=2).contains(&component_count(&sub)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn connectivity_matches_bfs(n in 1usize..=64, p in 0.0f64..0.2, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        prop_assert_eq!(is_connected(&g), bfs_connected(n, g.edges()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn json_roundtrip_keeps_edge_order(n in 1usize..=30, p in 0.0f64..1.0, seed in any::<u64>(), colored in any::<bool>()) {
        let mut g = random_graph(n, p, seed);
        if colored {
            g = g.with_colors((0..n).map(|v| v % 3).collect()).unwrap();
            g = g.with_features((0..n).map(|v| vec![v as f64 * 0.1, -1.5]).collect()).unwrap();
        }
        let back = Graph::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.fingerprint(), g.fingerprint());
    }

    #[test]
    fn cycles_have_expected_components(half in 3usize..=40, seed in any::<u64>()) {
        let n = 2 * half;
        prop_assert_eq!(component_count(&generate_cycles(n, true, seed).unwrap()), 2);
        prop_assert_eq!(component_count(&generate_cycles(n, false, seed).unwrap()), 1);
        prop_assert_eq!(component_count(&generate_cycles(n + 1, false, seed).unwrap()), 1);
    }

    #[test]
    fn red_quota(rows in 2usize..=8, cols in 2usize..=8, seed in any::<u64>()) {
        let g = grid(rows, cols);
        let c = color_connectivity_instance(&g, seed).unwrap();
        let red = c.colors().unwrap().iter().filter(|&&x| x == RED).count();
        prop_assert_eq!(red, g.n() / 2);
    }

    #[test]
    fn triangle_oracle_matches_brute_force(n in 1usize..=16, p in 0.0f64..1.0, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        prop_assert_eq!(triangle_count(&g), brute_triangles(&g));
    }
}
