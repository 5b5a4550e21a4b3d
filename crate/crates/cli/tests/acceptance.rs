//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use gsm_core::graph::{generate_erdos_renyi, generate_factored, grid, path, TaskLabel};
use gsm_core::hac::{build_hac, build_hac_from_features, hac_on_mst_equivalence, hierarchical_pe_table, HacTree, Metric};
use gsm_core::local::{read_sequences, subgraph_count_encoding, write_sequences, EncoderParams, Pattern};
use gsm_core::seq::{
    color_count_construction, count_via_attention_sum, final_output, find_undercount_witness,
    finite_difference_jacobian, random_hippo_stack, relative_error, scalar_hippo_stack, sensitivity_profile,
    ssm_jacobian, stack_forward, undercount_layer, AttentionLayer, Layer, LinearSsmLayer, ModelSpec, FD_STEP,
};
use gsm_core::stream::{edge_order_from_node_order, hybrid_connectivity, stream_connectivity, StreamMode};
use gsm_core::tokenize::{node_locality, sequence_locality, Tokenization};
use gsm_core::Graph;
use itertools::Itertools;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    adj
}

fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<i64> {
    let mut d = vec![-1; adj.len()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for &w in &adj[u] {
            if d[w] < 0 {
                d[w] = d[u] + 1;
                q.push_back(w);
            }
        }
    }
    d
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    n <= 1 || bfs(&adjacency(n, edges), 0).iter().all(|&d| d >= 0)
}

fn random_graph(seed: u64, n: usize, p: f64) -> Graph {
    generate_erdos_renyi(n, p, seed).unwrap()
}

// 1
fn color_counting() -> Verdict {
    let start = Instant::now();
    for s in 0..1000 {
        let mut r = rng(s);
        let (n, c) = (r.gen_range(1..=256), r.gen_range(1..=8));
        let colors: Vec<usize> = (0..n).map(|_| r.gen_range(0..c)).collect();
        let out = final_output(&color_count_construction(c).unwrap(), &colors, c).unwrap();
        for (col, &o) in out.iter().enumerate() {
            let want = colors.iter().filter(|&&x| x == col).count();
            ensure(o == want as f64, format!("seed {s}: color {col} gave {o}, want {want}"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 5.0, format!("took {secs:.2} s"))?;
    Ok(format!("1000 sequences exact in {secs:.3} s"))
}

// 2
fn necessity_witness() -> Verdict {
    let mut found = Vec::new();
    for c in 1..=3 {
        let w = find_undercount_witness(c, 6, 1e-12).unwrap().ok_or(format!("no witness for C={c}"))?;
        let count = |xs: &[usize]| (0..c).map(|k| xs.iter().filter(|&&x| x == k).count()).collect::<Vec<_>>();
        ensure(count(&w.first) != count(&w.second), format!("C={c}: equal counts"))?;
        let layer = undercount_layer(c).unwrap();
        let (a, b) = (final_output(&layer, &w.first, c).unwrap(), final_output(&layer, &w.second, c).unwrap());
        ensure(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12), format!("C={c}: outputs differ"))?;
        found.push(format!("C={c}: {:?} vs {:?}", w.first, w.second));
    }
    Ok(found.join("; "))
}

const NS: [usize; 3] = [8, 16, 32];

// 3
fn sensitivity_bounds() -> Verdict {
    let start = Instant::now();
    let mut bands = Vec::new();
    for layers in 1..=2 {
        let mut ratios = Vec::new();
        for n in NS {
            let rows = sensitivity_profile(&scalar_hippo_stack(layers), n).unwrap();
            let inner: Vec<_> = rows.iter().filter(|r| r.i < n).collect();
            for (i, r) in inner.iter().enumerate() {
                let s = (r.i - 1) as f64 / (r.i * (n - 1)) as f64;
                ensure((r.surrogate - s).abs() < 1e-15, format!("surrogate at n={n} i={}", r.i))?;
                if layers == 1 && i > 0 {
                    ensure(r.norm >= inner[i - 1].norm - 1e-9, format!("n={n}: norm drops at i={}", r.i))?;
                }
                ratios.push(r.norm / s);
            }
        }
        let hi = ratios.iter().copied().fold(f64::MIN, f64::max);
        let lo = ratios.iter().copied().fold(f64::MAX, f64::min);
        ensure(hi / lo < 100.0, format!("L={layers}: band {:.2}", hi / lo))?;
        bands.push(format!("L={layers} band {:.2}", hi / lo));
    }
    let mut worst: f64 = 0.0;
    for n in NS {
        let stacks = [scalar_hippo_stack(1), random_hippo_stack(1, 4, 2, n as u64)];
        for stack in &stacks {
            let d = stack[0].d_in();
            let mut r = rng(n as u64);
            let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
            for i in 1..=n {
                let a = ssm_jacobian(stack, n, i).unwrap();
                let f = finite_difference_jacobian(|x| stack_forward(stack, x), &xs, n, i, FD_STEP).unwrap();
                worst = worst.max(relative_error(&a, &f));
            }
        }
    }
    ensure(worst < 1e-4, format!("finite-difference error {worst:e}"))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, format!("took {secs:.2} s"))?;
    Ok(format!("{}, fd error {worst:.1e}, {secs:.3} s", bands.join(", ")))
}

// 4
fn depth_decay() -> Verdict {
    let norm = |l: usize, n: usize| ssm_jacobian(&scalar_hippo_stack(l), n, n / 2).unwrap().norm();
    let mut fitted = Vec::new();
    for l in 1..=3 {
        let c = NS.iter().map(|&n| norm(l, n) * (n as f64).powi(l as i32)).fold(0.0, f64::max);
        fitted.push(c);
    }
    for n in NS {
        let v: Vec<f64> = (1..=3).map(|l| norm(l, n)).collect();
        ensure(v[0] > v[1] && v[1] > v[2], format!("n={n}: {v:?} not strictly decreasing"))?;
        for (l, &c) in fitted.iter().enumerate() {
            let bound = c * (1.0 / n as f64).powi(l as i32 + 1);
            ensure(v[l] <= bound * (1.0 + 1e-12), format!("n={n} L={}: {} above {bound}", l + 1, v[l]))?;
        }
    }
    Ok(format!("strictly decreasing in L at i=n/2; fitted C = {fitted:.3?}"))
}

// 5
fn streaming_connectivity() -> Verdict {
    let all: Vec<(usize, usize)> = (0..5).tuple_combinations().collect();
    let mut orders = 0;
    for m in 1..=7 {
        for subset in all.iter().copied().combinations(m) {
            let truth = connected(5, &subset);
            for seq in subset.iter().copied().permutations(m) {
                let k = sequence_locality(&seq);
                let out = stream_connectivity(&seq, k, StreamMode::Strict { nodes: 5 }).unwrap();
                ensure(out.connected == truth, format!("{seq:?} at k={k}"))?;
                ensure(out.max_window <= k + 1, format!("{seq:?}: window {}", out.max_window))?;
                orders += 1;
            }
        }
    }
    for s in 0..1000u64 {
        let mut r = rng(s);
        let n = r.gen_range(1..=200);
        let p = (r.gen_range(0.5..4.0) / n as f64).min(1.0);
        let f = (0..n).map(|_| vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)]).collect();
        let g = random_graph(s, n, p).with_features(f).unwrap();
        let tree = build_hac_from_features(&g, Metric::Euclidean).unwrap();
        let order = edge_order_from_node_order(&g, &tree.leaf_order).unwrap();
        let k = node_locality(&g, &order).unwrap();
        let out = stream_connectivity(&g.ordered_edges(&order).unwrap(), k, StreamMode::Strict { nodes: n }).unwrap();
        ensure(out.connected == connected(n, g.edges()), format!("random instance {s}"))?;
        ensure(out.max_window <= k + 1, format!("random instance {s}: window {}", out.max_window))?;
    }
    Ok(format!("{orders} exhaustive orderings and 1000 HAC-ordered graphs, no mismatch"))
}

// 6
fn hybrid() -> Verdict {
    let mut joined = 0;
    for s in 0..100u64 {
        let mut r = rng(s);
        let kernel = random_graph(s, r.gen_range(1..=8), r.gen_range(0.1..0.7));
        let k = r.gen_range(1..=6);
        let n_prime = r.gen_range(3..=32);
        let f = generate_factored(&kernel, n_prime, k, s).unwrap();
        let truth = connected(f.graph.n(), f.graph.edges());
        ensure(hybrid_connectivity(&f, k, n_prime).unwrap() == truth, format!("instance {s}"))?;
        joined += usize::from(truth);
    }
    Ok(format!("100 factored instances ({joined} connected), no mismatch"))
}

fn brute_motifs(g: &Graph, h: &Graph) -> u64 {
    let k = h.n();
    (0..g.n())
        .combinations(k)
        .filter(|sub| {
            (0..k).permutations(k).any(|p| {
                (0..k).all(|a| (0..k).all(|b| a == b || g.has_edge(sub[p[a]], sub[p[b]]) == h.has_edge(a, b)))
            })
        })
        .count() as u64
}

// 7
fn motif_counts() -> Verdict {
    let mut total = [0u64; 3];
    for s in 0..200u64 {
        let mut r = rng(s);
        let g = random_graph(s, r.gen_range(1..=20), r.gen_range(0.1..0.7));
        for (j, pat) in [Pattern::Triangle, Pattern::Path3, Pattern::Cycle4].into_iter().enumerate() {
            let h = pat.graph();
            let scores = subgraph_count_encoding(&g, &h, pat.radius()).unwrap();
            let got = count_via_attention_sum(&scores).unwrap().round() as u64;
            let want = brute_motifs(&g, &h);
            ensure(got == want, format!("graph {s} {pat:?}: {got} vs {want}"))?;
            total[j] += want;
        }
    }
    Ok(format!("200 graphs; totals triangle {} path3 {} cycle4 {}", total[0], total[1], total[2]))
}

// 8
fn hac_properties() -> Verdict {
    for s in 0..500u64 {
        let mut r = rng(s);
        let n = r.gen_range(1..=100);
        let g = random_graph(s, n, r.gen_range(0.02..0.5));
        let cost: Vec<f64> = (0..g.edge_count()).map(|_| r.gen_range(0.0..1.0)).collect();
        let t = build_hac(&g, &cost).unwrap();
        let bound = (n as f64).log2().ceil() as usize;
        ensure(t.depth <= bound, format!("graph {s}: depth {} > {bound}", t.depth))?;
    }
    for s in 0..100u64 {
        let mut r = rng(s ^ 0xabc);
        let g = random_graph(s, r.gen_range(2..=40), r.gen_range(0.1..0.6));
        let mut cost: Vec<f64> = (1..=g.edge_count()).map(|i| i as f64 * 0.5).collect();
        cost.shuffle(&mut r);
        ensure(hac_on_mst_equivalence(&g, &cost).unwrap(), format!("mst equivalence on graph {s}"))?;
    }
    let mut pairs = 0;
    let mut s = 0u64;
    let mut graphs = 0;
    while graphs < 50 {
        s += 1;
        let mut r = rng(s ^ 0xdef);
        let n = r.gen_range(2..=32);
        let g = random_graph(s, n, r.gen_range(0.15..0.5));
        if !connected(n, g.edges()) {
            continue;
        }
        graphs += 1;
        let cost: Vec<f64> = (0..g.edge_count()).map(|_| r.gen_range(0.0..1.0)).collect();
        let t = build_hac(&g, &cost).unwrap();
        let table = hierarchical_pe_table(&t, &g).unwrap();
        let adj = adjacency(n, g.edges());
        for u in 0..n {
            let d = bfs(&adj, u);
            for v in 0..n {
                ensure(*table[u][v].last().unwrap() == d[v], format!("graph {s}: pair ({u}, {v})"))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("depth bound on 500 graphs, MST equivalence on 100, PE on {pairs} pairs"))
}

// 9
fn locality_family() -> Verdict {
    let mut wins = 0;
    for s in 0..100u64 {
        let mut r = rng(s);
        let (g, coords): (Graph, Vec<Vec<f64>>) = if s % 2 == 0 {
            let n = r.gen_range(4..=64);
            (path(n), (0..n).map(|v| vec![v as f64]).collect())
        } else {
            let (rows, cols) = (r.gen_range(3..=10), r.gen_range(3..=10));
            (grid(rows, cols), (0..rows * cols).map(|v| vec![(v / cols) as f64, (v % cols) as f64]).collect())
        };
        let f = coords.into_iter().map(|c| c.into_iter().map(|x| x + r.gen_range(-0.2..0.2)).collect()).collect();
        let g = g.with_features(f).unwrap();
        let tree = build_hac_from_features(&g, Metric::Euclidean).unwrap();
        let hac = node_locality(&g, &edge_order_from_node_order(&g, &tree.leaf_order).unwrap()).unwrap();
        let mut order: Vec<usize> = (0..g.n()).collect();
        order.shuffle(&mut r);
        let random = node_locality(&g, &edge_order_from_node_order(&g, &order).unwrap()).unwrap();
        wins += usize::from(hac <= random);
    }
    ensure(wins >= 95, format!("only {wins} of 100"))?;
    Ok(format!("{wins} of 100 paired trials"))
}

fn mat(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.gen_range(-1.0..1.0))
}

fn seq(r: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect()).collect()
}

// 10
fn attention_properties() -> Verdict {
    for s in 0..100u64 {
        let mut r = rng(s);
        let (n, d, dk) = (r.gen_range(1..=20), r.gen_range(1..=6), r.gen_range(1..=4));
        let layer = AttentionLayer::new(mat(&mut r, dk, d), mat(&mut r, dk, d), mat(&mut r, d, d), false).unwrap();
        let xs = seq(&mut r, n, d);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let y = layer.forward(&xs).unwrap();
        let yp = layer.forward(&perm.iter().map(|&p| xs[p].clone()).collect::<Vec<_>>()).unwrap();
        ensure(perm.iter().enumerate().all(|(i, &p)| yp[i] == y[p]), format!("equivariance triple {s}"))?;
    }
    for s in 0..100u64 {
        let mut r = rng(s ^ 0x77);
        let (n, d) = (r.gen_range(2..=20), 3);
        let t = r.gen_range(0..n - 1);
        let xs = seq(&mut r, n, d);
        let mut edited = xs.clone();
        for x in edited.iter_mut().skip(t + 1) {
            *x = (0..d).map(|_| r.gen_range(-9.0..9.0)).collect();
        }
        let layers = [
            Layer::Attention(AttentionLayer::new(mat(&mut r, 2, d), mat(&mut r, 2, d), mat(&mut r, d, d), true).unwrap()),
            Layer::Ssm(LinearSsmLayer::lti(mat(&mut r, 3, 3) * 0.5, mat(&mut r, 3, d), mat(&mut r, d, 3)).unwrap()),
            Layer::Ssm(LinearSsmLayer::hippo(mat(&mut r, 4, d), mat(&mut r, d, 4)).unwrap()),
        ];
        for l in &layers {
            let (a, b) = (l.forward(&xs).unwrap(), l.forward(&edited).unwrap());
            ensure(a[..=t] == b[..=t], format!("causality case {s}"))?;
        }
    }
    Ok("100 exact equivariance triples, 300 exact causality checks".into())
}

fn gsm(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gsm"))
        .args(["--seed", "11", "--out-dir"])
        .arg(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), format!("gsm {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
}

fn pipeline(dir: &Path) -> Result<(), String> {
    let sub = |name: &str| {
        let p = dir.join(name);
        fs::create_dir_all(&p).unwrap();
        p
    };
    let g = sub("graph");
    gsm(&g, &["generate", "--kind", "er", "--n", "14", "--p", "0.3", "--colors", "3", "--features", "2"])?;
    for method in ["node", "edge", "khop", "random-walk", "hac-dfs"] {
        let d = sub(method);
        fs::copy(g.join("graph.json"), d.join("graph.json")).unwrap();
        gsm(&d, &["tokenize", "--method", method])?;
        gsm(&d, &["encode"])?;
    }
    let d = sub("hac-bfs");
    fs::copy(g.join("graph.json"), d.join("graph.json")).unwrap();
    gsm(&d, &["tokenize", "--method", "hac-bfs", "--pe"])?;
    gsm(&d, &["encode"])?;
    gsm(&d, &["tokenize", "--method", "mot"])?;
    gsm(&d, &["encode", "--mot"])?;
    gsm(&sub("factored"), &["generate", "--kind", "factored", "--n", "5", "--p", "0.4"])?;
    gsm(&sub("color-grid"), &["generate", "--kind", "color-grid", "--rows", "6", "--cols", "6", "--coords"])?;
    for task in ["color-count", "motif-count", "connectivity", "embed"] {
        gsm(&sub(task), &["run", "--task", task, "--instances", "25", "--n", "30", "--p", "0.1"])?;
    }
    gsm(&sub("hybrid"), &["run", "--task", "connectivity", "--method", "hybrid", "--instances", "25"])?;
    gsm(&sub("verify"), &["verify", "--suite", "sensitivity"])?;
    gsm(&sub("verify-csv"), &["--format", "csv", "verify", "--suite", "hac-pe"])?;
    Ok(())
}

fn files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn pretty<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).unwrap();
    b.push(b'\n');
    b
}

/// Parses one emitted file with its reader and checks the content survives.
fn round_trip(p: &Path) -> Result<(), String> {
    let bytes = fs::read(p).unwrap();
    let name = p.file_name().unwrap().to_str().unwrap();
    let text = || String::from_utf8(bytes.clone()).unwrap();
    let same = |again: Vec<u8>| ensure(again == bytes, format!("{} does not round-trip", p.display()));
    match name {
        "graph.json" => same(pretty(&Graph::from_json(&text()).map_err(|e| e.to_string())?)),
        "labels.json" => same(pretty(&serde_json::from_slice::<Vec<TaskLabel>>(&bytes).map_err(|e| e.to_string())?)),
        "hac_tree.json" => same(pretty(&HacTree::from_json(&text()).map_err(|e| e.to_string())?)),
        "encoder.json" => same(pretty(&EncoderParams::from_json(&text()).map_err(|e| e.to_string())?)),
        n if n.starts_with("tokenization") => {
            same(pretty(&Tokenization::from_json(&text()).map_err(|e| e.to_string())?))
        }
        n if n.ends_with(".bin") => {
            let seqs = read_sequences(&mut bytes.as_slice()).map_err(|e| e.to_string())?;
            let mut again = Vec::new();
            let d = seqs.first().map_or(0, |s| s.d_local());
            write_sequences(&mut again, &seqs, d).map_err(|e| e.to_string())?;
            same(again)
        }
        n if n.ends_with(".json") => {
            let v: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
            let again: serde_json::Value = serde_json::from_slice(&pretty(&v)).unwrap();
            ensure(v == again, format!("{} does not round-trip", p.display()))
        }
        n if n.ends_with(".csv") => {
            let mut rd = csv::Reader::from_reader(bytes.as_slice());
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(rd.headers().map_err(|e| e.to_string())?).unwrap();
            for rec in rd.records() {
                w.write_record(&rec.map_err(|e| e.to_string())?).unwrap();
            }
            same(w.into_inner().unwrap())
        }
        other => Err(format!("unexpected file {other}")),
    }
}

// 11
fn determinism() -> Verdict {
    let runs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &runs {
        pipeline(d.path())?;
    }
    let (a, b) = (files(runs[0].path()), files(runs[1].path()));
    ensure(a.len() == b.len(), "runs emitted different file sets")?;
    for (x, y) in a.iter().zip(&b) {
        ensure(x.strip_prefix(runs[0].path()) == y.strip_prefix(runs[1].path()), "file names differ")?;
        ensure(fs::read(x).unwrap() == fs::read(y).unwrap(), format!("{} differs", x.display()))?;
        round_trip(x)?;
    }
    let mut r = rng(5);
    let model = ModelSpec::new(vec![
        Layer::Ssm(random_hippo_stack(1, 3, 2, 5).remove(0)),
        Layer::Attention(AttentionLayer::new(mat(&mut r, 2, 2), mat(&mut r, 2, 2), mat(&mut r, 2, 2), true).unwrap()),
    ])
    .unwrap();
    let mut buf = Vec::new();
    model.write_to(&mut buf).unwrap();
    ensure(ModelSpec::read_from(&mut buf.as_slice()).unwrap() == model, "model file does not round-trip")?;
    Ok(format!("{} files identical across reruns and round-tripped, plus model file", a.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("color counting construction is exact", color_counting),
        ("width below the color count undercounts", necessity_witness),
        ("single-layer sensitivity profile and surrogate band", sensitivity_bounds),
        ("sensitivity decays with depth", depth_decay),
        ("streaming connectivity matches union-find", streaming_connectivity),
        ("hybrid connectivity on factored graphs", hybrid),
        ("motif counts via local encoding and attention", motif_counts),
        ("hac depth, mst equivalence and hierarchical pe", hac_properties),
        ("hac-bfs orders beat random orders", locality_family),
        ("attention equivariance and causality", attention_properties),
        ("cli determinism and file round-trips", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
