use std::time::Instant;

use anyhow::{bail, Result};
use clap::ValueEnum;
use gsm_core::graph::{color_counts, generate_erdos_renyi, generate_factored, is_connected};
use gsm_core::local::{input_dim, subgraph_count_encoding, EncoderParams, Pattern};
use gsm_core::pipeline::embed_graph;
use gsm_core::seq::{color_count_construction, count_via_attention_sum, final_output, random_hippo_stack, Layer, ModelSpec};
use gsm_core::stream::{edge_order_from_node_order, hybrid_connectivity, stream_connectivity, StreamMode};
use gsm_core::tokenize::node_locality;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{sub_seed, write_json};
use crate::motif_oracle::induced_count;
use crate::tokenize::hac_tree;
use crate::Ctx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// Per-color counts from an SSM over one-hot colors in random node order.
    ColorCount,
    /// Motif counts from local count encodings summed by attention.
    MotifCount,
    /// Connectivity from the streaming automaton (or the hybrid solver).
    Connectivity,
    /// HAC-BFS graph embeddings through a random encoder and SSM stack.
    Embed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnMethod {
    /// Strict streaming on HAC-BFS edge orders at their measured locality.
    Stream,
    /// Two-phase hybrid solver on factored graphs.
    Hybrid,
}

#[derive(clap::Args, Serialize)]
pub struct Args {
    #[arg(long, value_enum)]
    task: Task,
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 0.2)]
    p: f64,
    #[arg(long, default_value_t = 4)]
    colors: usize,
    #[arg(long, default_value = "triangle")]
    pattern: Pattern,
    #[arg(long, value_enum, default_value_t = ConnMethod::Stream)]
    method: ConnMethod,
    #[arg(long, default_value_t = 8)]
    d_local: usize,
    #[arg(long, default_value_t = 1)]
    layers: usize,
}

#[derive(Serialize)]
struct RunConfig<'a> {
    seed: u64,
    #[serde(flatten)]
    args: &'a Args,
}

struct Outcome {
    exact: Option<bool>,
    window: Option<usize>,
}

pub fn run(ctx: &Ctx, a: Args) -> Result<()> {
    if a.instances == 0 {
        bail!("--instances must be positive");
    }
    let start = Instant::now();
    let seeds: Vec<u64> = (0..a.instances as u64).map(|i| sub_seed(ctx.seed, i)).collect();
    let (method, outcomes) = match a.task {
        Task::ColorCount => ("ssm-count", par(&seeds, |s| color_instance(&a, s))?),
        Task::MotifCount => ("local-count+attention-sum", par(&seeds, |s| motif_instance(&a, s))?),
        Task::Connectivity => match a.method {
            ConnMethod::Stream => ("stream-hac-bfs", par(&seeds, |s| stream_instance(&a, s))?),
            ConnMethod::Hybrid => ("hybrid-factored", par(&seeds, |s| hybrid_instance(&a, s))?),
        },
        Task::Embed => ("hac-bfs-embed", embed(ctx, &a, &seeds)?),
    };
    let checked: Vec<bool> = outcomes.iter().filter_map(|o| o.exact).collect();
    let rate = (!checked.is_empty()).then(|| checked.iter().filter(|&&b| b).count() as f64 / checked.len() as f64);
    let peak = outcomes.iter().filter_map(|o| o.window).max();

    let mut w = csv::Writer::from_path(ctx.out_dir.join("metrics.csv"))?;
    w.write_record(["task", "method", "instances", "exact_match_rate", "peak_window"])?;
    w.write_record([
        task_name(a.task).to_string(),
        method.to_string(),
        a.instances.to_string(),
        rate.map_or(String::new(), |r| r.to_string()),
        peak.map_or(String::new(), |p| p.to_string()),
    ])?;
    w.flush()?;
    write_json(&ctx.out_dir.join("run_config.json"), &RunConfig { seed: ctx.seed, args: &a })?;

    println!(
        "{} / {method}: {} instances, exact match {}, wall time {:.3} s",
        task_name(a.task),
        a.instances,
        rate.map_or("n/a".to_string(), |r| format!("{r:.4}")),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn task_name(t: Task) -> &'static str {
    match t {
        Task::ColorCount => "color-count",
        Task::MotifCount => "motif-count",
        Task::Connectivity => "connectivity",
        Task::Embed => "embed",
    }
}

fn par<F>(seeds: &[u64], f: F) -> Result<Vec<Outcome>>
where
    F: Fn(u64) -> Result<Outcome> + Sync,
{
    seeds.par_iter().map(|&s| f(s)).collect()
}

fn color_instance(a: &Args, seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors: Vec<usize> = (0..a.n).map(|_| rng.gen_range(0..a.colors)).collect();
    let g = generate_erdos_renyi(a.n, a.p, seed)?.with_colors(colors.clone())?;
    let mut order: Vec<usize> = (0..a.n).collect();
    order.shuffle(&mut rng);
    let seq: Vec<usize> = order.iter().map(|&v| colors[v]).collect();
    let out = final_output(&color_count_construction(a.colors)?, &seq, a.colors)?;
    let want = color_counts(&g, a.colors)?;
    let exact = out.len() == want.len() && out.iter().zip(&want).all(|(&o, &w)| o.round() as usize == w);
    Ok(Outcome { exact: Some(exact), window: None })
}

fn motif_instance(a: &Args, seed: u64) -> Result<Outcome> {
    let g = generate_erdos_renyi(a.n, a.p, seed)?;
    let h = a.pattern.graph();
    let scores = subgraph_count_encoding(&g, &h, a.pattern.radius())?;
    let total = count_via_attention_sum(&scores)?;
    Ok(Outcome { exact: Some(total.round() as u64 == induced_count(&g, &h)), window: None })
}

fn stream_instance(a: &Args, seed: u64) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features: Vec<Vec<f64>> = (0..a.n).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
    let g = generate_erdos_renyi(a.n, a.p, seed)?.with_features(features)?;
    let tree = hac_tree(&g, gsm_core::hac::Metric::Euclidean)?;
    let order = edge_order_from_node_order(&g, &tree.leaf_order)?;
    let k = node_locality(&g, &order)?;
    let out = stream_connectivity(&g.ordered_edges(&order)?, k, StreamMode::Strict { nodes: g.n() })?;
    Ok(Outcome {
        exact: Some(out.violations.is_empty() && out.connected == is_connected(&g)),
        window: Some(out.max_window),
    })
}

fn hybrid_instance(a: &Args, seed: u64) -> Result<Outcome> {
    let kernel = generate_erdos_renyi(a.n.min(8), a.p, seed)?;
    let f = generate_factored(&kernel, 16, 4, seed)?;
    Ok(Outcome { exact: Some(hybrid_connectivity(&f, 4, 16)? == is_connected(&f.graph)), window: None })
}

#[derive(Serialize)]
struct EmbeddingRecord {
    instance: usize,
    levels: Vec<Vec<f64>>,
    pooled: Vec<f64>,
}

fn embed(ctx: &Ctx, a: &Args, seeds: &[u64]) -> Result<Vec<Outcome>> {
    let records: Vec<EmbeddingRecord> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| -> Result<EmbeddingRecord> {
            let g = generate_erdos_renyi(a.n, a.p, s)?;
            let params = EncoderParams::random(input_dim(&g), a.d_local, 1, s)?;
            let stack = random_hippo_stack(a.layers, 4, a.d_local, s);
            let model = ModelSpec::new(stack.into_iter().map(Layer::Ssm).collect())?;
            let tree = hac_tree(&g, gsm_core::hac::Metric::Euclidean)?;
            let e = embed_graph(&g, &tree, &params, &model)?;
            Ok(EmbeddingRecord { instance: i, levels: e.levels, pooled: e.pooled })
        })
        .collect::<Result<_>>()?;
    write_json(&ctx.out_dir.join("embeddings.json"), &records)?;
    Ok(records.iter().map(|_| Outcome { exact: None, window: None }).collect())
}
