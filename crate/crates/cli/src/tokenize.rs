use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use gsm_core::hac::{bfs_tokenize, build_hac_from_features, dfs_tokenize, hierarchical_pe_table, HacTree, Metric};
use gsm_core::local::node_inputs;
use gsm_core::tokenize::{
    edge_tokenize, khop_tokenize, mot_route, node_tokenize, random_walk_tokenize, MotChoice, RouterWeights,
    Tokenization,
};
use gsm_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::{read_graph, read_json, resolve, sub_seed, write_json};
use crate::Ctx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Node,
    Edge,
    Khop,
    RandomWalk,
    HacDfs,
    HacBfs,
    Mot,
}

/// Tokenizers a MoT router may choose between: one sequence per node.
pub const MOT_CANDIDATES: [&str; 3] = ["node", "khop", "hac-dfs"];

#[derive(clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    method: Method,
    /// Graph file; defaults to graph.json in the output directory.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Hop radius for k-hop tokens.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    walk_len: usize,
    #[arg(long, default_value_t = 1)]
    walks_per_node: usize,
    /// Edge cost for HAC, computed from node features (degree one-hots if the
    /// graph has none).
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// Also write pe.csv with hierarchical encodings of all node pairs.
    #[arg(long)]
    pe: bool,
    /// Router weights JSON (`{"w": [[...], ...]}`); random if absent.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "node,khop,hac-dfs")]
    candidates: Vec<String>,
}

#[derive(Serialize, Deserialize)]
pub struct MotFile {
    pub candidates: Vec<String>,
    pub choices: Vec<MotChoice>,
}

/// The graph with node inputs as features, for HAC costs.
fn with_inputs(g: &Graph) -> Result<Graph> {
    if g.features().is_some() {
        return Ok(g.clone());
    }
    Ok(g.clone().with_features(node_inputs(g))?)
}

pub fn hac_tree(g: &Graph, metric: Metric) -> Result<HacTree> {
    Ok(build_hac_from_features(&with_inputs(g)?, metric)?)
}

/// Builds one named tokenization; HAC variants also return their tree.
pub fn tokenize_one(g: &Graph, name: &str, a: &Args, seed: u64) -> Result<(Tokenization, Option<HacTree>)> {
    Ok(match name {
        "node" => (node_tokenize(g), None),
        "edge" => (edge_tokenize(g, None)?, None),
        "khop" => (khop_tokenize(g, a.k), None),
        "random-walk" => (random_walk_tokenize(g, a.walk_len, a.walks_per_node, seed)?, None),
        "hac-dfs" | "hac-bfs" => {
            let tree = hac_tree(g, a.metric)?;
            let tok = if name == "hac-dfs" { dfs_tokenize(&tree, g) } else { bfs_tokenize(&tree, g) };
            (tok, Some(tree))
        }
        other => bail!("unknown tokenizer {other:?}"),
    })
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Node => "node",
        Method::Edge => "edge",
        Method::Khop => "khop",
        Method::RandomWalk => "random-walk",
        Method::HacDfs => "hac-dfs",
        Method::HacBfs => "hac-bfs",
        Method::Mot => "mot",
    }
}

fn write_pe(path: &Path, tree: &HacTree, g: &Graph) -> Result<()> {
    let table = hierarchical_pe_table(tree, g)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["u".to_string(), "v".to_string()];
    header.extend((1..=tree.depth + 1).map(|l| format!("d{l}")));
    w.write_record(&header)?;
    for (u, row) in table.iter().enumerate() {
        for (v, pe) in row.iter().enumerate().skip(u + 1) {
            let mut rec = vec![u.to_string(), v.to_string()];
            rec.extend(pe.iter().map(i64::to_string));
            w.write_record(&rec)?;
        }
    }
    w.into_inner().map_err(|e| e.into_error())?.flush()?;
    Ok(())
}

pub fn run(ctx: &Ctx, a: Args) -> Result<()> {
    let g = read_graph(&resolve(a.graph.clone(), &ctx.out_dir, "graph.json"))?;
    if a.method != Method::Mot {
        let (tok, tree) = tokenize_one(&g, method_name(a.method), &a, ctx.seed)?;
        write_json(&ctx.out_dir.join("tokenization.json"), &tok)?;
        if let Some(tree) = tree {
            write_json(&ctx.out_dir.join("hac_tree.json"), &tree)?;
            if a.pe {
                write_pe(&ctx.out_dir.join("pe.csv"), &tree, &g)?;
            }
        }
        println!("{}: {} sequences", tok.tokenizer, tok.sequences.len());
        return Ok(());
    }

    for c in &a.candidates {
        if !MOT_CANDIDATES.contains(&c.as_str()) {
            bail!("MoT candidate {c:?} is not one of {}", MOT_CANDIDATES.join(", "));
        }
    }
    let features = node_inputs(&g);
    let d = features.first().map_or(0, Vec::len);
    let weights = match &a.weights {
        Some(p) => RouterWeights::new(read_json::<RouterWeights>(p).context("router weights")?.w)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(ctx.seed, 3));
            let w = (0..d).map(|_| (0..a.candidates.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            RouterWeights::new(w)?
        }
    };
    let choices = mot_route(&features, &weights, &a.candidates)?;
    for c in &a.candidates {
        let (tok, _) = tokenize_one(&g, c, &a, ctx.seed)?;
        write_json(&ctx.out_dir.join(format!("tokenization_{c}.json")), &tok)?;
    }
    write_json(&ctx.out_dir.join("mot.json"), &MotFile { candidates: a.candidates.clone(), choices })?;
    println!("mot: routed {} nodes over {} candidates", g.n(), a.candidates.len());
    Ok(())
}
