use anyhow::{bail, Result};
use clap::ValueEnum;
use gsm_core::graph::{
    color_connectivity_instance, complete, generate_cycles, generate_erdos_renyi, generate_factored,
    generate_regular, grid, oracle, path, star, TaskKind,
};
use gsm_core::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::io::{sub_seed, write_json};
use crate::Ctx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Er,
    Regular,
    Cycles,
    Path,
    Star,
    Complete,
    Grid,
    /// Grid with two random walks coloring half the nodes red.
    ColorGrid,
    /// k-local factored graph over an ER kernel.
    Factored,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Degree for regular graphs.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Two disjoint half-size cycles instead of one.
    #[arg(long)]
    split: bool,
    #[arg(long, default_value_t = 4)]
    rows: usize,
    #[arg(long, default_value_t = 4)]
    cols: usize,
    /// Edges per super-edge block of a factored graph.
    #[arg(long, default_value_t = 16)]
    n_prime: usize,
    /// Node locality of each factored block.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Color every node uniformly from this many colors.
    #[arg(long)]
    colors: Option<usize>,
    /// Attach uniform random features of this dimension.
    #[arg(long)]
    features: Option<usize>,
    /// Attach node coordinates as features (path and grid only).
    #[arg(long)]
    coords: bool,
}

#[derive(Serialize, Deserialize)]
pub struct FactoredFile {
    pub edge_order: Vec<usize>,
    pub kernel_nodes: usize,
    pub pairs: Vec<(usize, usize)>,
    pub n_prime: usize,
    pub k: usize,
}

pub fn run(ctx: &Ctx, a: Args) -> Result<()> {
    let seed = ctx.seed;
    let mut factored = None;
    let mut g = match a.kind {
        Kind::Er => generate_erdos_renyi(a.n, a.p, seed)?,
        Kind::Regular => generate_regular(a.n, a.d, seed)?,
        Kind::Cycles => generate_cycles(a.n, a.split, seed)?,
        Kind::Path => path(a.n),
        Kind::Star => star(a.n.saturating_sub(1)),
        Kind::Complete => complete(a.n),
        Kind::Grid => grid(a.rows, a.cols),
        Kind::ColorGrid => color_connectivity_instance(&grid(a.rows, a.cols), seed)?,
        Kind::Factored => {
            let kernel = generate_erdos_renyi(a.n, a.p, seed)?;
            let f = generate_factored(&kernel, a.n_prime, a.k, sub_seed(seed, 1))?;
            factored = Some(FactoredFile {
                edge_order: f.edge_order,
                kernel_nodes: f.kernel_nodes,
                pairs: f.pairs,
                n_prime: f.n_prime,
                k: f.k,
            });
            f.graph
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 2));
    if let Some(c) = a.colors {
        if c == 0 {
            bail!("--colors must be at least 1");
        }
        let colors = (0..g.n()).map(|_| rng.gen_range(0..c)).collect();
        g = g.without_colors().with_colors(colors)?;
    }
    if a.coords {
        let f: Vec<Vec<f64>> = match a.kind {
            Kind::Path => (0..g.n()).map(|v| vec![v as f64]).collect(),
            Kind::Grid | Kind::ColorGrid => (0..g.n()).map(|v| vec![(v / a.cols) as f64, (v % a.cols) as f64]).collect(),
            _ => bail!("--coords applies to path and grid graphs"),
        };
        g = g.with_features(f)?;
    } else if let Some(d) = a.features {
        let f = (0..g.n()).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        g = g.with_features(f)?;
    }

    write_json(&ctx.out_dir.join("graph.json"), &g)?;
    write_json(&ctx.out_dir.join("labels.json"), &labels(&g)?)?;
    if let Some(f) = factored {
        write_json(&ctx.out_dir.join("factored.json"), &f)?;
    }
    println!("wrote graph with {} nodes and {} edges", g.n(), g.edge_count());
    Ok(())
}

pub fn labels(g: &Graph) -> Result<Vec<gsm_core::graph::TaskLabel>> {
    let mut kinds = vec![TaskKind::NodeDegree, TaskKind::CycleCheck, TaskKind::TriangleCount, TaskKind::Connectivity];
    if g.colors().is_some() {
        kinds.push(TaskKind::ColorCounts);
    }
    kinds.push(TaskKind::ShortestPath);
    Ok(kinds.into_iter().map(|k| oracle(g, k)).collect::<gsm_core::Result<_>>()?)
}
