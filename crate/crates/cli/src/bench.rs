use std::time::Instant;

use anyhow::Result;
use gsm_core::graph::{generate_erdos_renyi, triangle_count};
use gsm_core::hac::{build_hac_from_features, Metric};
use gsm_core::local::{encode_tokens, input_dim, EncoderParams};
use gsm_core::seq::{random_hippo_stack, stack_forward, AttentionLayer};
use gsm_core::stream::{edge_order_from_node_order, stream_connectivity, StreamMode};
use gsm_core::tokenize::{khop_tokenize, node_locality};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{Ctx, Format};

#[derive(clap::Args)]
pub struct Args {
    /// Graph sizes to time.
    #[arg(long, value_delimiter = ',', default_value = "64,256,1024")]
    sizes: Vec<usize>,
    /// Repetitions per measurement; the median is reported.
    #[arg(long, default_value_t = 5)]
    reps: usize,
}

#[derive(Serialize)]
struct Row {
    op: &'static str,
    n: usize,
    median_ms: f64,
}

fn time<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    let mut ms: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    ms.sort_by(f64::total_cmp);
    ms[ms.len() / 2]
}

pub fn run(ctx: &Ctx, a: Args) -> Result<()> {
    let mut rows = Vec::new();
    for &n in &a.sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let p = (4.0 / n as f64).min(1.0);
        let f: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let g = generate_erdos_renyi(n, p, ctx.seed)?.with_features(f)?;
        let tree = build_hac_from_features(&g, Metric::Euclidean)?;
        let order = edge_order_from_node_order(&g, &tree.leaf_order)?;
        let k = node_locality(&g, &order)?;
        let seq = g.ordered_edges(&order)?;
        let tok = khop_tokenize(&g, 1);
        let params = EncoderParams::random(input_dim(&g), 16, 1, ctx.seed)?;
        let d = 16;
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let m = |r: usize, c: usize, rng: &mut ChaCha8Rng| DMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
        let attn = AttentionLayer::new(m(8, d, &mut rng), m(8, d, &mut rng), m(d, d, &mut rng), false)?;
        let stack = random_hippo_stack(1, 8, d, ctx.seed);

        rows.push(Row { op: "triangle_count", n, median_ms: time(a.reps, || triangle_count(&g)) });
        rows.push(Row { op: "hac_build", n, median_ms: time(a.reps, || build_hac_from_features(&g, Metric::Euclidean)) });
        rows.push(Row { op: "khop_tokenize", n, median_ms: time(a.reps, || khop_tokenize(&g, 1)) });
        rows.push(Row { op: "encode_khop", n, median_ms: time(a.reps, || encode_tokens(&g, &tok, &params)) });
        rows.push(Row {
            op: "stream_connectivity",
            n,
            median_ms: time(a.reps, || stream_connectivity(&seq, k, StreamMode::Relaxed)),
        });
        rows.push(Row { op: "attention_forward", n, median_ms: time(a.reps, || attn.forward(&xs)) });
        rows.push(Row { op: "hippo_forward", n, median_ms: time(a.reps, || stack_forward(&stack, &xs)) });
    }
    match ctx.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
