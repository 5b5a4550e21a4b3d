use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Result};
use gsm_core::local::{encode_tokens, input_dim, write_sequences, EncodedSequence, EncoderParams};
use gsm_core::pipeline::mean_pool;
use gsm_core::tokenize::{mot_combine, Tokenization};

use crate::io::{read_graph, read_json, resolve, write_json};
use crate::tokenize::MotFile;
use crate::Ctx;

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Tokenization file; defaults to tokenization.json in the output directory.
    #[arg(long)]
    tokenization: Option<PathBuf>,
    /// Encoder parameters JSON; random (from --seed) if absent.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    d_local: usize,
    /// Message-passing rounds; 2 or more needs d_local equal to the input width.
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// Encode the MoT candidates listed in mot.json and write the per-node
    /// concatenation of the two chosen encodings to mot_encoded.bin.
    #[arg(long)]
    mot: bool,
}

pub fn run(ctx: &Ctx, a: Args) -> Result<()> {
    let g = read_graph(&resolve(a.graph.clone(), &ctx.out_dir, "graph.json"))?;
    let params = match &a.params {
        Some(p) => EncoderParams::from_json(&std::fs::read_to_string(p)?)?,
        None => EncoderParams::random(input_dim(&g), a.d_local, a.depth, ctx.seed)?,
    };
    write_json(&ctx.out_dir.join("encoder.json"), &params)?;

    if a.mot {
        let mot: MotFile = read_json(&ctx.out_dir.join("mot.json"))?;
        let mut pooled = Vec::with_capacity(mot.candidates.len());
        for c in &mot.candidates {
            let tok: Tokenization = read_json(&ctx.out_dir.join(format!("tokenization_{c}.json")))?;
            let enc = encode_tokens(&g, &tok, &params)?;
            if enc.len() != g.n() {
                bail!("candidate {c} does not have one sequence per node");
            }
            pooled.push(enc.iter().map(|s| mean_pool(&s.vectors)).collect::<gsm_core::Result<Vec<_>>>()?);
        }
        let combined = EncodedSequence {
            vectors: mot_combine(&mot.choices, &pooled)?,
            provenance: format!("mot:{}", mot.candidates.join(",")),
        };
        write_bin(&ctx.out_dir.join("mot_encoded.bin"), &[combined], 2 * params.d_local)?;
        println!("mot: encoded {} nodes", g.n());
        return Ok(());
    }

    let tok: Tokenization = read_json(&resolve(a.tokenization.clone(), &ctx.out_dir, "tokenization.json"))?;
    tok.validate(&g)?;
    let seqs = encode_tokens(&g, &tok, &params)?;
    write_bin(&ctx.out_dir.join("encoded.bin"), &seqs, params.d_local)?;
    println!("encoded {} sequences at width {}", seqs.len(), params.d_local);
    Ok(())
}

fn write_bin(path: &std::path::Path, seqs: &[EncodedSequence], d_local: usize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sequences(&mut w, seqs, d_local)?;
    w.flush()?;
    Ok(())
}
