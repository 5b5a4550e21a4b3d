//! End-to-end graph embedding over HAC-BFS levels.
//!
//! Each BFS level of the HAC tree is a token sequence. Its tokens are encoded
//! locally, the sequence goes through the global model, and the outputs are
//! mean-pooled into one vector per level. The graph embedding is the mean of
//! the level vectors.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hac::{bfs_tokenize, HacTree};
use crate::local::{encode_tokens, EncoderParams};
use crate::seq::ModelSpec;

/// Column-wise mean of a non-empty set of equal-length rows.
pub fn mean_pool(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = rows
        .first()
        .ok_or_else(|| Error::InvalidParameter("cannot pool an empty sequence".into()))?;
    let mut acc = vec![0.0; first.len()];
    for r in rows {
        if r.len() != acc.len() {
            return Err(Error::DimensionMismatch {
                expected: acc.len(),
                got: r.len(),
            });
        }
        for (a, x) in acc.iter_mut().zip(r) {
            *a += x;
        }
    }
    let n = rows.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEmbedding {
    /// One pooled vector per BFS level, coarsest first.
    pub levels: Vec<Vec<f64>>,
    pub pooled: Vec<f64>,
}

pub fn embed_graph(g: &Graph, tree: &HacTree, params: &EncoderParams, model: &ModelSpec) -> Result<GraphEmbedding> {
    if model.d_in() != params.d_local {
        return Err(Error::DimensionMismatch {
            expected: params.d_local,
            got: model.d_in(),
        });
    }
    let tok = bfs_tokenize(tree, g);
    let encoded = encode_tokens(g, &tok, params)?;
    let levels = encoded
        .iter()
        .map(|seq| mean_pool(&model.forward(&seq.vectors)?))
        .collect::<Result<Vec<_>>>()?;
    let pooled = mean_pool(&levels)?;
    Ok(GraphEmbedding { levels, pooled })
}
