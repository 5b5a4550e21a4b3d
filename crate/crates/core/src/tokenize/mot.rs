//! Mixture of tokenizations: a linear-sigmoid router picks two candidate
//! tokenizers per node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Router matrix `W_r` with one row per input feature and one column per
/// candidate tokenizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouterWeights {
    pub w: Vec<Vec<f64>>,
}

impl RouterWeights {
    pub fn new(w: Vec<Vec<f64>>) -> Result<RouterWeights> {
        let cols = w.first().map_or(0, Vec::len);
        if w.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged router matrix".into()));
        }
        if w.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("router weights must be finite".into()));
        }
        Ok(RouterWeights { w })
    }

    pub fn rows(&self) -> usize {
        self.w.len()
    }

    pub fn cols(&self) -> usize {
        self.w.first().map_or(0, Vec::len)
    }
}

/// Routing decision for one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotChoice {
    pub top2: (usize, usize),
    pub scores: Vec<f64>,
    pub one_hot: [Vec<f64>; 2],
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Scores every node with `sigmoid(X W_r)` and keeps the two best candidates.
/// Equal scores go to the lower candidate index.
pub fn mot_route(
    features: &[Vec<f64>],
    weights: &RouterWeights,
    candidates: &[String],
) -> Result<Vec<MotChoice>> {
    let t = weights.cols();
    if candidates.len() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            got: candidates.len(),
        });
    }
    if t < 2 {
        return Err(Error::InvalidParameter("MoT needs at least 2 candidates".into()));
    }
    features
        .iter()
        .map(|x| {
            if x.len() != weights.rows() {
                return Err(Error::DimensionMismatch {
                    expected: weights.rows(),
                    got: x.len(),
                });
            }
            let scores: Vec<f64> = (0..t)
                .map(|j| sigmoid(x.iter().zip(&weights.w).map(|(xi, row)| xi * row[j]).sum()))
                .collect();
            let mut idx: Vec<usize> = (0..t).collect();
            idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            let hot = |j: usize| {
                let mut v = vec![0.0; t];
                v[j] = 1.0;
                v
            };
            Ok(MotChoice {
                top2: (idx[0], idx[1]),
                one_hot: [hot(idx[0]), hot(idx[1])],
                scores,
            })
        })
        .collect()
}

/// Concatenates, per node, the encodings of its two chosen tokenizations.
/// `per_candidate[c][v]` is node `v`'s pooled encoding under candidate `c`.
pub fn mot_combine(choices: &[MotChoice], per_candidate: &[Vec<Vec<f64>>]) -> Result<Vec<Vec<f64>>> {
    choices
        .iter()
        .enumerate()
        .map(|(v, ch)| {
            let pick = |c: usize| -> Result<&Vec<f64>> {
                per_candidate
                    .get(c)
                    .and_then(|enc| enc.get(v))
                    .ok_or_else(|| Error::InvalidParameter(format!("no encoding for node {v} under candidate {c}")))
            };
            let (a, b) = (pick(ch.top2.0)?, pick(ch.top2.1)?);
            Ok(a.iter().chain(b).copied().collect())
        })
        .collect()
}
