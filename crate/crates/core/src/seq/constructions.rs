//! Hand-built layers that count exactly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::attention::AttentionLayer;
use super::ssm::LinearSsmLayer;
use crate::error::{Error, Result};

/// One-hot rows for a color sequence over `0..c`.
pub fn one_hot_colors(colors: &[usize], c: usize) -> Result<Vec<Vec<f64>>> {
    colors
        .iter()
        .map(|&col| {
            if col >= c {
                return Err(Error::InvalidParameter(format!("color {col} outside 0..{c}")));
            }
            let mut x = vec![0.0; c];
            x[col] = 1.0;
            Ok(x)
        })
        .collect()
}

/// Width-`c` recurrence `h_t = h_{t-1} + x_t`, `y_t = h_t`. On one-hot color
/// tokens the last output is the per-color count.
pub fn color_count_construction(c: usize) -> Result<LinearSsmLayer> {
    if c == 0 {
        return Err(Error::InvalidParameter("need at least one color".into()));
    }
    let eye = DMatrix::identity(c, c);
    LinearSsmLayer::lti(eye.clone(), eye.clone(), eye)
}

/// The same family one state short: `A = I`, `B` the rectangular identity
/// that keeps the first `c - 1` colors, `C = I`.
pub fn undercount_layer(c: usize) -> Result<LinearSsmLayer> {
    if c == 0 {
        return Err(Error::InvalidParameter("need at least one color".into()));
    }
    let m = c - 1;
    LinearSsmLayer::lti(DMatrix::identity(m, m), DMatrix::identity(m, c), DMatrix::identity(m, m))
}

/// Last output of `layer` on the one-hot encoding of `colors`.
pub fn final_output(layer: &LinearSsmLayer, colors: &[usize], c: usize) -> Result<Vec<f64>> {
    let ys = layer.forward(&one_hot_colors(colors, c)?)?;
    Ok(ys.last().cloned().unwrap_or_default())
}

fn counts(colors: &[usize], c: usize) -> Vec<usize> {
    let mut k = vec![0; c];
    for &col in colors {
        k[col] += 1;
    }
    k
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UndercountWitness {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub first_counts: Vec<usize>,
    pub second_counts: Vec<usize>,
    pub output: Vec<f64>,
}

/// Searches colorings of length `1..=max_len` over `c` colors for two with
/// different counts whose final outputs under `undercount_layer(c)` agree
/// within `tol`.
pub fn find_undercount_witness(c: usize, max_len: usize, tol: f64) -> Result<Option<UndercountWitness>> {
    let layer = undercount_layer(c)?;
    let mut seen: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    for len in 1..=max_len {
        let total = c.pow(len as u32);
        for code in 0..total {
            let mut colors = Vec::with_capacity(len);
            let mut rest = code;
            for _ in 0..len {
                colors.push(rest % c);
                rest /= c;
            }
            let out = final_output(&layer, &colors, c)?;
            for (prev, prev_out) in &seen {
                let close = prev_out.iter().zip(&out).all(|(a, b)| (a - b).abs() <= tol);
                if close && counts(prev, c) != counts(&colors, c) {
                    return Ok(Some(UndercountWitness {
                        first_counts: counts(prev, c),
                        second_counts: counts(&colors, c),
                        first: prev.clone(),
                        second: colors,
                        output: out,
                    }));
                }
            }
            seen.push((colors, out));
        }
    }
    Ok(None)
}

/// Sums per-node scores with one attention layer: zero queries and keys give
/// uniform weights, so every output row is the mean, and scaling by the
/// length recovers the sum.
pub fn count_via_attention_sum(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Ok(0.0);
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidParameter("scores must be finite".into()));
    }
    let layer = AttentionLayer::new(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1), DMatrix::identity(1, 1), false)?;
    let xs: Vec<Vec<f64>> = scores.iter().map(|&s| vec![s]).collect();
    let y = layer.forward(&xs)?;
    Ok(y[0][0] * scores.len() as f64)
}
