//! Local encoding: turn tokens into vectors.
//!
//! The encoder is a small gated message-passing network. One round computes
//!
//! ```text
//! h'_v = relu(W1 h_v + mean_{u ~ v} sigmoid(a.h_v + b.h_u + c) W2 h_u)
//! ```
//!
//! and depth 0 is the bare projection `W1 x_v`.

mod motif;

pub use motif::{subgraph_count_encoding, Pattern};

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tokenize::{Token, Tokenization};

/// Degrees at or above this share the last one-hot slot of the fallback
/// features.
pub const DEGREE_CAP: usize = 16;

/// Node inputs: the graph's features, or a one-hot of the capped degree when
/// the graph has none.
pub fn node_inputs(g: &Graph) -> Vec<Vec<f64>> {
    match g.features() {
        Some(f) => f.to_vec(),
        None => (0..g.n())
            .map(|v| {
                let mut x = vec![0.0; DEGREE_CAP + 1];
                x[g.degree(v).min(DEGREE_CAP)] = 1.0;
                x
            })
            .collect(),
    }
}

pub fn input_dim(g: &Graph) -> usize {
    g.feature_dim().unwrap_or(DEGREE_CAP + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub d_in: usize,
    pub d_local: usize,
    pub depth: usize,
    /// `d_local x d_in`, row-major.
    pub w1: Vec<Vec<f64>>,
    pub w2: Vec<Vec<f64>>,
    pub gate_a: Vec<f64>,
    pub gate_b: Vec<f64>,
    pub gate_c: f64,
}

fn matvec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl EncoderParams {
    /// Uniform weights in `±1/sqrt(d_in)`.
    pub fn random(d_in: usize, d_local: usize, depth: usize, seed: u64) -> Result<EncoderParams> {
        let mut rng = crate::rng(seed);
        let s = 1.0 / (d_in.max(1) as f64).sqrt();
        let mut mat = |r: usize, c: usize| -> Vec<Vec<f64>> {
            (0..r).map(|_| (0..c).map(|_| rng.gen_range(-s..=s)).collect()).collect()
        };
        let w1 = mat(d_local, d_in);
        let w2 = mat(d_local, d_in);
        let gate_a = mat(1, d_in).remove(0);
        let gate_b = mat(1, d_in).remove(0);
        let gate_c = mat(1, 1)[0][0];
        let p = EncoderParams {
            d_in,
            d_local,
            depth,
            w1,
            w2,
            gate_a,
            gate_b,
            gate_c,
        };
        p.validate()?;
        Ok(p)
    }

    /// Depth-0 identity projection; handy for checks on raw features.
    pub fn identity(d: usize) -> EncoderParams {
        let eye: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        EncoderParams {
            d_in: d,
            d_local: d,
            depth: 0,
            w1: eye.clone(),
            w2: eye,
            gate_a: vec![0.0; d],
            gate_b: vec![0.0; d],
            gate_c: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let shape_ok = |m: &[Vec<f64>]| m.len() == self.d_local && m.iter().all(|r| r.len() == self.d_in);
        if !shape_ok(&self.w1) || !shape_ok(&self.w2) {
            return Err(Error::InvalidParameter(format!(
                "W1 and W2 must be {} x {}",
                self.d_local, self.d_in
            )));
        }
        for v in [&self.gate_a, &self.gate_b] {
            if v.len() != self.d_in {
                return Err(Error::DimensionMismatch {
                    expected: self.d_in,
                    got: v.len(),
                });
            }
        }
        if self.depth >= 2 && self.d_in != self.d_local {
            return Err(Error::DimensionMismatch {
                expected: self.d_in,
                got: self.d_local,
            });
        }
        let all = self.w1.iter().chain(&self.w2).flatten().chain(&self.gate_a).chain(&self.gate_b);
        if all.chain([&self.gate_c]).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("encoder weights must be finite".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("params serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<EncoderParams> {
        let p: EncoderParams = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

/// Node encodings of `g` given per-node inputs `x`.
pub fn encode_nodes(g: &Graph, x: &[Vec<f64>], p: &EncoderParams) -> Result<Vec<Vec<f64>>> {
    p.validate()?;
    if let Some(bad) = x.iter().find(|r| r.len() != p.d_in) {
        return Err(Error::DimensionMismatch {
            expected: p.d_in,
            got: bad.len(),
        });
    }
    if p.depth == 0 {
        return Ok(x.iter().map(|h| matvec(&p.w1, h)).collect());
    }
    let mut h = x.to_vec();
    for _ in 0..p.depth {
        let own: Vec<Vec<f64>> = h.iter().map(|hv| matvec(&p.w1, hv)).collect();
        let msg: Vec<Vec<f64>> = h.iter().map(|hu| matvec(&p.w2, hu)).collect();
        let ga: Vec<f64> = h.iter().map(|hv| dot(&p.gate_a, hv)).collect();
        let gb: Vec<f64> = h.iter().map(|hu| dot(&p.gate_b, hu)).collect();
        h = (0..g.n())
            .map(|v| {
                let nb = g.neighbors(v);
                let mut out = own[v].clone();
                if !nb.is_empty() {
                    let mut agg = vec![0.0; p.d_local];
                    for &u in nb {
                        let gate = 1.0 / (1.0 + (-(ga[v] + gb[u] + p.gate_c)).exp());
                        for (a, m) in agg.iter_mut().zip(&msg[u]) {
                            *a += gate * m;
                        }
                    }
                    for (o, a) in out.iter_mut().zip(agg) {
                        *o += a / nb.len() as f64;
                    }
                }
                out.iter().map(|&z| z.max(0.0)).collect()
            })
            .collect();
    }
    Ok(h)
}

/// Vectors for one token sequence plus the fingerprint of the tokenization
/// they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSequence {
    pub vectors: Vec<Vec<f64>>,
    pub provenance: String,
}

#[derive(Serialize, Deserialize)]
struct Header {
    token_count: usize,
    d_local: usize,
    provenance: String,
}

impl EncodedSequence {
    pub fn d_local(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    /// JSON header line, then the vectors as little-endian `f64` rows.
    pub fn write_to<W: Write>(&self, w: &mut W, d_local: usize) -> Result<()> {
        let header = Header {
            token_count: self.vectors.len(),
            d_local,
            provenance: self.provenance.clone(),
        };
        serde_json::to_writer(&mut *w, &header)?;
        w.write_all(b"\n")?;
        for row in &self.vectors {
            if row.len() != d_local {
                return Err(Error::DimensionMismatch {
                    expected: d_local,
                    got: row.len(),
                });
            }
            for x in row {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads one sequence, or `None` at a clean end of input.
    pub fn read_from<R: BufRead>(r: &mut R) -> Result<Option<EncodedSequence>> {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        let header: Header = serde_json::from_str(line.trim_end())?;
        let mut buf = [0u8; 8];
        let mut vectors = Vec::with_capacity(header.token_count);
        for _ in 0..header.token_count {
            let mut row = Vec::with_capacity(header.d_local);
            for _ in 0..header.d_local {
                r.read_exact(&mut buf)?;
                row.push(f64::from_le_bytes(buf));
            }
            vectors.push(row);
        }
        Ok(Some(EncodedSequence {
            vectors,
            provenance: header.provenance,
        }))
    }
}

pub fn write_sequences<W: Write>(w: &mut W, seqs: &[EncodedSequence], d_local: usize) -> Result<()> {
    seqs.iter().try_for_each(|s| s.write_to(w, d_local))
}

pub fn read_sequences<R: BufRead>(r: &mut R) -> Result<Vec<EncodedSequence>> {
    let mut out = Vec::new();
    while let Some(s) = EncodedSequence::read_from(r)? {
        out.push(s);
    }
    Ok(out)
}

/// Encodes every token of `tok`. Node tokens use encodings over the whole
/// graph, edge tokens average their endpoints, subgraph tokens average the
/// encodings of their induced subgraph and empty markers map to zero.
pub fn encode_tokens(g: &Graph, tok: &Tokenization, p: &EncoderParams) -> Result<Vec<EncodedSequence>> {
    tok.validate(g)?;
    let x = node_inputs(g);
    let h = encode_nodes(g, &x, p)?;
    let provenance = tok.fingerprint();
    let mut cache: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    let mean = |rows: &mut dyn Iterator<Item = &Vec<f64>>, d: usize| {
        let mut acc = vec![0.0; d];
        let mut k = 0usize;
        for r in rows {
            for (a, b) in acc.iter_mut().zip(r) {
                *a += b;
            }
            k += 1;
        }
        acc.iter_mut().for_each(|a| *a /= k.max(1) as f64);
        acc
    };
    let mut out = Vec::with_capacity(tok.sequences.len());
    for seq in &tok.sequences {
        let mut vectors = Vec::with_capacity(seq.len());
        for t in seq {
            let v = match t {
                Token::Node { node } => h[*node].clone(),
                Token::Edge { edge } => {
                    let (a, b) = g.edge(*edge);
                    mean(&mut [&h[a], &h[b]].into_iter(), p.d_local)
                }
                Token::Subgraph { empty: true, .. } => vec![0.0; p.d_local],
                Token::Subgraph { subgraph, .. } => {
                    if let Some(v) = cache.get(subgraph) {
                        v.clone()
                    } else {
                        let sub = g.induced(subgraph);
                        let xs: Vec<Vec<f64>> = subgraph.iter().map(|&v| x[v].clone()).collect();
                        let hs = encode_nodes(&sub, &xs, p)?;
                        let v = mean(&mut hs.iter(), p.d_local);
                        cache.insert(subgraph.clone(), v.clone());
                        v
                    }
                }
            };
            vectors.push(v);
        }
        out.push(EncodedSequence {
            vectors,
            provenance: provenance.clone(),
        });
    }
    Ok(out)
}
