//! Layer stacks, the hybrid block and their on-disk format.
//!
//! A model file is one JSON header line describing every layer and the shape
//! of each of its matrices, followed by all matrices as row-major
//! little-endian `f64`, in header order.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::attention::AttentionLayer;
use super::ssm::{LinearSsmLayer, SsmMode};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Ssm(LinearSsmLayer),
    Attention(AttentionLayer),
}

impl Layer {
    pub fn d_in(&self) -> usize {
        match self {
            Layer::Ssm(l) => l.d_in(),
            Layer::Attention(l) => l.d(),
        }
    }

    pub fn d_out(&self) -> usize {
        match self {
            Layer::Ssm(l) => l.d_out(),
            Layer::Attention(l) => l.d(),
        }
    }

    pub fn forward(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        match self {
            Layer::Ssm(l) => l.forward(xs),
            Layer::Attention(l) => l.forward(xs),
        }
    }

    /// Full `(n d_out) x (n d_in)` Jacobian at `xs`.
    pub fn jacobian(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        match self {
            Layer::Ssm(l) => {
                let n = xs.len();
                let (o, i) = (l.d_out(), l.d_in());
                let mut jac = DMatrix::zeros(n * o, n * i);
                for t in 1..=n {
                    for s in 1..=t {
                        jac.view_mut(((t - 1) * o, (s - 1) * i), (o, i)).copy_from(&l.jacobian_block(t, s));
                    }
                }
                Ok(jac)
            }
            Layer::Attention(l) => l.jacobian(xs),
        }
    }
}

/// An ordered stack of layers with chained dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub layers: Vec<Layer>,
}

impl ModelSpec {
    pub fn new(layers: Vec<Layer>) -> Result<ModelSpec> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("model has no layers".into()));
        }
        for w in layers.windows(2) {
            if w[0].d_out() != w[1].d_in() {
                return Err(Error::DimensionMismatch {
                    expected: w[0].d_out(),
                    got: w[1].d_in(),
                });
            }
        }
        Ok(ModelSpec { layers })
    }

    pub fn d_in(&self) -> usize {
        self.layers[0].d_in()
    }

    pub fn d_out(&self) -> usize {
        self.layers[self.layers.len() - 1].d_out()
    }

    pub fn forward(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut h = xs.to_vec();
        for l in &self.layers {
            h = l.forward(&h)?;
        }
        Ok(h)
    }

    /// Chain rule over the whole stack.
    pub fn jacobian(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let mut h = xs.to_vec();
        let mut total: Option<DMatrix<f64>> = None;
        for l in &self.layers {
            let j = l.jacobian(&h)?;
            total = Some(match total {
                None => j,
                Some(t) => j * t,
            });
            h = l.forward(&h)?;
        }
        Ok(total.expect("model has layers"))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let mut header = Vec::new();
        let mut payload: Vec<DMatrix<f64>> = Vec::new();
        for l in &self.layers {
            let (mut spec, mats) = match l {
                Layer::Ssm(s) => (
                    LayerHeader {
                        kind: "ssm".into(),
                        mode: Some(s.mode),
                        causal: None,
                        has_pe: None,
                        matrices: Vec::new(),
                    },
                    vec![("A", s.a.clone()), ("B", s.b.clone()), ("C", s.c.clone())],
                ),
                Layer::Attention(a) => {
                    let mut mats = vec![("W_Q", a.wq.clone()), ("W_K", a.wk.clone()), ("W_V", a.wv.clone())];
                    if let Some(pe) = &a.pe {
                        mats.push(("pe", DMatrix::from_fn(pe.len(), a.d(), |r, c| pe[r][c])));
                    }
                    (
                        LayerHeader {
                            kind: "attention".into(),
                            mode: None,
                            causal: Some(a.causal),
                            has_pe: Some(a.pe.is_some()),
                            matrices: Vec::new(),
                        },
                        mats,
                    )
                }
            };
            for (name, m) in mats {
                spec.matrices.push(MatrixHeader {
                    name: name.into(),
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
                payload.push(m);
            }
            header.push(spec);
        }
        serde_json::to_writer(&mut *w, &ModelHeader { layers: header })?;
        w.write_all(b"\n")?;
        for m in payload {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    w.write_all(&m[(r, c)].to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: &mut R) -> Result<ModelSpec> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: ModelHeader = serde_json::from_str(line.trim_end())?;
        let mut read_matrix = |h: &MatrixHeader| -> Result<DMatrix<f64>> {
            let mut buf = [0u8; 8];
            let mut data = Vec::with_capacity(h.rows * h.cols);
            for _ in 0..h.rows * h.cols {
                r.read_exact(&mut buf)?;
                data.push(f64::from_le_bytes(buf));
            }
            Ok(DMatrix::from_row_slice(h.rows, h.cols, &data))
        };
        let mut layers = Vec::new();
        for spec in &header.layers {
            let mats: Vec<DMatrix<f64>> = spec.matrices.iter().map(&mut read_matrix).collect::<Result<_>>()?;
            let find = |name: &str| -> Result<DMatrix<f64>> {
                spec.matrices
                    .iter()
                    .position(|m| m.name == name)
                    .map(|i| mats[i].clone())
                    .ok_or_else(|| Error::Format(format!("layer is missing matrix {name}")))
            };
            layers.push(match spec.kind.as_str() {
                "ssm" => {
                    let mode = spec.mode.ok_or_else(|| Error::Format("ssm layer without mode".into()))?;
                    Layer::Ssm(LinearSsmLayer::new(mode, find("A")?, find("B")?, find("C")?)?)
                }
                "attention" => {
                    let mut a = AttentionLayer::new(find("W_Q")?, find("W_K")?, find("W_V")?, spec.causal.unwrap_or(false))?;
                    if spec.has_pe.unwrap_or(false) {
                        let pe = find("pe")?;
                        a = a.with_pe(pe.row_iter().map(|r| r.iter().copied().collect()).collect())?;
                    }
                    Layer::Attention(a)
                }
                other => return Err(Error::Format(format!("unknown layer kind {other:?}"))),
            });
        }
        ModelSpec::new(layers)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    layers: Vec<LayerHeader>,
}

#[derive(Serialize, Deserialize)]
struct LayerHeader {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    mode: Option<SsmMode>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    causal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    has_pe: Option<bool>,
    matrices: Vec<MatrixHeader>,
}

#[derive(Serialize, Deserialize)]
struct MatrixHeader {
    name: String,
    rows: usize,
    cols: usize,
}

/// SSM layers followed by one attention layer.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridBlock {
    pub ssm_layers: Vec<LinearSsmLayer>,
    pub attn: AttentionLayer,
}

impl HybridBlock {
    pub fn new(ssm_layers: Vec<LinearSsmLayer>, attn: AttentionLayer) -> Result<HybridBlock> {
        let block = HybridBlock { ssm_layers, attn };
        block.as_model()?;
        Ok(block)
    }

    pub fn as_model(&self) -> Result<ModelSpec> {
        let mut layers: Vec<Layer> = self.ssm_layers.iter().cloned().map(Layer::Ssm).collect();
        layers.push(Layer::Attention(self.attn.clone()));
        ModelSpec::new(layers)
    }

    pub fn forward(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut h = xs.to_vec();
        for l in &self.ssm_layers {
            h = l.forward(&h)?;
        }
        self.attn.forward(&h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(d: usize) -> DMatrix<f64> {
        DMatrix::identity(d, d)
    }

    #[test]
    fn identity_block_is_uniform_average() {
        let ssm = LinearSsmLayer::lti(DMatrix::zeros(2, 2), eye(2), eye(2)).unwrap();
        let attn = AttentionLayer::new(DMatrix::zeros(1, 2), DMatrix::zeros(1, 2), eye(2), false).unwrap();
        let block = HybridBlock::new(vec![ssm.clone(), ssm], attn).unwrap();
        let y = block.forward(&[vec![1.0, 0.0], vec![3.0, 2.0]]).unwrap();
        assert_eq!(y, vec![vec![2.0, 1.0], vec![2.0, 1.0]]);
    }

    #[test]
    fn chaining_is_checked() {
        let ssm = LinearSsmLayer::lti(eye(2), eye(2), DMatrix::zeros(3, 2)).unwrap();
        let attn = AttentionLayer::new(DMatrix::zeros(1, 2), DMatrix::zeros(1, 2), eye(2), false).unwrap();
        assert!(HybridBlock::new(vec![ssm], attn).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let ssm = LinearSsmLayer::hippo(DMatrix::from_row_slice(2, 1, &[0.5, -1.25]), DMatrix::from_row_slice(1, 2, &[1.0, 0.1])).unwrap();
        let attn = AttentionLayer::new(DMatrix::from_element(1, 1, 0.3), DMatrix::from_element(1, 1, -0.7), eye(1), true)
            .unwrap()
            .with_pe(vec![vec![0.1], vec![0.2]])
            .unwrap();
        let m = ModelSpec::new(vec![Layer::Ssm(ssm), Layer::Attention(attn)]).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let back = ModelSpec::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.layers[0].forward(&[vec![1.0]]).unwrap().len(), 1);
        assert!(matches!(&back.layers[0], Layer::Ssm(s) if s.mode == SsmMode::Hippo));
    }
}
