use nalgebra::{DMatrix, DVector};

use super::ssm::{from_dvecs, to_dvecs};
use crate::error::{Error, Result};

/// Single-head softmax attention `softmax(Q K^T / sqrt(d_k)) V`.
///
/// Every softmax row is accumulated in a canonical order (by logit, then by
/// the bit pattern of the value vector), so permuting the input positions
/// permutes the output bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionLayer {
    /// `d_k x d`
    pub wq: DMatrix<f64>,
    /// `d_k x d`
    pub wk: DMatrix<f64>,
    /// `d x d`
    pub wv: DMatrix<f64>,
    pub causal: bool,
    /// Per-position vectors added to the inputs; length must match the input.
    pub pe: Option<Vec<Vec<f64>>>,
}

type Projections = Vec<DVector<f64>>;

/// Values and weights of one softmax row, computed in canonical order.
struct Row {
    /// `(position, weight)` pairs in accumulation order.
    weights: Vec<(usize, f64)>,
    y: DVector<f64>,
}

impl AttentionLayer {
    pub fn new(wq: DMatrix<f64>, wk: DMatrix<f64>, wv: DMatrix<f64>, causal: bool) -> Result<Self> {
        let d = wv.nrows();
        if wv.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: wv.ncols(),
            });
        }
        if wq.ncols() != d || wk.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if wq.ncols() != d { wq.ncols() } else { wk.ncols() },
            });
        }
        if wq.nrows() != wk.nrows() || wq.nrows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: wq.nrows(),
                got: wk.nrows(),
            });
        }
        if wq.iter().chain(wk.iter()).chain(wv.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("attention weights must be finite".into()));
        }
        Ok(AttentionLayer {
            wq,
            wk,
            wv,
            causal,
            pe: None,
        })
    }

    pub fn with_pe(mut self, pe: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = pe.iter().find(|p| p.len() != self.d()) {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: bad.len(),
            });
        }
        self.pe = Some(pe);
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.wv.nrows()
    }

    pub fn d_k(&self) -> usize {
        self.wq.nrows()
    }

    fn inputs(&self, xs: &[Vec<f64>]) -> Result<Vec<DVector<f64>>> {
        let mut z = to_dvecs(xs, self.d())?;
        if let Some(pe) = &self.pe {
            if pe.len() != z.len() {
                return Err(Error::DimensionMismatch {
                    expected: pe.len(),
                    got: z.len(),
                });
            }
            for (zi, p) in z.iter_mut().zip(pe) {
                *zi += DVector::from_column_slice(p);
            }
        }
        Ok(z)
    }

    /// Queries, keys, values and the per-position softmax rows.
    fn rows(&self, z: &[DVector<f64>]) -> (Projections, Projections, Projections, Vec<Row>) {
        let q: Vec<DVector<f64>> = z.iter().map(|x| &self.wq * x).collect();
        let k: Vec<DVector<f64>> = z.iter().map(|x| &self.wk * x).collect();
        let v: Vec<DVector<f64>> = z.iter().map(|x| &self.wv * x).collect();
        let scale = (self.d_k() as f64).sqrt();
        let n = z.len();
        let rows = (0..n)
            .map(|i| {
                let allowed = if self.causal { i + 1 } else { n };
                let mut terms: Vec<(f64, usize)> = (0..allowed).map(|l| (q[i].dot(&k[l]) / scale, l)).collect();
                terms.sort_by(|a, b| {
                    a.0.total_cmp(&b.0).then_with(|| {
                        let va = v[a.1].iter().map(|x| x.to_bits());
                        let vb = v[b.1].iter().map(|x| x.to_bits());
                        va.cmp(vb)
                    })
                });
                let top = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = terms.iter().map(|t| (t.0 - top).exp()).collect();
                let den: f64 = exps.iter().sum();
                let weights: Vec<(usize, f64)> = terms.iter().zip(&exps).map(|(t, e)| (t.1, e / den)).collect();
                let mut y = DVector::zeros(self.d());
                for &(l, a) in &weights {
                    y += &v[l] * a;
                }
                Row { weights, y }
            })
            .collect();
        (q, k, v, rows)
    }

    pub fn forward(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let z = self.inputs(xs)?;
        let (_, _, _, rows) = self.rows(&z);
        Ok(from_dvecs(rows.into_iter().map(|r| r.y).collect()))
    }

    /// Full Jacobian at `xs`, an `(n d) x (n d)` matrix whose `(i, t)` block
    /// is `dy_i / dx_t`.
    pub fn jacobian(&self, xs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let z = self.inputs(xs)?;
        let (q, k, v, rows) = self.rows(&z);
        let (n, d) = (z.len(), self.d());
        let scale = (self.d_k() as f64).sqrt();
        let mut jac = DMatrix::zeros(n * d, n * d);
        for (i, row) in rows.iter().enumerate() {
            for &(l, a) in &row.weights {
                // Value path.
                let mut blk = jac.view_mut((i * d, l * d), (d, d));
                blk += &self.wv * a;
                // Softmax path: a_il (v_l - y_i) ds_il/dz, with
                // ds_il/dz_i = k_l^T W_Q / sqrt(d_k) and ds_il/dz_l = q_i^T W_K / sqrt(d_k).
                let diff = (&v[l] - &row.y) * (a / scale);
                let via_q = &diff * (k[l].transpose() * &self.wq);
                let via_k = &diff * (q[i].transpose() * &self.wk);
                let mut bi = jac.view_mut((i * d, i * d), (d, d));
                bi += via_q;
                let mut bl = jac.view_mut((i * d, l * d), (d, d));
                bl += via_k;
            }
        }
        Ok(jac)
    }
}
