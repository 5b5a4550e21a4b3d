use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsmMode {
    /// `h_t = A h_{t-1} + B x_t`
    Lti,
    /// `h_t = (I - A/t) h_{t-1} + (B/t) x_t`, `t` counted from 1.
    Hippo,
}

/// Linear state-space layer with readout `y_t = C h_t` and `h_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSsmLayer {
    pub mode: SsmMode,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

/// HiPPO-LegS state matrix: `sqrt((2n+1)(2k+1))` below the diagonal, `n+1`
/// on it, zero above.
pub fn legs_matrix(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |n, k| match n.cmp(&k) {
        std::cmp::Ordering::Greater => (((2 * n + 1) * (2 * k + 1)) as f64).sqrt(),
        std::cmp::Ordering::Equal => (n + 1) as f64,
        std::cmp::Ordering::Less => 0.0,
    })
}

pub(crate) fn to_dvecs(xs: &[Vec<f64>], d: usize) -> Result<Vec<DVector<f64>>> {
    if xs.is_empty() {
        return Err(Error::InvalidParameter("input sequence is empty".into()));
    }
    xs.iter()
        .map(|x| {
            if x.len() != d {
                Err(Error::DimensionMismatch {
                    expected: d,
                    got: x.len(),
                })
            } else {
                Ok(DVector::from_column_slice(x))
            }
        })
        .collect()
}

pub(crate) fn from_dvecs(ys: Vec<DVector<f64>>) -> Vec<Vec<f64>> {
    ys.into_iter().map(|y| y.as_slice().to_vec()).collect()
}

impl LinearSsmLayer {
    pub fn new(mode: SsmMode, a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: a.ncols(),
            });
        }
        if b.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: b.nrows(),
            });
        }
        if c.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: c.ncols(),
            });
        }
        if a.iter().chain(b.iter()).chain(c.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("SSM weights must be finite".into()));
        }
        Ok(LinearSsmLayer { mode, a, b, c })
    }

    pub fn lti(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        Self::new(SsmMode::Lti, a, b, c)
    }

    /// Time-varying layer on the LegS matrix of width `b.nrows()`.
    pub fn hippo(b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        Self::new(SsmMode::Hippo, legs_matrix(b.nrows()), b, c)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn d_in(&self) -> usize {
        self.b.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.c.nrows()
    }

    /// State transition `F_t` applied to `h_{t-1}`.
    pub fn transition(&self, t: usize) -> DMatrix<f64> {
        match self.mode {
            SsmMode::Lti => self.a.clone(),
            SsmMode::Hippo => {
                DMatrix::identity(self.state_dim(), self.state_dim()) - &self.a / t as f64
            }
        }
    }

    /// Input map `G_t` applied to `x_t`.
    pub fn input_map(&self, t: usize) -> DMatrix<f64> {
        match self.mode {
            SsmMode::Lti => self.b.clone(),
            SsmMode::Hippo => &self.b / t as f64,
        }
    }

    pub fn forward(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let xs = to_dvecs(xs, self.d_in())?;
        let mut h = DVector::zeros(self.state_dim());
        let mut ys = Vec::with_capacity(xs.len());
        for (idx, x) in xs.iter().enumerate() {
            let t = idx + 1;
            h = match self.mode {
                SsmMode::Lti => &self.a * &h + &self.b * x,
                SsmMode::Hippo => {
                    let tf = t as f64;
                    &h - (&self.a * &h) / tf + (&self.b * x) / tf
                }
            };
            ys.push(&self.c * &h);
        }
        Ok(from_dvecs(ys))
    }

    /// `dy_t / dx_s = C F_t ... F_{s+1} G_s` for `s <= t` (1-based), zero
    /// otherwise.
    pub fn jacobian_block(&self, t: usize, s: usize) -> DMatrix<f64> {
        if s > t || s == 0 {
            return DMatrix::zeros(self.d_out(), self.d_in());
        }
        let mut p = self.c.clone();
        for j in (s + 1..=t).rev() {
            p *= self.transition(j);
        }
        p * self.input_map(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalars(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn memoryless() {
        let l = LinearSsmLayer::lti(DMatrix::zeros(2, 2), DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        let xs = vec![vec![1.0, 2.0], vec![-3.0, 0.5]];
        assert_eq!(l.forward(&xs).unwrap(), xs);
    }

    #[test]
    fn prefix_sum() {
        let one = DMatrix::identity(1, 1);
        let l = LinearSsmLayer::lti(one.clone(), one.clone(), one).unwrap();
        assert_eq!(l.forward(&scalars(&[1.0, 2.0, 3.0])).unwrap(), scalars(&[1.0, 3.0, 6.0]));
    }

    #[test]
    fn legs_small() {
        let a = legs_matrix(3);
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(2, 2)], 3.0);
        assert_eq!(a[(0, 1)], 0.0);
        assert!((a[(2, 1)] - 15f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn scalar_hippo_is_running_mean() {
        // With A = B = C = 1 the recurrence is h_t = h_{t-1} + (x_t - h_{t-1}) / t.
        let one = DMatrix::identity(1, 1);
        let l = LinearSsmLayer::hippo(one.clone(), one).unwrap();
        let ys = l.forward(&scalars(&[2.0, 4.0, 6.0, 8.0])).unwrap();
        assert_eq!(ys, scalars(&[2.0, 3.0, 4.0, 5.0]));
    }

    #[test]
    fn shape_checks() {
        assert!(LinearSsmLayer::lti(DMatrix::zeros(2, 3), DMatrix::zeros(2, 1), DMatrix::zeros(1, 2)).is_err());
        let l = LinearSsmLayer::lti(DMatrix::zeros(2, 2), DMatrix::zeros(2, 1), DMatrix::zeros(1, 2)).unwrap();
        assert!(matches!(l.forward(&[vec![1.0, 2.0]]), Err(Error::DimensionMismatch { .. })));
        assert!(l.forward(&[]).is_err());
    }
}
