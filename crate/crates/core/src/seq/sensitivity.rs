//! Jacobians of SSM stacks and the sensitivity profile of a late output to
//! earlier inputs.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ssm::LinearSsmLayer;
use crate::error::{Error, Result};

/// Central finite-difference step used throughout.
pub const FD_STEP: f64 = 1e-5;

/// Scalar surrogate `A(k, i) = (1/i) * prod_{j=i}^{k} (1 - 1/j)`, which
/// telescopes to `(i-1) / (i k)`.
pub fn surrogate(k: usize, i: usize) -> f64 {
    let mut p = 1.0 / i as f64;
    for j in i..=k {
        p *= 1.0 - 1.0 / j as f64;
    }
    p
}

fn check_stack(stack: &[LinearSsmLayer]) -> Result<()> {
    if stack.is_empty() {
        return Err(Error::InvalidParameter("empty layer stack".into()));
    }
    for w in stack.windows(2) {
        if w[0].d_out() != w[1].d_in() {
            return Err(Error::DimensionMismatch {
                expected: w[0].d_out(),
                got: w[1].d_in(),
            });
        }
    }
    Ok(())
}

/// `d y_n / d x_i` (1-based) of a stack of SSM layers, by summing over
/// intermediate positions: `G_l(t) = sum_{s=i}^{t} T_l(t, s) G_{l-1}(s)`.
pub fn ssm_jacobian(stack: &[LinearSsmLayer], n: usize, i: usize) -> Result<DMatrix<f64>> {
    check_stack(stack)?;
    if i == 0 || i > n {
        return Err(Error::OutOfRange { pos: i, len: n });
    }
    let mut g: Vec<DMatrix<f64>> = (i..=n).map(|t| stack[0].jacobian_block(t, i)).collect();
    for layer in &stack[1..] {
        g = (i..=n)
            .map(|t| {
                let mut acc = DMatrix::zeros(layer.d_out(), g[0].ncols());
                for s in i..=t {
                    acc += layer.jacobian_block(t, s) * &g[s - i];
                }
                acc
            })
            .collect();
    }
    Ok(g.pop().expect("at least one position"))
}

/// Central differences of output position `out_pos` with respect to input
/// position `in_pos` (both 1-based).
pub fn finite_difference_jacobian<F>(f: F, xs: &[Vec<f64>], out_pos: usize, in_pos: usize, step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[Vec<f64>]) -> Result<Vec<Vec<f64>>>,
{
    let n = xs.len();
    for p in [out_pos, in_pos] {
        if p == 0 || p > n {
            return Err(Error::OutOfRange { pos: p, len: n });
        }
    }
    let d_in = xs[in_pos - 1].len();
    let mut cols = Vec::with_capacity(d_in);
    for c in 0..d_in {
        let mut plus = xs.to_vec();
        let mut minus = xs.to_vec();
        plus[in_pos - 1][c] += step;
        minus[in_pos - 1][c] -= step;
        let (yp, ym) = (f(&plus)?, f(&minus)?);
        cols.push(
            yp[out_pos - 1]
                .iter()
                .zip(&ym[out_pos - 1])
                .map(|(a, b)| (a - b) / (2.0 * step))
                .collect::<Vec<f64>>(),
        );
    }
    let d_out = cols.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(d_out, d_in, |r, c| cols[c][r]))
}

/// `||analytic - numeric||_F / max(||analytic||_F, 1e-6)`.
pub fn relative_error(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>) -> f64 {
    (analytic - numeric).norm() / analytic.norm().max(1e-6)
}

/// Forward pass of a whole stack.
pub fn stack_forward(stack: &[LinearSsmLayer], xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    check_stack(stack)?;
    let mut h = xs.to_vec();
    for l in stack {
        h = l.forward(&h)?;
    }
    Ok(h)
}

/// `layers` scalar time-varying layers with `A = B = C = 1`.
pub fn scalar_hippo_stack(layers: usize) -> Vec<LinearSsmLayer> {
    let one = DMatrix::identity(1, 1);
    (0..layers)
        .map(|_| LinearSsmLayer::hippo(one.clone(), one.clone()).expect("scalar layer is valid"))
        .collect()
}

/// Time-varying layers on the width-`m` LegS matrix with random `B`, `C`
/// mapping `d -> d`.
pub fn random_hippo_stack(layers: usize, m: usize, d: usize, seed: u64) -> Vec<LinearSsmLayer> {
    let mut rng = crate::rng(seed);
    (0..layers)
        .map(|_| {
            let b = DMatrix::from_fn(m, d, |_, _| rng.gen_range(-1.0..1.0));
            let c = DMatrix::from_fn(d, m, |_, _| rng.gen_range(-1.0..1.0));
            LinearSsmLayer::hippo(b, c).expect("random layer is valid")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub i: usize,
    pub norm: f64,
    pub surrogate: f64,
    pub ratio: f64,
}

/// `||d y_n / d x_i||_F` for `i = 2..=n`, alongside the surrogate
/// `A(n-1, i)` and their ratio. Position 1 is left out because the
/// surrogate vanishes there.
pub fn sensitivity_profile(stack: &[LinearSsmLayer], n: usize) -> Result<Vec<SensitivityRow>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("profile needs n >= 3, got {n}")));
    }
    (2..=n)
        .map(|i| {
            let norm = ssm_jacobian(stack, n, i)?.norm();
            let s = surrogate(n - 1, i);
            Ok(SensitivityRow {
                i,
                norm,
                surrogate: s,
                ratio: norm / s,
            })
        })
        .collect()
}
