//! L1 discretization of the Caputo time derivative.
//!
//! The derivative of order alpha in (0,1) at t_{k+1} is approximated by
//! mu * (u^{k+1} - H^{k+1}) with mu = 1/(tau^alpha Gamma(2-alpha)) and a
//! history combination H built from the weights
//! b_j = (j+1)^{1-alpha} - j^{1-alpha}. The weights are positive, strictly
//! decreasing, and telescope to one, which is what drives the scheme's
//! unconditional stability.

use ndarray::Array2;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Weight table of the L1 scheme for a fixed (alpha, tau, step count).
#[derive(Debug, Clone)]
pub struct L1Weights {
    pub alpha: f64,
    pub tau: f64,
    /// b_j for j = 0..steps-1; b_0 = 1.
    pub b: Vec<f64>,
    /// mu = 1 / (tau^alpha * Gamma(2 - alpha)).
    pub mu: f64,
}

pub fn l1_weights(alpha: f64, tau: f64, steps: usize) -> Result<L1Weights> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "fractional order must lie in (0, 1), got {alpha}"
        )));
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::Domain(format!("time step must be positive, got {tau}")));
    }
    if steps == 0 {
        return Err(Error::Domain("step count must be at least 1".into()));
    }
    let e = 1.0 - alpha;
    let b = (0..steps)
        .map(|j| ((j + 1) as f64).powf(e) - (j as f64).powf(e))
        .collect();
    let mu = 1.0 / (tau.powf(alpha) * gamma(2.0 - alpha));
    Ok(L1Weights { alpha, tau, b, mu })
}

/// History combination H^{k+1} of the time-discrete scheme:
/// (1-b_1) U^k + sum_{j=1}^{k-1} (b_j - b_{j+1}) U^{k-j} + b_k U^0 for
/// k >= 1, and U^0 for k = 0. `history` must hold U^0..U^k.
pub fn history_combination(
    history: &[Array2<f64>],
    weights: &L1Weights,
    k: usize,
) -> Result<Array2<f64>> {
    if history.len() != k + 1 {
        return Err(Error::Dimension(format!(
            "history must hold steps 0..={k}, got {} fields",
            history.len()
        )));
    }
    let dim = history[0].dim();
    if history.iter().any(|u| u.dim() != dim) {
        return Err(Error::Dimension("history fields must share one shape".into()));
    }
    if k == 0 {
        return Ok(history[0].clone());
    }
    if k >= weights.b.len() {
        return Err(Error::Dimension(format!(
            "weight table has {} entries, step {k} requires {}",
            weights.b.len(),
            k + 1
        )));
    }
    let b = &weights.b;
    let mut acc: Array2<f64> = &history[k] * (1.0 - b[1]);
    for j in 1..k {
        acc.scaled_add(b[j] - b[j + 1], &history[k - j]);
    }
    acc.scaled_add(b[k], &history[0]);
    Ok(acc)
}
