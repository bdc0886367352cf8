//! Gauss-Legendre quadrature on the unit interval.
//!
//! Nodes are the Legendre roots mapped from [-1, 1] to [0, 1], found by
//! Newton iteration on the three-term recurrence. Only half the roots are
//! computed; the rest are mirrored, so the node/weight symmetry
//! (x, 1-x with equal weights) is exact in floating point.

use crate::error::{Error, Result};

/// Largest supported point count.
pub const MAX_POINTS: usize = 64;

/// An n-point Gauss-Legendre rule on [0, 1]; exact for degree <= 2n-1.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Legendre P_n and P_n' at `x` via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl QuadratureRule {
    /// Builds the n-point rule, 1 <= n <= 64.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_POINTS {
            return Err(Error::Domain(format!(
                "point count must be in 1..={MAX_POINTS}, got {n}"
            )));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // roots in (0, 1) of P_n on [-1, 1]; k indexes them outermost first
        for k in 0..n / 2 {
            let mut z = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, z);
                let dz = p / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, z);
            // weight on [0,1] is half the classical weight 2/((1-z^2) P_n'(z)^2)
            let w = 1.0 / ((1.0 - z * z) * dp * dp);
            // mirror so the pair (x, 1-x) is exact in floating point
            nodes[k] = 0.5 * (1.0 - z);
            nodes[n - 1 - k] = 1.0 - nodes[k];
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            let (_, dp) = legendre_with_derivative(n, 0.0);
            nodes[n / 2] = 0.5;
            weights[n / 2] = 1.0 / (dp * dp);
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over [0, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!("integrand non-finite at x = {x}")));
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// Integral of `f` over the unit square, tensorized from this rule.
    pub fn integrate_2d(&self, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &wx) in self.nodes.iter().zip(&self.weights) {
            let mut inner = 0.0;
            for (&y, &wy) in self.nodes.iter().zip(&self.weights) {
                let v = f(x, y);
                if !v.is_finite() {
                    return Err(Error::Evaluation(format!(
                        "integrand non-finite at (x, y) = ({x}, {y})"
                    )));
                }
                inner += wy * v;
            }
            acc += wx * inner;
        }
        Ok(acc)
    }
}
