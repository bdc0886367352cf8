//! Degree-N Bernstein basis on the unit interval.
//!
//! The basis functions are a nonnegative partition of unity with end-point
//! interpolation, which is why the solver builds its trial space from them.
//! All evaluations use a de Casteljau-style degree recursion: no explicit
//! powers, exact values at the endpoints, and every intermediate quantity
//! stays in [0, 1] for x in [0, 1].

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::rational::{Rational, RationalMatrix};

/// Exact binomial coefficient C(n, k).
///
/// Computed by the multiplicative formula with exact integer division at
/// every step, so intermediate values never overflow a partial product.
pub fn binomial(n: u64, k: u64) -> Result<BigInt> {
    if k > n {
        return Err(Error::Domain(format!("binomial requires k <= n, got ({n}, {k})")));
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * BigInt::from(n - k + i) / BigInt::from(i);
    }
    Ok(acc)
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "abscissa {x} outside [0, 1]; basis identities hold on the unit interval only"
        )));
    }
    Ok(())
}

/// Values of all N+1 basis functions at `x`.
pub fn eval(degree: usize, x: f64) -> Result<Vec<f64>> {
    check_unit_interval(x)?;
    let mut v = vec![0.0; degree + 1];
    v[0] = 1.0;
    let omx = 1.0 - x;
    for d in 1..=degree {
        for i in (1..=d).rev() {
            v[i] = x * v[i - 1] + omx * v[i];
        }
        v[0] *= omx;
    }
    Ok(v)
}

/// Values of all N+1 first derivatives at `x`.
///
/// Uses the same-degree three-term recurrence
/// phi_i' = (N-i+1) phi_{i-1} - (N-2i) phi_i - (i+1) phi_{i+1},
/// with phi_{-1} = phi_{N+1} = 0; the entries sum to zero.
pub fn eval_derivative(degree: usize, x: f64) -> Result<Vec<f64>> {
    let phi = eval(degree, x)?;
    let n = degree as f64;
    let mut out = vec![0.0; degree + 1];
    for i in 0..=degree {
        let fi = i as f64;
        let mut v = -(n - 2.0 * fi) * phi[i];
        if i > 0 {
            v += (n - fi + 1.0) * phi[i - 1];
        }
        if i < degree {
            v -= (fi + 1.0) * phi[i + 1];
        }
        out[i] = v;
    }
    Ok(out)
}

/// Evaluates sum_i coeffs[i] * phi_i(x) (`order` 0) or its derivative (`order` 1).
pub fn eval_in_basis(coeffs: &[f64], x: f64, order: usize) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(Error::Dimension("coefficient vector must be non-empty".into()));
    }
    let degree = coeffs.len() - 1;
    let basis = match order {
        0 => eval(degree, x)?,
        1 => eval_derivative(degree, x)?,
        _ => return Err(Error::Domain(format!("derivative order must be 0 or 1, got {order}"))),
    };
    Ok(coeffs.iter().zip(&basis).map(|(c, b)| c * b).sum())
}

/// Exact Gram matrix of the degree-N basis,
/// m_{i,j} = C(N,i) C(N,j) / ((2N+1) C(2N, i+j)).
///
/// Serves as the exact oracle for the biorthogonality of the dual basis;
/// it is itself validated against quadrature in the test suite.
pub fn gram_matrix(degree: usize) -> RationalMatrix {
    let n = degree as u64;
    RationalMatrix::from_fn(degree + 1, degree + 1, |i, j| {
        let num = binomial(n, i as u64).unwrap() * binomial(n, j as u64).unwrap();
        let den = BigInt::from(2 * n + 1) * binomial(2 * n, (i + j) as u64).unwrap();
        Rational::new(num, den)
    })
}
