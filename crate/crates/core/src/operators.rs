//! Transformation and operational matrices of the Petrov-Galerkin scheme.
//!
//! Everything here is exact: G maps the dual vector to the modal vector,
//! P differentiates the dual basis, Q = G*P differentiates the modal
//! basis, D (plus a boundary vector) differentiates the interior trial
//! functions, and the mass/stiffness pair B, A are assembled from slices
//! of G and Q. The stiffness assembly is validated entrywise against
//! quadrature of its defining integral before it is handed to the solver.

use ndarray::Array2;

use crate::bernstein;
use crate::dual::{self, DualBasis};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::rational::{rat_int, Rational, RationalMatrix};

fn require_degree(degree: usize, min: usize, what: &str) -> Result<()> {
    if degree < min {
        return Err(Error::Domain(format!("{what} needs degree >= {min}, got {degree}")));
    }
    Ok(())
}

/// The (N-1)x(N+1) three-diagonal matrix G with rows [.. 1 a_i b_i ..].
pub fn transform_g(degree: usize) -> Result<RationalMatrix> {
    require_degree(degree, 2, "transform matrix G")?;
    dual::modal_combination_matrix(degree)
}

/// The (N+1)x(N+1) operational matrix P of the dual-basis derivative.
///
/// Sparse apart from its first and last columns: the interior is the
/// tridiagonal (i, N-2i, -(N-i)).
pub fn dual_derivative_p(degree: usize) -> Result<RationalMatrix> {
    require_degree(degree, 1, "derivative matrix P")?;
    let n = degree;
    let first_col = |i: usize| -> Rational {
        let sign = if i.is_multiple_of(2) { 1 } else { -1 };
        let mut v = rat_int(-sign)
            * Rational::from_integer(
                num_bigint::BigInt::from(n as i64 + 1)
                    * bernstein::binomial(n as u64 + 1, i as u64 + 1).unwrap(),
            );
        if i == 0 {
            v += rat_int(n as i64);
        }
        if i == 1 {
            v += rat_int(1);
        }
        v
    };
    let mut p = RationalMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        p.set(i, 0, first_col(i));
        p.set(i, n, -first_col(n - i));
        if i >= 2 {
            p.set(i, i - 1, rat_int(i as i64));
        }
        if i >= 1 && i < n {
            p.set(i, i, rat_int(n as i64 - 2 * i as i64));
        }
        if i + 1 < n {
            p.set(i, i + 1, rat_int(i as i64 - n as i64));
        }
    }
    Ok(p)
}

/// The (N-1)x(N+1) matrix Q = G*P of the modal-basis derivative.
///
/// A (1,3)-band matrix; the band structure is asserted after the product
/// and a violation signals a construction bug.
pub fn modal_derivative_q(degree: usize) -> Result<RationalMatrix> {
    require_degree(degree, 2, "derivative matrix Q")?;
    let q = transform_g(degree)?.matmul(&dual_derivative_p(degree)?);
    for i in 0..q.rows() {
        for j in 0..q.cols() {
            let inside = j + 1 >= i && j <= i + 3;
            if !inside && !num_traits::Zero::is_zero(q.get(i, j)) {
                return Err(Error::Internal(format!(
                    "Q entry ({i}, {j}) = {} outside the (1,3) band",
                    q.get(i, j)
                )));
            }
        }
    }
    Ok(q)
}

/// Derivative of the interior trial vector: Phi' = D*Phi + d with
/// D = tridiag(N-i+1, 2i-N, -(i+1)) of order N-1 and
/// d = N*[phi_0, 0, ..., 0, -phi_N]^T.
#[derive(Debug, Clone)]
pub struct InteriorDerivative {
    pub degree: usize,
    pub matrix: RationalMatrix,
}

impl InteriorDerivative {
    /// The boundary vector d evaluated at `x`.
    pub fn boundary_term(&self, x: f64) -> Result<Vec<f64>> {
        let n = self.degree;
        let phi = bernstein::eval(n, x)?;
        let mut d = vec![0.0; n - 1];
        d[0] += n as f64 * phi[0];
        d[n - 2] -= n as f64 * phi[n];
        Ok(d)
    }
}

pub fn interior_derivative(degree: usize) -> Result<InteriorDerivative> {
    require_degree(degree, 2, "interior derivative matrix")?;
    let n = degree as i64;
    let q = degree - 1;
    let mut m = RationalMatrix::zeros(q, q);
    for r in 0..q {
        let i = r as i64 + 1; // trial index
        if r >= 1 {
            m.set(r, r - 1, rat_int(n - i + 1));
        }
        m.set(r, r, rat_int(2 * i - n));
        if r + 1 < q {
            m.set(r, r + 1, rat_int(-(i + 1)));
        }
    }
    Ok(InteriorDerivative { degree, matrix: m })
}

/// The tridiagonal mass matrix B = [g_1, ..., g_{N-1}]: sub-diagonal 1,
/// diagonal a_i, super-diagonal b_i.
pub fn mass_matrix(degree: usize) -> Result<RationalMatrix> {
    let g = transform_g(degree)?;
    Ok(g.column_slice(1, degree))
}

/// The seven-diagonal stiffness matrix
/// A = [q_1, ..., q_{N-1}] D^T + N([q_0 | 0 .. 0] - [0 .. 0 | q_N]).
///
/// The minus on the q_N column comes from the boundary vector
/// d = N[phi_0, 0, .., 0, -phi_N]; for N = 2 the first and last columns
/// coincide and the two contributions sum.
pub fn stiffness_matrix(degree: usize) -> Result<RationalMatrix> {
    let q = modal_derivative_q(degree)?;
    let d = interior_derivative(degree)?;
    let inner = q.column_slice(1, degree).matmul(&d.matrix.transpose());
    let n_rat = rat_int(degree as i64);
    let cols = degree - 1;
    let mut a = inner;
    for i in 0..degree - 1 {
        let first = a.get(i, 0) + &n_rat * q.get(i, 0);
        a.set(i, 0, first);
        let last = a.get(i, cols - 1) - &n_rat * q.get(i, degree);
        a.set(i, cols - 1, last);
    }
    validate_against_quadrature(degree, &a, 1)?;
    Ok(a)
}

/// Mass and stiffness rounded to f64 for the solver.
#[derive(Debug, Clone)]
pub struct PetrovGalerkin {
    pub degree: usize,
    pub mass: Array2<f64>,
    pub stiffness: Array2<f64>,
}

pub fn petrov_galerkin(degree: usize) -> Result<PetrovGalerkin> {
    let b = mass_matrix(degree)?;
    validate_against_quadrature(degree, &b, 0)?;
    let a = stiffness_matrix(degree)?;
    Ok(PetrovGalerkin {
        degree,
        mass: b.to_f64(),
        stiffness: a.to_f64(),
    })
}

/// Checks every entry of a constructed B (order 0) or A (order 1) against
/// quadrature of its defining integral.
fn validate_against_quadrature(degree: usize, m: &RationalMatrix, order: usize) -> Result<()> {
    let rule = QuadratureRule::gauss_legendre((degree + 2).min(crate::quadrature::MAX_POINTS))?;
    let basis = DualBasis::new(degree);
    let m_f = m.to_f64();
    let tol = 1e-10 * m.max_abs_f64().max(1.0);
    for l in 0..degree - 1 {
        for j in 0..degree - 1 {
            let integral = rule.integrate(|x| {
                let trial = match order {
                    0 => bernstein::eval(degree, x).unwrap(),
                    _ => bernstein::eval_derivative(degree, x).unwrap(),
                };
                let test = basis.eval_modal(x, order).unwrap();
                trial[j + 1] * test[l]
            })?;
            if (m_f[[l, j]] - integral).abs() > tol {
                return Err(Error::Internal(format!(
                    "operator entry ({l}, {j}) = {} disagrees with quadrature {integral}",
                    m_f[[l, j]]
                )));
            }
        }
    }
    Ok(())
}
