//! Dual Bernstein basis and the modal test basis built from it.
//!
//! The dual functions satisfy the biorthogonality
//! `int phi_i psi~_j = delta_ij`; their coefficient matrix C alternates in
//! sign and grows like 4^N, so it is assembled in exact rational arithmetic
//! and rounded to f64 once. The modal functions
//! `psi_i = psi~_i + a_i psi~_{i+1} + b_i psi~_{i+2}` vanish at both
//! endpoints and span the boundary-constrained polynomial space; they are
//! the test functions of the Petrov-Galerkin scheme.

use ndarray::Array2;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::bernstein;
use crate::error::{Error, Result};
use crate::rational::{rat_int, Rational, RationalMatrix};

/// Coefficient c_{i,j} from the closed-form sum, exact.
fn dual_coefficient(n: u64, i: u64, j: u64) -> Rational {
    let mut sum = BigInt::from(0);
    for r in 0..=i.min(j) {
        let term = BigInt::from(2 * r + 1)
            * bernstein::binomial(n + r + 1, n - i).unwrap()
            * bernstein::binomial(n - r, n - i).unwrap()
            * bernstein::binomial(n + r + 1, n - j).unwrap()
            * bernstein::binomial(n - r, n - j).unwrap();
        sum += term;
    }
    let sign = if (i + j).is_multiple_of(2) { 1 } else { -1 };
    let den = bernstein::binomial(n, i).unwrap() * bernstein::binomial(n, j).unwrap();
    Rational::new(BigInt::from(sign) * sum, den)
}

/// The (N+1)x(N+1) matrix C with psi~_i = sum_j c_{i,j} phi_j.
///
/// Only entries with i <= j and i + j <= N are computed from the sum; the
/// rest follow from bisymmetry (symmetric about both diagonals).
pub fn dual_coefficient_matrix(degree: usize) -> RationalMatrix {
    let n = degree;
    let mut c = RationalMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in i..=n {
            if i + j > n {
                continue;
            }
            let v = dual_coefficient(n as u64, i as u64, j as u64);
            c.set(i, j, v.clone());
            c.set(j, i, v.clone());
            c.set(n - i, n - j, v.clone());
            c.set(n - j, n - i, v);
        }
    }
    c
}

/// The compact-combination coefficients a_i, b_i of the modal basis,
/// a_i = (2i+4)/(N-i+1), b_i = (i+2)(i+3)/((N-i)(N-i+1)), 0 <= i <= N-2.
#[derive(Debug, Clone)]
pub struct ModalCoefficients {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

pub fn modal_coefficients(degree: usize) -> Result<ModalCoefficients> {
    if degree < 2 {
        return Err(Error::Domain(format!(
            "modal basis needs degree >= 2 (boundary-constrained space is trivial), got {degree}"
        )));
    }
    let n = degree as i64;
    let mut a = Vec::with_capacity(degree - 1);
    let mut b = Vec::with_capacity(degree - 1);
    for i in 0..=(n - 2) {
        a.push(Rational::new(BigInt::from(2 * i + 4), BigInt::from(n - i + 1)));
        b.push(Rational::new(
            BigInt::from((i + 2) * (i + 3)),
            BigInt::from((n - i) * (n - i + 1)),
        ));
    }
    Ok(ModalCoefficients { a, b })
}

/// The (N-1)x(N+1) combination matrix with rows [.. 1 a_i b_i ..] mapping
/// the dual vector to the modal vector.
pub(crate) fn modal_combination_matrix(degree: usize) -> Result<RationalMatrix> {
    let mc = modal_coefficients(degree)?;
    let mut g = RationalMatrix::zeros(degree - 1, degree + 1);
    for i in 0..degree - 1 {
        g.set(i, i, rat_int(1));
        g.set(i, i + 1, mc.a[i].clone());
        g.set(i, i + 2, mc.b[i].clone());
    }
    Ok(g)
}

/// Exact boundary values of the dual functions:
/// psi~_i(0) = (-1)^i (N+1) C(N+1, i+1) and
/// psi~_i(1) = (-1)^(N-i) (N+1) C(N+1, i).
pub fn dual_boundary_values_exact(degree: usize) -> (Vec<Rational>, Vec<Rational>) {
    let n = degree as u64;
    let mut at0 = Vec::with_capacity(degree + 1);
    let mut at1 = Vec::with_capacity(degree + 1);
    for i in 0..=n {
        let s0 = if i.is_multiple_of(2) { 1 } else { -1 };
        let s1 = if (n - i).is_multiple_of(2) { 1 } else { -1 };
        at0.push(Rational::from_integer(
            BigInt::from(s0) * BigInt::from(n + 1) * bernstein::binomial(n + 1, i + 1).unwrap(),
        ));
        at1.push(Rational::from_integer(
            BigInt::from(s1) * BigInt::from(n + 1) * bernstein::binomial(n + 1, i).unwrap(),
        ));
    }
    (at0, at1)
}

/// Dual and modal basis evaluator for one degree.
///
/// Construction does all the exact arithmetic; evaluation afterwards is
/// pure matrix-vector work against cached f64 copies, so a value is safe
/// to share across threads.
#[derive(Debug, Clone)]
pub struct DualBasis {
    degree: usize,
    coeffs: RationalMatrix,
    coeffs_f64: Array2<f64>,
    /// Rows are the Bernstein coefficients of the modal functions (G*C).
    modal_bernstein: Option<RationalMatrix>,
    modal_bernstein_f64: Option<Array2<f64>>,
}

impl DualBasis {
    pub fn new(degree: usize) -> Self {
        let coeffs = dual_coefficient_matrix(degree);
        let coeffs_f64 = coeffs.to_f64();
        let (modal_bernstein, modal_bernstein_f64) = if degree >= 2 {
            let gc = modal_combination_matrix(degree)
                .expect("degree >= 2")
                .matmul(&coeffs);
            let gc_f64 = gc.to_f64();
            (Some(gc), Some(gc_f64))
        } else {
            (None, None)
        };
        Self {
            degree,
            coeffs,
            coeffs_f64,
            modal_bernstein,
            modal_bernstein_f64,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The exact coefficient matrix C.
    pub fn coefficient_matrix(&self) -> &RationalMatrix {
        &self.coeffs
    }

    /// Exact Bernstein expansion of the modal functions, rows = G*C.
    pub fn modal_bernstein_coefficients(&self) -> Result<&RationalMatrix> {
        self.modal_bernstein
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("modal basis needs degree >= 2, got {}", self.degree)))
    }

    /// Values of all N+1 dual functions at `x`.
    pub fn eval_dual(&self, x: f64) -> Result<Vec<f64>> {
        let phi = bernstein::eval(self.degree, x)?;
        Ok(matvec(&self.coeffs_f64, &phi))
    }

    /// Values of the N-1 modal functions (`order` 0) or their derivatives
    /// (`order` 1) at `x`.
    pub fn eval_modal(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let gc = self
            .modal_bernstein_f64
            .as_ref()
            .ok_or_else(|| Error::Domain(format!("modal basis needs degree >= 2, got {}", self.degree)))?;
        let phi = match order {
            0 => bernstein::eval(self.degree, x)?,
            1 => bernstein::eval_derivative(self.degree, x)?,
            _ => return Err(Error::Domain(format!("derivative order must be 0 or 1, got {order}"))),
        };
        Ok(matvec(gc, &phi))
    }

    /// Dual values at the endpoints, rounded from the exact formulas.
    pub fn boundary_values(&self) -> (Vec<f64>, Vec<f64>) {
        let (at0, at1) = dual_boundary_values_exact(self.degree);
        let to_f = |v: Vec<Rational>| v.iter().map(|r| r.to_f64().unwrap()).collect();
        (to_f(at0), to_f(at1))
    }
}

fn matvec(m: &Array2<f64>, v: &[f64]) -> Vec<f64> {
    let (rows, cols) = m.dim();
    debug_assert_eq!(cols, v.len());
    let mut out = vec![0.0; rows];
    for r in 0..rows {
        let mut acc = 0.0;
        for c in 0..cols {
            acc += m[[r, c]] * v[c];
        }
        out[r] = acc;
    }
    out
}
