//! Band-storage matrices, Kronecker-sum assembly, and unpivoted band LU.
//!
//! The assembled spatial operator B(x)B + alpha0 (B(x)A + A(x)B) has scalar
//! bandwidth 3q+1 on each side for blocks of order q, so an in-band
//! Doolittle factorization costs O(n p^2) and each solve O(n p). The
//! factorization is computed once per configuration and reused for every
//! time step.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Square matrix stored by diagonals with fixed lower/upper bandwidths.
///
/// Entry (i, j) lives in `data[(lower + j - i) * n + j]`; accessors outside
/// the band read as zero and refuse writes.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        assert!(n > 0, "matrix order must be positive");
        assert!(lower < n && upper < n, "bandwidths must be below the order");
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; (lower + upper + 1) * n],
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.lower >= i && i + self.upper >= j
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        (self.lower + j - i) * self.n + j
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        if !self.in_band(i, j) {
            return Err(Error::Dimension(format!(
                "entry ({i}, {j}) outside the ({}, {}) band of order {}",
                self.lower, self.upper, self.n
            )));
        }
        let s = self.slot(i, j);
        self.data[s] = v;
        Ok(())
    }

    #[allow(clippy::needless_range_loop)]
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "vector length {} does not match order {}",
                x.len(),
                self.n
            )));
        }
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.lower);
            let hi = (i + self.upper).min(self.n - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += self.data[self.slot(i, j)] * x[j];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| self.get(i, j))
    }

    /// Count of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        let mut count = 0;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.lower);
            let hi = (i + self.upper).min(self.n - 1);
            for j in lo..=hi {
                if self.data[self.slot(i, j)] != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Coordinates (row, col) of the stored nonzeros, row-major.
    pub fn nonzero_pattern(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            let lo = i.saturating_sub(self.lower);
            let hi = (i + self.upper).min(self.n - 1);
            for j in lo..=hi {
                if self.data[self.slot(i, j)] != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Assembles M = B(x)B + alpha0 (B(x)A + A(x)B) of order q^2, where vec
/// stacking over the coefficient field is column-major, i.e.
/// vec(B U B^T) = (B(x)B) vec(U).
pub fn assemble_system(mass: &Array2<f64>, stiffness: &Array2<f64>, alpha0: f64) -> Result<BandMatrix> {
    let q = mass.nrows();
    if mass.ncols() != q || stiffness.nrows() != q || stiffness.ncols() != q {
        return Err(Error::Dimension(format!(
            "mass {:?} and stiffness {:?} must be square of equal order",
            mass.dim(),
            stiffness.dim()
        )));
    }
    if alpha0 < 0.0 {
        return Err(Error::Domain(format!("alpha0 must be nonnegative, got {alpha0}")));
    }
    let n = q * q;
    let bw = (3 * q + 1).min(n - 1);
    let mut m = BandMatrix::zeros(n, bw, bw);
    let reach = 3.min(q - 1);
    for outer_r in 0..q {
        let oc_lo = outer_r.saturating_sub(reach);
        let oc_hi = (outer_r + reach).min(q - 1);
        for inner_r in 0..q {
            let row = outer_r * q + inner_r;
            for outer_c in oc_lo..=oc_hi {
                let b_out = mass[[outer_r, outer_c]];
                let a_out = stiffness[[outer_r, outer_c]];
                let ic_lo = inner_r.saturating_sub(reach);
                let ic_hi = (inner_r + reach).min(q - 1);
                for inner_c in ic_lo..=ic_hi {
                    let b_in = mass[[inner_r, inner_c]];
                    let a_in = stiffness[[inner_r, inner_c]];
                    let v = b_out * b_in + alpha0 * (b_out * a_in + a_out * b_in);
                    if v != 0.0 {
                        m.set(row, outer_c * q + inner_c, v)?;
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Unpivoted Doolittle factorization confined to the band: L (unit
/// diagonal) in the sub-diagonal slots, U in the rest.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

/// Relative pivot threshold below which the factorization refuses to divide.
const PIVOT_TOL: f64 = 1e-13;

pub fn factorize(m: &BandMatrix) -> Result<BandLu> {
    let n = m.n;
    let (lower, upper) = (m.lower, m.upper);
    let scale = m.max_abs();
    let mut lu = BandLu {
        n,
        lower,
        upper,
        data: m.data.clone(),
    };
    let slot = |i: usize, j: usize| (lower + j - i) * n + j;
    for k in 0..n {
        let piv = lu.data[slot(k, k)];
        if piv.abs() < PIVOT_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularPivot {
                index: k,
                magnitude: piv.abs(),
            });
        }
        let i_hi = (k + lower).min(n - 1);
        let j_hi = (k + upper).min(n - 1);
        for i in k + 1..=i_hi {
            let mult = lu.data[slot(i, k)] / piv;
            lu.data[slot(i, k)] = mult;
            for j in k + 1..=j_hi {
                lu.data[slot(i, j)] -= mult * lu.data[slot(k, j)];
            }
        }
    }
    Ok(lu)
}

impl BandLu {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Forward/backward substitution within the band.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::Dimension(format!(
                "rhs length {} does not match order {}",
                rhs.len(),
                self.n
            )));
        }
        let n = self.n;
        let slot = |i: usize, j: usize| (self.lower + j - i) * n + j;
        let mut x = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(self.lower);
            let mut acc = x[i];
            for j in lo..i {
                acc -= self.data[slot(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + self.upper).min(n - 1);
            let mut acc = x[i];
            for j in i + 1..=hi {
                acc -= self.data[slot(i, j)] * x[j];
            }
            x[i] = acc / self.data[slot(i, i)];
        }
        Ok(x)
    }
}
