//! Dense matrices over exact rational numbers.
//!
//! The basis and operator matrices are assembled here without rounding;
//! entries like 245 or 46/7 arise from cancellations that lose digits in
//! floating point already around degree 10. Conversion to `f64` happens
//! once, after construction.

use ndarray::Array2;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Builds `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer `n` as an exact rational.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Row-major dense matrix with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c] = v;
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(r, c).clone();
                    out.set(r, c, cur + a * b);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    /// Columns `from..to` as a new matrix.
    pub fn column_slice(&self, from: usize, to: usize) -> Self {
        assert!(from <= to && to <= self.cols);
        Self::from_fn(self.rows, to - from, |r, c| self.get(r, from + c).clone())
    }

    pub fn row_sum(&self, r: usize) -> Rational {
        (0..self.cols).map(|c| self.get(r, c)).sum()
    }

    pub fn col_sum(&self, c: usize) -> Rational {
        (0..self.rows).map(|r| self.get(r, c)).sum()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * s)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) + other.get(r, c))
    }

    pub fn max_abs_f64(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    /// Rounds every entry to `f64`.
    pub fn to_f64(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.rows, self.cols), |(r, c)| {
            self.get(r, c).to_f64().expect("rational representable as f64")
        })
    }

    /// Row-major CSV with exact `p/q` entries, one row per line, LF-terminated.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_against_identity() {
        let m = RationalMatrix::from_fn(2, 3, |r, c| rat((r * 3 + c) as i64, 7));
        let id = RationalMatrix::identity(3);
        assert_eq!(m.matmul(&id), m);
    }

    #[test]
    fn csv_uses_reduced_fractions() {
        let mut m = RationalMatrix::zeros(1, 3);
        m.set(0, 0, rat(4, 7));
        m.set(0, 1, rat(-43, 1));
        m.set(0, 2, rat(6, 4));
        assert_eq!(m.to_csv(), "4/7,-43,3/2\n");
    }

    #[test]
    fn f64_conversion() {
        let m = RationalMatrix::from_fn(1, 2, |_, c| rat(1, (c + 2) as i64));
        let f = m.to_f64();
        assert_eq!(f[[0, 0]], 0.5);
        assert!((f[[0, 1]] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn column_slice_and_sums() {
        let m = RationalMatrix::from_fn(2, 4, |r, c| rat_int((r + c) as i64));
        let s = m.column_slice(1, 3);
        assert_eq!(s.cols(), 2);
        assert_eq!(*s.get(1, 0), rat_int(2));
        assert_eq!(m.row_sum(0), rat_int(6));
        assert_eq!(m.col_sum(3), rat_int(7));
    }
}
