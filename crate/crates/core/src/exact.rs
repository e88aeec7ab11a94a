//! Dense matrices over exact rationals.
//!
//! Binary floating point values are dyadic rationals, so converting an `f64`
//! into a [`BigRational`] is lossless. Transformations by floating group
//! elements are therefore carried out exactly and all algebraic identities
//! (commutativity, linearity) hold with exact equality.

use std::fmt;

use nalgebra::DMatrix;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Lossless conversion of a finite `f64` into a rational.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn rational_from_i64(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Nearest `f64` to a rational.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: scale through the integer parts.
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Row-major matrix with exact rational entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigRational::one();
        }
        m
    }

    /// Builds a matrix from integer rows. Returns `None` for ragged input.
    pub fn from_integer_rows(rows: &[Vec<i64>]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        let data = rows.iter().flatten().map(|&v| rational_from_i64(v)).collect();
        Some(Self { rows: r, cols: c, data })
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Exact image of a float matrix. Fails on non-finite entries.
    pub fn from_f64(m: &DMatrix<f64>) -> Option<Self> {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.data[i * m.ncols() + j] = rational_from_f64(m[(i, j)])?;
            }
        }
        Some(out)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| rational_to_f64(self.get(i, j)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.data
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|v| v.is_integer())
    }

    /// Integer rows, if every entry is an integer that fits in `i64`.
    pub fn to_integer_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        let v = self.get(i, j);
                        if v.is_integer() {
                            v.to_integer().to_i64()
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Matrix product; `None` on dimension mismatch.
    pub fn mul(&self, rhs: &RatMatrix) -> Option<RatMatrix> {
        if self.cols != rhs.rows {
            return None;
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        Some(out)
    }

    pub fn add(&self, rhs: &RatMatrix) -> Option<RatMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return None;
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Some(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scaled(&self, c: &BigRational) -> RatMatrix {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// Exact determinant by Gaussian elimination over the rationals.
    pub fn det(&self) -> Option<BigRational> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = BigRational::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r * n + col].is_zero());
            let Some(p) = pivot else {
                return Some(BigRational::zero());
            };
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let pv = a[col * n + col].clone();
            det *= &pv;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &pv;
                for j in col..n {
                    let delta = &factor * &a[col * n + j];
                    a[r * n + j] -= delta;
                }
            }
        }
        Some(det)
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str("; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        f.write_str("]")
    }
}

/// Sign of a rational as -1, 0 or 1.
pub fn signum(x: &BigRational) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_conversion_is_lossless() {
        for &x in &[0.1, -3.75, 1e-300, 123456.789, f64::MIN_POSITIVE] {
            let r = rational_from_f64(x).unwrap();
            assert_eq!(rational_to_f64(&r), x);
        }
        assert!(rational_from_f64(f64::NAN).is_none());
    }

    #[test]
    fn det_of_integer_matrix() {
        let m = RatMatrix::from_integer_rows(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]).unwrap();
        assert_eq!(m.det().unwrap(), rational_from_i64(2 * (12 - 1) - (4)));
        let singular = RatMatrix::from_integer_rows(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert!(singular.det().unwrap().is_zero());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(RatMatrix::from_integer_rows(&[vec![1, 2], vec![3]]).is_none());
    }
}
