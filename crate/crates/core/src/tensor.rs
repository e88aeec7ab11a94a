//! Slice representation of `n × n × p` tensors and the p-, q-, r-transformations.
//!
//! For `T = (A₁; …; A_p)`:
//!
//! * p-transform by `P`: `A_i ↦ P·A_i`
//! * q-transform by `Q`: `A_i ↦ A_i·Q`
//! * r-transform by `R`: `A_i ↦ Σ_j R_ij A_j`
//!
//! Slices are stored exactly (rationals). Integer fixtures stay integer under
//! integer transforms; floating group elements are converted losslessly.

use nalgebra::DMatrix;
use num::{BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::{rational_to_f64, RatMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor must have at least one slice of positive size")]
    Empty,
    #[error("slice {index} is {rows}x{cols}, expected {n}x{n}")]
    SliceShape { index: usize, rows: usize, cols: usize, n: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("group element is not invertible")]
    Singular,
    #[error("group element violates {tag:?} constraint (det = {det})")]
    GroupConstraint { tag: GroupTag, det: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// An `n × n × p` tensor given by its `p` square slices.
#[derive(Clone, PartialEq, Eq)]
pub struct Tensor3 {
    n: usize,
    slices: Vec<RatMatrix>,
    label: Option<String>,
}

impl Tensor3 {
    pub fn new(slices: Vec<RatMatrix>, label: Option<String>) -> Result<Self, TensorError> {
        let n = slices.first().map(RatMatrix::rows).ok_or(TensorError::Empty)?;
        if n == 0 {
            return Err(TensorError::Empty);
        }
        for (index, s) in slices.iter().enumerate() {
            if s.rows() != n || s.cols() != n {
                return Err(TensorError::SliceShape { index, rows: s.rows(), cols: s.cols(), n });
            }
        }
        Ok(Self { n, slices, label })
    }

    /// Builds a tensor from `p` integer slices given row by row.
    pub fn from_integer_slices(slices: &[Vec<Vec<i64>>], label: Option<&str>) -> Result<Self, TensorError> {
        let mats = slices
            .iter()
            .enumerate()
            .map(|(index, rows)| {
                RatMatrix::from_integer_rows(rows).ok_or_else(|| TensorError::SliceShape {
                    index,
                    rows: rows.len(),
                    cols: 0,
                    n: rows.len(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(mats, label.map(str::to_owned))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.slices.len()
    }

    pub fn slices(&self) -> &[RatMatrix] {
        &self.slices
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn is_integer(&self) -> bool {
        self.slices.iter().all(RatMatrix::is_integer)
    }

    /// Integer slices, when every entry is an `i64` integer.
    pub fn integer_slices(&self) -> Option<Vec<Vec<Vec<i64>>>> {
        self.slices.iter().map(RatMatrix::to_integer_rows).collect()
    }

    /// `Σ x_i A_i` in floating point.
    pub fn combination(&self, x: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (xi, a) in x.iter().zip(&self.slices) {
            for i in 0..self.n {
                for j in 0..self.n {
                    out[(i, j)] += xi * rational_to_f64(a.get(i, j));
                }
            }
        }
        out
    }

    /// Slice-wise sum, used for linearity checks.
    pub fn add(&self, other: &Tensor3) -> Result<Tensor3, TensorError> {
        if self.n != other.n || self.p() != other.p() {
            return Err(TensorError::DimensionMismatch(format!(
                "{}x{}x{} + {}x{}x{}",
                self.n,
                self.n,
                self.p(),
                other.n,
                other.n,
                other.p()
            )));
        }
        let slices = self.slices.iter().zip(&other.slices).map(|(a, b)| a.add(b).expect("same shape")).collect();
        Ok(Tensor3 { n: self.n, slices, label: None })
    }
}

impl std::fmt::Debug for Tensor3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tensor3")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("p", &self.p())
            .field("slices", &self.slices)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum GroupTag {
    SL,
    GL,
}

/// A real invertible matrix tagged with the group it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: DMatrix<f64>,
    tag: GroupTag,
    det: f64,
}

const SL_DET_TOL: f64 = 1e-12;
const GL_DET_MIN: f64 = 1e-6;

impl GroupElement {
    pub fn new(matrix: DMatrix<f64>, tag: GroupTag) -> Result<Self, TensorError> {
        if !matrix.is_square() {
            return Err(TensorError::DimensionMismatch(format!(
                "group element must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        let det = matrix.determinant();
        let ok = match tag {
            GroupTag::SL => (det - 1.0).abs() <= SL_DET_TOL,
            GroupTag::GL => det.abs() >= GL_DET_MIN,
        };
        if !ok {
            return Err(TensorError::GroupConstraint { tag, det });
        }
        Ok(Self { matrix, tag, det })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim), tag: GroupTag::SL, det: 1.0 }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn condition_number(&self) -> f64 {
        condition_number(&self.matrix)
    }

    pub fn to_exact(&self) -> RatMatrix {
        RatMatrix::from_f64(&self.matrix).expect("finite entries checked at construction")
    }
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_invertible(m: &RatMatrix, expected: usize, what: &str) -> Result<(), TensorError> {
    if m.rows() != expected || m.cols() != expected {
        return Err(TensorError::DimensionMismatch(format!(
            "{what} must be {expected}x{expected}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    match m.det() {
        Some(d) if !d.is_zero() => Ok(()),
        _ => Err(TensorError::Singular),
    }
}

/// `A_i ↦ P·A_i` with an exact matrix.
pub fn p_transform_exact(t: &Tensor3, p: &RatMatrix) -> Result<Tensor3, TensorError> {
    check_invertible(p, t.n, "p-transform matrix")?;
    let slices = t.slices.iter().map(|a| p.mul(a).expect("checked dims")).collect();
    Ok(Tensor3 { n: t.n, slices, label: t.label.clone() })
}

/// `A_i ↦ A_i·Q` with an exact matrix.
pub fn q_transform_exact(t: &Tensor3, q: &RatMatrix) -> Result<Tensor3, TensorError> {
    check_invertible(q, t.n, "q-transform matrix")?;
    let slices = t.slices.iter().map(|a| a.mul(q).expect("checked dims")).collect();
    Ok(Tensor3 { n: t.n, slices, label: t.label.clone() })
}

/// `A_i ↦ Σ_j R_ij A_j` with an exact `p × p` matrix.
pub fn r_transform_exact(t: &Tensor3, r: &RatMatrix) -> Result<Tensor3, TensorError> {
    check_invertible(r, t.p(), "r-transform matrix")?;
    let slices = (0..t.p())
        .map(|i| {
            let mut acc = RatMatrix::zeros(t.n, t.n);
            for (j, a) in t.slices.iter().enumerate() {
                let rij: &BigRational = r.get(i, j);
                if !rij.is_zero() {
                    acc = acc.add(&a.scaled(rij)).expect("same shape");
                }
            }
            acc
        })
        .collect();
    Ok(Tensor3 { n: t.n, slices, label: t.label.clone() })
}

pub fn p_transform(t: &Tensor3, m: &GroupElement) -> Result<Tensor3, TensorError> {
    p_transform_exact(t, &m.to_exact())
}

pub fn q_transform(t: &Tensor3, m: &GroupElement) -> Result<Tensor3, TensorError> {
    q_transform_exact(t, &m.to_exact())
}

pub fn r_transform(t: &Tensor3, m: &GroupElement) -> Result<Tensor3, TensorError> {
    r_transform_exact(t, &m.to_exact())
}

/// Lower bound on `|det|` of the raw uniform draw before rescaling to SL.
const SL_RAW_DET_MIN: f64 = 0.1;

fn uniform_matrix(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..=1.0))
}

/// Random element of `SL(dim)`: uniform `[-1, 1]` entries, rejection of
/// near-singular draws, then rescaling to unit determinant. Deterministic per
/// seed; the condition number never exceeds `cond_cap`.
pub fn random_unimodular(dim: usize, seed: u64, cond_cap: f64) -> GroupElement {
    assert!(dim >= 2, "dimension must be at least 2");
    assert!(cond_cap > 1.0, "condition cap must exceed 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut m = uniform_matrix(&mut rng, dim);
        let det = m.determinant();
        if det.abs() < SL_RAW_DET_MIN {
            continue;
        }
        if det < 0.0 {
            m.row_mut(0).neg_mut();
        }
        m *= det.abs().powf(-1.0 / dim as f64);
        if condition_number(&m) > cond_cap {
            continue;
        }
        if let Ok(g) = GroupElement::new(m, GroupTag::SL) {
            return g;
        }
    }
}

/// Random element of `GL(dim)` with `|det| ≥ det_min` and condition number at
/// most `cond_cap`. Deterministic per seed.
pub fn random_invertible(dim: usize, seed: u64, det_min: f64, cond_cap: f64) -> GroupElement {
    assert!(dim >= 1, "dimension must be positive");
    assert!(det_min > 0.0, "det_min must be positive");
    assert!(cond_cap > 1.0, "condition cap must exceed 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = uniform_matrix(&mut rng, dim);
        let det = m.determinant();
        if det.abs() < det_min.max(GL_DET_MIN) || condition_number(&m) > cond_cap {
            continue;
        }
        if let Ok(g) = GroupElement::new(m, GroupTag::GL) {
            return g;
        }
    }
}
