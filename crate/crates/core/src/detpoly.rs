//! Exact determinant polynomials `f_T(x) = det(x₁A₁ + x₂A₂ + x₃A₃)`.
//!
//! Coefficients are exact rationals. A float copy of the term list is kept
//! alongside for fast evaluation of values, gradients and Hessians, which is
//! all the differential geometry downstream needs.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

use crate::exact::{rational_from_f64, rational_to_f64, RatMatrix};
use crate::tensor::Tensor3;

/// Exponents of `(x, y, z)` in a monomial.
pub type Exponent = [u32; 3];

type SparsePoly = BTreeMap<Exponent, BigRational>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("determinant polynomial backend supports p = 3 only, got p = {0}")]
    UnsupportedSlices(usize),
    #[error("monomial {exponent:?} does not have degree {degree}")]
    DegreeMismatch { exponent: Exponent, degree: u32 },
    #[error("substitution matrix must be 3x3 and invertible")]
    Singular,
    #[error("scale factor must be nonzero and finite")]
    BadScale,
    #[error("non-finite value in input")]
    NonFinite,
}

/// A homogeneous polynomial in `(x, y, z)` with exact rational coefficients.
#[derive(Clone)]
pub struct HomogeneousPolynomial {
    degree: u32,
    coeffs: SparsePoly,
    sign_normalized: bool,
    terms: Vec<(Exponent, f64)>,
}

impl PartialEq for HomogeneousPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.coeffs == other.coeffs
    }
}

impl Eq for HomogeneousPolynomial {}

/// Value, gradient and Hessian of a polynomial at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyJet {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

/// Outcome of the sphere-sampling definiteness test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Definiteness {
    PositiveDefinite,
    NegativeDefinite,
    /// `witness` is a unit direction whose sign differs from the probe sign.
    Indefinite { witness: [f64; 3] },
    /// The smallest `|f|` found was below the floor.
    Inconclusive { min_abs: f64, location: [f64; 3] },
}

impl Definiteness {
    pub fn is_definite(&self) -> bool {
        matches!(self, Definiteness::PositiveDefinite | Definiteness::NegativeDefinite)
    }
}

/// Relative floor separating definite forms from forms with real zeros.
pub const DEFINITENESS_FLOOR: f64 = 1e-9;

fn degree_of(e: &Exponent) -> u32 {
    e[0] + e[1] + e[2]
}

fn add_term(p: &mut SparsePoly, e: Exponent, c: BigRational) {
    if c.is_zero() {
        return;
    }
    let remove = {
        let slot = p.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        slot.is_zero()
    };
    if remove {
        p.remove(&e);
    }
}

fn poly_mul(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    let mut out = SparsePoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            add_term(&mut out, [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
        }
    }
    out
}

fn poly_add_assign(a: &mut SparsePoly, b: &SparsePoly, sign: i32) {
    for (e, c) in b {
        add_term(a, *e, if sign < 0 { -c.clone() } else { c.clone() });
    }
}

/// Unit direction for spherical parameters `(s, t)`.
pub fn sphere_direction(s: f64, t: f64) -> Vector3<f64> {
    let (ss, cs) = s.sin_cos();
    let (st, ct) = t.sin_cos();
    Vector3::new(ss * ct, ss * st, cs)
}

impl HomogeneousPolynomial {
    /// Builds a polynomial, merging repeated monomials and dropping zeros.
    pub fn new(degree: u32, terms: impl IntoIterator<Item = (Exponent, BigRational)>) -> Result<Self, PolyError> {
        let mut coeffs = SparsePoly::new();
        for (e, c) in terms {
            if degree_of(&e) != degree {
                return Err(PolyError::DegreeMismatch { exponent: e, degree });
            }
            add_term(&mut coeffs, e, c);
        }
        Ok(Self::from_sparse(degree, coeffs, false))
    }

    pub fn from_integer_terms(degree: u32, terms: &[(Exponent, i64)]) -> Result<Self, PolyError> {
        Self::new(degree, terms.iter().map(|&(e, c)| (e, BigRational::from_integer(c.into()))))
    }

    fn from_sparse(degree: u32, coeffs: SparsePoly, sign_normalized: bool) -> Self {
        let terms = coeffs.iter().map(|(e, c)| (*e, rational_to_f64(c))).collect();
        Self { degree, coeffs, sign_normalized, terms }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficients(&self) -> &BTreeMap<Exponent, BigRational> {
        &self.coeffs
    }

    pub fn coefficient(&self, e: Exponent) -> BigRational {
        self.coeffs.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Whether this polynomial was negated to make it positive at the probe.
    pub fn was_sign_normalized(&self) -> bool {
        self.sign_normalized
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &Vector3<f64>) -> f64 {
        let d = self.degree as usize;
        let (px, py, pz) = (powers(x[0], d), powers(x[1], d), powers(x[2], d));
        self.terms.iter().map(|(e, c)| c * px[e[0] as usize] * py[e[1] as usize] * pz[e[2] as usize]).sum()
    }

    pub fn eval_exact(&self, x: &[BigRational; 3]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.coeffs {
            let mut term = c.clone();
            for k in 0..3 {
                for _ in 0..e[k] {
                    term *= &x[k];
                }
            }
            acc += term;
        }
        acc
    }

    /// Value, exact-derivative gradient and Hessian at `x`.
    pub fn jet(&self, x: &Vector3<f64>) -> PolyJet {
        let d = self.degree as usize;
        let p = [powers(x[0], d), powers(x[1], d), powers(x[2], d)];
        let mut value = 0.0;
        let mut g = Vector3::zeros();
        let mut h = Matrix3::zeros();
        for (e, c) in &self.terms {
            let e = [e[0] as usize, e[1] as usize, e[2] as usize];
            let base = [p[0][e[0]], p[1][e[1]], p[2][e[2]]];
            value += c * base[0] * base[1] * base[2];
            // d/dx_i and d²/dx_i dx_j via lowered powers
            let lower = |k: usize, by: usize| -> f64 {
                if e[k] < by {
                    0.0
                } else {
                    p[k][e[k] - by]
                }
            };
            for i in 0..3 {
                if e[i] == 0 {
                    continue;
                }
                let others: f64 = (0..3).filter(|&k| k != i).map(|k| base[k]).product();
                g[i] += c * e[i] as f64 * lower(i, 1) * others;
                if e[i] >= 2 {
                    h[(i, i)] += c * (e[i] * (e[i] - 1)) as f64 * lower(i, 2) * others;
                }
                for j in (i + 1)..3 {
                    if e[j] == 0 {
                        continue;
                    }
                    let k = 3 - i - j;
                    let v = c * (e[i] * e[j]) as f64 * lower(i, 1) * lower(j, 1) * base[k];
                    h[(i, j)] += v;
                    h[(j, i)] += v;
                }
            }
        }
        PolyJet { value, gradient: g, hessian: h }
    }

    /// `x ↦ f(x·R)` for a real `3 × 3` matrix (exact conversion of entries).
    pub fn substitute_linear(&self, r: &Matrix3<f64>) -> Result<Self, PolyError> {
        let rows: Option<Vec<Vec<BigRational>>> =
            (0..3).map(|i| (0..3).map(|j| rational_from_f64(r[(i, j)])).collect()).collect();
        let m = RatMatrix::from_rows(rows.ok_or(PolyError::NonFinite)?).expect("3x3");
        self.substitute_linear_exact(&m)
    }

    /// `x ↦ f(x·R)` with exact coefficients.
    pub fn substitute_linear_exact(&self, r: &RatMatrix) -> Result<Self, PolyError> {
        if r.rows() != 3 || r.cols() != 3 || r.det().map_or(true, |d| d.is_zero()) {
            return Err(PolyError::Singular);
        }
        // variable j becomes Σ_i R_ij x_i
        let linear: Vec<SparsePoly> = (0..3)
            .map(|j| {
                let mut p = SparsePoly::new();
                for i in 0..3 {
                    let mut e = [0; 3];
                    e[i] = 1;
                    add_term(&mut p, e, r.get(i, j).clone());
                }
                p
            })
            .collect();
        let d = self.degree as usize;
        let pow: Vec<Vec<SparsePoly>> = linear
            .iter()
            .map(|l| {
                let mut v = vec![SparsePoly::from([([0, 0, 0], BigRational::one())])];
                for k in 1..=d {
                    let next = poly_mul(&v[k - 1], l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = SparsePoly::new();
        for (e, c) in &self.coeffs {
            let prod = poly_mul(&poly_mul(&pow[0][e[0] as usize], &pow[1][e[1] as usize]), &pow[2][e[2] as usize]);
            for (pe, pc) in prod {
                add_term(&mut out, pe, pc * c);
            }
        }
        Ok(Self::from_sparse(self.degree, out, self.sign_normalized))
    }

    /// Multiplies every coefficient by `c` (exact image of the float).
    pub fn scale(&self, c: f64) -> Result<Self, PolyError> {
        if c == 0.0 || !c.is_finite() {
            return Err(PolyError::BadScale);
        }
        self.scale_exact(&rational_from_f64(c).expect("finite"))
    }

    pub fn scale_exact(&self, c: &BigRational) -> Result<Self, PolyError> {
        if c.is_zero() {
            return Err(PolyError::BadScale);
        }
        let coeffs = self.coeffs.iter().map(|(e, v)| (*e, v * c)).collect();
        Ok(Self::from_sparse(self.degree, coeffs, self.sign_normalized))
    }

    pub fn negated(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(e, v)| (*e, -v.clone())).collect();
        Self::from_sparse(self.degree, coeffs, !self.sign_normalized)
    }

    /// Sign at `(1, 0, 0)`, or at the first grid direction where `f ≠ 0`.
    fn probe_sign(&self) -> i32 {
        let probe = Vector3::new(1.0, 0.0, 0.0);
        let v = self.eval(&probe);
        if v != 0.0 {
            return if v > 0.0 { 1 } else { -1 };
        }
        for u in sphere_grid(16) {
            let v = self.eval(&u);
            if v != 0.0 {
                return if v > 0.0 { 1 } else { -1 };
            }
        }
        0
    }

    /// Representative that is positive at the probe direction.
    pub fn normalize_sign(&self) -> Self {
        if self.probe_sign() < 0 {
            let mut g = self.negated();
            g.sign_normalized = true;
            g
        } else {
            self.clone()
        }
    }

    /// Decides definiteness by sampling an `(s, t)` grid on the unit sphere
    /// (`resolution × 2·resolution` plus both poles) and polishing the lowest
    /// samples by local compass search.
    pub fn definiteness(&self, resolution: usize) -> Definiteness {
        assert!(resolution >= 8, "resolution must be at least 8");
        let sign = self.probe_sign();
        let origin = [1.0, 0.0, 0.0];
        if sign == 0 {
            return Definiteness::Inconclusive { min_abs: 0.0, location: origin };
        }
        let sign = sign as f64;
        let floor = DEFINITENESS_FLOOR * self.max_abs_coefficient();
        let signed = |s: f64, t: f64| sign * self.eval(&sphere_direction(s, t));

        let ns = resolution;
        let nt = 2 * resolution;
        let mut samples: Vec<(f64, f64, f64)> = Vec::with_capacity(ns * nt + 2);
        samples.push((signed(0.0, 0.0), 0.0, 0.0));
        samples.push((signed(PI, 0.0), PI, 0.0));
        for i in 0..ns {
            let s = PI * (i as f64 + 0.5) / ns as f64;
            for j in 0..nt {
                let t = 2.0 * PI * j as f64 / nt as f64;
                samples.push((signed(s, t), s, t));
            }
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));

        let step0 = PI / ns as f64;
        let mut best = samples[0];
        for &(v, s, t) in samples.iter().take(8) {
            let refined = compass_minimize(&signed, (v, s, t), step0);
            if refined.0 < best.0 {
                best = refined;
            }
        }
        let (min_v, s, t) = best;
        let location: [f64; 3] = sphere_direction(s, t).into();
        if min_v < -floor {
            Definiteness::Indefinite { witness: location }
        } else if min_v > floor {
            if sign > 0.0 {
                Definiteness::PositiveDefinite
            } else {
                Definiteness::NegativeDefinite
            }
        } else {
            Definiteness::Inconclusive { min_abs: min_v.abs(), location }
        }
    }
}

fn powers(x: f64, d: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(d + 1);
    let mut acc = 1.0;
    for _ in 0..=d {
        v.push(acc);
        acc *= x;
    }
    v
}

fn sphere_grid(res: usize) -> impl Iterator<Item = Vector3<f64>> {
    (0..res).flat_map(move |i| {
        let s = PI * (i as f64 + 0.5) / res as f64;
        (0..2 * res).map(move |j| sphere_direction(s, PI * j as f64 / res as f64))
    })
}

fn compass_minimize(g: &impl Fn(f64, f64) -> f64, start: (f64, f64, f64), step0: f64) -> (f64, f64, f64) {
    let (mut v, mut s, mut t) = start;
    let mut step = step0;
    let mut iters = 0;
    while step > 1e-10 && iters < 2000 {
        iters += 1;
        let mut moved = false;
        for (ds, dt) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (s2, t2) = (s + ds, t + dt);
            let v2 = g(s2, t2);
            if v2 < v {
                (v, s, t) = (v2, s2, t2);
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (v, s, t)
}

/// Determinant polynomial of a tensor with three slices.
pub fn det_poly(t: &Tensor3) -> Result<HomogeneousPolynomial, PolyError> {
    if t.p() != 3 {
        return Err(PolyError::UnsupportedSlices(t.p()));
    }
    let n = t.n();
    // entry (i, j) of x·A₁ + y·A₂ + z·A₃ as a linear form
    let entries: Vec<Vec<SparsePoly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut p = SparsePoly::new();
                    for (k, a) in t.slices().iter().enumerate() {
                        let mut e = [0; 3];
                        e[k] = 1;
                        add_term(&mut p, e, a.get(i, j).clone());
                    }
                    p
                })
                .collect()
        })
        .collect();
    let mut memo = HashMap::new();
    let full_mask = (1u64 << n) - 1;
    let det = laplace(&entries, 0, full_mask, &mut memo);
    Ok(HomogeneousPolynomial::from_sparse(n as u32, det, false))
}

/// Cofactor expansion along rows, memoised on the set of remaining columns.
fn laplace(m: &[Vec<SparsePoly>], row: usize, cols: u64, memo: &mut HashMap<u64, SparsePoly>) -> SparsePoly {
    if row == m.len() {
        return SparsePoly::from([([0, 0, 0], BigRational::one())]);
    }
    if let Some(p) = memo.get(&cols) {
        return p.clone();
    }
    let mut acc = SparsePoly::new();
    let mut position = 0;
    for j in 0..m.len() {
        if cols & (1 << j) == 0 {
            continue;
        }
        if !m[row][j].is_empty() {
            let minor = laplace(m, row + 1, cols & !(1 << j), memo);
            if !minor.is_empty() {
                let term = poly_mul(&m[row][j], &minor);
                poly_add_assign(&mut acc, &term, if position % 2 == 0 { 1 } else { -1 });
            }
        }
        position += 1;
    }
    memo.insert(cols, acc.clone());
    acc
}

impl fmt::Display for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        // descending in x, then y
        for (e, c) in self.coeffs.iter().rev() {
            let negative = c.is_negative();
            let mag = c.abs();
            if first {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            first = false;
            let monomial: String = ["x", "y", "z"]
                .iter()
                .zip(e)
                .filter(|(_, &p)| p > 0)
                .map(|(v, &p)| if p == 1 { v.to_string() } else { format!("{v}^{p}") })
                .collect();
            if monomial.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                f.write_str(&monomial)?;
            } else if mag.is_integer() {
                write!(f, "{mag}{monomial}")?;
            } else {
                write!(f, "({mag}){monomial}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for HomogeneousPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomogeneousPolynomial(deg {}: {})", self.degree, self)
    }
}
