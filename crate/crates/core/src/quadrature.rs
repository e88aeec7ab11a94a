//! Integration backends over the `(s, t)` rectangle and the unit sphere.
//!
//! * [`integrate_adaptive`]: globally adaptive tensor-product Gauss–Kronrod
//!   (7/15 points per axis) with a priority queue of cells.
//! * [`integrate_mc`]: plain pseudo-random sampling, chunked over
//!   independent ChaCha streams.
//! * [`integrate_design`]: equal-weight quadrature on a spherical t-design.
//!
//! Every backend is deterministic for fixed inputs, independent of the rayon
//! thread count: work is split into fixed-size pieces and reduced in index
//! order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("relative tolerance {0} outside [1e-12, 1e-2]")]
    InvalidTolerance(f64),
    #[error("at least 1000 Monte Carlo samples required, got {0}")]
    TooFewSamples(usize),
    #[error("accuracy not reached after {evaluations} evaluations: best estimate {value} ± {error_estimate}")]
    AccuracyNotReached { value: f64, error_estimate: f64, evaluations: u64 },
    #[error("integrand is not finite at ({s}, {t})")]
    NonFinite { s: f64, t: f64 },
    #[error("design file holds {0} numbers, not a multiple of 3")]
    DesignFormat(usize),
    #[error("design file token {index} is not a number: {token:?}")]
    DesignParse { index: usize, token: String },
    #[error("design point {index} has norm {norm}, too far from 1")]
    DesignNotUnit { index: usize, norm: f64 },
    #[error("design fails exactness for x^{}y^{}z^{}: average {got}, expected {expected}", .exponent[0], .exponent[1], .exponent[2])]
    DesignExactness { exponent: [u32; 3], got: f64, expected: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MethodTag {
    AdaptiveG5,
    AdaptiveG7,
    MonteCarlo,
    DesignT,
}

impl MethodTag {
    /// Tag for an adaptive run at the given relative tolerance.
    pub fn adaptive_for(rel_tol: f64) -> Self {
        if rel_tol <= 1e-6 {
            MethodTag::AdaptiveG7
        } else {
            MethodTag::AdaptiveG5
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, MethodTag::AdaptiveG5 | MethodTag::AdaptiveG7)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub method_tag: MethodTag,
}

/// Axis-aligned rectangle `[s0, s1] × [t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub s0: f64,
    pub s1: f64,
    pub t0: f64,
    pub t1: f64,
}

impl Rect {
    pub fn new(s0: f64, s1: f64, t0: f64, t1: f64) -> Self {
        Self { s0, s1, t0, t1 }
    }

    /// `[0, π] × [0, 2π]`, the full spherical parameter domain.
    pub fn sphere() -> Self {
        Self::new(0.0, PI, 0.0, 2.0 * PI)
    }

    pub fn area(&self) -> f64 {
        (self.s1 - self.s0) * (self.t1 - self.t0)
    }

    fn split_s(&self) -> (Rect, Rect) {
        let m = 0.5 * (self.s0 + self.s1);
        (Rect { s1: m, ..*self }, Rect { s0: m, ..*self })
    }

    fn split_t(&self) -> (Rect, Rect) {
        let m = 0.5 * (self.t0 + self.t1);
        (Rect { t1: m, ..*self }, Rect { t0: m, ..*self })
    }
}

// Kronrod 15-point abscissae (non-negative half) and weights; Gauss 7-point
// weights at the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Nodes on [-1, 1] with Kronrod and Gauss weights (Gauss weight 0 off-grid).
fn rule_15() -> ([f64; 15], [f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for k in 0..7 {
        x[k] = -XGK[k];
        x[14 - k] = XGK[k];
        wk[k] = WGK[k];
        wk[14 - k] = WGK[k];
        if k % 2 == 1 {
            wg[k] = WG[k / 2];
            wg[14 - k] = WG[k / 2];
        }
    }
    x[7] = 0.0;
    wk[7] = WGK[7];
    wg[7] = WG[3];
    (x, wk, wg)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    rect: Rect,
    value: f64,
    error: f64,
    split_s: bool,
}

fn eval_cell<G: Fn(f64, f64) -> f64 + Sync>(g: &G, rect: Rect) -> Result<Cell, QuadratureError> {
    let (x, wk, wg) = rule_15();
    let (hs, ht) = (0.5 * (rect.s1 - rect.s0), 0.5 * (rect.t1 - rect.t0));
    let (cs, ct) = (0.5 * (rect.s1 + rect.s0), 0.5 * (rect.t1 + rect.t0));
    let mut vals = [[0.0; 15]; 15];
    for i in 0..15 {
        let s = cs + hs * x[i];
        for j in 0..15 {
            let t = ct + ht * x[j];
            let v = g(s, t);
            if !v.is_finite() {
                return Err(QuadratureError::NonFinite { s, t });
            }
            vals[i][j] = v;
        }
    }
    let quad = |ws: &[f64; 15], wt: &[f64; 15]| -> f64 {
        let mut acc = 0.0;
        for i in 0..15 {
            if ws[i] == 0.0 {
                continue;
            }
            let row: f64 = (0..15).map(|j| wt[j] * vals[i][j]).sum();
            acc += ws[i] * row;
        }
        acc * hs * ht
    };
    let kk = quad(&wk, &wk);
    let gg = quad(&wg, &wg);
    let gk = quad(&wg, &wk);
    let kg = quad(&wk, &wg);
    Ok(Cell { rect, value: kk, error: (kk - gg).abs(), split_s: (kk - gk).abs() >= (kk - kg).abs() })
}

/// Knobs of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_cells: usize,
    /// Initial uniform subdivision in `(s, t)`.
    pub initial: (usize, usize),
    /// Cells refined per step; fixed so results do not depend on thread count.
    pub batch: usize,
}

impl AdaptiveOptions {
    pub fn new(rel_tol: f64) -> Self {
        Self { rel_tol, abs_tol: 1e-14, max_cells: 400_000, initial: (4, 8), batch: 32 }
    }
}

#[derive(PartialEq)]
struct Keyed(f64, usize);

impl Eq for Keyed {}

impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Adaptive integral of `g` over `rect` to relative tolerance `rel_tol`.
pub fn integrate_adaptive<G>(g: G, rect: Rect, rel_tol: f64) -> Result<QuadratureResult, QuadratureError>
where
    G: Fn(f64, f64) -> f64 + Sync,
{
    integrate_adaptive_with(g, rect, &AdaptiveOptions::new(rel_tol))
}

pub fn integrate_adaptive_with<G>(g: G, rect: Rect, opts: &AdaptiveOptions) -> Result<QuadratureResult, QuadratureError>
where
    G: Fn(f64, f64) -> f64 + Sync,
{
    if !(1e-12..=1e-2).contains(&opts.rel_tol) {
        return Err(QuadratureError::InvalidTolerance(opts.rel_tol));
    }
    let (ns, nt) = (opts.initial.0.max(1), opts.initial.1.max(1));
    let ds = (rect.s1 - rect.s0) / ns as f64;
    let dt = (rect.t1 - rect.t0) / nt as f64;
    let initial: Vec<Rect> = (0..ns * nt)
        .map(|k| {
            let (i, j) = (k / nt, k % nt);
            Rect::new(
                rect.s0 + ds * i as f64,
                if i + 1 == ns { rect.s1 } else { rect.s0 + ds * (i + 1) as f64 },
                rect.t0 + dt * j as f64,
                if j + 1 == nt { rect.t1 } else { rect.t0 + dt * (j + 1) as f64 },
            )
        })
        .collect();
    let mut cells: Vec<Option<Cell>> =
        initial.into_par_iter().map(|r| eval_cell(&g, r)).collect::<Result<Vec<_>, _>>()?.into_iter().map(Some).collect();
    let mut heap: BinaryHeap<Keyed> = cells.iter().enumerate().map(|(k, c)| Keyed(c.unwrap().error, k)).collect();
    let mut evaluations = 225 * cells.len() as u64;
    let mut active = cells.len();
    let tag = MethodTag::adaptive_for(opts.rel_tol);

    loop {
        let (value, error) = cells.iter().flatten().fold((0.0, 0.0), |(v, e), c| (v + c.value, e + c.error));
        if error <= (opts.rel_tol * value.abs()).max(opts.abs_tol) {
            return Ok(QuadratureResult { value, error_estimate: error, evaluations, method_tag: tag });
        }
        if active + opts.batch > opts.max_cells {
            return Err(QuadratureError::AccuracyNotReached { value, error_estimate: error, evaluations });
        }
        let mut children = Vec::with_capacity(2 * opts.batch);
        for _ in 0..opts.batch {
            let Some(Keyed(_, k)) = heap.pop() else { break };
            let c = cells[k].take().expect("live cell");
            let (a, b) = if c.split_s { c.rect.split_s() } else { c.rect.split_t() };
            children.push(a);
            children.push(b);
            active -= 1;
        }
        let evaluated = children.into_par_iter().map(|r| eval_cell(&g, r)).collect::<Result<Vec<_>, _>>()?;
        evaluations += 225 * evaluated.len() as u64;
        for c in evaluated {
            heap.push(Keyed(c.error, cells.len()));
            cells.push(Some(c));
            active += 1;
        }
    }
}

const MC_CHUNK: usize = 1 << 16;

/// Monte Carlo integral with `samples` uniform points; the error estimate is
/// one standard error.
pub fn integrate_mc<G>(g: G, rect: Rect, samples: usize, seed: u64) -> Result<QuadratureResult, QuadratureError>
where
    G: Fn(f64, f64) -> f64 + Sync,
{
    if samples < 1000 {
        return Err(QuadratureError::TooFewSamples(samples));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = MC_CHUNK.min(samples - c * MC_CHUNK);
            let (mut sum, mut sq) = (0.0, 0.0);
            for _ in 0..n {
                let s = rect.s0 + (rect.s1 - rect.s0) * rng.random::<f64>();
                let t = rect.t0 + (rect.t1 - rect.t0) * rng.random::<f64>();
                let v = g(s, t);
                if !v.is_finite() {
                    return Err(QuadratureError::NonFinite { s, t });
                }
                sum += v;
                sq += v * v;
            }
            Ok((sum, sq))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (sum, sq) = partial.iter().fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let area = rect.area();
    Ok(QuadratureResult {
        value: area * mean,
        error_estimate: area * (var / n).sqrt(),
        evaluations: samples as u64,
        method_tag: MethodTag::MonteCarlo,
    })
}

/// Spherical t-design: `points` reproduce sphere averages of all
/// polynomials of degree at most `strength`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub points: Vec<[f64; 3]>,
    pub strength: u32,
    pub source_name: String,
}

/// Tolerance on each monomial average when validating a design.
pub const DESIGN_EXACTNESS_TOL: f64 = 1e-10;

fn odd_double_factorial(k: u32) -> f64 {
    // (k - 1)!! for even k
    (1..k).step_by(2).map(|v| v as f64).product()
}

/// Exact average of `x^a y^b z^c` over the unit sphere.
pub fn sphere_monomial_average(e: [u32; 3]) -> f64 {
    if e.iter().any(|v| v % 2 == 1) {
        return 0.0;
    }
    let num = odd_double_factorial(e[0]) * odd_double_factorial(e[1]) * odd_double_factorial(e[2]);
    let total = e[0] + e[1] + e[2];
    // (total + 1)!!
    let den: f64 = (1..=total + 1).step_by(2).map(|v| v as f64).product();
    num / den
}

/// Parses whitespace-separated coordinates, 3 per point, and validates the
/// design against every monomial up to `strength`.
pub fn load_design(raw: &str, strength: u32, source_name: &str) -> Result<Design, QuadratureError> {
    let numbers: Vec<f64> = raw
        .split_whitespace()
        .enumerate()
        .map(|(index, tok)| tok.parse::<f64>().map_err(|_| QuadratureError::DesignParse { index, token: tok.to_string() }))
        .collect::<Result<_, _>>()?;
    if numbers.is_empty() || numbers.len() % 3 != 0 {
        return Err(QuadratureError::DesignFormat(numbers.len()));
    }
    let mut points = Vec::with_capacity(numbers.len() / 3);
    for (index, c) in numbers.chunks_exact(3).enumerate() {
        let v = Vector3::new(c[0], c[1], c[2]);
        let norm = v.norm();
        if !((norm - 1.0).abs() <= 1e-6) {
            return Err(QuadratureError::DesignNotUnit { index, norm });
        }
        points.push((v / norm).into());
    }
    let design = Design { points, strength, source_name: source_name.to_string() };
    design.check_exactness()?;
    Ok(design)
}

impl Design {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Compares design averages of all monomials of degree ≤ strength with
    /// the exact sphere averages.
    pub fn check_exactness(&self) -> Result<(), QuadratureError> {
        let d = self.strength as usize;
        let n = self.points.len() as f64;
        let pows: Vec<[Vec<f64>; 3]> = self
            .points
            .iter()
            .map(|p| {
                std::array::from_fn(|k| {
                    let mut v = vec![1.0; d + 1];
                    for e in 1..=d {
                        v[e] = v[e - 1] * p[k];
                    }
                    v
                })
            })
            .collect();
        for total in 0..=self.strength {
            for a in 0..=total {
                for b in 0..=total - a {
                    let e = [a, b, total - a - b];
                    let got = pows.iter().map(|p| p[0][e[0] as usize] * p[1][e[1] as usize] * p[2][e[2] as usize]).sum::<f64>() / n;
                    let expected = sphere_monomial_average(e);
                    if !((got - expected).abs() <= DESIGN_EXACTNESS_TOL) {
                        return Err(QuadratureError::DesignExactness { exponent: e, got, expected });
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(4π/N) Σ h(uᵢ)` over the design points.
pub fn integrate_design<H>(h: H, design: &Design) -> Result<QuadratureResult, QuadratureError>
where
    H: Fn(&Vector3<f64>) -> f64 + Sync,
{
    let values: Vec<f64> = design.points.par_iter().map(|p| h(&Vector3::from(*p))).collect();
    if let Some((k, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        let p = Vector3::from(design.points[k]);
        let (s, t) = crate::surface::parameters_of(&p);
        return Err(QuadratureError::NonFinite { s, t });
    }
    let sum: f64 = values.iter().sum();
    Ok(QuadratureResult {
        value: 4.0 * PI * sum / values.len() as f64,
        error_estimate: 0.0,
        evaluations: values.len() as u64,
        method_tag: MethodTag::DesignT,
    })
}

/// Vertices of the regular octahedron, a spherical 3-design.
pub fn octahedron() -> Vec<[f64; 3]> {
    vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]
}

/// Vertices of the regular icosahedron on the unit sphere, a 5-design.
pub fn icosahedron() -> Vec<[f64; 3]> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let norm = (1.0 + phi * phi).sqrt();
    let mut v = Vec::with_capacity(12);
    for a in [-1.0, 1.0] {
        for b in [-phi, phi] {
            v.push([0.0, a / norm, b / norm]);
            v.push([a / norm, b / norm, 0.0]);
            v.push([b / norm, 0.0, a / norm]);
        }
    }
    v
}

/// Writes points in the design file layout, one point per line.
pub fn design_text(points: &[[f64; 3]]) -> String {
    points.iter().map(|p| format!("{:.17e} {:.17e} {:.17e}\n", p[0], p[1], p[2])).collect()
}
