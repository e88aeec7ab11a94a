//! Non-equivalence verdicts and orbit experiments.
//!
//! Agreement of invariants never proves equivalence, so the only positive
//! outcomes are `NotSLEquivalent` and `NotGLEquivalent`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detpoly::{det_poly, PolyError};
use crate::invariants::{fingerprint, FingerprintConfig, InvariantError, InvariantFingerprint};
use crate::surface::Census;
use crate::tensor::{p_transform, q_transform, r_transform, random_invertible, random_unimodular, Tensor3, TensorError};

/// Default relative tolerance for verdicts.
pub const DEFAULT_VERDICT_TOL: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EquivalenceError {
    #[error("volumes must be positive, got {0} and {1}")]
    NonPositiveVolume(f64, f64),
    #[error("fingerprints computed with incompatible methods: {0:?} vs {1:?}")]
    IncompatibleMethods(crate::quadrature::MethodTag, crate::quadrature::MethodTag),
    #[error("orbit count must be at least 1")]
    EmptyOrbit,
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    NotSLEquivalent,
    NotGLEquivalent,
    Inconclusive,
}

/// One invariant that differs between two fingerprints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub invariant: String,
    pub value1: f64,
    pub value2: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub evidence: Vec<Evidence>,
    /// Convexity and census disagreements; never grounds for a verdict.
    pub rough_evidence: Vec<String>,
}

/// Scale `c` with `f₂ = c·f₁∘R`, from the volumes: `(V₁/V₂)^{4/3}`.
pub fn estimate_scale_c(v1: f64, v2: f64) -> Result<f64, EquivalenceError> {
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(EquivalenceError::NonPositiveVolume(v1, v2));
    }
    Ok((v1 / v2).powf(4.0 / 3.0))
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn sign_pattern(c: &Census) -> (bool, bool, bool) {
    (c.k_plus > 0, c.k_minus > 0, c.k_zero > 0)
}

fn compatible(a: crate::quadrature::MethodTag, b: crate::quadrature::MethodTag) -> bool {
    a == b || (a.is_adaptive() && b.is_adaptive())
}

/// Decides non-equivalence from two fingerprints.
///
/// GL evidence (centro-affine area, or `a/√V`) takes precedence over SL
/// evidence (volume, affine area).
pub fn compare(
    fp1: &InvariantFingerprint,
    fp2: &InvariantFingerprint,
    rel_tol: f64,
) -> Result<Verdict, EquivalenceError> {
    if !compatible(fp1.method.tag, fp2.method.tag) {
        return Err(EquivalenceError::IncompatibleMethods(fp1.method.tag, fp2.method.tag));
    }
    let record = |name: &str, a: f64, b: f64| {
        (relative_gap(a, b) > rel_tol).then(|| Evidence { invariant: name.to_string(), value1: a, value2: b, tolerance: rel_tol })
    };
    let gl: Vec<Evidence> = [
        record("centro_affine_area", fp1.centro_affine_area, fp2.centro_affine_area),
        record("affine_area_over_sqrt_volume", fp1.affine_area / fp1.volume.sqrt(), fp2.affine_area / fp2.volume.sqrt()),
    ]
    .into_iter()
    .flatten()
    .collect();
    let sl: Vec<Evidence> = [
        record("volume", fp1.volume, fp2.volume),
        record("affine_area", fp1.affine_area, fp2.affine_area),
    ]
    .into_iter()
    .flatten()
    .collect();

    let mut rough = Vec::new();
    if fp1.convexity.is_convex() != fp2.convexity.is_convex() {
        let name = |c: bool| if c { "convex" } else { "non-convex" };
        rough.push(format!("convexity: {} vs {}", name(fp1.convexity.is_convex()), name(fp2.convexity.is_convex())));
    }
    if sign_pattern(&fp1.census) != sign_pattern(&fp2.census) {
        let c = |x: &Census| format!("({}, {}, {})", x.k_plus, x.k_minus, x.k_zero);
        rough.push(format!("census sign pattern: {} vs {}", c(&fp1.census), c(&fp2.census)));
    }

    let kind = if !gl.is_empty() {
        VerdictKind::NotGLEquivalent
    } else if !sl.is_empty() {
        VerdictKind::NotSLEquivalent
    } else {
        VerdictKind::Inconclusive
    };
    let mut evidence = gl;
    evidence.extend(sl);
    Ok(Verdict { kind, evidence, rough_evidence: rough })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitGroup {
    /// Random unimodular r-transforms.
    SL3,
    /// Random invertible r-transforms.
    GL3,
    /// Random unimodular p-, q- and r-transforms.
    SL4xSL4xSL3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTable {
    pub base_label: String,
    pub group: OrbitGroup,
    pub seed: u64,
    /// Row 0 is the untransformed tensor; labels are `"{base}-{k}"`.
    pub rows: Vec<InvariantFingerprint>,
}

/// SplitMix64 step, used to derive independent per-row seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn row_seed(seed: u64, row: usize, stream: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(row as u64)) ^ stream)
}

/// Applies the random transform of row `k` (`k ≥ 1`) to `t`.
pub fn orbit_member(t: &Tensor3, group: OrbitGroup, seed: u64, k: usize) -> Result<Tensor3, TensorError> {
    match group {
        OrbitGroup::SL3 => r_transform(t, &random_unimodular(t.p(), row_seed(seed, k, 0), 20.0)),
        OrbitGroup::GL3 => r_transform(t, &random_invertible(t.p(), row_seed(seed, k, 0), 0.1, 20.0)),
        OrbitGroup::SL4xSL4xSL3 => {
            let p = random_unimodular(t.n(), row_seed(seed, k, 1), 20.0);
            let q = random_unimodular(t.n(), row_seed(seed, k, 2), 20.0);
            let r = random_unimodular(t.p(), row_seed(seed, k, 3), 20.0);
            r_transform(&q_transform(&p_transform(t, &p)?, &q)?, &r)
        }
    }
}

/// Fingerprints of `t` and `count` random transforms of it.
pub fn orbit_table(
    t: &Tensor3,
    group: OrbitGroup,
    count: usize,
    seed: u64,
    config: &FingerprintConfig,
) -> Result<OrbitTable, EquivalenceError> {
    if count < 1 {
        return Err(EquivalenceError::EmptyOrbit);
    }
    let base = t.label().unwrap_or("T").to_string();
    let rows = (0..=count)
        .into_par_iter()
        .map(|k| -> Result<InvariantFingerprint, EquivalenceError> {
            let member = if k == 0 { t.clone() } else { orbit_member(t, group, seed, k)? };
            let f = det_poly(&member)?;
            Ok(fingerprint(&f, &format!("{base}-{k}"), config)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OrbitTable { base_label: base, group, seed, rows })
}
