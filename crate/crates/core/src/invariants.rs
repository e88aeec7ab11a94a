//! Volume, affine surface area and centro-affine surface area of the body
//! `{f ≤ 1}`.
//!
//! Over the parameter rectangle the integrands are
//!
//! * volume: `⅓ ⟨x, x_s × x_t⟩`
//! * affine area: `max(K, 0)^{1/4} √(EG − F²)`
//! * centro-affine area: `max(K, 0)^{1/2} √(EG − F²) / ⟨x, n⟩`
//!
//! and over the unit sphere (design backend) the same quantities are written
//! per unit solid angle: `r³/3`, `K₊^{1/4} r³/h` and `K₊^{1/2} r³/h²` with `h`
//! the support value `⟨x, n⟩`.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detpoly::{sphere_direction, Definiteness, HomogeneousPolynomial};
use crate::quadrature::{
    integrate_adaptive_with, integrate_design, integrate_mc, AdaptiveOptions, Design, MethodTag, QuadratureError, QuadratureResult, Rect,
};
use crate::surface::{convexity_check, curvature_census, implicit_point, jet, Census, Convexity, SurfaceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantError {
    #[error("polynomial is not definite ({0:?}); the tensor is not absolutely nonsingular")]
    NotDefinite(Definiteness),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Sphere sampling resolution used to validate inputs.
pub const DEFINITENESS_RESOLUTION: usize = 48;

/// Default relative tolerance of the adaptive backend.
pub const DEFAULT_REL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backend {
    Adaptive {
        rel_tol: f64,
        /// Cell budget before giving up with an accuracy error.
        #[serde(default = "default_max_cells")]
        max_cells: usize,
    },
    MonteCarlo { samples: usize, seed: u64 },
    Design(Design),
}

fn default_max_cells() -> usize {
    AdaptiveOptions::new(DEFAULT_REL_TOL).max_cells
}

impl Backend {
    /// Adaptive backend with the default cell budget.
    pub fn adaptive(rel_tol: f64) -> Self {
        Backend::Adaptive { rel_tol, max_cells: default_max_cells() }
    }
}

impl Default for Backend {
    fn default() -> Self {
        Backend::adaptive(DEFAULT_REL_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    Volume,
    AffineArea,
    CentroAffineArea,
}

/// Returns the positive representative of `f`, or an error unless it is definite.
pub fn prepare(f: &HomogeneousPolynomial) -> Result<HomogeneousPolynomial, InvariantError> {
    let g = f.normalize_sign();
    match g.definiteness(DEFINITENESS_RESOLUTION) {
        Definiteness::PositiveDefinite => Ok(g),
        other => Err(InvariantError::NotDefinite(other)),
    }
}

/// Integrand over the unit sphere (per unit solid angle).
pub fn sphere_density(f: &HomogeneousPolynomial, which: Invariant, u: &Vector3<f64>) -> f64 {
    match implicit_point(f, u) {
        Ok(p) => {
            let k = p.gauss_curv.max(0.0);
            match which {
                Invariant::Volume => p.radial.powi(3) / 3.0,
                Invariant::AffineArea => k.powf(0.25) * p.area_per_solid_angle,
                Invariant::CentroAffineArea => k.sqrt() * p.area_per_solid_angle / p.support,
            }
        }
        Err(_) => f64::NAN,
    }
}

/// Integrand over `(s, t)`. Within the pole band where the parametrisation
/// degenerates, the equivalent sphere density times `sin s` is used.
pub fn parameter_density(f: &HomogeneousPolynomial, which: Invariant, s: f64, t: f64) -> f64 {
    match jet(f, s, t) {
        Ok(j) => {
            let k = j.gauss_curv.max(0.0);
            match which {
                Invariant::Volume => j.point.dot(&j.xs.cross(&j.xt)) / 3.0,
                Invariant::AffineArea => k.powf(0.25) * j.area_element(),
                Invariant::CentroAffineArea => k.sqrt() * j.area_element() / j.support,
            }
        }
        Err(SurfaceError::Degenerate { .. }) => sphere_density(f, which, &sphere_direction(s, t)) * s.sin(),
        Err(_) => f64::NAN,
    }
}

fn integrate_prepared(
    f: &HomogeneousPolynomial,
    which: Invariant,
    backend: &Backend,
) -> Result<QuadratureResult, InvariantError> {
    let r = match backend {
        Backend::Adaptive { rel_tol, max_cells } => {
            let opts = AdaptiveOptions { max_cells: *max_cells, ..AdaptiveOptions::new(*rel_tol) };
            integrate_adaptive_with(|s, t| parameter_density(f, which, s, t), Rect::sphere(), &opts)?
        }
        Backend::MonteCarlo { samples, seed } => {
            integrate_mc(|s, t| parameter_density(f, which, s, t), Rect::sphere(), *samples, *seed)?
        }
        Backend::Design(d) => integrate_design(|u| sphere_density(f, which, u), d)?,
    };
    Ok(r)
}

/// Integral of one invariant; `f` may be of either sign but must be definite.
pub fn integrate_invariant(
    f: &HomogeneousPolynomial,
    which: Invariant,
    backend: &Backend,
) -> Result<QuadratureResult, InvariantError> {
    integrate_prepared(&prepare(f)?, which, backend)
}

/// Enclosed volume `V(Ω)`.
pub fn volume(f: &HomogeneousPolynomial, backend: &Backend) -> Result<QuadratureResult, InvariantError> {
    integrate_invariant(f, Invariant::Volume, backend)
}

/// Affine surface area `a(Ω)`, with negative curvature clamped to zero.
pub fn affine_area(f: &HomogeneousPolynomial, backend: &Backend) -> Result<QuadratureResult, InvariantError> {
    integrate_invariant(f, Invariant::AffineArea, backend)
}

/// Centro-affine surface area `a_c(Ω)`, with negative curvature clamped to zero.
pub fn centro_affine_area(f: &HomogeneousPolynomial, backend: &Backend) -> Result<QuadratureResult, InvariantError> {
    integrate_invariant(f, Invariant::CentroAffineArea, backend)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintConfig {
    pub backend: Backend,
    /// Lattice `(mesh_s, mesh_t)` for the census and convexity check.
    pub lattice: (usize, usize),
    /// Census zero band; `None` selects `1e-8 · max |K|`.
    pub census_tol: Option<f64>,
    pub convexity_tol: f64,
}

impl Default for FingerprintConfig {
    fn default() -> Self {
        Self { backend: Backend::default(), lattice: (64, 128), census_tol: None, convexity_tol: 1e-9 }
    }
}

impl FingerprintConfig {
    pub fn with_backend(backend: Backend) -> Self {
        Self { backend, ..Self::default() }
    }
}

/// Description of how a fingerprint was computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodInfo {
    pub tag: MethodTag,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub design: Option<String>,
}

impl MethodInfo {
    pub fn for_backend(backend: &Backend) -> Self {
        match backend {
            Backend::Adaptive { rel_tol, .. } => Self {
                tag: MethodTag::adaptive_for(*rel_tol),
                backend: "adaptive".into(),
                rel_tol: Some(*rel_tol),
                samples: None,
                seed: None,
                design: None,
            },
            Backend::MonteCarlo { samples, seed } => Self {
                tag: MethodTag::MonteCarlo,
                backend: "mc".into(),
                rel_tol: None,
                samples: Some(*samples),
                seed: Some(*seed),
                design: None,
            },
            Backend::Design(d) => Self {
                tag: MethodTag::DesignT,
                backend: "design".into(),
                rel_tol: None,
                samples: Some(d.len()),
                seed: None,
                design: Some(d.source_name.clone()),
            },
        }
    }
}

/// The bundle of invariants used to compare tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantFingerprint {
    pub label: String,
    pub volume: f64,
    pub affine_area: f64,
    pub centro_affine_area: f64,
    /// Error estimates in the order volume, affine, centro-affine.
    pub errors: [f64; 3],
    pub evaluations: u64,
    pub census: Census,
    pub convexity: Convexity,
    pub method: MethodInfo,
}

impl InvariantFingerprint {
    pub fn value(&self, which: Invariant) -> f64 {
        match which {
            Invariant::Volume => self.volume,
            Invariant::AffineArea => self.affine_area,
            Invariant::CentroAffineArea => self.centro_affine_area,
        }
    }
}

/// Computes all invariants of `f` with the configured backend.
pub fn fingerprint(
    f: &HomogeneousPolynomial,
    label: &str,
    config: &FingerprintConfig,
) -> Result<InvariantFingerprint, InvariantError> {
    let g = prepare(f)?;
    let which = [Invariant::Volume, Invariant::AffineArea, Invariant::CentroAffineArea];
    let results: Vec<QuadratureResult> =
        which.par_iter().map(|w| integrate_prepared(&g, *w, &config.backend)).collect::<Result<_, _>>()?;
    let (ms, mt) = config.lattice;
    let census = curvature_census(&g, ms, mt, config.census_tol)?;
    let convexity = convexity_check(&g, ms, mt, config.convexity_tol)?;
    Ok(InvariantFingerprint {
        label: label.to_string(),
        volume: results[0].value,
        affine_area: results[1].value,
        centro_affine_area: results[2].value,
        errors: [results[0].error_estimate, results[1].error_estimate, results[2].error_estimate],
        evaluations: results.iter().map(|r| r.evaluations).sum(),
        census,
        convexity,
        method: MethodInfo::for_backend(&config.backend),
    })
}
