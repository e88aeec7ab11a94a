//! Non-equivalence testing for absolutely nonsingular `n × n × p` tensors.
//!
//! A tensor `T = (A₁; A₂; A₃)` is mapped to its determinant polynomial
//! `f_T(x) = det(x₁A₁ + x₂A₂ + x₃A₃)`. When `T` is absolutely nonsingular the
//! polynomial is definite and the level set `{f_T = 1}` is a compact star-shaped
//! surface. Its enclosed volume, affine surface area and centro-affine surface
//! area are invariant under the rank-preserving slice transformations (up to a
//! known scaling law), so disagreeing values certify that two tensors are not
//! equivalent.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: slice representation and the p/q/r transformations.
//! * [`detpoly`]: exact determinant polynomial and its float jets.
//! * [`surface`]: spherical parametrisation and pointwise differential geometry.
//! * [`quadrature`]: adaptive, Monte Carlo and spherical-design integration.
//! * [`invariants`]: volume, affine and centro-affine surface area.
//! * [`equivalence`]: verdicts and orbit experiments.
//! * [`io`]: tensor files, fixtures, OBJ export and reports.

pub mod detpoly;
pub mod equivalence;
pub mod exact;
pub mod invariants;
pub mod io;
pub mod quadrature;
pub mod surface;
pub mod tensor;

pub use detpoly::{det_poly, Definiteness, HomogeneousPolynomial, PolyError, PolyJet};
pub use equivalence::{compare, estimate_scale_c, orbit_table, OrbitGroup, OrbitTable, Verdict, VerdictKind};
pub use exact::RatMatrix;
pub use invariants::{fingerprint, Backend, FingerprintConfig, InvariantError, InvariantFingerprint, MethodInfo};
pub use quadrature::{Design, MethodTag, QuadratureError, QuadratureResult, Rect};
pub use surface::{Census, Convexity, SurfaceError, SurfaceJet, TriangleMesh};
pub use tensor::{GroupElement, GroupTag, Tensor3, TensorError};
