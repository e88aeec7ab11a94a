//! Pointwise differential geometry of the constant surface `{f = 1}`.
//!
//! The surface is parametrised over the sphere by
//! `x(s, t) = p(s, t)^{-1/4} Φ(s, t)` with `Φ(s, t) = (sin s cos t, sin s sin t, cos s)`
//! and `p = f ∘ Φ`. All derivatives come from the polynomial jet through the
//! chain rule. A coordinate-free variant ([`implicit_point`]) works directly
//! from a unit direction and is used by sphere-based quadrature.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detpoly::{sphere_direction, HomogeneousPolynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("f is not positive at (s, t) = ({s}, {t}): value {value}; input is not absolutely nonsingular")]
    DefinitenessViolation { s: f64, t: f64, value: f64 },
    #[error("degenerate parametrisation at (s, t) = ({s}, {t}): EG - F^2 = {det}")]
    Degenerate { s: f64, t: f64, det: f64 },
    #[error("lattice must be at least 4 x 4, got {0} x {1}")]
    LatticeTooSmall(usize, usize),
}

/// Lower bound on `EG - F²` below which a jet is rejected.
pub const MIN_AREA_DET: f64 = 1e-14;

/// Surface point with derivatives, fundamental forms and curvatures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceJet {
    pub s: f64,
    pub t: f64,
    pub radial: f64,
    pub point: Vector3<f64>,
    pub xs: Vector3<f64>,
    pub xt: Vector3<f64>,
    pub xss: Vector3<f64>,
    pub xst: Vector3<f64>,
    pub xtt: Vector3<f64>,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub normal: Vector3<f64>,
    pub mean_curv: f64,
    pub gauss_curv: f64,
    pub support: f64,
}

impl SurfaceJet {
    /// `√(EG − F²)`, the area element in `(s, t)`.
    pub fn area_element(&self) -> f64 {
        (self.e * self.g - self.f * self.f).sqrt()
    }
}

/// `r = p(s,t)^{-1/4}` and the surface point `r·Φ(s,t)`.
pub fn radial_map(f: &HomogeneousPolynomial, s: f64, t: f64) -> Result<(f64, Vector3<f64>), SurfaceError> {
    let phi = sphere_direction(s, t);
    let p = f.eval(&phi);
    if p <= 0.0 || !p.is_finite() {
        return Err(SurfaceError::DefinitenessViolation { s, t, value: p });
    }
    let r = p.powf(-0.25);
    Ok((r, phi * r))
}

/// Full jet at `(s, t)`; the normal is oriented so that `⟨x, n⟩ > 0`.
pub fn jet(f: &HomogeneousPolynomial, s: f64, t: f64) -> Result<SurfaceJet, SurfaceError> {
    let (ss, cs) = s.sin_cos();
    let (st, ct) = t.sin_cos();
    let phi = Vector3::new(ss * ct, ss * st, cs);
    let phi_s = Vector3::new(cs * ct, cs * st, -ss);
    let phi_t = Vector3::new(-ss * st, ss * ct, 0.0);
    let phi_ss = -phi;
    let phi_st = Vector3::new(-cs * st, cs * ct, 0.0);
    let phi_tt = Vector3::new(-ss * ct, -ss * st, 0.0);

    let pj = f.jet(&phi);
    let p = pj.value;
    if p <= 0.0 || !p.is_finite() {
        return Err(SurfaceError::DefinitenessViolation { s, t, value: p });
    }
    let (grad, hess) = (pj.gradient, pj.hessian);
    let p_s = grad.dot(&phi_s);
    let p_t = grad.dot(&phi_t);
    let p_ss = phi_s.dot(&(hess * phi_s)) + grad.dot(&phi_ss);
    let p_st = phi_s.dot(&(hess * phi_t)) + grad.dot(&phi_st);
    let p_tt = phi_t.dot(&(hess * phi_t)) + grad.dot(&phi_tt);

    let r = p.powf(-0.25);
    let a = -0.25 * r / p;
    let b = 5.0 / 16.0 * r / (p * p);
    let r_s = a * p_s;
    let r_t = a * p_t;
    let r_ss = b * p_s * p_s + a * p_ss;
    let r_st = b * p_s * p_t + a * p_st;
    let r_tt = b * p_t * p_t + a * p_tt;

    let point = phi * r;
    let xs = phi * r_s + phi_s * r;
    let xt = phi * r_t + phi_t * r;
    let xss = phi * r_ss + phi_s * (2.0 * r_s) + phi_ss * r;
    let xst = phi * r_st + phi_t * r_s + phi_s * r_t + phi_st * r;
    let xtt = phi * r_tt + phi_t * (2.0 * r_t) + phi_tt * r;

    let e = xs.dot(&xs);
    let ff = xs.dot(&xt);
    let g = xt.dot(&xt);
    let det = e * g - ff * ff;
    if !(det >= MIN_AREA_DET) {
        return Err(SurfaceError::Degenerate { s, t, det });
    }
    let cross = xs.cross(&xt);
    let mut normal = cross / cross.norm();
    if point.dot(&normal) < 0.0 {
        normal = -normal;
    }
    let l = xss.dot(&normal);
    let m = xst.dot(&normal);
    let n = xtt.dot(&normal);
    Ok(SurfaceJet {
        s,
        t,
        radial: r,
        point,
        xs,
        xt,
        xss,
        xst,
        xtt,
        e,
        f: ff,
        g,
        l,
        m,
        n,
        normal,
        mean_curv: (e * n - 2.0 * ff * m + g * l) / (2.0 * det),
        gauss_curv: (l * n - m * m) / det,
        support: point.dot(&normal),
    })
}

/// Geometry at the surface point in direction `u`, computed from the implicit
/// equation rather than a parametrisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplicitPoint {
    pub radial: f64,
    pub point: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub support: f64,
    pub gauss_curv: f64,
    /// Surface area per unit solid angle, `r³ / ⟨x, n⟩`.
    pub area_per_solid_angle: f64,
}

fn adjugate(h: &Matrix3<f64>) -> Matrix3<f64> {
    let c = |i0: usize, i1: usize, j0: usize, j1: usize| h[(i0, j0)] * h[(i1, j1)] - h[(i0, j1)] * h[(i1, j0)];
    Matrix3::new(
        c(1, 2, 1, 2),
        -c(0, 2, 1, 2),
        c(0, 1, 1, 2),
        -c(1, 2, 0, 2),
        c(0, 2, 0, 2),
        -c(0, 1, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 0, 1),
        c(0, 1, 0, 1),
    )
}

/// Implicit-surface geometry at direction `u` (need not be normalised).
pub fn implicit_point(f: &HomogeneousPolynomial, u: &Vector3<f64>) -> Result<ImplicitPoint, SurfaceError> {
    let u = u.normalize();
    let value = f.eval(&u);
    if value <= 0.0 || !value.is_finite() {
        let s = u[2].clamp(-1.0, 1.0).acos();
        let t = u[1].atan2(u[0]);
        return Err(SurfaceError::DefinitenessViolation { s, t, value });
    }
    let r = value.powf(-0.25);
    let point = u * r;
    let j = f.jet(&point);
    let gnorm = j.gradient.norm();
    let normal = j.gradient / gnorm;
    let support = point.dot(&normal);
    let gauss_curv = j.gradient.dot(&(adjugate(&j.hessian) * j.gradient)) / gnorm.powi(4);
    Ok(ImplicitPoint { radial: r, point, normal, support, gauss_curv, area_per_solid_angle: r.powi(3) / support })
}

/// Spherical parameters `(s, t)` of a nonzero vector, with `t ∈ [0, 2π)`.
pub fn parameters_of(x: &Vector3<f64>) -> (f64, f64) {
    let s = (x[2] / x.norm()).clamp(-1.0, 1.0).acos();
    let t = x[1].atan2(x[0]).rem_euclid(2.0 * PI);
    (s, t)
}

/// Interior lattice node `(s_i, t_j) = (π(i+½)/ms, 2πj/mt)`.
pub fn lattice_node(i: usize, j: usize, ms: usize, mt: usize) -> (f64, f64) {
    (PI * (i as f64 + 0.5) / ms as f64, 2.0 * PI * j as f64 / mt as f64)
}

fn check_lattice(ms: usize, mt: usize) -> Result<(), SurfaceError> {
    if ms < 4 || mt < 4 {
        Err(SurfaceError::LatticeTooSmall(ms, mt))
    } else {
        Ok(())
    }
}

/// Jets over the interior lattice in row-major `(i, j)` order.
pub fn lattice_jets(f: &HomogeneousPolynomial, ms: usize, mt: usize) -> Result<Vec<SurfaceJet>, SurfaceError> {
    check_lattice(ms, mt)?;
    (0..ms * mt)
        .into_par_iter()
        .map(|k| {
            let (s, t) = lattice_node(k / mt, k % mt, ms, mt);
            jet(f, s, t)
        })
        .collect()
}

/// Counts of elliptic, hyperbolic and parabolic lattice points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub k_plus: usize,
    pub k_minus: usize,
    pub k_zero: usize,
}

impl Census {
    pub fn total(&self) -> usize {
        self.k_plus + self.k_minus + self.k_zero
    }
}

/// Classifies the sign of `K` on the lattice. The default tolerance is
/// `1e-8 · max |K|`.
pub fn curvature_census(
    f: &HomogeneousPolynomial,
    ms: usize,
    mt: usize,
    zero_tol: Option<f64>,
) -> Result<Census, SurfaceError> {
    let ks: Vec<f64> = lattice_jets(f, ms, mt)?.iter().map(|j| j.gauss_curv).collect();
    let tol = zero_tol.unwrap_or_else(|| 1e-8 * ks.iter().fold(0.0f64, |m, k| m.max(k.abs())));
    let mut census = Census { k_plus: 0, k_minus: 0, k_zero: 0 };
    for k in ks {
        if k > tol {
            census.k_plus += 1;
        } else if k < -tol {
            census.k_minus += 1;
        } else {
            census.k_zero += 1;
        }
    }
    Ok(census)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Convexity {
    Convex,
    /// Lattice point with the most negative Gaussian curvature.
    NonConvex { s: f64, t: f64, gauss_curv: f64 },
}

impl Convexity {
    pub fn is_convex(&self) -> bool {
        matches!(self, Convexity::Convex)
    }
}

pub fn convexity_check(f: &HomogeneousPolynomial, ms: usize, mt: usize, tol: f64) -> Result<Convexity, SurfaceError> {
    let jets = lattice_jets(f, ms, mt)?;
    let worst = jets.iter().min_by(|a, b| a.gauss_curv.total_cmp(&b.gauss_curv)).expect("non-empty lattice");
    if worst.gauss_curv < -tol {
        Ok(Convexity::NonConvex { s: worst.s, t: worst.t, gauss_curv: worst.gauss_curv })
    } else {
        Ok(Convexity::Convex)
    }
}

/// A lattice point where the normal or the second fundamental form degenerates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularFlag {
    pub s: f64,
    pub t: f64,
    pub grad_norm: f64,
    pub gauss_curv: f64,
}

/// Flags lattice points with `‖∇f‖ < tol`, or with both `|K| < tol` and `|H| < tol`.
pub fn singularity_scan(
    f: &HomogeneousPolynomial,
    ms: usize,
    mt: usize,
    grad_tol: f64,
) -> Result<Vec<SingularFlag>, SurfaceError> {
    let jets = lattice_jets(f, ms, mt)?;
    Ok(jets
        .iter()
        .filter_map(|j| {
            let grad_norm = f.jet(&j.point).gradient.norm();
            let flat = j.gauss_curv.abs() < grad_tol && j.mean_curv.abs() < grad_tol;
            (grad_norm < grad_tol || flat).then_some(SingularFlag { s: j.s, t: j.t, grad_norm, gauss_curv: j.gauss_curv })
        })
        .collect())
}

/// Closed triangle mesh with outward-oriented faces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::BTreeSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Volume enclosed by the mesh, from signed tetrahedra against the origin.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| Vector3::from(self.vertices[i]));
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }
}

/// Mesh of `{f = 1}` on the interior lattice plus both poles.
pub fn surface_mesh(f: &HomogeneousPolynomial, ms: usize, mt: usize) -> Result<TriangleMesh, SurfaceError> {
    check_lattice(ms, mt)?;
    let pole = |z: f64, s: f64| -> Result<[f64; 3], SurfaceError> {
        let (_, x) = radial_map(f, s, 0.0)?;
        Ok([0.0, 0.0, x[2].abs() * z])
    };
    let mut vertices = Vec::with_capacity(ms * mt + 2);
    vertices.push(pole(1.0, 0.0)?);
    let ring: Result<Vec<[f64; 3]>, SurfaceError> = (0..ms * mt)
        .into_par_iter()
        .map(|k| {
            let (s, t) = lattice_node(k / mt, k % mt, ms, mt);
            radial_map(f, s, t).map(|(_, x)| x.into())
        })
        .collect();
    vertices.extend(ring?);
    vertices.push(pole(-1.0, PI)?);
    let south = ms * mt + 1;
    let v = |i: usize, j: usize| 1 + i * mt + (j % mt);

    let mut faces = Vec::with_capacity(2 * ms * mt);
    for j in 0..mt {
        faces.push([0, v(0, j), v(0, j + 1)]);
    }
    for i in 0..ms - 1 {
        for j in 0..mt {
            faces.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            faces.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    for j in 0..mt {
        faces.push([south, v(ms - 1, j + 1), v(ms - 1, j)]);
    }
    Ok(TriangleMesh { vertices, faces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detpoly::det_poly;
    use crate::exact::RatMatrix;
    use crate::io::fixtures;
    use crate::tensor::random_unimodular;
    use num::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ball() -> HomogeneousPolynomial {
        det_poly(&fixtures::quaternion_sphere()).unwrap()
    }

    fn flat_caps() -> HomogeneousPolynomial {
        det_poly(&fixtures::quaternion_flat()).unwrap()
    }

    /// `(x²/a² + y²/b² + z²/c²)²` with `(a, b, c) = (2, 1, 1/2)`.
    fn ellipsoid() -> HomogeneousPolynomial {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let (a, b, c) = (q(1, 4), q(1, 1), q(4, 1));
        HomogeneousPolynomial::new(
            4,
            [
                ([4, 0, 0], &a * &a),
                ([0, 4, 0], &b * &b),
                ([0, 0, 4], &c * &c),
                ([2, 2, 0], q(2, 1) * &a * &b),
                ([2, 0, 2], q(2, 1) * &a * &c),
                ([0, 2, 2], q(2, 1) * &b * &c),
            ],
        )
        .unwrap()
    }

    fn all_polys() -> Vec<(String, HomogeneousPolynomial)> {
        fixtures::all().into_iter().map(|(n, t)| (n.to_string(), det_poly(&t).unwrap())).collect()
    }

    #[test]
    fn radial_map_examples() {
        let (r, x) = radial_map(&ball(), 1.1, 2.3).unwrap();
        assert!((r - 1.0).abs() < 1e-15 && (x.norm() - 1.0).abs() < 1e-15);
        let (r, _) = radial_map(&ball().scale(16.0).unwrap(), 0.4, 5.0).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        let (r, _) = radial_map(&det_poly(&fixtures::no1()).unwrap(), PI / 2.0, 0.0).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let neg = ball().negated();
        assert!(matches!(radial_map(&neg, 1.0, 1.0), Err(SurfaceError::DefinitenessViolation { .. })));
    }

    #[test]
    fn unit_sphere_jet() {
        let j = jet(&ball(), PI / 2.0, 0.0).unwrap();
        for (got, want) in [(j.e, 1.0), (j.f, 0.0), (j.g, 1.0), (j.gauss_curv, 1.0), (j.mean_curv, -1.0), (j.support, 1.0)] {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn pole_is_degenerate() {
        assert!(matches!(jet(&ball(), 0.0, 0.3), Err(SurfaceError::Degenerate { .. })));
    }

    #[test]
    fn jet_invariants_on_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (name, f) in all_polys() {
            for _ in 0..50 {
                let (s, t) = (rng.random_range(0.05..PI - 0.05), rng.random_range(0.0..2.0 * PI));
                let j = jet(&f, s, t).unwrap();
                assert!((f.eval(&j.point) - 1.0).abs() < 1e-10, "{name}");
                assert!((j.normal.norm() - 1.0).abs() < 1e-10);
                let scale = j.xs.norm().max(j.xt.norm());
                assert!(j.normal.dot(&j.xs).abs() < 1e-10 * scale && j.normal.dot(&j.xt).abs() < 1e-10 * scale);
                assert!(j.e > 0.0 && j.g > 0.0 && j.e * j.g - j.f * j.f > 0.0);
                assert!(j.support > 0.0);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let point = |f: &HomogeneousPolynomial, s: f64, t: f64| radial_map(f, s, t).unwrap().1;
        for (name, f) in all_polys() {
            for _ in 0..20 {
                let (s, t) = (rng.random_range(0.2..PI - 0.2), rng.random_range(0.0..2.0 * PI));
                let j = jet(&f, s, t).unwrap();
                let xs = (point(&f, s + h, t) - point(&f, s - h, t)) / (2.0 * h);
                let xt = (point(&f, s, t + h) - point(&f, s, t - h)) / (2.0 * h);
                let jd = |ds: f64, dt: f64| jet(&f, s + ds, t + dt).unwrap();
                let xss = (jd(h, 0.0).xs - jd(-h, 0.0).xs) / (2.0 * h);
                let xst = (jd(0.0, h).xs - jd(0.0, -h).xs) / (2.0 * h);
                let xtt = (jd(0.0, h).xt - jd(0.0, -h).xt) / (2.0 * h);
                let scale = j.xs.norm() + j.xt.norm() + j.xss.norm() + j.xst.norm() + j.xtt.norm();
                for (a, b) in [(xs, j.xs), (xt, j.xt), (xss, j.xss), (xst, j.xst), (xtt, j.xtt)] {
                    assert!((a - b).norm() <= 1e-6 * scale, "{name}: {a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn ellipsoid_curvature_closed_form() {
        let f = ellipsoid();
        let (a, b, c) = (2.0f64, 1.0f64, 0.5f64);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (s, t) = (rng.random_range(0.1..PI - 0.1), rng.random_range(0.0..2.0 * PI));
            let j = jet(&f, s, t).unwrap();
            let x = j.point;
            let q = x[0].powi(2) / a.powi(4) + x[1].powi(2) / b.powi(4) + x[2].powi(2) / c.powi(4);
            let k = 1.0 / ((a * b * c).powi(2) * q * q);
            assert!((j.gauss_curv - k).abs() < 1e-10 * k, "{} vs {k}", j.gauss_curv);
            let ip = implicit_point(&f, &x).unwrap();
            assert!((ip.gauss_curv - k).abs() < 1e-10 * k);
        }
    }

    #[test]
    fn implicit_route_agrees_with_parametrisation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (name, f) in all_polys() {
            for _ in 0..30 {
                let (s, t) = (rng.random_range(0.1..PI - 0.1), rng.random_range(0.0..2.0 * PI));
                let j = jet(&f, s, t).unwrap();
                let ip = implicit_point(&f, &sphere_direction(s, t)).unwrap();
                let kscale = j.gauss_curv.abs().max(1.0);
                assert!((ip.gauss_curv - j.gauss_curv).abs() < 1e-9 * kscale, "{name}");
                assert!((ip.support - j.support).abs() < 1e-12);
                // dA = (r³/h) sin s ds dt
                let da = ip.area_per_solid_angle * s.sin();
                assert!((da - j.area_element()).abs() < 1e-11 * da, "{name}");
            }
        }
    }

    #[test]
    fn curvature_sign_is_invariant_under_sl_maps() {
        let f = det_poly(&fixtures::no20()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..4 {
            let a = random_unimodular(3, seed, 20.0);
            let a3 = Matrix3::from_iterator(a.matrix().iter().cloned());
            // g(y) = f(A⁻¹y) = f(yᵀ A⁻ᵀ): substitution matrix A⁻ᵀ
            let inv_t = a3.try_inverse().unwrap().transpose();
            let g = f.substitute_linear_exact(&RatMatrix::from_f64(&nalgebra::DMatrix::from_iterator(3, 3, inv_t.iter().cloned())).unwrap()).unwrap();
            for _ in 0..40 {
                let (s, t) = (rng.random_range(0.1..PI - 0.1), rng.random_range(0.0..2.0 * PI));
                let j = jet(&f, s, t).unwrap();
                if j.gauss_curv.abs() < 1e-6 {
                    continue;
                }
                let y = a3 * j.point;
                let (s2, t2) = parameters_of(&y);
                let jg = jet(&g, s2, t2).unwrap();
                assert!((jg.point - y).norm() < 1e-9 * y.norm());
                assert_eq!(jg.gauss_curv.signum(), j.gauss_curv.signum());
            }
        }
    }

    #[test]
    fn census_examples() {
        assert_eq!(curvature_census(&ball(), 32, 64, Some(1e-8)).unwrap(), Census { k_plus: 2048, k_minus: 0, k_zero: 0 });
        let c = curvature_census(&flat_caps(), 33, 64, None).unwrap();
        assert!(c.k_zero > 0, "{c:?}");
        assert_eq!(c.total(), 33 * 64);
        assert!(matches!(curvature_census(&ball(), 3, 8, None), Err(SurfaceError::LatticeTooSmall(3, 8))));
    }

    #[test]
    fn census_fractions_roughly_invariant() {
        let f = det_poly(&fixtures::no1()).unwrap();
        let c1 = curvature_census(&f, 48, 96, None).unwrap();
        let r = random_unimodular(3, 11, 20.0).to_exact();
        let c2 = curvature_census(&f.substitute_linear_exact(&r).unwrap(), 48, 96, None).unwrap();
        let frac = |c: Census| c.k_plus as f64 / c.total() as f64;
        assert!((frac(c1) - frac(c2)).abs() <= 0.05);
    }

    #[test]
    fn convexity_examples() {
        assert_eq!(convexity_check(&ball(), 16, 32, 1e-9).unwrap(), Convexity::Convex);
        let no1 = det_poly(&fixtures::no1()).unwrap();
        assert!(convexity_check(&no1, 64, 128, 1e-9).unwrap().is_convex());
        for (name, t) in fixtures::all() {
            if name.starts_with('T') && name != "T001" {
                let f = det_poly(&t).unwrap();
                assert!(!convexity_check(&f, 64, 128, 1e-9).unwrap().is_convex(), "{name}");
            }
        }
    }

    #[test]
    fn singularity_scan_examples() {
        assert!(singularity_scan(&ball(), 32, 64, 1e-2).unwrap().is_empty());
        let flags = singularity_scan(&flat_caps(), 64, 128, 1e-2).unwrap();
        assert!(!flags.is_empty());
        assert!(flags.iter().all(|fl| fl.s < 0.3 || fl.s > PI - 0.3));
    }

    #[test]
    fn singularity_flags_refine() {
        let f = flat_caps();
        let coarse = singularity_scan(&f, 32, 64, 1e-2).unwrap();
        let fine = singularity_scan(&f, 64, 128, 1e-2).unwrap();
        let spacing = PI / 32.0;
        for c in &coarse {
            let u = sphere_direction(c.s, c.t);
            assert!(fine.iter().any(|g| (sphere_direction(g.s, g.t) - u).norm() <= 2.0 * spacing));
        }
    }

    #[test]
    fn mesh_topology_and_volume() {
        let m = surface_mesh(&ball(), 32, 64).unwrap();
        assert_eq!(m.vertices.len(), 2050);
        assert!(m.vertices.iter().all(|v| (Vector3::from(*v).norm() - 1.0).abs() < 1e-10));
        assert_eq!(m.euler_characteristic(), 2);
        for (name, f) in all_polys() {
            let m = surface_mesh(&f, 12, 20).unwrap();
            assert_eq!(m.euler_characteristic(), 2, "{name}");
            assert!(m.faces.iter().flatten().all(|&i| i < m.vertices.len()));
        }
        let fine = surface_mesh(&ball(), 128, 256).unwrap();
        // inscribed polyhedron: second-order error in the lattice spacing
        assert!((fine.signed_volume() / (4.0 * PI / 3.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn radial_extent_is_bounded() {
        for (name, f) in all_polys() {
            let jets = lattice_jets(&f, 32, 64).unwrap();
            let (lo, hi) = jets.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), j| (lo.min(j.radial), hi.max(j.radial)));
            assert!(lo > 0.0 && hi.is_finite() && hi / lo < 10.0, "{name}");
        }
    }
}
