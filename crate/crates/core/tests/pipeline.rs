use detsurf::detpoly::det_poly;
use detsurf::equivalence::{compare, estimate_scale_c, orbit_table, OrbitGroup, VerdictKind};
use detsurf::invariants::{affine_area, centro_affine_area, fingerprint, volume, Backend, FingerprintConfig};
use detsurf::io::{self, fixtures, PairVerdict, Report, ReportFormat, TensorFormat};
use detsurf::surface::surface_mesh;
use detsurf::tensor::{r_transform, random_invertible, random_unimodular};
use detsurf::{HomogeneousPolynomial, InvariantFingerprint, MethodInfo};
use nalgebra::Matrix3;

const TOL: f64 = 1e-6;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn t001() -> HomogeneousPolynomial {
    det_poly(&fixtures::no1()).unwrap()
}

fn values(f: &HomogeneousPolynomial) -> [f64; 3] {
    let b = Backend::adaptive(TOL);
    [volume(f, &b).unwrap().value, affine_area(f, &b).unwrap().value, centro_affine_area(f, &b).unwrap().value]
}

fn matrix3(m: &nalgebra::DMatrix<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[(i, j)])
}

#[test]
fn invariants_are_unchanged_by_unimodular_substitution() {
    let f = t001();
    let base = values(&f);
    for seed in [1, 2, 3] {
        let r = random_unimodular(3, seed, 20.0);
        let g = f.substitute_linear(&matrix3(r.matrix())).unwrap();
        let moved = values(&g);
        for i in 0..3 {
            assert!(rel(moved[i], base[i]) < 2e-5, "seed {seed} invariant {i}: {} vs {}", moved[i], base[i]);
        }
    }
}

#[test]
fn centro_affine_area_is_unchanged_by_general_linear_maps() {
    let t = fixtures::no1();
    let [v, a, ac] = values(&det_poly(&t).unwrap());
    for seed in [7, 8] {
        let g = random_invertible(3, seed, 0.1, 20.0);
        assert!((g.det().abs() - 1.0).abs() > 1e-3);
        let moved = values(&det_poly(&r_transform(&t, &g).unwrap()).unwrap());
        assert!(rel(moved[2], ac) < 2e-5, "{} vs {ac}", moved[2]);
        assert!(rel(moved[1] / moved[0].sqrt(), a / v.sqrt()) < 2e-5);
        assert!(rel(moved[0], v) > 1e-3, "volume should move under det != ±1");
    }
}

#[test]
fn scaling_laws() {
    let f = t001();
    let [v, a, ac] = values(&f);
    for c in [1.0 / 16.0, 0.5, 2.0, 16.0] {
        let [vc, avc, acc] = values(&f.scale(c).unwrap());
        assert!(rel(vc, v * c.powf(-0.75)) < 1e-5, "c={c}");
        assert!(rel(avc, a * c.powf(-0.375)) < 1e-5, "c={c}");
        assert!(rel(acc, ac) < 1e-5, "c={c}");
        assert!(rel(estimate_scale_c(v, vc).unwrap(), c) < 1e-4, "c={c}");
    }
}

#[test]
fn monte_carlo_agrees_with_adaptive() {
    let f = t001();
    let exact = values(&f);
    let mc = Backend::MonteCarlo { samples: 1 << 20, seed: 11 };
    let got = [volume(&f, &mc).unwrap().value, affine_area(&f, &mc).unwrap().value, centro_affine_area(&f, &mc).unwrap().value];
    for i in 0..3 {
        assert!(rel(got[i], exact[i]) < 5e-3, "invariant {i}: {} vs {}", got[i], exact[i]);
    }
}

#[test]
fn orbit_tables_keep_invariants() {
    let config = FingerprintConfig::with_backend(Backend::adaptive(1e-5));
    let t = fixtures::no1();
    for group in [OrbitGroup::SL3, OrbitGroup::SL4xSL4xSL3] {
        let table = orbit_table(&t, group, 2, 2024, &config).unwrap();
        let labels: Vec<&str> = table.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["T001-0", "T001-1", "T001-2"]);
        for row in &table.rows[1..] {
            assert!(rel(row.volume, table.rows[0].volume) < 1e-5);
            assert!(rel(row.affine_area, table.rows[0].affine_area) < 1e-5);
            assert_eq!(compare(&table.rows[0], row, 1e-3).unwrap().kind, VerdictKind::Inconclusive);
        }
    }
    let gl = orbit_table(&t, OrbitGroup::GL3, 2, 2024, &config).unwrap();
    for row in &gl.rows[1..] {
        assert!(rel(row.centro_affine_area, gl.rows[0].centro_affine_area) < 1e-5);
        assert_eq!(compare(&gl.rows[0], row, 1e-3).unwrap().kind, VerdictKind::NotSLEquivalent);
    }
}

#[test]
fn convex_and_non_convex_fixtures_are_separated() {
    let config = FingerprintConfig::with_backend(Backend::adaptive(1e-5));
    let a = fingerprint(&t001(), "T001", &config).unwrap();
    let b = fingerprint(&det_poly(&fixtures::no20()).unwrap(), "T020", &config).unwrap();
    assert!(a.convexity.is_convex());
    assert!(!b.convexity.is_convex());
    let verdict = compare(&a, &b, 1e-3).unwrap();
    assert_eq!(verdict.kind, VerdictKind::NotGLEquivalent);
    assert!(verdict.rough_evidence.iter().any(|r| r.starts_with("convexity")));
    assert!(b.census.k_minus > 0 && a.census.k_minus == 0);
}

#[test]
fn report_round_trip() {
    let config = FingerprintConfig::with_backend(Backend::adaptive(1e-5));
    let table = orbit_table(&fixtures::no1(), OrbitGroup::SL3, 5, 9, &config).unwrap();
    let mut report = Report::new(MethodInfo::for_backend(&config.backend));
    report.seed = Some(9);
    report.fingerprints = table.rows.clone();
    let first: &InvariantFingerprint = &report.fingerprints[0];
    let last = report.fingerprints.last().unwrap();
    report.verdicts.push(PairVerdict {
        left: first.label.clone(),
        right: last.label.clone(),
        verdict: compare(first, last, 1e-3).unwrap(),
    });
    report.validate().unwrap();

    let csv = io::write_report(&report, ReportFormat::Csv).unwrap();
    let rows: Vec<&str> = csv.lines().take_while(|l| !l.is_empty()).skip(1).collect();
    assert_eq!(rows.len(), 6);
    for (k, row) in rows.iter().enumerate() {
        assert!(row.starts_with(&format!("T001-{k},")), "{row}");
    }
    let json = io::write_report(&report, ReportFormat::Json).unwrap();
    assert_eq!(io::parse_report_json(&json).unwrap(), report);

    report.verdicts[0].right = "T001-9".into();
    assert!(report.validate().is_err());
}

#[test]
fn fixtures_survive_both_file_formats() {
    for (name, t) in fixtures::all() {
        let f = det_poly(&t).unwrap();
        for format in [TensorFormat::Json, TensorFormat::Text] {
            let text = io::serialize_tensor(&t, format).unwrap();
            let back = io::parse_tensor(&text).unwrap();
            assert_eq!(back.slices(), t.slices(), "{name}");
            assert_eq!(det_poly(&back).unwrap(), f, "{name}");
        }
    }
}

#[test]
fn mesh_export_round_trip() {
    let f = t001();
    let mesh = surface_mesh(&f, 12, 24).unwrap();
    assert_eq!(mesh.euler_characteristic(), 2);
    let back = io::parse_obj(&io::export_obj(&mesh)).unwrap();
    assert_eq!(back, mesh);
    let v = volume(&f, &Backend::adaptive(TOL)).unwrap().value;
    assert!(mesh.signed_volume() > 0.0 && mesh.signed_volume() < v);
}
