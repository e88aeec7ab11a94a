//! Tensor files, OBJ meshes and reports.
//!
//! Tensor files come in two flavours. The canonical JSON document is
//!
//! ```json
//! {"n": 4, "p": 3, "label": "T001", "slices": [[[1, 0, 0, 0], …], …]}
//! ```
//!
//! and the text form is a header line `n p [label]` followed by `p` blocks of
//! `n` rows of `n` integers. Blank lines and `#` comments are ignored.

pub mod fixtures;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivalence::{Verdict, VerdictKind};
use crate::invariants::{InvariantFingerprint, MethodInfo};
use crate::surface::TriangleMesh;
use crate::tensor::Tensor3;

/// Malformed input, located by 1-based line and column.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SerializeError {
    #[error("tensor has non-integer entries and cannot be written as a tensor file")]
    NonInteger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorFormat {
    Json,
    Text,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorFile {
    n: usize,
    p: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<String>,
    slices: Vec<Vec<Vec<i64>>>,
}

/// Parses either format; JSON is detected by a leading `{`.
pub fn parse_tensor(text: &str) -> Result<Tensor3, ParseError> {
    if text.trim_start().starts_with('{') {
        parse_tensor_json(text)
    } else {
        parse_tensor_text(text)
    }
}

fn build_tensor(file: TensorFile, locate: impl Fn(usize) -> (usize, usize)) -> Result<Tensor3, ParseError> {
    if file.n == 0 || file.p == 0 {
        let (l, c) = locate(0);
        return Err(ParseError::new(l, c, "n and p must be positive"));
    }
    if file.slices.len() != file.p {
        let (l, c) = locate(0);
        return Err(ParseError::new(l, c, format!("expected {} slices, found {}", file.p, file.slices.len())));
    }
    for (k, slice) in file.slices.iter().enumerate() {
        if slice.len() != file.n || slice.iter().any(|row| row.len() != file.n) {
            let (l, c) = locate(k + 1);
            return Err(ParseError::new(l, c, format!("slice {} is not {}x{}", k + 1, file.n, file.n)));
        }
    }
    Tensor3::from_integer_slices(&file.slices, file.label.as_deref()).map_err(|e| {
        let (l, c) = locate(0);
        ParseError::new(l, c, e.to_string())
    })
}

fn parse_tensor_json(text: &str) -> Result<Tensor3, ParseError> {
    let file: TensorFile =
        serde_json::from_str(text).map_err(|e| ParseError::new(e.line(), e.column(), e.to_string()))?;
    // shape errors point at the opening brace of the document
    let start = text.find('{').unwrap_or(0);
    let line = text[..start].matches('\n').count() + 1;
    let column = start - text[..start].rfind('\n').map_or(0, |i| i + 1) + 1;
    build_tensor(file, |_| (line, column))
}

/// Integer tokens with their positions, skipping comments.
fn tokens(text: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let mut offset = 0;
        for tok in body.split_whitespace() {
            let col = body[offset..].find(tok).expect("token present") + offset;
            offset = col + tok.len();
            out.push((li + 1, col + 1, tok));
        }
    }
    out
}

fn parse_tensor_text(text: &str) -> Result<Tensor3, ParseError> {
    let toks = tokens(text);
    let Some(&(hline, _, _)) = toks.first() else {
        return Err(ParseError::new(1, 1, "empty tensor file"));
    };
    let header: Vec<_> = toks.iter().filter(|t| t.0 == hline).collect();
    let int = |&(l, c, s): &(usize, usize, &str)| -> Result<i64, ParseError> {
        s.parse::<i64>().map_err(|_| ParseError::new(l, c, format!("expected an integer, found {s:?}")))
    };
    if header.len() < 2 || header.len() > 3 {
        return Err(ParseError::new(hline, 1, "header must be `n p [label]`"));
    }
    let n = int(header[0])?;
    let p = int(header[1])?;
    if n <= 0 || p <= 0 {
        return Err(ParseError::new(hline, 1, "n and p must be positive"));
    }
    let (n, p) = (n as usize, p as usize);
    let label = header.get(2).map(|t| t.2.to_string());
    let body: Vec<_> = toks.iter().filter(|t| t.0 != hline).collect();

    // group body tokens into rows by line
    let mut rows: Vec<Vec<&(usize, usize, &str)>> = Vec::new();
    for t in body {
        match rows.last_mut() {
            Some(r) if r[0].0 == t.0 => r.push(t),
            _ => rows.push(vec![t]),
        }
    }
    for r in &rows {
        if r.len() != n {
            return Err(ParseError::new(r[0].0, r[0].1, format!("row has {} entries, expected {n}", r.len())));
        }
    }
    if rows.len() != n * p {
        let (l, c) = rows.last().map_or((hline, 1), |r| (r[0].0, r[0].1));
        return Err(ParseError::new(
            l,
            c,
            format!("expected {p} slices of {n} rows ({} rows), found {} rows", n * p, rows.len()),
        ));
    }
    let mut slices = Vec::with_capacity(p);
    for k in 0..p {
        let mut m = Vec::with_capacity(n);
        for r in &rows[k * n..(k + 1) * n] {
            m.push(r.iter().map(|t| int(t)).collect::<Result<Vec<_>, _>>()?);
        }
        slices.push(m);
    }
    build_tensor(TensorFile { n, p, label, slices }, |_| (hline, 1))
}

/// Writes an integer tensor in the requested format.
pub fn serialize_tensor(t: &Tensor3, format: TensorFormat) -> Result<String, SerializeError> {
    let slices = t.integer_slices().ok_or(SerializeError::NonInteger)?;
    Ok(match format {
        TensorFormat::Json => {
            let file = TensorFile { n: t.n(), p: t.p(), label: t.label().map(str::to_owned), slices };
            let mut s = serde_json::to_string(&file).expect("serialisable");
            s.push('\n');
            s
        }
        TensorFormat::Text => {
            let mut s = format!("{} {}", t.n(), t.p());
            if let Some(l) = t.label() {
                write!(s, " {l}").unwrap();
            }
            s.push('\n');
            for slice in &slices {
                s.push('\n');
                for row in slice {
                    let r: Vec<String> = row.iter().map(i64::to_string).collect();
                    s.push_str(&r.join(" "));
                    s.push('\n');
                }
            }
            s
        }
    })
}

/// Wavefront OBJ text with `v` and 1-based `f` records.
pub fn export_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::with_capacity(48 * (mesh.vertices.len() + mesh.faces.len()));
    s.push_str("# detsurf constant surface mesh\n");
    for v in &mesh.vertices {
        writeln!(s, "v {:?} {:?} {:?}", v[0], v[1], v[2]).unwrap();
    }
    for f in &mesh.faces {
        writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1).unwrap();
    }
    s
}

/// Reads the `v` and triangular `f` records of an OBJ file.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, ParseError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let c: Vec<f64> = parts
                    .map(|p| p.parse::<f64>().map_err(|_| ParseError::new(li + 1, 1, format!("bad coordinate {p:?}"))))
                    .collect::<Result<_, _>>()?;
                if c.len() < 3 {
                    return Err(ParseError::new(li + 1, 1, "vertex needs three coordinates"));
                }
                vertices.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let idx: Vec<usize> = parts
                    .map(|p| {
                        p.split('/')
                            .next()
                            .and_then(|i| i.parse::<usize>().ok())
                            .filter(|&i| i >= 1)
                            .ok_or_else(|| ParseError::new(li + 1, 1, format!("bad face index {p:?}")))
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(ParseError::new(li + 1, 1, "only triangular faces are supported"));
                }
                faces.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            _ => {}
        }
    }
    if let Some((k, _)) = faces.iter().enumerate().find(|(_, f)| f.iter().any(|&i| i >= vertices.len())) {
        return Err(ParseError::new(0, 0, format!("face {} references a missing vertex", k + 1)));
    }
    Ok(TriangleMesh { vertices, faces })
}

/// Verdict for a pair of fingerprints in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub left: String,
    pub right: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: MethodInfo,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Omitted unless requested, so that reports are byte-reproducible.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generated_at_unix: Option<u64>,
    pub fingerprints: Vec<InvariantFingerprint>,
    pub verdicts: Vec<PairVerdict>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("verdict references unknown fingerprint {0:?}")]
    UnknownFingerprint(String),
    #[error("malformed report: {0}")]
    Malformed(String),
}

impl Report {
    pub fn new(method: MethodInfo) -> Self {
        Self { method, seed: None, generated_at_unix: None, fingerprints: Vec::new(), verdicts: Vec::new() }
    }

    /// Every verdict must name fingerprints present in the report.
    pub fn validate(&self) -> Result<(), ReportError> {
        for v in &self.verdicts {
            for name in [&v.left, &v.right] {
                if !self.fingerprints.iter().any(|f| &f.label == name) {
                    return Err(ReportError::UnknownFingerprint(name.clone()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Formats `x` with 13 significant digits.
pub fn sig13(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..=12).contains(&exp) {
        format!("{:.*}", (12 - exp) as usize, x)
    } else {
        format!("{x:.12e}")
    }
}

fn kind_name(k: VerdictKind) -> &'static str {
    match k {
        VerdictKind::NotSLEquivalent => "not_sl_equivalent",
        VerdictKind::NotGLEquivalent => "not_gl_equivalent",
        VerdictKind::Inconclusive => "inconclusive",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a report. CSV has one row per fingerprint and, when verdicts are
/// present, a second table after a blank line.
pub fn write_report(report: &Report, format: ReportFormat) -> Result<String, ReportError> {
    report.validate()?;
    Ok(match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("serialisable");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut s = String::from("label,volume,affine_area,centro_affine_area,k_plus,k_minus,k_zero,convex,method\n");
            for f in &report.fingerprints {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{:?}",
                    csv_field(&f.label),
                    sig13(f.volume),
                    sig13(f.affine_area),
                    sig13(f.centro_affine_area),
                    f.census.k_plus,
                    f.census.k_minus,
                    f.census.k_zero,
                    f.convexity.is_convex(),
                    f.method.tag
                )
                .unwrap();
            }
            if !report.verdicts.is_empty() {
                s.push_str("\nleft,right,verdict,evidence\n");
                for v in &report.verdicts {
                    let ev: Vec<&str> = v.verdict.evidence.iter().map(|e| e.invariant.as_str()).collect();
                    writeln!(
                        s,
                        "{},{},{},{}",
                        csv_field(&v.left),
                        csv_field(&v.right),
                        kind_name(v.verdict.kind),
                        csv_field(&ev.join(";"))
                    )
                    .unwrap();
                }
            }
            s
        }
    })
}

pub fn parse_report_json(text: &str) -> Result<Report, ReportError> {
    let r: Report = serde_json::from_str(text).map_err(|e| ReportError::Malformed(e.to_string()))?;
    r.validate()?;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::Evidence;
    use crate::invariants::Backend;
    use crate::surface::{Census, Convexity};
    use proptest::prelude::*;

    fn fp(label: &str) -> InvariantFingerprint {
        InvariantFingerprint {
            label: label.into(),
            volume: 2.9197794095194,
            affine_area: 9.961471493,
            centro_affine_area: 11.687898336789288,
            errors: [1e-9; 3],
            evaluations: 1000,
            census: Census { k_plus: 8192, k_minus: 0, k_zero: 0 },
            convexity: Convexity::Convex,
            method: MethodInfo::for_backend(&Backend::default()),
        }
    }

    #[test]
    fn fixture_round_trips_in_both_formats() {
        for (_, t) in fixtures::all() {
            for fmt in [TensorFormat::Json, TensorFormat::Text] {
                let s = serialize_tensor(&t, fmt).unwrap();
                assert_eq!(parse_tensor(&s).unwrap(), t, "{s}");
            }
        }
    }

    #[test]
    fn text_format_example() {
        let text = "# tensor No.1\n4 3 T001\n\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n\n-1 0 1 1\n1 -1 1 -1\n-1 -1 -1 -1\n0 1 1 0\n\n0 1 -1 1\n0 -1 1 1\n0 -1 0 -1\n-1 -1 1 1\n";
        assert_eq!(parse_tensor(text).unwrap(), fixtures::no1());
    }

    #[test]
    fn slice_count_mismatch() {
        let err = parse_tensor("2 3\n1 0\n0 1\n\n0 1\n1 0\n").unwrap_err();
        assert!(err.message.contains("expected 3 slices"), "{err}");
        let err = parse_tensor(r#"{"n":2,"p":2,"slices":[[[1,0],[0,1]]]}"#).unwrap_err();
        assert!(err.message.contains("expected 2 slices"));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_tensor("2 1\n1 x\n0 1\n").unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        let err = parse_tensor("2 1\n1 0 0\n0 1\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_tensor("{\"n\": 2,\n \"p\": oops}").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_tensor("").is_err());
        assert!(parse_tensor(r#"{"n":2,"p":1,"slices":[[[1,0],[0]]]}"#).is_err());
    }

    #[test]
    fn non_integer_tensor_is_not_serialised() {
        let g = crate::tensor::random_unimodular(3, 1, 20.0);
        let t = crate::tensor::r_transform(&fixtures::no1(), &g).unwrap();
        assert_eq!(serialize_tensor(&t, TensorFormat::Json), Err(SerializeError::NonInteger));
    }

    proptest! {
        #[test]
        fn random_integer_tensors_round_trip(n in 1usize..5, p in 1usize..4, seed in any::<u64>(), json in any::<bool>()) {
            let mut state = seed;
            let mut next = || { state = crate::equivalence::splitmix64(state); (state % 21) as i64 - 10 };
            let slices: Vec<Vec<Vec<i64>>> = (0..p).map(|_| (0..n).map(|_| (0..n).map(|_| next()).collect()).collect()).collect();
            let t = Tensor3::from_integer_slices(&slices, Some("R")).unwrap();
            let fmt = if json { TensorFormat::Json } else { TensorFormat::Text };
            prop_assert_eq!(parse_tensor(&serialize_tensor(&t, fmt).unwrap()).unwrap(), t);
        }
    }

    #[test]
    fn obj_export_round_trip() {
        let f = crate::detpoly::det_poly(&fixtures::quaternion_sphere()).unwrap();
        let mesh = crate::surface::surface_mesh(&f, 8, 8).unwrap();
        let obj = export_obj(&mesh);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 66);
        let back = parse_obj(&obj).unwrap();
        assert_eq!(back.faces, mesh.faces);
        for (a, b) in back.vertices.iter().zip(&mesh.vertices) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 1e-9);
            }
        }
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
    }

    #[test]
    fn sig13_formatting() {
        assert_eq!(sig13(2.9197794095194), "2.919779409519");
        assert_eq!(sig13(11.687898336789288), "11.68789833679");
        assert_eq!(sig13(0.5), "0.5000000000000");
        assert_eq!(sig13(0.0), "0");
    }

    #[test]
    fn single_tensor_csv() {
        let mut r = Report::new(MethodInfo::for_backend(&Backend::default()));
        r.fingerprints.push(fp("T001"));
        let csv = write_report(&r, ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("T001,2.919779409519,"));
    }

    #[test]
    fn json_report_round_trip_and_validation() {
        let mut r = Report::new(MethodInfo::for_backend(&Backend::default()));
        r.seed = Some(7);
        r.fingerprints.push(fp("T001"));
        r.fingerprints.push(InvariantFingerprint { volume: 4.0314824, ..fp("T019") });
        let verdict = Verdict {
            kind: VerdictKind::NotSLEquivalent,
            evidence: vec![Evidence { invariant: "volume".into(), value1: 2.91, value2: 4.03, tolerance: 1e-3 }],
            rough_evidence: vec![],
        };
        r.verdicts.push(PairVerdict { left: "T001".into(), right: "T019".into(), verdict: verdict.clone() });
        let json = write_report(&r, ReportFormat::Json).unwrap();
        assert_eq!(parse_report_json(&json).unwrap(), r);
        assert_eq!(write_report(&r, ReportFormat::Json).unwrap(), json);
        let csv = write_report(&r, ReportFormat::Csv).unwrap();
        assert!(csv.contains("T001,T019,not_sl_equivalent,volume"));

        r.verdicts.push(PairVerdict { left: "T001".into(), right: "T404".into(), verdict });
        assert_eq!(r.validate(), Err(ReportError::UnknownFingerprint("T404".into())));
        assert!(write_report(&r, ReportFormat::Csv).is_err());
    }
}
