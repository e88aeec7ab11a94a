//! Embedded fixture tensors.
//!
//! `T001` … `T237` are 4 × 4 × 3 absolutely nonsingular tensors whose first
//! slice is the identity. `T020` and `T237` carry a one-entry correction to
//! the third slice so that their determinant polynomials are definite and
//! match the published polynomials. `Q1` and `Q2` are quaternion-type tensors
//! with `f = (x² + y² + z²)²` and `f = (x² + y²)² + z⁴`.

use crate::tensor::Tensor3;

type Slice = [[i64; 4]; 4];

const I4: Slice = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];

fn build(label: &str, slices: [Slice; 3]) -> Tensor3 {
    let s: Vec<Vec<Vec<i64>>> = slices.iter().map(|m| m.iter().map(|r| r.to_vec()).collect()).collect();
    Tensor3::from_integer_slices(&s, Some(label)).expect("fixture shape")
}

pub fn no1() -> Tensor3 {
    build(
        "T001",
        [
            I4,
            [[-1, 0, 1, 1], [1, -1, 1, -1], [-1, -1, -1, -1], [0, 1, 1, 0]],
            [[0, 1, -1, 1], [0, -1, 1, 1], [0, -1, 0, -1], [-1, -1, 1, 1]],
        ],
    )
}

pub fn no10() -> Tensor3 {
    build(
        "T010",
        [
            I4,
            [[0, 1, 0, 0], [0, -1, 0, 1], [1, 0, 1, 0], [0, 0, -1, -1]],
            [[1, 1, 1, 1], [-1, 0, 0, -1], [0, -1, 0, 0], [-1, 1, -1, 1]],
        ],
    )
}

pub fn no20() -> Tensor3 {
    build(
        "T020",
        [
            I4,
            [[-1, 0, 1, -1], [0, 0, 0, 1], [1, -1, 0, 0], [1, 0, 0, 0]],
            [[1, 0, 1, 1], [1, 1, 1, 0], [0, 0, 0, 1], [1, -1, -1, -1]],
        ],
    )
}

pub fn no99() -> Tensor3 {
    build(
        "T099",
        [
            I4,
            [[0, -1, -1, -1], [1, 1, 1, -1], [1, -1, 1, 0], [-1, 1, -1, 1]],
            [[0, 1, 0, 0], [0, -1, 1, 1], [1, 0, 1, -1], [1, 0, 1, 1]],
        ],
    )
}

pub fn no119() -> Tensor3 {
    build(
        "T119",
        [
            I4,
            [[0, 0, 0, -1], [-1, 1, 1, -1], [0, -1, 0, 0], [1, 0, 0, 0]],
            [[1, -1, -1, 1], [1, -1, 1, 0], [0, 1, 1, 1], [1, 1, 0, -1]],
        ],
    )
}

pub fn no207() -> Tensor3 {
    build(
        "T207",
        [
            I4,
            [[-1, -1, -1, 1], [0, 1, 1, 0], [-1, 0, 0, -1], [-1, 1, 0, -1]],
            [[-1, 1, -1, 1], [-1, 0, 1, 1], [-1, 0, -1, 1], [0, 0, -1, -1]],
        ],
    )
}

pub fn no237() -> Tensor3 {
    build(
        "T237",
        [
            I4,
            [[0, -1, 1, -1], [0, -1, -1, 0], [0, 1, -1, 0], [1, 1, 0, 1]],
            [[0, -1, -1, -1], [-1, -1, -1, 0], [0, 1, 0, 1], [1, -1, 1, 1]],
        ],
    )
}

/// Quaternion-type tensor with `f = (x² + y² + z²)²`; its body is the unit ball.
pub fn quaternion_sphere() -> Tensor3 {
    build(
        "Q1",
        [
            [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
            [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]],
            [[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],
        ],
    )
}

/// Quaternion-type tensor with `f = (x² + y²)² + z⁴`.
pub fn quaternion_flat() -> Tensor3 {
    build(
        "Q2",
        [
            [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
            [[0, 0, 0, -1], [0, 0, 1, 0], [1, 0, 0, 0], [0, 1, 0, 0]],
            [[0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1], [1, 0, 0, 0]],
        ],
    )
}

/// Names of the seven numbered fixtures.
pub const NUMBERED: [&str; 7] = ["T001", "T010", "T020", "T099", "T119", "T207", "T237"];

/// Every fixture with its name.
pub fn all() -> Vec<(&'static str, Tensor3)> {
    vec![
        ("T001", no1()),
        ("T010", no10()),
        ("T020", no20()),
        ("T099", no99()),
        ("T119", no119()),
        ("T207", no207()),
        ("T237", no237()),
        ("Q1", quaternion_sphere()),
        ("Q2", quaternion_flat()),
    ]
}

/// Looks up a fixture by name (`T001`, `t1`, `No.1`, `Q1`, … case-insensitive).
pub fn fixture(name: &str) -> Option<Tensor3> {
    let key = name.trim().to_ascii_uppercase();
    let key = key.strip_prefix("NO.").or_else(|| key.strip_prefix("NO")).map(|d| format!("T{d}")).unwrap_or(key);
    let canonical = match key.strip_prefix('T').and_then(|d| d.parse::<u32>().ok()) {
        Some(num) => format!("T{num:03}"),
        None => key,
    };
    all().into_iter().find(|(n, _)| *n == canonical).map(|(_, t)| t)
}
