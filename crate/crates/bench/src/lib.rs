//! Shared fixtures for the criterion benchmarks in `benches/`.

use std::collections::BTreeMap;

use gift_core::examples::by_name;
use gift_core::{ExampleDescriptor, Matrix, PathSpec, Vector};

pub fn example(name: &str) -> ExampleDescriptor {
    by_name(name, &BTreeMap::new()).expect("bundled example")
}

/// Diode sweep across most of the reachable current range.
pub fn diode_sweep() -> PathSpec {
    PathSpec::segment(Vector::from_column_slice(&[-1.5]), Vector::from_column_slice(&[15.0]))
}

/// Deterministic, well-conditioned `l x n` test matrix.
pub fn test_matrix(l: usize, n: usize) -> Matrix {
    Matrix::from_fn(l, n, |i, j| {
        if i == j {
            2.0
        } else {
            ((i * 7 + j * 3) % 5) as f64 / 10.0 - 0.2
        }
    })
}
