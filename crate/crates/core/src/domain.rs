//! Open domains: axis-aligned boxes with possibly infinite bounds, or an
//! arbitrary membership predicate.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Points closer than this to the boundary of a box count as outside.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Product of open intervals `(lower_i, upper_i)`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl OpenBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(Error::InvalidParams(format!(
                    "box component {i}: lower {lo} must be below upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| v.is_finite() && *v > lo + BOUNDARY_MARGIN && *v < hi - BOUNDARY_MARGIN)
    }

    /// Distance to the nearest face (infinite for an unbounded box).
    pub fn boundary_distance(&self, p: &[f64]) -> f64 {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| (v - lo).min(hi - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest finite side length, or 0 when every side is infinite.
    pub fn finite_scale(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| hi - lo)
            .filter(|w| w.is_finite())
            .fold(0.0, f64::max)
    }
}

pub type Predicate = Arc<dyn Fn(&Vector) -> bool + Send + Sync>;

/// Open domain in `R^d`.
#[derive(Clone)]
pub enum Domain {
    Box(OpenBox),
    Predicate { dim: usize, test: Predicate },
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Box(b) => f.debug_tuple("Box").field(b).finish(),
            Domain::Predicate { dim, .. } => f.debug_struct("Predicate").field("dim", dim).finish(),
        }
    }
}

impl Domain {
    pub fn unbounded(dim: usize) -> Self {
        Domain::Box(OpenBox::unbounded(dim))
    }

    pub fn predicate(dim: usize, test: impl Fn(&Vector) -> bool + Send + Sync + 'static) -> Self {
        Domain::Predicate {
            dim,
            test: Arc::new(test),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box(b) => b.dim(),
            Domain::Predicate { dim, .. } => *dim,
        }
    }

    pub fn contains(&self, p: &Vector) -> bool {
        if p.len() != self.dim() || p.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Domain::Box(b) => b.contains(p.as_slice()),
            Domain::Predicate { test, .. } => test(p),
        }
    }

    pub fn as_box(&self) -> Option<&OpenBox> {
        match self {
            Domain::Box(b) => Some(b),
            Domain::Predicate { .. } => None,
        }
    }
}

impl From<OpenBox> for Domain {
    fn from(b: OpenBox) -> Self {
        Domain::Box(b)
    }
}
