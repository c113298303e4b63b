//! Global implicit functions by path lifting.
//!
//! Given `F(x, y) = 0` with a left-invertible `D_yF`, the crate lifts paths
//! in `x` to curves on the zero set with a predictor–corrector tracer, builds
//! the implicit function `g` lazily on top of those lifts, and audits the
//! usual global solvability hypotheses numerically: left-invertibility, a
//! chart-transformed growth bound with an admissible weight, and monodromy
//! and path-independence probes that detect multiple sheets.
//!
//! ```
//! use std::collections::BTreeMap;
//! use gift_core::{examples, SolutionAtlas, TracerOptions, Vector};
//!
//! let diode = examples::by_name("diode", &BTreeMap::new()).unwrap();
//! let mut g = SolutionAtlas::new(diode.problem, TracerOptions::default()).unwrap();
//! let v = g.evaluate(&Vector::from_element(1, 2.0)).unwrap();
//! assert!((v[0] - 2f64.ln()).abs() < 1e-6);
//! ```

// `!(a > b)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod charts;
pub mod corrector;
pub mod domain;
pub mod error;
pub mod examples;
pub mod expr;
pub mod global;
pub mod linalg;
pub mod path;
pub mod problem;
pub mod tracer;
pub mod verdict;
pub mod weights;

pub use certify::{CertificateReport, ChartProbeReport};
pub use charts::{transformed_problem, Chart, ChartPair, ScalarMap};
pub use corrector::{newton_correct, Correction, CorrectorOptions};
pub use domain::{Domain, OpenBox, BOUNDARY_MARGIN};
pub use error::{Error, Result};
pub use examples::{ExampleDescriptor, Tag};
pub use global::{Monodromy, MonodromyReport, PathIndependenceReport, SolutionAtlas};
pub use linalg::{Matrix, Vector};
pub use path::PathSpec;
pub use problem::ImplicitProblem;
pub use tracer::{lift_path, Predictor, Trace, TraceSample, TraceStatus, TracerOptions};
pub use verdict::Verdict;
pub use weights::{check_weight, AdmissibilityReport, Weight};
