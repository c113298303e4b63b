//! The global implicit function, materialized lazily from path lifts.
//!
//! A [`SolutionAtlas`] caches accepted points `(x, y)` of the traced
//! component. Evaluating at a new `x` lifts a straight segment (in chart
//! coordinates when a planning chart is set) from the nearest cached point.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::charts::Chart;
use crate::corrector::newton_correct;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::path::PathSpec;
use crate::problem::ImplicitProblem;
use crate::tracer::{lift_path, Trace, TracerOptions};
use crate::verdict::Verdict;

/// Loops and path families agree when endpoints differ by at most this many
/// multiples of the trace tolerance.
pub const GAP_FACTOR: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct SolutionAtlas {
    problem: ImplicitProblem,
    chart: Option<Chart>,
    opts: TracerOptions,
    snap_radius: f64,
    cache: Vec<(Vector, Vector)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Monodromy {
    Closed { gap: f64 },
    Open { gap: f64 },
}

impl Monodromy {
    pub fn gap(&self) -> f64 {
        match *self {
            Monodromy::Closed { gap } | Monodromy::Open { gap } => gap,
        }
    }

    pub fn is_open(&self) -> bool {
        matches!(self, Monodromy::Open { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub outcome: Monodromy,
    pub y_start: Vec<f64>,
    pub y_end: Vec<f64>,
    pub threshold: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathIndependenceReport {
    pub target: Vec<f64>,
    pub endpoints: Vec<Vec<f64>>,
    pub max_gap: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Serializable cache contents for resuming a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasSnapshot {
    pub problem: String,
    pub parameters: BTreeMap<String, f64>,
    pub trace_tol: f64,
    pub snap_radius: f64,
    pub samples: Vec<(Vec<f64>, Vec<f64>)>,
}

fn to_vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

impl SolutionAtlas {
    /// Atlas seeded at the problem's seed, which must be a regular zero.
    pub fn new(problem: ImplicitProblem, opts: TracerOptions) -> Result<Self> {
        opts.validate()?;
        problem.validate_seed()?;
        let (x0, y0) = problem.seed();
        let cache = vec![(x0.clone(), y0.clone())];
        let snap_radius = 1e-6 * problem.x_scale();
        Ok(Self {
            problem,
            chart: None,
            opts,
            snap_radius,
            cache,
        })
    }

    /// Plan evaluation paths as straight lines in the coordinates of `chart`.
    pub fn with_chart(mut self, chart: Chart) -> Result<Self> {
        if chart.dim() != self.problem.m() {
            return Err(Error::ChartDomainMismatch(format!(
                "planning chart acts on R^{}, problem has m = {}",
                chart.dim(),
                self.problem.m()
            )));
        }
        self.chart = Some(chart);
        Ok(self)
    }

    pub fn problem(&self) -> &ImplicitProblem {
        &self.problem
    }

    pub fn options(&self) -> &TracerOptions {
        &self.opts
    }

    pub fn snap_radius(&self) -> f64 {
        self.snap_radius
    }

    pub fn samples(&self) -> &[(Vector, Vector)] {
        &self.cache
    }

    fn nearest(&self, x: &Vector) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, (cx, _)) in self.cache.iter().enumerate() {
            let d = (cx - x).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Cached value at a point within the snap radius of `x`.
    pub fn cached_at(&self, x: &Vector) -> Option<&Vector> {
        let (i, d) = self.nearest(x);
        (d <= self.snap_radius).then(|| &self.cache[i].1)
    }

    fn insert(&mut self, x: Vector, y: Vector) {
        if self.nearest(&x).1 > self.snap_radius {
            self.cache.push((x, y));
        }
    }

    fn absorb_unchecked(&mut self, trace: &Trace) {
        for s in &trace.samples {
            self.insert(s.x_vec(), s.y_vec());
        }
    }

    fn require_in_domain(&self, x: &Vector) -> Result<()> {
        if x.len() != self.problem.m() {
            return Err(Error::DimensionMismatch(format!(
                "x has length {}, expected {}",
                x.len(),
                self.problem.m()
            )));
        }
        if !self.problem.domain_x().contains(x) {
            return Err(Error::DomainViolation {
                which: "x",
                point: to_vec(x),
            });
        }
        Ok(())
    }

    fn plan(&self, from: &Vector, to: &Vector) -> Result<PathSpec> {
        Ok(match &self.chart {
            Some(c) => PathSpec::ChartLine {
                from: c.forward(from)?,
                to: c.forward(to)?,
                chart: c.clone(),
            },
            None => PathSpec::segment(from.clone(), to.clone()),
        })
    }

    fn lift(&self, path: &PathSpec, y_start: &Vector) -> Result<Trace> {
        let tr = lift_path(&self.problem, path, y_start, &self.opts)?;
        if !tr.is_completed() {
            return Err(Error::Unreachable(tr.status));
        }
        Ok(tr)
    }

    /// `g(x_target)`: cached, snapped and re-corrected, or lifted from the
    /// nearest cached point.
    pub fn evaluate(&mut self, x_target: &Vector) -> Result<Vector> {
        self.require_in_domain(x_target)?;
        if let Some((_, y)) = self.cache.iter().find(|(x, _)| x == x_target) {
            return Ok(y.clone());
        }
        let (i, d) = self.nearest(x_target);
        let (x0, y0) = self.cache[i].clone();
        if d <= self.snap_radius {
            return Ok(newton_correct(&self.problem, x_target, &y0, &self.opts.corrector)?.y);
        }
        let tr = self.lift(&self.plan(&x0, x_target)?, &y0)?;
        let y = tr.final_y().expect("completed trace has samples");
        self.cache.push((x_target.clone(), y.clone()));
        self.absorb_unchecked(&tr);
        Ok(y)
    }

    /// `Dg(x) = -S(x, g(x)) D_xF(x, g(x))`.
    pub fn derivative(&mut self, x: &Vector) -> Result<Matrix> {
        let y = self.evaluate(x)?;
        let s = linalg::left_inverse(&self.problem.jac_y(x, &y)?)?;
        Ok(-(s * self.problem.jac_x(x, &y)?))
    }

    fn start_value(&self, path: &PathSpec) -> Result<Vector> {
        let x0 = path.start()?;
        self.cached_at(&x0)
            .cloned()
            .ok_or_else(|| Error::InvalidPath(format!("path starts at {:?}, which is not cached", x0.as_slice())))
    }

    /// Cache the samples of a completed trace of this problem.
    pub fn absorb(&mut self, trace: &Trace) -> Result<()> {
        if !trace.is_completed() {
            return Err(Error::Unreachable(trace.status));
        }
        for s in &trace.samples {
            let r = self.problem.residual_norm(&s.x_vec(), &s.y_vec())?;
            if !(r <= self.opts.trace_tol) {
                return Err(Error::NoConvergence {
                    iterations: 0,
                    residual: r,
                });
            }
        }
        self.absorb_unchecked(trace);
        Ok(())
    }

    /// Lift `path` from a cached start point and cache the samples.
    pub fn extend(&mut self, path: &PathSpec) -> Result<Trace> {
        let y0 = self.start_value(path)?;
        let tr = self.lift(path, &y0)?;
        self.absorb_unchecked(&tr);
        Ok(tr)
    }

    /// Lift a closed loop from a cached point and compare the endpoint values.
    /// Nothing is cached: on an open loop the end lies on another sheet.
    pub fn monodromy_check(&self, lp: &PathSpec) -> Result<MonodromyReport> {
        let (a, b) = (lp.start()?, lp.end()?);
        if (&a - &b).norm() > self.snap_radius {
            return Err(Error::InvalidPath("loop does not return to its start".into()));
        }
        let y0 = self.start_value(lp)?;
        let tr = self.lift(lp, &y0)?;
        let y1 = tr.final_y().expect("completed trace has samples");
        let gap = (&y1 - &y0).norm();
        let threshold = GAP_FACTOR * self.opts.trace_tol;
        let outcome = if gap <= threshold {
            Monodromy::Closed { gap }
        } else {
            Monodromy::Open { gap }
        };
        Ok(MonodromyReport {
            outcome,
            y_start: to_vec(&y0),
            y_end: to_vec(&y1),
            threshold,
            samples: tr.samples.len(),
        })
    }

    /// Lift every path (each from a cached point to `x_target`) and compare
    /// the endpoint values pairwise. Nothing is cached.
    pub fn path_independence_check(&self, x_target: &Vector, paths: &[PathSpec]) -> Result<PathIndependenceReport> {
        if paths.len() < 2 {
            return Err(Error::InvalidPath("path independence needs at least two paths".into()));
        }
        self.require_in_domain(x_target)?;
        let mut ends = Vec::with_capacity(paths.len());
        for p in paths {
            if (p.end()? - x_target).norm() > self.snap_radius {
                return Err(Error::InvalidPath(format!(
                    "path does not end at {:?}",
                    x_target.as_slice()
                )));
            }
            let y0 = self.start_value(p)?;
            ends.push(self.lift(p, &y0)?.final_y().expect("completed trace has samples"));
        }
        let mut max_gap: f64 = 0.0;
        for i in 0..ends.len() {
            for j in i + 1..ends.len() {
                max_gap = max_gap.max((&ends[i] - &ends[j]).norm());
            }
        }
        let threshold = GAP_FACTOR * self.opts.trace_tol;
        Ok(PathIndependenceReport {
            target: to_vec(x_target),
            endpoints: ends.iter().map(to_vec).collect(),
            max_gap,
            threshold,
            verdict: if max_gap <= threshold {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        })
    }

    pub fn snapshot(&self) -> AtlasSnapshot {
        AtlasSnapshot {
            problem: self.problem.name().to_string(),
            parameters: self.problem.parameters().clone(),
            trace_tol: self.opts.trace_tol,
            snap_radius: self.snap_radius,
            samples: self.cache.iter().map(|(x, y)| (to_vec(x), to_vec(y))).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.snapshot())?)
    }

    /// Rebuild an atlas for `problem` from a snapshot, re-checking every
    /// cached residual.
    pub fn restore(problem: ImplicitProblem, opts: TracerOptions, snap: &AtlasSnapshot) -> Result<Self> {
        if snap.problem != problem.name() || &snap.parameters != problem.parameters() {
            return Err(Error::Parse(format!(
                "snapshot belongs to {:?} {:?}, not {:?} {:?}",
                snap.problem,
                snap.parameters,
                problem.name(),
                problem.parameters()
            )));
        }
        let mut atlas = Self::new(problem, opts)?;
        atlas.cache.clear();
        for (x, y) in &snap.samples {
            let (x, y) = (Vector::from_column_slice(x), Vector::from_column_slice(y));
            let r = atlas.problem.residual_norm(&x, &y)?;
            if !(r <= atlas.opts.trace_tol) {
                return Err(Error::Parse(format!(
                    "cached sample {:?} has residual {r:e}",
                    x.as_slice()
                )));
            }
            atlas.insert(x, y);
        }
        if atlas.cache.is_empty() {
            return Err(Error::Parse("snapshot has no samples".into()));
        }
        Ok(atlas)
    }

    pub fn from_json(problem: ImplicitProblem, opts: TracerOptions, json: &str) -> Result<Self> {
        Self::restore(problem, opts, &serde_json::from_str(json)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{self, cubic_root};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, TAU};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn atlas(name: &str) -> SolutionAtlas {
        let d = examples::by_name(name, &BTreeMap::new()).unwrap();
        SolutionAtlas::new(d.problem, TracerOptions::default()).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let mut a = atlas("diode");
        assert_abs_diff_eq!(a.evaluate(&v(&[2.0])).unwrap()[0], 2f64.ln(), epsilon = 1e-6);
        let mut a = atlas("linear");
        let y = a.evaluate(&v(&[1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(y, v(&[-0.5, -0.5]), epsilon = 1e-8);
        let mut a = atlas("cubic");
        assert_abs_diff_eq!(a.evaluate(&v(&[2.0])).unwrap()[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn evaluate_is_idempotent_and_caches() {
        let mut a = atlas("cubic");
        let y1 = a.evaluate(&v(&[5.0])).unwrap();
        let n = a.samples().len();
        assert!(n > 2);
        let y2 = a.evaluate(&v(&[5.0])).unwrap();
        assert_eq!(y1, y2);
        assert_eq!(a.samples().len(), n);
        for (x, y) in a.samples() {
            assert!(a.problem().residual_norm(x, y).unwrap() <= 1e-8);
        }
        // keys are separated by more than the snap radius
        let s = a.samples();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert!((&s[i].0 - &s[j].0).norm() > a.snap_radius());
            }
        }
        assert_abs_diff_eq!(
            a.evaluate(&v(&[5.0 + 1e-9])).unwrap()[0],
            cubic_root(5.0 + 1e-9),
            epsilon = 1e-9
        );
    }

    #[test]
    fn unreachable_target() {
        let mut a = atlas("diode");
        match a.evaluate(&v(&[-3.0])) {
            Err(Error::Unreachable(s)) => assert!(!s.is_completed()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derivatives() {
        let mut a = atlas("line");
        assert_abs_diff_eq!(a.derivative(&v(&[0.7])).unwrap()[(0, 0)], 1.0, epsilon = 1e-12);
        let mut a = atlas("diode");
        assert_abs_diff_eq!(a.derivative(&v(&[2.0])).unwrap()[(0, 0)], 0.25, epsilon = 1e-8);
        let mut a = atlas("linear");
        assert_abs_diff_eq!(
            a.derivative(&v(&[0.3, -2.0])).unwrap(),
            Matrix::identity(2, 2) * -0.5,
            epsilon = 1e-14
        );
    }

    #[test]
    fn derivative_matches_differences_of_evaluate() {
        for name in ["diode", "cubic", "linear"] {
            let mut a = atlas(name);
            let m = a.problem().m();
            let x = Vector::from_element(m, 1.3);
            let dg = a.derivative(&x).unwrap();
            for j in 0..m {
                let mut e = Vector::zeros(m);
                e[j] = 1e-5;
                let fd = (a.evaluate(&(&x + &e)).unwrap() - a.evaluate(&(&x - &e)).unwrap()) / 2e-5;
                for i in 0..a.problem().n() {
                    let rel = (fd[i] - dg[(i, j)]).abs() / dg[(i, j)].abs().max(1e-12);
                    assert!(
                        rel <= 1e-4 || (dg[(i, j)] == 0.0 && fd[i].abs() < 1e-6),
                        "{name}: {rel:e}"
                    );
                }
            }
        }
    }

    #[test]
    fn path_independence() {
        let a = atlas("diode");
        let direct = PathSpec::segment(v(&[0.0]), v(&[2.0]));
        let detour = PathSpec::Polyline(vec![v(&[0.0]), v(&[3.0]), v(&[2.0])]);
        let r = a.path_independence_check(&v(&[2.0]), &[direct, detour]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.max_gap <= 1e-6);

        let a = atlas("linear");
        let t = v(&[1.0, 1.0]);
        let straight = PathSpec::segment(v(&[0.0, 0.0]), t.clone());
        let ell = PathSpec::Polyline(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), t.clone()]);
        let r = a.path_independence_check(&t, &[straight, ell]).unwrap();
        assert!(r.max_gap <= 1e-8);
    }

    #[test]
    fn annulus_half_turns_disagree() {
        let d = examples::annulus(0.5, 1.0, 1.0).unwrap();
        let mut a = SolutionAtlas::new(d.problem, TracerOptions::default()).unwrap();
        let origin = v(&[0.0, 0.0]);
        // advance the angle from 0.8 pi to 2 pi so both half-turns stay inside y1 in (0, 1/2)
        let arc = PathSpec::circle(origin.clone(), 1.5, 0.6, (1, 0), 0.8 * PI);
        let tr = a.extend(&arc).unwrap();
        assert_abs_diff_eq!(tr.final_y().unwrap()[0], 0.25, epsilon = 1e-6);
        let target = v(&[0.0, -1.5]);
        let ccw = PathSpec::circle(origin.clone(), 1.5, 0.5, (1, 0), TAU);
        let cw = PathSpec::circle(origin, 1.5, -0.5, (1, 0), TAU);
        let r = a.path_independence_check(&target, &[ccw, cw]).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_abs_diff_eq!((r.endpoints[0][0] - r.endpoints[1][0]).abs(), 0.25, epsilon = 1e-3);
    }

    #[test]
    fn monodromy_examples() {
        for name in ["annulus", "circle-x", "constrained-circle"] {
            let d = examples::by_name(name, &BTreeMap::new()).unwrap();
            let lp = d.designated_loop.clone().unwrap();
            let a = SolutionAtlas::new(d.problem.clone(), TracerOptions::default()).unwrap();
            let r = a.monodromy_check(&lp.path).unwrap();
            if lp.expected_gap > 0.0 {
                assert!(r.outcome.is_open(), "{name}");
                assert_abs_diff_eq!(r.outcome.gap(), lp.expected_gap, epsilon = 1e-5);
            } else {
                assert!(!r.outcome.is_open(), "{name}: {:?}", r.outcome);
            }
        }
    }

    #[test]
    fn snapshot_roundtrip() {
        let mut a = atlas("diode");
        a.evaluate(&v(&[4.0])).unwrap();
        let json = a.to_json().unwrap();
        let d = examples::by_name("diode", &BTreeMap::new()).unwrap();
        let mut b = SolutionAtlas::from_json(d.problem, TracerOptions::default(), &json).unwrap();
        assert_eq!(b.samples(), a.samples());
        assert_eq!(b.evaluate(&v(&[4.0])).unwrap(), a.evaluate(&v(&[4.0])).unwrap());
        let other = examples::by_name("cubic", &BTreeMap::new()).unwrap();
        assert!(SolutionAtlas::from_json(other.problem, TracerOptions::default(), &json).is_err());
    }

    #[test]
    fn chart_planning() {
        let d = examples::by_name("diode", &BTreeMap::new()).unwrap();
        let mut a = SolutionAtlas::new(d.problem, TracerOptions::default())
            .unwrap()
            .with_chart(d.charts.phi.clone())
            .unwrap();
        assert_abs_diff_eq!(a.evaluate(&v(&[10.0])).unwrap()[0], 6f64.ln(), epsilon = 1e-6);
    }
}
