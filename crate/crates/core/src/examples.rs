//! Bundled worked examples and counterexamples with closed-form oracles.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::charts::{psi_from_scalar_solution, Chart, ChartPair, ScalarMap};
use crate::domain::OpenBox;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::path::PathSpec;
use crate::problem::ImplicitProblem;
use crate::weights::Weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tag {
    Solvable,
    MonodromyOpen,
    RankLossAtPoint,
    GrowthBoundFails,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Solvable => "solvable",
            Tag::MonodromyOpen => "monodromy-open",
            Tag::RankLossAtPoint => "rank-loss-at-point",
            Tag::GrowthBoundFails => "growth-bound-fails",
        })
    }
}

/// Region used to draw test points from uniform numbers in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleRegion {
    Box(OpenBox),
    /// `x[axes.0] = r cos(theta)`, `x[axes.1] = r sin(theta)` in `R^dim`.
    Ring {
        dim: usize,
        radius: (f64, f64),
        angle: (f64, f64),
        axes: (usize, usize),
    },
}

impl SampleRegion {
    /// How many uniforms [`SampleRegion::point`] consumes.
    pub fn arity(&self) -> usize {
        match self {
            SampleRegion::Box(b) => b.dim(),
            SampleRegion::Ring { .. } => 2,
        }
    }

    pub fn point(&self, u: &[f64]) -> Vector {
        match self {
            SampleRegion::Box(b) => Vector::from_iterator(
                b.dim(),
                (0..b.dim()).map(|i| b.lower[i] + u[i] * (b.upper[i] - b.lower[i])),
            ),
            SampleRegion::Ring {
                dim,
                radius,
                angle,
                axes,
            } => {
                let r = radius.0 + u[0] * (radius.1 - radius.0);
                let th = angle.0 + u[1] * (angle.1 - angle.0);
                let mut x = Vector::zeros(*dim);
                x[axes.0] = r * th.cos();
                x[axes.1] = r * th.sin();
                x
            }
        }
    }
}

pub type OracleG = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type OracleDg = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;

/// Closed-form implicit function and its derivative on the seeded sheet.
#[derive(Clone)]
pub struct Oracle {
    pub g: OracleG,
    pub dg: OracleDg,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Oracle")
    }
}

/// A closed loop expected to lift with the given endpoint gap.
#[derive(Debug, Clone)]
pub struct DesignatedLoop {
    pub path: PathSpec,
    pub expected_gap: f64,
}

#[derive(Debug, Clone)]
pub struct ExampleDescriptor {
    pub name: String,
    pub summary: String,
    pub parameters: BTreeMap<String, f64>,
    pub problem: ImplicitProblem,
    pub charts: ChartPair,
    pub weight: Weight,
    pub oracle: Option<Oracle>,
    pub tags: Vec<Tag>,
    /// Where the oracle is valid, i.e. a subset of the x-projection of the zero set.
    pub x_region: SampleRegion,
    /// Region of y used for Jacobian cross-checks.
    pub y_region: SampleRegion,
    pub designated_loop: Option<DesignatedLoop>,
}

impl ExampleDescriptor {
    pub fn has_tag(&self, t: Tag) -> bool {
        self.tags.contains(&t)
    }
}

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn m1(a: f64) -> Matrix {
    Matrix::from_element(1, 1, a)
}

fn shrink(lo: f64, hi: f64, frac: f64) -> OpenBox {
    let d = (hi - lo) * frac;
    OpenBox::interval(lo + d, hi - d).expect("nonempty interval")
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

fn check_interval(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo < hi) || lo.is_nan() || hi.is_nan() {
        return Err(invalid(format!("{name} = ({lo}, {hi}) is not an open interval")));
    }
    Ok(())
}

/// Two-diode circuit `I = a1 (e^{V/b1} - 1) + a2 (e^{V/b2} - 1)`, solved for `V`.
pub fn diode_circuit(
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    v_bounds: (f64, f64),
    i_bounds: (f64, f64),
) -> Result<ExampleDescriptor> {
    if [a1, a2, b1, b2].iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(invalid(format!(
            "diode coefficients must be positive, got {a1}, {a2}, {b1}, {b2}"
        )));
    }
    check_interval("V bounds", v_bounds)?;
    check_interval("I bounds", i_bounds)?;
    if !(v_bounds.0 < 0.0 && 0.0 < v_bounds.1 && i_bounds.0 < 0.0 && 0.0 < i_bounds.1) {
        return Err(invalid("diode bounds must contain the seed (I, V) = (0, 0)"));
    }
    let f = move |u: f64| a1 * ((u / b1).exp() - 1.0) + a2 * ((u / b2).exp() - 1.0);
    let df = move |u: f64| a1 / b1 * (u / b1).exp() + a2 / b2 * (u / b2).exp();
    let ibox = OpenBox::interval(i_bounds.0, i_bounds.1)?;
    let problem = ImplicitProblem::builder("diode", 1, 1, 1, move |x, y| v(&[x[0] - f(y[0])]))
        .jac_x(|_, _| m1(1.0))
        .jac_y(move |_, y| m1(-df(y[0])))
        .domain_x(ibox.clone())
        .domain_y(OpenBox::interval(v_bounds.0, v_bounds.1)?)
        .seed(v(&[0.0]), v(&[0.0]))
        .param("a1", a1)
        .param("a2", a2)
        .param("b1", b1)
        .param("b2", b2)
        .build()?;

    let phi = Chart::tangent_box(ibox);
    let psi = psi_from_scalar_solution(&phi, ScalarMap::new(f).with_derivative(df), v_bounds)?;
    let oracle = (a1 == a2 && b1 == b2).then(|| {
        let (a, b) = (a1, b1);
        Oracle {
            g: Arc::new(move |x: &Vector| v(&[b * (1.0 + x[0] / (2.0 * a)).ln()])),
            dg: Arc::new(move |x: &Vector| m1(b / (2.0 * a + x[0]))),
        }
    });
    let reach = (f(v_bounds.0).max(i_bounds.0), f(v_bounds.1).min(i_bounds.1));
    let parameters = problem.parameters().clone();
    Ok(ExampleDescriptor {
        name: "diode".into(),
        summary: "two-diode circuit I = f(V), solved for V".into(),
        parameters: extend(
            parameters,
            &[
                ("v_min", v_bounds.0),
                ("v_max", v_bounds.1),
                ("i_min", i_bounds.0),
                ("i_max", i_bounds.1),
            ],
        ),
        problem,
        charts: ChartPair::new(phi, psi),
        weight: Weight::affine(1.0, 1.0),
        oracle,
        tags: vec![Tag::Solvable],
        x_region: SampleRegion::Box(shrink(reach.0, reach.1, 0.02)),
        y_region: SampleRegion::Box(shrink(v_bounds.0, v_bounds.1, 0.02)),
        designated_loop: None,
    })
}

fn extend(mut map: BTreeMap<String, f64>, extra: &[(&str, f64)]) -> BTreeMap<String, f64> {
    for (k, val) in extra {
        map.insert(k.to_string(), *val);
    }
    map
}

/// `F(x, y) = x - y`, optionally with `y` restricted to an open interval.
/// The recommended charts use the same map on both sides.
pub fn line_problem(y_interval: Option<(f64, f64)>) -> Result<ExampleDescriptor> {
    let mut b = ImplicitProblem::builder("line", 1, 1, 1, |x, y| v(&[x[0] - y[0]]))
        .jac_x(|_, _| m1(1.0))
        .jac_y(|_, _| m1(-1.0));
    let (charts, region, params) = match y_interval {
        Some((lo, hi)) => {
            check_interval("y interval", (lo, hi))?;
            let mid = 0.5 * (lo + hi);
            let bx = OpenBox::interval(lo, hi)?;
            b = b.domain_y(bx.clone()).seed(v(&[mid]), v(&[mid]));
            let c = Chart::tangent_box(bx);
            (
                ChartPair::new(c.clone(), c),
                shrink(lo, hi, 0.005),
                vec![("y_min", lo), ("y_max", hi)],
            )
        }
        None => {
            b = b.seed(v(&[0.0]), v(&[0.0]));
            (ChartPair::identity(1, 1), shrink(-10.0, 10.0, 0.0), vec![])
        }
    };
    let problem = b.build()?;
    Ok(ExampleDescriptor {
        name: "line".into(),
        summary: "F(x, y) = x - y, optionally with y in an open interval".into(),
        parameters: extend(BTreeMap::new(), &params),
        problem,
        charts,
        weight: Weight::affine(1.0, 1.0),
        oracle: Some(Oracle {
            g: Arc::new(|x: &Vector| x.clone()),
            dg: Arc::new(|_: &Vector| m1(1.0)),
        }),
        tags: vec![Tag::Solvable],
        x_region: SampleRegion::Box(region.clone()),
        y_region: SampleRegion::Box(region),
        designated_loop: None,
    })
}

/// `F(x, y) = (x1 - cos y, x2 - sin y)`: the zero set covers the unit circle
/// infinitely often, so the global implicit function does not exist.
pub fn circle_in_x() -> Result<ExampleDescriptor> {
    let problem = ImplicitProblem::builder("circle-x", 2, 1, 2, |x, y| v(&[x[0] - y[0].cos(), x[1] - y[0].sin()]))
        .jac_x(|_, _| Matrix::identity(2, 2))
        .jac_y(|_, y| Matrix::from_column_slice(2, 1, &[y[0].sin(), -y[0].cos()]))
        .seed(v(&[1.0, 0.0]), v(&[0.0]))
        .build()?;
    let ring = SampleRegion::Ring {
        dim: 2,
        radius: (1.0, 1.0),
        angle: (-PI + 1e-3, PI - 1e-3),
        axes: (0, 1),
    };
    Ok(ExampleDescriptor {
        name: "circle-x".into(),
        summary: "x = (cos y, sin y); lifts of the unit circle do not close".into(),
        parameters: BTreeMap::new(),
        problem,
        charts: ChartPair::identity(2, 1),
        weight: Weight::affine(1.0, 1.0),
        oracle: Some(Oracle {
            g: Arc::new(|x: &Vector| v(&[x[1].atan2(x[0])])),
            dg: Arc::new(|x: &Vector| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                Matrix::from_row_slice(1, 2, &[-x[1] / r2, x[0] / r2])
            }),
        }),
        tags: vec![Tag::MonodromyOpen],
        x_region: ring,
        y_region: SampleRegion::Box(OpenBox::interval(-10.0, 10.0)?),
        designated_loop: Some(DesignatedLoop {
            path: PathSpec::circle(v(&[0.0, 0.0]), 1.0, 1.0, (0, 1), 0.0),
            expected_gap: TAU,
        }),
    })
}

pub type CurveFn = Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

/// A plane curve with its first and second derivatives.
#[derive(Clone)]
pub struct PlaneCurve {
    pub value: CurveFn,
    pub first: CurveFn,
    pub second: CurveFn,
}

impl PlaneCurve {
    pub fn new(
        value: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static,
        first: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static,
        second: impl Fn(f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            first: Arc::new(first),
            second: Arc::new(second),
        }
    }
}

/// Tube map `T(y) = gamma(y1) + (y2 - 1/2) R gamma'(y1) / |gamma'(y1)|` with
/// `R` the rotation by +90 degrees, and its Jacobian.
pub fn tube_map(curve: &PlaneCurve, y: &Vector) -> (Vector, Matrix) {
    let g = (curve.value)(y[0]);
    let d = (curve.first)(y[0]);
    let dd = (curve.second)(y[0]);
    let speed = d[0].hypot(d[1]);
    let s = y[1] - 0.5;
    // R (a, b) = (-b, a)
    let nrm = [-d[1] / speed, d[0] / speed];
    let dot = d[0] * dd[0] + d[1] * dd[1];
    let u = [
        dd[0] / speed - d[0] * dot / speed.powi(3),
        dd[1] / speed - d[1] * dot / speed.powi(3),
    ];
    let dn = [-u[1], u[0]];
    let val = v(&[g[0] + s * nrm[0], g[1] + s * nrm[1]]);
    let jac = Matrix::from_row_slice(2, 2, &[d[0] + s * dn[0], nrm[0], d[1] + s * dn[1], nrm[1]]);
    (val, jac)
}

/// `F(x, y) = x - T(y)` on `y in y1_interval x (0, 1)` for the tube map `T`
/// around `curve`, seeded at `seed_y`.
pub fn tube_problem(
    name: &str,
    curve: PlaneCurve,
    y1_interval: (f64, f64),
    seed_y: (f64, f64),
) -> Result<ImplicitProblem> {
    check_interval("y1 interval", y1_interval)?;
    let (lo, hi) = y1_interval;
    let speeds: Vec<(f64, f64)> = (0..=1000)
        .map(|k| {
            let s = lo + (hi - lo) * k as f64 / 1000.0;
            let d = (curve.first)(s);
            (s, d[0].hypot(d[1]))
        })
        .collect();
    let top = speeds.iter().map(|p| p.1).fold(0.0, f64::max);
    if let Some(&(at, _)) = speeds
        .iter()
        .find(|p| !(p.1 > 1e-12 * top.max(1e-300)) || !p.1.is_finite())
    {
        return Err(Error::DegenerateTube { at });
    }
    let c1 = curve.clone();
    let c2 = curve.clone();
    let x0 = tube_map(&curve, &v(&[seed_y.0, seed_y.1])).0;
    ImplicitProblem::builder(name, 2, 2, 2, move |x, y| x - tube_map(&c1, y).0)
        .jac_x(|_, _| Matrix::identity(2, 2))
        .jac_y(move |_, y| -tube_map(&c2, y).1)
        .domain_y(OpenBox::new(vec![lo, 0.0], vec![hi, 1.0])?)
        .seed(x0, v(&[seed_y.0, seed_y.1]))
        .build()
}

/// Circle of radius `alpha + 1/2` run through `1 + eps` times on `(0, delta)`.
pub fn annulus_curve(delta: f64, alpha: f64, eps: f64) -> PlaneCurve {
    let k = TAU * (1.0 + eps) / delta;
    let r = alpha + 0.5;
    PlaneCurve::new(
        move |s| [r * (k * s).sin(), r * (k * s).cos()],
        move |s| [r * k * (k * s).cos(), -r * k * (k * s).sin()],
        move |s| [-r * k * k * (k * s).sin(), -r * k * k * (k * s).cos()],
    )
}

/// Annulus counterexample: the tube around a circle of radius `alpha + 1/2`
/// traversed `1 + eps` times as `y1` runs over `(0, delta)`, giving
/// `T(y) = (alpha + y2) (sin k y1, cos k y1)` with `k = 2 pi (1 + eps) / delta`.
pub fn annulus(delta: f64, alpha: f64, eps: f64) -> Result<ExampleDescriptor> {
    if !(delta > 0.0 && alpha > 0.0 && eps > -1.0) || ![delta, alpha, eps].iter().all(|p| p.is_finite()) {
        return Err(invalid(format!(
            "annulus needs delta > 0, alpha > 0, eps > -1; got {delta}, {alpha}, {eps}"
        )));
    }
    let k = TAU * (1.0 + eps) / delta;
    let curve = annulus_curve(delta, alpha, eps);
    let seed = (delta / 5.0, 0.5);
    let problem = tube_problem("annulus", curve, (0.0, delta), seed)?;
    let problem = problem_with_params(problem, &[("delta", delta), ("alpha", alpha), ("eps", eps)]);
    let parameters = problem.parameters().clone();
    // the branch of the angle in [0, 2 pi) stays inside y1 in (0, delta)
    let sheet = move |x: &Vector| {
        let th = x[0].atan2(x[1]).rem_euclid(TAU);
        (th, x[0].hypot(x[1]))
    };
    Ok(ExampleDescriptor {
        name: "annulus".into(),
        summary: "tube around a circle wound 1 + eps times; lifts of loops do not close".into(),
        parameters,
        problem,
        charts: ChartPair::identity(2, 2),
        weight: Weight::affine(1.0, 1.0),
        oracle: Some(Oracle {
            g: Arc::new(move |x: &Vector| {
                let (th, rho) = sheet(x);
                v(&[th / k, rho - alpha])
            }),
            dg: Arc::new(move |x: &Vector| {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let rho = r2.sqrt();
                // theta = atan2(x0, x1)
                Matrix::from_row_slice(2, 2, &[x[1] / r2 / k, -x[0] / r2 / k, x[0] / rho, x[1] / rho])
            }),
        }),
        tags: vec![Tag::MonodromyOpen, Tag::GrowthBoundFails],
        x_region: SampleRegion::Ring {
            dim: 2,
            radius: (alpha + 0.05, alpha + 0.95),
            // x = (rho sin th, rho cos th), i.e. axes (1, 0) in the cos/sin convention
            angle: (0.01, TAU - 0.01),
            axes: (1, 0),
        },
        y_region: SampleRegion::Box(OpenBox::new(vec![0.01 * delta, 0.01], vec![0.99 * delta, 0.99])?),
        designated_loop: Some(DesignatedLoop {
            path: PathSpec::circle(v(&[0.0, 0.0]), alpha + seed.1, 1.0, (1, 0), k * seed.0),
            expected_gap: delta / (1.0 + eps),
        }),
    })
}

fn problem_with_params(p: ImplicitProblem, params: &[(&str, f64)]) -> ImplicitProblem {
    let mut p = p;
    for (k, val) in params {
        p = p.with_param(k, *val);
    }
    p
}

/// Overdetermined `F = (x1 - y1, x2 - y2, |x|^2 - 1)`; the global implicit
/// function `y = x` exists on the unit circle although `l > n`.
pub fn constrained_circle() -> Result<ExampleDescriptor> {
    let problem = ImplicitProblem::builder("constrained-circle", 2, 2, 3, |x, y| {
        v(&[x[0] - y[0], x[1] - y[1], x[0] * x[0] + x[1] * x[1] - 1.0])
    })
    .jac_x(|x, _| Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 2.0 * x[0], 2.0 * x[1]]))
    .jac_y(|_, _| Matrix::from_row_slice(3, 2, &[-1.0, 0.0, 0.0, -1.0, 0.0, 0.0]))
    .seed(v(&[1.0, 0.0]), v(&[1.0, 0.0]))
    .build()?;
    Ok(ExampleDescriptor {
        name: "constrained-circle".into(),
        summary: "overdetermined system with y = x on the unit circle".into(),
        parameters: BTreeMap::new(),
        problem,
        charts: ChartPair::identity(2, 2),
        weight: Weight::affine(1.0, 1.0),
        oracle: Some(Oracle {
            g: Arc::new(|x: &Vector| x.clone()),
            dg: Arc::new(|_: &Vector| Matrix::identity(2, 2)),
        }),
        tags: vec![Tag::Solvable],
        x_region: SampleRegion::Ring {
            dim: 2,
            radius: (1.0, 1.0),
            angle: (-PI, PI),
            axes: (0, 1),
        },
        y_region: SampleRegion::Box(OpenBox::new(vec![-2.0, -2.0], vec![2.0, 2.0])?),
        designated_loop: Some(DesignatedLoop {
            path: PathSpec::circle(v(&[0.0, 0.0]), 1.0, 1.0, (0, 1), 0.0),
            expected_gap: 0.0,
        }),
    })
}

/// Real root of `y^3 + y = x` by Cardano's formula.
pub fn cubic_root(x: f64) -> f64 {
    let s = (x * x / 4.0 + 1.0 / 27.0).sqrt();
    (x / 2.0 + s).cbrt() + (x / 2.0 - s).cbrt()
}

/// `F(x, y) = y^3 + y - x`, globally solvable since `D_yF >= 1`.
pub fn cubic() -> Result<ExampleDescriptor> {
    let problem = ImplicitProblem::builder("cubic", 1, 1, 1, |x, y| v(&[y[0].powi(3) + y[0] - x[0]]))
        .jac_x(|_, _| m1(-1.0))
        .jac_y(|_, y| m1(3.0 * y[0] * y[0] + 1.0))
        .seed(v(&[0.0]), v(&[0.0]))
        .build()?;
    Ok(ExampleDescriptor {
        name: "cubic".into(),
        summary: "F(x, y) = y^3 + y - x".into(),
        parameters: BTreeMap::new(),
        problem,
        charts: ChartPair::identity(1, 1),
        weight: Weight::affine(1.0, 1.0),
        oracle: Some(Oracle {
            g: Arc::new(|x: &Vector| v(&[cubic_root(x[0])])),
            dg: Arc::new(|x: &Vector| {
                let y = cubic_root(x[0]);
                m1(1.0 / (3.0 * y * y + 1.0))
            }),
        }),
        tags: vec![Tag::Solvable],
        x_region: SampleRegion::Box(OpenBox::interval(-10.0, 10.0)?),
        y_region: SampleRegion::Box(OpenBox::interval(-3.0, 3.0)?),
        designated_loop: None,
    })
}

/// `F(x, y) = a x + b y` on `R^2 x R^2`, so `g(x) = -(a / b) x`.
pub fn linear(a: f64, b: f64) -> Result<ExampleDescriptor> {
    if !(a.is_finite() && b.is_finite() && b != 0.0) {
        return Err(invalid(format!(
            "linear example needs finite a and nonzero b, got {a}, {b}"
        )));
    }
    linear_with(Matrix::identity(2, 2) * a, Matrix::identity(2, 2) * b)
}

/// `F(x, y) = A x + B y` for square invertible `B`.
pub fn linear_with(a: Matrix, b: Matrix) -> Result<ExampleDescriptor> {
    let (n, m) = (b.nrows(), a.ncols());
    if a.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            m,
            b.nrows(),
            b.ncols()
        )));
    }
    let dg = -linalg::right_divide(&Matrix::identity(n, n), &b)? * &a;
    let (a1, b1, a2, b2) = (a.clone(), b.clone(), a.clone(), b.clone());
    let problem = ImplicitProblem::builder("linear", m, n, n, move |x, y| &a1 * x + &b1 * y)
        .jac_x(move |_, _| a2.clone())
        .jac_y(move |_, _| b2.clone())
        .seed(Vector::zeros(m), Vector::zeros(n))
        .build()?;
    let parameters = if a == Matrix::identity(m, m) * a[(0, 0)] && b == Matrix::identity(n, n) * b[(0, 0)] {
        extend(BTreeMap::new(), &[("a", a[(0, 0)]), ("b", b[(0, 0)])])
    } else {
        BTreeMap::new()
    };
    let (dg1, dg2) = (dg.clone(), dg);
    Ok(ExampleDescriptor {
        name: "linear".into(),
        summary: "F(x, y) = A x + B y with invertible B".into(),
        parameters,
        problem,
        charts: ChartPair::identity(m, n),
        weight: Weight::affine(1.0, 1.0),
        oracle: Some(Oracle {
            g: Arc::new(move |x: &Vector| &dg1 * x),
            dg: Arc::new(move |_: &Vector| dg2.clone()),
        }),
        tags: vec![Tag::Solvable],
        x_region: SampleRegion::Box(OpenBox::new(vec![-5.0; m], vec![5.0; m])?),
        y_region: SampleRegion::Box(OpenBox::new(vec![-5.0; n], vec![5.0; n])?),
        designated_loop: None,
    })
}

/// `F(x, y) = x - y^2` seeded on the upper branch; `D_yF` vanishes at `x = 0`.
pub fn fold() -> Result<ExampleDescriptor> {
    let problem = ImplicitProblem::builder("fold", 1, 1, 1, |x, y| v(&[x[0] - y[0] * y[0]]))
        .jac_x(|_, _| m1(1.0))
        .jac_y(|_, y| m1(-2.0 * y[0]))
        .seed(v(&[1.0]), v(&[1.0]))
        .build()?;
    Ok(ExampleDescriptor {
        name: "fold".into(),
        summary: "F(x, y) = x - y^2; rank loss at the fold x = 0".into(),
        parameters: BTreeMap::new(),
        problem,
        charts: ChartPair::identity(1, 1),
        weight: Weight::affine(1.0, 1.0),
        oracle: Some(Oracle {
            g: Arc::new(|x: &Vector| v(&[x[0].sqrt()])),
            dg: Arc::new(|x: &Vector| m1(0.5 / x[0].sqrt())),
        }),
        tags: vec![Tag::RankLossAtPoint],
        x_region: SampleRegion::Box(OpenBox::interval(0.01, 10.0)?),
        y_region: SampleRegion::Box(OpenBox::interval(-3.0, 3.0)?),
        designated_loop: None,
    })
}

/// Names accepted by [`by_name`], in listing order.
pub const NAMES: [&str; 8] = [
    "diode",
    "line",
    "circle-x",
    "annulus",
    "constrained-circle",
    "cubic",
    "linear",
    "fold",
];

fn take(params: &BTreeMap<String, f64>, allowed: &[(&str, f64)], example: &str) -> Result<Vec<f64>> {
    if let Some(k) = params.keys().find(|k| !allowed.iter().any(|(a, _)| a == k)) {
        let names: Vec<&str> = allowed.iter().map(|p| p.0).collect();
        return Err(invalid(format!("{example} has no parameter {k:?} (known: {names:?})")));
    }
    Ok(allowed
        .iter()
        .map(|(k, d)| params.get(*k).copied().unwrap_or(*d))
        .collect())
}

/// Build a bundled example, overriding its default parameters.
pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<ExampleDescriptor> {
    match name {
        "diode" => {
            let p = take(
                params,
                &[
                    ("a1", 1.0),
                    ("a2", 1.0),
                    ("b1", 1.0),
                    ("b2", 1.0),
                    ("v_min", -6.0),
                    ("v_max", 4.0),
                    ("i_min", -5.0),
                    ("i_max", 20.0),
                ],
                name,
            )?;
            diode_circuit(p[0], p[1], p[2], p[3], (p[4], p[5]), (p[6], p[7]))
        }
        "line" => {
            let p = take(params, &[("y_min", f64::NAN), ("y_max", f64::NAN)], name)?;
            match (p[0].is_nan(), p[1].is_nan()) {
                (true, true) => line_problem(None),
                (false, false) => line_problem(Some((p[0], p[1]))),
                _ => Err(invalid("line needs both y_min and y_max or neither")),
            }
        }
        "circle-x" => take(params, &[], name).and_then(|_| circle_in_x()),
        "annulus" => {
            let p = take(params, &[("delta", 0.5), ("alpha", 1.0), ("eps", 1.0)], name)?;
            annulus(p[0], p[1], p[2])
        }
        "constrained-circle" => take(params, &[], name).and_then(|_| constrained_circle()),
        "cubic" => take(params, &[], name).and_then(|_| cubic()),
        "linear" => {
            let p = take(params, &[("a", 1.0), ("b", 2.0)], name)?;
            linear(p[0], p[1])
        }
        "fold" => take(params, &[], name).and_then(|_| fold()),
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

/// Every bundled example with default parameters.
pub fn catalog() -> Vec<ExampleDescriptor> {
    NAMES
        .iter()
        .map(|n| by_name(n, &BTreeMap::new()).expect("default parameters are valid"))
        .collect()
}

/// Quarter-turn of the unit circle, a handy local lift for `circle-x`.
pub fn quarter_circle() -> PathSpec {
    PathSpec::circle(v(&[0.0, 0.0]), 1.0, 0.25, (0, 1), 0.0)
}

/// Ratio used when reporting the annulus winding: `y1` advance per x-turn.
pub fn annulus_winding(delta: f64, eps: f64) -> f64 {
    delta / (1.0 + eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniforms(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
        (0..k).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn catalog_is_complete() {
        let c = catalog();
        assert_eq!(c.len(), NAMES.len());
        for (d, n) in c.iter().zip(NAMES) {
            assert_eq!(d.name, n);
            d.problem.validate_seed().unwrap();
        }
    }

    #[test]
    fn oracles_solve_the_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d in catalog() {
            let o = d.oracle.as_ref().unwrap();
            for _ in 0..100 {
                let x = d.x_region.point(&uniforms(&mut rng, d.x_region.arity()));
                let y = (o.g)(&x);
                let r = d.problem.residual_norm(&x, &y).unwrap();
                assert!(r <= 1e-10, "{}: residual {r:e} at {x:?}", d.name);
            }
        }
    }

    #[test]
    fn oracle_derivatives_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in catalog().into_iter().filter(|d| d.x_region.arity() == d.problem.m()) {
            let o = d.oracle.as_ref().unwrap();
            for _ in 0..20 {
                let x = d.x_region.point(&uniforms(&mut rng, d.problem.m()));
                let dg = (o.dg)(&x);
                for j in 0..d.problem.m() {
                    let mut e = Vector::zeros(d.problem.m());
                    e[j] = 1e-6;
                    let fd = ((o.g)(&(&x + &e)) - (o.g)(&(&x - &e))) / 2e-6;
                    for i in 0..d.problem.n() {
                        assert!(
                            (fd[i] - dg[(i, j)]).abs() <= 1e-5 * (1.0 + dg[(i, j)].abs()),
                            "{}",
                            d.name
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in catalog() {
            let p = &d.problem;
            for _ in 0..100 {
                let x = d.x_region.point(&uniforms(&mut rng, d.x_region.arity()));
                let y = d.y_region.point(&uniforms(&mut rng, d.y_region.arity()));
                for (a, f) in [
                    (p.jac_x(&x, &y).unwrap(), p.fd_jac_x(&x, &y).unwrap()),
                    (p.jac_y(&x, &y).unwrap(), p.fd_jac_y(&x, &y).unwrap()),
                ] {
                    let err = (&a - &f).norm() / a.norm().max(1.0);
                    assert!(err <= 1e-5, "{}: {err:e}", d.name);
                }
            }
        }
    }

    #[test]
    fn diode_values() {
        let d = by_name("diode", &BTreeMap::new()).unwrap();
        let g = &d.oracle.as_ref().unwrap().g;
        assert_abs_diff_eq!(g(&v(&[2.0]))[0], 2f64.ln(), epsilon = 1e-15);
        assert_eq!(g(&v(&[0.0]))[0], 0.0);
        assert!(diode_circuit(0.0, 1.0, 1.0, 1.0, (-1.0, 1.0), (-1.0, 1.0)).is_err());
        assert!(diode_circuit(1.0, 1.0, 1.0, 1.0, (1.0, -1.0), (-1.0, 1.0)).is_err());
        let asym = diode_circuit(1.0, 2.0, 1.0, 0.5, (-6.0, 4.0), (-5.0, 20.0)).unwrap();
        assert!(asym.oracle.is_none());
    }

    #[test]
    fn annulus_tube_formulas() {
        let d = annulus(0.5, 1.0, 1.0).unwrap();
        let (x, y) = d.problem.seed();
        assert_abs_diff_eq!(x[0], 1.5 * (0.8 * PI).sin(), epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 1.5 * (0.8 * PI).cos(), epsilon = 1e-14);
        let j = d.problem.jac_y(x, y).unwrap();
        assert_abs_diff_eq!(j.determinant(), 1.5 * 8.0 * PI, epsilon = 1e-10);
        // inverse of the tube Jacobian at y = (0, 0.5)
        let j0 = tube_map(&annulus_curve(0.5, 1.0, 1.0), &v(&[0.0, 0.5])).1;
        let inv = j0.try_inverse().unwrap();
        assert_abs_diff_eq!(inv[(0, 0)], 1.0 / (12.0 * PI), epsilon = 1e-12);
        assert_abs_diff_eq!(annulus_winding(0.5, 1.0), 0.25);
    }

    #[test]
    fn degenerate_tube_is_rejected() {
        let c = PlaneCurve::new(|s| [s * s, 0.0], |s| [2.0 * s, 0.0], |_| [2.0, 0.0]);
        assert!(matches!(
            tube_problem("bad", c, (-1.0, 1.0), (0.5, 0.5)),
            Err(Error::DegenerateTube { .. })
        ));
    }

    #[test]
    fn unknown_names_and_parameters() {
        assert!(matches!(
            by_name("nope", &BTreeMap::new()),
            Err(Error::UnknownExample(_))
        ));
        let mut p = BTreeMap::new();
        p.insert("zeta".to_string(), 1.0);
        assert!(matches!(by_name("annulus", &p), Err(Error::InvalidParams(_))));
        p.clear();
        p.insert("y_min".to_string(), -1.0);
        assert!(by_name("line", &p).is_err());
        p.insert("y_max".to_string(), 1.0);
        assert_eq!(
            by_name("line", &p).unwrap().problem.domain_y().as_box().unwrap().upper,
            vec![1.0]
        );
    }

    #[test]
    fn circle_x_left_inverse_is_well_conditioned() {
        let d = circle_in_x().unwrap();
        for k in 0..50 {
            let y = v(&[-10.0 + 0.4 * k as f64]);
            let s = linalg::smallest_singular_value(&d.problem.jac_y(&v(&[0.0, 0.0]), &y).unwrap()).unwrap();
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }
}
