//! Coordinate charts: diffeomorphisms from the projections of the zero set
//! onto full Euclidean space, and the problem they induce.
//!
//! A chart carries its forward map, its inverse and optionally an analytic
//! Jacobian of the forward map (finite differences otherwise). Surjectivity
//! onto `R^d` is assumed, not verified: [`chart_roundtrip_check`] only samples
//! the inverse relation and the Jacobian consistency.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::domain::{Domain, OpenBox};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::problem::{fd_jacobian, ImplicitProblem};

/// Relative tolerance for `inverse(forward(p)) = p`.
pub const ROUNDTRIP_TOL: f64 = 1e-8;
/// Tolerance for `Dphi(p) * D(phi^{-1})(phi(p)) = I` with a numerical inner factor.
pub const JACOBIAN_CHECK_TOL: f64 = 1e-5;

pub type VecMap = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;
pub type MatMap = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Chart {
    name: String,
    dim: usize,
    forward: VecMap,
    inverse: VecMap,
    jac_forward: Option<MatMap>,
    domain: Domain,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Chart {
    pub fn new(
        name: &str,
        dim: usize,
        domain: Domain,
        forward: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        inverse: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            dim,
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            jac_forward: None,
            domain,
        }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&Vector) -> Matrix + Send + Sync + 'static) -> Self {
        self.jac_forward = Some(Arc::new(jac));
        self
    }

    pub fn identity(dim: usize) -> Self {
        Self::new("identity", dim, Domain::unbounded(dim), |p| p.clone(), |q| q.clone())
            .with_jacobian(move |_| Matrix::identity(dim, dim))
    }

    /// `p -> A p + b` with invertible `A`.
    pub fn affine(a: Matrix, b: Vector) -> Result<Self> {
        let d = b.len();
        if a.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "affine chart: A is {}x{}, b has length {d}",
                a.nrows(),
                a.ncols()
            )));
        }
        let smin = linalg::smallest_singular_value(&a)?;
        if smin <= linalg::rank_tol(&a) {
            return Err(Error::RankDeficient { sigma_min: smin });
        }
        let lu = a.clone().lu();
        let (af, bf, bi) = (a.clone(), b.clone(), b);
        Ok(Self::new(
            "affine",
            d,
            Domain::unbounded(d),
            move |p| &af * p + &bf,
            move |q| lu.solve(&(q - &bi)).expect("nonsingular affine map"),
        )
        .with_jacobian(move |_| a.clone()))
    }

    /// Componentwise map of an open box onto `R^d`.
    ///
    /// Finite intervals `(a, b)` use `tan(pi (2t - a - b) / (2 (b - a)))`,
    /// half-lines use a logarithm, and unbounded components are left alone.
    pub fn tangent_box(bx: OpenBox) -> Self {
        let d = bx.dim();
        let fwd_box = bx.clone();
        let inv_box = bx.clone();
        let jac_box = bx.clone();
        Self::new(
            "tangent-box",
            d,
            Domain::Box(bx),
            move |p| {
                Vector::from_fn(d, |i, _| {
                    let (a, b, t) = (fwd_box.lower[i], fwd_box.upper[i], p[i]);
                    match (a.is_finite(), b.is_finite()) {
                        (true, true) => (PI * (2.0 * t - a - b) / (2.0 * (b - a))).tan(),
                        (true, false) => (t - a).ln(),
                        (false, true) => -(b - t).ln(),
                        (false, false) => t,
                    }
                })
            },
            move |q| {
                Vector::from_fn(d, |i, _| {
                    let (a, b, s) = (inv_box.lower[i], inv_box.upper[i], q[i]);
                    match (a.is_finite(), b.is_finite()) {
                        (true, true) => 0.5 * (a + b) + (b - a) / PI * s.atan(),
                        (true, false) => a + s.exp(),
                        (false, true) => b - (-s).exp(),
                        (false, false) => s,
                    }
                })
            },
        )
        .with_jacobian(move |p| {
            Matrix::from_fn(d, d, |i, j| {
                if i != j {
                    return 0.0;
                }
                let (a, b, t) = (jac_box.lower[i], jac_box.upper[i], p[i]);
                match (a.is_finite(), b.is_finite()) {
                    (true, true) => {
                        let c = (PI * (2.0 * t - a - b) / (2.0 * (b - a))).cos();
                        PI / ((b - a) * c * c)
                    }
                    (true, false) => 1.0 / (t - a),
                    (false, true) => 1.0 / (b - t),
                    (false, false) => 1.0,
                }
            })
        })
    }

    /// `c * self` for a nonzero scalar `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidParams(format!("chart scale {c}")));
        }
        let (f, g) = (self.forward.clone(), self.inverse.clone());
        let base = self.clone();
        Ok(Self::new(
            &format!("{}*{c}", self.name),
            self.dim,
            self.domain.clone(),
            move |p| f(p) * c,
            move |q| g(&(q / c)),
        )
        .with_jacobian(move |p| {
            base.jacobian(p)
                .map(|j| j * c)
                .unwrap_or_else(|_| nan_matrix(p.len(), p.len()))
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn forward(&self, p: &Vector) -> Result<Vector> {
        if !self.domain.contains(p) {
            return Err(Error::ChartDomainMismatch(format!(
                "{:?} is outside the domain of chart '{}'",
                p.as_slice(),
                self.name
            )));
        }
        finite((self.forward)(p), "chart forward map")
    }

    pub fn inverse(&self, q: &Vector) -> Result<Vector> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "chart '{}' has dim {}, got {}",
                self.name,
                self.dim,
                q.len()
            )));
        }
        finite((self.inverse)(q), "chart inverse map")
    }

    /// Jacobian of the forward map.
    pub fn jacobian(&self, p: &Vector) -> Result<Matrix> {
        if !self.domain.contains(p) {
            return Err(Error::ChartDomainMismatch(format!(
                "{:?} is outside the domain of chart '{}'",
                p.as_slice(),
                self.name
            )));
        }
        match &self.jac_forward {
            Some(j) => {
                let m = j(p);
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("chart jacobian".into()));
                }
                Ok(m)
            }
            None => fd_jacobian(|q| self.forward(q), p, |q| self.domain.contains(q), self.dim),
        }
    }
}

fn finite(v: Vector, what: &str) -> Result<Vector> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

fn nan_matrix(r: usize, c: usize) -> Matrix {
    Matrix::from_element(r, c, f64::NAN)
}

fn nan_vector(r: usize) -> Vector {
    Vector::from_element(r, f64::NAN)
}

/// Charts `phi` on the x-projection and `psi` on the y-projection.
#[derive(Clone, Debug)]
pub struct ChartPair {
    pub phi: Chart,
    pub psi: Chart,
}

impl ChartPair {
    pub fn new(phi: Chart, psi: Chart) -> Self {
        Self { phi, psi }
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self::new(Chart::identity(m), Chart::identity(n))
    }

    pub fn check_dims(&self, p: &ImplicitProblem) -> Result<()> {
        if self.phi.dim() != p.m() || self.psi.dim() != p.n() {
            return Err(Error::ChartDomainMismatch(format!(
                "chart dims ({}, {}) do not match problem dims ({}, {})",
                self.phi.dim(),
                self.psi.dim(),
                p.m(),
                p.n()
            )));
        }
        Ok(())
    }
}

/// The problem in chart coordinates, `F~(x~, y~) = F(phi^{-1}(x~), psi^{-1}(y~))`.
///
/// Jacobians follow the chain rule `D_x~F~ = D_xF (Dphi)^{-1}` and
/// `D_y~F~ = D_yF (Dpsi)^{-1}`. The transformed domains are the preimages
/// of the original domains under the inverse charts.
pub fn transformed_problem(p: &ImplicitProblem, c: &ChartPair) -> Result<ImplicitProblem> {
    c.check_dims(p)?;
    let (a, b) = p.seed();
    let seed_x = c.phi.forward(a)?;
    let seed_y = c.psi.forward(b)?;
    let l = p.l();
    let (m, n) = (p.m(), p.n());

    let (pr, cr) = (p.clone(), c.clone());
    let residual = move |xt: &Vector, yt: &Vector| -> Vector {
        match (cr.phi.inverse(xt), cr.psi.inverse(yt)) {
            (Ok(x), Ok(y)) => pr.residual(&x, &y).unwrap_or_else(|_| nan_vector(l)),
            _ => nan_vector(l),
        }
    };
    let (px, cx) = (p.clone(), c.clone());
    let jac_x = move |xt: &Vector, yt: &Vector| -> Matrix {
        let go = || -> Result<Matrix> {
            let x = cx.phi.inverse(xt)?;
            let y = cx.psi.inverse(yt)?;
            linalg::right_divide(&px.jac_x(&x, &y)?, &cx.phi.jacobian(&x)?)
        };
        go().unwrap_or_else(|_| nan_matrix(l, m))
    };
    let (py, cy) = (p.clone(), c.clone());
    let jac_y = move |xt: &Vector, yt: &Vector| -> Matrix {
        let go = || -> Result<Matrix> {
            let x = cy.phi.inverse(xt)?;
            let y = cy.psi.inverse(yt)?;
            linalg::right_divide(&py.jac_y(&x, &y)?, &cy.psi.jacobian(&y)?)
        };
        go().unwrap_or_else(|_| nan_matrix(l, n))
    };

    let (dx, phi) = (p.domain_x().clone(), c.phi.clone());
    let domain_x = Domain::predicate(m, move |xt| {
        phi.inverse(xt)
            .map(|x| dx.contains(&x) && phi.domain().contains(&x))
            .unwrap_or(false)
    });
    let (dy, psi) = (p.domain_y().clone(), c.psi.clone());
    let domain_y = Domain::predicate(n, move |yt| {
        psi.inverse(yt)
            .map(|y| dy.contains(&y) && psi.domain().contains(&y))
            .unwrap_or(false)
    });

    ImplicitProblem::from_parts(
        format!("{}[{},{}]", p.name(), c.phi.name(), c.psi.name()),
        p.parameters().clone(),
        (m, n, l),
        Arc::new(residual),
        (Some(Arc::new(jac_x)), Some(Arc::new(jac_y))),
        (domain_x, domain_y),
        (seed_x, seed_y),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub chart: String,
    pub samples: usize,
    pub max_roundtrip_error: f64,
    pub max_jacobian_error: f64,
    /// Samples where `Dphi` is numerically singular.
    pub singular_points: Vec<Vec<f64>>,
    /// Samples failing either check.
    pub failures: Vec<Vec<f64>>,
    pub passed: bool,
}

/// Sampled check of `phi^{-1}(phi(p)) = p` and `Dphi(p) D(phi^{-1})(phi(p)) = I`,
/// the inner factor by central differences.
pub fn chart_roundtrip_check(c: &Chart, samples: &[Vector]) -> RoundtripReport {
    let d = c.dim();
    let mut rep = RoundtripReport {
        chart: c.name().to_string(),
        samples: samples.len(),
        max_roundtrip_error: 0.0,
        max_jacobian_error: 0.0,
        singular_points: Vec::new(),
        failures: Vec::new(),
        passed: true,
    };
    for p in samples {
        let mut ok = true;
        let img = c.forward(p);
        match img.as_ref().map(|q| c.inverse(q)) {
            Ok(Ok(back)) => {
                let err = (&back - p).norm();
                rep.max_roundtrip_error = rep.max_roundtrip_error.max(err);
                ok &= err <= ROUNDTRIP_TOL * p.norm().max(1.0);
            }
            _ => {
                rep.max_roundtrip_error = f64::INFINITY;
                ok = false;
            }
        }
        let jac = c.jacobian(p);
        match (jac, img) {
            (Ok(j), Ok(q)) => {
                let smin = linalg::smallest_singular_value(&j).unwrap_or(0.0);
                if smin <= linalg::rank_tol(&j) {
                    rep.singular_points.push(p.iter().copied().collect());
                    ok = false;
                }
                let inv_jac = fd_jacobian(|s| c.inverse(s), &q, |_| true, d);
                let err = match inv_jac {
                    Ok(ji) => (&j * ji - Matrix::identity(d, d)).norm(),
                    Err(_) => f64::INFINITY,
                };
                rep.max_jacobian_error = rep.max_jacobian_error.max(err);
                ok &= err <= JACOBIAN_CHECK_TOL;
            }
            _ => {
                rep.max_jacobian_error = f64::INFINITY;
                ok = false;
            }
        }
        if !ok {
            rep.failures.push(p.iter().copied().collect());
        }
    }
    rep.passed = rep.failures.is_empty();
    rep
}

/// A strictly monotone scalar map, e.g. a constitutive relation `I = f(V)`.
#[derive(Clone)]
pub struct ScalarMap {
    pub value: ScalarFn,
    pub derivative: Option<ScalarFn>,
}

impl fmt::Debug for ScalarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarMap")
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl ScalarMap {
    pub fn new(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn eval(&self, v: f64) -> f64 {
        (self.value)(v)
    }

    pub fn deriv(&self, v: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(v),
            None => {
                let h = f64::EPSILON.sqrt() * v.abs().max(1.0);
                ((self.value)(v + h) - (self.value)(v - h)) / (2.0 * h)
            }
        }
    }
}

const MONOTONE_SAMPLES: usize = 2001;
const SAMPLE_CLIP: f64 = 50.0;

/// Solve `f(v) = target` for monotone `f` on the open interval `(lo, hi)`
/// by bracketing and bisection to full precision.
fn invert_monotone(f: &ScalarMap, target: f64, lo: f64, hi: f64, increasing: bool) -> Option<f64> {
    let sign = if increasing { 1.0 } else { -1.0 };
    let g = |v: f64| sign * (f.eval(v) - target);
    let mut a = if lo.is_finite() { lo } else { hi.min(0.0) - 1.0 };
    let mut b = if hi.is_finite() { hi } else { lo.max(0.0) + 1.0 };
    let mut step = 1.0;
    for _ in 0..200 {
        if lo.is_finite() || g(a) <= 0.0 {
            break;
        }
        a -= step;
        step *= 2.0;
    }
    step = 1.0;
    for _ in 0..200 {
        if hi.is_finite() || g(b) >= 0.0 {
            break;
        }
        b += step;
        step *= 2.0;
    }
    let (ga, gb) = (g(a), g(b));
    if ga.is_nan() || gb.is_nan() || ga > 0.0 || gb < 0.0 {
        return None;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if g(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(if g(a).abs() <= g(b).abs() { a } else { b })
}

/// `psi = phi o f` for a strictly monotone scalar `f` on `interval`.
///
/// The resulting chart lives on the part of `interval` that `f` maps into
/// the domain of `phi`, and its derivative is `(phi' o f) * f'`.
pub fn psi_from_scalar_solution(phi: &Chart, f: ScalarMap, interval: (f64, f64)) -> Result<Chart> {
    if phi.dim() != 1 {
        return Err(Error::DimensionMismatch("scalar solution chart needs a 1-d phi".into()));
    }
    let (lo, hi) = interval;
    OpenBox::interval(lo, hi)?;
    let (slo, shi) = (lo.max(-SAMPLE_CLIP).min(hi), hi.min(SAMPLE_CLIP).max(lo));
    let mut sign = 0.0;
    let mut last_nonzero = f64::NAN;
    for k in 1..MONOTONE_SAMPLES {
        let v = slo + (shi - slo) * k as f64 / MONOTONE_SAMPLES as f64;
        let d = f.deriv(v);
        if !d.is_finite() {
            return Err(Error::NonFinite(format!("f'({v})")));
        }
        if d == 0.0 {
            continue;
        }
        let s = d.signum();
        if sign != 0.0 && s != sign {
            return Err(Error::NonMonotone {
                at: 0.5 * (last_nonzero + v),
            });
        }
        sign = s;
        last_nonzero = v;
    }
    if sign == 0.0 {
        return Err(Error::NonMonotone { at: slo });
    }
    let increasing = sign > 0.0;

    // restrict to f^{-1}(dom phi)
    let (mut dlo, mut dhi) = (lo, hi);
    if let Some(pb) = phi.domain().as_box() {
        let (plo, phi_hi) = (pb.lower[0], pb.upper[0]);
        let (at_lo, at_hi) = if increasing { (plo, phi_hi) } else { (phi_hi, plo) };
        if at_lo.is_finite() {
            if let Some(v) = invert_monotone(&f, at_lo, lo, hi, increasing) {
                dlo = dlo.max(v);
            }
        }
        if at_hi.is_finite() {
            if let Some(v) = invert_monotone(&f, at_hi, lo, hi, increasing) {
                dhi = dhi.min(v);
            }
        }
    }
    let domain = Domain::Box(OpenBox::interval(dlo, dhi)?);

    let (phi_f, f_f) = (phi.clone(), f.clone());
    let (phi_i, f_i) = (phi.clone(), f.clone());
    let (phi_j, f_j) = (phi.clone(), f.clone());
    Ok(Chart::new(
        &format!("{}∘f", phi.name()),
        1,
        domain,
        move |v| {
            let s = Vector::from_element(1, f_f.eval(v[0]));
            (phi_f.forward)(&s)
        },
        move |q| {
            let s = match phi_i.inverse(q) {
                Ok(s) => s[0],
                Err(_) => return nan_vector(1),
            };
            let v = invert_monotone(&f_i, s, dlo, dhi, increasing).unwrap_or(f64::NAN);
            Vector::from_element(1, v)
        },
    )
    .with_jacobian(move |v| {
        let s = Vector::from_element(1, f_j.eval(v[0]));
        match phi_j.jacobian(&s) {
            Ok(dphi) => Matrix::from_element(1, 1, dphi[(0, 0)] * f_j.deriv(v[0])),
            Err(_) => nan_matrix(1, 1),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v1(x: f64) -> Vector {
        Vector::from_element(1, x)
    }

    fn diode_f() -> ScalarMap {
        ScalarMap::new(|v: f64| 2.0 * (v.exp() - 1.0)).with_derivative(|v: f64| 2.0 * v.exp())
    }

    #[test]
    fn identity_roundtrip_is_exact() {
        let c = Chart::identity(2);
        let samples: Vec<Vector> = (0..20)
            .map(|k| Vector::from_vec(vec![k as f64 * 0.37 - 3.0, 1.0 / (k as f64 + 1.0)]))
            .collect();
        let rep = chart_roundtrip_check(&c, &samples);
        assert!(rep.passed);
        assert_eq!(rep.max_roundtrip_error, 0.0);
    }

    #[test]
    fn tangent_chart_roundtrip() {
        let c = Chart::tangent_box(OpenBox::interval(-1.0, 1.0).unwrap());
        assert_abs_diff_eq!(c.forward(&v1(0.5)).unwrap()[0], (PI / 4.0).tan(), epsilon = 1e-15);
        let samples: Vec<Vector> = (0..1000).map(|k| v1(-0.99 + 1.98 * k as f64 / 999.0)).collect();
        let rep = chart_roundtrip_check(&c, &samples);
        assert!(rep.max_roundtrip_error <= 1e-12, "{}", rep.max_roundtrip_error);
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn cube_is_not_a_diffeomorphism() {
        let c = Chart::new(
            "cube",
            1,
            Domain::unbounded(1),
            |p| p.map(|t| t * t * t),
            |q| q.map(f64::cbrt),
        )
        .with_jacobian(|p| Matrix::from_element(1, 1, 3.0 * p[0] * p[0]));
        let samples: Vec<Vector> = [-0.5, -1e-4, 0.0, 1e-4, 0.5].iter().map(|&t| v1(t)).collect();
        let rep = chart_roundtrip_check(&c, &samples);
        assert!(!rep.passed);
        assert!(rep.failures.iter().any(|p| p[0] == 0.0));
        assert!(rep.failures.iter().any(|p| p[0] == 1e-4));
        assert!(!rep.failures.iter().any(|p| p[0] == 0.5));
    }

    #[test]
    fn half_line_components() {
        let c = Chart::tangent_box(OpenBox::new(vec![0.0, f64::NEG_INFINITY], vec![f64::INFINITY, 2.0]).unwrap());
        let samples: Vec<Vector> = (1..30)
            .map(|k| Vector::from_vec(vec![k as f64 * 0.3, 2.0 - k as f64 * 0.2]))
            .collect();
        assert!(chart_roundtrip_check(&c, &samples).passed);
    }

    #[test]
    fn affine_chart() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let c = Chart::affine(a, Vector::from_vec(vec![1.0, -1.0])).unwrap();
        let p = Vector::from_vec(vec![0.3, 0.7]);
        assert_abs_diff_eq!(c.inverse(&c.forward(&p).unwrap()).unwrap(), p, epsilon = 1e-15);
        assert!(Chart::affine(Matrix::zeros(2, 2), Vector::zeros(2)).is_err());
    }

    #[test]
    fn scalar_solution_identity() {
        let psi = psi_from_scalar_solution(&Chart::identity(1), ScalarMap::new(|v| v), (-5.0, 5.0)).unwrap();
        assert_abs_diff_eq!(psi.forward(&v1(1.25)).unwrap()[0], 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.jacobian(&v1(1.25)).unwrap()[(0, 0)], 1.0, epsilon = 1e-7);
    }

    #[test]
    fn scalar_solution_diode() {
        let psi = psi_from_scalar_solution(&Chart::identity(1), diode_f(), (-6.0, 4.0)).unwrap();
        assert_abs_diff_eq!(psi.forward(&v1(2f64.ln())).unwrap()[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(psi.inverse(&v1(2.0)).unwrap()[0], 2f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(psi.jacobian(&v1(0.0)).unwrap()[(0, 0)], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn scalar_solution_domain_restricted_to_phi() {
        let phi = Chart::tangent_box(OpenBox::interval(-5.0, 20.0).unwrap());
        let psi = psi_from_scalar_solution(&phi, diode_f(), (-6.0, 4.0)).unwrap();
        let b = psi.domain().as_box().unwrap();
        assert_eq!(b.lower[0], -6.0);
        assert_abs_diff_eq!(b.upper[0], 11f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn sine_is_not_monotone() {
        let r = psi_from_scalar_solution(&Chart::identity(1), ScalarMap::new(f64::sin), (0.0, 4.0));
        match r {
            Err(Error::NonMonotone { at }) => assert!((at - PI / 2.0).abs() < 0.01),
            other => panic!("expected NonMonotone, got {other:?}"),
        }
    }

    #[test]
    fn scaled_chart() {
        let c = Chart::tangent_box(OpenBox::interval(-1.0, 1.0).unwrap())
            .scaled(2.0)
            .unwrap();
        let p = v1(0.3);
        assert_abs_diff_eq!(c.inverse(&c.forward(&p).unwrap()).unwrap(), p, epsilon = 1e-15);
        let j = c.jacobian(&p).unwrap()[(0, 0)];
        let c0 = (PI * 0.3 / 2.0).cos();
        assert_abs_diff_eq!(j, 2.0 * PI / (2.0 * c0 * c0), epsilon = 1e-13);
    }
}
