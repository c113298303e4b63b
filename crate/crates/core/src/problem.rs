//! The implicit equation `F(x, y) = 0` on open domains `X x Y`, its partial
//! Jacobians and the seed zero from which the tracked component of the zero
//! set is reached.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Absolute residual norm a seed must satisfy.
pub const SEED_TOL: f64 = 1e-10;

/// Number of times a finite-difference step is halved before giving up on a
/// stencil that keeps leaving the domain.
const FD_MAX_SHRINK: usize = 16;

pub type ResidualFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync>;

/// Finite-difference Jacobian of `f` at `at`.
///
/// Central differences with `h_i = sqrt(eps) * max(1, |at_i|)`. When a
/// stencil point falls outside the domain a one-sided difference is used,
/// and when neither side fits the step is halved.
pub fn fd_jacobian<F, D>(f: F, at: &Vector, inside: D, rows: usize) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Vector>,
    D: Fn(&Vector) -> bool,
{
    let base = f(at)?;
    let mut jac = Matrix::zeros(rows, at.len());
    for i in 0..at.len() {
        let mut h = f64::EPSILON.sqrt() * at[i].abs().max(1.0);
        let mut column = None;
        for _ in 0..=FD_MAX_SHRINK {
            let mut plus = at.clone();
            plus[i] += h;
            let mut minus = at.clone();
            minus[i] -= h;
            let (ip, im) = (inside(&plus), inside(&minus));
            if ip && im {
                column = Some((f(&plus)? - f(&minus)?) / (plus[i] - minus[i]));
            } else if ip {
                column = Some((f(&plus)? - &base) / (plus[i] - at[i]));
            } else if im {
                column = Some((&base - f(&minus)?) / (at[i] - minus[i]));
            }
            if column.is_some() {
                break;
            }
            h *= 0.5;
        }
        match column {
            Some(c) => jac.set_column(i, &c),
            None => {
                return Err(Error::DomainViolation {
                    which: "finite-difference stencil",
                    point: at.iter().copied().collect(),
                })
            }
        }
    }
    Ok(jac)
}

/// `F in C^1(X x Y, R^l)` with `X` open in `R^m` and `Y` open in `R^n`.
#[derive(Clone)]
pub struct ImplicitProblem {
    name: String,
    parameters: BTreeMap<String, f64>,
    m: usize,
    n: usize,
    l: usize,
    residual_fn: ResidualFn,
    jac_x_fn: Option<JacobianFn>,
    jac_y_fn: Option<JacobianFn>,
    domain_x: Domain,
    domain_y: Domain,
    seed_x: Vector,
    seed_y: Vector,
}

impl fmt::Debug for ImplicitProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImplicitProblem")
            .field("name", &self.name)
            .field("dims", &(self.m, self.n, self.l))
            .field("domain_x", &self.domain_x)
            .field("domain_y", &self.domain_y)
            .field("seed", &(self.seed_x.as_slice(), self.seed_y.as_slice()))
            .finish()
    }
}

pub struct ProblemBuilder {
    name: String,
    parameters: BTreeMap<String, f64>,
    m: usize,
    n: usize,
    l: usize,
    residual_fn: ResidualFn,
    jac_x_fn: Option<JacobianFn>,
    jac_y_fn: Option<JacobianFn>,
    domain_x: Domain,
    domain_y: Domain,
    seed: Option<(Vector, Vector)>,
}

impl ProblemBuilder {
    pub fn jac_x(mut self, f: impl Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static) -> Self {
        self.jac_x_fn = Some(Arc::new(f));
        self
    }

    pub fn jac_y(mut self, f: impl Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static) -> Self {
        self.jac_y_fn = Some(Arc::new(f));
        self
    }

    pub fn domain_x(mut self, d: impl Into<Domain>) -> Self {
        self.domain_x = d.into();
        self
    }

    pub fn domain_y(mut self, d: impl Into<Domain>) -> Self {
        self.domain_y = d.into();
        self
    }

    pub fn seed(mut self, x: Vector, y: Vector) -> Self {
        self.seed = Some((x, y));
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn build(self) -> Result<ImplicitProblem> {
        if self.l < self.n {
            return Err(Error::DimensionMismatch(format!(
                "need l >= n, got l = {}, n = {}",
                self.l, self.n
            )));
        }
        if self.domain_x.dim() != self.m || self.domain_y.dim() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "domains have dims ({}, {}), expected ({}, {})",
                self.domain_x.dim(),
                self.domain_y.dim(),
                self.m,
                self.n
            )));
        }
        let (seed_x, seed_y) = self
            .seed
            .ok_or_else(|| Error::InvalidParams("problem has no seed".into()))?;
        if seed_x.len() != self.m || seed_y.len() != self.n {
            return Err(Error::DimensionMismatch("seed dimensions".into()));
        }
        if !self.domain_x.contains(&seed_x) {
            return Err(Error::DomainViolation {
                which: "x",
                point: seed_x.iter().copied().collect(),
            });
        }
        if !self.domain_y.contains(&seed_y) {
            return Err(Error::DomainViolation {
                which: "y",
                point: seed_y.iter().copied().collect(),
            });
        }
        Ok(ImplicitProblem {
            name: self.name,
            parameters: self.parameters,
            m: self.m,
            n: self.n,
            l: self.l,
            residual_fn: self.residual_fn,
            jac_x_fn: self.jac_x_fn,
            jac_y_fn: self.jac_y_fn,
            domain_x: self.domain_x,
            domain_y: self.domain_y,
            seed_x,
            seed_y,
        })
    }
}

impl ImplicitProblem {
    /// Start building a problem with `m` x-coordinates, `n` y-coordinates and
    /// `l` residual components. Domains default to all of `R^m`, `R^n`.
    pub fn builder(
        name: &str,
        m: usize,
        n: usize,
        l: usize,
        residual: impl Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    ) -> ProblemBuilder {
        ProblemBuilder {
            name: name.to_string(),
            parameters: BTreeMap::new(),
            m,
            n,
            l,
            residual_fn: Arc::new(residual),
            jac_x_fn: None,
            jac_y_fn: None,
            domain_x: Domain::unbounded(m),
            domain_y: Domain::unbounded(n),
            seed: None,
        }
    }

    pub(crate) fn from_parts(
        name: String,
        parameters: BTreeMap<String, f64>,
        dims: (usize, usize, usize),
        residual_fn: ResidualFn,
        jacobians: (Option<JacobianFn>, Option<JacobianFn>),
        domains: (Domain, Domain),
        seed: (Vector, Vector),
    ) -> Result<Self> {
        ProblemBuilder {
            name,
            parameters,
            m: dims.0,
            n: dims.1,
            l: dims.2,
            residual_fn,
            jac_x_fn: jacobians.0,
            jac_y_fn: jacobians.1,
            domain_x: domains.0,
            domain_y: domains.1,
            seed: Some(seed),
        }
        .build()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn domain_x(&self) -> &Domain {
        &self.domain_x
    }

    pub fn domain_y(&self) -> &Domain {
        &self.domain_y
    }

    pub fn seed(&self) -> (&Vector, &Vector) {
        (&self.seed_x, &self.seed_y)
    }

    pub fn has_analytic_jacobians(&self) -> bool {
        self.jac_x_fn.is_some() && self.jac_y_fn.is_some()
    }

    /// Records a named parameter for display and export.
    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    /// Same problem with a different seed.
    pub fn with_seed(&self, x: Vector, y: Vector) -> Result<Self> {
        let mut p = self.clone();
        if x.len() != self.m || y.len() != self.n {
            return Err(Error::DimensionMismatch("seed dimensions".into()));
        }
        self.check_point(&x, &y)?;
        p.seed_x = x;
        p.seed_y = y;
        Ok(p)
    }

    pub fn check_point(&self, x: &Vector, y: &Vector) -> Result<()> {
        if !self.domain_x.contains(x) {
            return Err(Error::DomainViolation {
                which: "x",
                point: x.iter().copied().collect(),
            });
        }
        if !self.domain_y.contains(y) {
            return Err(Error::DomainViolation {
                which: "y",
                point: y.iter().copied().collect(),
            });
        }
        Ok(())
    }

    /// `F(x, y)`.
    pub fn residual(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_point(x, y)?;
        let r = (self.residual_fn)(x, y);
        if r.len() != self.l {
            return Err(Error::DimensionMismatch(format!(
                "residual has length {}, expected {}",
                r.len(),
                self.l
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("residual at x = {x:?}, y = {y:?}")));
        }
        Ok(r)
    }

    pub fn residual_norm(&self, x: &Vector, y: &Vector) -> Result<f64> {
        Ok(self.residual(x, y)?.norm())
    }

    /// `D_x F(x, y)`, analytic when available.
    pub fn jac_x(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        match &self.jac_x_fn {
            Some(f) => {
                self.check_point(x, y)?;
                self.checked_jacobian(f(x, y), self.m, "D_xF")
            }
            None => self.fd_jac_x(x, y),
        }
    }

    /// `D_y F(x, y)`, analytic when available.
    pub fn jac_y(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        match &self.jac_y_fn {
            Some(f) => {
                self.check_point(x, y)?;
                self.checked_jacobian(f(x, y), self.n, "D_yF")
            }
            None => self.fd_jac_y(x, y),
        }
    }

    fn checked_jacobian(&self, j: Matrix, cols: usize, what: &str) -> Result<Matrix> {
        if j.shape() != (self.l, cols) {
            return Err(Error::DimensionMismatch(format!(
                "{what} is {}x{}, expected {}x{}",
                j.nrows(),
                j.ncols(),
                self.l,
                cols
            )));
        }
        if j.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(what.to_string()));
        }
        Ok(j)
    }

    /// Finite-difference `D_x F`, ignoring any analytic Jacobian.
    pub fn fd_jac_x(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        fd_jacobian(|xx| self.residual(xx, y), x, |xx| self.domain_x.contains(xx), self.l)
    }

    /// Finite-difference `D_y F`, ignoring any analytic Jacobian.
    pub fn fd_jac_y(&self, x: &Vector, y: &Vector) -> Result<Matrix> {
        self.check_point(x, y)?;
        fd_jacobian(|yy| self.residual(x, yy), y, |yy| self.domain_y.contains(yy), self.l)
    }

    /// The seed must be a zero of `F` at which `D_yF` has full column rank.
    pub fn validate_seed(&self) -> Result<()> {
        let r = self.residual_norm(&self.seed_x, &self.seed_y)?;
        if r > SEED_TOL {
            return Err(Error::SeedNotOnZ {
                residual: r,
                tol: SEED_TOL,
            });
        }
        let j = self.jac_y(&self.seed_x, &self.seed_y)?;
        let smin = linalg::smallest_singular_value(&j)?;
        if smin <= linalg::rank_tol(&j) {
            return Err(Error::SeedRankDeficient { sigma_min: smin });
        }
        Ok(())
    }

    /// Rough length scale of `X`, used for cache snapping.
    pub fn x_scale(&self) -> f64 {
        let seed = self.seed_x.amax();
        let boxed = self.domain_x.as_box().map_or(0.0, |b| b.finite_scale());
        seed.max(boxed).max(1.0)
    }
}
