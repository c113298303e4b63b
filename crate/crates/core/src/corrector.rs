//! Gauss–Newton corrector built on the left inverse of `D_yF`.
//!
//! For fixed `x` the update is `y <- y - lambda * S(x, y) F(x, y)` with `S`
//! the Moore–Penrose left inverse of `D_yF(x, y)` and `lambda` chosen by
//! halving until the residual norm decreases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::problem::ImplicitProblem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorOptions {
    /// Target residual norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest damping factor tried by the line search.
    pub min_damping: f64,
}

impl Default for CorrectorOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 25,
            min_damping: 1.0 / 1024.0,
        }
    }
}

impl CorrectorOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.min_damping > 0.0 && self.min_damping <= 1.0) {
            return Err(Error::InvalidParams(format!("corrector options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub y: Vector,
    pub iterations: usize,
    pub residual_norm: f64,
    /// Residual norms, starting with the initial guess.
    pub history: Vec<f64>,
}

fn escape(y: &Vector) -> Error {
    Error::BoundaryEscape {
        point: y.iter().copied().collect(),
    }
}

/// Converge from `y0` to a `y` with `|F(x, y)| <= tol` for fixed `x`.
pub fn newton_correct(p: &ImplicitProblem, x: &Vector, y0: &Vector, opts: &CorrectorOptions) -> Result<Correction> {
    opts.validate()?;
    if !p.domain_x().contains(x) {
        return Err(Error::DomainViolation {
            which: "x",
            point: x.iter().copied().collect(),
        });
    }
    if !p.domain_y().contains(y0) {
        return Err(escape(y0));
    }
    let mut y = y0.clone();
    let mut r = p.residual(x, &y)?;
    let mut rn = r.norm();
    let mut history = vec![rn];
    for k in 0..opts.max_iter {
        if rn <= opts.tol {
            return Ok(Correction {
                y,
                iterations: k,
                residual_norm: rn,
                history,
            });
        }
        let j = p.jac_y(x, &y)?;
        let s = linalg::left_inverse(&j).map_err(|e| match e {
            Error::RankDeficient { sigma_min } => Error::RankLoss { sigma_min },
            other => other,
        })?;
        let dy = s * &r;
        let mut lambda = 1.0;
        let mut halved_at_boundary = false;
        loop {
            let trial = &y - &dy * lambda;
            if !p.domain_y().contains(&trial) {
                if halved_at_boundary {
                    return Err(escape(&trial));
                }
                halved_at_boundary = true;
                lambda *= 0.5;
                continue;
            }
            let tr = p.residual(x, &trial).ok();
            let tn = tr.as_ref().map_or(f64::INFINITY, |v| v.norm());
            if tn < rn || lambda * 0.5 < opts.min_damping {
                match tr {
                    Some(tr) => {
                        y = trial;
                        r = tr;
                        rn = tn;
                    }
                    None => {
                        return Err(Error::NoConvergence {
                            iterations: k + 1,
                            residual: rn,
                        })
                    }
                }
                break;
            }
            lambda *= 0.5;
        }
        history.push(rn);
    }
    if rn <= opts.tol {
        return Ok(Correction {
            y,
            iterations: opts.max_iter,
            residual_norm: rn,
            history,
        });
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: rn,
    })
}
