//! Predictor–corrector lifting of paths in `X` to curves on the zero set.
//!
//! The predictor integrates the Davidenko field `dy/dt = -S D_xF dx/dt`
//! (RK4 by default); the Gauss–Newton corrector then pulls the prediction
//! back onto `F = 0`. Failures never panic: they end the trace with a status.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::charts::ChartPair;
use crate::corrector::{newton_correct, CorrectorOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};
use crate::path::PathSpec;
use crate::problem::ImplicitProblem;
use crate::weights::Weight;

/// Rendered points per path piece used to validate the path against `domain_x`.
const RENDER_POINTS: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Euler,
    Rk4,
}

#[derive(Debug, Clone)]
pub struct TracerOptions {
    pub trace_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub predictor: Predictor,
    pub corrector: CorrectorOptions,
    /// A predicted `|dy|` above ten times this bound is a blow-up.
    pub trust_radius: f64,
    /// When set, every accepted sample records the growth-bound terms.
    pub certificate: Option<(ChartPair, Weight)>,
}

impl Default for TracerOptions {
    fn default() -> Self {
        Self {
            trace_tol: 1e-8,
            h_init: 1e-2,
            h_min: 1e-8,
            h_max: 0.1,
            predictor: Predictor::Rk4,
            corrector: CorrectorOptions::default(),
            trust_radius: 1.0,
            certificate: None,
        }
    }
}

impl TracerOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.trace_tol > 0.0
            && 0.0 < self.h_min
            && self.h_min <= self.h_init
            && self.h_init <= self.h_max
            && self.h_max <= 1.0
            && self.trust_radius > 0.0;
        if !ok {
            return Err(Error::InvalidParams(format!(
                "tracer options: tol {}, h {} / {} / {}, trust {}",
                self.trace_tol, self.h_min, self.h_init, self.h_max, self.trust_radius
            )));
        }
        self.corrector.validate()
    }

    /// Corrector options with the tolerance tightened to at most `trace_tol`.
    fn corrector_opts(&self) -> CorrectorOptions {
        CorrectorOptions {
            tol: self.corrector.tol.min(self.trace_tol),
            ..self.corrector
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraceStatus {
    Completed,
    BoundaryEscape { t: f64 },
    RankLoss { t: f64 },
    CorrectorDivergence { t: f64 },
    StepUnderflow { t: f64 },
}

impl TraceStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, TraceStatus::Completed)
    }

    /// Parameter where the lift stopped, `None` when completed.
    pub fn failure_t(&self) -> Option<f64> {
        match *self {
            TraceStatus::Completed => None,
            TraceStatus::BoundaryEscape { t }
            | TraceStatus::RankLoss { t }
            | TraceStatus::CorrectorDivergence { t }
            | TraceStatus::StepUnderflow { t } => Some(t),
        }
    }

    fn from_error(e: &Error, t: f64) -> Self {
        match e {
            Error::BoundaryEscape { .. } | Error::DomainViolation { which: "y", .. } => {
                TraceStatus::BoundaryEscape { t }
            }
            Error::RankLoss { .. } | Error::RankDeficient { .. } => TraceStatus::RankLoss { t },
            Error::NoConvergence { .. } => TraceStatus::CorrectorDivergence { t },
            _ => TraceStatus::StepUnderflow { t },
        }
    }
}

impl fmt::Display for TraceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStatus::Completed => f.write_str("completed"),
            TraceStatus::BoundaryEscape { t } => write!(f, "boundary escape at t = {t}"),
            TraceStatus::RankLoss { t } => write!(f, "rank loss at t = {t}"),
            TraceStatus::CorrectorDivergence { t } => write!(f, "corrector divergence at t = {t}"),
            TraceStatus::StepUnderflow { t } => write!(f, "step underflow at t = {t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub residual: f64,
    /// Parameter step that produced this sample (0 for the first one).
    pub step: f64,
    pub cert_lhs: Option<f64>,
    pub cert_rhs: Option<f64>,
}

impl TraceSample {
    pub fn x_vec(&self) -> Vector {
        Vector::from_column_slice(&self.x)
    }

    pub fn y_vec(&self) -> Vector {
        Vector::from_column_slice(&self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub m: usize,
    pub n: usize,
    pub samples: Vec<TraceSample>,
    pub status: TraceStatus,
}

impl Trace {
    pub fn is_completed(&self) -> bool {
        self.status.is_completed()
    }

    pub fn first_y(&self) -> Option<Vector> {
        self.samples.first().map(TraceSample::y_vec)
    }

    pub fn final_y(&self) -> Option<Vector> {
        self.samples.last().map(TraceSample::y_vec)
    }

    pub fn final_x(&self) -> Option<Vector> {
        self.samples.last().map(TraceSample::x_vec)
    }

    pub fn max_residual(&self) -> f64 {
        self.samples.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn csv_header(m: usize, n: usize) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend((1..=m).map(|i| format!("x_{i}")));
        h.extend((1..=n).map(|i| format!("y_{i}")));
        h.extend(["residual", "step", "cert_lhs", "cert_rhs"].map(String::from));
        h
    }

    /// One row per sample; floats use 17 significant digits so they round-trip.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::csv_header(self.m, self.n))?;
        let fmt = |v: f64| format!("{v:.16e}");
        for s in &self.samples {
            let mut row = vec![fmt(s.t)];
            row.extend(s.x.iter().map(|&v| fmt(v)));
            row.extend(s.y.iter().map(|&v| fmt(v)));
            row.push(fmt(s.residual));
            row.push(fmt(s.step));
            row.push(s.cert_lhs.map(fmt).unwrap_or_default());
            row.push(s.cert_rhs.map(fmt).unwrap_or_default());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads samples written by [`Trace::write_csv`]; dimensions come from the header.
    pub fn read_csv_samples<R: Read>(r: R) -> Result<(usize, usize, Vec<TraceSample>)> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let m = header.iter().filter(|h| h.starts_with("x_")).count();
        let n = header.iter().filter(|h| h.starts_with("y_")).count();
        if header.len() != m + n + 5 || Self::csv_header(m, n).iter().ne(header.iter()) {
            return Err(Error::Parse(format!("unexpected trace header {header:?}")));
        }
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}"))) };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s).map(Some)
            }
        };
        let mut samples = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let f: Vec<&str> = rec.iter().collect();
            samples.push(TraceSample {
                t: num(f[0])?,
                x: f[1..=m].iter().map(|s| num(s)).collect::<Result<_>>()?,
                y: f[m + 1..=m + n].iter().map(|s| num(s)).collect::<Result<_>>()?,
                residual: num(f[m + n + 1])?,
                step: num(f[m + n + 2])?,
                cert_lhs: opt(f[m + n + 3])?,
                cert_rhs: opt(f[m + n + 4])?,
            });
        }
        Ok((m, n, samples))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Growth-bound terms `(|Dpsi S| |D_xF Dphi^{-1}|, w(|psi(y)|))` at one point.
pub fn growth_terms(p: &ImplicitProblem, x: &Vector, y: &Vector, charts: &ChartPair, w: &Weight) -> Result<(f64, f64)> {
    let s = linalg::left_inverse(&p.jac_y(x, y)?)?;
    let dpsi = charts.psi.jacobian(y)?;
    let dphi = charts.phi.jacobian(x)?;
    let a = linalg::spectral_norm(&(dpsi * s))?;
    let b = linalg::spectral_norm(&linalg::right_divide(&p.jac_x(x, y)?, &dphi)?)?;
    let rhs = w.evaluate(charts.psi.forward(y)?.norm())?;
    Ok((a * b, rhs))
}

/// Davidenko velocity `-S(x, y) D_xF(x, y) xdot`.
pub fn davidenko(p: &ImplicitProblem, x: &Vector, y: &Vector, xdot: &Vector) -> Result<Vector> {
    let s = linalg::left_inverse(&p.jac_y(x, y)?)?;
    Ok(-(s * (p.jac_x(x, y)? * xdot)))
}

struct Advance {
    y: Vector,
    residual: f64,
    iterations: usize,
}

/// One predictor–corrector step along piece `piece` of `path` from `t0` to `t1`.
fn advance(
    p: &ImplicitProblem,
    path: &PathSpec,
    piece: usize,
    t0: f64,
    y0: &Vector,
    t1: f64,
    opts: &TracerOptions,
) -> Result<Advance> {
    let h = t1 - t0;
    let field = |t: f64, y: &Vector| -> Result<Vector> {
        if !p.domain_y().contains(y) {
            return Err(Error::BoundaryEscape {
                point: y.iter().copied().collect(),
            });
        }
        let x = path.point(t)?;
        let xdot = path.velocity_on(t, Some(piece))?;
        davidenko(p, &x, y, &xdot)
    };
    let k1 = field(t0, y0)?;
    let y_pred = match opts.predictor {
        Predictor::Euler => y0 + &k1 * h,
        Predictor::Rk4 => {
            let k2 = field(t0 + h / 2.0, &(y0 + &k1 * (h / 2.0)))?;
            let k3 = field(t0 + h / 2.0, &(y0 + &k2 * (h / 2.0)))?;
            let k4 = field(t1, &(y0 + &k3 * h))?;
            y0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
        }
    };
    let dy = (&y_pred - y0).norm();
    let bound = 10.0 * opts.trust_radius;
    if !(dy <= bound) {
        return Err(Error::PredictorBlowup { norm: dy, bound });
    }
    let x1 = path.point(t1)?;
    let c = newton_correct(p, &x1, &y_pred, &opts.corrector_opts())?;
    if !(c.residual_norm <= opts.trace_tol) {
        return Err(Error::NoConvergence {
            iterations: c.iterations,
            residual: c.residual_norm,
        });
    }
    Ok(Advance {
        y: c.y,
        residual: c.residual_norm,
        iterations: c.iterations,
    })
}

fn sample(
    p: &ImplicitProblem,
    t: f64,
    x: &Vector,
    y: &Vector,
    residual: f64,
    step: f64,
    opts: &TracerOptions,
) -> TraceSample {
    let (cert_lhs, cert_rhs) = match &opts.certificate {
        Some((charts, w)) => match growth_terms(p, x, y, charts, w) {
            Ok((l, r)) => (Some(l), Some(r)),
            Err(_) => (None, None),
        },
        None => (None, None),
    };
    TraceSample {
        t,
        x: x.iter().copied().collect(),
        y: y.iter().copied().collect(),
        residual,
        step,
        cert_lhs,
        cert_rhs,
    }
}

/// Lift `path` starting near `y_start`.
///
/// Malformed inputs (bad options, a path outside `domain_x`, wrong
/// dimensions) are errors; numerical failure ends the trace with a status.
pub fn lift_path(p: &ImplicitProblem, path: &PathSpec, y_start: &Vector, opts: &TracerOptions) -> Result<Trace> {
    opts.validate()?;
    path.validate(p.m())?;
    if y_start.len() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "y_start has length {}, expected {}",
            y_start.len(),
            p.n()
        )));
    }
    for (_, x) in path.render(RENDER_POINTS)? {
        if !p.domain_x().contains(&x) {
            return Err(Error::DomainViolation {
                which: "x",
                point: x.iter().copied().collect(),
            });
        }
    }
    let mut trace = Trace {
        m: p.m(),
        n: p.n(),
        samples: Vec::new(),
        status: TraceStatus::Completed,
    };
    let x0 = path.start()?;
    let init = match newton_correct(p, &x0, y_start, &opts.corrector_opts()) {
        Ok(c) => c,
        Err(e) => {
            trace.status = TraceStatus::from_error(&e, 0.0);
            return Ok(trace);
        }
    };
    trace
        .samples
        .push(sample(p, 0.0, &x0, &init.y, init.residual_norm, 0.0, opts));

    let mut y = init.y;
    let mut h = opts.h_init;
    let mut easy_steps = 0usize;
    let breaks = path.breakpoints();
    for (piece, w) in breaks.windows(2).enumerate() {
        let (mut t, end) = (w[0], w[1]);
        while t < end {
            let h_try = h.min(end - t);
            let t_next = if t + h_try >= end - 1e-14 { end } else { t + h_try };
            match advance(p, path, piece, t, &y, t_next, opts) {
                Ok(a) => {
                    let x = path.point(t_next)?;
                    trace
                        .samples
                        .push(sample(p, t_next, &x, &a.y, a.residual, t_next - t, opts));
                    t = t_next;
                    y = a.y;
                    if a.iterations <= 2 {
                        easy_steps += 1;
                        if easy_steps >= 3 {
                            h = (h * 1.5).min(opts.h_max);
                            easy_steps = 0;
                        }
                    } else {
                        easy_steps = 0;
                    }
                }
                Err(e) => {
                    easy_steps = 0;
                    if h_try <= opts.h_min {
                        log::debug!("lift of {} stopped at t = {t}: {e}", p.name());
                        trace.status = TraceStatus::from_error(&e, t);
                        return Ok(trace);
                    }
                    h = (h_try / 2.0).max(opts.h_min);
                }
            }
        }
    }
    Ok(trace)
}

/// Single predictor–corrector step from `(x_t, y_t)` to `x_next` along the
/// straight segment, with no step-size control.
pub fn step(p: &ImplicitProblem, x_t: &Vector, y_t: &Vector, x_next: &Vector, opts: &TracerOptions) -> Result<Vector> {
    opts.validate()?;
    let path = PathSpec::segment(x_t.clone(), x_next.clone());
    path.validate(p.m())?;
    Ok(advance(p, &path, 0, 0.0, y_t, 1.0, opts)?.y)
}
