//! Sampled audits of the solvability hypotheses along traces.
//!
//! Every check evaluates a margin per sample (positive is good) and reports
//! the worst one. These are numerical evidence on finitely many points, not
//! proofs.

use serde::{Deserialize, Serialize};

use crate::charts::ChartPair;
use crate::corrector::{newton_correct, CorrectorOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::problem::ImplicitProblem;
use crate::tracer::{growth_terms, Trace, TraceSample};
use crate::verdict::Verdict;
use crate::weights::Weight;

/// Margins down to `-MARGIN_TOL` still pass.
pub const MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMargin {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub name: String,
    pub verdict: Verdict,
    pub worst_margin: f64,
    pub worst_location: Option<(Vec<f64>, Vec<f64>)>,
    pub samples_checked: usize,
    pub samples: Vec<SampleMargin>,
}

impl CertificateReport {
    fn from_samples(name: &str, samples: Vec<SampleMargin>) -> Self {
        let worst = samples.iter().min_by(|a, b| a.margin.total_cmp(&b.margin));
        let worst_margin = worst.map_or(f64::INFINITY, |s| s.margin);
        let verdict = if worst_margin.is_nan() {
            Verdict::Fail
        } else {
            Verdict::from_margin(worst_margin, MARGIN_TOL)
        };
        Self {
            name: name.to_string(),
            verdict,
            worst_margin,
            worst_location: worst.map(|s| (s.x.clone(), s.y.clone())),
            samples_checked: samples.len(),
            samples,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    /// Largest left-hand side over the samples.
    pub fn max_lhs(&self) -> f64 {
        self.samples.iter().map(|s| s.lhs).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn points(trace: &Trace) -> Vec<(Vector, Vector)> {
    trace.samples.iter().map(|s| (s.x_vec(), s.y_vec())).collect()
}

fn margin(x: &Vector, y: &Vector, lhs: f64, rhs: f64) -> SampleMargin {
    SampleMargin {
        x: x.iter().copied().collect(),
        y: y.iter().copied().collect(),
        lhs,
        rhs,
        margin: rhs - lhs,
    }
}

/// Insert a corrected midpoint between consecutive samples (x interpolated
/// linearly), doubling the sampling density of later checks.
pub fn refine_midpoints(p: &ImplicitProblem, trace: &Trace, opts: &CorrectorOptions) -> Result<Trace> {
    let mut samples = Vec::with_capacity(2 * trace.samples.len());
    for w in trace.samples.windows(2) {
        samples.push(w[0].clone());
        let x = (w[0].x_vec() + w[1].x_vec()) / 2.0;
        let y0 = (w[0].y_vec() + w[1].y_vec()) / 2.0;
        if !p.domain_x().contains(&x) {
            continue;
        }
        if let Ok(c) = newton_correct(p, &x, &y0, opts) {
            samples.push(TraceSample {
                t: (w[0].t + w[1].t) / 2.0,
                x: x.iter().copied().collect(),
                y: c.y.iter().copied().collect(),
                residual: c.residual_norm,
                step: (w[1].t - w[0].t) / 2.0,
                cert_lhs: None,
                cert_rhs: None,
            });
        }
    }
    samples.extend(trace.samples.last().cloned());
    Ok(Trace {
        samples,
        ..trace.clone()
    })
}

fn check_in_charts(charts: &ChartPair, x: &Vector, y: &Vector) -> Result<()> {
    if !charts.phi.domain().contains(x) || !charts.psi.domain().contains(y) {
        return Err(Error::ChartDomainMismatch(format!(
            "sample x = {:?}, y = {:?} lies outside the chart domains",
            x.as_slice(),
            y.as_slice()
        )));
    }
    Ok(())
}

/// `|Dpsi(y) S(x, y)| * |D_xF(x, y) Dphi(x)^{-1}| <= w(|psi(y)|)` on every sample.
pub fn growth_bound_check(
    p: &ImplicitProblem,
    trace: &Trace,
    charts: &ChartPair,
    w: &Weight,
) -> Result<CertificateReport> {
    charts.check_dims(p)?;
    let mut out = Vec::with_capacity(trace.samples.len());
    for (x, y) in points(trace) {
        check_in_charts(charts, &x, &y)?;
        let (lhs, rhs) = growth_terms(p, &x, &y, charts, w)?;
        out.push(margin(&x, &y, lhs, rhs));
    }
    Ok(CertificateReport::from_samples("growth-bound", out))
}

/// `sigma_min(D_yF) - floor`; the floor defaults to `1e-6` times the largest
/// sampled `|D_yF|`.
pub fn left_invertibility_check(
    p: &ImplicitProblem,
    trace: &Trace,
    sigma_floor: Option<f64>,
) -> Result<CertificateReport> {
    let pts = points(trace);
    let jacs: Vec<Matrix> = pts.iter().map(|(x, y)| p.jac_y(x, y)).collect::<Result<_>>()?;
    let floor = match sigma_floor {
        Some(f) => f,
        None => {
            let mut scale: f64 = 0.0;
            for j in &jacs {
                scale = scale.max(linalg::spectral_norm(j)?);
            }
            1e-6 * scale
        }
    };
    let mut out = Vec::with_capacity(pts.len());
    for ((x, y), j) in pts.iter().zip(&jacs) {
        let s = linalg::smallest_singular_value(j)?;
        // lhs is the floor and rhs the singular value so that margin = rhs - lhs
        out.push(margin(x, y, floor, s));
    }
    Ok(CertificateReport::from_samples("left-invertibility", out))
}

fn require_square(p: &ImplicitProblem, what: &str) -> Result<()> {
    if p.l() != p.n() {
        return Err(Error::DimensionMismatch(format!(
            "{what} needs l = n, problem has l = {}, n = {}",
            p.l(),
            p.n()
        )));
    }
    Ok(())
}

/// `|(D_yF)^{-1}| * |D_xF| <= bound` with a constant bound.
pub fn ichiraku_bound_check(p: &ImplicitProblem, trace: &Trace, bound: f64) -> Result<CertificateReport> {
    require_square(p, "ichiraku bound")?;
    let mut out = Vec::with_capacity(trace.samples.len());
    for (x, y) in points(trace) {
        let s = linalg::left_inverse(&p.jac_y(&x, &y)?)?;
        let lhs = linalg::spectral_norm(&s)? * linalg::spectral_norm(&p.jac_x(&x, &y)?)?;
        out.push(margin(&x, &y, lhs, bound));
    }
    Ok(CertificateReport::from_samples("ichiraku-bound", out))
}

/// Row-wise diagonal dominance of `D_yF` by at least `d`.
pub fn diagonal_dominance_check(
    p: &ImplicitProblem,
    sample_points: &[(Vector, Vector)],
    d: f64,
) -> Result<CertificateReport> {
    require_square(p, "diagonal dominance")?;
    let mut out = Vec::with_capacity(sample_points.len());
    for (x, y) in sample_points {
        let j = p.jac_y(x, y)?;
        let excess = (0..j.nrows())
            .map(|i| {
                let off: f64 = (0..j.ncols()).filter(|&k| k != i).map(|k| j[(i, k)].abs()).sum();
                j[(i, i)].abs() - off
            })
            .fold(f64::INFINITY, f64::min);
        out.push(margin(x, y, d, excess));
    }
    Ok(CertificateReport::from_samples("diagonal-dominance", out))
}

/// Convenience wrapper of [`diagonal_dominance_check`] over trace samples.
pub fn diagonal_dominance_on_trace(p: &ImplicitProblem, trace: &Trace, d: f64) -> Result<CertificateReport> {
    diagonal_dominance_check(p, &points(trace), d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartProbeReport {
    pub max_factor: f64,
    pub factors: Vec<f64>,
    pub samples_checked: usize,
}

/// Transfer factor `|Dpsi_alt (Dpsi)^{-1}| * |Dphi (Dphi_alt)^{-1}|` between
/// two chart pairs. A bound `w` for one pair yields `factor * w` for the
/// other; nothing is claimed about admissibility.
pub fn chart_independence_probe(
    p: &ImplicitProblem,
    trace: &Trace,
    charts: &ChartPair,
    alt: &ChartPair,
) -> Result<ChartProbeReport> {
    charts.check_dims(p)?;
    alt.check_dims(p)?;
    let mut factors = Vec::with_capacity(trace.samples.len());
    for (x, y) in points(trace) {
        check_in_charts(charts, &x, &y)?;
        check_in_charts(alt, &x, &y)?;
        let a = linalg::right_divide(&alt.psi.jacobian(&y)?, &charts.psi.jacobian(&y)?)?;
        let b = linalg::right_divide(&charts.phi.jacobian(&x)?, &alt.phi.jacobian(&x)?)?;
        factors.push(linalg::spectral_norm(&a)? * linalg::spectral_norm(&b)?);
    }
    Ok(ChartProbeReport {
        max_factor: factors.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        samples_checked: factors.len(),
        factors,
    })
}
