//! Weight functions `omega: [0, inf) -> (0, inf)` that are nondecreasing with
//! a divergent integral of `1 / omega`, and their sampled admissibility audit.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::verdict::Verdict;

/// Allowed drop between consecutive samples before monotonicity fails.
pub const MONOTONE_SLACK: f64 = 1e-12;
pub const DEFAULT_SAMPLES: usize = 1024;

#[derive(Clone)]
pub enum WeightKind {
    Constant(f64),
    /// `slope * t + intercept`
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// Piecewise-linear through `(t, omega)` knots sorted by `t`, extended by
    /// the last segment's slope.
    Table(Vec<(f64, f64)>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct Weight {
    label: String,
    kind: WeightKind,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Weight").field(&self.label).finish()
    }
}

impl Weight {
    pub fn constant(c: f64) -> Self {
        Self {
            label: format!("constant:{c}"),
            kind: WeightKind::Constant(c),
        }
    }

    pub fn affine(slope: f64, intercept: f64) -> Self {
        Self {
            label: format!("affine:{slope},{intercept}"),
            kind: WeightKind::Affine { slope, intercept },
        }
    }

    pub fn table(mut knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidParams("weight table is empty".into()));
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.iter().any(|(t, w)| !t.is_finite() || !w.is_finite()) {
            return Err(Error::InvalidParams("weight table has non-finite entries".into()));
        }
        if knots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams("weight table has repeated abscissae".into()));
        }
        Ok(Self {
            label: format!("table[{}]", knots.len()),
            kind: WeightKind::Table(knots),
        })
    }

    pub fn function(label: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.to_string(),
            kind: WeightKind::Function(Arc::new(f)),
        }
    }

    /// Parse `constant:c`, `affine:a,b` or `table:path` (two-column CSV
    /// `t,omega`, header optional).
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("weight spec '{spec}' lacks ':'")))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{s}' in weight spec")))
        };
        match kind.trim() {
            "constant" => Ok(Self::constant(num(arg)?)),
            "affine" => {
                let (a, b) = arg
                    .split_once(',')
                    .ok_or_else(|| Error::Parse("affine weight needs 'a,b'".into()))?;
                Ok(Self::affine(num(a)?, num(b)?))
            }
            "table" => Self::from_table_file(Path::new(arg.trim())),
            other => Err(Error::Parse(format!("unknown weight kind '{other}'"))),
        }
    }

    pub fn from_table_file(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)?;
        let mut knots = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Parse(format!("weight table row {i} has {} fields", rec.len())));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(t), Ok(w)) => knots.push((t, w)),
                _ if i == 0 => continue,
                _ => return Err(Error::Parse(format!("weight table row {i} is not numeric"))),
            }
        }
        let mut w = Self::table(knots)?;
        w.label = format!("table:{}", path.display());
        Ok(w)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    /// `omega(t)` for `t >= 0`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidParams(format!("weight argument {t} must be >= 0")));
        }
        let v = self.raw(t);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveValue { t, value: v });
        }
        Ok(v)
    }

    /// `c * omega`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.clone();
        Self::function(&format!("{}*{c}", self.label), move |t| c * inner.raw(t))
    }

    fn raw(&self, t: f64) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => *c,
            WeightKind::Affine { slope, intercept } => slope * t + intercept,
            WeightKind::Table(knots) => interpolate(knots, t),
            WeightKind::Function(f) => f(t),
        }
    }
}

fn interpolate(knots: &[(f64, f64)], t: f64) -> f64 {
    if knots.len() == 1 {
        return knots[0].1;
    }
    let k = match knots.iter().position(|(tk, _)| *tk > t) {
        Some(0) => 1,
        Some(k) => k,
        None => knots.len() - 1,
    };
    let ((t0, w0), (t1, w1)) = (knots[k - 1], knots[k]);
    w0 + (w1 - w0) * (t - t0) / (t1 - t0)
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub weight: String,
    pub grid_max: f64,
    pub samples: usize,
    pub positivity: Verdict,
    pub min_value: f64,
    pub monotonicity: Verdict,
    /// Largest drop between consecutive samples (0 if nondecreasing).
    pub worst_decrease: f64,
    pub divergence: Verdict,
    /// Whether the divergence verdict came from the sampled heuristic.
    pub heuristic: bool,
    /// Trapezoid value of the integral of `1/omega` over `[0, grid_max]`.
    pub integral: f64,
    pub threshold: f64,
    pub admissible: bool,
}

/// Grid on `[0, T]` with points `(1 + T)^(k / (N - 1)) - 1`, dense near zero
/// and geometric in `1 + t`.
pub fn weight_grid(grid_max: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    let mut g: Vec<f64> = (0..n)
        .map(|k| (1.0 + grid_max).powf(k as f64 / (n - 1) as f64) - 1.0)
        .collect();
    g[0] = 0.0;
    g[n - 1] = grid_max;
    g
}

fn trapezoid_inverse(w: &Weight, grid: &[f64]) -> f64 {
    grid.windows(2)
        .map(|s| 0.5 * (s[1] - s[0]) * (1.0 / w.raw(s[0]) + 1.0 / w.raw(s[1])))
        .sum()
}

/// Sampled admissibility audit.
///
/// Constant and affine weights get an exact divergence verdict. Every other
/// kind is judged by comparing the trapezoid integral of `1/omega` against
/// `0.5 * ln(1 + T) / omega(0)` at both `T` and `T/2`; that verdict is
/// flagged as heuristic and is never more than sampled evidence.
pub fn check_weight(w: &Weight, grid_max: f64, samples: usize) -> Result<AdmissibilityReport> {
    if !(grid_max > 0.0) || samples < 2 {
        return Err(Error::InvalidParams(format!(
            "check_weight needs T > 0 and at least 2 samples (got {grid_max}, {samples})"
        )));
    }
    let grid = weight_grid(grid_max, samples);
    let values: Vec<f64> = grid.iter().map(|&t| w.raw(t)).collect();
    let min_value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let positive = values.iter().all(|v| v.is_finite() && *v > 0.0);

    let worst_decrease = values.windows(2).map(|p| p[0] - p[1]).fold(0.0, f64::max);
    let monotone = values
        .windows(2)
        .all(|p| p[1] >= p[0] - MONOTONE_SLACK * p[0].abs().max(1.0));

    let (divergence, heuristic, integral, threshold) = match w.kind() {
        WeightKind::Constant(c) => {
            let v = if *c > 0.0 { Verdict::Pass } else { Verdict::Fail };
            (
                v,
                false,
                if positive {
                    trapezoid_inverse(w, &grid)
                } else {
                    f64::NAN
                },
                0.0,
            )
        }
        WeightKind::Affine { slope, intercept } => {
            let v = if *slope >= 0.0 && *intercept > 0.0 {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            (
                v,
                false,
                if positive {
                    trapezoid_inverse(w, &grid)
                } else {
                    f64::NAN
                },
                0.0,
            )
        }
        _ if !positive => (Verdict::Fail, true, f64::NAN, f64::NAN),
        _ => {
            let w0 = w.raw(0.0);
            let full = trapezoid_inverse(w, &grid);
            let half_grid = weight_grid(0.5 * grid_max, samples);
            let half = trapezoid_inverse(w, &half_grid);
            let thr = |t: f64| 0.5 * (1.0 + t).ln() / w0;
            let ok = full >= thr(grid_max) && half >= thr(0.5 * grid_max);
            let v = if ok { Verdict::HeuristicPass } else { Verdict::Fail };
            (v, true, full, thr(grid_max))
        }
    };

    let positivity = if positive { Verdict::Pass } else { Verdict::Fail };
    let monotonicity = if monotone { Verdict::Pass } else { Verdict::Fail };
    let admissible = positivity.passed() && monotonicity.passed() && divergence.passed();
    Ok(AdmissibilityReport {
        weight: w.label().to_string(),
        grid_max,
        samples,
        positivity,
        min_value,
        monotonicity,
        worst_decrease,
        divergence,
        heuristic,
        integral,
        threshold,
        admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    #[test]
    fn evaluate_examples() {
        assert_eq!(Weight::affine(1.0, 1.0).evaluate(2.0).unwrap(), 3.0);
        assert_eq!(Weight::constant(5.0).evaluate(100.0).unwrap(), 5.0);
        assert_eq!(Weight::affine(2.0, 1.0).evaluate(0.5).unwrap(), 2.0);
        assert!(matches!(
            Weight::affine(-1.0, 1.0).evaluate(2.0),
            Err(Error::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn affine_t_plus_one_is_admissible() {
        let r = check_weight(&Weight::affine(1.0, 1.0), 100.0, DEFAULT_SAMPLES).unwrap();
        assert!(r.admissible && !r.heuristic);
        // trapezoid of 1/(1+t) on [0, 100] is close to ln 101
        assert!((r.integral - 101f64.ln()).abs() < 1e-3, "{}", r.integral);
    }

    #[test]
    fn constant_is_admissible() {
        assert!(
            check_weight(&Weight::constant(2.0), 50.0, DEFAULT_SAMPLES)
                .unwrap()
                .admissible
        );
        assert!(
            !check_weight(&Weight::constant(0.0), 50.0, DEFAULT_SAMPLES)
                .unwrap()
                .admissible
        );
    }

    #[test]
    fn exponential_fails_divergence() {
        let w = Weight::function("exp", f64::exp);
        for t in [10.0, 100.0] {
            let r = check_weight(&w, t, DEFAULT_SAMPLES).unwrap();
            assert_eq!(r.positivity, Verdict::Pass);
            assert_eq!(r.monotonicity, Verdict::Pass);
            assert_eq!(r.divergence, Verdict::Fail, "T = {t}");
            assert!(r.heuristic);
            assert!(r.integral <= 1.0 + 1e-3);
        }
    }

    #[test]
    fn decreasing_fails_monotonicity() {
        let r = check_weight(&Weight::function("1/(1+t)", |t| 1.0 / (1.0 + t)), 10.0, DEFAULT_SAMPLES).unwrap();
        assert_eq!(r.monotonicity, Verdict::Fail);
        assert!(!r.admissible);
    }

    #[test]
    fn heuristic_accepts_affine_growth_given_as_function() {
        let r = check_weight(&Weight::function("t+1", |t| t + 1.0), 100.0, DEFAULT_SAMPLES).unwrap();
        assert_eq!(r.divergence, Verdict::HeuristicPass);
        let r = check_weight(
            &Weight::function("(1+t)^2", |t| (1.0 + t).powi(2)),
            100.0,
            DEFAULT_SAMPLES,
        )
        .unwrap();
        assert_eq!(r.divergence, Verdict::Fail);
    }

    #[test]
    fn table_weights() {
        let w = Weight::table(vec![(0.0, 1.0), (1.0, 2.0), (3.0, 4.0)]).unwrap();
        assert_eq!(w.evaluate(0.5).unwrap(), 1.5);
        assert_eq!(w.evaluate(5.0).unwrap(), 6.0);
        assert!(check_weight(&w, 50.0, DEFAULT_SAMPLES).unwrap().admissible);
        let bad = Weight::table(vec![(0.0, 2.0), (1.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(check_weight(&bad, 5.0, 64).unwrap().monotonicity, Verdict::Fail);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(Weight::parse("constant:2.5").unwrap().evaluate(9.0).unwrap(), 2.5);
        assert_eq!(Weight::parse("affine:1,1").unwrap().evaluate(2.0).unwrap(), 3.0);
        assert!(Weight::parse("cubic:1").is_err());
        assert!(Weight::parse("affine:1").is_err());

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "t,omega\n0,1\n10,11").unwrap();
        let w = Weight::parse(&format!("table:{}", f.path().display())).unwrap();
        assert_eq!(w.evaluate(4.0).unwrap(), 5.0);
    }

    #[test]
    fn invalid_arguments() {
        assert!(check_weight(&Weight::constant(1.0), 0.0, 10).is_err());
        assert!(check_weight(&Weight::constant(1.0), 1.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn positive_affine_always_admissible(a in 1e-3f64..100.0, b in 1e-3f64..100.0, t in 1e-2f64..1e4) {
            prop_assert!(check_weight(&Weight::affine(a, b), t, 256).unwrap().admissible);
        }

        #[test]
        fn convergent_failure_persists(t in 10.0f64..200.0) {
            // same density: samples proportional to log-range
            let w = Weight::function("exp", f64::exp);
            let n = |tt: f64| ((1.0 + tt).ln() * 200.0) as usize;
            let small = check_weight(&w, t, n(t)).unwrap();
            let large = check_weight(&w, 2.0 * t, n(2.0 * t)).unwrap();
            prop_assert!(!small.divergence.passed());
            prop_assert!(!large.divergence.passed());
        }
    }
}
