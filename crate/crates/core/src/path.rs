//! Piecewise-C1 paths `[0, 1] -> X` to be lifted.
//!
//! Polylines are parametrized with constant speed over the whole path, so a
//! vertex sits at the parameter equal to its cumulative arc-length fraction.
//! Each segment, arc or chart line is one smooth piece; lifting restarts at
//! piece joints.

use std::f64::consts::TAU;

use crate::charts::Chart;
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};

#[derive(Debug, Clone)]
pub enum PathSpec {
    Polyline(Vec<Vector>),
    Segment {
        from: Vector,
        to: Vector,
    },
    /// `x[i] = c[i] + r cos(phase + 2 pi turns t)`,
    /// `x[j] = c[j] + r sin(phase + 2 pi turns t)`, other coordinates fixed.
    Circle {
        center: Vector,
        radius: f64,
        turns: f64,
        axes: (usize, usize),
        phase: f64,
    },
    /// Straight line in chart coordinates, `x(t) = phi^{-1}(from + t (to - from))`.
    ChartLine {
        from: Vector,
        to: Vector,
        chart: Chart,
    },
}

impl PathSpec {
    pub fn segment(from: Vector, to: Vector) -> Self {
        PathSpec::Segment { from, to }
    }

    pub fn circle(center: Vector, radius: f64, turns: f64, axes: (usize, usize), phase: f64) -> Self {
        PathSpec::Circle {
            center,
            radius,
            turns,
            axes,
            phase,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PathSpec::Polyline(v) => v.first().map_or(0, |p| p.len()),
            PathSpec::Segment { from, .. } => from.len(),
            PathSpec::Circle { center, .. } => center.len(),
            PathSpec::ChartLine { chart, .. } => chart.dim(),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.dim() != m {
            return Err(Error::InvalidPath(format!(
                "path lives in R^{}, expected R^{m}",
                self.dim()
            )));
        }
        match self {
            PathSpec::Polyline(v) => {
                if v.len() < 2 {
                    return Err(Error::InvalidPath("polyline needs at least two vertices".into()));
                }
                if v.iter().any(|p| p.len() != m || p.iter().any(|c| !c.is_finite())) {
                    return Err(Error::InvalidPath(
                        "polyline vertex has wrong dimension or is not finite".into(),
                    ));
                }
                if v.windows(2).any(|w| (&w[1] - &w[0]).norm() == 0.0) {
                    return Err(Error::InvalidPath("consecutive polyline vertices coincide".into()));
                }
            }
            PathSpec::Segment { from, to } => {
                if to.len() != m || (to - from).norm() == 0.0 || !(to - from).norm().is_finite() {
                    return Err(Error::InvalidPath("degenerate segment".into()));
                }
            }
            PathSpec::Circle {
                radius, turns, axes, ..
            } => {
                let (i, j) = *axes;
                if i == j || i >= m || j >= m {
                    return Err(Error::InvalidPath(format!("bad circle axes ({i}, {j}) in R^{m}")));
                }
                if !(*radius > 0.0) || *turns == 0.0 || !turns.is_finite() {
                    return Err(Error::InvalidPath("circle needs radius > 0 and nonzero turns".into()));
                }
            }
            PathSpec::ChartLine { from, to, .. } => {
                if from.len() != m || to.len() != m || (to - from).norm() == 0.0 {
                    return Err(Error::InvalidPath("degenerate chart line".into()));
                }
            }
        }
        Ok(())
    }

    fn vertices(&self) -> Option<Vec<Vector>> {
        match self {
            PathSpec::Polyline(v) => Some(v.clone()),
            PathSpec::Segment { from, to } => Some(vec![from.clone(), to.clone()]),
            _ => None,
        }
    }

    /// Parameter values of piece joints, `0 = t_0 < ... < t_k = 1`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.vertices() {
            Some(v) => {
                let lens: Vec<f64> = v.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
                let total: f64 = lens.iter().sum();
                let mut acc = 0.0;
                let mut out = vec![0.0];
                for l in &lens[..lens.len() - 1] {
                    acc += l;
                    out.push(acc / total);
                }
                out.push(1.0);
                out
            }
            None => vec![0.0, 1.0],
        }
    }

    fn piece_at(&self, t: f64, breaks: &[f64]) -> usize {
        let k = breaks.len() - 1;
        (0..k).find(|&i| t < breaks[i + 1]).unwrap_or(k - 1)
    }

    /// Point at parameter `t`.
    pub fn point(&self, t: f64) -> Result<Vector> {
        match self {
            PathSpec::Circle {
                center,
                radius,
                turns,
                axes,
                phase,
            } => {
                let a = phase + TAU * turns * t;
                let mut x = center.clone();
                x[axes.0] += radius * a.cos();
                x[axes.1] += radius * a.sin();
                Ok(x)
            }
            PathSpec::ChartLine { from, to, chart } => chart.inverse(&(from + (to - from) * t)),
            _ => {
                let v = self.vertices().expect("polyline");
                let b = self.breakpoints();
                if t >= 1.0 {
                    return Ok(v[v.len() - 1].clone());
                }
                let i = self.piece_at(t, &b);
                let s = (t - b[i]) / (b[i + 1] - b[i]);
                Ok(&v[i] + (&v[i + 1] - &v[i]) * s)
            }
        }
    }

    /// Derivative `dx/dt` at `t`, taken from the piece that starts at or
    /// before `t` (right derivative at joints).
    pub fn velocity(&self, t: f64) -> Result<Vector> {
        self.velocity_on(t, None)
    }

    /// Derivative on a given piece, which resolves joints unambiguously.
    pub fn velocity_on(&self, t: f64, piece: Option<usize>) -> Result<Vector> {
        match self {
            PathSpec::Circle {
                center,
                radius,
                turns,
                axes,
                phase,
            } => {
                let w = TAU * turns;
                let a = phase + w * t;
                let mut v = Vector::zeros(center.len());
                v[axes.0] = -radius * w * a.sin();
                v[axes.1] = radius * w * a.cos();
                Ok(v)
            }
            PathSpec::ChartLine { from, to, chart } => {
                let x = chart.inverse(&(from + (to - from) * t))?;
                let j = chart.jacobian(&x)?;
                linalg::solve_square(&j, &(to - from))
            }
            _ => {
                let v = self.vertices().expect("polyline");
                let b = self.breakpoints();
                let i = piece.unwrap_or_else(|| self.piece_at(t, &b));
                Ok((&v[i + 1] - &v[i]) / (b[i + 1] - b[i]))
            }
        }
    }

    pub fn start(&self) -> Result<Vector> {
        self.point(0.0)
    }

    pub fn end(&self) -> Result<Vector> {
        self.point(1.0)
    }

    /// Same trajectory traversed backwards.
    pub fn reversed(&self) -> Self {
        match self {
            PathSpec::Polyline(v) => PathSpec::Polyline(v.iter().rev().cloned().collect()),
            PathSpec::Segment { from, to } => PathSpec::Segment {
                from: to.clone(),
                to: from.clone(),
            },
            PathSpec::Circle {
                center,
                radius,
                turns,
                axes,
                phase,
            } => PathSpec::Circle {
                center: center.clone(),
                radius: *radius,
                turns: -turns,
                axes: *axes,
                phase: phase + TAU * turns,
            },
            PathSpec::ChartLine { from, to, chart } => PathSpec::ChartLine {
                from: to.clone(),
                to: from.clone(),
                chart: chart.clone(),
            },
        }
    }

    /// `per_piece` evenly spaced points on every piece, joints included.
    pub fn render(&self, per_piece: usize) -> Result<Vec<(f64, Vector)>> {
        let b = self.breakpoints();
        let n = per_piece.max(2);
        let mut out = Vec::new();
        for w in b.windows(2) {
            for k in 0..n {
                let t = w[0] + (w[1] - w[0]) * k as f64 / (n - 1) as f64;
                out.push((t, self.point(t)?));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn polyline_is_constant_speed() {
        let p = PathSpec::Polyline(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, 3.0])]);
        p.validate(2).unwrap();
        assert_eq!(p.breakpoints(), vec![0.0, 0.25, 1.0]);
        assert_abs_diff_eq!(p.point(0.125).unwrap(), v(&[0.5, 0.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(p.point(0.5).unwrap(), v(&[1.0, 1.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(p.velocity(0.1).unwrap().norm(), 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.velocity(0.6).unwrap().norm(), 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.end().unwrap(), v(&[1.0, 3.0]), epsilon = 0.0);
    }

    #[test]
    fn circle_orientation_and_reversal() {
        let c = PathSpec::circle(v(&[0.0, 0.0]), 1.0, 1.0, (0, 1), 0.0);
        c.validate(2).unwrap();
        assert_abs_diff_eq!(c.point(0.25).unwrap(), v(&[0.0, 1.0]), epsilon = 1e-15);
        let r = c.reversed();
        assert_abs_diff_eq!(r.point(0.25).unwrap(), v(&[0.0, -1.0]), epsilon = 1e-15);
        assert_abs_diff_eq!(r.start().unwrap(), c.end().unwrap(), epsilon = 1e-15);
        // finite-difference check of the velocity
        let h = 1e-6;
        let fd = (c.point(0.3 + h).unwrap() - c.point(0.3 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(fd, c.velocity(0.3).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn chart_line_velocity_matches_differences() {
        use crate::domain::OpenBox;
        let chart = Chart::tangent_box(OpenBox::interval(-1.0, 1.0).unwrap());
        let p = PathSpec::ChartLine {
            from: v(&[-3.0]),
            to: v(&[5.0]),
            chart,
        };
        p.validate(1).unwrap();
        let h = 1e-6;
        let fd = (p.point(0.4 + h).unwrap() - p.point(0.4 - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(fd, p.velocity(0.4).unwrap(), epsilon = 1e-7);
    }

    #[test]
    fn invalid_paths() {
        assert!(PathSpec::Polyline(vec![v(&[0.0])]).validate(1).is_err());
        assert!(PathSpec::Polyline(vec![v(&[0.0]), v(&[0.0])]).validate(1).is_err());
        assert!(PathSpec::segment(v(&[0.0]), v(&[1.0])).validate(2).is_err());
        assert!(PathSpec::circle(v(&[0.0, 0.0]), 1.0, 1.0, (0, 0), 0.0)
            .validate(2)
            .is_err());
        assert!(PathSpec::circle(v(&[0.0, 0.0]), -1.0, 1.0, (0, 1), 0.0)
            .validate(2)
            .is_err());
    }
}
