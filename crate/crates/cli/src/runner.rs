//! Executes scenarios and writes their artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use gift_core::certify::{self, CertificateReport};
use gift_core::examples::{self, ExampleDescriptor};
use gift_core::expr::inline_problem;
use gift_core::weights::DEFAULT_SAMPLES;
use gift_core::{
    check_weight, lift_path, ChartPair, ImplicitProblem, OpenBox, PathSpec, Predictor, SolutionAtlas, Trace,
    TracerOptions, Vector, Weight,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    command_id, ChartsConfig, CommandConfig, Format, PathConfig, ProblemConfig, ScenarioConfig, TracerConfig,
};
use crate::error::CliError;
use crate::spec::{build_chart_pair, parse_chart, parse_path};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandOutcome {
    pub id: String,
    pub kind: String,
    pub passed: bool,
    pub expected: String,
    pub observed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub details: Value,
    pub artifacts: Vec<String>,
}

/// Everything in the summary is a deterministic function of the config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub problem: String,
    pub parameters: BTreeMap<String, f64>,
    pub seed: u64,
    pub passed: bool,
    pub commands: Vec<CommandOutcome>,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("scenario {} ({})\n", self.scenario, self.problem);
        let w = self.commands.iter().map(|c| c.id.len()).max().unwrap_or(2).max(2);
        for c in &self.commands {
            out.push_str(&format!(
                "  {:<w$}  {:<17}  {:<4}  expected {}, observed {}{}\n",
                c.id,
                c.kind,
                if c.passed { "ok" } else { "FAIL" },
                c.expected,
                c.observed,
                c.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default(),
            ));
        }
        out.push_str(if self.passed {
            "all checks met\n"
        } else {
            "some checks failed\n"
        });
        out
    }
}

pub fn tracer_options(t: &TracerConfig) -> Result<TracerOptions, CliError> {
    let mut o = TracerOptions::default();
    if let Some(v) = t.trace_tol {
        o.trace_tol = v;
    }
    if let Some(v) = t.h_init {
        o.h_init = v;
    }
    if let Some(v) = t.h_min {
        o.h_min = v;
    }
    if let Some(v) = t.h_max {
        o.h_max = v;
    }
    if let Some(p) = &t.predictor {
        o.predictor = match p.as_str() {
            "rk4" => Predictor::Rk4,
            "euler" => Predictor::Euler,
            other => return Err(CliError::ConfigParse(format!("unknown predictor {other:?}"))),
        };
    }
    o.validate().map_err(|e| CliError::ConfigParse(e.to_string()))?;
    Ok(o)
}

fn vec_of(v: &[f64]) -> Vector {
    Vector::from_column_slice(v)
}

fn boxed(lower: &Option<Vec<f64>>, upper: &Option<Vec<f64>>, dim: usize) -> Result<Option<OpenBox>, CliError> {
    match (lower, upper) {
        (None, None) => Ok(None),
        (lo, hi) => {
            let lo = lo.clone().unwrap_or_else(|| vec![f64::NEG_INFINITY; dim]);
            let hi = hi.clone().unwrap_or_else(|| vec![f64::INFINITY; dim]);
            if lo.len() != dim || hi.len() != dim {
                return Err(CliError::ConfigParse(format!("box bounds must have length {dim}")));
            }
            Ok(Some(OpenBox::new(lo, hi)?))
        }
    }
}

/// Problem plus its example descriptor when it came from the catalog.
pub fn build_problem(p: &ProblemConfig) -> Result<(ImplicitProblem, Option<ExampleDescriptor>), CliError> {
    if let Some(name) = &p.example {
        let d = examples::by_name(name, &p.params)?;
        return Ok((d.problem.clone(), Some(d)));
    }
    let (m, n) = (p.m.unwrap_or(0), p.n.unwrap_or(0));
    let sx = p.seed_x.clone().unwrap_or_default();
    let sy = p.seed_y.clone().unwrap_or_default();
    let mut b = inline_problem(
        p.name.as_deref().unwrap_or("inline"),
        m,
        n,
        p.residuals.as_deref().unwrap_or_default(),
        (vec_of(&sx), vec_of(&sy)),
    )?;
    if let Some(bx) = boxed(&p.x_lower, &p.x_upper, m)? {
        b = b.domain_x(bx);
    }
    if let Some(bx) = boxed(&p.y_lower, &p.y_upper, n)? {
        b = b.domain_y(bx);
    }
    for (k, v) in &p.params {
        b = b.param(k, *v);
    }
    Ok((b.build().map_err(|e| CliError::ConfigParse(e.to_string()))?, None))
}

pub struct Runner {
    cfg: ScenarioConfig,
    problem: ImplicitProblem,
    example: Option<ExampleDescriptor>,
    charts: ChartPair,
    weight: Weight,
    atlas: SolutionAtlas,
    out_dir: PathBuf,
}

impl Runner {
    pub fn new(cfg: ScenarioConfig, out_dir: &Path) -> Result<Self, CliError> {
        let (problem, example) = build_problem(&cfg.problem)?;
        let opts = tracer_options(&cfg.tracer)?;
        let charts = Self::charts_from(&cfg.charts, &problem, example.as_ref())?;
        let weight = match (&cfg.weight, &example) {
            (Some(w), _) => Weight::parse(w)?,
            (None, Some(d)) => d.weight.clone(),
            (None, None) => Weight::affine(1.0, 1.0),
        };
        let atlas = SolutionAtlas::new(problem.clone(), opts)?;
        Ok(Self {
            cfg,
            problem,
            example,
            charts,
            weight,
            atlas,
            out_dir: out_dir.to_path_buf(),
        })
    }

    fn charts_from(
        c: &Option<ChartsConfig>,
        p: &ImplicitProblem,
        example: Option<&ExampleDescriptor>,
    ) -> Result<ChartPair, CliError> {
        let (phi, psi) = match c {
            Some(c) => (parse_chart(&c.phi)?, parse_chart(&c.psi)?),
            None => (parse_chart("recommended")?, parse_chart("recommended")?),
        };
        build_chart_pair(&(phi, psi), p.m(), p.n(), example)
    }

    fn path(&self, p: &PathConfig) -> Result<PathSpec, CliError> {
        let spec = match p {
            PathConfig::Segment { from, to } => PathSpec::segment(vec_of(from), vec_of(to)),
            PathConfig::Polyline { vertices } => PathSpec::Polyline(vertices.iter().map(|v| vec_of(v)).collect()),
            PathConfig::Circle {
                center,
                radius,
                turns,
                axes,
                phase,
            } => {
                let [i, j] = axes.unwrap_or([0, 1]);
                PathSpec::circle(vec_of(center), *radius, *turns, (i, j), phase.unwrap_or(0.0))
            }
            PathConfig::ChartLine { from, to } => {
                let phi = &self.charts.phi;
                PathSpec::ChartLine {
                    from: phi.forward(&vec_of(from))?,
                    to: phi.forward(&vec_of(to))?,
                    chart: phi.clone(),
                }
            }
            PathConfig::Spec { spec } => parse_path(spec)?,
        };
        spec.validate(self.problem.m())
            .map_err(|e| CliError::ConfigParse(e.to_string()))?;
        Ok(spec)
    }

    fn write(&self, name: &str, contents: &str) -> Result<String, CliError> {
        fs::create_dir_all(&self.out_dir)?;
        fs::write(self.out_dir.join(name), contents)?;
        Ok(name.to_string())
    }

    fn wants(&self, f: Format) -> bool {
        self.cfg.output.formats.contains(&f)
    }

    fn write_json<T: Serialize>(&self, id: &str, v: &T) -> Result<Vec<String>, CliError> {
        if !self.wants(Format::Json) {
            return Ok(vec![]);
        }
        let mut s = serde_json::to_string_pretty(v).map_err(gift_core::Error::from)?;
        s.push('\n');
        Ok(vec![self.write(&format!("{id}.json"), &s)?])
    }

    fn write_trace(&self, id: &str, tr: &Trace) -> Result<Vec<String>, CliError> {
        let mut out = Vec::new();
        if self.wants(Format::Csv) {
            let mut buf = Vec::new();
            tr.write_csv(&mut buf)?;
            out.push(self.write(&format!("{id}.csv"), &String::from_utf8_lossy(&buf))?);
        }
        if self.wants(Format::Json) {
            out.push(self.write(&format!("{id}.json"), &(tr.to_json()? + "\n"))?);
        }
        Ok(out)
    }

    /// Run every command in order and write `summary.json`. Numerical errors
    /// become failed entries; bad input aborts the run.
    pub fn run(mut self) -> Result<Summary, CliError> {
        let commands = self.cfg.commands.clone();
        let mut outcomes = Vec::with_capacity(commands.len());
        for (i, c) in commands.iter().enumerate() {
            let id = command_id(c, i);
            log::info!("running {id}");
            let outcome = match self.execute(&id, c) {
                Ok(o) => o,
                Err(e @ CliError::Numerical(_)) => CommandOutcome {
                    id: id.clone(),
                    kind: c.kind().to_string(),
                    passed: false,
                    expected: "success".into(),
                    observed: "error".into(),
                    error: Some(format!("{}: {e}", e.kind())),
                    details: Value::Null,
                    artifacts: vec![],
                },
                Err(e) => return Err(e),
            };
            log::info!("{id}: {}", if outcome.passed { "ok" } else { "failed" });
            outcomes.push(outcome);
        }
        let summary = Summary {
            scenario: self.cfg.name.clone(),
            problem: self.problem.name().to_string(),
            parameters: self
                .example
                .as_ref()
                .map_or_else(|| self.problem.parameters().clone(), |d| d.parameters.clone()),
            seed: self.cfg.seed,
            passed: outcomes.iter().all(|o| o.passed),
            commands: outcomes,
        };
        self.write("summary.json", &summary.to_json())?;
        Ok(summary)
    }

    fn start_y(&mut self, path: &PathSpec, y_start: &Option<Vec<f64>>) -> Result<Vector, CliError> {
        Ok(match y_start {
            Some(y) => vec_of(y),
            None => self.atlas.evaluate(&path.start()?)?,
        })
    }

    fn execute(&mut self, id: &str, c: &CommandConfig) -> Result<CommandOutcome, CliError> {
        let outcome =
            |passed: bool, expected: String, observed: String, details: Value, artifacts: Vec<String>| CommandOutcome {
                id: id.to_string(),
                kind: c.kind().to_string(),
                passed,
                expected,
                observed,
                error: None,
                details,
                artifacts,
            };
        match c {
            CommandConfig::Trace {
                path,
                y_start,
                certificate,
                extend,
                expect,
                ..
            } => {
                let path = self.path(path)?;
                let y0 = self.start_y(&path, y_start)?;
                let mut opts = self.atlas.options().clone();
                if *certificate {
                    opts.certificate = Some((self.charts.clone(), self.weight.clone()));
                }
                let tr = lift_path(&self.problem, &path, &y0, &opts)?;
                if *extend && tr.is_completed() {
                    self.atlas.absorb(&tr)?;
                }
                let observed = status_kind(&tr);
                let expected = expect.clone().unwrap_or_else(|| "completed".into());
                let passed = observed == expected || (expected == "failed" && !tr.is_completed());
                let details = json!({
                    "status": tr.status,
                    "samples": tr.samples.len(),
                    "final_x": tr.final_x().map(|v| v.as_slice().to_vec()),
                    "final_y": tr.final_y().map(|v| v.as_slice().to_vec()),
                    "max_residual": tr.max_residual(),
                });
                let artifacts = self.write_trace(id, &tr)?;
                Ok(outcome(passed, expected, observed, details, artifacts))
            }
            CommandConfig::Evaluate {
                x,
                derivative,
                expect_y,
                tol,
                ..
            } => {
                let x = vec_of(x);
                let y = self.atlas.evaluate(&x)?;
                let dg = if *derivative {
                    Some(self.atlas.derivative(&x)?)
                } else {
                    None
                };
                let (passed, expected, observed) = match expect_y {
                    Some(e) => {
                        let tol = tol.unwrap_or(1e-6);
                        let err = if e.len() == y.len() {
                            (vec_of(e) - &y).amax()
                        } else {
                            f64::INFINITY
                        };
                        (
                            err <= tol,
                            format!("y within {tol:e} of {e:?}"),
                            format!("error {err:e}"),
                        )
                    }
                    None => (true, "success".into(), "success".into()),
                };
                let details = json!({
                    "x": x.as_slice(),
                    "y": y.as_slice(),
                    "derivative": dg.map(|m| m.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>()),
                });
                let artifacts = self.write_json(id, &details)?;
                Ok(outcome(passed, expected, observed, details, artifacts))
            }
            CommandConfig::Certify {
                path,
                checks,
                charts,
                alt_charts,
                weight,
                sigma_floor,
                bound,
                d,
                refine,
                grid_max,
                expect,
                ..
            } => {
                let charts = match charts {
                    Some(c) => Self::charts_from(&Some(c.clone()), &self.problem, self.example.as_ref())?,
                    None => self.charts.clone(),
                };
                let weight = match weight {
                    Some(w) => Weight::parse(w)?,
                    None => self.weight.clone(),
                };
                let needs_trace = checks.iter().any(|c| c != "weight");
                let trace = if needs_trace {
                    let p = path
                        .as_ref()
                        .ok_or_else(|| CliError::ConfigParse("certify needs a `path` for trace-based checks".into()))?;
                    let path = self.path(p)?;
                    let y0 = self.start_y(&path, &None)?;
                    let tr = lift_path(&self.problem, &path, &y0, self.atlas.options())?;
                    Some(if *refine {
                        certify::refine_midpoints(&self.problem, &tr, &self.atlas.options().corrector)?
                    } else {
                        tr
                    })
                } else {
                    None
                };
                let mut reports: Vec<Value> = Vec::new();
                let mut rows: Vec<Value> = Vec::new();
                let mut all_pass = true;
                for check in checks {
                    let tr = trace.as_ref();
                    let report: Result<CertificateReport, CliError> = match check.as_str() {
                        "growth" => Ok(certify::growth_bound_check(
                            &self.problem,
                            tr.unwrap(),
                            &charts,
                            &weight,
                        )?),
                        "left-invertibility" => Ok(certify::left_invertibility_check(
                            &self.problem,
                            tr.unwrap(),
                            *sigma_floor,
                        )?),
                        "ichiraku" => {
                            let m = bound.ok_or_else(|| CliError::ConfigParse("ichiraku needs `bound`".into()))?;
                            Ok(certify::ichiraku_bound_check(&self.problem, tr.unwrap(), m)?)
                        }
                        "diagonal-dominance" => {
                            let d = d.ok_or_else(|| CliError::ConfigParse("diagonal-dominance needs `d`".into()))?;
                            Ok(certify::diagonal_dominance_on_trace(&self.problem, tr.unwrap(), d)?)
                        }
                        "weight" => {
                            let r = check_weight(&weight, grid_max.unwrap_or(100.0), DEFAULT_SAMPLES)?;
                            all_pass &= r.admissible;
                            rows.push(json!({
                                "check": "weight",
                                "verdict": if r.admissible { r.divergence.to_string() } else { "fail".to_string() },
                                "heuristic": r.heuristic,
                            }));
                            reports.push(serde_json::to_value(&r).map_err(gift_core::Error::from)?);
                            continue;
                        }
                        "chart-probe" => {
                            let alt = alt_charts
                                .as_ref()
                                .ok_or_else(|| CliError::ConfigParse("chart-probe needs `alt_charts`".into()))?;
                            let alt = Self::charts_from(&Some(alt.clone()), &self.problem, self.example.as_ref())?;
                            let r = certify::chart_independence_probe(&self.problem, tr.unwrap(), &charts, &alt)?;
                            rows.push(json!({ "check": "chart-probe", "max_factor": r.max_factor }));
                            reports.push(serde_json::to_value(&r).map_err(gift_core::Error::from)?);
                            continue;
                        }
                        other => Err(CliError::ConfigParse(format!("unknown check {other:?}"))),
                    };
                    let r = report?;
                    all_pass &= r.passed();
                    rows.push(json!({
                        "check": r.name,
                        "verdict": r.verdict,
                        "worst_margin": r.worst_margin,
                        "worst_location": r.worst_location,
                        "samples_checked": r.samples_checked,
                    }));
                    reports.push(serde_json::to_value(&r).map_err(gift_core::Error::from)?);
                }
                let observed = if all_pass { "pass" } else { "fail" }.to_string();
                let expected = expect.clone().unwrap_or_else(|| "pass".into());
                let details = json!({
                    "trace_status": trace.as_ref().map(|t| t.status),
                    "checks": rows,
                });
                let artifacts = self.write_json(
                    id,
                    &json!({ "trace_status": details["trace_status"], "reports": reports }),
                )?;
                Ok(outcome(observed == expected, expected, observed, details, artifacts))
            }
            CommandConfig::Monodromy {
                lp,
                expect,
                expect_gap,
                gap_tol,
                ..
            } => {
                let lp = match lp {
                    Some(p) => self.path(p)?,
                    None => self
                        .example
                        .as_ref()
                        .and_then(|d| d.designated_loop.as_ref())
                        .map(|l| l.path.clone())
                        .ok_or_else(|| CliError::ConfigParse("monodromy needs a `loop`".into()))?,
                };
                self.atlas.evaluate(&lp.start()?)?;
                let r = self.atlas.monodromy_check(&lp)?;
                let observed = if r.outcome.is_open() { "open" } else { "closed" }.to_string();
                let mut expected = expect.clone().unwrap_or_else(|| "closed".into());
                let mut passed = observed == expected;
                if let Some(g) = expect_gap {
                    let tol = gap_tol.unwrap_or(1e-3);
                    passed &= (r.outcome.gap() - g).abs() <= tol;
                    expected = format!("{expected} with gap {g} +- {tol:e}");
                }
                let details = json!({
                    "gap": r.outcome.gap(),
                    "threshold": r.threshold,
                    "y_start": r.y_start,
                    "y_end": r.y_end,
                    "samples": r.samples,
                });
                let artifacts = self.write_json(id, &r)?;
                Ok(outcome(passed, expected, observed, details, artifacts))
            }
            CommandConfig::PathIndependence {
                target, paths, expect, ..
            } => {
                let paths: Vec<PathSpec> = paths.iter().map(|p| self.path(p)).collect::<Result<_, _>>()?;
                for p in &paths {
                    self.atlas.evaluate(&p.start()?)?;
                }
                let r = self.atlas.path_independence_check(&vec_of(target), &paths)?;
                let observed = r.verdict.to_string();
                let expected = expect.clone().unwrap_or_else(|| "pass".into());
                let details = serde_json::to_value(&r).map_err(gift_core::Error::from)?;
                let artifacts = self.write_json(id, &r)?;
                Ok(outcome(observed == expected, expected, observed, details, artifacts))
            }
            CommandConfig::JacobianCheck { samples, tol, .. } => {
                let (worst, count) = self.jacobian_check(samples.unwrap_or(100))?;
                let tol = tol.unwrap_or(1e-5);
                let details = json!({ "samples": count, "max_relative_error": worst, "tol": tol });
                let artifacts = self.write_json(id, &details)?;
                Ok(outcome(
                    worst <= tol,
                    format!("relative error <= {tol:e}"),
                    format!("{worst:e}"),
                    details,
                    artifacts,
                ))
            }
        }
    }

    /// Largest relative difference between analytic and finite-difference
    /// Jacobians at random points.
    fn jacobian_check(&self, n: usize) -> Result<(f64, usize), CliError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let p = &self.problem;
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let mut attempts = 0;
        while count < n && attempts < 20 * n {
            attempts += 1;
            let (x, y) = match &self.example {
                Some(d) => {
                    let ux: Vec<f64> = (0..d.x_region.arity()).map(|_| rng.random()).collect();
                    let uy: Vec<f64> = (0..d.y_region.arity()).map(|_| rng.random()).collect();
                    (d.x_region.point(&ux), d.y_region.point(&uy))
                }
                None => {
                    let (sx, sy) = p.seed();
                    let jitter = |v: &Vector, rng: &mut ChaCha8Rng| v.map(|c| c + rng.random_range(-0.5..0.5));
                    (jitter(sx, &mut rng), jitter(sy, &mut rng))
                }
            };
            if p.check_point(&x, &y).is_err() {
                continue;
            }
            for (a, f) in [
                (p.jac_x(&x, &y)?, p.fd_jac_x(&x, &y)?),
                (p.jac_y(&x, &y)?, p.fd_jac_y(&x, &y)?),
            ] {
                worst = worst.max((&a - &f).norm() / a.norm().max(1.0));
            }
            count += 1;
        }
        Ok((worst, count))
    }
}

fn status_kind(tr: &Trace) -> String {
    serde_json::to_value(tr.status)
        .ok()
        .and_then(|v| v.get("kind").and_then(Value::as_str).map(str::to_string))
        .unwrap_or_default()
}

/// Load, run and summarize a scenario file.
pub fn run_file(config: &Path, out_override: Option<&Path>) -> Result<Summary, CliError> {
    let cfg = ScenarioConfig::load(config)?;
    let out = match (out_override, &cfg.output.dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(d)) => PathBuf::from(d),
        (None, None) => PathBuf::from("gift-out").join(&cfg.name),
    };
    Runner::new(cfg, &out)?.run()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleRow {
    pub name: String,
    pub tags: Vec<String>,
    pub dims: (usize, usize, usize),
    pub summary: String,
}

pub fn list_examples() -> Vec<ExampleRow> {
    examples::catalog()
        .into_iter()
        .map(|d| ExampleRow {
            name: d.name.clone(),
            tags: d.tags.iter().map(|t| t.to_string()).collect(),
            dims: (d.problem.m(), d.problem.n(), d.problem.l()),
            summary: d.summary.clone(),
        })
        .collect()
}

pub fn render_examples(rows: &[ExampleRow]) -> String {
    let mut out = format!("{:<20} {:<10} {:<36} {}\n", "name", "m/n/l", "tags", "summary");
    for r in rows {
        out.push_str(&format!(
            "{:<20} {:<10} {:<36} {}\n",
            r.name,
            format!("{}/{}/{}", r.dims.0, r.dims.1, r.dims.2),
            r.tags.join(","),
            r.summary
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracer_overrides() {
        let t = TracerConfig {
            trace_tol: Some(1e-10),
            predictor: Some("euler".into()),
            ..Default::default()
        };
        let o = tracer_options(&t).unwrap();
        assert_eq!((o.trace_tol, o.predictor), (1e-10, Predictor::Euler));
        let bad = TracerConfig {
            predictor: Some("leapfrog".into()),
            ..Default::default()
        };
        assert!(matches!(tracer_options(&bad), Err(CliError::ConfigParse(_))));
        let bad = TracerConfig {
            h_min: Some(1.0),
            h_max: Some(0.1),
            ..Default::default()
        };
        assert!(tracer_options(&bad).is_err());
    }

    #[test]
    fn inline_problem_with_boxes() {
        let p = ProblemConfig {
            name: Some("cube".into()),
            m: Some(1),
            n: Some(1),
            residuals: Some(vec!["x1 - y1^3".into()]),
            seed_x: Some(vec![1.0]),
            seed_y: Some(vec![1.0]),
            y_lower: Some(vec![0.0]),
            ..Default::default()
        };
        let (prob, ex) = build_problem(&p).unwrap();
        assert!(ex.is_none());
        assert!(prob.residual(&vec_of(&[8.0]), &vec_of(&[-1.0])).is_err());
        assert_eq!(prob.residual(&vec_of(&[8.0]), &vec_of(&[2.0])).unwrap()[0], 0.0);
    }

    #[test]
    fn runs_in_memory_and_writes_only_requested_formats() {
        let cfg = ScenarioConfig::parse(
            r#"
            name = "mem"
            [problem]
            example = "cubic"
            [output]
            formats = ["json"]
            [[commands]]
            id = "t"
            kind = "trace"
            path = { kind = "segment", from = [0.0], to = [2.0] }
            "#,
        )
        .unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let s = Runner::new(cfg, tmp.path()).unwrap().run().unwrap();
        assert!(s.passed);
        assert_eq!(s.commands[0].artifacts, vec!["t.json".to_string()]);
        assert!(!tmp.path().join("t.csv").exists());
        assert!(s.render().contains("all checks met"));
    }

    #[test]
    fn example_rows() {
        let rows = list_examples();
        assert!(rows
            .iter()
            .any(|r| r.name == "annulus" && r.tags.contains(&"monodromy-open".to_string())));
        assert!(render_examples(&rows).lines().count() == rows.len() + 1);
    }
}
