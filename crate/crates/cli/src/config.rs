//! Scenario files (TOML).
//!
//! ```toml
//! name = "diode-solve"
//! seed = 0                        # seeds randomized commands
//!
//! [problem]
//! example = "diode"               # or an inline definition, see below
//! params = { a1 = 1.0 }
//!
//! [charts]                        # optional, default "recommended" on both sides
//! phi = "recommended"
//! psi = "recommended"
//!
//! weight = "affine:1,1"           # optional, default: the example's weight
//!
//! [tracer]                        # optional overrides
//! trace_tol = 1e-8
//!
//! [output]
//! dir = "out/diode"               # overridden by `gift run --out`
//! formats = ["csv", "json"]
//!
//! [[commands]]
//! kind = "evaluate"
//! x = [2.0]
//! expect_y = [0.6931471805599453]
//! tol = 1e-6
//! ```
//!
//! An inline problem replaces `example` with
//! `name`, `m`, `n`, `residuals = ["x1 - y1^3 - y1"]`, `seed_x`, `seed_y`
//! and optional `x_lower`/`x_upper`/`y_lower`/`y_upper` box bounds.
//!
//! Command kinds: `trace`, `evaluate`, `certify`, `monodromy`,
//! `path-independence`, `jacobian-check`. Paths are tables with a `kind` of
//! `segment` (`from`, `to`), `polyline` (`vertices`), `circle` (`center`,
//! `radius`, `turns`, optional `axes` and `phase`), `chart-line` (`from`,
//! `to` in x, straight in phi-coordinates) or `spec` (a string such as
//! `"segment:0;2"`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub charts: Option<ChartsConfig>,
    #[serde(default)]
    pub weight: Option<String>,
    #[serde(default)]
    pub tracer: TracerConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub commands: Vec<CommandConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub example: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub name: Option<String>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub residuals: Option<Vec<String>>,
    pub seed_x: Option<Vec<f64>>,
    pub seed_y: Option<Vec<f64>>,
    pub x_lower: Option<Vec<f64>>,
    pub x_upper: Option<Vec<f64>>,
    pub y_lower: Option<Vec<f64>>,
    pub y_upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartsConfig {
    #[serde(default = "recommended")]
    pub phi: String,
    #[serde(default = "recommended")]
    pub psi: String,
}

fn recommended() -> String {
    "recommended".into()
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TracerConfig {
    pub trace_tol: Option<f64>,
    pub h_init: Option<f64>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub predictor: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: all_formats(),
        }
    }
}

fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PathConfig {
    Segment {
        from: Vec<f64>,
        to: Vec<f64>,
    },
    Polyline {
        vertices: Vec<Vec<f64>>,
    },
    Circle {
        center: Vec<f64>,
        radius: f64,
        turns: f64,
        #[serde(default)]
        axes: Option<[usize; 2]>,
        #[serde(default)]
        phase: Option<f64>,
    },
    ChartLine {
        from: Vec<f64>,
        to: Vec<f64>,
    },
    Spec {
        spec: String,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CommandConfig {
    Trace {
        id: Option<String>,
        path: PathConfig,
        y_start: Option<Vec<f64>>,
        #[serde(default)]
        certificate: bool,
        /// Add the accepted samples to the atlas.
        #[serde(default)]
        extend: bool,
        expect: Option<String>,
    },
    Evaluate {
        id: Option<String>,
        x: Vec<f64>,
        #[serde(default)]
        derivative: bool,
        expect_y: Option<Vec<f64>>,
        tol: Option<f64>,
    },
    Certify {
        id: Option<String>,
        path: Option<PathConfig>,
        checks: Vec<String>,
        charts: Option<ChartsConfig>,
        alt_charts: Option<ChartsConfig>,
        weight: Option<String>,
        sigma_floor: Option<f64>,
        bound: Option<f64>,
        d: Option<f64>,
        #[serde(default)]
        refine: bool,
        grid_max: Option<f64>,
        expect: Option<String>,
    },
    Monodromy {
        id: Option<String>,
        #[serde(rename = "loop")]
        lp: Option<PathConfig>,
        expect: Option<String>,
        expect_gap: Option<f64>,
        gap_tol: Option<f64>,
    },
    PathIndependence {
        id: Option<String>,
        target: Vec<f64>,
        paths: Vec<PathConfig>,
        expect: Option<String>,
    },
    JacobianCheck {
        id: Option<String>,
        samples: Option<usize>,
        tol: Option<f64>,
    },
}

impl CommandConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            CommandConfig::Trace { .. } => "trace",
            CommandConfig::Evaluate { .. } => "evaluate",
            CommandConfig::Certify { .. } => "certify",
            CommandConfig::Monodromy { .. } => "monodromy",
            CommandConfig::PathIndependence { .. } => "path-independence",
            CommandConfig::JacobianCheck { .. } => "jacobian-check",
        }
    }

    pub fn id(&self) -> Option<&str> {
        match self {
            CommandConfig::Trace { id, .. }
            | CommandConfig::Evaluate { id, .. }
            | CommandConfig::Certify { id, .. }
            | CommandConfig::Monodromy { id, .. }
            | CommandConfig::PathIndependence { id, .. }
            | CommandConfig::JacobianCheck { id, .. } => id.as_deref(),
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigParse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        let p = &self.problem;
        let inline = p.residuals.is_some() || p.m.is_some() || p.n.is_some();
        match (&p.example, inline) {
            (Some(_), true) => {
                return Err(CliError::ConfigParse(
                    "problem sets both `example` and an inline definition".into(),
                ))
            }
            (None, false) => {
                return Err(CliError::ConfigParse(
                    "problem needs `example` or `m`, `n`, `residuals`, `seed_x`, `seed_y`".into(),
                ))
            }
            (None, true) => {
                if p.m.is_none() || p.n.is_none() || p.residuals.is_none() || p.seed_x.is_none() || p.seed_y.is_none() {
                    return Err(CliError::ConfigParse(
                        "inline problem needs `m`, `n`, `residuals`, `seed_x` and `seed_y`".into(),
                    ));
                }
            }
            (Some(_), false) => {}
        }
        let mut ids = std::collections::BTreeSet::new();
        for (i, c) in self.commands.iter().enumerate() {
            let id = command_id(c, i);
            if !id
                .chars()
                .all(|ch| ch.is_ascii_alphanumeric() || ch == '-' || ch == '_')
            {
                return Err(CliError::ConfigParse(format!(
                    "command id {id:?} must be [A-Za-z0-9_-]"
                )));
            }
            if !ids.insert(id.clone()) {
                return Err(CliError::ConfigParse(format!("duplicate command id {id:?}")));
            }
        }
        Ok(())
    }
}

/// Explicit id, or `<index>-<kind>` with a 1-based two-digit index.
pub fn command_id(c: &CommandConfig, index: usize) -> String {
    c.id()
        .map(str::to_string)
        .unwrap_or_else(|| format!("{:02}-{}", index + 1, c.kind()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_example_config() {
        let c = ScenarioConfig::parse(
            r#"
            name = "t"
            [problem]
            example = "diode"
            [[commands]]
            kind = "evaluate"
            x = [2.0]
            "#,
        )
        .unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.output.formats, vec![Format::Csv, Format::Json]);
        assert_eq!(command_id(&c.commands[0], 0), "01-evaluate");
    }

    #[test]
    fn rejects_malformed_configs() {
        for text in [
            "name = \"t\"",
            "name = \"t\"\n[problem]\n",
            "name = \"t\"\n[problem]\nexample = \"diode\"\nm = 1",
            "name = \"t\"\n[problem]\nm = 1\nn = 1",
            "name = \"t\"\n[problem]\nexample = \"diode\"\n[[commands]]\nkind = \"dance\"",
            "name = \"t\"\n[problem]\nexample = \"diode\"\n[[commands]]\nkind = \"evaluate\"\nx = [1.0]\nbogus = 1",
            "name = \"t\"\n[problem]\nexample = \"diode\"\n[[commands]]\nkind = \"evaluate\"\nid = \"a\"\nx = [1.0]\n[[commands]]\nkind = \"evaluate\"\nid = \"a\"\nx = [1.0]",
            "not toml at all [",
        ] {
            assert!(matches!(ScenarioConfig::parse(text), Err(CliError::ConfigParse(_))), "{text}");
        }
    }

    #[test]
    fn paths_and_commands() {
        let c = ScenarioConfig::parse(
            r#"
            name = "t"
            [problem]
            example = "annulus"
            [[commands]]
            kind = "monodromy"
            expect = "open"
            loop = { kind = "circle", center = [0.0, 0.0], radius = 1.5, turns = 1.0, axes = [1, 0] }
            [[commands]]
            kind = "trace"
            path = { kind = "spec", spec = "segment:0,0;1,1" }
            "#,
        )
        .unwrap();
        match &c.commands[0] {
            CommandConfig::Monodromy {
                lp: Some(PathConfig::Circle { axes, .. }),
                ..
            } => {
                assert_eq!(*axes, Some([1, 0]))
            }
            other => panic!("{other:?}"),
        }
    }
}
