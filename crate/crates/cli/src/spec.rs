//! Compact string forms for paths, charts and vectors used on the command line.
//!
//! ```text
//! vector   1.5,-2
//! segment  segment:0,0;1,1
//! polyline polyline:0,0;1,0;1,1
//! circle   circle:CX,CY;R;TURNS[;I,J[;PHASE]]   (axes 0-based)
//! charts   PHI/PSI, or a single word used for both
//! chart    identity | recommended | tangent-box:LO,HI[;LO,HI...] | scaled:C
//! ```

use gift_core::{Chart, ChartPair, ExampleDescriptor, OpenBox, PathSpec, Vector};

use crate::error::CliError;

fn bad(what: &str, s: &str) -> CliError {
    CliError::ConfigParse(format!("cannot parse {what} from {s:?}"))
}

pub fn parse_vector(s: &str) -> Result<Vector, CliError> {
    let vals: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if !v.is_empty() => Ok(Vector::from_vec(v)),
        _ => Err(bad("a vector", s)),
    }
}

pub fn parse_path(s: &str) -> Result<PathSpec, CliError> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| bad("a path", s))?;
    let parts: Vec<&str> = rest.split(';').collect();
    match kind.trim() {
        "segment" if parts.len() == 2 => Ok(PathSpec::segment(parse_vector(parts[0])?, parse_vector(parts[1])?)),
        "polyline" => Ok(PathSpec::Polyline(
            parts.iter().map(|p| parse_vector(p)).collect::<Result<_, _>>()?,
        )),
        "circle" if (3..=5).contains(&parts.len()) => {
            let center = parse_vector(parts[0])?;
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("a circle", s));
            let axes = match parts.get(3) {
                Some(a) => {
                    let ij: Vec<usize> = a
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("circle axes", a))?;
                    if ij.len() != 2 {
                        return Err(bad("circle axes", a));
                    }
                    (ij[0], ij[1])
                }
                None => (0, 1),
            };
            let phase = parts.get(4).map(|p| num(p)).transpose()?.unwrap_or(0.0);
            Ok(PathSpec::circle(center, num(parts[1])?, num(parts[2])?, axes, phase))
        }
        _ => Err(bad("a path", s)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartSpec {
    Identity,
    Recommended,
    TangentBox(Vec<(f64, f64)>),
    Scaled(f64),
}

pub fn parse_chart(s: &str) -> Result<ChartSpec, CliError> {
    let s = s.trim();
    match s.split_once(':') {
        None if s == "identity" => Ok(ChartSpec::Identity),
        None if s == "recommended" => Ok(ChartSpec::Recommended),
        Some(("tangent-box", rest)) => {
            let mut bounds = Vec::new();
            for iv in rest.split(';') {
                let v = parse_vector(iv)?;
                if v.len() != 2 {
                    return Err(bad("an interval", iv));
                }
                bounds.push((v[0], v[1]));
            }
            Ok(ChartSpec::TangentBox(bounds))
        }
        Some(("scaled", c)) => c.trim().parse().map(ChartSpec::Scaled).map_err(|_| bad("a scale", c)),
        _ => Err(bad("a chart", s)),
    }
}

/// `PHI/PSI`; a spec without `/` applies to both sides.
pub fn parse_chart_pair(s: &str) -> Result<(ChartSpec, ChartSpec), CliError> {
    match s.split_once('/') {
        Some((a, b)) => Ok((parse_chart(a)?, parse_chart(b)?)),
        None => {
            let c = parse_chart(s)?;
            Ok((c.clone(), c))
        }
    }
}

/// Build one side of a chart pair. `recommended` takes the example's chart
/// and falls back to the identity.
pub fn build_chart(
    spec: &ChartSpec,
    dim: usize,
    example: Option<&ExampleDescriptor>,
    psi_side: bool,
) -> Result<Chart, CliError> {
    Ok(match spec {
        ChartSpec::Identity => Chart::identity(dim),
        ChartSpec::Recommended => match example {
            Some(d) if psi_side => d.charts.psi.clone(),
            Some(d) => d.charts.phi.clone(),
            None => Chart::identity(dim),
        },
        ChartSpec::TangentBox(b) => {
            if b.len() != dim {
                return Err(CliError::ConfigParse(format!(
                    "tangent-box chart has {} intervals, expected {dim}",
                    b.len()
                )));
            }
            let bx = OpenBox::new(b.iter().map(|p| p.0).collect(), b.iter().map(|p| p.1).collect())?;
            Chart::tangent_box(bx)
        }
        ChartSpec::Scaled(c) => Chart::identity(dim).scaled(*c)?,
    })
}

pub fn build_chart_pair(
    specs: &(ChartSpec, ChartSpec),
    m: usize,
    n: usize,
    example: Option<&ExampleDescriptor>,
) -> Result<ChartPair, CliError> {
    Ok(ChartPair::new(
        build_chart(&specs.0, m, example, false)?,
        build_chart(&specs.1, n, example, true)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths() {
        let p = parse_path("segment:0;2").unwrap();
        assert_eq!(p.end().unwrap()[0], 2.0);
        let p = parse_path("polyline:0,0;1,0;1,1").unwrap();
        p.validate(2).unwrap();
        let c = parse_path("circle:0,0;1.5;1;1,0;0.5").unwrap();
        match c {
            PathSpec::Circle { axes, phase, .. } => assert_eq!((axes, phase), ((1, 0), 0.5)),
            _ => panic!(),
        }
        for bad in ["segment:0", "spiral:1", "circle:0,0", "segment:a;b", "nope"] {
            assert!(parse_path(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn charts() {
        assert_eq!(
            parse_chart_pair("identity").unwrap(),
            (ChartSpec::Identity, ChartSpec::Identity)
        );
        assert_eq!(
            parse_chart_pair("identity/tangent-box:-1,1").unwrap(),
            (ChartSpec::Identity, ChartSpec::TangentBox(vec![(-1.0, 1.0)]))
        );
        assert_eq!(parse_chart("scaled:2").unwrap(), ChartSpec::Scaled(2.0));
        assert!(parse_chart("tangent-box:1").is_err());
        assert!(build_chart(&ChartSpec::TangentBox(vec![(0.0, 1.0)]), 2, None, false).is_err());
    }
}
