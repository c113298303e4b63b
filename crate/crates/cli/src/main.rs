use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gift_cli::config::{
    ChartsConfig, CommandConfig, Format, OutputConfig, ProblemConfig, ScenarioConfig, TracerConfig,
};
use gift_cli::runner::{list_examples, render_examples, Runner};
use gift_cli::{run_file, CliError};

#[derive(Parser)]
#[command(name = "gift", version, about = "Global implicit function continuation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the scenario's `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the summary as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// List the built-in examples.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Lift a path for a built-in example and write the trace.
    Trace {
        #[arg(long)]
        example: String,
        /// e.g. `segment:0;2` or `circle:0,0;1.5;1;1,0`
        #[arg(long)]
        path: String,
        #[arg(long, default_value = "gift-out/trace")]
        out: PathBuf,
        /// Example parameter, `key=value`; repeatable.
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
    },
    /// Run certificate checks along a path for a built-in example.
    Certify {
        #[arg(long)]
        example: String,
        #[arg(long)]
        path: String,
        /// `PHI/PSI`, e.g. `identity/recommended`.
        #[arg(long, default_value = "recommended")]
        charts: String,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
        #[arg(long, default_value = "gift-out/certify")]
        out: PathBuf,
    },
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v = v.trim().parse().map_err(|_| format!("bad number in {s:?}"))?;
    Ok((k.trim().to_string(), v))
}

fn adhoc(
    name: &str,
    example: String,
    params: Vec<(String, f64)>,
    charts: Option<ChartsConfig>,
    weight: Option<String>,
    command: CommandConfig,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        description: None,
        seed: 0,
        problem: ProblemConfig {
            example: Some(example),
            params: params.into_iter().collect::<BTreeMap<_, _>>(),
            ..Default::default()
        },
        charts,
        weight,
        tracer: TracerConfig::default(),
        output: OutputConfig {
            dir: None,
            formats: vec![Format::Csv, Format::Json],
        },
        commands: vec![command],
    }
}

fn path_config(spec: String) -> gift_cli::config::PathConfig {
    gift_cli::config::PathConfig::Spec { spec }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { config, out, json } => {
            let s = run_file(&config, out.as_deref())?;
            if json {
                print!("{}", s.to_json());
            } else {
                print!("{}", s.render());
            }
            Ok(s.exit_code())
        }
        Command::List { json } => {
            let rows = list_examples();
            if json {
                println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
            } else {
                print!("{}", render_examples(&rows));
            }
            Ok(0)
        }
        Command::Trace {
            example,
            path,
            out,
            params,
        } => {
            let cmd = CommandConfig::Trace {
                id: Some("trace".into()),
                path: path_config(path),
                y_start: None,
                certificate: false,
                extend: false,
                expect: None,
            };
            let s = Runner::new(adhoc("trace", example, params, None, None, cmd), &out)?.run()?;
            print!("{}", s.render());
            Ok(s.exit_code())
        }
        Command::Certify {
            example,
            path,
            charts,
            weight,
            params,
            out,
        } => {
            let (phi, psi) = charts.split_once('/').unwrap_or((&charts, &charts));
            let charts = ChartsConfig {
                phi: phi.to_string(),
                psi: psi.to_string(),
            };
            let cmd = CommandConfig::Certify {
                id: Some("certify".into()),
                path: Some(path_config(path)),
                checks: vec!["growth".into(), "left-invertibility".into(), "weight".into()],
                charts: None,
                alt_charts: None,
                weight: None,
                sigma_floor: None,
                bound: None,
                d: None,
                refine: false,
                grid_max: None,
                expect: None,
            };
            let s = Runner::new(adhoc("certify", example, params, Some(charts), weight, cmd), &out)?.run()?;
            print!("{}", s.render());
            Ok(s.exit_code())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
