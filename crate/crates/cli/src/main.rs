//! `gslab`: build six-photon states, evaluate witnesses and emit plot data.
//!
//! Every run prints one JSON document to stdout. With `--out DIR` the same
//! summary, the CSV plot data and a `manifest.json` are written to `DIR`.
//! Failures print `{"schema":1,"error":{…}}` to stderr and exit nonzero.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::{Output, StateSource, WitnessArgs};
use gslab::optics::Preset;
use gslab::witness::WitnessKind;
use serde_json::json;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Optics(#[from] gslab::optics::OpticsError),

    #[error(transparent)]
    Witness(#[from] gslab::witness::WitnessError),

    #[error(transparent)]
    Counting(#[from] gslab::counting::CountingError),

    #[error(transparent)]
    Graph(#[from] gslab::graphs::GraphError),

    #[error(transparent)]
    Algebra(#[from] gslab::qalgebra::AlgebraError),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Optics(_) => "optics",
            CliError::Witness(_) => "witness",
            CliError::Counting(_) => "counting",
            CliError::Graph(_) => "graph",
            CliError::Algebra(_) => "algebra",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "gslab", version, about = "Six-photon graph-state simulator and witness toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SetupArgs {
    /// Setup preset, used for everything the config file leaves out.
    #[arg(long, default_value = "ghz6")]
    preset: Preset,
    /// JSON setup file (preset, sources, waveplates, fusions, noise).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Noise as JSON (keys v_hv, v_pm, overlap, lambda) or `ideal`.
    #[arg(long)]
    noise: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Directory for JSON/CSV outputs and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the optical setup and report fidelities and success probability.
    Build {
        #[command(flatten)]
        setup: SetupArgs,
        /// Also write the post-selected density matrix.
        #[arg(long)]
        density: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Measure a witness on the setup output (or a white-noise family state).
    Witness {
        #[command(flatten)]
        setup: SetupArgs,
        /// `ghz` or `cluster`.
        #[arg(long, default_value = "ghz")]
        plan: WitnessKind,
        /// Evaluate on `p·target + (1 − p)·I/64` instead of the setup.
        #[arg(long, value_name = "P")]
        white_noise: Option<f64>,
        #[arg(long, default_value_t = gslab::counting::DEFAULT_EVENTS)]
        events: u64,
        #[arg(long, env = "GSLAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Use exact outcome distributions instead of sampling.
        #[arg(long)]
        analytic: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Witness value along the white-noise family and the threshold p*.
    Scan {
        #[arg(long, default_value = "cluster")]
        plan: WitnessKind,
        /// Comma-separated p values; defaults to 0, 0.05, …, 1.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fourfold fringe ⟨M_φ^⊗4⟩ of a single fusion.
    Fringe {
        #[command(flatten)]
        setup: SetupArgs,
        /// Fusion overlap; defaults to the first overlap of the noise model.
        #[arg(long)]
        overlap: Option<f64>,
        #[arg(long, default_value_t = commands::DEFAULT_FRINGE_POINTS)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Named graphs.
    Graphs {
        #[command(subcommand)]
        action: GraphsAction,
    },
}

#[derive(Subcommand, Debug)]
enum GraphsAction {
    /// All named graphs with their edges.
    List {
        #[command(flatten)]
        out: OutArgs,
    },
    /// One graph as `{"schema":1,"n":…,"edges":[…]}`.
    Export {
        name: String,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn resolve(s: &SetupArgs) -> Result<config::Resolved, CliError> {
    config::resolve(s.preset, s.config.as_deref(), s.noise.as_deref())
}

fn run(cmd: Command) -> Result<(Output, Option<PathBuf>, serde_json::Value), CliError> {
    Ok(match cmd {
        Command::Build { setup, density, out } => {
            let r = resolve(&setup)?;
            let params = json!({"config": setup.config, "density": density});
            (commands::build(&r, density)?, out.out, json!({"subcommand": "build", "parameters": params, "seed": null}))
        }
        Command::Witness { setup, plan, white_noise, events, seed, analytic, out } => {
            if events == 0 {
                return Err(CliError::Usage("--events must be at least 1".into()));
            }
            let r = resolve(&setup)?;
            let source = white_noise.map_or(StateSource::Setup, StateSource::WhiteNoise);
            let args = WitnessArgs { kind: plan, source, events, seed, analytic };
            let params = json!({
                "config": setup.config, "plan": plan, "white_noise": white_noise,
                "events": events, "analytic": analytic,
            });
            (commands::witness(&r, &args)?, out.out, json!({"subcommand": "witness", "parameters": params, "seed": seed}))
        }
        Command::Scan { plan, grid, out } => {
            let grid = grid.unwrap_or_else(|| (0..=20).map(|i| i as f64 / 20.0).collect());
            let params = json!({"plan": plan, "grid": grid});
            (commands::scan(plan, &grid)?, out.out, json!({"subcommand": "scan", "parameters": params, "seed": null}))
        }
        Command::Fringe { setup, overlap, points, out } => {
            let r = resolve(&setup)?;
            let v = overlap.unwrap_or_else(|| r.noise.overlap(0));
            let params = json!({"config": setup.config, "overlap": v, "points": points});
            (commands::fringe(&r.noise, v, points)?, out.out, json!({"subcommand": "fringe", "parameters": params, "seed": null}))
        }
        Command::Graphs { action } => match action {
            GraphsAction::List { out } => {
                (commands::graphs_list(), out.out, json!({"subcommand": "graphs list", "parameters": {}, "seed": null}))
            }
            GraphsAction::Export { name, out } => {
                let params = json!({"name": name});
                (commands::graphs_export(&name)?, out.out, json!({"subcommand": "graphs export", "parameters": params, "seed": null}))
            }
        },
    })
}

fn write_outputs(dir: &Path, output: &Output, mut manifest: serde_json::Value) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut names: Vec<&str> = output.files.iter().map(|(n, _)| n.as_str()).collect();
    names.push("manifest.json");
    manifest["schema"] = json!(1);
    manifest["output_dir"] = json!(dir);
    manifest["files"] = json!(names);
    for (name, contents) in &output.files {
        std::fs::write(dir.join(name), contents).map_err(io)?;
    }
    let mut text = serde_json::to_string_pretty(&manifest).expect("plain data");
    text.push('\n');
    std::fs::write(dir.join("manifest.json"), text).map_err(io)
}

fn error_json(kind: &str, message: &str) -> String {
    json!({"schema": 1, "error": {"kind": kind, "message": message}}).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                e.exit();
            }
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    let result = run(cli.command).and_then(|(output, dir, manifest)| {
        if let Some(dir) = dir {
            write_outputs(&dir, &output, manifest)?;
        }
        Ok(output)
    });
    match result {
        Ok(output) => {
            // a closed pipe on stdout is not an error of the run
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&output.summary).expect("plain data"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
