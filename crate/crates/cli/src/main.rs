//! `acgl`: run class-incremental experiments, sweeps, synthetic data generation
//! and dataset validation from the command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error, 4 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acgl::graph::{
    generate_synthetic, load_dataset, save_dataset, DatasetFormat, Split, SyntheticSpec,
};
use acgl::harness::{
    emit_sweep, run_experiment, run_sweep, sweep_axes, ExperimentConfig, CONFIG_KEYS,
};
use acgl::metrics::{emit_report, RunReport};
use acgl::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "acgl",
    version,
    about = "Analytic class-incremental learning on graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write report.json, matrix.csv and heatmap.svg.
    #[command(after_long_help = config_keys_help())]
    Run(ExperimentArgs),
    /// Repeat an experiment over values of one setting, all else (seeds included) fixed.
    #[command(after_long_help = config_keys_help())]
    Sweep {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Setting to sweep: gamma or feg_dim.
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. 1e-4,1e-2,1,100.
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        values: Vec<f64>,
    },
    /// Generate a synthetic labelled graph in the dataset directory format.
    GenSynth(SynthArgs),
    /// Load a dataset directory, check it, and print its statistics.
    ValidateDataset {
        /// Dataset directory.
        dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// TOML config file; built-in defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Global seed; overrides seed.global.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config entry, e.g. --set analytic.gamma=0.1 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory for the dataset files.
    #[arg(long)]
    out: PathBuf,
    /// Seed for features, edges and splits.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of classes.
    #[arg(long, default_value_t = 4)]
    classes: usize,
    /// Nodes per class.
    #[arg(long, default_value_t = 50)]
    nodes_per_class: usize,
    /// Feature dimension.
    #[arg(long, default_value_t = 16)]
    features: usize,
    /// Probability that an edge stays inside its class.
    #[arg(long, default_value_t = 0.9)]
    homophily: f64,
    /// Edges drawn per node.
    #[arg(long, default_value_t = 3)]
    edges_per_node: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_config_error() {
            2
        } else if e.is_io_error() {
            4
        } else {
            3
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig, Failure> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure {
            code: 4,
            message: format!("{}: {e}", path.display()),
        })?,
        None => String::new(),
    };
    let mut overrides = Vec::new();
    if let Some(seed) = args.seed {
        overrides.push(("seed.global".to_string(), seed.to_string()));
    }
    for item in &args.overrides {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| config_failure(format!("--set expects KEY=VALUE, got `{item}`")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    ExperimentConfig::from_toml_str(&text, &overrides).map_err(|e| {
        let mut f = Failure::from(e);
        // Anything wrong inside the config document is the caller's to fix.
        if f.code == 3 {
            f.code = 2;
        }
        f
    })
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn cmd_run(args: &ExperimentArgs) -> Result<(), Failure> {
    let config = load_config(args)?;
    let outcome = run_experiment(&config)?;
    let report = RunReport::new(outcome.matrix, outcome.timings, config.entries())?;
    let written = emit_report(&report, &args.out)?;
    print_written(&written);
    let af = report
        .af
        .map_or_else(|| "n/a".to_string(), |v| format!("{:.2}%", v * 100.0));
    println!(
        "sessions {}  AP {:.2}%  AF {af}  training {:.3}s  total {:.3}s",
        report.matrix.num_sessions(),
        report.ap * 100.0,
        report.timings.training(),
        report.timings.total
    );
    Ok(())
}

fn cmd_sweep(args: &ExperimentArgs, axis: &str, values: &[f64]) -> Result<(), Failure> {
    let config = load_config(args)?;
    if !sweep_axes().contains(axis) {
        return Err(config_failure(format!(
            "unknown sweep axis `{axis}` (available: {})",
            sweep_axes().names().join(", ")
        )));
    }
    let points = run_sweep(&config, axis, values)?;
    let written = emit_sweep(axis, &points, &args.out)?;
    print_written(&written);
    println!("{:>12}  {:>8}  {:>8}  {:>10}", axis, "AP", "AF", "training");
    for p in &points {
        let af = p
            .report
            .af
            .map_or_else(|| "n/a".to_string(), |v| format!("{:.2}%", v * 100.0));
        println!(
            "{:>12}  {:>7.2}%  {:>8}  {:>9.3}s",
            p.value,
            p.report.ap * 100.0,
            af,
            p.report.timings.training()
        );
    }
    Ok(())
}

fn cmd_gen_synth(args: &SynthArgs) -> Result<(), Failure> {
    let spec = SyntheticSpec {
        edges_per_node: args.edges_per_node,
        ..SyntheticSpec::new(
            args.classes,
            args.nodes_per_class,
            args.features,
            args.homophily,
            args.seed,
        )
    };
    let graph = generate_synthetic(&spec)?;
    let written = save_dataset(&graph, &args.out)?;
    print_written(&written);
    println!(
        "nodes {}  edges {}  features {}  classes {}",
        graph.num_nodes(),
        graph.num_edges(),
        graph.num_features(),
        graph.num_classes()
    );
    Ok(())
}

fn cmd_validate(dir: &Path) -> Result<(), Failure> {
    let graph = load_dataset(dir, &DatasetFormat::default())?;
    println!(
        "nodes {}  edges {}  features {}  classes {}",
        graph.num_nodes(),
        graph.num_edges(),
        graph.num_features(),
        graph.num_classes()
    );
    let counts: Vec<String> = [Split::Train, Split::Val, Split::Test]
        .iter()
        .map(|&s| format!("{s} {}", graph.nodes_in(s).len()))
        .collect();
    println!("{}", counts.join("  "));
    let missing: Vec<usize> = (0..graph.num_classes())
        .filter(|c| !graph.present_classes().contains(c))
        .collect();
    if !missing.is_empty() {
        println!("warning: classes without nodes: {missing:?}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep {
            experiment,
            axis,
            values,
        } => cmd_sweep(experiment, axis, values),
        Command::GenSynth(args) => cmd_gen_synth(args),
        Command::ValidateDataset { dir } => cmd_validate(dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn config_keys_help() -> String {
    let mut text = String::from("Config keys (TOML file or --set):\n");
    for (k, _, d) in CONFIG_KEYS {
        text.push_str(&format!("  {k:<32} {d}\n"));
    }
    text
}
