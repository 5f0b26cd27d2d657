mod commands;
mod failure;
mod inputs;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emomap::experiments::Direction;

use commands::{GradientCheckArgs, Task};
use failure::Failure;

/// Emotion representation mapping: experiments and lexicon construction.
#[derive(Parser)]
#[command(name = "emomap", version)]
struct Cli {
    /// Worker threads for independent experiment cells (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ManifestArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Overrides the manifest's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the manifest's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest override, e.g. `models.0.k=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ManifestArgs {
    fn load(&self) -> Result<manifest::Loaded, Failure> {
        manifest::load(&self.manifest, &self.overrides, self.seed, self.out.as_deref())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse every input and write diagnostics.json.
    Validate(ManifestArgs),
    /// Run an experiment or build lexicons.
    Run {
        #[arg(value_enum)]
        task: Task,
        #[command(flatten)]
        manifest: ManifestArgs,
    },
    /// Compare backpropagation with finite differences on random networks.
    GradientCheck {
        /// Hidden layer sizes; empty for an affine network.
        #[arg(long, value_delimiter = ',', default_value = "8,8")]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        inputs: usize,
        #[arg(long, default_value_t = 5)]
        outputs: usize,
        #[arg(long, default_value_t = 1)]
        networks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Train, inspect and apply saved models.
    #[command(subcommand)]
    Model(ModelCommand),
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Train a manifest model on a whole dataset and save it.
    Save {
        #[command(flatten)]
        manifest: ManifestArgs,
        #[arg(long)]
        dataset: String,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        #[arg(long)]
        model: String,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print a summary of a saved model.
    Load { path: PathBuf },
    /// Predict ratings for a lexicon in the model's source format.
    Predict {
        path: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        lowercase: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum DirectionArg {
    Cat2dim,
    Dim2cat,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::Cat2dim => Direction::Cat2Dim,
            DirectionArg::Dim2cat => Direction::Dim2Cat,
        }
    }
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    match cli.command {
        Command::Validate(m) => commands::validate(&m.load()?),
        Command::Run { task, manifest } => commands::run(&manifest.load()?, task).map(|_| 0),
        Command::GradientCheck {
            hidden,
            samples,
            inputs,
            outputs,
            networks,
            seed,
            tolerance,
        } => commands::gradient_check_cmd(&GradientCheckArgs {
            hidden,
            samples,
            inputs,
            outputs,
            networks,
            seed,
            tolerance,
        })
        .map(|_| 0),
        Command::Model(ModelCommand::Save {
            manifest,
            dataset,
            direction,
            model,
            output,
        }) => commands::model_save(&manifest.load()?, &dataset, direction.into(), &model, &output).map(|_| 0),
        Command::Model(ModelCommand::Load { path }) => commands::model_load(&path).map(|_| 0),
        Command::Model(ModelCommand::Predict {
            path,
            input,
            output,
            lowercase,
        }) => commands::model_predict(&path, &input, lowercase, output.as_deref()).map(|_| 0),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Failure::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
