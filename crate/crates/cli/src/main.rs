use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use txbeam_cli::commands::{cmd_bench, cmd_design, cmd_eval, cmd_oracle, EvalInputs};
use txbeam_cli::config::{Mode, ScenarioConfig};
use txbeam_cli::error::CliError;

/// Joint transmit-covariance and antenna-placement designer.
#[derive(Parser)]
#[command(name = "txbeam", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Restricted,
    Generalized,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Restricted => Mode::Restricted,
            ModeArg::Generalized => Mode::Generalized,
        }
    }
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario config file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override the config's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's selection mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

impl CommonArgs {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let mut config = ScenarioConfig::load(&self.config)?;
        if let Some(dir) = &self.output_dir {
            config.output_dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            config.rng_seed = seed;
        }
        if let Some(mode) = self.mode {
            config.mode = mode.into();
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the joint design and write its artifacts.
    Design {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-evaluate a stored design without optimizing.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory holding cmd `design` artifacts to read.
        #[arg(long)]
        design_dir: Option<PathBuf>,
        /// Explicit selection.json path.
        #[arg(long)]
        selection: Option<PathBuf>,
        /// Explicit covariance_real.csv path.
        #[arg(long)]
        covariance_real: Option<PathBuf>,
        /// Explicit covariance_imag.csv path.
        #[arg(long)]
        covariance_imag: Option<PathBuf>,
        /// Pattern scaling factor; defaults to the one in
        /// design-dir/result.json.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Compare greedy placement against exhaustive enumeration.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Scale the base instance and record cost growth.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated scale factors.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        betas: Vec<usize>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Design { common } => {
            let config = common.load()?;
            let result = cmd_design(&config)?;
            println!(
                "design: objective {:.6e}, {} antennas, {} outer cycles, {:.2}s",
                result.final_objective(),
                result.selection.weight(),
                result.outer_iterations,
                result.wall_seconds
            );
            for warning in &result.warnings {
                eprintln!("warning: {warning}");
            }
            println!("artifacts in {}", config.output_dir.display());
        }
        Command::Eval {
            common,
            design_dir,
            selection,
            covariance_real,
            covariance_imag,
            alpha,
        } => {
            let config = common.load()?;
            let inputs = EvalInputs {
                design_dir,
                selection,
                covariance_real,
                covariance_imag,
                alpha,
            };
            let artifact = cmd_eval(&config, &inputs)?;
            println!(
                "eval: objective {:.6e} (penalized {:.6e}), alpha {:.6}, {} antennas",
                artifact.objective_j,
                artifact.objective_j2,
                artifact.alpha,
                artifact.selection_weight
            );
            if let Some(max) = artifact.max_normalized_cross_correlation {
                println!("max normalized cross-correlation: {max:.4}");
            }
            println!("artifacts in {}", config.output_dir.display());
        }
        Command::Oracle { common } => {
            let config = common.load()?;
            let artifact = cmd_oracle(&config)?;
            println!(
                "oracle: exhaustive {:.6e} over {} candidates, greedy {:.6e}{}",
                artifact.best_value,
                artifact.evaluated_count,
                artifact.greedy_value,
                artifact
                    .ratio
                    .map(|r| format!(", ratio {r:.4}"))
                    .unwrap_or_default()
            );
            println!("artifacts in {}", config.output_dir.display());
        }
        Command::Bench { common, betas } => {
            let config = common.load()?;
            let artifact = cmd_bench(&config, &betas)?;
            for row in &artifact.rows {
                println!(
                    "beta {}: M={} N={} evaluations={} outer={} {:.2}s",
                    row.beta,
                    row.m,
                    row.n,
                    row.inner_evaluations,
                    row.outer_iterations,
                    row.wall_seconds
                );
            }
            println!(
                "evaluation-count exponent in M: {:.3}",
                artifact.fit_exponent
            );
            println!("artifacts in {}", config.output_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
