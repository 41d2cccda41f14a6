use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mini_gp_bench::{plot, run_experiment, ExperimentConfig, Overrides, RunOptions, SummaryDoc, SweepMode};

#[derive(Parser)]
#[command(name = "minigp", version, about = "Run GP optimization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the first value of every hyperparameter list.
    Run(RunArgs),
    /// Sweep the full hyperparameter grid and report the best combinations.
    Grid(RunArgs),
    /// Draw SVG panels from one or more summary files.
    Plot {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value = "summary")]
        prefix: String,
    },
    /// Print the built-in configuration.
    DefaultConfig,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; the built-in synthetic protocol when omitted.
    config: Option<PathBuf>,
    #[arg(long)]
    seed_count: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Fixed regularization λ instead of the noise oracle.
    #[arg(long)]
    lambda: Option<f64>,
    /// Noise level as a fraction of the objective range.
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    quiet: bool,
}

fn run(args: RunArgs, mode: SweepMode) -> mini_gp_bench::Result<()> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default_protocol(),
    };
    cfg.apply(&Overrides {
        seed_count: args.seed_count,
        workers: args.workers,
        out_dir: args.out_dir,
        lambda: args.lambda,
        xi: args.xi,
    })?;
    let out = run_experiment(
        &cfg,
        RunOptions {
            mode,
            progress: !args.quiet,
        },
    )?;
    print!("{}", mini_gp_bench::experiment::report_markdown(&out.report));
    println!("\nwrote {} runs under {}", out.manifest.runs.len(), out.root.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a, SweepMode::First),
        Command::Grid(a) => run(a, SweepMode::Full),
        Command::Plot {
            summaries,
            out_dir,
            prefix,
        } => (|| {
            let docs = summaries.iter().map(|p| SummaryDoc::read(p)).collect::<mini_gp_bench::Result<Vec<_>>>()?;
            let dir = out_dir.unwrap_or_else(|| summaries[0].parent().map(PathBuf::from).unwrap_or_default());
            mini_gp_bench::output::ensure_dir(&dir)?;
            let refs: Vec<&SummaryDoc> = docs.iter().collect();
            for p in plot::write_panels(&refs, &dir, &prefix)? {
                println!("{}", p.display());
            }
            Ok(())
        })(),
        Command::DefaultConfig => {
            print!("{}", mini_gp_bench::DEFAULT_CONFIG);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
