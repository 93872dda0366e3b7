use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coco_cli::{apply_threads, commands, resolve_out_dir, resolve_threads, ExperimentConfig};
use coco_core::error::Result;

#[derive(Parser)]
#[command(
    name = "coco",
    version,
    about = "Design near-neutral inclusions: analytic series solver and PINN training"
)]
struct Cli {
    /// Output directory (overrides COCO_OUT_DIR and the config's out_dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides COCO_THREADS; 1 pins bit-reproducibility)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List library shapes and their exterior-map coefficients
    Shapes,
    /// Analytic forward solve for a given interface density
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Direct series design of an interface density
    Design {
        #[arg(long)]
        config: PathBuf,
    },
    /// Train the coco or classical PINN per the config
    Train {
        #[arg(long)]
        config: PathBuf,
    },
    /// Multi-seed consistency or stability study
    Study {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-execute a previous run from its manifest
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let configured = |path: &PathBuf| -> Result<ExperimentConfig> { ExperimentConfig::load(path) };
    let written = match &cli.command {
        Command::Shapes => {
            print!("{}", commands::shapes_listing());
            return Ok(());
        }
        Command::Rerun { manifest } => {
            let out = resolve_out_dir(cli.out.clone(), None);
            apply_threads(resolve_threads(cli.threads, None));
            commands::rerun(manifest, &out)?
        }
        Command::Solve { config }
        | Command::Design { config }
        | Command::Train { config }
        | Command::Study { config } => {
            let cfg = configured(config)?;
            let out = resolve_out_dir(cli.out.clone(), cfg.out_dir.as_deref());
            apply_threads(resolve_threads(cli.threads, cfg.threads));
            let name = match &cli.command {
                Command::Solve { .. } => "solve",
                Command::Design { .. } => "design",
                Command::Train { .. } => "train",
                _ => "study",
            };
            commands::dispatch(name, &cfg, &out)?
        }
    };
    println!("{}", written.summary);
    for f in &written.files {
        println!("  wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
