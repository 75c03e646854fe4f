use clap::Parser;

use hoplink_cli::args::{Cli, Command, ExperimentCommand};
use hoplink_cli::commands::{
    cmd_evaluate, cmd_experiment_forgetting, cmd_generate, cmd_recall, cmd_train, Ctx,
};
use hoplink_core::{Error, Result};

/// Worker count: HOPLINK_WORKERS when set, otherwise the machine's
/// available parallelism.
fn worker_count() -> Result<usize> {
    match std::env::var("HOPLINK_WORKERS") {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| Error::spec(format!("HOPLINK_WORKERS='{raw}' is not a number")))?;
            if n == 0 {
                return Err(Error::spec("HOPLINK_WORKERS must be at least 1"));
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism()
            .map(usize::from)
            .unwrap_or(1)),
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build_global()
        .map_err(|e| Error::spec(format!("could not size the worker pool: {e}")))?;

    let ctx = Ctx {
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
    };
    match &cli.command {
        Command::Generate(args) => cmd_generate(&ctx, args),
        Command::Train(args) => cmd_train(&ctx, args),
        Command::Recall(args) => cmd_recall(&ctx, args),
        Command::Evaluate(args) => cmd_evaluate(&ctx, args),
        Command::Experiment(ExperimentCommand::Forgetting(args)) => {
            cmd_experiment_forgetting(&ctx, args)
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(if e.is_validation() { 2 } else { 1 });
    }
}
