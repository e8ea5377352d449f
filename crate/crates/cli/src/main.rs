use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use subexp_cli::{run, CliError, Command, RunOptions};

/// Tail expansions of weighted sums of subexponential variables.
#[derive(Debug, Parser)]
#[command(name = "subexp", version)]
struct Args {
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, required_unless_present = "report")]
    config: Option<PathBuf>,
    /// Previous report.json to re-ingest instead of a config.
    #[arg(long, conflicts_with = "config")]
    report: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "SUBEXP_OUT_DIR")]
    out: PathBuf,
    /// Override the oracle seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the expansion order.
    #[arg(long)]
    order: Option<usize>,
    /// Worker threads for sampling and evaluation.
    #[arg(long, env = "SUBEXP_THREADS")]
    threads: Option<usize>,
}

fn fail(err: &CliError, out: &std::path::Path) -> ExitCode {
    let body = serde_json::to_string_pretty(&err.report()).unwrap_or_else(|_| err.to_string());
    eprintln!("{body}");
    // best effort: the error is already on stderr
    let _ = subexp_cli::output::write_atomic(out, "error.json", format!("{body}\n").as_bytes());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let opts = RunOptions {
        config: args.config,
        report: args.report,
        out: args.out,
        seed: args.seed,
        order: args.order,
    };
    match run(args.command, &opts) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e, &opts.out),
    }
}
