use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use distlab_cli::kinds::KINDS;
use distlab_cli::{replay_file, run_file, RunOptions};

#[derive(Parser)]
#[command(name = "distlab", version, about = "Run distributed-algorithm scenarios and replay their traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (scenario, seed) pair in a scenario file.
    Run {
        file: PathBuf,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory for results.csv and traces.
        #[arg(long, env = "DISTLAB_OUT")]
        out: Option<PathBuf>,
    },
    /// Re-execute a trace under its scenario file and compare verdicts.
    Replay { trace: PathBuf, file: PathBuf },
    /// List the registered scenario kinds.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Run { file, jobs, out } => match run_file(&file, &RunOptions { jobs, out }) {
            Ok(report) => {
                for row in &report.rows {
                    println!("{} {} seed={} {}", row.verdict, row.kind, row.seed, row.metrics);
                }
                for t in &report.traces {
                    println!("trace {}", t.display());
                }
                let failed = report.rows.iter().filter(|r| r.verdict != "pass").count();
                println!("{} runs, {failed} not passing; results in {}", report.rows.len(), report.out_dir.display());
                ExitCode::from(report.exit_code())
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::Replay { trace, file } => match replay_file(&trace, &file) {
            Ok(r) => {
                println!("replayed {} records of {}: verdict {} reproduced", r.records, r.kind, r.verdict);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::List => {
            for k in &KINDS {
                let seeds = if k.exhaustive { "seeds|exhaustive" } else { "seeds" };
                println!("{:<16} {:<17} {}", k.name, seeds, k.summary);
                println!("{:<16} params: {}", "", k.params);
            }
            ExitCode::SUCCESS
        }
    }
}
