//! `tifiss`: configuration-driven runs of the adaptive solvers.

mod compare;
mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit status for unusable input (configuration, environment, CSV schema).
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "tifiss", version, about = "Adaptive finite element runs from JSON configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive algorithm described by a configuration file.
    Run {
        config: PathBuf,
        /// Directory for the artifacts.
        #[arg(long, default_value = "tifiss-out")]
        out: PathBuf,
        /// Suppress the summary line.
        #[arg(long)]
        quiet: bool,
    },
    /// Compare two history files row by row and by fitted convergence slope.
    Compare { a: PathBuf, b: PathBuf },
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TIFISS_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("TIFISS_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(path: PathBuf, out: PathBuf, quiet: bool) -> ExitCode {
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let job = match cfg.resolve() {
        Ok(j) => j,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match run::execute(job, &out, cfg.timings.unwrap_or(true)) {
        Ok(line) => {
            if !quiet {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn compare(a: PathBuf, b: PathBuf) -> ExitCode {
    let res = compare::History::read(&a).and_then(|ha| compare::History::read(&b).and_then(|hb| compare::compare(&ha, &hb)));
    let cmp = match res {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    println!("row,max_rel_diff,flagged");
    for (i, (d, flag)) in cmp.rows.iter().enumerate() {
        println!("{i},{d:.16e},{}", if *flag { "yes" } else { "no" });
    }
    if cmp.lengths.0 != cmp.lengths.1 {
        println!("# row counts differ: {} vs {}", cmp.lengths.0, cmp.lengths.1);
    }
    println!("# slope a = {:.6}, slope b = {:.6}, difference = {:.6}", cmp.slopes.0, cmp.slopes.1, (cmp.slopes.0 - cmp.slopes.1).abs());
    if cmp.slopes_agree() {
        ExitCode::SUCCESS
    } else {
        eprintln!("slopes differ by more than {}", compare::SLOPE_TOL);
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    match cli.command {
        Command::Run { config, out, quiet } => run(config, out, quiet),
        Command::Compare { a, b } => compare(a, b),
    }
}
