use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use shakebake::lingware::{validate, Lingware};
use shakebake::pipeline::{corpus_stats, parse_golden, run_golden, translate_line, Options};

#[derive(Parser)]
#[command(name = "shakebake", version, about = "Caption translation with lexicalist transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate one sentence per line.
    Translate {
        #[arg(long)]
        lingware: PathBuf,
        /// Write stage traces to standard error.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 12)]
        max_bag: usize,
        #[arg(long, default_value_t = 5000)]
        timeout_ms: u64,
        /// Coverings to try per sentence.
        #[arg(long, default_value_t = 8)]
        coverings: usize,
        /// Exit with status 2 if any line fails to translate.
        #[arg(long)]
        strict: bool,
        /// Input file; standard input when absent.
        file: Option<PathBuf>,
    },
    /// Sentence-length statistics.
    Stats { file: Option<PathBuf> },
    /// Run a golden pairs file and report.
    Golden {
        #[arg(long)]
        lingware: PathBuf,
        pairs: PathBuf,
    },
    /// Validate a lingware directory.
    Check {
        #[arg(long)]
        lingware: PathBuf,
    },
}

fn read_input(file: Option<&PathBuf>) -> Result<String> {
    match file {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut text = String::new();
            for line in io::stdin().lock().lines() {
                text.push_str(&line?);
                text.push('\n');
            }
            Ok(text)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Translate { lingware, trace, max_bag, timeout_ms, coverings, strict, file } => {
            let lw = Lingware::load(&lingware)?;
            let mut opts = Options { trace, coverings, ..Options::default() };
            opts.limits.max_bag = max_bag;
            opts.limits.timeout = Duration::from_millis(timeout_ms);
            let text = read_input(file.as_ref())?;
            let lines: Vec<&str> = text.lines().collect();
            let results: Vec<_> = lines.par_iter().map(|l| translate_line(l, &lw, &opts)).collect();
            let stdout = io::stdout();
            let mut out = stdout.lock();
            let mut failed = false;
            for r in &results {
                if trace {
                    let mut err = io::stderr().lock();
                    for t in &r.trace {
                        writeln!(err, "{}", t)?;
                    }
                }
                failed |= !r.is_translated();
                writeln!(out, "{}", r.output)?;
            }
            Ok(if strict && failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Stats { file } => {
            let text = read_input(file.as_ref())?;
            let stats = corpus_stats(text.lines())?;
            println!("{}", stats);
            Ok(ExitCode::SUCCESS)
        }
        Command::Golden { lingware, pairs } => {
            let lw = Lingware::load(&lingware)?;
            let text = fs::read_to_string(&pairs).with_context(|| format!("reading {}", pairs.display()))?;
            let rows = match parse_golden(&text) {
                Ok(rows) => rows,
                Err(errors) => {
                    for e in errors {
                        eprintln!("{}: {}", pairs.display(), e);
                    }
                    return Ok(ExitCode::FAILURE);
                }
            };
            let report = run_golden(&rows, &lw, &Options::default());
            println!("{}", report);
            Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Check { lingware } => {
            let diags = validate(&lingware);
            for d in &diags {
                println!("{}", d);
            }
            if diags.is_empty() {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}
