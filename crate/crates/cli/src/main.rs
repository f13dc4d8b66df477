//! `lab`: command-line front end for `littlewood_lab`.
//!
//! Exit status: 0 on success, 2 on a contract or input error, 3 on a numeric
//! failure, 64 on a usage error.

mod args;
mod manifest;
mod run;

use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use littlewood_lab::{LabError, Result};

const EXIT_CONTRACT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_CONTRACT
            })
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("LAB_THREADS") {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| LabError::Config(format!("LAB_THREADS=`{s}` is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn execute(mut cli: Cli) -> Result<()> {
    let start = Instant::now();
    let threads = thread_count(cli.global.threads)?;
    if let Some(n) = threads {
        if n == 0 {
            return Err(LabError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(e.to_string()))?;
    }
    cli.global.out = cli.global.out.map(manifest::absolute).transpose()?;
    cli.global.manifest = cli.global.manifest.map(manifest::absolute).transpose()?;

    let outcome = run::dispatch(&cli.command, cli.global.seed)?;

    let mut outputs = Vec::new();
    match &cli.global.out {
        Some(path) => {
            manifest::write(path, &outcome.data)?;
            outputs.push(path.display().to_string());
            println!("{}", outcome.summary);
        }
        None => print!("{}", outcome.data),
    }
    for (path, body) in &outcome.extra {
        let path = manifest::absolute(path.clone())?;
        manifest::write(&path, body)?;
        outputs.push(path.display().to_string());
    }
    if let Some(path) = &cli.global.manifest {
        let m = manifest::RunManifest::new(&cli, threads, start.elapsed(), outputs, &outcome)?;
        manifest::write(path, &(serde_json::to_string_pretty(&m)? + "\n"))?;
    }
    Ok(())
}
