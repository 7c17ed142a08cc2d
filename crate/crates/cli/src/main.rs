mod args;
mod commands;

use std::path::Path;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use serde::de::DeserializeOwned;

use args::{Cli, Command, Overlay};
use commands::{CmdResult, Destination, Failure};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let name = match &cli.command {
        Command::Gen(_) => "gen",
        Command::Relevance(_) => "relevance",
        Command::Bench(_) => "bench",
        Command::Replay(_) => "replay",
    };
    let mut table = None;
    let mut jobs = cli.jobs;
    if let Some(path) = &cli.config {
        let mut t = read_config(path)?;
        if let Some(v) = t.remove("jobs") {
            let n = v
                .as_integer()
                .and_then(|n| usize::try_from(n).ok())
                .ok_or_else(|| Failure::input(format!("{}: jobs must be a positive integer", path.display())))?;
            jobs = jobs.or(Some(n));
        }
        check_keys(path, name, &t)?;
        table = Some(t);
    }
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Failure::input("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::internal)?;
    }

    let dest = Destination::default();
    match cli.command {
        Command::Gen(a) => {
            let a = a.overlay(from_table(cli.config.as_deref(), table)?);
            commands::run_gen(&commands::resolve_gen(a)?, &dest)
        }
        Command::Relevance(a) => {
            let a = a.overlay(from_table(cli.config.as_deref(), table)?);
            commands::run_relevance(&commands::resolve_relevance(a)?, &dest)
        }
        Command::Bench(a) => {
            let a = a.overlay(from_table(cli.config.as_deref(), table)?);
            commands::run_bench(&commands::resolve_bench(a)?, &dest)
        }
        Command::Replay(a) => {
            let manifest = commands::load_manifest(&a.manifest)?;
            if let Some(dir) = &a.out_dir {
                std::fs::create_dir_all(dir)
                    .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
            }
            commands::replay(&manifest, &Destination { out_dir: a.out_dir })
        }
    }
}

fn read_config(path: &Path) -> CmdResult<toml::Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    text.parse()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Config keys must be long flags of the subcommand being run.
fn check_keys(path: &Path, command: &str, table: &toml::Table) -> CmdResult {
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(command)
        .expect("subcommand is defined");
    let known: Vec<&str> = sub
        .get_arguments()
        .filter_map(|a| a.get_long())
        .filter(|l| !matches!(*l, "config" | "jobs" | "help"))
        .collect();
    if command == "replay" && !table.is_empty() {
        return Err(Failure::input("replay takes no config keys"));
    }
    match table.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Failure::input(format!(
            "{}: unknown key {k:?} for {command} (expected one of: {})",
            path.display(),
            known.join(", ")
        ))),
        None => Ok(()),
    }
}

fn from_table<T: DeserializeOwned + Default>(path: Option<&Path>, table: Option<toml::Table>) -> CmdResult<T> {
    match table {
        None => Ok(T::default()),
        Some(t) => t.try_into().map_err(|e: toml::de::Error| {
            Failure::input(format!("{}: {e}", path.map_or_else(String::new, |p| p.display().to_string())))
        }),
    }
}
