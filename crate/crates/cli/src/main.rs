use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use pellipt_core::experiments::{run, write_summary, Summary};
use pellipt_core::{Command, Error, Result, RunConfig};

/// Numerical lab for p-ellipticity, chord-arc domains and elliptic solvability.
#[derive(Parser)]
#[command(name = "pellipt", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// λ_p, μ(A) and the p-ellipticity interval of a coefficient matrix.
    Ellipticity(Flags),
    /// Chord-arc and Ahlfors regularity certificate of a discretized domain.
    Certify(Flags),
    /// Dirichlet solve with coercivity check.
    Solve(Flags),
    /// Nontangential maximal function of a solution.
    Ntmax(Flags),
    /// Reverse Hölder campaign.
    Rh(Flags),
    /// Localization campaign.
    Localize(Flags),
    /// Solvability scan over boundary exponents.
    Extrapolate(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON config file; command line flags override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Overrides as `--key value` or `--key=value`, e.g. `--h 1/64 --p 4`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

impl Sub {
    fn split(self) -> (Command, Flags) {
        match self {
            Sub::Ellipticity(f) => (Command::Ellipticity, f),
            Sub::Certify(f) => (Command::Certify, f),
            Sub::Solve(f) => (Command::Solve, f),
            Sub::Ntmax(f) => (Command::Ntmax, f),
            Sub::Rh(f) => (Command::Rh, f),
            Sub::Localize(f) => (Command::Localize, f),
            Sub::Extrapolate(f) => (Command::Extrapolate, f),
        }
    }
}

fn pairs(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            return Err(Error::Config(format!("unexpected argument `{arg}`")));
        };
        match flag.split_once('=') {
            Some((k, v)) => out.push((k.to_string(), v.to_string())),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| Error::Config(format!("flag `--{flag}` needs a value")))?;
                out.push((flag.to_string(), v.clone()));
            }
        }
    }
    Ok(out)
}

fn load(command: Command, flags: &Flags) -> Result<RunConfig> {
    let base = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            Some(serde_json::from_str::<Value>(&text)?)
        }
        None => None,
    };
    RunConfig::with_overrides(command, base, &pairs(&flags.overrides)?)
}

fn output_dir(command: Command, config: Option<&RunConfig>) -> PathBuf {
    match std::env::var_os("PELLIPT_OUT") {
        Some(root) => Path::new(&root).join(command.name()),
        None => PathBuf::from(
            config
                .and_then(|c| c.out.clone())
                .unwrap_or_else(|| format!("out/{}", command.name())),
        ),
    }
}

fn fail(command: Command, error: Error) -> ExitCode {
    eprintln!("error: {error}");
    let mut summary = Summary::new(command.name(), Value::Object(Default::default()));
    summary.errors.push(error.to_string());
    if let Err(e) = write_summary(&summary, &output_dir(command, None)) {
        eprintln!("error: {e}");
    }
    ExitCode::from(error.exit_code() as u8)
}

fn main() -> ExitCode {
    let (command, flags) = Cli::parse().command.split();
    let config = match load(command, &flags) {
        Ok(c) => c,
        Err(e) => return fail(command, e),
    };
    if config.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let dir = output_dir(command, config.resolve().ok().as_ref());
    let out = run(&config, &dir);
    for line in &out.lines {
        println!("{line}");
    }
    for file in &out.files {
        println!("wrote {}", file.display());
    }
    if let Some(e) = &out.error {
        eprintln!("error: {e}");
    }
    ExitCode::from(out.exit_code() as u8)
}
