//! Command-line experiment runner.

pub mod config;
pub mod experiments;
pub mod table;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{resolve, ConfigError, RawConfig, Settings, KEYS};
use experiments::{check_resources, run, Experiment, RunError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "ssh-revival", version, about = "Entanglement revival experiments on lossy half-SSH chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an experiment and write its result table
    Run(ConfigArgs),
    /// Check a configuration and print it fully resolved
    Validate(ConfigArgs),
    /// List the available experiments
    ListExperiments,
}

#[derive(Args, Debug, Default)]
pub struct ConfigArgs {
    /// Experiment name (same as --set experiment=NAME)
    pub experiment: Option<String>,
    /// Flat key = value configuration file
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one key, may be repeated
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output file (default stdout)
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Output format
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Worker threads
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

impl ConfigArgs {
    pub fn settings(&self) -> Result<Settings, ConfigError> {
        let mut raw = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    ConfigError::Invalid(vec![format!("cannot read {}: {e}", path.display())])
                })?;
                RawConfig::parse(&text)?
            }
            None => RawConfig::default(),
        };
        if let Some(e) = &self.experiment {
            raw.set("experiment", e);
        }
        for o in &self.overrides {
            raw.apply(o)?;
        }
        if let Some(p) = &self.output {
            raw.set("output.path", &p.to_string_lossy());
        }
        if let Some(f) = &self.format {
            raw.set("output.format", f);
        }
        resolve(&raw)
    }
}

fn write_output(s: &Settings, table: &table::ResultTable, out: &mut dyn Write) -> io::Result<()> {
    match &s.output {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            table.write(&mut file, s.format)?;
            file.flush()?;
            if s.sidecar {
                let mut name = path.clone().into_os_string();
                name.push(".meta.json");
                let meta = serde_json::to_string_pretty(&table.metadata_json())?;
                fs::write(PathBuf::from(name), meta + "\n")?;
            }
            Ok(())
        }
        None => table.write(out, s.format),
    }
}

fn set_threads(n: Option<usize>, err: &mut dyn Write) -> bool {
    if let Some(n) = n {
        if n == 0 {
            let _ = writeln!(err, "error: --threads must be at least 1");
            return false;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    true
}

/// Runs the command line, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn main_with(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::ListExperiments => {
            for e in Experiment::ALL {
                let _ = writeln!(out, "{:<20}{}", e.name(), e.description());
            }
            EXIT_OK
        }
        Command::Validate(args) => {
            let settings = match args.settings() {
                Ok(s) => s,
                Err(e) => return config_failure(e, err),
            };
            for (k, v) in &settings.echo {
                let _ = writeln!(out, "{k} = {v}");
            }
            match check_resources(&settings) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_RESOURCE
                }
            }
        }
        Command::Run(args) => {
            if !set_threads(args.threads, err) {
                return EXIT_CONFIG;
            }
            let settings = match args.settings() {
                Ok(s) => s,
                Err(e) => return config_failure(e, err),
            };
            let start = Instant::now();
            let output = match run(&settings) {
                Ok(o) => o,
                Err(e @ RunError::Resource(_)) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_RESOURCE;
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_FAILURE;
                }
            };
            let mut table = output.table;
            if settings.timing {
                table.meta("wall_time_s", table::real(start.elapsed().as_secs_f64()));
            }
            if let Err(e) = write_output(&settings, &table, out) {
                let _ = writeln!(err, "error: cannot write output: {e}");
                return EXIT_FAILURE;
            }
            match output.mismatch {
                Some(m) => {
                    let _ = writeln!(err, "oracle mismatch: {m}");
                    EXIT_ORACLE
                }
                None => EXIT_OK,
            }
        }
    }
}

fn config_failure(e: ConfigError, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "configuration error:");
    for line in e.to_string().lines() {
        let _ = writeln!(err, "  {line}");
    }
    if matches!(e, ConfigError::Invalid(_)) {
        let _ = writeln!(err, "known keys: {}", KEYS.iter().map(|k| k.0).collect::<Vec<_>>().join(", "));
    }
    EXIT_CONFIG
}

