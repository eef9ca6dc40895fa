//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ExperimentConfig;
use crate::error::{HarvestError, Result};
use crate::experiments::{cmd_exact, cmd_fit, cmd_report_circuit, cmd_scan, cmd_simulate, Command, Summary};

#[derive(Debug, Parser)]
#[command(name = "noiseharvest", version, about = "Pseudomode impurity-model experiments on noisy emulated hardware")]
pub struct Cli {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Fit pseudomodes (or discretize a closed bath) and write spectra.
    Fit,
    /// Exact reference Green's functions.
    Exact,
    /// Noisy circuit emulation with Hadamard-test readout.
    Simulate {
        /// Write the prepared encoded-frame state to this binary file.
        #[arg(long)]
        state_dump: Option<PathBuf>,
    },
    /// Gate counts and a text dump of the schedule.
    ReportCircuit,
    /// Repeat a command over values of one config key.
    Scan {
        /// Config key to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(value_enum)]
        target: ScanTarget,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanTarget {
    Fit,
    Exact,
    Simulate,
    ReportCircuit,
}

impl From<ScanTarget> for Command {
    fn from(t: ScanTarget) -> Self {
        match t {
            ScanTarget::Fit => Command::Fit,
            ScanTarget::Exact => Command::Exact,
            ScanTarget::Simulate => Command::Simulate,
            ScanTarget::ReportCircuit => Command::ReportCircuit,
        }
    }
}

macro_rules! overrides {
    ($($field:ident => $key:literal),* $(,)?) => {
        /// Per-field config overrides, named exactly like the config keys.
        #[derive(Debug, Default, Args)]
        pub struct Overrides {
            $(
                #[arg(long = $key, global = true, value_name = "VALUE")]
                pub $field: Option<String>,
            )*
        }

        impl Overrides {
            pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
                $(
                    if let Some(v) = &self.$field {
                        cfg.set($key, v)?;
                    }
                )*
                Ok(())
            }
        }
    };
}

overrides! {
    epsilon => "epsilon",
    gamma => "gamma",
    d => "D",
    beta => "beta",
    n_b => "N_b",
    n_anc => "N_anc",
    mode => "mode",
    tau => "tau",
    t_prep => "t_prep",
    t_max => "t_max",
    n_time_points => "n_time_points",
    t1 => "T1",
    t_1q => "T_1q",
    t_2q => "T_2q",
    engine => "engine",
    shots => "shots",
    seed => "seed",
    output => "output",
}

/// Effective config: defaults, then the config file, then flags.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(cli: &Cli) -> Result<Summary> {
    let cfg = resolve_config(cli)?;
    crate::io::write_atomic(&cfg.run.output.join("config.json"), cfg.to_json().as_bytes())?;
    match &cli.command {
        Cmd::Fit => cmd_fit(&cfg),
        Cmd::Exact => cmd_exact(&cfg),
        Cmd::Simulate { state_dump } => cmd_simulate(&cfg, state_dump.as_deref()),
        Cmd::ReportCircuit => cmd_report_circuit(&cfg),
        Cmd::Scan { param, values, target } => cmd_scan(&cfg, param, values, (*target).into()),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(s) => {
            for (k, v) in &s.fields {
                println!("{k} = {v}");
            }
            for f in &s.files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

impl From<clap::Error> for HarvestError {
    fn from(e: clap::Error) -> Self {
        HarvestError::Config(e.to_string())
    }
}
