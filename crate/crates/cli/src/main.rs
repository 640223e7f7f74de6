use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{CutoffKind, Preset, RunConfig, Sweep};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{name}: {0}", name = .0.name())]
    Solver(#[from] wwlab::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) => 3,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "wwlab", version, about = "Spontaneous-emission decay with a regularized field cutoff")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the amplitude equation and fit the decay.
    Simulate(Common),
    /// Tabulate the memory kernel.
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        tau_max: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Evolve a discretized bath and write the emitted spectrum.
    Modes {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Dipole self-energy and matrix-element report.
    Appendix(Common),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, value_enum)]
    cutoff: Option<CutoffKind>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long = "D")]
    d: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// key=v1,v2,... over eps, omega-max, nu, D, dt or t-end.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn build(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::from_preset(self.preset.unwrap_or(Preset::HydrogenScaled)),
        };
        if let Some(nu) = self.nu {
            cfg.params.nu = nu;
        }
        if let Some(d) = self.d {
            cfg.params.d = d;
        }
        cfg.apply_cutoff(self.cutoff, self.eps, self.omega_max)?;
        if self.dt.is_some() {
            cfg.solver.dt = self.dt;
        }
        if self.t_end.is_some() {
            cfg.solver.t_end = self.t_end;
        }
        if let Some(s) = &self.sweep {
            cfg.sweep = Some(s.parse::<Sweep>()?);
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        std::fs::create_dir_all(&cfg.output.dir).map_err(|e| {
            CliError::Config(format!("cannot create {}: {e}", cfg.output.dir.display()))
        })?;
        Ok(cfg)
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("WW_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("WW_THREADS must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(PathBuf, Vec<String>), CliError> {
    let pool = thread_pool()?;
    pool.install(|| match &cli.command {
        Command::Simulate(c) => {
            let cfg = c.build()?;
            Ok((cfg.output.dir.clone(), commands::simulate(&cfg)?))
        }
        Command::Kernel { common, tau_max, points } => {
            let cfg = common.build()?;
            Ok((cfg.output.dir.clone(), commands::kernel_table(&cfg, *tau_max, *points)?))
        }
        Command::Modes { common, n } => {
            let mut cfg = common.build()?;
            if let Some(n) = n {
                cfg.solver.modes = *n;
            }
            Ok((cfg.output.dir.clone(), commands::modes(&cfg)?))
        }
        Command::Appendix(c) => {
            let cfg = c.build()?;
            Ok((cfg.output.dir.clone(), commands::appendix(&cfg)?))
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((dir, files)) => {
            for f in files {
                println!("{}", dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
