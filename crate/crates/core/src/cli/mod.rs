//! Command-line surface: configuration resolution and the subcommands.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use commands::execute;
pub use config::{
    EvolutionConfig, GeometryConfig, HadronizationConfig, OutputConfig, PhysicsConfig, RunConfig,
    SweepConfig,
};

use crate::error::{Error, ErrorKind, Result};
use crate::hadronize::RrPolicy;

/// Fallback output directory when neither the flag nor the config sets one.
pub const OUT_DIR_ENV: &str = "RYDBERG_LADDER_OUT_DIR";

#[derive(Parser, Debug, Clone)]
#[command(
    name = "rydberg-ladder",
    version,
    about = "Rydberg ladder string dynamics and hadronization"
)]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (default: available cores)
    #[arg(long, global = true, env = "RYDBERG_LADDER_THREADS")]
    pub threads: Option<usize>,

    /// Output directory [fallback: $RYDBERG_LADDER_OUT_DIR, then .]
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Zero,
    Discard,
}

impl From<PolicyArg> for RrPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Zero => RrPolicy::Zero,
            PolicyArg::Discard => RrPolicy::Discard,
        }
    }
}

/// Flags that take precedence over the config file.
#[derive(clap::Args, Debug, Clone, Default)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub n_rungs: Option<usize>,
    /// Rung spacing a (μm); replaces any R_b/a from the file
    #[arg(long, global = true)]
    pub spacing: Option<f64>,
    /// R_b/a; replaces any spacing from the file
    #[arg(long, global = true)]
    pub rb_over_a: Option<f64>,
    /// ρ = h/a
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Ω (rad/μs)
    #[arg(long, global = true)]
    pub rabi: Option<f64>,
    /// Δ (rad/μs); replaces any Δ/Ω from the file
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub detuning: Option<f64>,
    /// Δ/Ω; replaces any Δ from the file
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta_over_omega: Option<f64>,
    /// C6 (rad·μm⁶/μs)
    #[arg(long, global = true)]
    pub c6: Option<f64>,
    /// Evolution / entropy window (μs)
    #[arg(long, global = true)]
    pub window: Option<f64>,
    /// Sample times per window
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Measurement time for hadronization (μs)
    #[arg(long, global = true)]
    pub t_f: Option<f64>,
    /// Krylov per-step error tolerance
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub krylov_dim: Option<usize>,
    #[arg(long, global = true)]
    pub shots: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub rr_policy: Option<PolicyArg>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        let g = &mut cfg.geometry;
        if let Some(n) = self.n_rungs {
            g.n_rungs = n;
        }
        match (self.spacing, self.rb_over_a) {
            (None, None) => {}
            (a, r) => {
                g.spacing = a;
                g.rb_over_a = r;
            }
        }
        if let Some(v) = self.rho {
            g.rho = v;
        }
        let p = &mut cfg.physics;
        if let Some(v) = self.rabi {
            p.rabi = v;
        }
        match (self.detuning, self.delta_over_omega) {
            (None, None) => {}
            (d, r) => {
                p.detuning = d;
                p.delta_over_omega = r;
            }
        }
        if let Some(v) = self.c6 {
            p.c6 = v;
        }
        let e = &mut cfg.evolution;
        if let Some(v) = self.window {
            e.window = v;
        }
        if let Some(v) = self.samples {
            e.n_samples = v;
        }
        if self.t_f.is_some() {
            e.t_f = self.t_f;
        }
        if let Some(v) = self.tolerance {
            e.tolerance = v;
        }
        if let Some(v) = self.krylov_dim {
            e.krylov_dim = v;
        }
        let h = &mut cfg.hadronization;
        if let Some(v) = self.shots {
            h.n_shots = v;
        }
        if let Some(v) = self.seed {
            h.seed = v;
        }
        if let Some(v) = self.rr_policy {
            h.rr_policy = v.into();
        }
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Print atom positions and the pair-interaction table
    Geometry,
    /// Field and charge evolution after a central-excitation quench
    Evolve,
    /// Maximum half-chain entropy over a (Δ/Ω, R_b/a) grid
    EntropySweep {
        /// Δ/Ω axis, comma separated and increasing
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// R_b/a axis, comma separated and increasing
        #[arg(long, value_delimiter = ',')]
        rbs: Option<Vec<f64>>,
    },
    /// Hadronize parton events, or scan Δ/Ω directly without events
    Hadronize {
        /// JSON-lines parton events
        #[arg(long)]
        events: Option<PathBuf>,
        /// Reference multiplicity CSV to compare against
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Δ/Ω values for a direct scan
        #[arg(long, value_delimiter = ',')]
        delta_grid: Option<Vec<f64>>,
        /// Pair energy for the direct scan (GeV)
        #[arg(long)]
        e_cm: Option<f64>,
    },
    /// Print the resolved configuration as TOML
    ShowConfig,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::Evolve => "evolve",
            Command::EntropySweep { .. } => "entropy-sweep",
            Command::Hadronize { .. } => "hadronize",
            Command::ShowConfig => "show-config",
        }
    }
}

/// File config, then flags, then command-specific flags; validated.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    match &cli.command {
        Command::EntropySweep { deltas, rbs } => {
            if let Some(d) = deltas {
                cfg.sweep.delta_over_omega = d.clone();
            }
            if let Some(r) = rbs {
                cfg.sweep.rb_over_a = r.clone();
            }
        }
        Command::Hadronize {
            delta_grid, e_cm, ..
        } => {
            if let Some(d) = delta_grid {
                cfg.hadronization.delta_grid = d.clone();
            }
            if let Some(e) = e_cm {
                cfg.hadronization.e_cm = *e;
            }
        }
        _ => {}
    }
    if let Some(dir) = &cli.out_dir {
        cfg.output.dir = Some(dir.clone());
    } else if cfg.output.dir.is_none() {
        cfg.output.dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve_config(cli)?;
    if cli.threads == Some(0) {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(cli, &cfg))
}

pub fn exit_code(err: &Error) -> i32 {
    match err.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Capacity => 3,
        ErrorKind::Accuracy => 4,
        ErrorKind::Data | ErrorKind::Io => 1,
    }
}
