mod commands;
mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwalk_core::emulate::{DEFAULT_COUNTS_PER_STEP, DEFAULT_MC_REPS, DEFAULT_VISIBILITY};
use qwalk_core::spectral::DEFAULT_SITES;
use qwalk_core::{EmulateError, SpectralError, WalkError};

use output::Format;

/// Coined quantum walk on a line with a single phase defect.
#[derive(Debug, Parser)]
#[command(name = "qwalk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve one walk and write P_t(x) for every step.
    Walk {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Final variance and recurrence across a grid of φ or θ.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// `start:stop:step` (inclusive) or a comma-separated list, in degrees.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Eigenstates of the step operator on a periodic lattice.
    Spectrum {
        #[command(flatten)]
        walk: WalkArgs,
        /// Number of lattice sites (odd).
        #[arg(long = "L", default_value_t = DEFAULT_SITES)]
        lattice: usize,
        /// Sites on each side of the defect counted as "near".
        #[arg(long, default_value_t = 10)]
        radius: usize,
        /// Minimum mass within the radius for an eigenvector to count as localized.
        #[arg(long, default_value_t = 0.99)]
        mass_threshold: f64,
        /// Also sweep the overlap over this φ grid.
        #[arg(long, conflicts_with = "sweep_theta")]
        sweep_phi: Option<String>,
        /// Also sweep the overlap over this θ grid.
        #[arg(long)]
        sweep_theta: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Photon-count emulation with Monte-Carlo error bars.
    Emulate {
        #[command(flatten)]
        walk: WalkArgs,
        /// Detected photons per step.
        #[arg(long, default_value_t = DEFAULT_COUNTS_PER_STEP)]
        counts: u64,
        #[arg(long, default_value_t = DEFAULT_MC_REPS)]
        mc_reps: usize,
        /// Interferometric visibility in [0, 1].
        #[arg(long, default_value_t = DEFAULT_VISIBILITY)]
        visibility: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    Phi,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitCoin {
    Antisym,
    Minus,
    H,
    V,
}

#[derive(Debug, Args)]
struct WalkArgs {
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Coin angle in degrees, 0 to 45.
    #[arg(long, default_value_t = 22.5, allow_hyphen_values = true)]
    theta: f64,
    /// Defect phase in degrees. Without it the walk has no defect.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "no_defect")]
    phi: Option<f64>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    defect_site: i64,
    #[arg(long)]
    no_defect: bool,
    #[arg(long, value_enum, default_value_t = InitCoin::Antisym)]
    init: InitCoin,
    /// Coin amplitudes as `re_h,im_h,re_v,im_v`; normalized before use.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "init")]
    init_amps: Option<String>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    initial_site: i64,
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Bad input that is not a core validation error.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() || cause.is::<WalkError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<SpectralError>() {
            return match e {
                SpectralError::NotUnitary(_) | SpectralError::NonConvergence { .. } => 3,
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<EmulateError>() {
            return match e {
                EmulateError::TraceDrift { .. } => 3,
                _ => 2,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Walk { walk, out } => commands::walk(&walk, &out),
        Command::Sweep {
            param,
            values,
            walk,
            out,
        } => commands::sweep(param, &values, &walk, &out),
        Command::Spectrum {
            walk,
            lattice,
            radius,
            mass_threshold,
            sweep_phi,
            sweep_theta,
            out,
        } => commands::spectrum(
            &walk,
            &commands::SpectrumArgs {
                lattice,
                radius,
                mass_threshold,
                sweep_phi,
                sweep_theta,
            },
            &out,
        ),
        Command::Emulate {
            walk,
            counts,
            mc_reps,
            visibility,
            out,
        } => commands::emulate(&walk, counts, mc_reps, visibility, &out),
    };
    match result {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
