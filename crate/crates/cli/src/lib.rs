//! `twtc`: rate regions, key-rate curves and code simulations of the
//! Gaussian and discrete two-way wiretap channel, written as CSV and JSON.

mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twtc_core::gaussian::{induced_dms_cov, ChannelParams, PowerSplit, Preset};
use twtc_core::keyrate::{reduce_dms, Chain, KeyRateEnvelope, T_POINTS};
use twtc_core::regions::{is_trivial, sweep_regions, SweepOptions};
use twtc_core::sim::{load_dmc_json, threshold_experiment};

pub use config::{Mode, RunConfig, SplitConfig};
pub use output::fmt_g12;

const DEFAULT_GRID: usize = 200;
const DEFAULT_RP_MAX: f64 = 10.0;
const DEFAULT_RP_POINTS: usize = 201;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn runtime(e: twtc_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

const PRESET_HELP: &str = "Channel preset: fig4 (rho1=1, rho2=100, h1=1, h2=0.1, g=1), \
fig5 (rho=1, h=1.5, g=1) or fig6 (rho=0.9, h=10, g=1). fig4 keeps h1 = 1 from the figure caption; \
the discussion of the same figure quotes h1 = 10.";

#[derive(Parser, Debug)]
#[command(name = "twtc", version, about = "Secrecy rate regions and wiretap code simulations for the two-way wiretap channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ChannelArgs {
    #[arg(long, value_enum, help = PRESET_HELP)]
    preset: Option<PresetArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig4,
    Fig5,
    Fig6,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Fig4 => Preset::Fig4,
            PresetArg::Fig5 => Preset::Fig5,
            PresetArg::Fig6 => Preset::Fig6,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ChainArg {
    A,
    B,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep power splits and write the cj, kx and kg regions as CSV.
    Regions {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Grid points per power axis (at least 2).
        #[arg(long, value_name = "N")]
        grid: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Test-channel noise values per key-rate envelope.
        #[arg(long, value_name = "N")]
        t_points: Option<usize>,
        /// Key-exchange fractions per direction in the key-generation ledgers.
        #[arg(long, value_name = "N")]
        ledger_steps: Option<usize>,
        /// Accepted for uniformity; region sweeps are deterministic.
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
    },
    /// Write the key rate versus public rate curve of one induced source.
    Keyrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        channel: ChannelArgs,
        /// Jamming power of user 1 (default: all of rho1).
        #[arg(long)]
        rho1n: Option<f64>,
        /// Jamming power of user 2 (default: all of rho2).
        #[arg(long)]
        rho2n: Option<f64>,
        #[arg(long, value_enum)]
        chain: Option<ChainArg>,
        /// Largest public rate of the output grid, bits per use.
        #[arg(long)]
        rp_max: Option<f64>,
        /// Points of the output grid.
        #[arg(long)]
        rp_points: Option<usize>,
        #[arg(long, value_name = "N")]
        t_points: Option<usize>,
    },
    /// Run the random-code threshold experiment on a discrete channel.
    Sim {
        #[command(flatten)]
        common: Common,
        /// Overrides the experiment seed.
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
    },
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    common.config.as_deref().map(RunConfig::load).transpose().map(Option::unwrap_or_default)
}

fn out_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn run_regions(
    common: &Common,
    preset: Option<Preset>,
    grid: Option<usize>,
    mode: Option<Mode>,
    t_points: Option<usize>,
    ledger_steps: Option<usize>,
) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let params = cfg.channel(preset)?;
    let grid = grid.or(cfg.grid).unwrap_or(DEFAULT_GRID);
    if grid < 2 {
        return Err(CliError::Usage(format!("grid must be at least 2, got {grid}")));
    }
    let mode = mode.or(cfg.mode).unwrap_or(Mode::All);
    let t_points = t_points.or(cfg.t_points).unwrap_or(T_POINTS);
    let ledger_steps = ledger_steps.or(cfg.ledger_steps).unwrap_or(1);
    if t_points < 2 || ledger_steps < 1 {
        return Err(CliError::Usage("t-points must be at least 2 and ledger-steps at least 1".into()));
    }
    let opts = SweepOptions { grid, compute_kg: mode.includes(Mode::Kg), t_points, ledger_steps };
    let res = sweep_regions(&params, &opts).map_err(runtime)?;
    let dir = out_dir(common, &cfg);
    for (m, name, poly) in [(Mode::Cj, "cj", &res.cj), (Mode::Kx, "kx", &res.kx), (Mode::Kg, "kg", &res.kg)] {
        if !mode.includes(m) {
            continue;
        }
        let csv = if is_trivial(poly) {
            eprintln!("note: the {name} region holds no positive rate pair; {name}.csv has the header only");
            output::polygon_csv(&twtc_core::polytope::Polygon2::empty())
        } else {
            output::polygon_csv(poly)
        };
        output::write(&dir, &format!("{name}.csv"), &csv)?;
    }
    output::write(&dir, "sweep.csv", &output::sweep_csv(&res.cells))
}

#[allow(clippy::too_many_arguments)]
fn run_keyrate(
    common: &Common,
    preset: Option<Preset>,
    rho1n: Option<f64>,
    rho2n: Option<f64>,
    chain: Option<Chain>,
    rp_max: Option<f64>,
    rp_points: Option<usize>,
    t_points: Option<usize>,
) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let params: ChannelParams = cfg.channel(preset)?;
    let rho1n = rho1n.or(cfg.split.map(|s| s.rho1n)).unwrap_or(params.rho1);
    let rho2n = rho2n.or(cfg.split.map(|s| s.rho2n)).unwrap_or(params.rho2);
    let split = PowerSplit::new(&params, rho1n, rho2n).map_err(|e| CliError::Usage(e.to_string()))?;
    let chain = chain.or(cfg.chain).unwrap_or(Chain::A);
    let rp_max = rp_max.or(cfg.rp_max).unwrap_or(DEFAULT_RP_MAX);
    let rp_points = rp_points.or(cfg.rp_points).unwrap_or(DEFAULT_RP_POINTS);
    let t_points = t_points.or(cfg.t_points).unwrap_or(T_POINTS);
    if !(rp_max.is_finite() && rp_max >= 0.0) || rp_points < 2 || t_points < 2 {
        return Err(CliError::Usage("rp-max must be >= 0, rp-points and t-points at least 2".into()));
    }
    let grid: Vec<f64> = (0..rp_points)
        .map(|i| if i + 1 == rp_points { rp_max } else { rp_max * i as f64 / (rp_points - 1) as f64 })
        .collect();
    let dms = induced_dms_cov(&params, &split).map_err(runtime)?;
    let src = reduce_dms(&dms, chain).map_err(|e| CliError::Runtime(format!("chain {chain:?}: {e}")))?;
    let env = KeyRateEnvelope::with_points(&src, t_points).map_err(runtime)?;
    let points: Vec<(f64, f64)> = grid.iter().map(|&rp| (rp, env.eval(rp))).collect();
    output::write(&out_dir(common, &cfg), "keyrate.csv", &output::keyrate_csv(&points))
}

fn run_sim(common: &Common, seed: Option<u64>) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let dmc_path = cfg.dmc.clone().ok_or_else(|| CliError::Usage("sim needs a config with \"dmc\"".into()))?;
    let mut spec = cfg.experiment.clone().ok_or_else(|| CliError::Usage("sim needs a config with \"experiment\"".into()))?;
    if let Some(s) = seed.or(cfg.seed) {
        spec.seed = s;
    }
    let (dmc, prefix) = load_dmc_json(&dmc_path).map_err(|e| CliError::Usage(e.to_string()))?;
    let table = threshold_experiment(&dmc, &prefix, &spec).map_err(runtime)?;
    for row in &table.rows {
        if let Some(why) = &row.skipped {
            eprintln!("note: n = {} skipped: {why}", row.n);
        }
    }
    let json = serde_json::to_string_pretty(&table).map_err(|e| CliError::Runtime(e.to_string()))?;
    output::write(&out_dir(common, &cfg), "sim.json", &(json + "\n"))
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on usage errors, 2 on runtime errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let res = match &cli.command {
        Command::Regions { common, channel, grid, mode, t_points, ledger_steps, seed: _ } => {
            run_regions(common, channel.preset.map(Into::into), *grid, *mode, *t_points, *ledger_steps)
        }
        Command::Keyrate { common, channel, rho1n, rho2n, chain, rp_max, rp_points, t_points } => run_keyrate(
            common,
            channel.preset.map(Into::into),
            *rho1n,
            *rho2n,
            chain.map(|c| match c {
                ChainArg::A => Chain::A,
                ChainArg::B => Chain::B,
            }),
            *rp_max,
            *rp_points,
            *t_points,
        ),
        Command::Sim { common, seed } => run_sim(common, *seed),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
