use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twtc_core::gaussian::{ChannelParams, Preset};
use twtc_core::keyrate::Chain;
use twtc_core::sim::ExperimentSpec;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Cj,
    Kx,
    Kg,
    All,
}

impl Mode {
    pub fn includes(self, other: Mode) -> bool {
        self == Mode::All || self == other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub rho1n: f64,
    pub rho2n: f64,
}

/// JSON run configuration. Every field is optional; command-line flags
/// take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub channel: Option<ChannelParams>,
    pub grid: Option<usize>,
    pub mode: Option<Mode>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub t_points: Option<usize>,
    pub ledger_steps: Option<usize>,
    pub split: Option<SplitConfig>,
    pub chain: Option<Chain>,
    pub rp_max: Option<f64>,
    pub rp_points: Option<usize>,
    /// Channel document of the simulator, relative to the config file.
    pub dmc: Option<PathBuf>,
    pub experiment: Option<ExperimentSpec>,
}

impl RunConfig {
    /// Reads a config file; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        if let Some(d) = &cfg.dmc {
            if d.is_relative() {
                cfg.dmc = Some(base.join(d));
            }
        }
        if cfg.preset.is_some() && cfg.channel.is_some() {
            return Err(CliError::Usage(format!("{}: give either preset or channel, not both", path.display())));
        }
        Ok(cfg)
    }

    pub fn channel(&self, flag: Option<Preset>) -> Result<ChannelParams, CliError> {
        let params = match (flag, self.channel, self.preset) {
            (Some(p), _, _) | (None, None, Some(p)) => ChannelParams::preset(p),
            (None, Some(c), _) => c,
            (None, None, None) => {
                return Err(CliError::Usage("no channel given: use --preset or a config with \"channel\"".into()))
            }
        };
        params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(params)
    }
}
