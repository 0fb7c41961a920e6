use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use diagq::predict::{IrtConfig, MfConfig};
use diagq::synth::SynthConfig;
use serde::{Deserialize, Serialize};

/// Values read from `--config`. Every key is optional; flags take precedence.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub outdir: Option<PathBuf>,
    pub fractions: Option<Vec<f64>>,
    pub mode: Option<String>,
    pub model: Option<String>,
    pub policy: Option<String>,
    pub budget: Option<usize>,
    pub irt: Option<IrtConfig>,
    pub mf: Option<MfConfig>,
    pub synth: Option<SynthConfig>,
    pub rank: Option<RankConfig>,
    pub episode: Option<EpisodeConfig>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankConfig {
    pub method: Option<String>,
    pub condition: Option<String>,
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub target_fraction: Option<f64>,
    pub prior_precision: Option<f64>,
    pub newton_steps: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// First present value, or the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Parses `a,b,c` into three split fractions.
pub fn parse_fractions(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad fraction `{p}`")))
        .collect()
}
