//! Declarative run configuration, read from TOML.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cupgame::{GameVariant, Rational, RecordLevel};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const SEED_ENV: &str = "CUPGAME_SEED";
pub const WORKERS_ENV: &str = "CUPGAME_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub name: String,
    #[serde(default = "empty_params")]
    pub params: Value,
}

fn empty_params() -> Value {
    Value::Object(Default::default())
}

impl StrategySpec {
    pub fn new(name: &str, params: Value) -> Self {
        StrategySpec { name: name.into(), params }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub trace_json: Option<PathBuf>,
    pub backlog_csv: Option<PathBuf>,
    pub sweep_csv: Option<PathBuf>,
}

/// Value ranges for `sweep`; each list overrides the matching base setting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n: Option<Vec<usize>>,
    /// Overrides the filler's `k` parameter.
    pub k: Option<Vec<usize>>,
    pub rounds: Option<Vec<usize>>,
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_variant")]
    pub variant: String,
    /// Augmentation amount as `"num/den"`.
    pub epsilon: Option<String>,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Round cap.
    pub rounds: usize,
    /// Stop as soon as the backlog reaches this value.
    pub target_backlog: Option<String>,
    /// Stop once the filler reports it is done.
    #[serde(default)]
    pub stop_when_done: bool,
    #[serde(default)]
    pub record_level: RecordLevel,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// 0 means one worker per core.
    #[serde(default)]
    pub workers: usize,
    pub filler: StrategySpec,
    #[serde(default = "default_emptier")]
    pub emptier: StrategySpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
}

fn default_variant() -> String {
    "negative-fill".into()
}

fn default_emptier() -> StrategySpec {
    StrategySpec::new("greedy", empty_params())
}

fn one() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("parsing config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text)
    }

    /// Applies `CUPGAME_SEED` and `CUPGAME_WORKERS` if set.
    pub fn with_env_overrides(mut self) -> Result<Self> {
        if let Ok(s) = std::env::var(SEED_ENV) {
            self.seed = s.parse().with_context(|| format!("{SEED_ENV}={s}"))?;
        }
        if let Ok(s) = std::env::var(WORKERS_ENV) {
            self.workers = s.parse().with_context(|| format!("{WORKERS_ENV}={s}"))?;
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("n must be at least 1");
        }
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        self.game_variant()?;
        self.target()?;
        Ok(())
    }

    pub fn game_variant(&self) -> Result<GameVariant> {
        let v = match self.variant.as_str() {
            "standard" => GameVariant::standard(),
            "negative-fill" => GameVariant::negative_fill(),
            "augmented" => {
                let e = self.epsilon.as_deref().context("augmented variant needs epsilon")?;
                GameVariant::augmented(parse_rational(e)?)?
            }
            other => bail!("unknown variant '{other}'"),
        };
        if v.kind != cupgame::VariantKind::Augmented && self.epsilon.is_some() {
            bail!("epsilon only applies to the augmented variant");
        }
        Ok(v)
    }

    pub fn target(&self) -> Result<Option<Rational>> {
        self.target_backlog.as_deref().map(parse_rational).transpose()
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    s.trim().parse::<Rational>().map_err(|e| anyhow::anyhow!("bad rational '{s}': {e}"))
}

/// Version plus the commit recorded at build time, when available.
pub fn build_id() -> String {
    match option_env!("CUPGAME_GIT_REV") {
        Some(rev) if !rev.is_empty() => format!("{}+{rev}", env!("CARGO_PKG_VERSION")),
        _ => env!("CARGO_PKG_VERSION").into(),
    }
}
