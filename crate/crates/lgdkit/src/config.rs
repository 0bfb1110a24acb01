//! Declarative run configuration: one TOML file as the canonical source of
//! truth, with command-line flags winning over file values. All randomness
//! flows from the single master seed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{ForestParams, ModelSpec};
use crate::dataset::FilterConfig;
use crate::entropy::BinRule;
use crate::infomodel::InfoModelConfig;
use crate::synthgen::MixtureConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unknown model family `{0}` (expected industry, size, linear, forest, or info)")]
    UnknownModel(String),
    #[error("cv_k must be at least 2, got {0}")]
    BadFolds(usize),
}

/// Resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Master seed; every stochastic component derives from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub cv_k: usize,
    /// Model families for `compare`, in report order.
    pub models: Vec<String>,
    /// Input dataset CSV; when absent, commands fall back to the mixture
    /// generator.
    pub input: Option<PathBuf>,
    /// Sample-selection threshold applied to loaded CSVs.
    pub min_assets: f64,
    pub bin_rule: BinRule,
    pub mixture: MixtureConfig,
    pub forest: ForestParams,
    pub info: InfoModelConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            output_dir: PathBuf::from("out"),
            cv_k: 10,
            models: vec![
                "industry".to_string(),
                "size".to_string(),
                "linear".to_string(),
                "forest".to_string(),
                "info".to_string(),
            ],
            input: None,
            min_assets: FilterConfig::default().min_assets,
            bin_rule: BinRule::default(),
            mixture: MixtureConfig::default(),
            forest: ForestParams::default(),
            info: InfoModelConfig::default(),
        }
    }
}

/// Command-line overrides; `None` leaves the file value in place.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub cv_k: Option<usize>,
    pub models: Vec<String>,
    pub input: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    /// Apply flag overrides (flags win) and propagate the master seed into
    /// the nested configs.
    pub fn resolve(mut self, overrides: Overrides) -> Result<RunConfig, ConfigError> {
        if let Some(seed) = overrides.seed {
            self.seed = seed;
        }
        if let Some(dir) = overrides.output_dir {
            self.output_dir = dir;
        }
        if let Some(k) = overrides.cv_k {
            self.cv_k = k;
        }
        if !overrides.models.is_empty() {
            self.models = overrides.models;
        }
        if let Some(input) = overrides.input {
            self.input = Some(input);
        }
        if self.cv_k < 2 {
            return Err(ConfigError::BadFolds(self.cv_k));
        }
        for name in &self.models {
            parse_family(name)?;
        }
        self.mixture.seed = self.seed;
        self.info.bin_rule = self.bin_rule;
        Ok(self)
    }

    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            min_assets: self.min_assets,
        }
    }

    /// Model specs in report order.
    pub fn model_specs(&self) -> Result<Vec<ModelSpec>, ConfigError> {
        self.models.iter().map(|name| self.spec_for(name)).collect()
    }

    pub fn spec_for(&self, name: &str) -> Result<ModelSpec, ConfigError> {
        Ok(match parse_family(name)? {
            Family::Industry => ModelSpec::IndustryAverage,
            Family::Size => ModelSpec::SizeHeuristic,
            Family::Linear => ModelSpec::Linear,
            Family::Forest => ModelSpec::Forest(self.forest.clone()),
            Family::Info => ModelSpec::Info(self.info.clone()),
        })
    }

    pub fn digest(&self) -> String {
        crate::digest::sha256_json(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }
}

enum Family {
    Industry,
    Size,
    Linear,
    Forest,
    Info,
}

fn parse_family(name: &str) -> Result<Family, ConfigError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "industry" | "industry_average" => Ok(Family::Industry),
        "size" | "size_heuristic" => Ok(Family::Size),
        "linear" => Ok(Family::Linear),
        "forest" => Ok(Family::Forest),
        "info" | "infomodel" | "info_model" => Ok(Family::Info),
        other => Err(ConfigError::UnknownModel(other.to_string())),
    }
}
