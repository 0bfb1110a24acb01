//! Configurable generator of mixture-contaminated datasets: a latent
//! measurement indicator selects between a documented-outcome component and
//! a dominant proxy component, with shared feature marginals and
//! component-specific label links.
//!
//! Generation is single-threaded per dataset (one sequential PRNG stream per
//! seed), so a given seed always produces a bitwise-identical dataset.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, FirmRecord, Provenance};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config field {field}: {message}")]
    InvalidConfig { field: &'static str, message: String },
    #[error(transparent)]
    Data(#[from] crate::dataset::DataError),
}

/// One mixture component: where its LGD mass sits, how tightly, and how the
/// label mean responds to leverage and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    /// Location of the LGD mass (beta-distribution mode).
    pub lgd_mode: f64,
    /// Beta concentration; larger is tighter. Must exceed 2 so the mode
    /// parameterization is well defined.
    pub lgd_concentration: f64,
    /// Strength of the LGD-mean dependence on debt-to-assets (centered).
    pub leverage_link: f64,
    /// Strength of the LGD-mean dependence on log-assets (centered).
    pub size_link: f64,
    /// Additive Gaussian label noise, post-draw, pre-clip.
    pub noise_sd: f64,
}

impl ComponentSpec {
    fn validate(&self, which: &'static str) -> Result<(), SynthError> {
        if !(0.0..=1.0).contains(&self.lgd_mode) {
            return Err(SynthError::InvalidConfig {
                field: which,
                message: format!("lgd_mode {} outside [0,1]", self.lgd_mode),
            });
        }
        if !(self.lgd_concentration > 2.0) {
            return Err(SynthError::InvalidConfig {
                field: which,
                message: format!("lgd_concentration {} must be > 2", self.lgd_concentration),
            });
        }
        if !(self.noise_sd >= 0.0) {
            return Err(SynthError::InvalidConfig {
                field: which,
                message: format!("noise_sd {} must be >= 0", self.noise_sd),
            });
        }
        Ok(())
    }

    /// Beta shapes from the mode/concentration parameterization.
    fn base_shapes(&self) -> (f64, f64) {
        let k = self.lgd_concentration;
        let a = self.lgd_mode * (k - 2.0) + 1.0;
        (a, k - a)
    }
}

/// Feature marginals, shared across components: log-normal balance-sheet
/// sizes, beta leverage and liquidity fractions, and uniform categoricals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureSpec {
    /// Mean of log total assets (natural log of USD).
    pub log_assets_mean: f64,
    pub log_assets_sd: f64,
    /// Resampling floor on assets so generated rosters survive the default
    /// sample-selection filters unchanged.
    pub min_assets: f64,
    /// Beta shapes for the debt-to-assets draw.
    pub leverage_alpha: f64,
    pub leverage_beta: f64,
    /// Liabilities = debt * (1 + U(0, liability_spread)); values above 1x
    /// assets yield negative equity, as real distressed filings do.
    pub liability_spread: f64,
    /// Beta shapes for current assets as a fraction of total assets.
    pub current_assets_alpha: f64,
    pub current_assets_beta: f64,
    /// Beta shapes for current liabilities as a fraction of total liabilities.
    pub current_liabilities_alpha: f64,
    pub current_liabilities_beta: f64,
    /// Beta shapes for cash as a fraction of total assets.
    pub cash_alpha: f64,
    pub cash_beta: f64,
    /// Number of industry categories (SIC-division style, labeled A, B, ...).
    pub industries: usize,
    /// Number of filing districts (labeled D01, D02, ...).
    pub districts: usize,
    /// Probability a case files under Chapter 11.
    pub chapter11_rate: f64,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec {
            log_assets_mean: (1.0e9_f64).ln(),
            log_assets_sd: 1.2,
            min_assets: 1.5e8,
            leverage_alpha: 2.2,
            leverage_beta: 2.2,
            liability_spread: 0.5,
            current_assets_alpha: 2.0,
            current_assets_beta: 3.0,
            current_liabilities_alpha: 2.0,
            current_liabilities_beta: 3.0,
            cash_alpha: 1.5,
            cash_beta: 8.0,
            industries: 12,
            districts: 94,
            chapter11_rate: 0.8,
        }
    }
}

impl FeatureSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let positive: [(&'static str, f64); 9] = [
            ("feature_spec.log_assets_sd", self.log_assets_sd),
            ("feature_spec.leverage_alpha", self.leverage_alpha),
            ("feature_spec.leverage_beta", self.leverage_beta),
            ("feature_spec.current_assets_alpha", self.current_assets_alpha),
            ("feature_spec.current_assets_beta", self.current_assets_beta),
            (
                "feature_spec.current_liabilities_alpha",
                self.current_liabilities_alpha,
            ),
            (
                "feature_spec.current_liabilities_beta",
                self.current_liabilities_beta,
            ),
            ("feature_spec.cash_alpha", self.cash_alpha),
            ("feature_spec.cash_beta", self.cash_beta),
        ];
        for (field, v) in positive {
            if !(v > 0.0) {
                return Err(SynthError::InvalidConfig {
                    field,
                    message: format!("{v} must be > 0"),
                });
            }
        }
        if self.industries == 0 || self.districts == 0 {
            return Err(SynthError::InvalidConfig {
                field: "feature_spec.industries",
                message: "category counts must be >= 1".to_string(),
            });
        }
        if !(0.0..=1.0).contains(&self.chapter11_rate) {
            return Err(SynthError::InvalidConfig {
                field: "feature_spec.chapter11_rate",
                message: format!("{} outside [0,1]", self.chapter11_rate),
            });
        }
        Ok(())
    }

    /// Mean of the leverage beta draw, used to center the leverage link.
    fn leverage_mean(&self) -> f64 {
        self.leverage_alpha / (self.leverage_alpha + self.leverage_beta)
    }
}

/// Full generator configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixtureConfig {
    pub n: usize,
    /// Mixing proportion of the proxy component.
    pub pi_proxy: f64,
    pub seed: u64,
    pub true_component: ComponentSpec,
    pub proxy_component: ComponentSpec,
    pub feature_spec: FeatureSpec,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        default_paper_config()
    }
}

impl MixtureConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n < 10 {
            return Err(SynthError::InvalidConfig {
                field: "n",
                message: format!("{} must be >= 10", self.n),
            });
        }
        if !(0.0..=1.0).contains(&self.pi_proxy) {
            return Err(SynthError::InvalidConfig {
                field: "pi_proxy",
                message: format!("{} outside [0,1]", self.pi_proxy),
            });
        }
        self.true_component.validate("true_component")?;
        self.proxy_component.validate("proxy_component")?;
        self.feature_spec.validate()
    }
}

/// Default leverage-link strength of the proxy component, frozen by the
/// `calibrate` binary. The sweep targets the highest pooled debt-to-assets
/// mutual information at n = 1218 that still leaves the benchmark-failure
/// ordering intact (tree ensembles below zero out-of-fold, the
/// entropy-weighted model above); the mixture design saturates near
/// 0.85 bits under that constraint.
pub const CALIBRATED_PROXY_LEVERAGE_LINK: f64 = -0.33;

/// Pooled debt-to-assets mutual information the frozen default achieves at
/// n = 1218 (bits), recorded by the calibration run.
pub const CALIBRATED_LEVERAGE_MI_BITS: f64 = 0.85;

/// Default configuration shaped like the published sample: n = 1218 with an
/// 89.7% proxy share, documented outcomes concentrated near total loss,
/// proxy estimates near 0.08, and a calibrated leverage link.
pub fn default_paper_config() -> MixtureConfig {
    MixtureConfig {
        n: 1218,
        pi_proxy: 0.897,
        seed: 42,
        true_component: ComponentSpec {
            lgd_mode: 0.95,
            lgd_concentration: 80.0,
            leverage_link: 2.4,
            size_link: 0.0,
            noise_sd: 0.01,
        },
        proxy_component: ComponentSpec {
            lgd_mode: 0.08,
            lgd_concentration: 250.0,
            leverage_link: CALIBRATED_PROXY_LEVERAGE_LINK,
            size_link: 0.0,
            noise_sd: 0.02,
        },
        feature_spec: FeatureSpec::default(),
    }
}

const INDUSTRY_LABELS: [&str; 26] = [
    "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M", "N", "O", "P", "Q", "R",
    "S", "T", "U", "V", "W", "X", "Y", "Z",
];

fn industry_label(idx: usize) -> String {
    if idx < INDUSTRY_LABELS.len() {
        INDUSTRY_LABELS[idx].to_string()
    } else {
        format!("I{idx:02}")
    }
}

/// Generate a mixture-contaminated dataset. Fully deterministic given the
/// config seed: a fixed per-record draw order on one ChaCha stream.
pub fn generate(config: &MixtureConfig) -> Result<Dataset, SynthError> {
    config.validate()?;
    let fs = &config.feature_spec;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let log_assets_dist = Normal::new(fs.log_assets_mean, fs.log_assets_sd).unwrap();
    let leverage_dist = Beta::new(fs.leverage_alpha, fs.leverage_beta).unwrap();
    let markup_dist = Uniform::new_inclusive(0.0, fs.liability_spread);
    let ca_dist = Beta::new(fs.current_assets_alpha, fs.current_assets_beta).unwrap();
    let cl_dist = Beta::new(fs.current_liabilities_alpha, fs.current_liabilities_beta).unwrap();
    let cash_dist = Beta::new(fs.cash_alpha, fs.cash_beta).unwrap();
    let leverage_center = fs.leverage_mean();

    let mut records = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let provenance = if rng.gen_bool(config.pi_proxy) {
            Provenance::Proxy
        } else {
            Provenance::TrueOutcome
        };

        let mut assets = log_assets_dist.sample(&mut rng).exp();
        while assets < fs.min_assets {
            assets = log_assets_dist.sample(&mut rng).exp();
        }
        let leverage = leverage_dist.sample(&mut rng);
        let debt = leverage * assets;
        let liabilities = debt * (1.0 + markup_dist.sample(&mut rng));
        let equity = assets - liabilities;
        let current_assets = ca_dist.sample(&mut rng) * assets;
        let current_liabilities = cl_dist.sample(&mut rng) * liabilities;
        let cash = cash_dist.sample(&mut rng) * assets;
        let industry = industry_label(rng.gen_range(0..fs.industries));
        let district = format!("D{:02}", rng.gen_range(0..fs.districts) + 1);
        let chapter11 = rng.gen_bool(fs.chapter11_rate);

        let component = match provenance {
            Provenance::Proxy => &config.proxy_component,
            Provenance::TrueOutcome => &config.true_component,
        };
        let (a0, b0) = component.base_shapes();
        let base_mean = a0 / (a0 + b0);
        let shift = component.leverage_link * (leverage - leverage_center)
            + component.size_link * (assets.ln() - fs.log_assets_mean);
        let mean = (base_mean + shift).clamp(0.005, 0.995);
        let k = component.lgd_concentration;
        let lgd_draw = Beta::new(mean * k, (1.0 - mean) * k).unwrap().sample(&mut rng);
        let noise: f64 = if component.noise_sd > 0.0 {
            Normal::new(0.0, component.noise_sd).unwrap().sample(&mut rng)
        } else {
            0.0
        };
        let lgd = (lgd_draw + noise).clamp(0.0, 1.0);

        let (recovered, outstanding) = match provenance {
            // Synthesize a recovery pair consistent with the drawn label so
            // the documented-case invariants and label identity both hold.
            Provenance::TrueOutcome => (Some((1.0 - lgd) * liabilities), Some(liabilities)),
            Provenance::Proxy => (None, None),
        };

        records.push(FirmRecord {
            firm_id: format!("SYN{i:05}"),
            total_assets: assets,
            total_liabilities: liabilities,
            total_debt: debt,
            total_equity: equity,
            current_assets,
            current_liabilities,
            cash,
            industry,
            filing_district: district,
            chapter11,
            is_public: true,
            provenance,
            recovered,
            outstanding,
            lgd,
        });
    }

    Ok(Dataset::from_records(records)?)
}
