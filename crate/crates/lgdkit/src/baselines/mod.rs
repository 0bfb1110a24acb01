//! The four benchmark model families plus the information-weighted model,
//! behind one fit/predict contract. Every family's predictions are clipped
//! to [0,1] and deterministic given (dataset, spec, seed).

pub mod forest;

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, FeatureVector};
use crate::infomodel::{fit_info_model, InfoModel, InfoModelConfig};
pub use forest::{fit_forest, ForestModel, ForestParams, SplitRule, Tree};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot fit on an empty dataset")]
    EmptyTrainingSet,
    #[error(transparent)]
    Info(#[from] crate::infomodel::InfoModelError),
}

/// Model family selector with family-specific hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    IndustryAverage,
    SizeHeuristic,
    Linear,
    Forest(ForestParams),
    Info(InfoModelConfig),
}

impl ModelSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::IndustryAverage => "industry_average",
            ModelSpec::SizeHeuristic => "size_heuristic",
            ModelSpec::Linear => "linear",
            ModelSpec::Forest(_) => "forest",
            ModelSpec::Info(_) => "info",
        }
    }

    /// Reseed the stochastic families; deterministic families are unchanged.
    pub fn with_seed(&self, seed: u64) -> ModelSpec {
        match self {
            ModelSpec::Forest(p) => ModelSpec::Forest(ForestParams { seed, ..p.clone() }),
            ModelSpec::Info(c) => ModelSpec::Info(InfoModelConfig { seed, ..c.clone() }),
            other => other.clone(),
        }
    }
}

/// Provenance of a fit: which fold produced it, on how many rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub fold: Option<usize>,
    pub n: usize,
    pub feature_names: Vec<String>,
}

impl TrainingSummary {
    pub fn new(n: usize) -> Self {
        TrainingSummary {
            fold: None,
            n,
            feature_names: crate::dataset::feature_names(),
        }
    }
}

/// Per-industry mean LGD with the global training mean as the fallback for
/// categories unseen at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryAverageModel {
    pub means: BTreeMap<String, f64>,
    pub global_mean: f64,
    pub summary: TrainingSummary,
}

/// Size heuristic `LGD = alpha * assets^(-beta)` fit by OLS on logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePowerLaw {
    pub alpha: f64,
    pub beta: f64,
    pub summary: TrainingSummary,
}

/// OLS over log-assets, the leverage ratio, the Chapter 11 indicator, and
/// filing-district dummies against a reference category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub regressor_names: Vec<String>,
    /// Sorted district vocabulary; the first entry is the reference level.
    pub districts: Vec<String>,
    pub ridge_fallback: bool,
    pub summary: TrainingSummary,
}

/// A fitted model of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FittedModel {
    IndustryAverage(IndustryAverageModel),
    SizeHeuristic(SizePowerLaw),
    Linear(LinearModel),
    Forest(ForestModel),
    Info(InfoModel),
}

impl FittedModel {
    pub fn family_name(&self) -> &'static str {
        match self {
            FittedModel::IndustryAverage(_) => "industry_average",
            FittedModel::SizeHeuristic(_) => "size_heuristic",
            FittedModel::Linear(_) => "linear",
            FittedModel::Forest(_) => "forest",
            FittedModel::Info(_) => "info",
        }
    }

    /// Predict one row; total over any feature vector drawn from the
    /// training schema, always in [0,1].
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        match self {
            FittedModel::IndustryAverage(m) => m.predict(x),
            FittedModel::SizeHeuristic(m) => m.predict(x),
            FittedModel::Linear(m) => m.predict(x),
            FittedModel::Forest(m) => m.predict(x),
            FittedModel::Info(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, data: &Dataset) -> Vec<f64> {
        data.features.iter().map(|x| self.predict(x)).collect()
    }
}

/// Fit the family named by `spec`.
pub fn fit(spec: &ModelSpec, train: &Dataset) -> Result<FittedModel, ModelError> {
    if train.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    Ok(match spec {
        ModelSpec::IndustryAverage => FittedModel::IndustryAverage(fit_industry_average(train)),
        ModelSpec::SizeHeuristic => FittedModel::SizeHeuristic(fit_size_power_law(train)),
        ModelSpec::Linear => FittedModel::Linear(fit_linear(train)),
        ModelSpec::Forest(params) => FittedModel::Forest(fit_forest(train, params)),
        ModelSpec::Info(config) => FittedModel::Info(fit_info_model(train, config)?),
    })
}

/// Mean LGD per industry category, with the global mean kept as fallback.
pub fn fit_industry_average(train: &Dataset) -> IndustryAverageModel {
    let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (f, &y) in train.features.iter().zip(&train.labels) {
        let e = sums.entry(f.industry.clone()).or_insert((0.0, 0));
        e.0 += y;
        e.1 += 1;
    }
    let means = sums
        .into_iter()
        .map(|(k, (s, c))| (k, s / c as f64))
        .collect();
    IndustryAverageModel {
        means,
        global_mean: mean(&train.labels),
        summary: TrainingSummary::new(train.len()),
    }
}

impl IndustryAverageModel {
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        self.means
            .get(&x.industry)
            .copied()
            .unwrap_or(self.global_mean)
            .clamp(0.0, 1.0)
    }
}

/// Labels are floored at this value before the log transform of the
/// power-law fit; the functional form comes specified, the fitting does not.
pub const POWER_LAW_LABEL_FLOOR: f64 = 1e-3;

/// Fit `LGD = alpha * assets^(-beta)` by OLS of log-label on log-assets.
/// Constant assets degenerate to `beta = 0`, `alpha = mean(LGD)`.
pub fn fit_size_power_law(train: &Dataset) -> SizePowerLaw {
    let log_assets: Vec<f64> = train.features.iter().map(|f| f.log_assets).collect();
    let log_labels: Vec<f64> = train
        .labels
        .iter()
        .map(|&y| y.clamp(POWER_LAW_LABEL_FLOOR, 1.0).ln())
        .collect();
    let mx = mean(&log_assets);
    let my = mean(&log_labels);
    let sxx: f64 = log_assets.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let summary = TrainingSummary::new(train.len());
    if sxx < 1e-12 {
        return SizePowerLaw {
            alpha: mean(&train.labels),
            beta: 0.0,
            summary,
        };
    }
    let sxy: f64 = log_assets
        .iter()
        .zip(&log_labels)
        .map(|(&x, &y)| (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    // Near-constant assets can make the intercept overflow exp(); predictions
    // clip to [0,1] regardless, so capping keeps alpha finite without
    // changing any prediction.
    let intercept = (my - slope * mx).clamp(-700.0, 700.0);
    SizePowerLaw {
        alpha: intercept.exp(),
        beta: -slope,
        summary,
    }
}

impl SizePowerLaw {
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        // Evaluated in log space: alpha * assets^(-beta) overflows long
        // before the clipped result does.
        (self.alpha.ln() - self.beta * x.log_assets)
            .exp()
            .clamp(0.0, 1.0)
    }
}

/// Ridge strength of the automatic fallback when the linear design is rank
/// deficient.
pub const LINEAR_RIDGE_FALLBACK: f64 = 1e-6;

fn linear_row(x: &FeatureVector, districts: &[String]) -> Vec<f64> {
    let mut row = vec![
        1.0,
        x.log_assets,
        x.debt_to_assets,
        if x.chapter11 { 1.0 } else { 0.0 },
    ];
    // Dummies against the first (reference) district; unseen districts fall
    // back to the reference level.
    for d in &districts[1..] {
        row.push(if &x.filing_district == d { 1.0 } else { 0.0 });
    }
    row
}

/// OLS over the four named regressor groups, with an automatic ridge
/// fallback when the normal equations are singular.
pub fn fit_linear(train: &Dataset) -> LinearModel {
    let mut districts: Vec<String> = train
        .features
        .iter()
        .map(|f| f.filing_district.clone())
        .collect();
    districts.sort();
    districts.dedup();

    let rows: Vec<Vec<f64>> = train
        .features
        .iter()
        .map(|x| linear_row(x, &districts))
        .collect();
    let p = rows[0].len();
    let design = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    let y = DVector::from_vec(train.labels.clone());

    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &y;
    let (solution, ridge_fallback) = match solve_spd(&xtx, &xty) {
        Some(beta) => (beta, false),
        None => {
            log::warn!(
                "linear design is rank deficient; falling back to ridge with lambda = {LINEAR_RIDGE_FALLBACK}"
            );
            let mut penalized = xtx.clone();
            for j in 0..p {
                penalized[(j, j)] += LINEAR_RIDGE_FALLBACK;
            }
            let beta = solve_spd(&penalized, &xty)
                .expect("ridge-regularized normal equations must be positive definite");
            (beta, true)
        }
    };

    let mut regressor_names = vec![
        "intercept".to_string(),
        "log_assets".to_string(),
        "debt_to_assets".to_string(),
        "chapter11".to_string(),
    ];
    for d in &districts[1..] {
        regressor_names.push(format!("district[{d}]"));
    }

    LinearModel {
        coefficients: solution.iter().copied().collect(),
        regressor_names,
        districts,
        ridge_fallback,
        summary: TrainingSummary::new(train.len()),
    }
}

impl LinearModel {
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let row = linear_row(x, &self.districts);
        let raw: f64 = row
            .iter()
            .zip(&self.coefficients)
            .map(|(a, b)| a * b)
            .sum();
        raw.clamp(0.0, 1.0)
    }
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Solve a symmetric positive-definite system via Cholesky; `None` when the
/// matrix is not positive definite (rank deficiency).
pub(crate) fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    Cholesky::new(a.clone()).map(|c| c.solve(b))
}
