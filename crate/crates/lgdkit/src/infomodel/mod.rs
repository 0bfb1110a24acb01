//! The entropy-weighted additive model: B-spline smooths of the continuous
//! features pre-scaled by mutual-information weights, plus three auxiliary
//! regressors (industry label entropy, an information-weighted feature
//! score, and network centrality), fit jointly by ridge-penalized least
//! squares with the smoothing parameter chosen by inner cross-validation.
//!
//! The combined estimating equation is a reconstruction: the reference
//! formulation names the entropy, mutual-information, and network
//! coefficients without writing how they enter, so here they are fitted
//! coefficients of three appended columns in the same penalized solve.

pub mod network;
pub mod spline;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, FeatureVector, CONTINUOUS_FEATURES};
use crate::entropy::{
    histogram_entropy, miller_madow, mutual_information, information_weights, BinRule, Condition,
};

pub use network::{network_centrality, pair_counts};
pub use spline::{build_spline_basis, SplineBasis};

#[derive(Debug, Error)]
pub enum InfoModelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("ridge system remained singular after exhausting the lambda grid")]
    Singular,
    #[error(transparent)]
    Entropy(#[from] crate::entropy::EntropyError),
}

/// Fitting configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InfoModelConfig {
    /// Basis size per continuous feature.
    pub df: usize,
    /// Ridge grid searched by inner cross-validation, ascending.
    pub lambda_grid: Vec<f64>,
    pub inner_folds: usize,
    pub bin_rule: BinRule,
    /// Seed for the inner-fold shuffle.
    pub seed: u64,
}

impl Default for InfoModelConfig {
    fn default() -> Self {
        InfoModelConfig {
            df: 4,
            lambda_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0],
            inner_folds: 5,
            bin_rule: BinRule::default(),
            seed: 0,
        }
    }
}

/// A fitted smooth for one continuous feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSmooth {
    pub feature: String,
    pub basis: SplineBasis,
    pub coefficients: Vec<f64>,
}

/// Standardization statistics frozen at fit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStat {
    pub mean: f64,
    pub sd: f64,
}

/// Training group size for one (industry, district) pair; a firm's network
/// degree is its group size minus itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCount {
    pub industry: String,
    pub district: String,
    pub count: usize,
}

/// The fitted entropy-weighted additive model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoModel {
    pub intercept: f64,
    /// Information weights over the continuous features; they sum to 1.
    pub weights: Vec<f64>,
    pub smooths: Vec<FeatureSmooth>,
    /// Coefficient of the industry-entropy column (uncertainty penalty).
    pub alpha: f64,
    /// Coefficient of the information-weighted score column.
    pub beta: f64,
    /// Coefficient of the network-centrality column.
    pub gamma: f64,
    /// Per-industry entropy of training LGD, in bits.
    pub industry_entropy: BTreeMap<String, f64>,
    /// Fallback entropy for industries unseen at fit time.
    pub mean_industry_entropy: f64,
    pub ridge_lambda: f64,
    /// Per-feature mutual information with the label, bits.
    pub feature_mi_bits: Vec<f64>,
    pub feature_stats: Vec<FeatureStat>,
    /// Sorted (industry, district) group sizes from training.
    pub groups: Vec<GroupCount>,
    pub n_train: usize,
    /// Digest of the fitting configuration.
    pub config_digest: String,
}

impl InfoModel {
    /// Information-weighted sum of standardized continuous features.
    pub fn mi_score(&self, x: &FeatureVector) -> f64 {
        self.weights
            .iter()
            .zip(&self.feature_stats)
            .enumerate()
            .map(|(j, (w, stat))| w * (x.continuous(j) - stat.mean) / stat.sd)
            .sum()
    }

    /// Industry entropy term; unseen industries use the training mean.
    pub fn industry_entropy_of(&self, x: &FeatureVector) -> f64 {
        self.industry_entropy
            .get(&x.industry)
            .copied()
            .unwrap_or(self.mean_industry_entropy)
    }

    /// Normalized degree against the training graph. Training rows reproduce
    /// their fit-time centrality exactly; unseen pairs are isolated.
    pub fn centrality_of(&self, x: &FeatureVector) -> f64 {
        if self.n_train <= 1 {
            return 0.0;
        }
        let probe = (x.industry.as_str(), x.filing_district.as_str());
        let count = self
            .groups
            .binary_search_by(|g| (g.industry.as_str(), g.district.as_str()).cmp(&probe))
            .map(|i| self.groups[i].count)
            .unwrap_or(0);
        count.saturating_sub(1) as f64 / (self.n_train - 1) as f64
    }

    /// The weighted smooth of one continuous feature at x, `w_j f_j(x_j)`.
    pub fn smooth_term(&self, j: usize, x: &FeatureVector) -> f64 {
        let smooth = &self.smooths[j];
        let basis = smooth.basis.evaluate(x.continuous(j));
        self.weights[j]
            * basis
                .iter()
                .zip(&smooth.coefficients)
                .map(|(b, c)| b * c)
                .sum::<f64>()
    }

    /// Unclipped additive score.
    pub fn raw_score(&self, x: &FeatureVector) -> f64 {
        let smooths: f64 = (0..self.smooths.len()).map(|j| self.smooth_term(j, x)).sum();
        self.intercept
            + smooths
            + self.alpha * self.industry_entropy_of(x)
            + self.beta * self.mi_score(x)
            + self.gamma * self.centrality_of(x)
    }

    pub fn predict(&self, x: &FeatureVector) -> f64 {
        self.raw_score(x).clamp(0.0, 1.0)
    }

    /// The design row whose dot product with [`Self::coefficient_vector`]
    /// reproduces `raw_score`.
    pub fn design_row(&self, x: &FeatureVector) -> Vec<f64> {
        let mut row = Vec::with_capacity(self.coefficient_len());
        row.push(1.0);
        for (j, smooth) in self.smooths.iter().enumerate() {
            let basis = smooth.basis.evaluate(x.continuous(j));
            row.extend(basis.iter().map(|b| self.weights[j] * b));
        }
        row.push(self.industry_entropy_of(x));
        row.push(self.mi_score(x));
        row.push(self.centrality_of(x));
        row
    }

    pub fn coefficient_vector(&self) -> Vec<f64> {
        let mut coefficients = vec![self.intercept];
        for smooth in &self.smooths {
            coefficients.extend(&smooth.coefficients);
        }
        coefficients.extend([self.alpha, self.beta, self.gamma]);
        coefficients
    }

    fn coefficient_len(&self) -> usize {
        1 + self.smooths.iter().map(|s| s.coefficients.len()).sum::<usize>() + 3
    }

    /// Export as a JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, InfoModelError> {
        serde_json::from_str(text)
            .map_err(|e| InfoModelError::InvalidInput(format!("model JSON: {e}")))
    }
}

/// Empirical variance shares of the model's additive term groups over a
/// dataset, normalized to sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceShares {
    /// Weighted spline terms plus the information-score term.
    pub mutual_information: f64,
    /// Industry-entropy term.
    pub entropy: f64,
    /// Intercept group (constant; its share is zero except in the
    /// degenerate uniform fallback).
    pub industry_baseline: f64,
    /// Network-centrality term.
    pub network: f64,
}

impl VarianceShares {
    pub fn as_rows(&self) -> [(&'static str, f64); 4] {
        [
            ("mutual_information", self.mutual_information),
            ("entropy", self.entropy),
            ("industry_baseline", self.industry_baseline),
            ("network", self.network),
        ]
    }
}

fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64
}

/// Decompose the model's prediction variance over `data` into its additive
/// term groups. Zero total variance yields uniform shares with a warning.
pub fn variance_decomposition(model: &InfoModel, data: &Dataset) -> VarianceShares {
    let mut mi_terms = Vec::with_capacity(data.len());
    let mut entropy_terms = Vec::with_capacity(data.len());
    let mut baseline_terms = Vec::with_capacity(data.len());
    let mut network_terms = Vec::with_capacity(data.len());
    for x in &data.features {
        let smooths: f64 = (0..model.smooths.len())
            .map(|j| model.smooth_term(j, x))
            .sum();
        mi_terms.push(smooths + model.beta * model.mi_score(x));
        entropy_terms.push(model.alpha * model.industry_entropy_of(x));
        baseline_terms.push(model.intercept);
        network_terms.push(model.gamma * model.centrality_of(x));
    }
    let raw = [
        variance(&mi_terms),
        variance(&entropy_terms),
        variance(&baseline_terms),
        variance(&network_terms),
    ];
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        log::warn!("all term groups have zero variance; reporting uniform shares");
        return VarianceShares {
            mutual_information: 0.25,
            entropy: 0.25,
            industry_baseline: 0.25,
            network: 0.25,
        };
    }
    VarianceShares {
        mutual_information: raw[0] / total,
        entropy: raw[1] / total,
        industry_baseline: raw[2] / total,
        network: raw[3] / total,
    }
}

/// Ridge normal equations with the first coefficient (intercept)
/// unpenalized.
fn ridge_solve(
    xtx: &DMatrix<f64>,
    xty: &DVector<f64>,
    lambda: f64,
) -> Option<DVector<f64>> {
    let p = xtx.nrows();
    let mut penalized = xtx.clone();
    for j in 1..p {
        penalized[(j, j)] += lambda;
    }
    crate::baselines::solve_spd(&penalized, xty)
}

/// Fit the entropy-weighted additive model.
pub fn fit_info_model(train: &Dataset, config: &InfoModelConfig) -> Result<InfoModel, InfoModelError> {
    if train.is_empty() {
        return Err(InfoModelError::InvalidInput("empty training set".to_string()));
    }
    if config.lambda_grid.is_empty() {
        return Err(InfoModelError::InvalidInput("empty lambda grid".to_string()));
    }
    let n = train.len();
    let y = &train.labels;
    let bins = config.bin_rule.bins(n);

    // Per-feature mutual information and the resulting weights.
    let mut estimates = Vec::with_capacity(CONTINUOUS_FEATURES.len());
    for j in 0..CONTINUOUS_FEATURES.len() {
        let column = train.continuous_column(j);
        estimates.push(mutual_information(
            Condition::Continuous { values: &column, bins },
            y,
            bins,
        )?);
    }
    let weights = information_weights(&estimates);
    let feature_mi_bits: Vec<f64> = estimates.iter().map(|e| e.value_bits).collect();

    // Standardization statistics.
    let feature_stats: Vec<FeatureStat> = (0..CONTINUOUS_FEATURES.len())
        .map(|j| {
            let column = train.continuous_column(j);
            let mean = column.iter().sum::<f64>() / n as f64;
            let var = column.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            FeatureStat {
                mean,
                sd: if var > 0.0 { var.sqrt() } else { 1.0 },
            }
        })
        .collect();

    // Per-industry label entropy, with single-member industries falling
    // back to the global statistic.
    let global_entropy = miller_madow(&histogram_entropy(y, bins)?).value_bits;
    let mut by_industry: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (f, &label) in train.features.iter().zip(y) {
        by_industry.entry(f.industry.clone()).or_default().push(label);
    }
    let mut industry_entropy = BTreeMap::new();
    for (industry, labels) in &by_industry {
        let bits = if labels.len() < 2 {
            global_entropy
        } else {
            let k = config.bin_rule.bins(labels.len());
            miller_madow(&histogram_entropy(labels, k)?).value_bits
        };
        industry_entropy.insert(industry.clone(), bits);
    }
    let mean_industry_entropy =
        industry_entropy.values().sum::<f64>() / industry_entropy.len() as f64;

    // Network structure.
    let centrality = network_centrality(train);
    let groups: Vec<GroupCount> = pair_counts(train)
        .into_iter()
        .map(|((industry, district), count)| GroupCount { industry, district, count })
        .collect();

    // Spline bases.
    let smooths_bases: Vec<SplineBasis> = (0..CONTINUOUS_FEATURES.len())
        .map(|j| build_spline_basis(&train.continuous_column(j), config.df))
        .collect::<Result<_, _>>()?;

    // Design matrix: intercept, weighted spline blocks, then the three
    // auxiliary columns.
    let p = 1 + smooths_bases.iter().map(|b| b.df).sum::<usize>() + 3;
    let mut design = DMatrix::zeros(n, p);
    for (i, x) in train.features.iter().enumerate() {
        let mut col = 0;
        design[(i, col)] = 1.0;
        col += 1;
        for (j, basis) in smooths_bases.iter().enumerate() {
            for b in basis.evaluate(x.continuous(j)) {
                design[(i, col)] = weights[j] * b;
                col += 1;
            }
        }
        design[(i, col)] = industry_entropy[&x.industry];
        let score: f64 = weights
            .iter()
            .zip(&feature_stats)
            .enumerate()
            .map(|(j, (w, stat))| w * (x.continuous(j) - stat.mean) / stat.sd)
            .sum();
        design[(i, col + 1)] = score;
        design[(i, col + 2)] = centrality[i];
    }
    let yv = DVector::from_vec(y.clone());

    // Smoothing parameter by inner cross-validation, inside this training
    // set only.
    let lambda = choose_lambda(&design, &yv, config);

    // Final solve; climb the grid if the system is singular at the chosen
    // lambda.
    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &yv;
    let mut solution = None;
    let mut used_lambda = lambda;
    let mut candidates: Vec<f64> = config
        .lambda_grid
        .iter()
        .copied()
        .filter(|&l| l >= lambda)
        .collect();
    // Beyond the grid, escalate by decades before giving up.
    let grid_max = config
        .lambda_grid
        .iter()
        .copied()
        .fold(1e-8_f64, f64::max);
    candidates.extend((1..=6).map(|e| grid_max * 10f64.powi(e)));
    for l in candidates {
        if let Some(beta) = ridge_solve(&xtx, &xty, l) {
            solution = Some(beta);
            used_lambda = l;
            break;
        }
        log::warn!("ridge system singular at lambda = {l}; escalating");
    }
    let solution = solution.ok_or(InfoModelError::Singular)?;

    // Unpack coefficients.
    let mut col = 1;
    let mut smooths = Vec::with_capacity(smooths_bases.len());
    for (j, basis) in smooths_bases.into_iter().enumerate() {
        let coefficients: Vec<f64> = (0..basis.df).map(|k| solution[col + k]).collect();
        col += basis.df;
        smooths.push(FeatureSmooth {
            feature: CONTINUOUS_FEATURES[j].to_string(),
            basis,
            coefficients,
        });
    }

    Ok(InfoModel {
        intercept: solution[0],
        weights,
        smooths,
        alpha: solution[col],
        beta: solution[col + 1],
        gamma: solution[col + 2],
        industry_entropy,
        mean_industry_entropy,
        ridge_lambda: used_lambda,
        feature_mi_bits,
        feature_stats,
        groups,
        n_train: n,
        config_digest: crate::digest::sha256_json(config),
    })
}

/// Mean out-of-fold MSE over an inner k-fold split, per grid lambda; the
/// smallest-MSE lambda wins, first on ties.
fn choose_lambda(design: &DMatrix<f64>, y: &DVector<f64>, config: &InfoModelConfig) -> f64 {
    let n = design.nrows();
    if config.lambda_grid.len() == 1 {
        return config.lambda_grid[0];
    }
    let folds = config.inner_folds.min(n).max(2);
    if n < folds {
        return config.lambda_grid[0];
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    order.shuffle(&mut rng);
    let assignment: Vec<usize> = {
        let mut a = vec![0usize; n];
        for (pos, &row) in order.iter().enumerate() {
            a[row] = pos % folds;
        }
        a
    };

    let mut best = (config.lambda_grid[0], f64::INFINITY);
    let mut fold_systems = Vec::with_capacity(folds);
    for fold in 0..folds {
        let train_rows: Vec<usize> = (0..n).filter(|&i| assignment[i] != fold).collect();
        let test_rows: Vec<usize> = (0..n).filter(|&i| assignment[i] == fold).collect();
        if train_rows.is_empty() || test_rows.is_empty() {
            continue;
        }
        let xt = design.select_rows(train_rows.iter());
        let yt = DVector::from_iterator(train_rows.len(), train_rows.iter().map(|&i| y[i]));
        let xtx = xt.transpose() * &xt;
        let xty = xt.transpose() * &yt;
        fold_systems.push((xtx, xty, test_rows));
    }
    for &lambda in &config.lambda_grid {
        let mut total_sq = 0.0;
        let mut total_n = 0usize;
        let mut solvable = true;
        for (xtx, xty, test_rows) in &fold_systems {
            let Some(beta) = ridge_solve(xtx, xty, lambda) else {
                solvable = false;
                break;
            };
            for &i in test_rows {
                let row = design.row(i);
                let pred: f64 = row.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
                let err = y[i] - pred.clamp(0.0, 1.0);
                total_sq += err * err;
            }
            total_n += test_rows.len();
        }
        if !solvable || total_n == 0 {
            continue;
        }
        let mse = total_sq / total_n as f64;
        if mse < best.1 {
            best = (lambda, mse);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, FirmRecord, Provenance};
    use approx::assert_abs_diff_eq;

    fn base_record(id: usize) -> FirmRecord {
        FirmRecord {
            firm_id: format!("f{id}"),
            total_assets: 5e8,
            total_liabilities: 4e8,
            total_debt: 2e8,
            total_equity: 1e8,
            current_assets: 1e8,
            current_liabilities: 9e7,
            cash: 2e7,
            industry: "D".to_string(),
            filing_district: "D01".to_string(),
            chapter11: true,
            is_public: true,
            provenance: Provenance::Proxy,
            recovered: None,
            outstanding: None,
            lgd: 0.5,
        }
    }

    /// Dataset where only debt-to-assets varies; every other continuous
    /// feature is constant (and therefore carries exactly zero MI).
    fn single_feature_dataset(x: &[f64], y: &[f64]) -> Dataset {
        let records: Vec<FirmRecord> = y
            .iter()
            .enumerate()
            .map(|(i, &label)| {
                let mut r = base_record(i);
                r.lgd = label;
                r
            })
            .collect();
        let mut data = Dataset::from_records(records).unwrap();
        for (f, &v) in data.features.iter_mut().zip(x) {
            f.debt_to_assets = v;
        }
        data
    }

    fn fixed_lambda_config(lambda: f64) -> InfoModelConfig {
        InfoModelConfig {
            lambda_grid: vec![lambda],
            ..Default::default()
        }
    }

    #[test]
    fn constant_labels_collapse_to_intercept() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
        let y = vec![0.37; 30];
        let data = single_feature_dataset(&x, &y);
        let model = fit_info_model(&data, &InfoModelConfig::default()).unwrap();
        for f in &data.features {
            assert_abs_diff_eq!(model.predict(f), 0.37, epsilon = 1e-6);
        }
        // Non-intercept coefficients carry essentially no variance.
        let shares = variance_decomposition(&model, &data);
        assert_eq!(
            shares.as_rows().iter().map(|(_, s)| s).sum::<f64>(),
            1.0
        );
    }

    #[test]
    fn noiseless_smooth_target_is_interpolated_at_small_lambda() {
        let n = 120;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| 0.15 + 0.5 * v - 0.3 * v * v + 0.4 * v * v * v)
            .collect();
        let data = single_feature_dataset(&x, &y);
        let model = fit_info_model(&data, &fixed_lambda_config(1e-9)).unwrap();
        let mean_y: f64 = y.iter().sum::<f64>() / n as f64;
        let sst: f64 = y.iter().map(|&v| (v - mean_y).powi(2)).sum();
        let sse: f64 = data
            .features
            .iter()
            .zip(&y)
            .map(|(f, &v)| (model.raw_score(f) - v).powi(2))
            .sum();
        let r2 = 1.0 - sse / sst;
        assert!(r2 > 0.99, "training R^2 = {r2}");
        // The varying feature got all the weight.
        assert_abs_diff_eq!(model.weights[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coefficients_match_dense_normal_equations_oracle() {
        let x = [0.05, 0.2, 0.4, 0.55, 0.7, 0.95];
        let y = [0.1, 0.3, 0.5, 0.45, 0.6, 0.9];
        let data = single_feature_dataset(&x, &y);
        let lambda = 0.3;
        let model = fit_info_model(&data, &fixed_lambda_config(lambda)).unwrap();

        // Independent oracle: assemble the same design rows, then solve the
        // penalized normal equations by Gaussian elimination.
        let rows: Vec<Vec<f64>> = data.features.iter().map(|f| model.design_row(f)).collect();
        let p = rows[0].len();
        let mut a = vec![vec![0.0f64; p + 1]; p];
        for r in 0..p {
            for c in 0..p {
                a[r][c] = rows.iter().map(|row| row[r] * row[c]).sum();
            }
            if r > 0 {
                a[r][r] += lambda;
            }
            a[r][p] = rows.iter().zip(&y).map(|(row, &t)| row[r] * t).sum();
        }
        for col in 0..p {
            let pivot = (col..p)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot);
            let pivot_value = a[col][col];
            assert!(pivot_value.abs() > 1e-12);
            for r in 0..p {
                if r != col {
                    let factor = a[r][col] / pivot_value;
                    for c in col..=p {
                        a[r][c] -= factor * a[col][c];
                    }
                }
            }
        }
        let oracle: Vec<f64> = (0..p).map(|r| a[r][p] / a[r][r]).collect();

        for (got, want) in model.coefficient_vector().iter().zip(&oracle) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn predict_is_design_row_dot_coefficients() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.71).sin() * 0.5 + 0.5).collect();
        let y: Vec<f64> = x.iter().map(|&v| (0.2 + 0.6 * v).clamp(0.0, 1.0)).collect();
        let data = single_feature_dataset(&x, &y);
        let model = fit_info_model(&data, &InfoModelConfig::default()).unwrap();
        let coef = model.coefficient_vector();
        for f in &data.features {
            let manual: f64 = model
                .design_row(f)
                .iter()
                .zip(&coef)
                .map(|(a, b)| a * b)
                .sum();
            assert_abs_diff_eq!(model.raw_score(f), manual, epsilon = 1e-10);
            assert_eq!(model.predict(f), model.raw_score(f).clamp(0.0, 1.0));
        }
    }

    fn constant_basis(at: f64) -> SplineBasis {
        SplineBasis {
            degree: 0,
            df: 1,
            knots: vec![at, at],
            feature_range: (at, at),
        }
    }

    /// A hand-assembled model: linear smooth on feature 0, inert elsewhere.
    fn hand_model(intercept: f64, c0: f64, c1: f64, alpha: f64, beta: f64, gamma: f64) -> InfoModel {
        let mut smooths = vec![FeatureSmooth {
            feature: "debt_to_assets".to_string(),
            basis: SplineBasis {
                degree: 1,
                df: 2,
                knots: vec![0.0, 0.0, 1.0, 1.0],
                feature_range: (0.0, 1.0),
            },
            coefficients: vec![c0, c1],
        }];
        for name in &CONTINUOUS_FEATURES[1..] {
            smooths.push(FeatureSmooth {
                feature: name.to_string(),
                basis: constant_basis(0.0),
                coefficients: vec![0.0],
            });
        }
        let mut industry_entropy = BTreeMap::new();
        industry_entropy.insert("D".to_string(), 3.0);
        industry_entropy.insert("E".to_string(), 1.0);
        InfoModel {
            intercept,
            weights: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            smooths,
            alpha,
            beta,
            gamma,
            industry_entropy,
            mean_industry_entropy: 2.0,
            ridge_lambda: 0.0,
            feature_mi_bits: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            feature_stats: vec![FeatureStat { mean: 0.0, sd: 1.0 }; 6],
            groups: vec![GroupCount {
                industry: "D".to_string(),
                district: "D01".to_string(),
                count: 2,
            }],
            n_train: 2,
            config_digest: String::new(),
        }
    }

    #[test]
    fn intercept_only_model_is_constant() {
        let model = hand_model(0.4, 0.0, 0.0, 0.0, 0.0, 0.0);
        let data = single_feature_dataset(&[0.1, 0.9], &[0.2, 0.8]);
        for f in &data.features {
            assert_eq!(model.predict(f), 0.4);
        }
    }

    #[test]
    fn raw_scores_above_one_clip() {
        let model = hand_model(1.3, 0.0, 0.0, 0.0, 0.0, 0.0);
        let data = single_feature_dataset(&[0.5], &[0.5]);
        assert_eq!(model.predict(&data.features[0]), 1.0);
    }

    #[test]
    fn hand_assembled_model_matches_manual_evaluation() {
        let model = hand_model(0.1, 0.2, 0.6, -0.05, 0.15, -0.3);
        let data = single_feature_dataset(&[0.25, 0.75], &[0.5, 0.5]);
        let f = &data.features[0];
        // linear smooth: (1-x)*c0 + x*c1 at x = 0.25
        let smooth = 0.75 * 0.2 + 0.25 * 0.6;
        let entropy_term = -0.05 * 3.0; // industry D
        let score_term = 0.15 * 0.25; // z = (x - 0) / 1, weight 1
        let network_term = -0.3 * ((2.0 - 1.0) / (2.0 - 1.0));
        let expected = 0.1 + smooth + entropy_term + score_term + network_term;
        assert_abs_diff_eq!(model.raw_score(f), expected, epsilon = 1e-10);
    }

    #[test]
    fn unseen_industry_uses_mean_entropy_and_isolated_centrality() {
        let model = hand_model(0.0, 0.0, 0.0, 1.0, 0.0, 1.0);
        let data = single_feature_dataset(&[0.0], &[0.5]);
        let mut f = data.features[0].clone();
        f.industry = "Z".to_string();
        // alpha * mean_entropy + gamma * 0
        assert_abs_diff_eq!(model.raw_score(&f), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn variance_shares_for_spline_only_model() {
        let model = hand_model(0.3, -1.0, 1.0, 0.0, 0.0, 0.0);
        let data = single_feature_dataset(&[0.0, 1.0], &[0.1, 0.9]);
        let shares = variance_decomposition(&model, &data);
        assert_abs_diff_eq!(shares.mutual_information, 1.0, epsilon = 1e-12);
        assert_eq!(shares.entropy, 0.0);
    }

    #[test]
    fn variance_shares_match_three_to_one_split() {
        // Spline term variance 3, entropy term variance 1.
        let s = 3f64.sqrt();
        let mut model = hand_model(0.0, -s, s, 1.0, 0.0, 0.0);
        model.weights = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut data = single_feature_dataset(&[0.0, 1.0], &[0.1, 0.9]);
        data.features[0].industry = "D".to_string(); // entropy 3
        data.features[1].industry = "E".to_string(); // entropy 1
        let shares = variance_decomposition(&model, &data);
        assert_abs_diff_eq!(shares.mutual_information, 0.75, epsilon = 1e-9);
        assert_abs_diff_eq!(shares.entropy, 0.25, epsilon = 1e-9);
        let total: f64 = shares.as_rows().iter().map(|(_, v)| v).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_variance_terms_fall_back_to_uniform_shares() {
        let model = hand_model(0.4, 0.0, 0.0, 0.0, 0.0, 0.0);
        let data = single_feature_dataset(&[0.5, 0.5], &[0.4, 0.4]);
        let shares = variance_decomposition(&model, &data);
        assert_eq!(shares.mutual_information, 0.25);
        assert_eq!(shares.industry_baseline, 0.25);
    }

    #[test]
    fn increasing_lambda_never_improves_training_fit() {
        let data = crate::synthgen::generate(&{
            let mut cfg = crate::synthgen::default_paper_config();
            cfg.n = 250;
            cfg.seed = 5;
            cfg
        })
        .unwrap();
        let mut previous = f64::INFINITY;
        for lambda in [1e-4, 1e-2, 1.0, 100.0] {
            let model = fit_info_model(&data, &fixed_lambda_config(lambda)).unwrap();
            let sse: f64 = data
                .features
                .iter()
                .zip(&data.labels)
                .map(|(f, &y)| (model.raw_score(f) - y).powi(2))
                .sum();
            assert!(
                sse >= previous - 1e-9 || previous == f64::INFINITY,
                "training SSE decreased from {previous} to {sse} at lambda {lambda}"
            );
            if previous.is_finite() {
                assert!(sse >= previous - 1e-9);
            }
            previous = sse;
        }
    }

    #[test]
    fn zero_mi_features_get_zero_weight_and_no_variance() {
        let x: Vec<f64> = (0..60).map(|i| i as f64 / 59.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| 0.2 + 0.6 * v).collect();
        let data = single_feature_dataset(&x, &y);
        let model = fit_info_model(&data, &InfoModelConfig::default()).unwrap();
        for j in 1..6 {
            assert_eq!(model.weights[j], 0.0, "constant feature {j}");
            for f in data.features.iter().take(5) {
                assert_eq!(model.smooth_term(j, f), 0.0);
            }
        }
    }

    #[test]
    fn predictions_invariant_under_affine_feature_rescaling() {
        let mut cfg = crate::synthgen::default_paper_config();
        cfg.n = 300;
        cfg.seed = 11;
        let data = crate::synthgen::generate(&cfg).unwrap();
        let mut rescaled = data.clone();
        for f in rescaled.features.iter_mut() {
            f.debt_to_assets = 3.7 * f.debt_to_assets - 1.1;
        }
        let config = InfoModelConfig::default();
        let base = fit_info_model(&data, &config).unwrap();
        let shifted = fit_info_model(&rescaled, &config).unwrap();
        for (a, b) in data.features.iter().zip(&rescaled.features) {
            assert_abs_diff_eq!(base.predict(a), shifted.predict(b), epsilon = 1e-9);
        }
    }

    #[test]
    fn ridge_at_zero_lambda_matches_unpenalized_least_squares() {
        // Full-rank toy system solved through the ridge path at lambda = 0
        // against a hand-rolled Gaussian elimination of the plain normal
        // equations.
        let rows: Vec<[f64; 3]> = vec![
            [1.0, 0.1, 0.7],
            [1.0, 0.9, 0.2],
            [1.0, 0.4, 0.9],
            [1.0, 0.6, 0.1],
            [1.0, 0.3, 0.5],
        ];
        let y = [0.2, 0.8, 0.4, 0.7, 0.35];
        let design = DMatrix::from_fn(5, 3, |i, j| rows[i][j]);
        let yv = DVector::from_row_slice(&y);
        let xtx = design.transpose() * &design;
        let xty = design.transpose() * &yv;
        let ridge = ridge_solve(&xtx, &xty, 0.0).unwrap();

        let mut a = [[0.0f64; 4]; 3];
        for r in 0..3 {
            for c in 0..3 {
                a[r][c] = rows.iter().map(|row| row[r] * row[c]).sum();
            }
            a[r][3] = rows.iter().zip(&y).map(|(row, &t)| row[r] * t).sum();
        }
        for col in 0..3 {
            for r in 0..3 {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..4 {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        for r in 0..3 {
            assert_abs_diff_eq!(ridge[r], a[r][3] / a[r][r], epsilon = 1e-10);
        }
    }

    #[test]
    fn model_round_trips_through_json() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| 0.1 + 0.7 * v).collect();
        let data = single_feature_dataset(&x, &y);
        let model = fit_info_model(&data, &InfoModelConfig::default()).unwrap();
        let json = model.to_json();
        let restored = InfoModel::from_json(&json).unwrap();
        assert_eq!(model, restored);
        for f in data.features.iter().take(5) {
            assert_eq!(model.predict(f), restored.predict(f));
        }
    }
}
