//! Stratified cross-validation, metrics, benchmark comparison, and forest
//! failure diagnostics.
//!
//! Folds and families merge deterministically in (family, fold) order; all
//! stochastic fits take seeds derived from the master seed by fixed
//! offsets, so a run is replayable bit-for-bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{self, FittedModel, ForestModel, ModelSpec, SplitRule};
use crate::dataset::{feature_names, Dataset, Provenance};
use crate::infomodel::{variance_decomposition, VarianceShares};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("stratum `{stratum}` has {size} member(s); need at least k = {k}")]
    StratumTooSmall {
        stratum: &'static str,
        size: usize,
        k: usize,
    },
    #[error("fold plan does not match dataset: {0}")]
    PlanMismatch(String),
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("fold {fold} proxy share {share:.4} departs from the dataset mixture {global:.4} by more than {tolerance}")]
    StratificationViolated {
        fold: usize,
        share: f64,
        global: f64,
        tolerance: f64,
    },
    #[error("no model specs given")]
    NoSpecs,
    #[error("fold {fold}: {source}")]
    FoldFit {
        fold: usize,
        #[source]
        source: baselines::ModelError,
    },
}

/// Tolerance on every fold's proxy share around the dataset mixture.
pub const STRATIFICATION_TOLERANCE: f64 = 0.02;

/// A fold assignment: per-record fold index, stratified by provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

/// Fixed-stride seed derivation, so every (family, fold) pair gets an
/// independent stream from one master seed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stratified k-fold assignment: shuffle within each provenance stratum by
/// seed, deal round-robin. Every plan is checked against the stratification
/// invariant before it is returned.
pub fn stratified_folds(data: &Dataset, k: usize, seed: u64) -> Result<FoldPlan, EvalError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if data.is_empty() || k == 0 {
        return Err(EvalError::EmptyInput);
    }
    let mut proxy: Vec<usize> = Vec::new();
    let mut documented: Vec<usize> = Vec::new();
    for (i, r) in data.records.iter().enumerate() {
        match r.provenance {
            Provenance::Proxy => proxy.push(i),
            Provenance::TrueOutcome => documented.push(i),
        }
    }
    for (stratum, members) in [("proxy", &proxy), ("true_outcome", &documented)] {
        if !members.is_empty() && members.len() < k {
            return Err(EvalError::StratumTooSmall {
                stratum,
                size: members.len(),
                k,
            });
        }
    }

    let mut assignments = vec![0usize; data.len()];
    for (stream, members) in [(1u64, proxy), (2u64, documented)] {
        let mut order = members;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, stream));
        order.shuffle(&mut rng);
        for (pos, idx) in order.into_iter().enumerate() {
            assignments[idx] = pos % k;
        }
    }
    let plan = FoldPlan { k, assignments, seed };
    check_stratification(data, &plan)?;
    Ok(plan)
}

fn check_stratification(data: &Dataset, plan: &FoldPlan) -> Result<(), EvalError> {
    for fold in 0..plan.k {
        let test = plan.test_indices(fold);
        if test.is_empty() {
            continue;
        }
        let proxies = test
            .iter()
            .filter(|&&i| data.records[i].provenance == Provenance::Proxy)
            .count();
        let share = proxies as f64 / test.len() as f64;
        if (share - data.mixture_proportion).abs() > STRATIFICATION_TOLERANCE {
            return Err(EvalError::StratificationViolated {
                fold,
                share,
                global: data.mixture_proportion,
                tolerance: STRATIFICATION_TOLERANCE,
            });
        }
    }
    Ok(())
}

/// RMSE, R², and MAE. `r2` may be negative; a constant target makes it 0
/// when predictions are the same constant and an undefined sentinel
/// (negative infinity, reported as "undefined") otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub r2: f64,
    pub mae: f64,
}

const SST_EPSILON: f64 = 1e-12;

pub fn compute_metrics(y: &[f64], yhat: &[f64]) -> Result<Metrics, EvalError> {
    if y.len() != yhat.len() {
        return Err(EvalError::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = y.len() as f64;
    let mean_y = y.iter().sum::<f64>() / n;
    let sse: f64 = y.iter().zip(yhat).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let sst: f64 = y.iter().map(|&a| (a - mean_y) * (a - mean_y)).sum();
    let mae = y.iter().zip(yhat).map(|(&a, &b)| (a - b).abs()).sum::<f64>() / n;
    let rmse = (sse / n).sqrt();
    let r2 = if sst > SST_EPSILON {
        1.0 - sse / sst
    } else if sse <= SST_EPSILON {
        0.0
    } else {
        f64::NEG_INFINITY
    };
    Ok(Metrics { rmse, r2, mae })
}

/// Cross-validation result for one model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEval {
    pub family: String,
    pub per_fold: Vec<Metrics>,
    /// Unweighted mean of per-fold metrics (the primary aggregate).
    pub fold_mean: Metrics,
    /// Metrics over the pooled out-of-fold predictions (secondary, for
    /// debugging).
    pub pooled: Metrics,
    /// Folds excluded from the mean for near-zero test-fold variance.
    pub excluded_folds: Vec<usize>,
}

/// Fit on each fold's complement and score on the fold. The same plan must
/// be reused across families for paired comparison; stochastic fits are
/// reseeded per fold from their configured seed.
pub fn cross_validate(
    spec: &ModelSpec,
    data: &Dataset,
    plan: &FoldPlan,
) -> Result<ModelEval, EvalError> {
    if plan.assignments.len() != data.len() {
        return Err(EvalError::PlanMismatch(format!(
            "plan covers {} records, dataset has {}",
            plan.assignments.len(),
            data.len()
        )));
    }
    let mut per_fold = Vec::with_capacity(plan.k);
    let mut excluded_folds = Vec::new();
    let mut pooled_y = Vec::with_capacity(data.len());
    let mut pooled_pred = Vec::with_capacity(data.len());
    for fold in 0..plan.k {
        let test = plan.test_indices(fold);
        if test.is_empty() {
            continue;
        }
        let train = data.subset(&plan.train_indices(fold));
        let fold_spec = spec.with_seed(derive_seed(seed_of(spec), fold as u64));
        let model =
            baselines::fit(&fold_spec, &train).map_err(|source| EvalError::FoldFit { fold, source })?;
        let y: Vec<f64> = test.iter().map(|&i| data.labels[i]).collect();
        let yhat: Vec<f64> = test.iter().map(|&i| model.predict(&data.features[i])).collect();
        let metrics = compute_metrics(&y, &yhat)?;
        if metrics.r2 == f64::NEG_INFINITY {
            log::warn!(
                "fold {fold}: near-zero test variance; R2 undefined, fold excluded from the mean"
            );
            excluded_folds.push(fold);
        }
        per_fold.push(metrics);
        pooled_y.extend(y);
        pooled_pred.extend(yhat);
    }

    let included: Vec<&Metrics> = per_fold
        .iter()
        .enumerate()
        .filter(|(i, _)| !excluded_folds.contains(i))
        .map(|(_, m)| m)
        .collect();
    let mean_of = |f: fn(&Metrics) -> f64| -> f64 {
        if included.is_empty() {
            f64::NAN
        } else {
            included.iter().map(|m| f(m)).sum::<f64>() / included.len() as f64
        }
    };
    let fold_mean = Metrics {
        rmse: mean_of(|m| m.rmse),
        r2: mean_of(|m| m.r2),
        mae: mean_of(|m| m.mae),
    };
    let pooled = compute_metrics(&pooled_y, &pooled_pred)?;
    Ok(ModelEval {
        family: spec.family_name().to_string(),
        per_fold,
        fold_mean,
        pooled,
        excluded_folds,
    })
}

fn seed_of(spec: &ModelSpec) -> u64 {
    match spec {
        ModelSpec::Forest(p) => p.seed,
        ModelSpec::Info(c) => c.seed,
        _ => 0,
    }
}

/// Structural diagnostics of a fitted forest over a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestDiagnostics {
    /// Fraction of all splits per feature name; sums to 1 when any split
    /// exists.
    pub split_frequency: BTreeMap<String, f64>,
    /// Proxy fraction of the records routed to each populated (tree, leaf).
    pub leaf_proxy_fractions: Vec<f64>,
    pub prediction_range: (f64, f64),
    pub outcome_range: (f64, f64),
}

/// Walk every tree: tally split counts per feature, route every record to
/// its leaf per tree and record leaf proxy fractions, and compare the
/// prediction range against the outcome range.
pub fn forest_diagnostics(model: &ForestModel, data: &Dataset) -> ForestDiagnostics {
    let names = feature_names();
    let mut split_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total_splits = 0usize;
    for tree in &model.trees {
        tree.visit_splits(&mut |feature, _rule: &SplitRule| {
            *split_counts.entry(names[feature].clone()).or_insert(0) += 1;
            total_splits += 1;
        });
    }
    let split_frequency = split_counts
        .into_iter()
        .map(|(name, c)| (name, c as f64 / total_splits.max(1) as f64))
        .collect();

    let mut leaf_proxy_fractions = Vec::new();
    for tree in &model.trees {
        let mut members: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for (i, f) in data.features.iter().enumerate() {
            let leaf = tree.leaf_id(f);
            let entry = members.entry(leaf).or_insert((0, 0));
            entry.1 += 1;
            if data.records[i].provenance == Provenance::Proxy {
                entry.0 += 1;
            }
        }
        for (_, (proxies, total)) in members {
            leaf_proxy_fractions.push(proxies as f64 / total as f64);
        }
    }

    let predictions: Vec<f64> = data.features.iter().map(|f| model.predict(f)).collect();
    let range = |values: &[f64]| {
        values.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), &v| (lo.min(v), hi.max(v)),
        )
    };
    ForestDiagnostics {
        split_frequency,
        leaf_proxy_fractions,
        prediction_range: range(&predictions),
        outcome_range: range(&data.labels),
    }
}

/// The complete comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub models: Vec<ModelEval>,
    /// Variance decomposition of the info model fitted on the full data.
    pub variance_shares: Option<VarianceShares>,
    /// Diagnostics of the forest fitted on the full data.
    pub diagnostics: Option<ForestDiagnostics>,
    pub config_digest: String,
    pub n: usize,
    pub mixture_proportion: f64,
    pub cv_k: usize,
    pub seed: u64,
}

/// Run every family under one fold plan, then fit the info model and the
/// forest on the full data for the variance decomposition and diagnostics.
pub fn run_comparison(
    data: &Dataset,
    specs: &[ModelSpec],
    k: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    if specs.is_empty() {
        return Err(EvalError::NoSpecs);
    }
    let plan = stratified_folds(data, k, seed)?;

    let mut models = Vec::with_capacity(specs.len());
    let mut variance_shares = None;
    let mut diagnostics = None;
    for (family_index, spec) in specs.iter().enumerate() {
        let seeded = spec.with_seed(derive_seed(seed, 1000 + family_index as u64));
        models.push(cross_validate(&seeded, data, &plan)?);

        let full_fit_needed = matches!(spec, ModelSpec::Forest(_) | ModelSpec::Info(_));
        if full_fit_needed {
            let full = baselines::fit(&seeded, data)
                .map_err(|source| EvalError::FoldFit { fold: usize::MAX, source })?;
            match full {
                FittedModel::Info(m) => {
                    variance_shares = Some(variance_decomposition(&m, data));
                }
                FittedModel::Forest(m) => {
                    diagnostics = Some(forest_diagnostics(&m, data));
                }
                _ => {}
            }
        }
    }

    let digest_input = (specs, k, seed, data.len());
    Ok(EvalReport {
        models,
        variance_shares,
        diagnostics,
        config_digest: crate::digest::sha256_json(&digest_input),
        n: data.len(),
        mixture_proportion: data.mixture_proportion,
        cv_k: k,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::ForestParams;
    use crate::dataset::{Dataset, FirmRecord};
    use crate::synthgen::{default_paper_config, generate};
    use approx::assert_abs_diff_eq;

    fn mixed_records(n_proxy: usize, n_true: usize) -> Vec<FirmRecord> {
        let mut records = Vec::new();
        for i in 0..n_proxy + n_true {
            let documented = i >= n_proxy;
            records.push(FirmRecord {
                firm_id: format!("f{i}"),
                total_assets: 4e8 + i as f64 * 1e6,
                total_liabilities: 4e8,
                total_debt: 2e8,
                total_equity: 1e8,
                current_assets: 1e8,
                current_liabilities: 9e7,
                cash: 2e7,
                industry: if i % 2 == 0 { "D" } else { "E" }.to_string(),
                filing_district: "D01".to_string(),
                chapter11: true,
                is_public: true,
                provenance: if documented {
                    Provenance::TrueOutcome
                } else {
                    Provenance::Proxy
                },
                recovered: documented.then_some(10.0),
                outstanding: documented.then_some(100.0),
                lgd: if documented { 0.9 } else { 0.1 },
            });
        }
        records
    }

    #[test]
    fn exact_divisibility_gives_equal_folds() {
        let data = Dataset::from_records(mixed_records(90, 10)).unwrap();
        let plan = stratified_folds(&data, 10, 7).unwrap();
        for fold in 0..10 {
            let test = plan.test_indices(fold);
            assert_eq!(test.len(), 10);
            let proxies = test
                .iter()
                .filter(|&&i| data.records[i].provenance == Provenance::Proxy)
                .count();
            assert_eq!(proxies, 9);
        }
    }

    #[test]
    fn plans_are_deterministic_in_the_seed() {
        let data = Dataset::from_records(mixed_records(50, 10)).unwrap();
        assert_eq!(
            stratified_folds(&data, 5, 3).unwrap(),
            stratified_folds(&data, 5, 3).unwrap()
        );
        assert_ne!(
            stratified_folds(&data, 5, 3).unwrap().assignments,
            stratified_folds(&data, 5, 4).unwrap().assignments
        );
    }

    #[test]
    fn fold_partition_covers_every_index_once() {
        let data = Dataset::from_records(mixed_records(86, 21)).unwrap();
        let plan = stratified_folds(&data, 7, 11).unwrap();
        let mut seen = vec![false; data.len()];
        for fold in 0..7 {
            for i in plan.test_indices(fold) {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        // Fold sizes within each stratum differ by at most one.
        for fold in 0..7 {
            let test = plan.test_indices(fold);
            let p = test
                .iter()
                .filter(|&&i| data.records[i].provenance == Provenance::Proxy)
                .count();
            assert!((12..=13).contains(&p), "fold {fold} proxy count {p}");
        }
    }

    #[test]
    fn unsatisfiable_stratification_is_rejected_not_fudged() {
        // 83/17 over 7 folds cannot keep every fold within the tolerance.
        let data = Dataset::from_records(mixed_records(83, 17)).unwrap();
        assert!(matches!(
            stratified_folds(&data, 7, 11),
            Err(EvalError::StratificationViolated { .. })
        ));
    }

    #[test]
    fn paper_shaped_data_keeps_fold_shares_near_the_mixture() {
        let cfg = default_paper_config();
        let data = generate(&cfg).unwrap();
        for seed in 0..20 {
            let plan = stratified_folds(&data, 10, seed).unwrap();
            for fold in 0..10 {
                let test = plan.test_indices(fold);
                let share = test
                    .iter()
                    .filter(|&&i| data.records[i].provenance == Provenance::Proxy)
                    .count() as f64
                    / test.len() as f64;
                assert!(
                    (share - data.mixture_proportion).abs() <= 0.02,
                    "seed {seed} fold {fold}: share {share}"
                );
            }
        }
    }

    #[test]
    fn small_stratum_is_rejected() {
        let data = Dataset::from_records(mixed_records(40, 5)).unwrap();
        assert!(matches!(
            stratified_folds(&data, 10, 0),
            Err(EvalError::StratumTooSmall { stratum: "true_outcome", size: 5, k: 10 })
        ));
    }

    #[test]
    fn metric_oracle_values() {
        let m = compute_metrics(&[0.1, 0.4, 0.7], &[0.1, 0.4, 0.7]).unwrap();
        assert_eq!((m.rmse, m.r2, m.mae), (0.0, 1.0, 0.0));

        // Predicting the mean gives exactly zero R².
        let y = [0.2, 0.4, 0.9];
        let mean = (0.2 + 0.4 + 0.9) / 3.0;
        let m = compute_metrics(&y, &[mean; 3]).unwrap();
        assert_abs_diff_eq!(m.r2, 0.0, epsilon = 1e-12);

        // Hand arithmetic: SSE = 2, SST = 0.5.
        let m = compute_metrics(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(m.rmse, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.r2, -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.mae, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn metrics_satisfy_rmse_r2_identity() {
        let y = [0.1, 0.5, 0.9, 0.3, 0.7];
        let yhat = [0.2, 0.4, 0.8, 0.1, 0.9];
        let m = compute_metrics(&y, &yhat).unwrap();
        let n = y.len() as f64;
        let mean_y = y.iter().sum::<f64>() / n;
        let sst: f64 = y.iter().map(|&v| (v - mean_y).powi(2)).sum();
        assert_abs_diff_eq!(m.r2, 1.0 - m.rmse * m.rmse * n / sst, epsilon = 1e-12);
    }

    #[test]
    fn constant_target_edge_cases() {
        let m = compute_metrics(&[0.4; 5], &[0.4; 5]).unwrap();
        assert_eq!(m.r2, 0.0);
        let m = compute_metrics(&[0.4; 5], &[0.5; 5]).unwrap();
        assert_eq!(m.r2, f64::NEG_INFINITY);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(
            compute_metrics(&[0.1], &[0.1, 0.2]),
            Err(EvalError::LengthMismatch(1, 2))
        ));
        assert!(matches!(compute_metrics(&[], &[]), Err(EvalError::EmptyInput)));
    }

    #[test]
    fn out_of_fold_mean_prediction_cannot_beat_zero_r2() {
        let data = Dataset::from_records(mixed_records(60, 12)).unwrap();
        let plan = stratified_folds(&data, 6, 5).unwrap();
        // Industry average on industry-free labels behaves like a mean
        // predictor; out-of-fold R² of a mean predictor is at most 0.
        let eval = cross_validate(&ModelSpec::IndustryAverage, &data, &plan).unwrap();
        assert!(eval.fold_mean.r2 <= 0.0 + 1e-9, "r2 = {}", eval.fold_mean.r2);
    }

    #[test]
    fn leave_one_out_matches_explicit_enumeration() {
        // 5-point toy with the linear family under k = n.
        let mut records = mixed_records(5, 0);
        for (i, r) in records.iter_mut().enumerate() {
            r.total_assets = 2e8 * (1.0 + i as f64);
            r.lgd = 0.1 + 0.15 * i as f64;
        }
        let data = Dataset::from_records(records).unwrap();
        let plan = stratified_folds(&data, 5, 9).unwrap();
        let eval = cross_validate(&ModelSpec::Linear, &data, &plan).unwrap();

        // Oracle: five explicit fits.
        let mut per_fold_oracle = Vec::new();
        for fold in 0..5 {
            let train = data.subset(&plan.train_indices(fold));
            let test = plan.test_indices(fold);
            let model = baselines::fit(&ModelSpec::Linear, &train).unwrap();
            let y: Vec<f64> = test.iter().map(|&i| data.labels[i]).collect();
            let yhat: Vec<f64> = test
                .iter()
                .map(|&i| model.predict(&data.features[i]))
                .collect();
            per_fold_oracle.push(compute_metrics(&y, &yhat).unwrap());
        }
        for (got, want) in eval.per_fold.iter().zip(&per_fold_oracle) {
            assert_abs_diff_eq!(got.rmse, want.rmse, epsilon = 1e-12);
            assert_abs_diff_eq!(got.mae, want.mae, epsilon = 1e-12);
        }
        // Single-row folds have zero SST, so every fold is excluded and
        // flagged rather than averaged.
        assert_eq!(eval.excluded_folds.len(), 5);
    }

    #[test]
    fn families_share_identical_test_indices() {
        let data = Dataset::from_records(mixed_records(60, 12)).unwrap();
        let plan = stratified_folds(&data, 6, 5).unwrap();
        let a = cross_validate(&ModelSpec::IndustryAverage, &data, &plan).unwrap();
        let b = cross_validate(&ModelSpec::SizeHeuristic, &data, &plan).unwrap();
        // Same plan, same folds: the pairing contract is the plan itself;
        // per-fold metric vectors must be index-aligned.
        assert_eq!(a.per_fold.len(), b.per_fold.len());
    }

    #[test]
    fn constant_model_fold_average_matches_pooled_identity() {
        // For a model constant within each fold, fold-averaged and pooled
        // metrics are both computed and reported; verify both paths agree
        // with direct computation.
        let data = Dataset::from_records(mixed_records(40, 10)).unwrap();
        let plan = stratified_folds(&data, 5, 2).unwrap();
        let eval = cross_validate(&ModelSpec::IndustryAverage, &data, &plan).unwrap();
        let mut pooled_y = Vec::new();
        let mut pooled_hat = Vec::new();
        for fold in 0..5 {
            let train = data.subset(&plan.train_indices(fold));
            let model = baselines::fit(&ModelSpec::IndustryAverage, &train).unwrap();
            for i in plan.test_indices(fold) {
                pooled_y.push(data.labels[i]);
                pooled_hat.push(model.predict(&data.features[i]));
            }
        }
        let expected = compute_metrics(&pooled_y, &pooled_hat).unwrap();
        assert_abs_diff_eq!(eval.pooled.rmse, expected.rmse, epsilon = 1e-12);
        assert_abs_diff_eq!(eval.pooled.r2, expected.r2, epsilon = 1e-12);
    }

    #[test]
    fn depth_zero_forest_diagnostics_are_degenerate() {
        let data = Dataset::from_records(mixed_records(36, 12)).unwrap();
        let params = ForestParams {
            trees: 3,
            max_depth: 0,
            ..Default::default()
        };
        let model = match baselines::fit(&ModelSpec::Forest(params), &data).unwrap() {
            FittedModel::Forest(m) => m,
            _ => unreachable!(),
        };
        let diag = forest_diagnostics(&model, &data);
        assert!(diag.split_frequency.is_empty());
        // Single-leaf purity equals the dataset mixture proportion.
        for share in &diag.leaf_proxy_fractions {
            assert_abs_diff_eq!(*share, data.mixture_proportion, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_feature_tree_concentrates_split_frequency() {
        // Labels are a step in total assets only.
        let mut records = mixed_records(40, 0);
        for (i, r) in records.iter_mut().enumerate() {
            r.total_assets = 2e8 + i as f64 * 1e7;
            r.lgd = if i < 20 { 0.2 } else { 0.8 };
        }
        let data = Dataset::from_records(records).unwrap();
        let params = ForestParams {
            trees: 1,
            max_depth: 1,
            min_samples_leaf: 1,
            bootstrap: false,
            seed: 0,
        };
        let model = match baselines::fit(&ModelSpec::Forest(params), &data).unwrap() {
            FittedModel::Forest(m) => m,
            _ => unreachable!(),
        };
        let diag = forest_diagnostics(&model, &data);
        assert_eq!(diag.split_frequency.len(), 1);
        let total: f64 = diag.split_frequency.values().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn split_shares_sum_to_one_on_real_forests() {
        let mut cfg = default_paper_config();
        cfg.n = 300;
        let data = generate(&cfg).unwrap();
        let model = match baselines::fit(&ModelSpec::Forest(ForestParams::default()), &data).unwrap()
        {
            FittedModel::Forest(m) => m,
            _ => unreachable!(),
        };
        let diag = forest_diagnostics(&model, &data);
        let total: f64 = diag.split_frequency.values().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
        assert!(diag.outcome_range.0 >= 0.0 && diag.outcome_range.1 <= 1.0);
    }

    #[test]
    fn single_spec_comparison_reports_one_family() {
        let data = Dataset::from_records(mixed_records(60, 12)).unwrap();
        let report = run_comparison(&data, &[ModelSpec::IndustryAverage], 6, 3).unwrap();
        assert_eq!(report.models.len(), 1);
        assert_eq!(report.models[0].family, "industry_average");
        assert!(report.variance_shares.is_none());
        assert!(report.diagnostics.is_none());
    }

    #[test]
    fn comparison_report_is_deterministic() {
        let mut cfg = default_paper_config();
        cfg.n = 200;
        let data = generate(&cfg).unwrap();
        let specs = vec![
            ModelSpec::IndustryAverage,
            ModelSpec::Forest(ForestParams {
                trees: 5,
                ..Default::default()
            }),
        ];
        let a = run_comparison(&data, &specs, 5, 17).unwrap();
        let b = run_comparison(&data, &specs, 5, 17).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn empty_spec_list_is_rejected() {
        let data = Dataset::from_records(mixed_records(30, 6)).unwrap();
        assert!(matches!(
            run_comparison(&data, &[], 3, 0),
            Err(EvalError::NoSpecs)
        ));
    }
}
