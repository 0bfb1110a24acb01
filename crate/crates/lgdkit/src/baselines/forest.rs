//! Bagged CART regression trees: exhaustive variance-minimizing splits,
//! depth and leaf-size limits, bootstrap resampling, and prediction by the
//! arithmetic mean over trees.
//!
//! No feature subsampling: every split searches all features, so the
//! variance-minimization criterion applies exactly. Per-tree seeds are
//! pre-drawn from the model seed, making the fit independent of execution
//! order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureValue, FeatureVector};

use super::TrainingSummary;

/// Forest hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Resample size-n with replacement per tree; disable for single-tree
    /// oracle comparisons.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 50,
            max_depth: 5,
            min_samples_leaf: 2,
            bootstrap: true,
            seed: 0,
        }
    }
}

/// Split predicate: numeric features route left on `value <= threshold`,
/// categorical features route left on equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    LessEq(f64),
    Equals(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tree {
    Leaf {
        value: f64,
        n: usize,
    },
    Node {
        feature: usize,
        rule: SplitRule,
        left: Box<Tree>,
        right: Box<Tree>,
    },
}

impl Tree {
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        match self {
            Tree::Leaf { value, .. } => *value,
            Tree::Node {
                feature,
                rule,
                left,
                right,
            } => {
                if rule.goes_left(x.value(*feature)) {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }

    /// Leaf identifier for a row: the path encoded as a bit string.
    pub fn leaf_id(&self, x: &FeatureVector) -> usize {
        let mut node = self;
        let mut id = 1usize;
        loop {
            match node {
                Tree::Leaf { .. } => return id,
                Tree::Node {
                    feature,
                    rule,
                    left,
                    right,
                } => {
                    if rule.goes_left(x.value(*feature)) {
                        id <<= 1;
                        node = left;
                    } else {
                        id = (id << 1) | 1;
                        node = right;
                    }
                }
            }
        }
    }

    /// Visit every internal node.
    pub fn visit_splits(&self, visit: &mut impl FnMut(usize, &SplitRule)) {
        if let Tree::Node {
            feature,
            rule,
            left,
            right,
        } = self
        {
            visit(*feature, rule);
            left.visit_splits(visit);
            right.visit_splits(visit);
        }
    }
}

impl SplitRule {
    pub fn goes_left(&self, value: FeatureValue<'_>) -> bool {
        match (self, value) {
            (SplitRule::LessEq(threshold), FeatureValue::Num(v)) => v <= *threshold,
            (SplitRule::Equals(category), FeatureValue::Cat(c)) => c == category,
            // Schema drift between rule and value cannot arise from
            // FeatureVector, whose per-index kind is fixed.
            _ => unreachable!("split rule kind does not match feature kind"),
        }
    }
}

/// Bagged regression forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub params: ForestParams,
    pub summary: TrainingSummary,
}

impl ForestModel {
    /// Arithmetic mean over the trees' predictions, clipped to [0,1].
    /// Unanimous trees short-circuit so the mean of equal values is exact.
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let first = self.trees[0].predict(x);
        let mut sum = 0.0;
        let mut unanimous = true;
        for tree in &self.trees {
            let p = tree.predict(x);
            unanimous &= p == first;
            sum += p;
        }
        if unanimous {
            first.clamp(0.0, 1.0)
        } else {
            (sum / self.trees.len() as f64).clamp(0.0, 1.0)
        }
    }
}

/// The best split of a node, by total within-child squared error.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSplit {
    pub feature: usize,
    pub rule: SplitRule,
    pub total_sse: f64,
}

fn node_stats(data: &Dataset, indices: &[usize]) -> (f64, f64) {
    let first = data.labels[indices[0]];
    if indices.iter().all(|&i| data.labels[i] == first) {
        return (first, 0.0);
    }
    let n = indices.len() as f64;
    let sum: f64 = indices.iter().map(|&i| data.labels[i]).sum();
    let mean = sum / n;
    let sse: f64 = indices
        .iter()
        .map(|&i| (data.labels[i] - mean).powi(2))
        .sum();
    (mean, sse)
}

/// Exhaustive search over (feature, threshold) pairs minimizing the sum of
/// within-child squared errors. Numeric candidates are midpoints between
/// consecutive distinct values; categorical candidates are one-vs-rest on
/// each observed category, in sorted order. Ties keep the lowest feature
/// index, then the lowest threshold.
pub fn best_split(
    data: &Dataset,
    indices: &[usize],
    min_samples_leaf: usize,
) -> Option<BestSplit> {
    let n = indices.len();
    if n < 2 * min_samples_leaf {
        return None;
    }
    let (_, parent_sse) = node_stats(data, indices);
    if parent_sse <= 0.0 {
        return None;
    }

    // Identical partitions reached through different features (monotone
    // transforms of one another) must compare equal despite
    // summation-order rounding, so the first-feature tie break holds.
    let tie_eps = 1e-9 * (1.0 + parent_sse);
    let mut best: Option<BestSplit> = None;
    let mut consider = |candidate: BestSplit| {
        let better = match &best {
            None => candidate.total_sse < parent_sse - tie_eps,
            Some(b) => candidate.total_sse < b.total_sse - tie_eps,
        };
        if better {
            best = Some(candidate);
        }
    };

    for feature in 0..FeatureVector::NUM_FEATURES {
        match data.features[indices[0]].value(feature) {
            FeatureValue::Num(_) => {
                let mut pairs: Vec<(f64, f64)> = indices
                    .iter()
                    .map(|&i| {
                        let v = match data.features[i].value(feature) {
                            FeatureValue::Num(v) => v,
                            FeatureValue::Cat(_) => unreachable!(),
                        };
                        (v, data.labels[i])
                    })
                    .collect();
                pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

                // Prefix sums over the sorted order let each candidate be
                // scored in O(1).
                let mut prefix_sum = 0.0;
                let mut prefix_sq = 0.0;
                let total_sum: f64 = pairs.iter().map(|p| p.1).sum();
                let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
                for (pos, window) in pairs.windows(2).enumerate() {
                    prefix_sum += window[0].1;
                    prefix_sq += window[0].1 * window[0].1;
                    if window[0].0 == window[1].0 {
                        continue;
                    }
                    let n_left = pos + 1;
                    let n_right = n - n_left;
                    if n_left < min_samples_leaf || n_right < min_samples_leaf {
                        continue;
                    }
                    let sse_left = prefix_sq - prefix_sum * prefix_sum / n_left as f64;
                    let right_sum = total_sum - prefix_sum;
                    let sse_right =
                        (total_sq - prefix_sq) - right_sum * right_sum / n_right as f64;
                    consider(BestSplit {
                        feature,
                        rule: SplitRule::LessEq(0.5 * (window[0].0 + window[1].0)),
                        total_sse: sse_left + sse_right,
                    });
                }
            }
            FeatureValue::Cat(_) => {
                let mut categories: Vec<&str> = indices
                    .iter()
                    .map(|&i| match data.features[i].value(feature) {
                        FeatureValue::Cat(c) => c,
                        FeatureValue::Num(_) => unreachable!(),
                    })
                    .collect();
                categories.sort();
                categories.dedup();
                for category in categories {
                    let mut left_sum = 0.0;
                    let mut left_sq = 0.0;
                    let mut n_left = 0usize;
                    let mut total_sum = 0.0;
                    let mut total_sq = 0.0;
                    for &i in indices {
                        let y = data.labels[i];
                        total_sum += y;
                        total_sq += y * y;
                        if matches!(data.features[i].value(feature), FeatureValue::Cat(c) if c == category)
                        {
                            left_sum += y;
                            left_sq += y * y;
                            n_left += 1;
                        }
                    }
                    let n_right = n - n_left;
                    if n_left < min_samples_leaf || n_right < min_samples_leaf {
                        continue;
                    }
                    let sse_left = left_sq - left_sum * left_sum / n_left as f64;
                    let right_sum = total_sum - left_sum;
                    let sse_right = (total_sq - left_sq) - right_sum * right_sum / n_right as f64;
                    consider(BestSplit {
                        feature,
                        rule: SplitRule::Equals(category.to_string()),
                        total_sse: sse_left + sse_right,
                    });
                }
            }
        }
    }
    best
}

fn grow(data: &Dataset, indices: &[usize], depth: usize, params: &ForestParams) -> Tree {
    let (mean, _) = node_stats(data, indices);
    if depth >= params.max_depth {
        return Tree::Leaf {
            value: mean,
            n: indices.len(),
        };
    }
    let Some(split) = best_split(data, indices, params.min_samples_leaf) else {
        return Tree::Leaf {
            value: mean,
            n: indices.len(),
        };
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| split.rule.goes_left(data.features[i].value(split.feature)));
    Tree::Node {
        feature: split.feature,
        rule: split.rule,
        left: Box::new(grow(data, &left_idx, depth + 1, params)),
        right: Box::new(grow(data, &right_idx, depth + 1, params)),
    }
}

/// Per-tree seed stream: a fixed stride over the model seed, so tree fits
/// are independent of execution order.
pub(crate) fn derive_seed(master: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fit a bagged CART regression forest.
pub fn fit_forest(train: &Dataset, params: &ForestParams) -> ForestModel {
    let n = train.len();
    let trees: Vec<Tree> = (0..params.trees)
        .map(|t| {
            let indices: Vec<usize> = if params.bootstrap {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, t as u64));
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow(train, &indices, 0, params)
        })
        .collect();
    ForestModel {
        trees,
        params: params.clone(),
        summary: TrainingSummary::new(n),
    }
}
