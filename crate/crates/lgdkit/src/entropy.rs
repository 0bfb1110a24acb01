//! Binned Shannon entropy, conditional entropy, and mutual information with
//! finite-sample bias correction.
//!
//! All public values are reported in bits. The Miller-Madow correction term
//! is computed in nats (its classical form) and converted. Bin edges are
//! equal-width over the observed `[min, max]`; values equal to the upper
//! edge fall in the last bin. Categorical conditioning variables bypass
//! binning entirely: one bin per category.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const LN_2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("input is empty")]
    EmptyInput,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("bin count must be at least 1")]
    ZeroBins,
    #[error("category code {code} out of range (expected < {categories})")]
    CategoryOutOfRange { code: usize, categories: usize },
    #[error("correlation must satisfy |rho| < 1, got {0}")]
    CorrelationOutOfRange(f64),
}

/// An entropy or mutual-information value in bits, together with the bin
/// counts and bias-correction metadata that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoEstimate {
    /// Reported value in bits (bias-corrected when `corrected` is set).
    pub value_bits: f64,
    /// Plug-in value before correction, in bits.
    pub raw_bits: f64,
    /// Bin count of the conditioning variable, when one exists.
    pub bins_x: Option<usize>,
    /// Bin count of the target variable.
    pub bins_y: usize,
    /// Number of non-empty bins (joint cells for conditional estimates).
    pub occupied_bins: usize,
    /// Sample count.
    pub n: usize,
    /// Whether the Miller-Madow correction has been applied.
    pub corrected: bool,
}

/// Histogram bin-count rule. The rounded Sturges form is the default; the
/// ceiling form is exposed behind a config switch for sensitivity runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinRule {
    #[default]
    SturgesRound,
    SturgesCeil,
}

impl BinRule {
    pub fn bins(self, n: usize) -> usize {
        match self {
            BinRule::SturgesRound => sturges_bins(n),
            BinRule::SturgesCeil => sturges_bins_ceil(n),
        }
    }
}

/// Sturges' rule with rounding: `round(1 + log2(n))`, minimum 1.
pub fn sturges_bins(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    let k = (1.0 + (n as f64).log2()).round() as usize;
    k.max(1)
}

/// Sturges' rule with a ceiling: `1 + ceil(log2(n))`, minimum 1.
pub fn sturges_bins_ceil(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    let k = (1.0 + (n as f64).log2().ceil()) as usize;
    k.max(1)
}

fn check_finite(values: &[f64]) -> Result<(), EntropyError> {
    if values.is_empty() {
        return Err(EntropyError::EmptyInput);
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(EntropyError::NonFinite(i));
        }
    }
    Ok(())
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Equal-width bin index over `[lo, hi]`; ties on the upper edge fall in the
/// last bin. Degenerate ranges collapse to bin 0.
fn bin_index(v: f64, lo: f64, hi: f64, k: usize) -> usize {
    if k <= 1 || hi <= lo {
        return 0;
    }
    let t = (v - lo) / (hi - lo);
    ((t * k as f64) as usize).min(k - 1)
}

/// Plug-in entropy in bits of a count histogram, plus the occupied-bin count.
fn counts_entropy_bits(counts: &[usize], n: usize) -> (f64, usize) {
    let nf = n as f64;
    let mut h = 0.0;
    let mut occupied = 0;
    for &c in counts {
        if c > 0 {
            occupied += 1;
            let p = c as f64 / nf;
            h -= p * p.log2();
        }
    }
    (h.max(0.0), occupied)
}

/// Plug-in histogram entropy of `values` over `k` equal-width bins, in bits.
///
/// The degenerate case (all values equal) returns 0 bits.
pub fn histogram_entropy(values: &[f64], k: usize) -> Result<InfoEstimate, EntropyError> {
    if k == 0 {
        return Err(EntropyError::ZeroBins);
    }
    check_finite(values)?;
    let n = values.len();
    let (lo, hi) = min_max(values);
    let mut counts = vec![0usize; k];
    for &v in values {
        counts[bin_index(v, lo, hi, k)] += 1;
    }
    let (h, occupied) = counts_entropy_bits(&counts, n);
    Ok(InfoEstimate {
        value_bits: h,
        raw_bits: h,
        bins_x: None,
        bins_y: k,
        occupied_bins: occupied,
        n,
        corrected: false,
    })
}

/// Miller-Madow bias correction: adds `(k_occupied - 1) / (2n)` nats to the
/// plug-in entropy, converted to bits.
pub fn miller_madow(raw: &InfoEstimate) -> InfoEstimate {
    let correction_nats = raw.occupied_bins.saturating_sub(1) as f64 / (2.0 * raw.n as f64);
    InfoEstimate {
        value_bits: raw.raw_bits + correction_nats / LN_2,
        corrected: true,
        ..*raw
    }
}

/// A conditioning column: continuous values are binned equal-width into
/// `bins`; categorical codes are used directly, one bin per category.
#[derive(Debug, Clone, Copy)]
pub enum Condition<'a> {
    Continuous { values: &'a [f64], bins: usize },
    Categorical { codes: &'a [usize], categories: usize },
}

impl Condition<'_> {
    fn len(&self) -> usize {
        match self {
            Condition::Continuous { values, .. } => values.len(),
            Condition::Categorical { codes, .. } => codes.len(),
        }
    }

    fn bins(&self) -> usize {
        match self {
            Condition::Continuous { bins, .. } => *bins,
            Condition::Categorical { categories, .. } => *categories,
        }
    }

    /// Bin index per row.
    fn indices(&self) -> Result<Vec<usize>, EntropyError> {
        match self {
            Condition::Continuous { values, bins } => {
                if *bins == 0 {
                    return Err(EntropyError::ZeroBins);
                }
                check_finite(values)?;
                let (lo, hi) = min_max(values);
                Ok(values.iter().map(|&v| bin_index(v, lo, hi, *bins)).collect())
            }
            Condition::Categorical { codes, categories } => {
                if *categories == 0 {
                    return Err(EntropyError::ZeroBins);
                }
                if codes.is_empty() {
                    return Err(EntropyError::EmptyInput);
                }
                for &c in codes.iter() {
                    if c >= *categories {
                        return Err(EntropyError::CategoryOutOfRange {
                            code: c,
                            categories: *categories,
                        });
                    }
                }
                Ok(codes.to_vec())
            }
        }
    }
}

/// Encode arbitrary category labels as dense codes in first-seen order.
/// Returns the codes and the number of distinct categories.
pub fn encode_categories<T: Ord>(labels: &[T]) -> (Vec<usize>, usize) {
    let mut seen: BTreeMap<&T, usize> = BTreeMap::new();
    let mut codes = Vec::with_capacity(labels.len());
    for label in labels {
        let next = seen.len();
        let code = *seen.entry(label).or_insert(next);
        codes.push(code);
    }
    (codes, seen.len())
}

/// Conditional entropy H(Y|X) in bits: the occupancy-weighted sum of per-slice
/// target entropies, each slice Miller-Madow corrected. The target uses global
/// equal-width edges so the plug-in value matches the joint-histogram identity
/// H(Y) - H(Y|X) = I(X;Y).
pub fn conditional_entropy(
    x: Condition<'_>,
    y: &[f64],
    ky: usize,
) -> Result<InfoEstimate, EntropyError> {
    if ky == 0 {
        return Err(EntropyError::ZeroBins);
    }
    if x.len() != y.len() {
        return Err(EntropyError::LengthMismatch(x.len(), y.len()));
    }
    check_finite(y)?;
    let n = y.len();
    let x_idx = x.indices()?;
    let kx = x.bins();

    let (lo, hi) = min_max(y);
    let mut joint = vec![0usize; kx * ky];
    let mut slice_n = vec![0usize; kx];
    for (xi, &v) in x_idx.iter().zip(y) {
        joint[xi * ky + bin_index(v, lo, hi, ky)] += 1;
        slice_n[*xi] += 1;
    }

    let mut plug = 0.0;
    let mut corrected = 0.0;
    let mut occupied_cells = 0;
    for b in 0..kx {
        let nb = slice_n[b];
        if nb == 0 {
            continue;
        }
        let (h_b, occ_b) = counts_entropy_bits(&joint[b * ky..(b + 1) * ky], nb);
        occupied_cells += occ_b;
        let weight = nb as f64 / n as f64;
        let correction_nats = occ_b.saturating_sub(1) as f64 / (2.0 * nb as f64);
        plug += weight * h_b;
        corrected += weight * (h_b + correction_nats / LN_2);
    }

    Ok(InfoEstimate {
        value_bits: corrected,
        raw_bits: plug,
        bins_x: Some(kx),
        bins_y: ky,
        occupied_bins: occupied_cells,
        n,
        corrected: true,
    })
}

/// Mutual information I(X;Y) = H(Y) - H(Y|X) in bits, floored at 0 after
/// correction. The per-slice correction inside H(Y|X) overcorrects slightly
/// in sparse slices; the floor absorbs the resulting negatives.
pub fn mutual_information(
    x: Condition<'_>,
    y: &[f64],
    ky: usize,
) -> Result<InfoEstimate, EntropyError> {
    let hy = histogram_entropy(y, ky)?;
    let hy_mm = miller_madow(&hy);
    let hcond = conditional_entropy(x, y, ky)?;
    Ok(InfoEstimate {
        value_bits: (hy_mm.value_bits - hcond.value_bits).max(0.0),
        raw_bits: hy.raw_bits - hcond.raw_bits,
        bins_x: hcond.bins_x,
        bins_y: ky,
        occupied_bins: hcond.occupied_bins,
        n: y.len(),
        corrected: true,
    })
}

/// Joint mutual information I(X1,...,Xm; Y): conditions on the product cell
/// of the per-column bins. Small-sample estimates of this quantity are biased
/// upward (cells go sparse quickly); it is reported as a distinct aggregate,
/// not a per-feature sum.
pub fn joint_mutual_information(
    columns: &[Condition<'_>],
    y: &[f64],
    ky: usize,
) -> Result<InfoEstimate, EntropyError> {
    if columns.is_empty() {
        return Err(EntropyError::EmptyInput);
    }
    if ky == 0 {
        return Err(EntropyError::ZeroBins);
    }
    check_finite(y)?;
    let n = y.len();
    for c in columns {
        if c.len() != n {
            return Err(EntropyError::LengthMismatch(c.len(), n));
        }
    }

    // Mixed-radix cell id over the per-column bin indices.
    let mut cell = vec![0u64; n];
    for c in columns {
        let idx = c.indices()?;
        let radix = c.bins() as u64;
        for (acc, i) in cell.iter_mut().zip(&idx) {
            *acc = *acc * radix + *i as u64;
        }
    }

    let (lo, hi) = min_max(y);
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (&c, &v) in cell.iter().zip(y) {
        groups
            .entry(c)
            .or_insert_with(|| vec![0usize; ky])[bin_index(v, lo, hi, ky)] += 1;
    }

    let hy = histogram_entropy(y, ky)?;
    let hy_mm = miller_madow(&hy);

    let mut plug = 0.0;
    let mut corrected = 0.0;
    let mut occupied_cells = 0;
    for counts in groups.values() {
        let nb: usize = counts.iter().sum();
        let (h_b, occ_b) = counts_entropy_bits(counts, nb);
        occupied_cells += occ_b;
        let weight = nb as f64 / n as f64;
        let correction_nats = occ_b.saturating_sub(1) as f64 / (2.0 * nb as f64);
        plug += weight * h_b;
        corrected += weight * (h_b + correction_nats / LN_2);
    }

    Ok(InfoEstimate {
        value_bits: (hy_mm.value_bits - corrected).max(0.0),
        raw_bits: hy.raw_bits - plug,
        bins_x: Some(groups.len()),
        bins_y: ky,
        occupied_bins: occupied_cells,
        n,
        corrected: true,
    })
}

/// Closed-form mutual information of a bivariate normal with correlation
/// `rho`: `-1/2 log2(1 - rho^2)` bits.
pub fn gaussian_mi(rho: f64) -> Result<InfoEstimate, EntropyError> {
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(EntropyError::CorrelationOutOfRange(rho));
    }
    let bits = -0.5 * (1.0 - rho * rho).log2();
    Ok(InfoEstimate {
        value_bits: bits,
        raw_bits: bits,
        bins_x: None,
        bins_y: 1,
        occupied_bins: 1,
        n: 1,
        corrected: false,
    })
}

/// Information-theoretic ceiling on achievable R²: `1 - exp(-2 I)` with I in
/// nats. The image lies in `[0, 1)`.
pub fn r2_ceiling(info: &InfoEstimate) -> f64 {
    let nats = info.value_bits.max(0.0) * LN_2;
    1.0 - (-2.0 * nats).exp()
}

/// Normalized information weights `w_j = I_j / sum_k I_k`. An all-zero vector
/// falls back to uniform weights with a warning.
pub fn information_weights(mi: &[InfoEstimate]) -> Vec<f64> {
    if mi.is_empty() {
        return Vec::new();
    }
    let total: f64 = mi.iter().map(|e| e.value_bits.max(0.0)).sum();
    if total <= 0.0 {
        log::warn!("all mutual-information estimates are zero; falling back to uniform weights");
        return vec![1.0 / mi.len() as f64; mi.len()];
    }
    mi.iter().map(|e| e.value_bits.max(0.0) / total).collect()
}
