//! Firm-network centrality: an undirected graph with an edge between firms
//! sharing both industry and filing district, summarized as degree
//! normalized by (n - 1). A stand-in construction, swappable by config.

use std::collections::BTreeMap;

use crate::dataset::Dataset;

/// Per-row normalized degree centrality. Isolated firms get 0.
pub fn network_centrality(data: &Dataset) -> Vec<f64> {
    let n = data.len();
    if n <= 1 {
        return vec![0.0; n];
    }
    let counts = pair_counts(data);
    data.features
        .iter()
        .map(|f| {
            let group = counts
                .get(&(f.industry.clone(), f.filing_district.clone()))
                .copied()
                .unwrap_or(0);
            (group.saturating_sub(1)) as f64 / (n - 1) as f64
        })
        .collect()
}

/// Group sizes keyed by (industry, district); a firm's degree is its group
/// size minus itself.
pub fn pair_counts(data: &Dataset) -> BTreeMap<(String, String), usize> {
    let mut counts = BTreeMap::new();
    for f in &data.features {
        *counts
            .entry((f.industry.clone(), f.filing_district.clone()))
            .or_insert(0) += 1;
    }
    counts
}
