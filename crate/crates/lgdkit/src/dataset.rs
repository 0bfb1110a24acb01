//! Data model, CSV ingestion, sample filtering, loss-given-default label
//! construction, and feature derivation.
//!
//! All types are immutable after construction and safe to share read-only
//! across workers. Ingestion is single-threaded.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no records remain after filtering")]
    EmptyDataset,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("duplicate firm id `{0}`")]
    DuplicateFirmId(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

/// Measurement provenance of a record's LGD label: a court-documented
/// recovery outcome, or a proxy estimate from the pre-distress balance sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    TrueOutcome,
    Proxy,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::TrueOutcome => "true_outcome",
            Provenance::Proxy => "proxy",
        }
    }
}

/// One bankruptcy case: raw financials, categorical attributes, the outcome
/// label, and its measurement provenance. Currency fields are raw USD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirmRecord {
    pub firm_id: String,
    pub total_assets: f64,
    pub total_liabilities: f64,
    pub total_debt: f64,
    pub total_equity: f64,
    pub current_assets: f64,
    pub current_liabilities: f64,
    pub cash: f64,
    pub industry: String,
    pub filing_district: String,
    pub chapter11: bool,
    pub is_public: bool,
    pub provenance: Provenance,
    pub recovered: Option<f64>,
    pub outstanding: Option<f64>,
    pub lgd: f64,
}

impl FirmRecord {
    /// Check the record invariants: label in [0,1], non-negative assets and
    /// liabilities, and recovery fields present exactly for documented cases.
    pub fn validate(&self) -> Result<(), DataError> {
        if !(0.0..=1.0).contains(&self.lgd) || !self.lgd.is_finite() {
            return Err(DataError::InvalidInput(format!(
                "firm {}: lgd {} outside [0,1]",
                self.firm_id, self.lgd
            )));
        }
        if !(self.total_assets >= 0.0) {
            return Err(DataError::InvalidInput(format!(
                "firm {}: total_assets {} must be >= 0",
                self.firm_id, self.total_assets
            )));
        }
        if !(self.total_liabilities >= 0.0) {
            return Err(DataError::InvalidInput(format!(
                "firm {}: total_liabilities {} must be >= 0",
                self.firm_id, self.total_liabilities
            )));
        }
        if self.provenance == Provenance::TrueOutcome {
            match (self.recovered, self.outstanding) {
                (Some(r), Some(o)) if o > 0.0 && r >= 0.0 => {}
                _ => {
                    return Err(DataError::InvalidInput(format!(
                        "firm {}: documented outcome requires recovered >= 0 and outstanding > 0",
                        self.firm_id
                    )))
                }
            }
        }
        Ok(())
    }
}

/// Names of the derived features, continuous block first. Model code indexes
/// features by position in this list.
pub const CONTINUOUS_FEATURES: [&str; 6] = [
    "debt_to_assets",
    "debt_to_equity",
    "current_ratio",
    "cash_to_assets",
    "log_assets",
    "log_liabilities",
];
pub const CATEGORICAL_FEATURES: [&str; 3] = ["industry", "filing_district", "chapter11"];

pub fn feature_names() -> Vec<String> {
    CONTINUOUS_FEATURES
        .iter()
        .chain(CATEGORICAL_FEATURES.iter())
        .map(|s| s.to_string())
        .collect()
}

/// The balance-sheet feature set: leverage, liquidity, and size ratios plus
/// the categorical court and industry attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub debt_to_assets: f64,
    pub debt_to_equity: f64,
    pub current_ratio: f64,
    pub cash_to_assets: f64,
    pub log_assets: f64,
    pub log_liabilities: f64,
    pub industry: String,
    pub filing_district: String,
    pub chapter11: bool,
}

/// A feature value viewed by split/search code: numeric or categorical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue<'a> {
    Num(f64),
    Cat(&'a str),
}

impl FeatureVector {
    pub const NUM_FEATURES: usize = 9;

    /// Continuous feature by index into [`CONTINUOUS_FEATURES`].
    pub fn continuous(&self, idx: usize) -> f64 {
        match idx {
            0 => self.debt_to_assets,
            1 => self.debt_to_equity,
            2 => self.current_ratio,
            3 => self.cash_to_assets,
            4 => self.log_assets,
            5 => self.log_liabilities,
            _ => panic!("continuous feature index {idx} out of range"),
        }
    }

    /// Feature by global index: 0..6 continuous, 6 industry, 7 district,
    /// 8 chapter-11 indicator (numeric 0/1).
    pub fn value(&self, idx: usize) -> FeatureValue<'_> {
        match idx {
            0..=5 => FeatureValue::Num(self.continuous(idx)),
            6 => FeatureValue::Cat(&self.industry),
            7 => FeatureValue::Cat(&self.filing_district),
            8 => FeatureValue::Num(if self.chapter11 { 1.0 } else { 0.0 }),
            _ => panic!("feature index {idx} out of range"),
        }
    }

    fn all_finite(&self) -> bool {
        (0..6).all(|i| self.continuous(i).is_finite())
    }
}

/// Ordered collection of records with the derived feature matrix and label
/// vector kept parallel, plus the realized proxy mixing proportion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<FirmRecord>,
    pub features: Vec<FeatureVector>,
    pub labels: Vec<f64>,
    pub mixture_proportion: f64,
}

impl Dataset {
    /// Build a dataset from validated records, deriving features and labels.
    pub fn from_records(records: Vec<FirmRecord>) -> Result<Self, DataError> {
        if records.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        let mut features = Vec::with_capacity(records.len());
        for r in &records {
            r.validate()?;
            let f = build_features(r);
            if !f.all_finite() {
                return Err(DataError::InvalidInput(format!(
                    "firm {}: non-finite derived feature",
                    r.firm_id
                )));
            }
            features.push(f);
        }
        let labels: Vec<f64> = records.iter().map(|r| r.lgd).collect();
        let proxies = records
            .iter()
            .filter(|r| r.provenance == Provenance::Proxy)
            .count();
        Ok(Dataset {
            mixture_proportion: proxies as f64 / records.len() as f64,
            records,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Row subset by index, with the mixture proportion recomputed.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let records: Vec<FirmRecord> = indices.iter().map(|&i| self.records[i].clone()).collect();
        let features = indices.iter().map(|&i| self.features[i].clone()).collect();
        let labels: Vec<f64> = indices.iter().map(|&i| self.labels[i]).collect();
        let proxies = records
            .iter()
            .filter(|r| r.provenance == Provenance::Proxy)
            .count();
        Dataset {
            mixture_proportion: if records.is_empty() {
                0.0
            } else {
                proxies as f64 / records.len() as f64
            },
            records,
            features,
            labels,
        }
    }

    /// Continuous feature as a column vector.
    pub fn continuous_column(&self, idx: usize) -> Vec<f64> {
        self.features.iter().map(|f| f.continuous(idx)).collect()
    }
}

/// LGD from a court-documented recovery: `1 - recovered / outstanding`,
/// clamped to [0,1]. Recoveries above the outstanding amount (post-petition
/// interest artifacts) clamp to 0 with a data-quality warning.
pub fn lgd_true(recovered: f64, outstanding: f64) -> Result<f64, DataError> {
    if !outstanding.is_finite() || outstanding <= 0.0 {
        return Err(DataError::InvalidInput(format!(
            "outstanding must be positive, got {outstanding}"
        )));
    }
    if !recovered.is_finite() || recovered < 0.0 {
        return Err(DataError::InvalidInput(format!(
            "recovered must be non-negative, got {recovered}"
        )));
    }
    if recovered > outstanding {
        log::warn!(
            "recovered {recovered} exceeds outstanding {outstanding}; clamping LGD to 0"
        );
    }
    Ok((1.0 - recovered / outstanding).clamp(0.0, 1.0))
}

/// Proxy LGD from the pre-distress balance sheet:
/// `1 - min(assets / liabilities, 1)`.
pub fn lgd_proxy(assets: f64, liabilities: f64) -> Result<f64, DataError> {
    if !liabilities.is_finite() || liabilities <= 0.0 {
        return Err(DataError::InvalidInput(format!(
            "liabilities must be positive, got {liabilities}"
        )));
    }
    if !assets.is_finite() || assets < 0.0 {
        return Err(DataError::InvalidInput(format!(
            "assets must be non-negative, got {assets}"
        )));
    }
    Ok(1.0 - (assets / liabilities).min(1.0))
}

/// Cap applied to balance-sheet ratios with degenerate denominators.
pub const RATIO_CAP: f64 = 1000.0;

/// Ratio with a cap at +/-1000 by numerator sign. A non-positive denominator
/// (zero or negative equity and the like) maps to the cap directly, which
/// preserves the distress ordering as the denominator crosses zero.
fn capped_ratio(numerator: f64, denominator: f64) -> f64 {
    if denominator <= 0.0 {
        if numerator == 0.0 {
            0.0
        } else {
            RATIO_CAP.copysign(numerator)
        }
    } else {
        (numerator / denominator).clamp(-RATIO_CAP, RATIO_CAP)
    }
}

/// Derive the feature vector from balance-sheet fields. Logs are natural
/// logs. Total on filtered records; degenerate denominators cap rather than
/// produce non-finite ratios.
pub fn build_features(record: &FirmRecord) -> FeatureVector {
    FeatureVector {
        debt_to_assets: capped_ratio(record.total_debt, record.total_assets),
        debt_to_equity: capped_ratio(record.total_debt, record.total_equity),
        current_ratio: capped_ratio(record.current_assets, record.current_liabilities),
        cash_to_assets: capped_ratio(record.cash, record.total_assets),
        log_assets: record.total_assets.ln(),
        log_liabilities: record.total_liabilities.ln(),
        industry: record.industry.clone(),
        filing_district: record.filing_district.clone(),
        chapter11: record.chapter11,
    }
}

/// Sample-selection thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Minimum total assets at filing, USD.
    pub min_assets: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { min_assets: 100e6 }
    }
}

/// Records surviving each selection stage, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounts {
    pub input: usize,
    pub public: usize,
    pub min_assets: usize,
    pub complete: usize,
}

fn has_complete_financials(record: &FirmRecord) -> bool {
    let fields = [
        record.total_assets,
        record.total_liabilities,
        record.total_debt,
        record.total_equity,
        record.current_assets,
        record.current_liabilities,
        record.cash,
    ];
    fields.iter().all(|v| v.is_finite()) && build_features(record).all_finite()
}

/// Apply the sample-selection criteria in order: public companies, the asset
/// threshold, then complete financial data (every field the feature set
/// needs, finite after derivation). Returns the filtered dataset plus the
/// per-stage retention counts.
pub fn apply_filters(
    raw: Vec<FirmRecord>,
    config: &FilterConfig,
) -> Result<(Dataset, FilterCounts), DataError> {
    let input = raw.len();
    let public: Vec<FirmRecord> = raw.into_iter().filter(|r| r.is_public).collect();
    let n_public = public.len();
    let large: Vec<FirmRecord> = public
        .into_iter()
        .filter(|r| r.total_assets > config.min_assets)
        .collect();
    let n_large = large.len();
    let complete: Vec<FirmRecord> = large.into_iter().filter(has_complete_financials).collect();
    let counts = FilterCounts {
        input,
        public: n_public,
        min_assets: n_large,
        complete: complete.len(),
    };
    let dataset = Dataset::from_records(complete)?;
    Ok((dataset, counts))
}

/// Canonical CSV column names, in write order.
pub const CSV_COLUMNS: [&str; 16] = [
    "firm_id",
    "total_assets",
    "total_liabilities",
    "total_debt",
    "total_equity",
    "current_assets",
    "current_liabilities",
    "cash",
    "industry",
    "filing_district",
    "chapter11",
    "is_public",
    "provenance",
    "recovered",
    "outstanding",
    "lgd",
];

/// Mapping from canonical field names to the CSV header names of a
/// particular file. Defaults to the identity mapping over [`CSV_COLUMNS`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub columns: BTreeMap<String, String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            columns: CSV_COLUMNS
                .iter()
                .map(|c| (c.to_string(), c.to_string()))
                .collect(),
        }
    }
}

impl CsvSchema {
    fn header_name<'a>(&'a self, field: &'a str) -> &'a str {
        self.columns.get(field).map(String::as_str).unwrap_or(field)
    }
}

struct ColumnIndex {
    required: BTreeMap<&'static str, usize>,
    optional: BTreeMap<&'static str, usize>,
}

const OPTIONAL_COLUMNS: [&str; 4] = ["provenance", "recovered", "outstanding", "lgd"];

fn index_columns(headers: &csv::StringRecord, schema: &CsvSchema) -> Result<ColumnIndex, DataError> {
    let position = |name: &str| headers.iter().position(|h| h.trim() == name);
    let mut required = BTreeMap::new();
    for field in CSV_COLUMNS {
        if OPTIONAL_COLUMNS.contains(&field) {
            continue;
        }
        let header = schema.header_name(field);
        match position(header) {
            Some(i) => {
                required.insert(field, i);
            }
            None => return Err(DataError::MissingColumn(header.to_string())),
        }
    }
    let mut optional = BTreeMap::new();
    for field in OPTIONAL_COLUMNS {
        if let Some(i) = position(schema.header_name(field)) {
            optional.insert(field, i);
        }
    }
    Ok(ColumnIndex { required, optional })
}

fn parse_f64(raw: &str, field: &str, row: usize) -> Result<f64, DataError> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        // Missing numerics flow through as NaN and fail the completeness
        // filter rather than aborting the load.
        return Ok(f64::NAN);
    }
    trimmed.parse::<f64>().map_err(|_| DataError::Row {
        row,
        message: format!("unparseable numeric `{trimmed}` in column {field}"),
    })
}

fn parse_opt_f64(raw: Option<&str>, field: &str, row: usize) -> Result<Option<f64>, DataError> {
    match raw {
        None => Ok(None),
        Some(s) if s.trim().is_empty() => Ok(None),
        Some(s) => {
            let v = s.trim().parse::<f64>().map_err(|_| DataError::Row {
                row,
                message: format!("unparseable numeric `{}` in column {field}", s.trim()),
            })?;
            Ok(Some(v))
        }
    }
}

fn parse_bool(raw: &str, field: &str, row: usize) -> Result<bool, DataError> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Ok(true),
        "false" | "0" | "no" | "n" => Ok(false),
        other => Err(DataError::Row {
            row,
            message: format!("unparseable boolean `{other}` in column {field}"),
        }),
    }
}

fn parse_provenance(raw: &str, row: usize) -> Result<Provenance, DataError> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true_outcome" | "trueoutcome" | "true" | "documented" => Ok(Provenance::TrueOutcome),
        "proxy" => Ok(Provenance::Proxy),
        other => Err(DataError::Row {
            row,
            message: format!("unknown provenance `{other}`"),
        }),
    }
}

/// Load firm records from a CSV file under the given schema mapping.
///
/// The `lgd` and `provenance` columns are optional: when absent, provenance
/// is inferred from the presence of recovery fields and the label is built
/// via [`lgd_true`] / [`lgd_proxy`]. Rows with unparseable values or
/// invariant violations are rejected with their row index.
pub fn load_dataset(path: &Path, schema: &CsvSchema) -> Result<Vec<FirmRecord>, DataError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: display.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|source| DataError::Csv {
            path: display.clone(),
            source,
        })?
        .clone();
    let index = index_columns(&headers, schema)?;

    let mut records = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (i, result) in reader.records().enumerate() {
        let row = i + 1; // 1-based data-row index
        let record = result.map_err(|source| DataError::Csv {
            path: display.clone(),
            source,
        })?;
        let get = |field: &str| -> &str {
            index
                .required
                .get(field)
                .and_then(|&c| record.get(c))
                .unwrap_or("")
        };
        let get_opt = |field: &str| -> Option<&str> {
            index.optional.get(field).and_then(|&c| record.get(c))
        };

        let firm_id = get("firm_id").trim().to_string();
        if firm_id.is_empty() {
            return Err(DataError::Row {
                row,
                message: "empty firm_id".to_string(),
            });
        }
        if !seen_ids.insert(firm_id.clone()) {
            return Err(DataError::DuplicateFirmId(firm_id));
        }

        let total_assets = parse_f64(get("total_assets"), "total_assets", row)?;
        let total_liabilities = parse_f64(get("total_liabilities"), "total_liabilities", row)?;
        let recovered = parse_opt_f64(get_opt("recovered"), "recovered", row)?;
        let outstanding = parse_opt_f64(get_opt("outstanding"), "outstanding", row)?;

        let provenance = match get_opt("provenance") {
            Some(s) if !s.trim().is_empty() => parse_provenance(s, row)?,
            _ => {
                if recovered.is_some() && outstanding.is_some() {
                    Provenance::TrueOutcome
                } else {
                    Provenance::Proxy
                }
            }
        };

        let lgd = match parse_opt_f64(get_opt("lgd"), "lgd", row)? {
            Some(v) => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(DataError::Row {
                        row,
                        message: format!("lgd {v} outside [0,1]"),
                    });
                }
                v
            }
            None => match provenance {
                Provenance::TrueOutcome => {
                    let (r, o) = match (recovered, outstanding) {
                        (Some(r), Some(o)) => (r, o),
                        _ => {
                            return Err(DataError::Row {
                                row,
                                message: "documented outcome lacks recovered/outstanding"
                                    .to_string(),
                            })
                        }
                    };
                    lgd_true(r, o).map_err(|e| DataError::Row {
                        row,
                        message: e.to_string(),
                    })?
                }
                Provenance::Proxy => lgd_proxy(total_assets, total_liabilities).map_err(|e| {
                    DataError::Row {
                        row,
                        message: e.to_string(),
                    }
                })?,
            },
        };

        let rec = FirmRecord {
            firm_id,
            total_assets,
            total_liabilities,
            total_debt: parse_f64(get("total_debt"), "total_debt", row)?,
            total_equity: parse_f64(get("total_equity"), "total_equity", row)?,
            current_assets: parse_f64(get("current_assets"), "current_assets", row)?,
            current_liabilities: parse_f64(get("current_liabilities"), "current_liabilities", row)?,
            cash: parse_f64(get("cash"), "cash", row)?,
            industry: get("industry").trim().to_string(),
            filing_district: get("filing_district").trim().to_string(),
            chapter11: parse_bool(get("chapter11"), "chapter11", row)?,
            is_public: parse_bool(get("is_public"), "is_public", row)?,
            provenance,
            recovered,
            outstanding,
            lgd,
        };
        rec.validate().map_err(|e| DataError::Row {
            row,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

/// Write records as CSV in the canonical schema (all columns, including
/// `lgd` and `provenance`).
pub fn save_dataset(records: &[FirmRecord], path: &Path) -> Result<(), DataError> {
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|source| DataError::Csv {
        path: display.clone(),
        source,
    })?;
    let io_err = |source: csv::Error| DataError::Csv {
        path: display.clone(),
        source,
    };
    writer.write_record(CSV_COLUMNS).map_err(io_err)?;
    let fmt = |v: f64| {
        if v.is_finite() {
            format!("{v}")
        } else {
            String::new()
        }
    };
    for r in records {
        writer
            .write_record([
                r.firm_id.as_str(),
                &fmt(r.total_assets),
                &fmt(r.total_liabilities),
                &fmt(r.total_debt),
                &fmt(r.total_equity),
                &fmt(r.current_assets),
                &fmt(r.current_liabilities),
                &fmt(r.cash),
                r.industry.as_str(),
                r.filing_district.as_str(),
                if r.chapter11 { "true" } else { "false" },
                if r.is_public { "true" } else { "false" },
                r.provenance.as_str(),
                &r.recovered.map(fmt).unwrap_or_default(),
                &r.outstanding.map(fmt).unwrap_or_default(),
                &fmt(r.lgd),
            ])
            .map_err(|source| DataError::Csv {
                path: display.clone(),
                source,
            })?;
    }
    writer.flush().map_err(|source| DataError::Io {
        path: display,
        source,
    })?;
    Ok(())
}
