//! Report emission: a human-readable Markdown summary plus machine-readable
//! CSV and JSON artifacts. Output is deterministic byte-for-byte given the
//! same report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::evaluate::{EvalReport, Metrics};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report contains no models")]
    EmptyReport,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    std::fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn fmt_r2(r2: f64) -> String {
    if r2 == f64::NEG_INFINITY || r2.is_nan() {
        "undefined".to_string()
    } else {
        format!("{r2:.4}")
    }
}

fn metrics_row(label: &str, m: &Metrics) -> String {
    format!("| {label} | {:.4} | {} | {:.4} |\n", m.rmse, fmt_r2(m.r2), m.mae)
}

/// Render the Markdown report: model comparison, variance decomposition,
/// and forest diagnostics tables.
pub fn render_markdown(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Model comparison report\n");
    let _ = writeln!(
        out,
        "- records: {}\n- proxy share: {:.4}\n- folds: {}\n- seed: {}\n- config digest: `{}`\n",
        report.n, report.mixture_proportion, report.cv_k, report.seed, report.config_digest
    );

    let _ = writeln!(out, "## Cross-validated performance (fold-averaged)\n");
    out.push_str("| Model | RMSE | R2 | MAE |\n|---|---|---|---|\n");
    for model in &report.models {
        out.push_str(&metrics_row(&model.family, &model.fold_mean));
    }

    let _ = writeln!(out, "\n## Cross-validated performance (pooled predictions)\n");
    out.push_str("| Model | RMSE | R2 | MAE |\n|---|---|---|---|\n");
    for model in &report.models {
        out.push_str(&metrics_row(&model.family, &model.pooled));
    }

    if let Some(shares) = &report.variance_shares {
        let _ = writeln!(out, "\n## Info-model variance decomposition\n");
        out.push_str("| Component | Share |\n|---|---|\n");
        for (name, value) in shares.as_rows() {
            let _ = writeln!(out, "| {name} | {value:.4} |");
        }
    }

    if let Some(diag) = &report.diagnostics {
        let _ = writeln!(out, "\n## Forest diagnostics\n");
        out.push_str("| Feature | Split share |\n|---|---|\n");
        for (feature, share) in &diag.split_frequency {
            let _ = writeln!(out, "| {feature} | {share:.4} |");
        }
        let _ = writeln!(
            out,
            "\n- prediction range: [{:.4}, {:.4}]",
            diag.prediction_range.0, diag.prediction_range.1
        );
        let _ = writeln!(
            out,
            "- outcome range: [{:.4}, {:.4}]",
            diag.outcome_range.0, diag.outcome_range.1
        );
        let high_purity = diag
            .leaf_proxy_fractions
            .iter()
            .filter(|&&f| f >= 0.9)
            .count();
        let _ = writeln!(
            out,
            "- leaves with proxy share >= 0.9: {} of {}",
            high_purity,
            diag.leaf_proxy_fractions.len()
        );
    }
    out
}

/// Render per-fold metrics as CSV: one row per (family, fold).
pub fn render_metrics_csv(report: &EvalReport) -> String {
    let mut out = String::from("family,fold,rmse,r2,mae,excluded\n");
    for model in &report.models {
        for (fold, m) in model.per_fold.iter().enumerate() {
            let excluded = model.excluded_folds.contains(&fold);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                model.family,
                fold,
                m.rmse,
                if m.r2.is_finite() { m.r2.to_string() } else { String::new() },
                m.mae,
                excluded
            );
        }
    }
    out
}

/// Artifact paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub markdown: PathBuf,
    pub metrics_csv: PathBuf,
    pub json: PathBuf,
    pub diagnostics_json: PathBuf,
}

/// Write `report.md`, `metrics.csv`, `report.json`, and `diagnostics.json`
/// under `dir`. Validation happens before any file is created.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<ReportPaths, ReportError> {
    if report.models.is_empty() {
        return Err(ReportError::EmptyReport);
    }
    std::fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let paths = ReportPaths {
        markdown: dir.join("report.md"),
        metrics_csv: dir.join("metrics.csv"),
        json: dir.join("report.json"),
        diagnostics_json: dir.join("diagnostics.json"),
    };
    write_file(&paths.markdown, &render_markdown(report))?;
    write_file(&paths.metrics_csv, &render_metrics_csv(report))?;
    let json = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    write_file(&paths.json, &json)?;
    let diagnostics = serde_json::json!({
        "config_digest": report.config_digest,
        "variance_shares": report.variance_shares,
        "forest": report.diagnostics,
    });
    write_file(
        &paths.diagnostics_json,
        &serde_json::to_string_pretty(&diagnostics).expect("diagnostics serialization cannot fail"),
    )?;
    Ok(paths)
}
