//! Orchestration binary: data generation, ingestion, feature ranking, model
//! fitting, comparison runs, and report emission, driven by a declarative
//! TOML config with flag overrides.
//!
//! Exit codes: 0 success, 1 validation, 2 IO, 3 invariant violation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lgdkit::baselines::{self, FittedModel};
use lgdkit::config::{ConfigError, Overrides, RunConfig};
use lgdkit::dataset::{
    apply_filters, load_dataset, save_dataset, CsvSchema, DataError, Dataset, CONTINUOUS_FEATURES,
};
use lgdkit::entropy::{
    encode_categories, joint_mutual_information, miller_madow, mutual_information, r2_ceiling,
    Condition, EntropyError, InfoEstimate,
};
use lgdkit::evaluate::{run_comparison, EvalError};
use lgdkit::infomodel::InfoModelError;
use lgdkit::report::{emit_report, ReportError};
use lgdkit::synthgen::{generate, SynthError};

#[derive(Parser)]
#[command(name = "lgdkit", about = "Information-theoretic LGD modeling toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// Declarative config file (TOML); flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input dataset CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Model families (repeatable): industry, size, linear, forest, info.
    #[arg(long = "model")]
    models: Vec<String>,
    /// Cross-validation fold count.
    #[arg(long)]
    folds: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic mixture dataset CSV plus a config sidecar.
    Generate(CommonFlags),
    /// Rank features by mutual information with the label.
    RankFeatures(CommonFlags),
    /// Fit one model family on the full dataset and export it as JSON.
    Fit(CommonFlags),
    /// Score a CSV with a previously exported model.
    Predict {
        #[command(flatten)]
        common: CommonFlags,
        /// Exported model JSON.
        #[arg(long)]
        model_file: PathBuf,
    },
    /// Cross-validate all configured families and emit the report.
    Compare(CommonFlags),
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
    fn io(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::io(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io { .. } | DataError::Csv { .. } => CliError::io(e.to_string()),
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<EntropyError> for CliError {
    fn from(e: EntropyError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<InfoModelError> for CliError {
    fn from(e: InfoModelError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<baselines::ModelError> for CliError {
    fn from(e: baselines::ModelError) -> Self {
        CliError::validation(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::StratificationViolated { .. } | EvalError::PlanMismatch(_) => {
                CliError { code: 3, message: e.to_string() }
            }
            _ => CliError::validation(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { .. } => CliError::io(e.to_string()),
            ReportError::EmptyReport => CliError::validation(e.to_string()),
        }
    }
}

fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn load_config(flags: &CommonFlags) -> Result<RunConfig, CliError> {
    let base = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let resolved = base.resolve(Overrides {
        seed: flags.seed,
        output_dir: flags.out.clone(),
        cv_k: flags.folds,
        models: flags.models.clone(),
        input: flags.input.clone(),
    })?;
    Ok(resolved)
}

fn ensure_out_dir(config: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&config.output_dir)
        .map_err(|e| CliError::io(format!("{}: {e}", config.output_dir.display())))
}

/// Echo the resolved configuration so every run is replayable.
fn echo_config(config: &RunConfig) {
    println!("# resolved config (digest {})", config.digest());
    println!("{}", config.to_toml());
}

/// Load the input CSV through the sample-selection filters, or fall back to
/// the mixture generator.
fn obtain_dataset(config: &RunConfig) -> Result<Dataset, CliError> {
    match &config.input {
        Some(path) => {
            let records = load_dataset(path, &CsvSchema::default())?;
            let (dataset, counts) = apply_filters(records, &config.filter_config())?;
            eprintln!(
                "loaded {}: {} records -> public {} -> assets {} -> complete {}",
                path.display(),
                counts.input,
                counts.public,
                counts.min_assets,
                counts.complete
            );
            Ok(dataset)
        }
        None => Ok(generate(&config.mixture)?),
    }
}

fn cmd_generate(flags: &CommonFlags) -> Result<(), CliError> {
    let config = load_config(flags)?;
    ensure_out_dir(&config)?;
    let dataset = generate(&config.mixture)?;
    let csv_path = config.output_dir.join("dataset.csv");
    save_dataset(&dataset.records, &csv_path)?;
    let sidecar = serde_json::json!({
        "config_digest": config.digest(),
        "seed": config.seed,
        "mixture": config.mixture,
        "n": dataset.len(),
        "realized_proxy_share": dataset.mixture_proportion,
    });
    write_text(
        &config.output_dir.join("dataset_config.json"),
        &serde_json::to_string_pretty(&sidecar).expect("sidecar serialization cannot fail"),
    )?;
    echo_config(&config);
    println!(
        "wrote {} ({} records, proxy share {:.4})",
        csv_path.display(),
        dataset.len(),
        dataset.mixture_proportion
    );
    Ok(())
}

struct RankedFeature {
    name: String,
    estimate: InfoEstimate,
}

fn rank_features(dataset: &Dataset, config: &RunConfig) -> Result<Vec<RankedFeature>, CliError> {
    let bins = config.bin_rule.bins(dataset.len());
    let mut ranked = Vec::new();
    for (j, name) in CONTINUOUS_FEATURES.iter().enumerate() {
        let column = dataset.continuous_column(j);
        let estimate = mutual_information(
            Condition::Continuous { values: &column, bins },
            &dataset.labels,
            bins,
        )?;
        ranked.push(RankedFeature { name: name.to_string(), estimate });
    }
    let industries: Vec<&str> = dataset.features.iter().map(|f| f.industry.as_str()).collect();
    let districts: Vec<&str> = dataset
        .features
        .iter()
        .map(|f| f.filing_district.as_str())
        .collect();
    let chapter11: Vec<u8> = dataset.features.iter().map(|f| f.chapter11 as u8).collect();
    for (name, codes, categories) in [
        ("industry", encode_categories(&industries).0, encode_categories(&industries).1),
        ("filing_district", encode_categories(&districts).0, encode_categories(&districts).1),
        ("chapter11", encode_categories(&chapter11).0, encode_categories(&chapter11).1),
    ] {
        let estimate = mutual_information(
            Condition::Categorical { codes: &codes, categories },
            &dataset.labels,
            bins,
        )?;
        ranked.push(RankedFeature { name: name.to_string(), estimate });
    }
    ranked.sort_by(|a, b| {
        b.estimate
            .value_bits
            .partial_cmp(&a.estimate.value_bits)
            .unwrap()
            .then_with(|| a.name.cmp(&b.name))
    });
    Ok(ranked)
}

fn cmd_rank_features(flags: &CommonFlags) -> Result<(), CliError> {
    let config = load_config(flags)?;
    ensure_out_dir(&config)?;
    let dataset = obtain_dataset(&config)?;
    let ranked = rank_features(&dataset, &config)?;

    let bins = config.bin_rule.bins(dataset.len());
    let mut csv = String::from("feature,mi_bits,r2_ceiling\n");
    println!("{:<18} {:>9} {:>11}", "feature", "mi_bits", "r2_ceiling");
    for r in &ranked {
        let ceiling = r2_ceiling(&r.estimate);
        csv.push_str(&format!("{},{:.6},{:.6}\n", r.name, r.estimate.value_bits, ceiling));
        println!("{:<18} {:>9.4} {:>11.4}", r.name, r.estimate.value_bits, ceiling);
    }

    // Aggregates: the per-feature sum and a joint product-cell estimate,
    // labeled distinctly (the joint form is biased upward in small samples).
    let sum_bits: f64 = ranked.iter().map(|r| r.estimate.value_bits).sum();
    let columns: Vec<Vec<f64>> = (0..CONTINUOUS_FEATURES.len())
        .map(|j| dataset.continuous_column(j))
        .collect();
    let conditions: Vec<Condition<'_>> = columns
        .iter()
        .map(|c| Condition::Continuous { values: c, bins: 2 })
        .collect();
    let joint = joint_mutual_information(&conditions, &dataset.labels, bins)?;
    let h_y = miller_madow(&lgdkit::entropy::histogram_entropy(&dataset.labels, bins)?);
    let sum_estimate = InfoEstimate { value_bits: sum_bits, ..joint };
    csv.push_str(&format!(
        "total_per_feature_sum,{sum_bits:.6},{:.6}\n",
        r2_ceiling(&sum_estimate)
    ));
    csv.push_str(&format!(
        "total_joint_continuous,{:.6},{:.6}\n",
        joint.value_bits,
        r2_ceiling(&joint)
    ));
    println!("{:<18} {:>9.4}", "label entropy", h_y.value_bits);
    println!("{:<18} {:>9.4}", "sum (features)", sum_bits);
    println!("{:<18} {:>9.4}", "joint (contin.)", joint.value_bits);

    write_text(&config.output_dir.join("feature_rank.csv"), &csv)?;
    echo_config(&config);
    Ok(())
}

fn cmd_fit(flags: &CommonFlags) -> Result<(), CliError> {
    let config = load_config(flags)?;
    ensure_out_dir(&config)?;
    if config.models.len() != 1 {
        return Err(CliError::validation(
            "fit requires exactly one --model family",
        ));
    }
    let dataset = obtain_dataset(&config)?;
    let spec = config.spec_for(&config.models[0])?.with_seed(config.seed);
    let model = baselines::fit(&spec, &dataset)?;
    let payload = serde_json::json!({
        "config_digest": config.digest(),
        "seed": config.seed,
        "n": dataset.len(),
        "model": model,
    });
    let path = config.output_dir.join("model.json");
    write_text(
        &path,
        &serde_json::to_string_pretty(&payload).expect("model serialization cannot fail"),
    )?;
    echo_config(&config);
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_predict(common: &CommonFlags, model_file: &Path) -> Result<(), CliError> {
    let config = load_config(common)?;
    ensure_out_dir(&config)?;
    let input = config
        .input
        .clone()
        .ok_or_else(|| CliError::validation("predict requires --input"))?;
    let text = std::fs::read_to_string(model_file)
        .map_err(|e| CliError::io(format!("{}: {e}", model_file.display())))?;
    let payload: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("model JSON: {e}")))?;
    let model: FittedModel = serde_json::from_value(
        payload
            .get("model")
            .cloned()
            .unwrap_or_else(|| payload.clone()),
    )
    .map_err(|e| CliError::validation(format!("model JSON: {e}")))?;

    let records = load_dataset(&input, &CsvSchema::default())?;
    let dataset = Dataset::from_records(records)?;
    let mut out = String::from("firm_id,prediction,lgd\n");
    for (record, features) in dataset.records.iter().zip(&dataset.features) {
        let p = model.predict(features);
        out.push_str(&format!("{},{},{}\n", record.firm_id, p, record.lgd));
    }
    let path = config.output_dir.join("predictions.csv");
    write_text(&path, &out)?;
    println!("wrote {} ({} rows)", path.display(), dataset.len());
    Ok(())
}

fn cmd_compare(flags: &CommonFlags) -> Result<(), CliError> {
    let config = load_config(flags)?;
    ensure_out_dir(&config)?;
    let dataset = obtain_dataset(&config)?;
    let specs = config.model_specs()?;
    let report = run_comparison(&dataset, &specs, config.cv_k, config.seed)?;
    let paths = emit_report(&report, &config.output_dir)?;
    echo_config(&config);
    println!("wrote {}", paths.markdown.display());
    for model in &report.models {
        println!(
            "{:<18} rmse {:.4}  r2 {:>8.4}  mae {:.4}",
            model.family, model.fold_mean.rmse, model.fold_mean.r2, model.fold_mean.mae
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(flags) => cmd_generate(flags),
        Command::RankFeatures(flags) => cmd_rank_features(flags),
        Command::Fit(flags) => cmd_fit(flags),
        Command::Predict { common, model_file } => cmd_predict(common, model_file),
        Command::Compare(flags) => cmd_compare(flags),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
