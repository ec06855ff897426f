//! Command-line pipeline: extract, train, eval, explain, ablate, synth.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio::{read_wav, resample, trim_endpoints, write_wav_f32, VadConfig};
use crate::config::PipelineConfig;
use crate::dataset::{
    load_csv, prune_correlated, save_csv, FeatureMatrix, RecordMeta,
};
use crate::error::{Error, Result};
use crate::eval::{ablation, evaluate, fit_training_set, AblationMode, EvalReport, StrataSpec};
use crate::explain::{
    attributions_to_csv, curve_to_tsv, global_importance, shap_validation_curve, tree_shap,
    ImportanceReport, ShapAttribution,
};
use crate::features::{extract_features, feature_names};
use crate::learn::{model_from_json, BoostConfig, ForestConfig, TrainerConfig};
use crate::synth::{synth_cohort, CohortSpec, ExpectationSheet};

#[derive(Parser)]
#[command(
    name = "voxscreen",
    version,
    about = "Dysphonia screening pipeline: features, tree ensembles, LOOCV, SHAP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the feature matrix from a manifest of WAV recordings.
    Extract(ExtractArgs),
    /// Train a model on a feature CSV and save it as JSON.
    Train(TrainArgs),
    /// Leave-one-out evaluation with metrics, strata, and a report.
    Eval(EvalArgs),
    /// SHAP attributions, global importance, and the validation curve.
    Explain(ExplainArgs),
    /// Remove-lab / remove-random-fraction robustness experiments.
    Ablate(AblateArgs),
    /// Generate a synthetic cohort with known ground truth.
    Synth(SynthArgs),
}

#[derive(Args)]
struct ExtractArgs {
    /// Manifest CSV: id,path,label,gender,age,environment,country.
    #[arg(long)]
    manifest: PathBuf,
    /// Output feature CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-recording JSON report (default: <out>.extract.json).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Canonical analysis rate; every recording is resampled here.
    #[arg(long, default_value_t = crate::audio::CANONICAL_RATE)]
    sample_rate: u32,
    #[arg(long, default_value_t = 60.0)]
    f0_floor: f64,
    #[arg(long, default_value_t = 400.0)]
    f0_ceil: f64,
    #[arg(long, default_value_t = 0.45)]
    voicing_threshold: f64,
    /// Also emit the correlation-pruned feature variants.
    #[arg(long, default_value_t = false)]
    all_features: bool,
    /// JSON file overriding the RPDE/DFA settings (`{"embed": {..},
    /// "dfa": {..}}`); deliberately not exposed as flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Extraction config file: optional overrides for the nonlinear measures.
#[derive(Debug, Default, Serialize, Deserialize)]
struct FeatureOverrides {
    #[serde(default)]
    embed: Option<crate::features::EmbedConfig>,
    #[serde(default)]
    dfa: Option<crate::features::DfaConfig>,
}

#[derive(Args, Clone)]
struct LearnArgs {
    /// Learner: "boosted" or "forest".
    #[arg(long, default_value = "boosted")]
    trainer: String,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    mtry: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    n_rounds: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    min_child_weight: Option<f64>,
    /// Correlation-pruning threshold.
    #[arg(long, default_value_t = 0.9)]
    threshold: f64,
    /// Neighbours considered by the minority oversampler.
    #[arg(long, default_value_t = 5)]
    smote_k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl LearnArgs {
    fn trainer_config(&self) -> Result<TrainerConfig> {
        match self.trainer.as_str() {
            "boosted" => {
                let d = BoostConfig::default();
                Ok(TrainerConfig::Boosted(BoostConfig {
                    n_rounds: self.n_rounds.unwrap_or(d.n_rounds),
                    max_depth: self.max_depth.unwrap_or(d.max_depth),
                    learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
                    lambda: self.lambda.unwrap_or(d.lambda),
                    min_child_weight: self.min_child_weight.unwrap_or(d.min_child_weight),
                    seed: self.seed,
                }))
            }
            "forest" => {
                let d = ForestConfig::default();
                Ok(TrainerConfig::Forest(ForestConfig {
                    n_trees: self.n_trees.unwrap_or(d.n_trees),
                    max_depth: self.max_depth.unwrap_or(d.max_depth),
                    mtry: self.mtry,
                    min_leaf: self.min_leaf.unwrap_or(d.min_leaf),
                    seed: self.seed,
                }))
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown trainer {other:?}, expected boosted or forest"
            ))),
        }
    }

    fn pipeline_config(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            prune_threshold: self.threshold,
            smote_k: self.smote_k,
            trainer: self.trainer_config()?,
            seed: self.seed,
            ..Default::default()
        })
    }

    fn display_name(&self) -> &str {
        match self.trainer.as_str() {
            "forest" => "RandomForest",
            _ => "BoostedTrees",
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Output model JSON.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    learn: LearnArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Output report JSON.
    #[arg(long)]
    report: PathBuf,
    /// Stratum families, e.g. "gender,age50,environment".
    #[arg(long, default_value = "gender,age50,environment")]
    strata: String,
    #[command(flatten)]
    learn: LearnArgs,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Output directory for attributions.csv, importance.json, curve.tsv.
    #[arg(long)]
    out_dir: PathBuf,
    /// Explain an existing model instead of training one.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Validation-curve length (0 disables the curve).
    #[arg(long, default_value_t = 20)]
    curve_k: usize,
    #[command(flatten)]
    learn: LearnArgs,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Output JSON.
    #[arg(long)]
    out: PathBuf,
    /// "remove-lab" or "remove-random".
    #[arg(long)]
    mode: String,
    #[arg(long, default_value_t = 0.07)]
    fraction: f64,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[command(flatten)]
    learn: LearnArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for WAVs, manifest.csv, expected.json.
    #[arg(long)]
    out_dir: PathBuf,
    /// Cohort spec JSON; a built-in two-class cohort when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(args) => cmd_extract(&args),
        Command::Train(args) => cmd_train(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::Explain(args) => cmd_explain(&args),
        Command::Ablate(args) => cmd_ablate(&args),
        Command::Synth(args) => cmd_synth(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ExtractReport {
    version: String,
    fingerprint: String,
    seed: u64,
    records: Vec<ExtractRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExtractRecord {
    id: String,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trim_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trim_end: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speech_detected: Option<bool>,
}

fn cmd_extract(args: &ExtractArgs) -> Result<()> {
    let manifest = read_manifest(&args.manifest)?;
    if manifest.is_empty() {
        return Err(Error::Schema("manifest has no rows".into()));
    }

    let config = PipelineConfig {
        sample_rate: args.sample_rate,
        f0_floor: args.f0_floor,
        f0_ceil: args.f0_ceil,
        voicing_threshold: args.voicing_threshold,
        all_features: args.all_features,
        seed: args.seed,
        ..Default::default()
    };
    let fingerprint = config.fingerprint();
    let mut feature_cfg = config.feature_config();
    if let Some(path) = &args.config {
        let overrides: FeatureOverrides = serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(embed) = overrides.embed {
            feature_cfg.embed = embed;
        }
        if let Some(dfa) = overrides.dfa {
            feature_cfg.dfa = dfa;
        }
    }
    let vad = VadConfig::default();

    // row values plus the trim span and speech flag for the report
    type Extracted = (Vec<Option<f64>>, usize, usize, bool);
    let results: Vec<(RecordMeta, std::result::Result<Extracted, String>)> =
        manifest
            .par_iter()
            .map(|(meta, path)| {
                let outcome = (|| -> Result<Extracted> {
                    let raw = read_wav(path)?;
                    let canonical = resample(&raw, args.sample_rate)?;
                    let trimmed = trim_endpoints(&canonical, &vad);
                    let (classic, nonlinear) = extract_features(&trimmed.buffer, &feature_cfg)?;
                    let row = crate::features::feature_row(&classic, &nonlinear, args.all_features);
                    Ok((
                        row,
                        trimmed.bounds.start,
                        trimmed.bounds.end,
                        trimmed.speech_detected,
                    ))
                })();
                (meta.clone(), outcome.map_err(|e| e.to_string()))
            })
            .collect();

    let names = feature_names(args.all_features);
    let mut rows = Vec::new();
    let mut meta = Vec::new();
    let mut records = Vec::new();
    let mut failures = 0usize;
    for (m, outcome) in results {
        match outcome {
            Ok((row, start, end, speech)) => {
                records.push(ExtractRecord {
                    id: m.id.clone(),
                    status: "ok".into(),
                    error: None,
                    trim_start: Some(start),
                    trim_end: Some(end),
                    speech_detected: Some(speech),
                });
                rows.push(row);
                meta.push(m);
            }
            Err(e) => {
                eprintln!("skipping {}: {e}", m.id);
                failures += 1;
                records.push(ExtractRecord {
                    id: m.id.clone(),
                    status: "error".into(),
                    error: Some(e),
                    trim_start: None,
                    trim_end: None,
                    speech_detected: None,
                });
            }
        }
    }

    if rows.is_empty() {
        return Err(Error::InsufficientSignal(
            "every recording failed extraction".into(),
        ));
    }

    let matrix = FeatureMatrix::new(names, rows, meta)?;
    save_csv(&matrix, &args.out)?;

    let report = ExtractReport {
        version: "extract-report/1".into(),
        fingerprint,
        seed: args.seed,
        records,
    };
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.out.with_extension("extract.json"));
    fs::write(&report_path, serde_json::to_string_pretty(&report).unwrap())?;

    println!(
        "extracted {} of {} recordings -> {} ({} skipped)",
        matrix.n_rows(),
        matrix.n_rows() + failures,
        args.out.display(),
        failures
    );
    Ok(())
}

fn read_manifest(path: &Path) -> Result<Vec<(RecordMeta, PathBuf)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let expected = ["id", "path", "label", "gender", "age", "environment", "country"];
    for (i, want) in expected.iter().enumerate() {
        if header.get(i) != Some(want) {
            return Err(Error::Schema(format!(
                "manifest column {i} is {:?}, expected {want:?}",
                header.get(i).unwrap_or("")
            )));
        }
    }
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut out = Vec::new();
    for record in rdr.records() {
        let r = record.map_err(|e| Error::Parse(e.to_string()))?;
        let meta = RecordMeta::new(
            r[0].to_string(),
            crate::dataset::Label::parse(&r[2])?,
            crate::dataset::Gender::parse(&r[3])?,
            r[4].parse()
                .map_err(|_| Error::Parse(format!("bad age {:?}", &r[4])))?,
            crate::dataset::Environment::parse(&r[5])?,
            r[6].to_string(),
        );
        let p = PathBuf::from(&r[1]);
        let p = if p.is_relative() { base.join(p) } else { p };
        out.push((meta, p));
    }
    Ok(out)
}

fn load_and_prune(matrix_path: &Path, threshold: f64) -> Result<FeatureMatrix> {
    let matrix = load_csv(matrix_path)?;
    let (pruned, dropped) = prune_correlated(&matrix, threshold)?;
    if !dropped.is_empty() {
        eprintln!(
            "pruned {} correlated feature(s): {}",
            dropped.len(),
            dropped.join(", ")
        );
    }
    Ok(pruned)
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let config = args.learn.pipeline_config()?;
    let pruned = load_and_prune(&args.matrix, args.learn.threshold)?;
    let fold = fit_training_set(
        &pruned,
        &config.trainer,
        args.learn.smote_k,
        args.learn.seed,
    )?;
    let json = crate::learn::model_to_json_with_meta(
        &fold.model,
        Some(&config.fingerprint()),
        Some(args.learn.seed),
    );
    fs::write(&args.model, json)?;
    println!(
        "trained {} on {} rows x {} features -> {}",
        args.learn.display_name(),
        pruned.n_rows(),
        pruned.n_features(),
        args.model.display()
    );
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let config = args.learn.pipeline_config()?;
    let strata = StrataSpec::parse(&args.strata)?;
    let pruned = load_and_prune(&args.matrix, args.learn.threshold)?;
    let report = evaluate(
        &pruned,
        &config.trainer,
        args.learn.smote_k,
        args.learn.seed,
        &config.fingerprint(),
        &strata,
    )?;
    fs::write(&args.report, report.to_json())?;
    print!(
        "{}",
        crate::eval::format_performance_table(&[(
            args.learn.display_name().to_string(),
            report.auc,
            report.accuracy,
        )])
    );
    println!("report -> {}", args.report.display());
    Ok(())
}

fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    let config = args.learn.pipeline_config()?;
    let fingerprint = config.fingerprint();
    let pruned = load_and_prune(&args.matrix, args.learn.threshold)?;
    fs::create_dir_all(&args.out_dir)?;

    // model: load if given, otherwise train on the full pruned matrix
    let (model, medians) = match &args.model {
        Some(path) => {
            let model = model_from_json(&fs::read_to_string(path)?)?;
            if model.feature_names != pruned.feature_names {
                return Err(Error::Schema(
                    "model features do not match the pruned matrix".into(),
                ));
            }
            (model, pruned.column_medians())
        }
        None => {
            let fold = fit_training_set(
                &pruned,
                &config.trainer,
                args.learn.smote_k,
                args.learn.seed,
            )?;
            (fold.model, fold.medians)
        }
    };

    let mut attributions: Vec<ShapAttribution> = Vec::with_capacity(pruned.n_rows());
    for (row, meta) in pruned.rows.iter().zip(&pruned.meta) {
        let dense: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, v)| v.unwrap_or(medians[j]))
            .collect();
        attributions.push(tree_shap(&model, &dense, &meta.id)?);
    }
    fs::write(
        args.out_dir.join("attributions.csv"),
        attributions_to_csv(&attributions, &pruned.feature_names),
    )?;

    let importance = global_importance(&attributions, &pruned.feature_names)?;
    let importance_report = ImportanceReport::new(&importance, &fingerprint, args.learn.seed);
    fs::write(
        args.out_dir.join("importance.json"),
        serde_json::to_string_pretty(&importance_report).unwrap(),
    )?;
    println!("top features: {}", importance.top(5).join(", "));

    if args.curve_k > 0 {
        let points = shap_validation_curve(
            &pruned,
            &importance,
            &config.trainer,
            args.learn.smote_k,
            args.learn.seed,
            args.curve_k,
        )?;
        fs::write(args.out_dir.join("curve.tsv"), curve_to_tsv(&points))?;
        #[derive(Serialize)]
        struct CurveReport<'a> {
            version: &'a str,
            fingerprint: &'a str,
            seed: u64,
            points: &'a [crate::explain::CurvePoint],
        }
        fs::write(
            args.out_dir.join("curve.json"),
            serde_json::to_string_pretty(&CurveReport {
                version: "curve/1",
                fingerprint: &fingerprint,
                seed: args.learn.seed,
                points: &points,
            })
            .unwrap(),
        )?;
    }
    println!("attributions -> {}", args.out_dir.display());
    Ok(())
}

fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    let config = args.learn.pipeline_config()?;
    let pruned = load_and_prune(&args.matrix, args.learn.threshold)?;
    let mode = match args.mode.as_str() {
        "remove-lab" => AblationMode::RemoveLab,
        "remove-random" => AblationMode::RemoveRandomFraction {
            fraction: args.fraction,
            runs: args.runs,
        },
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown ablation mode {other:?}"
            )))
        }
    };
    let outcome = ablation(
        &pruned,
        &config.trainer,
        mode,
        args.learn.smote_k,
        args.learn.seed,
        &config.fingerprint(),
        &StrataSpec::default(),
    )?;

    #[derive(Serialize)]
    struct AblationReport<'a> {
        version: &'a str,
        fingerprint: String,
        seed: u64,
        mode: &'a str,
        noop: bool,
        mean_auc: Option<f64>,
        mean_accuracy: Option<f64>,
        runs: Vec<AblationRunOut<'a>>,
    }
    #[derive(Serialize)]
    struct AblationRunOut<'a> {
        removed: &'a [String],
        report: &'a EvalReport,
    }
    let report = AblationReport {
        version: "ablation/1",
        fingerprint: config.fingerprint(),
        seed: args.learn.seed,
        mode: &args.mode,
        noop: outcome.noop,
        mean_auc: (!outcome.noop).then_some(outcome.mean_auc),
        mean_accuracy: (!outcome.noop).then_some(outcome.mean_accuracy),
        runs: outcome
            .runs
            .iter()
            .map(|r| AblationRunOut {
                removed: &r.removed,
                report: &r.report,
            })
            .collect(),
    };
    fs::write(&args.out, serde_json::to_string_pretty(&report).unwrap())?;
    if outcome.noop {
        println!("nothing to remove; ablation was a no-op");
    } else {
        println!(
            "{} runs, mean AUC {:.3}, mean accuracy {:.3} -> {}",
            outcome.runs.len(),
            outcome.mean_auc,
            outcome.mean_accuracy,
            args.out.display()
        );
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let spec: CohortSpec = match &args.spec {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(e.to_string()))?,
        None => CohortSpec::default_cohort(),
    };
    let recordings = synth_cohort(&spec, args.seed)?;
    fs::create_dir_all(&args.out_dir)?;

    let mut manifest = csv::Writer::from_path(args.out_dir.join("manifest.csv"))
        .map_err(|e| Error::Schema(e.to_string()))?;
    manifest
        .write_record(["id", "path", "label", "gender", "age", "environment", "country"])
        .map_err(|e| Error::Schema(e.to_string()))?;
    let mut expected = Vec::new();
    for rec in &recordings {
        let filename = format!("{}.wav", rec.meta.id);
        write_wav_f32(&args.out_dir.join(&filename), &rec.buffer)?;
        manifest
            .write_record([
                rec.meta.id.as_str(),
                filename.as_str(),
                rec.meta.label.as_str(),
                rec.meta.gender.as_str(),
                &format!("{}", rec.meta.age),
                rec.meta.environment.as_str(),
                rec.meta.country.as_str(),
            ])
            .map_err(|e| Error::Schema(e.to_string()))?;
        expected.push(rec.expected.clone());
    }
    manifest.flush()?;

    let sheet = ExpectationSheet::new(expected, args.seed);
    fs::write(
        args.out_dir.join("expected.json"),
        serde_json::to_string_pretty(&sheet).unwrap(),
    )?;
    println!(
        "generated {} recordings -> {}",
        recordings.len(),
        args.out_dir.display()
    );
    Ok(())
}

