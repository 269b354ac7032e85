use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use liquid_core::analysis::{
    correlate_series, mean, null_model, pairwise_correlations, pearson, prediction_variance, split_half, write_csv,
    CorrelationRow, ResponseMatrix, SplitHalfResult, VarianceRow, DEFAULT_RESAMPLES, DEFAULT_SPLITS,
};
use liquid_core::predict::{read_results, ResultRow};
use liquid_core::Exec;
use serde::Serialize;

use crate::inputs::{load_scenes, resolve_spec};
use crate::manifest::Recorder;
use crate::predict::Format;
use crate::{Status, UsageError};

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Results tables from `predict` or `sweep` (CSV or JSON); repeatable.
    #[arg(long, num_args = 1.., required = true)]
    pub results: Vec<PathBuf>,
    /// Subject responses: subject_id,scene_id,condition,response.
    #[arg(long)]
    pub responses: Option<PathBuf>,
    /// Model columns used as reference columns in the model table and for
    /// the individual-subject comparison; repeatable.
    #[arg(long = "reference")]
    pub references: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    pub resamples: usize,
    #[arg(long, default_value_t = DEFAULT_SPLITS)]
    pub split_iters: usize,
    /// Apply the Spearman-Brown correction to split-half correlations.
    #[arg(long)]
    pub spearman_brown: bool,
    /// Synthetic response sets drawn from the fitted beta null model.
    #[arg(long, default_value_t = 100)]
    pub null_sets: usize,
    /// Scene sets for the prediction-variance table; each is one condition.
    #[arg(long = "variance-scenes")]
    pub variance_scenes: Vec<PathBuf>,
    /// Specs (preset names or files) whose window variance is tabulated.
    #[arg(long = "variance-spec")]
    pub variance_specs: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long, default_value = "analysis")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
struct ScatterRow {
    scene_id: String,
    series: String,
    value: f64,
}

#[derive(Debug, Clone, Serialize)]
struct IndividualRow {
    condition: String,
    reference: String,
    kind: &'static str,
    id: String,
    r: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct ConditionSummary {
    condition: String,
    n_subjects: usize,
    n_scenes: usize,
    split_half: Option<SplitHalfResult>,
    split_half_error: Option<String>,
    null_fit_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
struct AnalysisReport {
    results_rows: usize,
    failed_rows: usize,
    models: Vec<String>,
    correlations: Vec<CorrelationRow>,
    subject_correlations: Vec<CorrelationRow>,
    conditions: Vec<ConditionSummary>,
    dropped_subjects: Vec<(String, usize)>,
    variance: Vec<VarianceRow>,
}

fn read_any_results(path: &Path) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing results {}", path.display()))?
    } else {
        read_results(text.as_bytes()).with_context(|| format!("results file {}", path.display()))?
    };
    Ok(rows)
}

/// Model columns from all results files. With several files each label is
/// prefixed by its file stem so that the same model from two files stays
/// two columns.
fn columns(files: &[(String, Vec<ResultRow>)]) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (stem, rows) in files {
        let prefix = if files.len() > 1 {
            let k = seen.entry(stem.clone()).or_insert(0);
            *k += 1;
            if *k == 1 {
                format!("{stem}:")
            } else {
                format!("{stem}#{k}:")
            }
        } else {
            String::new()
        };
        for (label, col) in liquid_core::analysis::model_columns(rows) {
            out.insert(format!("{prefix}{label}"), col);
        }
    }
    out
}

fn write_table<T: Serialize>(rec: &mut Recorder, stem: &str, rows: &[T], format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, fs::File::create(rec.output(&format!("{stem}.csv")))?)?,
        Format::Json => rec.write(&format!("{stem}.json"), serde_json::to_string_pretty(rows)? + "\n")?,
    }
    Ok(())
}

fn fmt_r(row: &CorrelationRow) -> String {
    match (row.r, row.ci_low, row.ci_high) {
        (Some(r), Some(lo), Some(hi)) => format!("{r:.2}[{lo:.2}, {hi:.2}]"),
        _ => "NA".into(),
    }
}

pub fn run(args: &AnalyzeArgs, exec: Exec) -> Result<Status> {
    if args.variance_scenes.is_empty() != args.variance_specs.is_empty() {
        return Err(UsageError("--variance-scenes and --variance-spec go together".into()).into());
    }
    let mut rec = Recorder::new(&args.out, "analyze", serde_json::to_value(args)?)?;
    rec.seed(args.seed);

    let mut files = Vec::new();
    for path in &args.results {
        rec.input(path)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        files.push((stem, read_any_results(path)?));
    }
    let results_rows: usize = files.iter().map(|f| f.1.len()).sum();
    let failed_rows: usize = files.iter().map(|f| f.1.iter().filter(|r| !r.is_ok()).count()).sum();
    let cols = columns(&files);
    if cols.is_empty() {
        anyhow::bail!("the results contain no successful rows");
    }
    for r in &args.references {
        if !cols.contains_key(r) {
            return Err(UsageError(format!(
                "unknown reference column `{r}`; columns are: {}",
                cols.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
            .into());
        }
    }

    let correlations = pairwise_correlations(&cols, args.resamples, args.seed, exec);
    write_table(&mut rec, "correlations", &correlations, args.format)?;

    let mut scatter: Vec<ScatterRow> = cols
        .iter()
        .flat_map(|(label, col)| {
            col.iter().map(move |(scene, &value)| ScatterRow {
                scene_id: scene.clone(),
                series: label.clone(),
                value,
            })
        })
        .collect();

    let mut subject_rows = Vec::new();
    let mut conditions = Vec::new();
    let mut individuals = Vec::new();
    let mut dropped = Vec::new();
    if let Some(path) = &args.responses {
        rec.input(path)?;
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let (m, report) = ResponseMatrix::read_csv(file).with_context(|| format!("responses {}", path.display()))?;
        dropped = report.dropped_subjects;
        for cond in m.condition_names() {
            let cm = m.condition(&cond);
            let human: BTreeMap<String, f64> = cm.scenes.iter().cloned().zip(cm.column_means()).collect();
            let series = format!("subjects:{cond}");
            scatter.extend(human.iter().map(|(s, &v)| ScatterRow {
                scene_id: s.clone(),
                series: series.clone(),
                value: v,
            }));
            for (label, col) in &cols {
                let row = correlate_series((label, col), (&series, &human), &cond, args.resamples, args.seed, exec);
                if row.n == 0 {
                    log::warn!("model {label} shares no scenes with condition {cond}");
                }
                subject_rows.push(row);
            }
            let (sh, sh_err) = match split_half(&cm, args.split_iters, args.seed, args.spearman_brown) {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let null = null_model(&cm, args.null_sets, args.seed);
            for reference in &args.references {
                let col = &cols[reference];
                let shared: Vec<usize> = (0..cm.scenes.len())
                    .filter(|&c| col.contains_key(&cm.scenes[c]))
                    .collect();
                let truth: Vec<f64> = shared.iter().map(|&c| col[&cm.scenes[c]]).collect();
                let mut push = |kind, id: String, values: &[f64]| {
                    let xs: Vec<f64> = shared.iter().map(|&c| values[c]).collect();
                    individuals.push(IndividualRow {
                        condition: cond.clone(),
                        reference: reference.clone(),
                        kind,
                        id,
                        r: pearson(&xs, &truth).ok(),
                    });
                };
                for (s, values) in cm.subjects.iter().zip(&cm.values) {
                    push("subject", s.clone(), values);
                }
                if let Ok(null) = &null {
                    for (k, set) in null.samples.iter().enumerate() {
                        for (s, values) in set.iter().enumerate() {
                            push("null", format!("set{k}/s{s}"), values);
                        }
                    }
                }
            }
            conditions.push(ConditionSummary {
                condition: cond.clone(),
                n_subjects: cm.subjects.len(),
                n_scenes: cm.scenes.len(),
                split_half: sh,
                split_half_error: sh_err,
                null_fit_error: null.err().map(|e| e.to_string()),
            });
        }
        write_table(&mut rec, "subject_correlations", &subject_rows, args.format)?;
        if !args.references.is_empty() {
            write_table(&mut rec, "individuals", &individuals, args.format)?;
        }
        write_model_table(&mut rec, &cols, &subject_rows, &correlations, &args.references)?;
    }
    write_table(&mut rec, "scatter", &scatter, args.format)?;

    let mut variance = Vec::new();
    for dir in &args.variance_scenes {
        let scenes = load_scenes(std::slice::from_ref(dir), &mut rec)?;
        let condition = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for name in &args.variance_specs {
            let spec = resolve_spec(name, Some(&mut rec))?;
            let vs = exec
                .map(&scenes, |(_, s)| prediction_variance(s, &spec, Exec::Sequential))
                .into_iter()
                .collect::<liquid_core::Result<Vec<f64>>>()?;
            variance.push(VarianceRow {
                condition: condition.clone(),
                model: name.clone(),
                n_scenes: vs.len(),
                mean_variance: mean(&vs),
            });
        }
    }
    if !variance.is_empty() {
        write_table(&mut rec, "variance", &variance, args.format)?;
    }

    let report = AnalysisReport {
        results_rows,
        failed_rows,
        models: cols.keys().cloned().collect(),
        correlations,
        subject_correlations: subject_rows,
        conditions,
        dropped_subjects: dropped,
        variance,
    };
    rec.write("summary.json", serde_json::to_string_pretty(&report)? + "\n")?;
    rec.finish()?;
    Ok(if failed_rows > 0 { Status::Partial } else { Status::Ok })
}

/// One row per model: its correlation with each condition's mean responses,
/// then with each reference column.
fn write_model_table(
    rec: &mut Recorder,
    cols: &BTreeMap<String, BTreeMap<String, f64>>,
    subject_rows: &[CorrelationRow],
    pairs: &[CorrelationRow],
    references: &[String],
) -> Result<()> {
    let conds: Vec<String> = {
        let mut c: Vec<String> = subject_rows.iter().map(|r| r.condition.clone()).collect();
        c.dedup();
        c
    };
    let mut w = csv::Writer::from_path(rec.output("model_table.csv"))?;
    let mut header = vec!["model".to_string()];
    header.extend(conds.iter().map(|c| format!("data:{c}")));
    header.extend(references.iter().map(|r| format!("ref:{r}")));
    w.write_record(&header)?;
    for label in cols.keys() {
        let mut line = vec![label.clone()];
        for c in &conds {
            let row = subject_rows.iter().find(|r| &r.left == label && &r.condition == c);
            line.push(row.map_or("NA".into(), fmt_r));
        }
        for reference in references {
            let r = if reference == label {
                Some(1.0)
            } else {
                pairs
                    .iter()
                    .find(|p| {
                        (&p.left == label && &p.right == reference) || (&p.left == reference && &p.right == label)
                    })
                    .and_then(|p| p.r)
            };
            line.push(r.map_or("NA".into(), |r| format!("{r:.2}")));
        }
        w.write_record(&line)?;
    }
    w.flush()?;
    Ok(())
}
