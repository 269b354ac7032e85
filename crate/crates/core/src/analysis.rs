//! Correlations with bootstrap intervals, split-half reliability, a beta
//! null model, prediction variance and response-file ingestion.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::predict::{window_judgments, ModelSpec, ResultRow};
use crate::scene::Scene;

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_SPLITS: usize = 1000;
/// Responses are clamped this far inside (0, 1) before a beta fit.
pub const CLAMP: f64 = 1e-6;
/// Largest tolerated share of degenerate bootstrap resamples.
const MAX_SKIPPED: f64 = 0.01;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Pearson product-moment correlation. Errors instead of returning NaN when
/// either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Stats(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Stats(format!("need at least 3 pairs, got {}", x.len())));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Stats("zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub n_resamples: usize,
    pub n_skipped: usize,
    /// False when the interval misses the point estimate, a sign of bias.
    pub brackets_estimate: bool,
}

/// Pearson r with a percentile bootstrap interval over scenes. Resample `b`
/// draws from its own random stream, so results do not depend on
/// evaluation order.
pub fn bootstrap_ci(x: &[f64], y: &[f64], n_resamples: usize, level: f64, seed: u64) -> Result<CorrelationResult> {
    bootstrap_ci_with(x, y, n_resamples, level, seed, Exec::Sequential)
}

pub fn bootstrap_ci_with(
    x: &[f64],
    y: &[f64],
    n_resamples: usize,
    level: f64,
    seed: u64,
    exec: Exec,
) -> Result<CorrelationResult> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Stats(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    if n_resamples == 0 {
        return Err(Error::Stats("need at least one resample".into()));
    }
    let r = pearson(x, y)?;
    let n = x.len();
    let draws = exec.map_range(n_resamples, |b| {
        let mut rng = stream_rng(seed, b as u64);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let i = rng.random_range(0..n);
            xs.push(x[i]);
            ys.push(y[i]);
        }
        pearson(&xs, &ys).ok()
    });
    let mut rs: Vec<f64> = draws.iter().flatten().copied().collect();
    let skipped = n_resamples - rs.len();
    if skipped as f64 > MAX_SKIPPED * n_resamples as f64 {
        return Err(Error::Stats(format!(
            "{skipped} of {n_resamples} resamples had zero variance"
        )));
    }
    rs.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    let ci_low = quantile(&rs, tail);
    let ci_high = quantile(&rs, 1.0 - tail);
    Ok(CorrelationResult {
        r,
        ci_low,
        ci_high,
        n,
        n_resamples,
        n_skipped: skipped,
        brackets_estimate: ci_low <= r && r <= ci_high,
    })
}

/// Subjects by columns of responses in [0, 1]. A column is a
/// (scene, condition) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMatrix {
    pub subjects: Vec<String>,
    pub scenes: Vec<String>,
    pub conditions: Vec<String>,
    /// `values[s][c]` is subject `s`'s response on column `c`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows: usize,
    /// Subjects removed for lacking a response on some column, with the
    /// number of missing cells.
    pub dropped_subjects: Vec<(String, usize)>,
}

#[derive(Debug, Deserialize)]
struct ResponseRecord {
    subject_id: String,
    scene_id: String,
    condition: String,
    response: f64,
}

impl ResponseMatrix {
    pub fn from_rows(values: Vec<Vec<f64>>) -> ResponseMatrix {
        let cols = values.first().map_or(0, Vec::len);
        ResponseMatrix {
            subjects: (0..values.len()).map(|i| format!("s{i}")).collect(),
            scenes: (0..cols).map(|i| format!("scene{i}")).collect(),
            conditions: vec![String::new(); cols],
            values,
        }
    }

    /// Reads `subject_id,scene_id,condition,response` rows. Subjects missing
    /// any column are dropped and listed in the report; out-of-range or
    /// duplicate responses are errors.
    pub fn read_csv<R: Read>(input: R) -> Result<(ResponseMatrix, IngestReport)> {
        let mut rd = csv::Reader::from_reader(input);
        let headers = rd.headers()?.clone();
        for needed in ["subject_id", "scene_id", "condition", "response"] {
            if !headers.iter().any(|h| h == needed) {
                return Err(Error::Data(format!("response file lacks a `{needed}` column")));
            }
        }
        let mut cells: BTreeMap<String, HashMap<(String, String), f64>> = BTreeMap::new();
        let mut columns: BTreeSet<(String, String)> = BTreeSet::new();
        let mut report = IngestReport::default();
        for (line, rec) in rd.deserialize::<ResponseRecord>().enumerate() {
            let rec = rec?;
            report.rows += 1;
            if !(0.0..=1.0).contains(&rec.response) {
                return Err(Error::Data(format!(
                    "row {}: response {} outside [0, 1]",
                    line + 2,
                    rec.response
                )));
            }
            let col = (rec.scene_id, rec.condition);
            columns.insert(col.clone());
            let prev = cells
                .entry(rec.subject_id.clone())
                .or_default()
                .insert(col.clone(), rec.response);
            if prev.is_some() {
                return Err(Error::Data(format!(
                    "row {}: duplicate response for subject {} on scene {} ({})",
                    line + 2,
                    rec.subject_id,
                    col.0,
                    col.1
                )));
            }
        }
        let columns: Vec<(String, String)> = columns.into_iter().collect();
        let mut m = ResponseMatrix {
            subjects: Vec::new(),
            scenes: columns.iter().map(|c| c.0.clone()).collect(),
            conditions: columns.iter().map(|c| c.1.clone()).collect(),
            values: Vec::new(),
        };
        for (subject, answers) in cells {
            let missing = columns.iter().filter(|c| !answers.contains_key(*c)).count();
            if missing > 0 {
                log::warn!("dropping subject {subject}: {missing} missing responses");
                report.dropped_subjects.push((subject, missing));
                continue;
            }
            m.values.push(columns.iter().map(|c| answers[c]).collect());
            m.subjects.push(subject);
        }
        if m.subjects.is_empty() {
            return Err(Error::Data("no subject has a complete set of responses".into()));
        }
        Ok((m, report))
    }

    /// Keeps only the columns of one condition.
    pub fn condition(&self, name: &str) -> ResponseMatrix {
        let keep: Vec<usize> = (0..self.scenes.len()).filter(|&c| self.conditions[c] == name).collect();
        ResponseMatrix {
            subjects: self.subjects.clone(),
            scenes: keep.iter().map(|&c| self.scenes[c].clone()).collect(),
            conditions: keep.iter().map(|&c| self.conditions[c].clone()).collect(),
            values: self
                .values
                .iter()
                .map(|row| keep.iter().map(|&c| row[c]).collect())
                .collect(),
        }
    }

    pub fn condition_names(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.conditions.iter().collect();
        set.into_iter().cloned().collect()
    }

    /// Mean response per column over the given subjects.
    pub fn column_means_of(&self, subjects: &[usize]) -> Vec<f64> {
        (0..self.scenes.len())
            .map(|c| subjects.iter().map(|&s| self.values[s][c]).sum::<f64>() / subjects.len() as f64)
            .collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let all: Vec<usize> = (0..self.subjects.len()).collect();
        self.column_means_of(&all)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitHalfResult {
    pub mean_r: f64,
    /// 2.5% and 97.5% quantiles of the per-split correlations.
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_iters: usize,
    pub spearman_brown: bool,
}

/// Correlation between the column means of random halves of the subjects,
/// averaged over splits. With an odd count one random subject sits out of
/// each split; with two subjects there is a single split.
pub fn split_half(m: &ResponseMatrix, n_iters: usize, seed: u64, spearman_brown: bool) -> Result<SplitHalfResult> {
    let n = m.subjects.len();
    if n < 2 {
        return Err(Error::Stats(format!("split-half needs at least 2 subjects, got {n}")));
    }
    if n_iters == 0 {
        return Err(Error::Stats("n_iters must be positive".into()));
    }
    let iters = if n == 2 { 1 } else { n_iters };
    let mut rs = Vec::with_capacity(iters);
    for it in 0..iters {
        let mut rng = stream_rng(seed, it as u64);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let half = n / 2;
        let a = m.column_means_of(&order[..half]);
        let b = m.column_means_of(&order[half..2 * half]);
        let r = pearson(&a, &b)?;
        rs.push(if spearman_brown { 2.0 * r / (1.0 + r) } else { r });
    }
    let mean_r = mean(&rs);
    rs.sort_by(f64::total_cmp);
    Ok(SplitHalfResult {
        mean_r,
        ci_low: quantile(&rs, 0.025),
        ci_high: quantile(&rs, 0.975),
        n_iters: iters,
        spearman_brown,
    })
}

/// Beta distribution matched to the pooled responses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaFit {
    pub alpha: f64,
    pub beta: f64,
    pub sample_mean: f64,
    pub sample_variance: f64,
}

impl BetaFit {
    /// Method-of-moments fit after clamping into (0, 1).
    pub fn fit(values: &[f64]) -> Result<BetaFit> {
        if values.is_empty() {
            return Err(Error::Stats("no responses to fit".into()));
        }
        let v: Vec<f64> = values.iter().map(|x| x.clamp(CLAMP, 1.0 - CLAMP)).collect();
        let m = mean(&v);
        let var = variance(&v);
        if var <= 0.0 || var >= m * (1.0 - m) {
            return Err(Error::Stats(format!(
                "cannot fit a beta distribution: mean {m}, variance {var}"
            )));
        }
        let common = m * (1.0 - m) / var - 1.0;
        Ok(BetaFit {
            alpha: m * common,
            beta: (1.0 - m) * common,
            sample_mean: m,
            sample_variance: var,
        })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullModel {
    pub fit: BetaFit,
    /// Synthetic response matrices shaped like the input.
    pub samples: Vec<Vec<Vec<f64>>>,
}

/// Fits one beta distribution to all responses and draws `n_sets`
/// synthetic matrices from it; set `k` uses random stream `k`.
pub fn null_model(m: &ResponseMatrix, n_sets: usize, seed: u64) -> Result<NullModel> {
    let pooled: Vec<f64> = m.values.iter().flatten().copied().collect();
    let fit = BetaFit::fit(&pooled)?;
    let dist = Beta::new(fit.alpha, fit.beta).map_err(|e| Error::Stats(format!("beta: {e}")))?;
    let (rows, cols) = (m.subjects.len(), m.scenes.len());
    let samples = (0..n_sets)
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            (0..rows)
                .map(|_| (0..cols).map(|_| dist.sample(&mut rng)).collect())
                .collect()
        })
        .collect();
    Ok(NullModel { fit, samples })
}

/// Population variance of the deterministic judgments across the spec's
/// averaging window.
pub fn prediction_variance(scene: &Scene, spec: &ModelSpec, exec: Exec) -> Result<f64> {
    let js: Vec<f64> = window_judgments(scene, spec, exec)?.iter().map(|j| j.j).collect();
    Ok(variance(&js))
}

/// Human-readable label for a results row's model and parameters.
pub fn model_label(r: &ResultRow) -> String {
    let mut parts = Vec::new();
    let mut num = |k: &str, v: Option<f64>| {
        if let Some(v) = v {
            parts.push(format!("{k}={v}"));
        }
    };
    num("alpha", r.alpha);
    num("zeta", r.zeta);
    num("sigma", r.sigma);
    num("g", r.g);
    num("carry", r.carry);
    if let Some(n) = r.n {
        parts.insert(0, format!("n={n}"));
    }
    if r.sticky == Some(true) {
        parts.push("sticky".into());
    }
    format!("{}[{}]", r.model_id, parts.join(","))
}

/// Judgments by model label, then by scene id. Failed rows are left out.
pub fn model_columns(rows: &[ResultRow]) -> BTreeMap<String, BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.is_ok()) {
        out.entry(model_label(r))
            .or_default()
            .insert(r.scene_id.clone(), r.j.unwrap_or(0.0));
    }
    out
}

/// One line of a correlation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub left: String,
    pub right: String,
    pub condition: String,
    pub n: usize,
    pub r: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub note: String,
}

/// Correlates two scene-keyed series over their shared scenes.
pub fn correlate_series(
    left: (&str, &BTreeMap<String, f64>),
    right: (&str, &BTreeMap<String, f64>),
    condition: &str,
    n_resamples: usize,
    seed: u64,
    exec: Exec,
) -> CorrelationRow {
    let shared: Vec<&String> = left.1.keys().filter(|k| right.1.contains_key(*k)).collect();
    let x: Vec<f64> = shared.iter().map(|k| left.1[*k]).collect();
    let y: Vec<f64> = shared.iter().map(|k| right.1[*k]).collect();
    let mut row = CorrelationRow {
        left: left.0.to_string(),
        right: right.0.to_string(),
        condition: condition.to_string(),
        n: shared.len(),
        r: None,
        ci_low: None,
        ci_high: None,
        note: String::new(),
    };
    match bootstrap_ci_with(&x, &y, n_resamples, 0.95, seed, exec) {
        Ok(c) => {
            row.r = Some(c.r);
            row.ci_low = Some(c.ci_low);
            row.ci_high = Some(c.ci_high);
            if !c.brackets_estimate {
                row.note = "interval misses estimate".into();
            }
        }
        Err(e) => {
            row.r = pearson(&x, &y).ok();
            row.note = e.to_string();
        }
    }
    row
}

/// Every unordered pair of model columns.
pub fn pairwise_correlations(
    columns: &BTreeMap<String, BTreeMap<String, f64>>,
    n_resamples: usize,
    seed: u64,
    exec: Exec,
) -> Vec<CorrelationRow> {
    let names: Vec<&String> = columns.keys().collect();
    let mut out = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            out.push(correlate_series(
                (a, &columns[*a]),
                (b, &columns[*b]),
                "",
                n_resamples,
                seed,
                exec,
            ));
        }
    }
    out
}

/// Variance summary row, one per condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub condition: String,
    pub model: String,
    pub n_scenes: usize,
    pub mean_variance: f64,
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("csv output", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::Normal;

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::Stats(_))
        ));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn identical_series_give_degenerate_interval() {
        let x: Vec<f64> = (0..30).map(|i| ((i * 7) % 11) as f64).collect();
        let c = bootstrap_ci(&x, &x, 2000, 0.95, 1).unwrap();
        assert_eq!((c.r, c.ci_low, c.ci_high), (1.0, 1.0, 1.0));
    }

    #[test]
    fn bootstrap_width_shrinks_with_more_scenes() {
        let mut rng = stream_rng(5, 0);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut gen = |n: usize| {
            let x: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
            let y: Vec<f64> = x.iter().map(|v| v + noise.sample(&mut rng)).collect();
            (x, y)
        };
        let (x20, y20) = gen(20);
        let (x120, y120) = gen(120);
        let a = bootstrap_ci(&x20, &y20, 2000, 0.95, 3).unwrap();
        let b = bootstrap_ci(&x120, &y120, 2000, 0.95, 3).unwrap();
        assert!(b.ci_high - b.ci_low < a.ci_high - a.ci_low);
    }

    #[test]
    fn bootstrap_independent_of_exec_mode() {
        let x: Vec<f64> = (0..25).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..25).map(|i| (i as f64 * 0.7).cos()).collect();
        let a = bootstrap_ci_with(&x, &y, 500, 0.9, 8, Exec::Parallel).unwrap();
        let b = bootstrap_ci_with(&x, &y, 500, 0.9, 8, Exec::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_subjects_split_perfectly() {
        let row: Vec<f64> = (0..12).map(|i| (i as f64) / 12.0).collect();
        let m = ResponseMatrix::from_rows(vec![row; 6]);
        let s = split_half(&m, 50, 0, false).unwrap();
        assert_eq!(s.mean_r, 1.0);
    }

    #[test]
    fn two_subjects_one_split() {
        let m = ResponseMatrix::from_rows(vec![vec![0.1, 0.5, 0.9, 0.3], vec![0.2, 0.4, 0.8, 0.1]]);
        assert_eq!(split_half(&m, 1000, 0, false).unwrap().n_iters, 1);
        let one = ResponseMatrix::from_rows(vec![vec![0.1, 0.5, 0.9]]);
        assert!(split_half(&one, 10, 0, false).is_err());
    }

    #[test]
    fn noise_subjects_have_no_reliability() {
        // A single noise panel's split-half mean still carries its own
        // sampling error (sd near 0.1 at 50 scenes), so average panels.
        let panels: Vec<f64> = (0..10)
            .map(|k| {
                let mut rng = stream_rng(11, k);
                let rows: Vec<Vec<f64>> = (0..20)
                    .map(|_| (0..50).map(|_| rng.random::<f64>()).collect())
                    .collect();
                split_half(&ResponseMatrix::from_rows(rows), 200, 4, false)
                    .unwrap()
                    .mean_r
            })
            .collect();
        assert!(mean(&panels).abs() < 0.1, "{panels:?}");
    }

    #[test]
    fn odd_subject_count_drops_one() {
        let mut rng = stream_rng(12, 0);
        let rows: Vec<Vec<f64>> = (0..5).map(|_| (0..10).map(|_| rng.random::<f64>()).collect()).collect();
        assert!(split_half(&ResponseMatrix::from_rows(rows), 20, 0, true).is_ok());
    }

    #[test]
    fn beta_fit_matches_moments() {
        let mut rng = stream_rng(2, 0);
        let v: Vec<f64> = (0..500).map(|_| 0.5 + 0.01 * (rng.random::<f64>() - 0.5)).collect();
        let f = BetaFit::fit(&v).unwrap();
        assert!((0.49..=0.51).contains(&f.mean()));
        assert!((f.mean() - f.sample_mean).abs() < 1e-9);
        assert!((f.variance() - f.sample_variance).abs() < 1e-9);
        assert!(BetaFit::fit(&[0.3, 0.3, 0.3]).is_err());
    }

    #[test]
    fn null_model_is_seeded() {
        let m = ResponseMatrix::from_rows(vec![vec![0.1, 0.6, 0.8], vec![0.3, 0.5, 0.9]]);
        let a = null_model(&m, 3, 9).unwrap();
        let b = null_model(&m, 3, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples[0].len(), 2);
        assert_eq!(a.samples[0][0].len(), 3);
    }

    #[test]
    fn alternating_judgments_variance() {
        let js: Vec<f64> = (0..9).map(|i| (i % 2) as f64).collect();
        // Four ones out of nine: p(1 - p) with p = 4/9.
        assert!((variance(&js) - 20.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn response_ingestion() {
        let text = "subject_id,scene_id,condition,response\n\
                    a,s1,water,0.2\na,s2,water,0.4\nb,s1,water,0.3\nb,s2,water,0.1\nc,s1,water,0.9\n";
        let (m, rep) = ResponseMatrix::read_csv(text.as_bytes()).unwrap();
        assert_eq!(m.subjects, vec!["a", "b"]);
        assert_eq!(rep.dropped_subjects, vec![("c".to_string(), 1)]);
        assert_eq!(m.column_means(), vec![0.25, 0.25]);
        let bad = "subject_id,scene_id,condition,response\na,s1,water,1.5\n";
        assert!(ResponseMatrix::read_csv(bad.as_bytes()).is_err());
        let schema = "subject,scene,response\na,s1,0.5\n";
        let e = ResponseMatrix::read_csv(schema.as_bytes()).unwrap_err();
        assert!(e.to_string().contains("subject_id"));
    }
}
