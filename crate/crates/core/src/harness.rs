//! Evaluation protocol, misclassification taxonomy and function-candidate
//! ranking.
//!
//! For every train fraction the protocol draws `repeats` independent seeded
//! (stratified) splits, fits a pipeline on the training part only and scores
//! the held-out part. Landmarks for the `bs` method are the training
//! diagrams of that repeat, and the truncation constant for infinite deaths
//! is computed from them, so nothing about a test diagram reaches training.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{self, FeatureKind, LabeledSet, MarginModel, Prediction, Preprocessing};
use crate::embed::derive_seed;
use crate::error::{Error, Result};
use crate::metrics::{cross_distances, distance_matrix, truncate_all, truncation_value, DistanceMode, WeightVector};
use crate::persistence::{filter_noise, PersistenceDiagram, DEFAULT_NOISE_CUTOFF};
use crate::vectorize::{stats_matrix, Method, Standardizer};

/// Hyperparameters of one fitted pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub method: Method,
    pub penalty: f64,
    pub tol: f64,
    pub weights: WeightVector,
    pub distance_mode: DistanceMode,
    pub noise_cutoff: f64,
    pub noise_dims: Vec<usize>,
    pub standardize: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            method: Method::Bs,
            penalty: classify::DEFAULT_PENALTY,
            tol: classify::DEFAULT_TOL,
            weights: WeightVector::default(),
            distance_mode: DistanceMode::Hausdorff,
            noise_cutoff: DEFAULT_NOISE_CUTOFF,
            noise_dims: vec![1, 2],
            standardize: false,
        }
    }
}

/// A trained model plus the landmark diagrams it needs for new inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub model: MarginModel,
    /// Noise-filtered, truncated training diagrams (`bs` only).
    pub landmarks: Vec<PersistenceDiagram>,
}

fn preprocess(diagrams: &[PersistenceDiagram], cutoff: f64, dims: &[usize]) -> Result<Vec<PersistenceDiagram>> {
    diagrams.iter().map(|d| filter_noise(d, cutoff, dims)).collect()
}

/// Fits a pipeline on labelled diagrams.
pub fn fit_pipeline(diagrams: &[PersistenceDiagram], labels: &[f64], params: &ModelParams) -> Result<FittedPipeline> {
    if diagrams.len() != labels.len() {
        return Err(Error::Input("diagram and label counts differ".into()));
    }
    let filtered = preprocess(diagrams, params.noise_cutoff, &params.noise_dims)?;
    let truncation = truncation_value(&filtered);
    let train = truncate_all(&filtered, truncation);
    let ids: Vec<String> = train.iter().map(|d| d.id.clone()).collect();

    let (set, landmarks, standardizer) = match params.method {
        Method::Bs => {
            let dm = distance_matrix(&train, &params.weights, params.distance_mode);
            (LabeledSet::from_distance_matrix(&dm, labels.to_vec())?, train, None)
        }
        method => {
            let mut rows = stats_matrix(&train, method)?;
            let standardizer = if params.standardize {
                let s = Standardizer::fit(&rows)?;
                rows = rows.iter().map(|r| s.apply(r)).collect();
                Some(s)
            } else {
                None
            };
            let set = LabeledSet::new(ids, labels.to_vec(), rows, FeatureKind::StatFeatures)?;
            (set, Vec::new(), standardizer)
        }
    };
    let mut model = classify::train(&set, params.penalty, params.tol)?;
    model.preprocessing = Some(Preprocessing {
        method: params.method,
        truncation,
        noise_cutoff: params.noise_cutoff,
        noise_dims: params.noise_dims.clone(),
        weights: params.weights,
        distance_mode: params.distance_mode,
        standardizer,
    });
    Ok(FittedPipeline { model, landmarks })
}

impl FittedPipeline {
    fn preprocessing(&self) -> Result<&Preprocessing> {
        self.model
            .preprocessing
            .as_ref()
            .ok_or_else(|| Error::Input("model carries no preprocessing record".into()))
    }

    /// Feature rows for new diagrams, preprocessed like the training set.
    pub fn features(&self, diagrams: &[PersistenceDiagram]) -> Result<Vec<Vec<f64>>> {
        let pre = self.preprocessing()?;
        let filtered = preprocess(diagrams, pre.noise_cutoff, &pre.noise_dims)?;
        let queries = truncate_all(&filtered, pre.truncation);
        match pre.method {
            Method::Bs => {
                if self.landmarks.is_empty() {
                    return Err(Error::Config("bs model has no landmark diagrams".into()));
                }
                Ok(cross_distances(&queries, &self.landmarks, &pre.weights, pre.distance_mode))
            }
            method => {
                let rows = stats_matrix(&queries, method)?;
                Ok(match &pre.standardizer {
                    Some(s) => rows.iter().map(|r| s.apply(r)).collect(),
                    None => rows,
                })
            }
        }
    }

    pub fn predict(&self, diagrams: &[PersistenceDiagram]) -> Result<Vec<Prediction>> {
        self.features(diagrams)?
            .iter()
            .map(|row| classify::predict(&self.model, row))
            .collect()
    }
}

/// Splits item indices into (train, test), both sorted ascending.
///
/// The training part has `round(fraction · n)` items. With `stratified`,
/// each class gets its proportional share, rounded by largest remainder.
pub fn split(labels: &[f64], fraction: f64, seed: u64, stratified: bool) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Split(format!("train fraction must be in (0, 1), got {fraction}")));
    }
    let n = labels.len();
    let k = (fraction * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<f64> = labels.to_vec();
    classes.sort_by(f64::total_cmp);
    classes.dedup();

    let mut train = Vec::with_capacity(k);
    if stratified {
        let members: Vec<Vec<usize>> = classes
            .iter()
            .map(|c| (0..n).filter(|&i| labels[i] == *c).collect())
            .collect();
        let ideal: Vec<f64> = members.iter().map(|m| fraction * m.len() as f64).collect();
        let mut take: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
        let mut order: Vec<usize> = (0..classes.len()).collect();
        order.sort_by(|&a, &b| (ideal[b] - ideal[b].floor()).total_cmp(&(ideal[a] - ideal[a].floor())).then(a.cmp(&b)));
        let mut missing = k.saturating_sub(take.iter().sum());
        for &c in order.iter().cycle().take(order.len() * 2) {
            if missing == 0 {
                break;
            }
            if take[c] < members[c].len() {
                take[c] += 1;
                missing -= 1;
            }
        }
        for (c, mut idx) in members.into_iter().enumerate() {
            idx.shuffle(&mut rng);
            train.extend_from_slice(&idx[..take[c]]);
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..k.min(n)]);
    }
    train.sort_unstable();
    let test: Vec<usize> = (0..n).filter(|i| train.binary_search(i).is_err()).collect();
    for c in &classes {
        let in_train = train.iter().any(|&i| labels[i] == *c);
        let in_test = test.iter().any(|&i| labels[i] == *c);
        if !in_train || !in_test {
            return Err(Error::Split(format!(
                "class {c} is empty in the {} part at fraction {fraction}",
                if in_train { "test" } else { "train" }
            )));
        }
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub methods: Vec<Method>,
    pub train_fractions: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub penalty: f64,
    pub tol: f64,
    pub weights: WeightVector,
    pub distance_mode: DistanceMode,
    pub stratified: bool,
    pub noise_cutoff: f64,
    pub noise_dims: Vec<usize>,
    pub standardize: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            methods: vec![Method::Bs],
            train_fractions: vec![0.3, 0.5, 0.8],
            repeats: 5,
            seed: 0,
            penalty: p.penalty,
            tol: p.tol,
            weights: p.weights,
            distance_mode: p.distance_mode,
            stratified: true,
            noise_cutoff: p.noise_cutoff,
            noise_dims: p.noise_dims,
            standardize: false,
        }
    }
}

impl EvalConfig {
    pub fn params(&self, method: Method) -> ModelParams {
        ModelParams {
            method,
            penalty: self.penalty,
            tol: self.tol,
            weights: self.weights,
            distance_mode: self.distance_mode,
            noise_cutoff: self.noise_cutoff,
            noise_dims: self.noise_dims.clone(),
            standardize: self.standardize,
        }
    }

    /// Seed of the split for a given fraction index and repeat; shared by all
    /// methods so they see identical splits.
    pub fn split_seed(&self, fraction_index: usize, repeat: usize) -> u64 {
        derive_seed(derive_seed(self.seed, fraction_index as u64), repeat as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPrediction {
    pub id: String,
    pub label: f64,
    pub predicted: i8,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub method: Method,
    pub fraction: f64,
    pub repeat: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub correct: usize,
    pub accuracy: Option<f64>,
    pub truncation: Option<f64>,
    pub misclassified: Vec<String>,
    pub predictions: Vec<TestPrediction>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCell {
    pub method: Method,
    pub fraction: f64,
    pub mean_accuracy: Option<f64>,
    pub accuracies: Vec<Option<f64>>,
    pub repeats: Vec<RepeatRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub n_samples: usize,
    pub cells: Vec<EvalCell>,
    /// Elapsed time; kept out of the JSON so reports are reproducible.
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl EvalReport {
    pub fn cell(&self, method: Method, fraction: f64) -> Option<&EvalCell> {
        self.cells.iter().find(|c| c.method == method && c.fraction == fraction)
    }

    /// Accuracy table with one row per method and one column per fraction.
    pub fn render_table(&self) -> String {
        let fractions = &self.config.train_fractions;
        let headers: Vec<String> = fractions.iter().map(|f| fraction_label(*f)).collect();
        let name_width = self
            .config
            .methods
            .iter()
            .map(|m| m.display_name().len())
            .max()
            .unwrap_or(0)
            .max("Methods".len());
        let col_width = headers.iter().map(String::len).max().unwrap_or(0).max(8);
        let mut out = String::new();
        let _ = write!(out, "{:<name_width$}", "Methods");
        for h in &headers {
            let _ = write!(out, "  {h:>col_width$}");
        }
        out.push('\n');
        let _ = writeln!(out, "{}", "-".repeat(name_width + headers.len() * (col_width + 2)));
        for m in &self.config.methods {
            let _ = write!(out, "{:<name_width$}", m.display_name());
            for f in fractions {
                let cell = self
                    .cell(*m, *f)
                    .and_then(|c| c.mean_accuracy)
                    .map_or_else(|| "n/a".to_string(), |a| format!("{:.2}%", 100.0 * a));
                let _ = write!(out, "  {cell:>col_width$}");
            }
            out.push('\n');
        }
        out
    }
}

fn fraction_label(f: f64) -> String {
    let pct = 100.0 * f;
    match pct.round() as i64 {
        30 if (pct - 30.0).abs() < 1e-9 => "Thirty percent".into(),
        50 if (pct - 50.0).abs() < 1e-9 => "Fifty percent".into(),
        80 if (pct - 80.0).abs() < 1e-9 => "Eighty percent".into(),
        _ => format!("{pct}%"),
    }
}

/// Runs one train/test split: fits on `train` only and scores `test`.
pub fn run_split(
    train: &[PersistenceDiagram],
    train_labels: &[f64],
    test: &[PersistenceDiagram],
    params: &ModelParams,
) -> Result<(FittedPipeline, Vec<Prediction>)> {
    let pipeline = fit_pipeline(train, train_labels, params)?;
    let preds = pipeline.predict(test)?;
    Ok((pipeline, preds))
}

/// Runs the full protocol over every (method, fraction, repeat).
pub fn evaluate(diagrams: &[PersistenceDiagram], labels: &[f64], cfg: &EvalConfig) -> Result<EvalReport> {
    let start = Instant::now();
    if diagrams.len() != labels.len() {
        return Err(Error::Input("diagram and label counts differ".into()));
    }
    if cfg.repeats == 0 || cfg.methods.is_empty() || cfg.train_fractions.is_empty() {
        return Err(Error::Config("need at least one method, fraction and repeat".into()));
    }
    for class in [1.0, -1.0] {
        let count = labels.iter().filter(|&&y| y == class).count();
        if count < 4 {
            return Err(Error::Input(format!("class {class} has {count} samples; at least 4 are needed")));
        }
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::Input("labels must be +1 or -1".into()));
    }

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.methods.len())
        .flat_map(|m| (0..cfg.train_fractions.len()).flat_map(move |f| (0..cfg.repeats).map(move |r| (m, f, r))))
        .collect();

    let records: Vec<RepeatRecord> = jobs
        .par_iter()
        .map(|&(mi, fi, r)| {
            let method = cfg.methods[mi];
            let fraction = cfg.train_fractions[fi];
            let seed = cfg.split_seed(fi, r);
            let mut record = RepeatRecord {
                method,
                fraction,
                repeat: r,
                seed,
                n_train: 0,
                n_test: 0,
                correct: 0,
                accuracy: None,
                truncation: None,
                misclassified: Vec::new(),
                predictions: Vec::new(),
                error: None,
            };
            let outcome = split(labels, fraction, seed, cfg.stratified).and_then(|(tr, te)| {
                let train: Vec<_> = tr.iter().map(|&i| diagrams[i].clone()).collect();
                let train_labels: Vec<f64> = tr.iter().map(|&i| labels[i]).collect();
                let test: Vec<_> = te.iter().map(|&i| diagrams[i].clone()).collect();
                run_split(&train, &train_labels, &test, &cfg.params(method)).map(|(p, preds)| (tr, te, p, preds))
            });
            match outcome {
                Ok((tr, te, pipeline, preds)) => {
                    record.n_train = tr.len();
                    record.n_test = te.len();
                    record.truncation = pipeline.model.preprocessing.as_ref().map(|p| p.truncation);
                    for (&i, p) in te.iter().zip(&preds) {
                        let ok = f64::from(p.label) == labels[i];
                        record.correct += usize::from(ok);
                        if !ok {
                            record.misclassified.push(diagrams[i].id.clone());
                        }
                        record.predictions.push(TestPrediction {
                            id: diagrams[i].id.clone(),
                            label: labels[i],
                            predicted: p.label,
                            score: p.score,
                        });
                    }
                    record.accuracy = Some(record.correct as f64 / record.n_test as f64);
                }
                Err(e) => record.error = Some(e.to_string()),
            }
            record
        })
        .collect();

    let mut cells = Vec::new();
    let mut it = records.into_iter();
    for &method in &cfg.methods {
        for &fraction in &cfg.train_fractions {
            let repeats: Vec<RepeatRecord> = it.by_ref().take(cfg.repeats).collect();
            let accuracies: Vec<Option<f64>> = repeats.iter().map(|r| r.accuracy).collect();
            let ok: Vec<f64> = accuracies.iter().flatten().copied().collect();
            let mean_accuracy = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
            cells.push(EvalCell {
                method,
                fraction,
                mean_accuracy,
                accuracies,
                repeats,
            });
        }
    }
    Ok(EvalReport {
        config: cfg.clone(),
        n_samples: diagrams.len(),
        cells,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorType {
    /// Confidently wrong: the score lies outside the margin band.
    TypeI,
    /// Wrong inside the margin band `|score| < 1`.
    TypeII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisclassEntry {
    pub id: String,
    pub true_label: f64,
    pub predicted: i8,
    pub score: f64,
    pub error_type: ErrorType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisclassReport {
    pub method: Method,
    pub fraction: f64,
    pub repeat: usize,
    pub entries: Vec<MisclassEntry>,
}

pub fn classify_error(score: f64) -> ErrorType {
    if score.abs() < 1.0 {
        ErrorType::TypeII
    } else {
        ErrorType::TypeI
    }
}

/// Lists the misclassified test items of one repeat with their error type.
pub fn misclass_report(record: &RepeatRecord) -> MisclassReport {
    let entries = record
        .predictions
        .iter()
        .filter(|p| f64::from(p.predicted) != p.label)
        .map(|p| MisclassEntry {
            id: p.id.clone(),
            true_label: p.label,
            predicted: p.predicted,
            score: p.score,
            error_type: classify_error(p.score),
        })
        .collect();
    MisclassReport {
        method: record.method,
        fraction: record.fraction,
        repeat: record.repeat,
        entries,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub id: String,
    pub score: f64,
    pub label: i8,
    /// `|score| < 1`: the candidate sits in the class-overlap band.
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionPrediction {
    pub pipeline: FittedPipeline,
    pub candidates: Vec<CandidateScore>,
    /// Ids of in-band candidates, closest to the decision boundary first.
    pub ranking: Vec<String>,
}

/// Trains on diagrams with a known function (+1) against background (−1),
/// scores the candidates, and ranks those inside the margin band.
pub fn predict_function(
    known: &[PersistenceDiagram],
    labels: &[f64],
    candidates: &[PersistenceDiagram],
    params: &ModelParams,
) -> Result<FunctionPrediction> {
    let pipeline = fit_pipeline(known, labels, params)?;
    let preds = if candidates.is_empty() {
        Vec::new()
    } else {
        pipeline.predict(candidates)?
    };
    let scored: Vec<CandidateScore> = candidates
        .iter()
        .zip(&preds)
        .map(|(d, p)| CandidateScore {
            id: d.id.clone(),
            score: p.score,
            label: p.label,
            in_band: p.score.abs() < 1.0,
        })
        .collect();
    let mut band: Vec<&CandidateScore> = scored.iter().filter(|c| c.in_band).collect();
    band.sort_by(|a, b| a.score.abs().total_cmp(&b.score.abs()).then_with(|| a.id.cmp(&b.id)));
    let ranking = band.into_iter().map(|c| c.id.clone()).collect();
    Ok(FunctionPrediction {
        pipeline,
        candidates: scored,
        ranking,
    })
}
