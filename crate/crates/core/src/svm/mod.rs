//! One-vs-rest linear SVM trained by seeded stochastic subgradient descent.

mod dataset;
mod model;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::RelationLabel;
use crate::eval::{precision_recall_f1, ConfusionMatrix, MetricsReport};
use crate::features::{FeatureVector, BOOLEAN_FEATURES, FEATURE_COUNT, FEATURE_NAMES};

pub use dataset::{parse_feature_dataset, write_feature_dataset, FeatureDatasetError};
pub use model::{load_model, save_model, FORMAT_VERSION, MODEL_MAGIC};

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("training data is empty")]
    EmptyDataset,
    #[error("training data needs at least two labels, found {0:?}")]
    SingleClass(Vec<RelationLabel>),
    #[error("feature manifest mismatch: model has {model:?}, input has {input:?}")]
    ManifestMismatch { model: Vec<String>, input: Vec<String> },
    #[error("feature {feature} of example {index} is not finite")]
    NonFinite { index: usize, feature: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("class {label} has {count} examples, fewer than {k} folds")]
    TooFewExamples {
        label: RelationLabel,
        count: usize,
        k: usize,
    },
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassWeighting {
    Uniform,
    InverseFrequency,
}

impl std::str::FromStr for ClassWeighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(ClassWeighting::Uniform),
            "inverse-frequency" => Ok(ClassWeighting::InverseFrequency),
            _ => Err(format!("unknown class weighting {s:?}")),
        }
    }
}

/// Hyperparameters. The step size at update `t` (counting from 1 across
/// all epochs) is `1 / (1 + 2 lambda t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub class_weighting: ClassWeighting,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            lambda: 1e-3,
            epochs: 200,
            seed: 0,
            class_weighting: ClassWeighting::InverseFrequency,
        }
    }
}

impl TrainingConfig {
    fn validate(&self) -> Result<(), SvmError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(SvmError::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if self.epochs == 0 {
            return Err(SvmError::Config("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Hyperparameters as stored with a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub class_weighting: ClassWeighting,
    /// Per-example weight of each class, in `classes` order.
    pub class_weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub format_version: u32,
    pub classes: Vec<RelationLabel>,
    pub feature_manifest: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub hyperparams: Hyperparams,
    /// Digest of the canonically ordered training data.
    pub training_fingerprint: String,
}

/// A prediction with one score per model class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: RelationLabel,
    pub scores: BTreeMap<RelationLabel, f64>,
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl SvmModel {
    pub fn manifest_matches(&self) -> bool {
        self.feature_manifest.len() == FEATURE_COUNT
            && self.feature_manifest.iter().zip(FEATURE_NAMES).all(|(a, b)| a == b)
    }

    /// Scores every class and returns the best, ties going to the class that
    /// comes first in label order.
    pub fn predict(&self, fv: &FeatureVector) -> Result<Prediction, SvmError> {
        if !self.manifest_matches() {
            return Err(SvmError::ManifestMismatch {
                model: self.feature_manifest.clone(),
                input: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            });
        }
        Ok(self.predict_raw(&fv.to_array()))
    }

    fn predict_raw(&self, x: &[f64]) -> Prediction {
        let mut order: Vec<usize> = (0..self.classes.len()).collect();
        order.sort_by_key(|&i| self.classes[i]);
        let mut best: Option<(usize, f64)> = None;
        let mut scores = BTreeMap::new();
        for i in order {
            let s = dot(&self.weights[i], x) + self.biases[i];
            scores.insert(self.classes[i], s);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let (i, _) = best.expect("a model has at least one class");
        Prediction {
            label: self.classes[i],
            scores,
        }
    }

    pub fn has_class(&self, label: RelationLabel) -> bool {
        self.classes.contains(&label)
    }
}

/// Free-function form of [`SvmModel::predict`].
pub fn predict(model: &SvmModel, fv: &FeatureVector) -> Result<Prediction, SvmError> {
    model.predict(fv)
}

/// Objective values recorded at the end of every epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// Sum over the one-vs-rest problems of the regularised weighted hinge
    /// objective of the model as it stood after each epoch.
    pub objective_history: Vec<f64>,
    pub training_accuracy: f64,
}

impl TrainingReport {
    /// True when the objective never increases over the last quarter of the
    /// epochs.
    pub fn tail_non_increasing(&self) -> bool {
        let n = self.objective_history.len();
        let start = n - n.div_ceil(4);
        self.objective_history[start..].windows(2).all(|w| w[1] <= w[0])
    }
}

type Example = ([f64; FEATURE_COUNT], RelationLabel);

fn canonical(dataset: &[(FeatureVector, RelationLabel)]) -> Result<Vec<Example>, SvmError> {
    let mut data: Vec<Example> = Vec::with_capacity(dataset.len());
    for (index, (fv, label)) in dataset.iter().enumerate() {
        let x = fv.to_array();
        if let Some(feature) = x.iter().position(|v| !v.is_finite()) {
            return Err(SvmError::NonFinite { index, feature });
        }
        data.push((x, *label));
    }
    data.sort_by(|a, b| {
        a.1.cmp(&b.1).then_with(|| {
            let ka = a.0.map(f64::to_bits);
            let kb = b.0.map(f64::to_bits);
            ka.cmp(&kb)
        })
    });
    Ok(data)
}

fn fingerprint(data: &[Example]) -> String {
    let mut h = Sha256::new();
    for (x, label) in data {
        h.update(label.name().as_bytes());
        for v in x {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn class_weights(data: &[Example], classes: &[RelationLabel], weighting: ClassWeighting) -> Vec<f64> {
    let n = data.len() as f64;
    classes
        .iter()
        .map(|c| match weighting {
            ClassWeighting::Uniform => 1.0 / n,
            ClassWeighting::InverseFrequency => {
                let count = data.iter().filter(|(_, l)| l == c).count() as f64;
                1.0 / (count * classes.len() as f64)
            }
        })
        .collect()
}

fn objective(w: &[f64], b: f64, lambda: f64, data: &[Example], weights: &[f64], positive: RelationLabel) -> f64 {
    let reg = lambda * dot(w, w);
    let loss: f64 = data
        .iter()
        .zip(weights)
        .map(|((x, l), c)| {
            let y = if *l == positive { 1.0 } else { -1.0 };
            c * (1.0 - y * (dot(w, x) + b)).max(0.0)
        })
        .sum();
    reg + loss
}

/// Best point on the segment from `(w0, b0)` towards `(w1, b1)`. Stays put
/// unless some point of the segment scores no worse.
fn line_search(
    (w0, b0): (&[f64; FEATURE_COUNT], f64),
    (w1, b1): (&[f64; FEATURE_COUNT], f64),
    lambda: f64,
    data: &[Example],
    weights: &[f64],
    positive: RelationLabel,
) -> ([f64; FEATURE_COUNT], f64) {
    let mut d = [0.0; FEATURE_COUNT];
    for (j, v) in d.iter_mut().enumerate() {
        *v = w1[j] - w0[j];
    }
    let db = b1 - b0;
    // hinge argument of example i at step s is r_i - s * q_i
    let (r, q): (Vec<f64>, Vec<f64>) = data
        .iter()
        .map(|(x, l)| {
            let y = if *l == positive { 1.0 } else { -1.0 };
            (1.0 - y * (dot(w0, x) + b0), y * (dot(&d, x) + db))
        })
        .unzip();
    let (wd, dd) = (dot(w0, &d), dot(&d, &d));
    let slope = |s: f64| {
        let active: f64 = r
            .iter()
            .zip(&q)
            .zip(weights)
            .filter(|((ri, qi), _)| **ri - s * **qi > 0.0)
            .map(|((_, qi), c)| c * qi)
            .sum();
        2.0 * lambda * (wd + s * dd) - active
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if slope(1.0) < 0.0 {
        lo = 1.0;
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let at = |s: f64| {
        let mut w = *w0;
        for (v, dj) in w.iter_mut().zip(&d) {
            *v += s * dj;
        }
        (w, b0 + s * db)
    };
    let current = objective(w0, b0, lambda, data, weights, positive);
    let (w, b) = at(lo);
    if objective(&w, b, lambda, data, weights, positive) <= current {
        (w, b)
    } else {
        (*w0, b0)
    }
}

/// Trains one classifier per label present in the data.
///
/// Each epoch runs shuffled subgradient steps and keeps a running average of
/// the iterates. The model then moves towards that average as far as lowers
/// its objective, so the recorded objective never rises.
pub fn train(dataset: &[(FeatureVector, RelationLabel)], config: &TrainingConfig) -> Result<SvmModel, SvmError> {
    train_with_report(dataset, config).map(|(m, _)| m)
}

pub fn train_with_report(
    dataset: &[(FeatureVector, RelationLabel)],
    config: &TrainingConfig,
) -> Result<(SvmModel, TrainingReport), SvmError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(SvmError::EmptyDataset);
    }
    let data = canonical(dataset)?;
    let mut classes: Vec<RelationLabel> = data.iter().map(|(_, l)| *l).collect();
    classes.dedup();
    if classes.len() < 2 {
        return Err(SvmError::SingleClass(classes));
    }
    let per_class = class_weights(&data, &classes, config.class_weighting);
    let example_weight: Vec<f64> = data
        .iter()
        .map(|(_, l)| per_class[classes.iter().position(|c| c == l).expect("label is a class")])
        .collect();
    let n = data.len() as f64;

    let k = classes.len();
    let mut w = vec![[0.0f64; FEATURE_COUNT]; k];
    let mut b = vec![0.0f64; k];
    let mut avg_w = vec![[0.0f64; FEATURE_COUNT]; k];
    let mut avg_b = vec![0.0f64; k];
    let mut model_w = vec![[0.0f64; FEATURE_COUNT]; k];
    let mut model_b = vec![0.0f64; k];
    let mut history = Vec::with_capacity(config.epochs);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut t: u64 = 0;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (1.0 + 2.0 * config.lambda * t as f64);
            let (x, label) = &data[i];
            // unbiased estimate of the weighted loss gradient under uniform sampling
            let scale = n * example_weight[i];
            for c in 0..k {
                let y = if *label == classes[c] { 1.0 } else { -1.0 };
                let margin = y * (dot(&w[c], x) + b[c]);
                let shrink = 1.0 - eta * 2.0 * config.lambda;
                for v in w[c].iter_mut() {
                    *v *= shrink;
                }
                if margin < 1.0 {
                    for (v, xj) in w[c].iter_mut().zip(x) {
                        *v += eta * scale * y * xj;
                    }
                    b[c] += eta * scale * y;
                }
                let m = 1.0 / t as f64;
                for (a, v) in avg_w[c].iter_mut().zip(&w[c]) {
                    *a += (v - *a) * m;
                }
                avg_b[c] += (b[c] - avg_b[c]) * m;
            }
        }
        for c in 0..k {
            (model_w[c], model_b[c]) = line_search(
                (&model_w[c], model_b[c]),
                (&avg_w[c], avg_b[c]),
                config.lambda,
                &data,
                &example_weight,
                classes[c],
            );
        }
        let total: f64 = (0..k)
            .map(|c| {
                objective(
                    &model_w[c],
                    model_b[c],
                    config.lambda,
                    &data,
                    &example_weight,
                    classes[c],
                )
            })
            .sum();
        history.push(total);
    }

    let model = SvmModel {
        format_version: FORMAT_VERSION,
        classes: classes.clone(),
        feature_manifest: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        weights: model_w.iter().map(|v| v.to_vec()).collect(),
        biases: model_b,
        hyperparams: Hyperparams {
            lambda: config.lambda,
            epochs: config.epochs,
            seed: config.seed,
            class_weighting: config.class_weighting,
            class_weights: per_class,
        },
        training_fingerprint: fingerprint(&data),
    };
    let correct = data.iter().filter(|(x, l)| model.predict_raw(x).label == *l).count();
    let report = TrainingReport {
        objective_history: history,
        training_accuracy: correct as f64 / n,
    };
    Ok((model, report))
}

/// Training-set accuracy of a model.
pub fn accuracy(model: &SvmModel, dataset: &[(FeatureVector, RelationLabel)]) -> Result<f64, SvmError> {
    if dataset.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0;
    for (fv, label) in dataset {
        if model.predict(fv)?.label == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub k: usize,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Metrics of the confusion matrix summed over all folds.
    pub aggregate: MetricsReport,
}

/// Stratified fold index for each example of the canonically ordered data.
pub fn fold_assignments(labels: &[RelationLabel], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut distinct: Vec<RelationLabel> = labels.to_vec();
    distinct.sort();
    distinct.dedup();
    for class in distinct {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for (j, i) in members.into_iter().enumerate() {
            fold[i] = j % k;
        }
    }
    fold
}

/// Stratified k-fold cross-validation with seeded fold assignment.
pub fn cross_validate(
    dataset: &[(FeatureVector, RelationLabel)],
    k: usize,
    config: &TrainingConfig,
) -> Result<CrossValidation, SvmError> {
    if k < 2 {
        return Err(SvmError::Config(format!("k must be at least 2, got {k}")));
    }
    config.validate()?;
    if dataset.is_empty() {
        return Err(SvmError::EmptyDataset);
    }
    let data = canonical(dataset)?;
    let labels: Vec<RelationLabel> = data.iter().map(|(_, l)| *l).collect();
    for class in RelationLabel::ALL {
        let count = labels.iter().filter(|l| **l == class).count();
        if count > 0 && count < k {
            return Err(SvmError::TooFewExamples { label: class, count, k });
        }
    }
    let assignment = fold_assignments(&labels, k, config.seed);
    let mut total = ConfusionMatrix::new(RelationLabel::ALL.to_vec());
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let split = |keep: bool| -> Vec<(FeatureVector, RelationLabel)> {
            data.iter()
                .zip(&assignment)
                .filter(|(_, f)| (**f == fold) == keep)
                .map(|((x, l), _)| (FeatureVector::from_array(*x), *l))
                .collect()
        };
        let (train_set, test_set) = (split(false), split(true));
        let model = train(&train_set, config)?;
        let mut matrix = ConfusionMatrix::new(RelationLabel::ALL.to_vec());
        for (fv, label) in &test_set {
            let predicted = model.predict(fv)?.label;
            matrix.add(*label, predicted).expect("all labels are in the matrix");
            total.add(*label, predicted).expect("all labels are in the matrix");
        }
        let metrics = precision_recall_f1(&matrix);
        folds.push(FoldResult {
            fold,
            train_size: train_set.len(),
            test_size: test_set.len(),
            accuracy: metrics.accuracy.value().unwrap_or(0.0),
            metrics,
        });
    }
    let accs: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let mean = accs.iter().sum::<f64>() / k as f64;
    let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k as f64;
    Ok(CrossValidation {
        k,
        folds,
        mean_accuracy: mean,
        std_accuracy: var.sqrt(),
        aggregate: precision_recall_f1(&total),
    })
}

/// Picks the lambda with the best mean cross-validated accuracy; earlier
/// grid entries win ties.
pub fn select_lambda(
    dataset: &[(FeatureVector, RelationLabel)],
    grid: &[f64],
    k: usize,
    config: &TrainingConfig,
) -> Result<(f64, Vec<(f64, f64)>), SvmError> {
    let mut scores = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &lambda in grid {
        let cv = cross_validate(
            dataset,
            k,
            &TrainingConfig {
                lambda,
                ..config.clone()
            },
        )?;
        scores.push((lambda, cv.mean_accuracy));
        if best.is_none_or(|(_, a)| cv.mean_accuracy > a) {
            best = Some((lambda, cv.mean_accuracy));
        }
    }
    let (lambda, _) = best.ok_or_else(|| SvmError::Config("empty lambda grid".into()))?;
    Ok((lambda, scores))
}

pub const DEFAULT_LAMBDA_GRID: [f64; 4] = [1e-4, 1e-3, 1e-2, 1e-1];

/// Two well separated clusters: `first` near the origin and `second` near
/// the all-ones corner, `per_class` vectors each. Boolean features are 0 in
/// the first cluster and 1 in the second.
pub fn synthetic_separable(
    per_class: usize,
    seed: u64,
    first: RelationLabel,
    second: RelationLabel,
) -> Vec<(FeatureVector, RelationLabel)> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * per_class);
    for (label, base) in [(first, 0.0), (second, 0.8)] {
        for _ in 0..per_class {
            let v: [f64; FEATURE_COUNT] = std::array::from_fn(|i| {
                let x: f64 = base + rng.gen_range(0.0..0.2);
                if BOOLEAN_FEATURES.contains(&i) {
                    x.round()
                } else {
                    x
                }
            });
            out.push((FeatureVector::from_array(v), label));
        }
    }
    out
}
