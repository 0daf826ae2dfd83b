//! Confusion matrices, per-class precision/recall/F1 and judge agreement
//! measures.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{JudgeAnnotation, RelationLabel};

/// Human-human agreement reported for the original 200-pair study.
pub const REFERENCE_CORR_HH: f64 = 0.805;
/// Human-system agreement reported for the original 200-pair study.
pub const REFERENCE_CORR_HS: f64 = 0.813;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("pair {pair_id} has {found} judge annotations, expected {expected}")]
    AnnotationCount {
        pair_id: String,
        found: usize,
        expected: &'static str,
    },
    #[error("label {0} is not part of the matrix")]
    UnknownLabel(RelationLabel),
    #[error("confusion matrix must be square over its labels")]
    Shape,
}

/// A value that may be undefined, such as a ratio with a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Defined(f64),
    Undefined,
}

impl Metric {
    pub fn ratio(num: f64, den: f64) -> Metric {
        if den == 0.0 {
            Metric::Undefined
        } else {
            Metric::Defined(num / den)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Metric::Defined(v) => Some(v),
            Metric::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Metric::Defined(_))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Defined(v) => write!(f, "{v:.3}"),
            Metric::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Metric::Defined(v) => s.serialize_f64(*v),
            Metric::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Metric::Defined(v)),
            Repr::Text(t) if t == "undefined" => Ok(Metric::Undefined),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"undefined\", got {t:?}"
            ))),
        }
    }
}

/// Rows are actual labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<RelationLabel>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<RelationLabel>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_counts(labels: Vec<RelationLabel>, counts: Vec<Vec<u64>>) -> Result<Self, EvalError> {
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(EvalError::Shape);
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    fn position(&self, label: RelationLabel) -> Result<usize, EvalError> {
        self.labels
            .iter()
            .position(|l| *l == label)
            .ok_or(EvalError::UnknownLabel(label))
    }

    pub fn add(&mut self, actual: RelationLabel, predicted: RelationLabel) -> Result<(), EvalError> {
        let (r, c) = (self.position(actual)?, self.position(predicted)?);
        self.counts[r][c] += 1;
        Ok(())
    }

    pub fn labels(&self) -> &[RelationLabel] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, actual: RelationLabel, predicted: RelationLabel) -> u64 {
        match (self.position(actual), self.position(predicted)) {
            (Ok(r), Ok(c)) => self.counts[r][c],
            _ => 0,
        }
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.labels.len())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.row_sums().iter().sum()
    }

    pub fn diagonal(&self) -> Vec<u64> {
        (0..self.labels.len()).map(|i| self.counts[i][i]).collect()
    }

    /// Each cell as a percentage of its row, undefined for empty rows.
    pub fn row_percentages(&self) -> Vec<Vec<Metric>> {
        self.counts
            .iter()
            .map(|row| {
                let sum: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| Metric::ratio(100.0 * c as f64, sum as f64))
                    .collect()
            })
            .collect()
    }

    /// Tab-separated grid with a header row, row totals and a totals row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("actual\\predicted");
        for l in &self.labels {
            write!(out, "\t{}", l.name()).unwrap();
        }
        out.push_str("\ttotal\n");
        for (l, (row, sum)) in self.labels.iter().zip(self.counts.iter().zip(self.row_sums())) {
            out.push_str(l.name());
            for c in row {
                write!(out, "\t{c}").unwrap();
            }
            writeln!(out, "\t{sum}").unwrap();
        }
        out.push_str("total");
        for c in self.column_sums() {
            write!(out, "\t{c}").unwrap();
        }
        writeln!(out, "\t{}", self.total()).unwrap();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: RelationLabel,
    pub precision: Metric,
    pub recall: Metric,
    pub f1: Metric,
    /// Row total: how many pairs actually have this label.
    pub actual: u64,
    /// Column total: how many pairs were predicted with this label.
    pub predicted: u64,
    pub correct: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: Metric,
    pub total: u64,
}

impl MetricsReport {
    pub fn class(&self, label: RelationLabel) -> Option<&ClassMetrics> {
        self.classes.iter().find(|c| c.label == label)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<16}{:>10}{:>10}{:>10}{:>8}{:>10}\n",
            "class", "precision", "recall", "f1", "actual", "predicted"
        );
        for c in &self.classes {
            writeln!(
                out,
                "{:<16}{:>10}{:>10}{:>10}{:>8}{:>10}",
                c.label.name(),
                c.precision.to_string(),
                c.recall.to_string(),
                c.f1.to_string(),
                c.actual,
                c.predicted
            )
            .unwrap();
        }
        writeln!(out, "accuracy {} over {} pairs", self.accuracy, self.total).unwrap();
        out
    }
}

/// Per-class precision, recall and F1. Precision is undefined for a class
/// never predicted, recall for a class that never occurs, and F1 when
/// either is undefined or both are zero.
pub fn precision_recall_f1(matrix: &ConfusionMatrix) -> MetricsReport {
    let rows = matrix.row_sums();
    let cols = matrix.column_sums();
    let diag = matrix.diagonal();
    let classes = matrix
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &label)| {
            let precision = Metric::ratio(diag[i] as f64, cols[i] as f64);
            let recall = Metric::ratio(diag[i] as f64, rows[i] as f64);
            let f1 = match (precision, recall) {
                (Metric::Defined(p), Metric::Defined(r)) => Metric::ratio(2.0 * p * r, p + r),
                _ => Metric::Undefined,
            };
            ClassMetrics {
                label,
                precision,
                recall,
                f1,
                actual: rows[i],
                predicted: cols[i],
                correct: diag[i],
            }
        })
        .collect();
    let total = matrix.total();
    MetricsReport {
        classes,
        accuracy: Metric::ratio(diag.iter().sum::<u64>() as f64, total as f64),
        total,
    }
}

/// How gold labels are derived from judge annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgreementPolicy {
    /// Keep only pairs on which every judge gave the same label.
    BothAgree,
    /// A prediction is correct when it matches any judge. Otherwise each
    /// distinct judge label contributes one miss.
    AtLeastOne,
}

impl std::str::FromStr for AgreementPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "both-agree" => Ok(AgreementPolicy::BothAgree),
            "at-least-one" => Ok(AgreementPolicy::AtLeastOne),
            _ => Err(format!("unknown policy {s:?} (expected both-agree or at-least-one)")),
        }
    }
}

impl fmt::Display for AgreementPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgreementPolicy::BothAgree => "both-agree",
            AgreementPolicy::AtLeastOne => "at-least-one",
        })
    }
}

/// A system prediction together with the judges' labels for one pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgedPrediction {
    pub pair_id: String,
    pub predicted: RelationLabel,
    pub judges: Vec<RelationLabel>,
}

impl JudgedPrediction {
    pub fn new(pair_id: impl Into<String>, predicted: RelationLabel, judges: Vec<RelationLabel>) -> Self {
        JudgedPrediction {
            pair_id: pair_id.into(),
            predicted,
            judges,
        }
    }

    pub fn from_annotations(
        pair_id: impl Into<String>,
        predicted: RelationLabel,
        annotations: &[JudgeAnnotation],
    ) -> Self {
        let mut annotations: Vec<&JudgeAnnotation> = annotations.iter().collect();
        annotations.sort_by(|a, b| a.judge_id.cmp(&b.judge_id));
        JudgedPrediction::new(pair_id, predicted, annotations.iter().map(|a| a.label).collect())
    }

    fn agreed(&self) -> Option<RelationLabel> {
        let first = *self.judges.first()?;
        self.judges.iter().all(|l| *l == first).then_some(first)
    }
}

fn require(record: &JudgedPrediction, ok: bool, expected: &'static str) -> Result<(), EvalError> {
    if ok {
        Ok(())
    } else {
        Err(EvalError::AnnotationCount {
            pair_id: record.pair_id.clone(),
            found: record.judges.len(),
            expected,
        })
    }
}

/// Confusion matrix of predictions against gold labels chosen by `policy`.
pub fn build_confusion(
    records: &[JudgedPrediction],
    policy: AgreementPolicy,
    labels: Vec<RelationLabel>,
) -> Result<ConfusionMatrix, EvalError> {
    let mut m = ConfusionMatrix::new(labels);
    for r in records {
        match policy {
            AgreementPolicy::BothAgree => {
                require(r, r.judges.len() >= 2, "at least 2")?;
                if let Some(gold) = r.agreed() {
                    m.add(gold, r.predicted)?;
                }
            }
            AgreementPolicy::AtLeastOne => {
                require(r, !r.judges.is_empty(), "at least 1")?;
                if r.judges.contains(&r.predicted) {
                    m.add(r.predicted, r.predicted)?;
                } else {
                    let distinct: BTreeSet<RelationLabel> = r.judges.iter().copied().collect();
                    for gold in distinct {
                        m.add(gold, r.predicted)?;
                    }
                }
            }
        }
    }
    Ok(m)
}

fn require_pairs(records: &[JudgedPrediction]) -> Result<(), EvalError> {
    records
        .iter()
        .try_for_each(|r| require(r, r.judges.len() == 2, "exactly 2"))
}

/// Mean over pairs of 1 when both judges agree, else 0.
pub fn overall_corr_hh(records: &[JudgedPrediction]) -> Result<Metric, EvalError> {
    require_pairs(records)?;
    let agreed = records.iter().filter(|r| r.judges[0] == r.judges[1]).count();
    Ok(Metric::ratio(agreed as f64, records.len() as f64))
}

/// Mean over pairs of 1, 0.5 or 0 for two, one or no judges matching the
/// system label. Every record passed in counts towards the mean.
pub fn overall_corr_hs(records: &[JudgedPrediction]) -> Result<Metric, EvalError> {
    require_pairs(records)?;
    let sum: f64 = records
        .iter()
        .map(|r| 0.5 * r.judges.iter().filter(|l| **l == r.predicted).count() as f64)
        .sum();
    Ok(Metric::ratio(sum, records.len() as f64))
}

/// n(V)/n(U): pairs both judges gave `class` over pairs at least one did.
pub fn per_class_corr_hh(records: &[JudgedPrediction], class: RelationLabel) -> Result<Metric, EvalError> {
    require_pairs(records)?;
    let u = records.iter().filter(|r| r.judges.contains(&class)).count();
    let v = records.iter().filter(|r| r.judges.iter().all(|l| *l == class)).count();
    Ok(Metric::ratio(v as f64, u as f64))
}

/// Jaccard index of two sets, undefined when both are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Metric {
    let union = a.union(b).count();
    Metric::ratio(a.intersection(b).count() as f64, union as f64)
}

/// n(S ∩ U)/n(S ∪ U) where S holds pairs the system labelled `class` and U
/// pairs at least one judge labelled `class`.
pub fn per_class_corr_hs(records: &[JudgedPrediction], class: RelationLabel) -> Result<Metric, EvalError> {
    require_pairs(records)?;
    let s: BTreeSet<&str> = records
        .iter()
        .filter(|r| r.predicted == class)
        .map(|r| r.pair_id.as_str())
        .collect();
    let u: BTreeSet<&str> = records
        .iter()
        .filter(|r| r.judges.contains(&class))
        .map(|r| r.pair_id.as_str())
        .collect();
    Ok(jaccard(&s, &u))
}

/// All four agreement measures, per class where applicable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub pairs: usize,
    pub corr_hh: Metric,
    pub corr_hs: Metric,
    pub per_class: Vec<ClassCorrelation>,
    pub reference_corr_hh: f64,
    pub reference_corr_hs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCorrelation {
    pub label: RelationLabel,
    pub human_human: Metric,
    pub human_system: Metric,
}

pub fn correlation_report(records: &[JudgedPrediction]) -> Result<CorrelationReport, EvalError> {
    let per_class = RelationLabel::ALL
        .iter()
        .map(|&label| {
            Ok(ClassCorrelation {
                label,
                human_human: per_class_corr_hh(records, label)?,
                human_system: per_class_corr_hs(records, label)?,
            })
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(CorrelationReport {
        pairs: records.len(),
        corr_hh: overall_corr_hh(records)?,
        corr_hs: overall_corr_hs(records)?,
        per_class,
        reference_corr_hh: REFERENCE_CORR_HH,
        reference_corr_hs: REFERENCE_CORR_HS,
    })
}
