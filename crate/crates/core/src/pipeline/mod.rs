//! Transcript to classified pair records, plus sampling of records for
//! human annotation.

mod store;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{annotate_sentence, with_naive_coref, AnnotateError};
use crate::citation::{detect_citation, CitationRuleSet};
use crate::corpus::{load_transcript_with, AnnotatedSentence, JudgeAnnotation, RelationLabel, SentencePair};
use crate::eval::JudgedPrediction;
use crate::features::{extract_features, FeatureError, FeatureResources, FeatureVector, GrammarSource};
use crate::svm::{SvmError, SvmModel};

pub use store::{RecordFilter, RecordStore, StoreError, STORE_SCHEMA, STORE_VERSION};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("pair {pair_id}: {source}")]
    Annotate {
        pair_id: String,
        #[source]
        source: AnnotateError,
    },
    #[error("pair {pair_id}: {source}")]
    Features {
        pair_id: String,
        #[source]
        source: FeatureError,
    },
    #[error("pair {pair_id}: {source}")]
    Svm {
        pair_id: String,
        #[source]
        source: SvmError,
    },
    #[error("window must be at least 1")]
    Window,
    #[error("cannot build a worker pool: {0}")]
    Pool(String),
    #[error("unknown pair id {0:?}")]
    UnknownPair(String),
    #[error("judge {judge_id:?} already annotated pair {pair_id:?}")]
    DuplicateAnnotation { pair_id: String, judge_id: String },
    #[error("cluster size must be positive")]
    ZeroClusterSize,
    #[error("sample size {n} is not a multiple of cluster size {cluster_size}")]
    NotDivisible { n: usize, cluster_size: usize },
    #[error("requested {requested} records but only {available} are available")]
    InsufficientRecords { requested: usize, available: usize },
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How a record's label was decided.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    /// The citation rule with this id matched.
    Rule(String),
    Svm,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Rule(id) => write!(f, "rule:{id}"),
            Provenance::Svm => f.write_str("svm"),
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "svm" => Ok(Provenance::Svm),
            _ => match s.strip_prefix("rule:") {
                Some(id) if !id.is_empty() => Ok(Provenance::Rule(id.to_string())),
                _ => Err(format!("invalid provenance {s:?}")),
            },
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Provenance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub pair_id: String,
    pub transcript_id: String,
    /// Sentence positions in the transcript, counting from 0.
    pub target_index: usize,
    pub source_index: usize,
    pub pair: SentencePair,
    pub predicted: RelationLabel,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<BTreeMap<RelationLabel, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_vector: Option<FeatureVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grammar: Option<GrammarSource>,
    #[serde(default)]
    pub judge_annotations: Vec<JudgeAnnotation>,
}

impl PairRecord {
    pub fn is_rule_gated(&self) -> bool {
        matches!(self.provenance, Provenance::Rule(_))
    }

    pub fn judged(&self) -> JudgedPrediction {
        JudgedPrediction::from_annotations(self.pair_id.clone(), self.predicted, &self.judge_annotations)
    }
}

/// Model, citation rules and feature resources used to label pairs.
#[derive(Debug, Clone)]
pub struct Classifier {
    pub model: SvmModel,
    pub rules: CitationRuleSet,
    pub resources: FeatureResources,
}

impl Classifier {
    pub fn new(model: SvmModel, rules: CitationRuleSet, resources: FeatureResources) -> Self {
        Classifier {
            model,
            rules,
            resources,
        }
    }
}

/// Where a pair sits in its transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOrigin {
    pub transcript_id: String,
    pub target_index: usize,
    pub source_index: usize,
}

/// Labels one pair. A citation rule match on the source sentence decides
/// the label outright; otherwise features go to the SVM.
pub fn classify_pair(
    pair: SentencePair,
    origin: PairOrigin,
    classifier: &Classifier,
) -> Result<PairRecord, PipelineError> {
    let base = |pair: SentencePair, predicted, provenance| PairRecord {
        pair_id: pair.id.clone(),
        transcript_id: origin.transcript_id.clone(),
        target_index: origin.target_index,
        source_index: origin.source_index,
        pair,
        predicted,
        provenance,
        scores: None,
        feature_vector: None,
        grammar: None,
        judge_annotations: Vec::new(),
    };
    if let Some(id) = detect_citation(pair.source.raw(), &classifier.rules) {
        let provenance = Provenance::Rule(id.to_string());
        return Ok(base(pair, RelationLabel::Citation, provenance));
    }
    let extraction = extract_features(&pair, &classifier.resources).map_err(|source| PipelineError::Features {
        pair_id: pair.id.clone(),
        source,
    })?;
    let prediction = classifier
        .model
        .predict(&extraction.vector)
        .map_err(|source| PipelineError::Svm {
            pair_id: pair.id.clone(),
            source,
        })?;
    let mut record = base(pair, prediction.label, Provenance::Svm);
    record.scores = Some(prediction.scores);
    record.feature_vector = Some(extraction.vector);
    record.grammar = Some(extraction.grammar);
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Largest sentence distance paired; 1 pairs neighbours only.
    pub window: usize,
    /// Worker threads; 1 classifies sequentially.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { window: 1, jobs: 1 }
    }
}

/// Pair positions `(target, source)` for `n` sentences, ordered by target
/// then distance.
pub fn pair_positions(n: usize, window: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for t in 0..n {
        for d in 1..=window {
            if t + d < n {
                out.push((t, t + d));
            }
        }
    }
    out
}

pub fn pair_id(transcript_id: &str, ordinal: usize) -> String {
    format!("{transcript_id}:{ordinal}")
}

/// Splits a transcript into sentences and classifies every pair of
/// sentences at most `window` apart, the earlier one as target. Pair ids are
/// `<transcript_id>:<n>` with `n` counting from 1 in output order.
pub fn run_transcript(
    transcript_id: &str,
    text: &str,
    classifier: &Classifier,
    options: RunOptions,
) -> Result<Vec<PairRecord>, PipelineError> {
    if options.window == 0 {
        return Err(PipelineError::Window);
    }
    let annotation = &classifier.resources.annotation;
    let sentences: Vec<AnnotatedSentence> = load_transcript_with(text, annotation.abbreviations())
        .iter()
        .map(|s| annotate_sentence(s, annotation))
        .collect();
    let jobs: Vec<(String, usize, usize)> = pair_positions(sentences.len(), options.window)
        .into_iter()
        .enumerate()
        .map(|(i, (t, s))| (pair_id(transcript_id, i + 1), t, s))
        .collect();
    let work = |(id, t, s): &(String, usize, usize)| -> Result<PairRecord, PipelineError> {
        let pair = SentencePair::new(id.clone(), sentences[*t].clone(), sentences[*s].clone());
        let pair = with_naive_coref(pair).map_err(|source| PipelineError::Annotate {
            pair_id: id.clone(),
            source,
        })?;
        let origin = PairOrigin {
            transcript_id: transcript_id.to_string(),
            target_index: *t,
            source_index: *s,
        };
        classify_pair(pair, origin, classifier)
    };
    if options.jobs <= 1 {
        return jobs.iter().map(work).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    pool.install(|| jobs.par_iter().map(work).collect())
}

/// Merges judge annotations into records. Every pair id must exist and a
/// judge may annotate a pair once. Nothing is changed on error.
pub fn attach_annotations(records: &mut [PairRecord], annotations: &[JudgeAnnotation]) -> Result<(), PipelineError> {
    let position: HashMap<&str, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.pair_id.as_str(), i))
        .collect();
    let mut seen: HashSet<(String, String)> = records
        .iter()
        .flat_map(|r| {
            r.judge_annotations
                .iter()
                .map(|a| (a.pair_id.clone(), a.judge_id.clone()))
        })
        .collect();
    let mut updates = Vec::with_capacity(annotations.len());
    for a in annotations {
        let &i = position
            .get(a.pair_id.as_str())
            .ok_or_else(|| PipelineError::UnknownPair(a.pair_id.clone()))?;
        if !seen.insert((a.pair_id.clone(), a.judge_id.clone())) {
            return Err(PipelineError::DuplicateAnnotation {
                pair_id: a.pair_id.clone(),
                judge_id: a.judge_id.clone(),
            });
        }
        updates.push((i, a.clone()));
    }
    for (i, a) in updates {
        records[i].judge_annotations.push(a);
        records[i].judge_annotations.sort_by(|x, y| x.judge_id.cmp(&y.judge_id));
    }
    Ok(())
}

/// Shuffles the records (after ordering them by pair id) with `seed`, keeps
/// the first `n` and cuts them into consecutive clusters.
pub fn sample_for_annotation(
    records: &[PairRecord],
    n: usize,
    seed: u64,
    cluster_size: usize,
) -> Result<Vec<Vec<PairRecord>>, PipelineError> {
    if cluster_size == 0 {
        return Err(PipelineError::ZeroClusterSize);
    }
    if !n.is_multiple_of(cluster_size) {
        return Err(PipelineError::NotDivisible { n, cluster_size });
    }
    if n > records.len() {
        return Err(PipelineError::InsufficientRecords {
            requested: n,
            available: records.len(),
        });
    }
    let mut pool: Vec<&PairRecord> = records.iter().collect();
    pool.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(pool[..n]
        .chunks(cluster_size)
        .map(|c| c.iter().map(|r| (*r).clone()).collect())
        .collect())
}

pub const EXPORT_HEADER: [&str; 5] = ["cluster", "pair_id", "target_text", "source_text", "label"];

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Judge worksheet: one tab-separated row per pair with an empty label
/// column. Clusters are numbered from 1.
pub fn write_annotation_export<W: Write>(clusters: &[Vec<PairRecord>], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", EXPORT_HEADER.join("\t"))?;
    for (c, cluster) in clusters.iter().enumerate() {
        for r in cluster {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t",
                c + 1,
                r.pair_id,
                one_line(r.pair.target.raw()),
                one_line(r.pair.source.raw())
            )?;
        }
    }
    Ok(())
}

/// Evaluation view of records.
pub fn judged_predictions(records: &[PairRecord]) -> Vec<JudgedPrediction> {
    records.iter().map(PairRecord::judged).collect()
}
