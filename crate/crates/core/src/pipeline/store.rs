//! Append-only record store: a JSON header line, then one JSON record per
//! line. A `<store>.idx` side file maps each pair id to its byte offset.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{attach_annotations, PairRecord, PipelineError, Provenance};
use crate::corpus::{JudgeAnnotation, RelationLabel};

pub const STORE_SCHEMA: &str = "lexrel-records";
pub const STORE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: unsupported store version {found} (expected {expected})")]
    Version { path: PathBuf, found: u32, expected: u32 },
    #[error("pair id {0:?} is already stored")]
    DuplicatePairId(String),
    #[error("{0} does not exist")]
    Missing(PathBuf),
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    version: u32,
}

/// Conditions a loaded record must meet; `None` fields match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecordFilter {
    pub transcript_id: Option<String>,
    pub predicted: Option<RelationLabel>,
    pub provenance: Option<Provenance>,
    /// `Some(true)` keeps only rule-gated records, `Some(false)` only SVM ones.
    pub rule_gated: Option<bool>,
}

impl RecordFilter {
    pub fn all() -> Self {
        RecordFilter::default()
    }

    pub fn matches(&self, r: &PairRecord) -> bool {
        self.transcript_id.as_ref().is_none_or(|t| *t == r.transcript_id)
            && self.predicted.is_none_or(|p| p == r.predicted)
            && self.provenance.as_ref().is_none_or(|p| *p == r.provenance)
            && self.rule_gated.is_none_or(|g| g == r.is_rule_gated())
    }
}

#[derive(Debug)]
pub struct RecordStore {
    path: PathBuf,
    /// pair id to byte offset, in file order
    offsets: Vec<(String, u64)>,
    ids: HashSet<String>,
    end: u64,
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn header_line() -> String {
    serde_json::to_string(&Header {
        schema: STORE_SCHEMA.into(),
        version: STORE_VERSION,
    })
    .expect("header serializes")
}

impl RecordStore {
    pub fn index_path(path: &Path) -> PathBuf {
        let mut p = path.as_os_str().to_owned();
        p.push(".idx");
        PathBuf::from(p)
    }

    /// Creates an empty store, replacing any existing file.
    pub fn create(path: &Path) -> Result<Self, StoreError> {
        let header = header_line();
        fs::write(path, format!("{header}\n")).map_err(io(path))?;
        let store = RecordStore {
            path: path.to_path_buf(),
            offsets: Vec::new(),
            ids: HashSet::new(),
            end: header.len() as u64 + 1,
        };
        store.write_index()?;
        Ok(store)
    }

    /// Opens an existing store, validating every line and refreshing the
    /// index side file.
    pub fn open(path: &Path) -> Result<Self, StoreError> {
        if !path.exists() {
            return Err(StoreError::Missing(path.to_path_buf()));
        }
        let mut store = RecordStore {
            path: path.to_path_buf(),
            offsets: Vec::new(),
            ids: HashSet::new(),
            end: 0,
        };
        let mut offset = 0u64;
        Self::scan(path, |line_no, line, record| {
            let len = line.len() as u64 + 1;
            if let Some(r) = record {
                if !store.ids.insert(r.pair_id.clone()) {
                    return Err(StoreError::Corrupt {
                        path: path.to_path_buf(),
                        line: line_no,
                        message: format!("duplicate pair id {:?}", r.pair_id),
                    });
                }
                store.offsets.push((r.pair_id, offset));
            }
            offset += len;
            Ok(())
        })?;
        store.end = offset;
        let fresh = store.index_text();
        let idx = Self::index_path(path);
        if fs::read_to_string(&idx).ok().as_deref() != Some(fresh.as_str()) {
            store.write_index()?;
        }
        Ok(store)
    }

    pub fn open_or_create(path: &Path) -> Result<Self, StoreError> {
        if path.exists() {
            Self::open(path)
        } else {
            Self::create(path)
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn contains(&self, pair_id: &str) -> bool {
        self.ids.contains(pair_id)
    }

    pub fn pair_ids(&self) -> impl Iterator<Item = &str> {
        self.offsets.iter().map(|(id, _)| id.as_str())
    }

    fn index_text(&self) -> String {
        self.offsets.iter().map(|(id, off)| format!("{id}\t{off}\n")).collect()
    }

    fn write_index(&self) -> Result<(), StoreError> {
        let idx = Self::index_path(&self.path);
        fs::write(&idx, self.index_text()).map_err(io(&idx))
    }

    /// Calls `f` with the 1-based line number, the raw line and the parsed
    /// record (none for the header).
    fn scan(
        path: &Path,
        mut f: impl FnMut(usize, &str, Option<PairRecord>) -> Result<(), StoreError>,
    ) -> Result<(), StoreError> {
        let path = &path.to_path_buf();
        let file = File::open(path).map_err(io(path))?;
        let corrupt = |line, message: String| StoreError::Corrupt {
            path: path.clone(),
            line,
            message,
        };
        let mut seen_header = false;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io(path))?;
            let n = i + 1;
            seen_header = true;
            if n == 1 {
                let h: Header = serde_json::from_str(&line).map_err(|e| corrupt(1, format!("bad header: {e}")))?;
                if h.schema != STORE_SCHEMA {
                    return Err(corrupt(1, format!("unknown schema {:?}", h.schema)));
                }
                if h.version != STORE_VERSION {
                    return Err(StoreError::Version {
                        path: path.clone(),
                        found: h.version,
                        expected: STORE_VERSION,
                    });
                }
                f(n, &line, None)?;
                continue;
            }
            let record: PairRecord = serde_json::from_str(&line).map_err(|e| corrupt(n, e.to_string()))?;
            f(n, &line, Some(record))?;
        }
        if !seen_header {
            return Err(corrupt(1, "missing header".into()));
        }
        Ok(())
    }

    /// Appends records in order. Fails without writing anything if any pair
    /// id is already stored or repeated in the batch.
    pub fn append(&mut self, records: &[PairRecord]) -> Result<(), StoreError> {
        let mut batch = HashSet::new();
        for r in records {
            if self.ids.contains(&r.pair_id) || !batch.insert(r.pair_id.as_str()) {
                return Err(StoreError::DuplicatePairId(r.pair_id.clone()));
            }
        }
        let mut text = String::new();
        let mut offsets = Vec::with_capacity(records.len());
        for r in records {
            offsets.push((r.pair_id.clone(), self.end + text.len() as u64));
            text.push_str(&serde_json::to_string(r).expect("records serialize"));
            text.push('\n');
        }
        let mut file = OpenOptions::new()
            .append(true)
            .open(&self.path)
            .map_err(io(&self.path))?;
        file.write_all(text.as_bytes()).map_err(io(&self.path))?;
        file.flush().map_err(io(&self.path))?;
        self.end += text.len() as u64;
        let idx_text: String = offsets.iter().map(|(id, off)| format!("{id}\t{off}\n")).collect();
        for (id, _) in &offsets {
            self.ids.insert(id.clone());
        }
        self.offsets.extend(offsets);
        let idx = Self::index_path(&self.path);
        let mut idx_file = OpenOptions::new()
            .append(true)
            .create(true)
            .open(&idx)
            .map_err(io(&idx))?;
        idx_file.write_all(idx_text.as_bytes()).map_err(io(&idx))?;
        Ok(())
    }

    /// Records in file order that pass the filter.
    pub fn load(&self, filter: &RecordFilter) -> Result<Vec<PairRecord>, StoreError> {
        let mut out = Vec::new();
        Self::scan(&self.path, |_, _, record| {
            if let Some(r) = record.filter(|r| filter.matches(r)) {
                out.push(r);
            }
            Ok(())
        })?;
        Ok(out)
    }

    pub fn load_all(&self) -> Result<Vec<PairRecord>, StoreError> {
        self.load(&RecordFilter::all())
    }

    /// Reads one record through the index.
    pub fn get(&self, pair_id: &str) -> Result<Option<PairRecord>, StoreError> {
        let Some((_, offset)) = self.offsets.iter().find(|(id, _)| id == pair_id) else {
            return Ok(None);
        };
        let mut file = File::open(&self.path).map_err(io(&self.path))?;
        file.seek(SeekFrom::Start(*offset)).map_err(io(&self.path))?;
        let mut line = String::new();
        BufReader::new(&mut file).read_line(&mut line).map_err(io(&self.path))?;
        let record = serde_json::from_str(line.trim_end()).map_err(|e| StoreError::Corrupt {
            path: self.path.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        Ok(Some(record))
    }

    /// Replaces the whole store with `records`, keeping their order.
    pub fn rewrite(&mut self, records: &[PairRecord]) -> Result<(), StoreError> {
        let tmp = self.path.with_extension("tmp");
        let mut fresh = RecordStore::create(&tmp)?;
        fresh.append(records)?;
        fs::rename(&tmp, &self.path).map_err(io(&self.path))?;
        let _ = fs::remove_file(Self::index_path(&tmp));
        fresh.path = self.path.clone();
        fresh.write_index()?;
        *self = fresh;
        Ok(())
    }

    /// Merges judge annotations into the stored records and returns them.
    pub fn attach_annotations(&mut self, annotations: &[JudgeAnnotation]) -> Result<Vec<PairRecord>, PipelineError> {
        let mut records = self.load_all()?;
        attach_annotations(&mut records, annotations)?;
        self.rewrite(&records)?;
        Ok(records)
    }

    /// Label histogram of the stored records.
    pub fn census(&self) -> Result<BTreeMap<RelationLabel, usize>, StoreError> {
        let mut m = BTreeMap::new();
        for r in self.load_all()? {
            *m.entry(r.predicted).or_default() += 1;
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citation::CitationRuleSet;
    use crate::features::FeatureResources;
    use crate::pipeline::{run_transcript, Classifier, RunOptions};
    use crate::svm::{synthetic_separable, train, TrainingConfig};

    fn records() -> Vec<PairRecord> {
        let data = synthetic_separable(10, 1, RelationLabel::Elaboration, RelationLabel::NoRelation);
        let model = train(
            &data,
            &TrainingConfig {
                epochs: 5,
                ..TrainingConfig::default()
            },
        )
        .unwrap();
        let c = Classifier::new(model, CitationRuleSet::bundled(), FeatureResources::bundled());
        let text = "Lee pleaded guilty. Id., at 59. He appealed. Lee v. United States (2017) decided it.";
        run_transcript("doc", text, &c, RunOptions::default()).unwrap()
    }

    #[test]
    fn round_trip_and_filters() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let recs = records();
        let mut store = RecordStore::create(&path).unwrap();
        store.append(&recs).unwrap();
        assert_eq!(store.load_all().unwrap(), recs);
        let reopened = RecordStore::open(&path).unwrap();
        assert_eq!(reopened.load_all().unwrap(), recs);
        assert_eq!(reopened.get("doc:2").unwrap().unwrap(), recs[1]);
        assert_eq!(reopened.get("doc:9").unwrap(), None);
        let cites = reopened
            .load(&RecordFilter {
                predicted: Some(RelationLabel::Citation),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(cites.len(), 2);
        let r4 = reopened
            .load(&RecordFilter {
                provenance: Some(Provenance::Rule("R4".into())),
                ..Default::default()
            })
            .unwrap();
        assert_eq!(r4.len(), 1);
        let other = reopened
            .load(&RecordFilter {
                transcript_id: Some("other".into()),
                ..Default::default()
            })
            .unwrap();
        assert!(other.is_empty());
        let idx = fs::read_to_string(RecordStore::index_path(&path)).unwrap();
        assert_eq!(idx.lines().count(), 3);
    }

    #[test]
    fn duplicates_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let recs = records();
        let mut store = RecordStore::create(&path).unwrap();
        store.append(&recs[..1]).unwrap();
        assert!(matches!(store.append(&recs[..1]), Err(StoreError::DuplicatePairId(id)) if id == "doc:1"));
        assert_eq!(RecordStore::open(&path).unwrap().len(), 1);
    }

    #[test]
    fn corrupt_line_is_located() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let mut store = RecordStore::create(&path).unwrap();
        store.append(&records()).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("{not json\n");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            RecordStore::open(&path),
            Err(StoreError::Corrupt { line: 5, .. })
        ));
        assert!(matches!(
            RecordStore::open(&dir.path().join("none")),
            Err(StoreError::Missing(_))
        ));
    }

    #[test]
    fn annotations_persist() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let mut store = RecordStore::create(&path).unwrap();
        store.append(&records()).unwrap();
        let a = JudgeAnnotation {
            pair_id: "doc:3".into(),
            judge_id: "j1".into(),
            label: RelationLabel::Citation,
        };
        store.attach_annotations(std::slice::from_ref(&a)).unwrap();
        let back = RecordStore::open(&path).unwrap();
        assert_eq!(back.get("doc:3").unwrap().unwrap().judge_annotations, vec![a.clone()]);
        assert!(matches!(
            store.attach_annotations(&[a]),
            Err(PipelineError::DuplicateAnnotation { .. })
        ));
    }
}
