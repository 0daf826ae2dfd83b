//! Labelled pair datasets and judge annotation files.
//!
//! Both formats are UTF-8, one tab-separated record per line. Blank lines and
//! lines starting with `#` are skipped, and an optional header row naming the
//! columns is accepted.
//!
//! * pair dataset: `id  target_text  source_text  label`
//! * judge annotations: `pair_id  judge_id  label`

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{CstRelation, JudgeAnnotation, ParseError, ParseErrorKind, RelationLabel};

pub const PAIR_HEADER: [&str; 4] = ["id", "target_text", "source_text", "label"];
pub const JUDGE_HEADER: [&str; 3] = ["pair_id", "judge_id", "label"];

/// Pair counts per CST relation in the public CST-bank release.
pub const CST_BANK_COUNTS: [(CstRelation, usize); 14] = [
    (CstRelation::Identity, 99),
    (CstRelation::Equivalent, 101),
    (CstRelation::Subsumption, 590),
    (CstRelation::Contradiction, 48),
    (CstRelation::HistoricalBackground, 245),
    (CstRelation::Modality, 17),
    (CstRelation::Attribution, 134),
    (CstRelation::Summary, 11),
    (CstRelation::FollowUp, 159),
    (CstRelation::IndirectSpeech, 4),
    (CstRelation::Elaboration, 305),
    (CstRelation::Fulfillment, 10),
    (CstRelation::Description, 244),
    (CstRelation::Overlap, 429),
];

/// A dataset label: either a CST relation or one of the five relation types
/// directly (used for the locally annotated No Relation pairs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DatasetLabel {
    Cst(CstRelation),
    Relation(RelationLabel),
}

impl DatasetLabel {
    /// Resolves a label name, trying CST relation names first.
    pub fn parse(s: &str) -> Option<Self> {
        if let Ok(c) = s.parse::<CstRelation>() {
            return Some(DatasetLabel::Cst(c));
        }
        s.parse::<RelationLabel>().ok().map(DatasetLabel::Relation)
    }

    pub fn relation(self) -> RelationLabel {
        match self {
            DatasetLabel::Cst(c) => c.relation(),
            DatasetLabel::Relation(r) => r,
        }
    }
}

impl fmt::Display for DatasetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetLabel::Cst(c) => c.fmt(f),
            DatasetLabel::Relation(r) => r.fmt(f),
        }
    }
}

/// One record of a pair dataset, before annotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub id: String,
    pub target: String,
    pub source: String,
    pub label: DatasetLabel,
}

fn column_of(fields: &[&str], field: usize) -> usize {
    1 + fields[..field].iter().map(|f| f.chars().count() + 1).sum::<usize>()
}

fn records<R: BufRead>(reader: R, header: &[&str]) -> impl Iterator<Item = Result<(usize, String), ParseError>> {
    let header = header.join("\t");
    let mut first = true;
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e.into())),
        };
        let line = line.strip_suffix('\r').unwrap_or(&line).to_string();
        if line.trim().is_empty() || line.starts_with('#') {
            return None;
        }
        if std::mem::take(&mut first) && line.trim().eq_ignore_ascii_case(&header) {
            return None;
        }
        Some(Ok((i + 1, line)))
    })
}

fn split_fields<'a>(line_no: usize, line: &'a str, names: &[&'static str]) -> Result<Vec<&'a str>, ParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() > names.len() {
        return Err(ParseError::at(
            line_no,
            column_of(&fields, names.len()),
            ParseErrorKind::MalformedLine(format!("expected {} fields, found {}", names.len(), fields.len())),
        ));
    }
    for (i, name) in names.iter().enumerate() {
        match fields.get(i) {
            Some(f) if !f.trim().is_empty() => {}
            Some(_) => {
                return Err(ParseError::at(
                    line_no,
                    column_of(&fields, i),
                    ParseErrorKind::MissingField(name),
                ))
            }
            None => {
                let col = line.chars().count() + 1;
                return Err(ParseError::at(line_no, col, ParseErrorKind::MissingField(name)));
            }
        }
    }
    Ok(fields)
}

/// Reads a labelled pair dataset. Labels resolve case-insensitively against
/// the CST relations and then the five relation types.
pub fn parse_pair_dataset<R: BufRead>(reader: R) -> Result<Vec<LabeledPair>, ParseError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for rec in records(reader, &PAIR_HEADER) {
        let (line_no, line) = rec?;
        let f = split_fields(line_no, &line, &PAIR_HEADER)?;
        let label = DatasetLabel::parse(f[3].trim()).ok_or_else(|| {
            ParseError::at(
                line_no,
                column_of(&f, 3),
                ParseErrorKind::UnknownLabel(f[3].trim().to_string()),
            )
        })?;
        let id = f[0].trim().to_string();
        if !ids.insert(id.clone()) {
            return Err(ParseError::at(line_no, 1, ParseErrorKind::DuplicateId(id)));
        }
        out.push(LabeledPair {
            id,
            target: f[1].trim().to_string(),
            source: f[2].trim().to_string(),
            label,
        });
    }
    Ok(out)
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn write_pair_dataset<W: Write>(pairs: &[LabeledPair], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", PAIR_HEADER.join("\t"))?;
    for p in pairs {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            one_line(&p.id),
            one_line(&p.target),
            one_line(&p.source),
            p.label
        )?;
    }
    Ok(())
}

/// Reads judge annotations. A judge may label a pair at most once.
pub fn parse_judge_annotations<R: BufRead>(reader: R) -> Result<Vec<JudgeAnnotation>, ParseError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in records(reader, &JUDGE_HEADER) {
        let (line_no, line) = rec?;
        let f = split_fields(line_no, &line, &JUDGE_HEADER)?;
        let label: RelationLabel = f[2].trim().parse().map_err(|s: String| {
            ParseError::at(
                line_no,
                column_of(&f, 2),
                ParseErrorKind::UnknownLabel(s.trim().to_string()),
            )
        })?;
        let pair_id = f[0].trim().to_string();
        let judge_id = f[1].trim().to_string();
        if !seen.insert((pair_id.clone(), judge_id.clone())) {
            return Err(ParseError::at(
                line_no,
                1,
                ParseErrorKind::DuplicateAnnotation { pair_id, judge_id },
            ));
        }
        out.push(JudgeAnnotation {
            pair_id,
            judge_id,
            label,
        });
    }
    Ok(out)
}

pub fn write_judge_annotations<W: Write>(annotations: &[JudgeAnnotation], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", JUDGE_HEADER.join("\t"))?;
    for a in annotations {
        writeln!(w, "{}\t{}\t{}", a.pair_id, a.judge_id, a.label)?;
    }
    Ok(())
}

/// Label histogram of a pair dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetCensus {
    /// Every CST relation, zero counts included.
    pub cst: BTreeMap<CstRelation, usize>,
    /// Records labelled directly with a relation type.
    pub relation_only: BTreeMap<RelationLabel, usize>,
    /// Counts after mapping every record onto the five relation types.
    pub mapped: BTreeMap<RelationLabel, usize>,
}

impl DatasetCensus {
    pub fn count(&self, cst: CstRelation) -> usize {
        self.cst[&cst]
    }

    pub fn total(&self) -> usize {
        self.cst.values().sum::<usize>() + self.relation_only.values().sum::<usize>()
    }

    /// Relations whose counts differ from the CST-bank release, as
    /// `(relation, expected, actual)`.
    pub fn release_mismatches(&self) -> Vec<(CstRelation, usize, usize)> {
        CST_BANK_COUNTS
            .iter()
            .filter(|(c, n)| self.cst[c] != *n)
            .map(|&(c, n)| (c, n, self.cst[&c]))
            .collect()
    }
}

pub fn validate_dataset_census(pairs: &[LabeledPair]) -> DatasetCensus {
    let mut cst: BTreeMap<CstRelation, usize> = CstRelation::ALL.iter().map(|&c| (c, 0)).collect();
    let mut relation_only = BTreeMap::new();
    let mut mapped: BTreeMap<RelationLabel, usize> = RelationLabel::ALL.iter().map(|&r| (r, 0)).collect();
    for p in pairs {
        match p.label {
            DatasetLabel::Cst(c) => *cst.get_mut(&c).expect("all relations present") += 1,
            DatasetLabel::Relation(r) => *relation_only.entry(r).or_insert(0) += 1,
        }
        *mapped.get_mut(&p.label.relation()).expect("all labels present") += 1;
    }
    DatasetCensus {
        cst,
        relation_only,
        mapped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Vec<LabeledPair>, ParseError> {
        parse_pair_dataset(s.as_bytes())
    }

    #[test]
    fn cst_labels_resolve_first() {
        let p = parse("p1\tA court ruled.\tThe court ruled today.\tSubsumption\n").unwrap();
        assert_eq!(p[0].label, DatasetLabel::Cst(CstRelation::Subsumption));
    }

    #[test]
    fn no_relation_resolves_to_relation_label() {
        let p = parse("id\ttarget_text\tsource_text\tlabel\np1\ta\tb\tNo Relation\n").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].label, DatasetLabel::Relation(RelationLabel::NoRelation));
    }

    #[test]
    fn unknown_label_is_an_error() {
        let err = parse("p1\ta\tb\tSarcasm\n").unwrap_err();
        assert_eq!(err.kind(), Some(&ParseErrorKind::UnknownLabel("Sarcasm".into())));
        assert_eq!(err.location().unwrap().column, 8);
    }

    #[test]
    fn missing_field_is_an_error() {
        let err = parse("# comment\np1\ta\tb\n").unwrap_err();
        assert_eq!(err.kind(), Some(&ParseErrorKind::MissingField("label")));
        assert_eq!(err.location().unwrap().line, 2);
    }

    #[test]
    fn census_of_empty_dataset_is_all_zero() {
        let c = validate_dataset_census(&[]);
        assert_eq!(c.cst.len(), 18);
        assert!(c.cst.values().all(|&n| n == 0));
        assert_eq!(c.total(), 0);
    }

    #[test]
    fn census_counts_follow_ups() {
        let data = "a\tx\ty\tFollow-up\nb\tx\ty\tfollowup\nc\tx\ty\tFOLLOW UP\n";
        let c = validate_dataset_census(&parse(data).unwrap());
        assert_eq!(c.count(CstRelation::FollowUp), 3);
        assert_eq!(c.total(), 3);
        assert_eq!(c.mapped[&RelationLabel::Elaboration], 3);
    }

    #[test]
    fn full_release_matches_published_counts() {
        let mut text = String::new();
        for (c, n) in CST_BANK_COUNTS {
            for i in 0..n {
                text.push_str(&format!("{c}-{i}\tt\ts\t{c}\n"));
            }
        }
        let census = validate_dataset_census(&parse(&text).unwrap());
        assert!(census.release_mismatches().is_empty());
        assert_eq!(census.count(CstRelation::Identity), 99);
        assert_eq!(census.count(CstRelation::Equivalent), 101);
        assert_eq!(census.count(CstRelation::Overlap), 429);
        assert_eq!(census.total(), 2396);
    }

    #[test]
    fn duplicate_judgement_is_rejected() {
        let data = "p1\tj1\tElaboration\np1\tj1\tCitation\n";
        let err = parse_judge_annotations(data.as_bytes()).unwrap_err();
        assert!(matches!(err.kind(), Some(ParseErrorKind::DuplicateAnnotation { .. })));
    }

    #[test]
    fn judge_file_round_trips() {
        let anns = vec![
            JudgeAnnotation {
                pair_id: "t:0".into(),
                judge_id: "j1".into(),
                label: RelationLabel::ShiftInView,
            },
            JudgeAnnotation {
                pair_id: "t:0".into(),
                judge_id: "j2".into(),
                label: RelationLabel::NoRelation,
            },
        ];
        let mut buf = Vec::new();
        write_judge_annotations(&anns, &mut buf).unwrap();
        assert_eq!(parse_judge_annotations(buf.as_slice()).unwrap(), anns);
    }
}
