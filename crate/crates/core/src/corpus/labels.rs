use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The five relation types assigned to sentence pairs.
///
/// Declaration order is the canonical class order, which is also the
/// tie-break order used by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationLabel {
    Elaboration,
    NoRelation,
    Citation,
    ShiftInView,
    Redundancy,
}

impl RelationLabel {
    pub const ALL: [RelationLabel; 5] = [
        RelationLabel::Elaboration,
        RelationLabel::NoRelation,
        RelationLabel::Citation,
        RelationLabel::ShiftInView,
        RelationLabel::Redundancy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationLabel::Elaboration => "Elaboration",
            RelationLabel::NoRelation => "No Relation",
            RelationLabel::Citation => "Citation",
            RelationLabel::ShiftInView => "Shift in View",
            RelationLabel::Redundancy => "Redundancy",
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lowercases and drops parenthesised qualifiers and every non-alphanumeric
/// character, so "Overlap (Partial Equivalence)" and "follow_up" normalise
/// to "overlap" and "followup".
pub(crate) fn normalize_label(s: &str) -> String {
    let mut depth = 0usize;
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if depth == 0 && c.is_alphanumeric() => out.extend(c.to_lowercase()),
            _ => {}
        }
    }
    out
}

impl FromStr for RelationLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = normalize_label(s);
        RelationLabel::ALL
            .into_iter()
            .find(|l| normalize_label(l.name()) == n)
            .ok_or_else(|| s.to_string())
    }
}

/// Cross-document Structure Theory relation types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CstRelation {
    Identity,
    Equivalent,
    Subsumption,
    Contradiction,
    HistoricalBackground,
    Modality,
    Attribution,
    Summary,
    FollowUp,
    IndirectSpeech,
    Elaboration,
    Fulfillment,
    Description,
    Overlap,
    Paraphrase,
    Citation,
    ChangeOfPerspective,
    ReaderProfile,
}

impl CstRelation {
    pub const ALL: [CstRelation; 18] = [
        CstRelation::Identity,
        CstRelation::Equivalent,
        CstRelation::Subsumption,
        CstRelation::Contradiction,
        CstRelation::HistoricalBackground,
        CstRelation::Modality,
        CstRelation::Attribution,
        CstRelation::Summary,
        CstRelation::FollowUp,
        CstRelation::IndirectSpeech,
        CstRelation::Elaboration,
        CstRelation::Fulfillment,
        CstRelation::Description,
        CstRelation::Overlap,
        CstRelation::Paraphrase,
        CstRelation::Citation,
        CstRelation::ChangeOfPerspective,
        CstRelation::ReaderProfile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CstRelation::Identity => "Identity",
            CstRelation::Equivalent => "Equivalent",
            CstRelation::Subsumption => "Subsumption",
            CstRelation::Contradiction => "Contradiction",
            CstRelation::HistoricalBackground => "Historical Background",
            CstRelation::Modality => "Modality",
            CstRelation::Attribution => "Attribution",
            CstRelation::Summary => "Summary",
            CstRelation::FollowUp => "Follow-up",
            CstRelation::IndirectSpeech => "Indirect Speech",
            CstRelation::Elaboration => "Elaboration",
            CstRelation::Fulfillment => "Fulfillment",
            CstRelation::Description => "Description",
            CstRelation::Overlap => "Overlap",
            CstRelation::Paraphrase => "Paraphrase",
            CstRelation::Citation => "Citation",
            CstRelation::ChangeOfPerspective => "Change of Perspective",
            CstRelation::ReaderProfile => "Reader Profile",
        }
    }

    pub fn relation(self) -> RelationLabel {
        map_cst_to_relation(self)
    }
}

impl fmt::Display for CstRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CstRelation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let n = normalize_label(s);
        if n == "fulfilment" {
            return Ok(CstRelation::Fulfillment);
        }
        CstRelation::ALL
            .into_iter()
            .find(|c| normalize_label(c.name()) == n)
            .ok_or_else(|| s.to_string())
    }
}

/// Collapses a CST relation onto the five relation types.
///
/// `Equivalent` is read as the dataset's name for `Paraphrase`, and
/// `Summary` condenses the same topic; both land on Elaboration.
pub fn map_cst_to_relation(cst: CstRelation) -> RelationLabel {
    use CstRelation::*;
    match cst {
        Identity => RelationLabel::Redundancy,
        Citation => RelationLabel::Citation,
        ChangeOfPerspective | Contradiction => RelationLabel::ShiftInView,
        Paraphrase | Equivalent | Modality | Subsumption | Elaboration | IndirectSpeech | FollowUp | Overlap
        | Fulfillment | Description | HistoricalBackground | ReaderProfile | Attribution | Summary => {
            RelationLabel::Elaboration
        }
    }
}

/// One judge's label for one pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JudgeAnnotation {
    pub pair_id: String,
    pub judge_id: String,
    pub label: RelationLabel,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cst_relations_map_to_their_labels() {
        assert_eq!(map_cst_to_relation(CstRelation::Identity), RelationLabel::Redundancy);
        assert_eq!(
            map_cst_to_relation(CstRelation::Contradiction),
            RelationLabel::ShiftInView
        );
        assert_eq!(
            map_cst_to_relation(CstRelation::ChangeOfPerspective),
            RelationLabel::ShiftInView
        );
        assert_eq!(map_cst_to_relation(CstRelation::FollowUp), RelationLabel::Elaboration);
        assert_eq!(map_cst_to_relation(CstRelation::Citation), RelationLabel::Citation);
        let elaboration_row = [
            CstRelation::Paraphrase,
            CstRelation::Modality,
            CstRelation::Subsumption,
            CstRelation::Elaboration,
            CstRelation::IndirectSpeech,
            CstRelation::FollowUp,
            CstRelation::Overlap,
            CstRelation::Fulfillment,
            CstRelation::Description,
            CstRelation::HistoricalBackground,
            CstRelation::ReaderProfile,
            CstRelation::Attribution,
        ];
        for cst in elaboration_row {
            assert_eq!(cst.relation(), RelationLabel::Elaboration, "{cst}");
        }
    }

    #[test]
    fn mapping_is_total_and_never_yields_no_relation() {
        for cst in CstRelation::ALL {
            assert_ne!(cst.relation(), RelationLabel::NoRelation);
        }
    }

    #[test]
    fn labels_parse_leniently() {
        assert_eq!("No Relation".parse(), Ok(RelationLabel::NoRelation));
        assert_eq!("shift_in_view".parse(), Ok(RelationLabel::ShiftInView));
        assert_eq!("Overlap (Partial Equivalence)".parse(), Ok(CstRelation::Overlap));
        assert_eq!("follow-up".parse(), Ok(CstRelation::FollowUp));
        assert_eq!("HISTORICAL BACKGROUND".parse(), Ok(CstRelation::HistoricalBackground));
        assert!("Sarcasm".parse::<CstRelation>().is_err());
    }

    #[test]
    fn names_round_trip() {
        for l in RelationLabel::ALL {
            assert_eq!(l.name().parse(), Ok(l));
        }
        for c in CstRelation::ALL {
            assert_eq!(c.name().parse(), Ok(c));
        }
    }
}
