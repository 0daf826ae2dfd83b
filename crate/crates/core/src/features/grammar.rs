//! Subject and object extraction for the grammatical overlap features.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedSentence, Token};

const SUBJECT_RELATIONS: [&str; 8] = [
    "nsubj",
    "nsubjpass",
    "csubj",
    "csubjpass",
    "xsubj",
    "nsubj:pass",
    "csubj:pass",
    "nsubj:xsubj",
];
const OBJECT_RELATIONS: [&str; 3] = ["dobj", "iobj", "obj"];
const AUXILIARY_LEMMAS: [&str; 4] = ["be", "do", "have", "has"];

/// Where subjects and objects came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrammarSource {
    /// Both sentences carried dependency relations.
    Dependencies,
    /// Neither did; the shallow verb-pivot heuristic was used.
    Heuristic,
    /// One sentence used each.
    Mixed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Arguments {
    pub subjects: BTreeSet<String>,
    pub objects: BTreeSet<String>,
    pub nouns: BTreeSet<String>,
}

fn key(t: &Token) -> String {
    t.surface.to_lowercase()
}

fn is_auxiliary(t: &Token) -> bool {
    t.pos == crate::corpus::PosTag::MD || AUXILIARY_LEMMAS.contains(&t.lemma.to_lowercase().as_str())
}

/// Subjects, objects and nouns of a sentence. Uses dependency labels when
/// present, otherwise nouns and pronouns before the first non-auxiliary
/// verb are subjects and nouns after it are objects.
pub fn arguments(sentence: &AnnotatedSentence) -> (Arguments, bool) {
    let tokens = sentence.tokens();
    let mut args = Arguments {
        nouns: tokens
            .iter()
            .filter(|t| t.is_word() && t.pos.is_noun())
            .map(key)
            .collect(),
        ..Arguments::default()
    };
    if sentence.has_dependencies() {
        for t in tokens.iter().filter(|t| t.is_word()) {
            let Some(rel) = t.deprel.as_deref().map(str::to_lowercase) else {
                continue;
            };
            if SUBJECT_RELATIONS.contains(&rel.as_str()) {
                args.subjects.insert(key(t));
            } else if OBJECT_RELATIONS.contains(&rel.as_str()) {
                args.objects.insert(key(t));
            }
        }
        return (args, true);
    }
    let pivot = tokens
        .iter()
        .position(|t| t.pos.is_verb() && !is_auxiliary(t))
        .or_else(|| tokens.iter().position(|t| t.pos.is_verb()));
    if let Some(p) = pivot {
        for t in tokens[..p].iter().filter(|t| t.is_word() && t.pos.is_noun()) {
            args.subjects.insert(key(t));
        }
        for t in tokens[p + 1..].iter().filter(|t| t.is_word() && t.pos.is_noun()) {
            args.objects.insert(key(t));
        }
    }
    (args, false)
}

fn overlap(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() {
        0.0
    } else {
        a.intersection(b).count() as f64 / a.len() as f64
    }
}

/// (subj_overlap, obj_overlap, subj_noun_overlap), each relative to the
/// source sentence.
pub fn grammatical_overlap(source: &AnnotatedSentence, target: &AnnotatedSentence) -> ((f64, f64, f64), GrammarSource) {
    let (s, s_dep) = arguments(source);
    let (t, t_dep) = arguments(target);
    let origin = match (s_dep, t_dep) {
        (true, true) => GrammarSource::Dependencies,
        (false, false) => GrammarSource::Heuristic,
        _ => GrammarSource::Mixed,
    };
    (
        (
            overlap(&s.subjects, &t.subjects),
            overlap(&s.objects, &t.objects),
            overlap(&s.subjects, &t.nouns),
        ),
        origin,
    )
}
