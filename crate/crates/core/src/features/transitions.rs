//! Transition-word and quotation features.

use std::path::Path;

use super::FeatureError;
use crate::corpus::Token;

const ELABORATION_WORDS: &str = include_str!("../../resources/transitions/elaboration_words.txt");
const ELABORATION_PHRASES: &str = include_str!("../../resources/transitions/elaboration_phrases.txt");
const FOLLOWUP_WORDS: &str = include_str!("../../resources/transitions/followup_words.txt");
const FOLLOWUP_PHRASES: &str = include_str!("../../resources/transitions/followup_phrases.txt");

pub const TRANSITION_FILES: [&str; 4] = [
    "elaboration_words.txt",
    "elaboration_phrases.txt",
    "followup_words.txt",
    "followup_phrases.txt",
];

/// Phrases must start within this many words for the elaboration check.
pub const PHRASE_WINDOW: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionResources {
    pub elaboration_words: Vec<String>,
    pub elaboration_phrases: Vec<Vec<String>>,
    pub followup_words: Vec<String>,
    pub followup_phrases: Vec<Vec<String>>,
}

fn entries(name: &str, text: &str) -> Result<Vec<String>, FeatureError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.chars().any(char::is_uppercase) {
            return Err(FeatureError::Resource {
                file: name.to_string(),
                line: i + 1,
                message: "entries must be lowercase".into(),
            });
        }
        out.push(line.split_whitespace().collect::<Vec<_>>().join(" "));
    }
    if out.is_empty() {
        return Err(FeatureError::Resource {
            file: name.to_string(),
            line: 0,
            message: "list is empty".into(),
        });
    }
    Ok(out)
}

fn phrases(list: Vec<String>) -> Vec<Vec<String>> {
    list.into_iter()
        .map(|p| p.split_whitespace().map(str::to_string).collect())
        .collect()
}

impl TransitionResources {
    /// Contents of the four lists, in the order of [`TRANSITION_FILES`].
    pub fn from_strs(texts: [&str; 4]) -> Result<Self, FeatureError> {
        Ok(TransitionResources {
            elaboration_words: entries(TRANSITION_FILES[0], texts[0])?,
            elaboration_phrases: phrases(entries(TRANSITION_FILES[1], texts[1])?),
            followup_words: entries(TRANSITION_FILES[2], texts[2])?,
            followup_phrases: phrases(entries(TRANSITION_FILES[3], texts[3])?),
        })
    }

    pub fn bundled() -> Self {
        TransitionResources::from_strs([ELABORATION_WORDS, ELABORATION_PHRASES, FOLLOWUP_WORDS, FOLLOWUP_PHRASES])
            .expect("bundled transition lists are valid")
    }

    /// Reads the lists from a directory; missing files use the bundled copy.
    pub fn from_dir(dir: &Path) -> Result<Self, FeatureError> {
        let bundled = [ELABORATION_WORDS, ELABORATION_PHRASES, FOLLOWUP_WORDS, FOLLOWUP_PHRASES];
        let mut texts = Vec::with_capacity(4);
        for (name, fallback) in TRANSITION_FILES.iter().zip(bundled) {
            let path = dir.join(name);
            if path.exists() {
                texts.push(std::fs::read_to_string(&path).map_err(|source| FeatureError::Io { path, source })?);
            } else {
                texts.push(fallback.to_string());
            }
        }
        TransitionResources::from_strs([&texts[0], &texts[1], &texts[2], &texts[3]])
    }
}

impl Default for TransitionResources {
    fn default() -> Self {
        TransitionResources::bundled()
    }
}

fn words(tokens: &[Token]) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| t.is_word())
        .map(|t| t.surface.to_lowercase())
        .collect()
}

fn phrase_at(words: &[String], at: usize, phrase: &[String]) -> bool {
    !phrase.is_empty() && words.len() >= at + phrase.len() && words[at..at + phrase.len()] == *phrase
}

/// (trans_elab, trans_followup) for the source sentence.
pub fn transition_features(source: &[Token], lists: &TransitionResources) -> (f64, f64) {
    let w = words(source);
    let first = w.first();
    let elab = first.is_some_and(|f| lists.elaboration_words.contains(f))
        || (0..PHRASE_WINDOW.min(w.len())).any(|at| lists.elaboration_phrases.iter().any(|p| phrase_at(&w, at, p)));
    let follow = first.is_some_and(|f| lists.followup_words.contains(f))
        || lists.followup_phrases.iter().any(|p| phrase_at(&w, 0, p));
    (f64::from(u8::from(elab)), f64::from(u8::from(follow)))
}

fn closing_quote(open: &str) -> Option<&'static str> {
    match open {
        "\"" => Some("\""),
        "'" => Some("'"),
        "``" => Some("''"),
        "\u{201c}" => Some("\u{201d}"),
        "\u{2018}" => Some("\u{2019}"),
        _ => None,
    }
}

/// Word sequences of 1 to 6 words enclosed in matching quotes. A quote with
/// no partner is ordinary text.
pub fn quoted_spans(tokens: &[Token]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let Some(close) = closing_quote(&tokens[i].surface) else {
            i += 1;
            continue;
        };
        let Some(end) = tokens[i + 1..]
            .iter()
            .position(|t| t.surface == close)
            .map(|k| i + 1 + k)
        else {
            i += 1;
            continue;
        };
        let inner = words(&tokens[i + 1..end]);
        if (1..=6).contains(&inner.len()) {
            out.push(inner);
        }
        i = end + 1;
    }
    out
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// 1 when a quoted span of either sentence occurs in the other.
pub fn attribution_feature(source: &[Token], target: &[Token]) -> f64 {
    let (ws, wt) = (words(source), words(target));
    let hit = quoted_spans(source).iter().any(|q| contains_run(&wt, q))
        || quoted_spans(target).iter().any(|q| contains_run(&ws, q));
    f64::from(u8::from(hit))
}
