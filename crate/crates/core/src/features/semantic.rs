use std::collections::HashMap;
use std::path::Path;

use super::FeatureError;
use crate::corpus::Token;

const BUNDLED_LEXICON: &str = include_str!("../../resources/similarity_lexicon.tsv");
pub const SIMILARITY_LEXICON_FILE: &str = "similarity_lexicon.tsv";

/// Symmetric word-pair similarity table with values in [0,1].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityLexicon {
    pairs: HashMap<(String, String), f64>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SimilarityLexicon {
    /// `word1<TAB>word2<TAB>similarity` per line; `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        let mut pairs = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let bad = |message: String| FeatureError::Resource {
                file: SIMILARITY_LEXICON_FILE.to_string(),
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [a, b, v] = fields[..] else {
                return Err(bad("expected word1<TAB>word2<TAB>similarity".into()));
            };
            let v: f64 = v.trim().parse().map_err(|_| bad(format!("invalid similarity {v:?}")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(format!("similarity {v} outside [0,1]")));
            }
            pairs.insert(ordered(a.trim(), b.trim()), v);
        }
        Ok(SimilarityLexicon { pairs })
    }

    pub fn bundled() -> Self {
        SimilarityLexicon::parse(BUNDLED_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn from_file(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        SimilarityLexicon::parse(&text)
    }

    pub fn insert(&mut self, a: &str, b: &str, similarity: f64) {
        self.pairs.insert(ordered(a, b), similarity.clamp(0.0, 1.0));
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Entries sorted by word pair.
    pub fn entries(&self) -> Vec<(&str, &str, f64)> {
        let mut v: Vec<_> = self
            .pairs
            .iter()
            .map(|((a, b), s)| (a.as_str(), b.as_str(), *s))
            .collect();
        v.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        v
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// 1 for identical words, the table value when listed, otherwise 0.
    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        if a.eq_ignore_ascii_case(b) || a.to_lowercase() == b.to_lowercase() {
            return 1.0;
        }
        self.pairs.get(&ordered(a, b)).copied().unwrap_or(0.0)
    }

    /// Best similarity across surface and lemma forms of two tokens.
    pub fn token_similarity(&self, a: &Token, b: &Token) -> f64 {
        let mut best: f64 = 0.0;
        for x in [&a.surface, &a.lemma] {
            for y in [&b.surface, &b.lemma] {
                best = best.max(self.similarity(x, y));
            }
        }
        best
    }
}

fn dedup<'a>(tokens: &[&'a Token]) -> Vec<&'a Token> {
    let mut seen = std::collections::BTreeSet::new();
    tokens
        .iter()
        .filter(|t| seen.insert(t.surface.to_lowercase()))
        .copied()
        .collect()
}

/// Each distinct source noun scores its best match among target nouns, and
/// likewise for verbs; the result is the mean over all scored source terms.
pub fn semantic_similarity(
    source_nouns: &[&Token],
    source_verbs: &[&Token],
    target_nouns: &[&Token],
    target_verbs: &[&Token],
    lexicon: &SimilarityLexicon,
) -> f64 {
    let score = |terms: &[&Token], against: &[&Token]| -> Vec<f64> {
        dedup(terms)
            .into_iter()
            .map(|a| {
                against
                    .iter()
                    .map(|b| lexicon.token_similarity(a, b))
                    .fold(0.0, f64::max)
            })
            .collect()
    };
    let scores: Vec<f64> = score(source_nouns, target_nouns)
        .into_iter()
        .chain(score(source_verbs, target_verbs))
        .collect();
    if scores.is_empty() {
        return 0.0;
    }
    (scores.iter().sum::<f64>() / scores.len() as f64).clamp(0.0, 1.0)
}
