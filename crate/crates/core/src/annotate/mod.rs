//! Resource-driven annotation of raw sentences and coreference substitution.

mod coref;
mod lemma;
mod ner;
mod tokenize;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Abbreviations, AnnotatedSentence, ChainId, NerTag, PosTag, SentenceError, SentencePair, Token};

pub use coref::{apply_chains, is_third_person_pronoun, naive_coref, resolve_coreferences, CorefChain, Side};
pub use ner::{count_entities, Gazetteer};
pub use tokenize::{tokenize, TokenSpan, Tokenizer};

const BUNDLED_STOPWORDS: &str = include_str!("../../resources/stopwords.txt");
const BUNDLED_POS_LEXICON: &str = include_str!("../../resources/pos_lexicon.tsv");
const BUNDLED_GAZETTEER: &str = include_str!("../../resources/gazetteer.tsv");
const BUNDLED_ABBREVIATIONS: &str = include_str!("../../resources/abbreviations.txt");

pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const POS_LEXICON_FILE: &str = "pos_lexicon.tsv";
pub const GAZETTEER_FILE: &str = "gazetteer.tsv";
pub const ABBREVIATIONS_FILE: &str = "abbreviations.txt";

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("{file}:{line}: {message}")]
    Resource { file: String, line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("pair {pair_id}: coreference chain {chain} has no representative mention")]
    MissingMention { pair_id: String, chain: ChainId },
    #[error(transparent)]
    Sentence(#[from] SentenceError),
}

fn resource_err(file: &str, line: usize, message: impl Into<String>) -> AnnotateError {
    AnnotateError::Resource {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// A lexicon entry: tag plus an optional lemma override.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub pos: PosTag,
    pub lemma: Option<String>,
}

/// Stopwords, part-of-speech lexicon, entity gazetteer and abbreviations
/// used by the annotator. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationResources {
    stopwords: HashSet<String>,
    pos_lexicon: HashMap<String, LexiconEntry>,
    gazetteer: Gazetteer,
    abbreviations: Abbreviations,
    version: String,
}

impl AnnotationResources {
    /// Parses resource file contents. The version is a digest of all inputs.
    pub fn from_strs(
        stopwords: &str,
        pos_lexicon: &str,
        gazetteer: &str,
        abbreviations: &str,
    ) -> Result<Self, AnnotateError> {
        let stop: HashSet<String> = content_lines(stopwords).map(|(_, l)| l.trim().to_lowercase()).collect();
        if stop.is_empty() {
            return Err(resource_err(STOPWORDS_FILE, 0, "stopword list is empty"));
        }

        let mut lexicon = HashMap::new();
        for (n, line) in content_lines(pos_lexicon) {
            let fields: Vec<&str> = line.split('\t').collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(resource_err(POS_LEXICON_FILE, n, "expected word<TAB>tag[<TAB>lemma]"));
            }
            let pos: PosTag = fields[1]
                .trim()
                .parse()
                .map_err(|_| resource_err(POS_LEXICON_FILE, n, format!("unknown tag {:?}", fields[1])))?;
            let lemma = fields.get(2).map(|l| l.trim().to_string()).filter(|l| !l.is_empty());
            lexicon.insert(fields[0].trim().to_lowercase(), LexiconEntry { pos, lemma });
        }

        let mut gaz = Gazetteer::default();
        for (n, line) in content_lines(gazetteer) {
            let Some((phrase, kind)) = line.split_once('\t') else {
                return Err(resource_err(GAZETTEER_FILE, n, "expected phrase<TAB>type"));
            };
            let tag: NerTag = kind
                .trim()
                .parse()
                .map_err(|_| resource_err(GAZETTEER_FILE, n, format!("unknown entity type {kind:?}")))?;
            if !tag.is_entity() {
                return Err(resource_err(GAZETTEER_FILE, n, "entity type must not be NONE"));
            }
            let words: Vec<String> = phrase.split_whitespace().map(str::to_lowercase).collect();
            if words.is_empty() {
                return Err(resource_err(GAZETTEER_FILE, n, "empty phrase"));
            }
            gaz.insert(words, tag);
        }

        let mut hasher = Sha256::new();
        for part in [stopwords, pos_lexicon, gazetteer, abbreviations] {
            hasher.update((part.len() as u64).to_le_bytes());
            hasher.update(part.as_bytes());
        }
        let version = hex::encode(&hasher.finalize()[..8]);

        Ok(AnnotationResources {
            stopwords: stop,
            pos_lexicon: lexicon,
            gazetteer: gaz,
            abbreviations: Abbreviations::parse(abbreviations),
            version,
        })
    }

    pub fn bundled() -> Self {
        AnnotationResources::from_strs(
            BUNDLED_STOPWORDS,
            BUNDLED_POS_LEXICON,
            BUNDLED_GAZETTEER,
            BUNDLED_ABBREVIATIONS,
        )
        .expect("bundled annotation resources are valid")
    }

    /// Loads resources from a directory. Files missing from the directory
    /// fall back to the bundled copies.
    pub fn from_dir(dir: &Path) -> Result<Self, AnnotateError> {
        let read = |name: &str, bundled: &'static str| -> Result<String, AnnotateError> {
            let path = dir.join(name);
            if path.exists() {
                std::fs::read_to_string(&path).map_err(|source| AnnotateError::Io { path, source })
            } else {
                Ok(bundled.to_string())
            }
        };
        AnnotationResources::from_strs(
            &read(STOPWORDS_FILE, BUNDLED_STOPWORDS)?,
            &read(POS_LEXICON_FILE, BUNDLED_POS_LEXICON)?,
            &read(GAZETTEER_FILE, BUNDLED_GAZETTEER)?,
            &read(ABBREVIATIONS_FILE, BUNDLED_ABBREVIATIONS)?,
        )
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(&word.to_lowercase())
    }

    pub fn stopword_count(&self) -> usize {
        self.stopwords.len()
    }

    pub fn lexicon_entry(&self, word: &str) -> Option<&LexiconEntry> {
        self.pos_lexicon.get(&word.to_lowercase())
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn abbreviations(&self) -> &Abbreviations {
        &self.abbreviations
    }
}

impl Default for AnnotationResources {
    fn default() -> Self {
        AnnotationResources::bundled()
    }
}

fn is_open_class(pos: PosTag) -> bool {
    pos.is_noun() && !pos.is_pronoun() || pos.is_verb() || pos.is_adjective() || pos == PosTag::RB
}

fn tag_token(word: &str, sentence_initial: bool, resources: &AnnotationResources) -> (PosTag, String) {
    let capitalized = word.chars().next().is_some_and(char::is_uppercase);
    let entry = resources
        .lexicon_entry(word)
        .filter(|e| !(capitalized && !sentence_initial && is_open_class(e.pos)));
    let pos = match entry {
        Some(e) => e.pos,
        None => lemma::guess_pos(word, sentence_initial),
    };
    let lemma = match entry.and_then(|e| e.lemma.clone()) {
        Some(l) => l,
        None if pos.is_proper_noun() => word.to_string(),
        None if pos.is_punctuation() || pos == PosTag::CD => word.to_string(),
        None => lemma::lemmatize(word, pos),
    };
    (pos, lemma)
}

/// Tokenizes and tags one sentence. Dependency and coreference fields are
/// left empty.
pub fn annotate_sentence(text: &str, resources: &AnnotationResources) -> AnnotatedSentence {
    let spans = Tokenizer::new(&resources.abbreviations).tokenize(text);
    let first_word = spans.iter().position(|s| s.text.chars().any(char::is_alphanumeric));
    let mut tokens: Vec<Token> = spans
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (pos, lemma) = tag_token(s.text, Some(i) == first_word, resources);
            Token::new(i, s.text, &lemma, pos, NerTag::None)
        })
        .collect();
    ner::tag_entities(&mut tokens, &resources.gazetteer);
    AnnotatedSentence::new(text.trim(), tokens, BTreeMap::new()).expect("tokens are drawn from the text")
}

/// Annotates a pair and, when neither sentence carries coreference chains,
/// adds heuristic chains.
pub fn annotate_pair(
    id: &str,
    target: &str,
    source: &str,
    resources: &AnnotationResources,
) -> Result<SentencePair, AnnotateError> {
    let pair = SentencePair::new(
        id,
        annotate_sentence(target, resources),
        annotate_sentence(source, resources),
    );
    with_naive_coref(pair)
}

/// Adds heuristic chains to a pair that has none.
pub fn with_naive_coref(pair: SentencePair) -> Result<SentencePair, AnnotateError> {
    if pair.has_coref() {
        return Ok(pair);
    }
    let chains = naive_coref(&pair);
    if chains.is_empty() {
        return Ok(pair);
    }
    apply_chains(&pair, &chains)
}

/// Drops stopwords, comparing surfaces case-insensitively. Order is kept.
pub fn remove_stopwords<'a>(tokens: &'a [Token], resources: &AnnotationResources) -> Vec<&'a Token> {
    tokens.iter().filter(|t| !resources.is_stopword(&t.surface)).collect()
}
