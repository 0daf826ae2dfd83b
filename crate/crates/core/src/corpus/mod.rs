//! Data model and file formats for transcripts, annotated sentences,
//! labelled pair datasets and judge annotations.

mod conll;
mod dataset;
mod labels;
mod tags;
mod transcript;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use conll::{parse_annotated_corpus, write_annotated_corpus};
pub use dataset::{
    parse_judge_annotations, parse_pair_dataset, validate_dataset_census, write_judge_annotations, write_pair_dataset,
    DatasetCensus, DatasetLabel, LabeledPair, CST_BANK_COUNTS,
};
pub use labels::{map_cst_to_relation, CstRelation, JudgeAnnotation, RelationLabel};
pub use tags::{NerTag, PosTag};
pub use transcript::{is_heading_line, load_transcript, load_transcript_with, Abbreviations};

/// Position of a parse failure in an input stream (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {}, column {}: {kind}", .at.line, .at.column)]
    At { at: Location, kind: ParseErrorKind },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ParseError {
    pub(crate) fn at(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        ParseError::At {
            at: Location { line, column },
            kind,
        }
    }

    pub fn location(&self) -> Option<Location> {
        match self {
            ParseError::At { at, .. } => Some(*at),
            ParseError::Io(_) => None,
        }
    }

    pub fn kind(&self) -> Option<&ParseErrorKind> {
        match self {
            ParseError::At { kind, .. } => Some(kind),
            ParseError::Io(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("malformed line: {0}")]
    MalformedLine(String),
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("head {head} does not refer to a token of this sentence")]
    DanglingHead { head: usize },
    #[error("unknown NER tag `{0}`")]
    UnknownNerTag(String),
    #[error("unknown POS tag `{0}`")]
    UnknownPosTag(String),
    #[error("duplicate token index {0}")]
    DuplicateIndex(usize),
    #[error("unknown relation label `{0}`")]
    UnknownLabel(String),
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("duplicate annotation for pair `{pair_id}` by judge `{judge_id}`")]
    DuplicateAnnotation { pair_id: String, judge_id: String },
    #[error("invalid sentence: {0}")]
    InvalidSentence(#[from] SentenceError),
}

/// Violations of the [`AnnotatedSentence`] invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SentenceError {
    #[error("token at position {position} has index {index}")]
    NonContiguousIndex { position: usize, index: usize },
    #[error("token {token} has dangling head {head}")]
    DanglingHead { token: usize, head: usize },
    #[error("token {token} references undeclared coreference chain {chain}")]
    UnknownChain { token: usize, chain: ChainId },
    #[error("coreference chain {0} has an empty representative mention")]
    EmptyMention(ChainId),
    #[error("mention span {start}..{end} of chain {chain} is outside the sentence")]
    MentionOutOfRange { chain: ChainId, start: usize, end: usize },
    #[error("tokens do not reconstruct the raw text")]
    RawMismatch,
}

/// Dependency head of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Head {
    Root,
    Token(usize),
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Root => f.write_str("ROOT"),
            Head::Token(i) => write!(f, "{i}"),
        }
    }
}

impl Serialize for Head {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Head::Root => s.serialize_str("ROOT"),
            Head::Token(i) => s.serialize_u64(*i as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Head {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Index(usize),
            Name(String),
        }
        match Repr::deserialize(d)? {
            Repr::Index(i) => Ok(Head::Token(i)),
            Repr::Name(s) if s == "ROOT" => Ok(Head::Root),
            Repr::Name(s) => Err(serde::de::Error::custom(format!("invalid head `{s}`"))),
        }
    }
}

/// Identifier of a coreference chain, shared by both sentences of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChainId(pub u32);

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos: PosTag,
    pub ner: NerTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<Head>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deprel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coref_chain: Option<ChainId>,
}

impl Token {
    /// A token with no dependency or coreference annotation.
    pub fn new(index: usize, surface: &str, lemma: &str, pos: PosTag, ner: NerTag) -> Self {
        Token {
            index,
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            pos,
            ner,
            head: None,
            deprel: None,
            coref_chain: None,
        }
    }

    /// True when the surface contains at least one letter or digit.
    pub fn is_word(&self) -> bool {
        self.surface.chars().any(char::is_alphanumeric)
    }
}

/// The representative mention of a coreference chain.
///
/// `span` is the half-open token range in the owning sentence when the
/// mention occurs there; mentions copied from the other sentence of a pair
/// carry `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mention {
    pub tokens: Vec<Token>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(usize, usize)>,
}

impl Mention {
    pub fn from_span(tokens: &[Token], start: usize, end: usize) -> Self {
        let tokens = tokens[start..end]
            .iter()
            .enumerate()
            .map(|(i, t)| Token {
                index: i,
                head: None,
                deprel: None,
                coref_chain: None,
                ..t.clone()
            })
            .collect();
        Mention {
            tokens,
            span: Some((start, end)),
        }
    }

    /// Builds a free-standing mention from whitespace-separated words.
    /// Capitalised words are tagged as proper nouns, the rest as nouns.
    pub fn from_text(text: &str) -> Self {
        let tokens = text
            .split_whitespace()
            .enumerate()
            .map(|(i, w)| {
                let pos = if w.chars().next().is_some_and(char::is_uppercase) {
                    PosTag::NNP
                } else {
                    PosTag::NN
                };
                Token::new(i, w, &w.to_lowercase(), pos, NerTag::None)
            })
            .collect();
        Mention { tokens, span: None }
    }

    pub fn text(&self) -> String {
        join_surfaces(&self.tokens)
    }

    /// The mention detached from its owning sentence.
    pub fn detached(&self) -> Mention {
        Mention {
            tokens: self.tokens.clone(),
            span: None,
        }
    }
}

pub(crate) fn join_surfaces(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

fn strip_whitespace(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SentenceRepr", into = "SentenceRepr")]
pub struct AnnotatedSentence {
    raw: String,
    tokens: Vec<Token>,
    coref_chains: BTreeMap<ChainId, Mention>,
}

#[derive(Serialize, Deserialize)]
struct SentenceRepr {
    raw: String,
    tokens: Vec<Token>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    coref_chains: BTreeMap<ChainId, Mention>,
}

impl TryFrom<SentenceRepr> for AnnotatedSentence {
    type Error = SentenceError;

    fn try_from(r: SentenceRepr) -> Result<Self, Self::Error> {
        AnnotatedSentence::new(r.raw, r.tokens, r.coref_chains)
    }
}

impl From<AnnotatedSentence> for SentenceRepr {
    fn from(s: AnnotatedSentence) -> Self {
        SentenceRepr {
            raw: s.raw,
            tokens: s.tokens,
            coref_chains: s.coref_chains,
        }
    }
}

impl AnnotatedSentence {
    /// Validates and assembles a sentence.
    pub fn new(
        raw: impl Into<String>,
        tokens: Vec<Token>,
        coref_chains: BTreeMap<ChainId, Mention>,
    ) -> Result<Self, SentenceError> {
        let raw = raw.into();
        for (position, t) in tokens.iter().enumerate() {
            if t.index != position {
                return Err(SentenceError::NonContiguousIndex {
                    position,
                    index: t.index,
                });
            }
            if let Some(Head::Token(h)) = t.head {
                if h >= tokens.len() {
                    return Err(SentenceError::DanglingHead {
                        token: t.index,
                        head: h,
                    });
                }
            }
            if let Some(chain) = t.coref_chain {
                if !coref_chains.contains_key(&chain) {
                    return Err(SentenceError::UnknownChain { token: t.index, chain });
                }
            }
        }
        for (&chain, mention) in &coref_chains {
            if mention.tokens.is_empty() {
                return Err(SentenceError::EmptyMention(chain));
            }
            if let Some((start, end)) = mention.span {
                if start >= end || end > tokens.len() {
                    return Err(SentenceError::MentionOutOfRange { chain, start, end });
                }
            }
        }
        if strip_whitespace(&raw) != strip_whitespace(&join_surfaces(&tokens)) {
            return Err(SentenceError::RawMismatch);
        }
        Ok(AnnotatedSentence {
            raw,
            tokens,
            coref_chains,
        })
    }

    /// Builds a sentence whose raw text is the space-joined token surfaces.
    pub fn from_tokens(tokens: Vec<Token>, coref_chains: BTreeMap<ChainId, Mention>) -> Result<Self, SentenceError> {
        let raw = join_surfaces(&tokens);
        AnnotatedSentence::new(raw, tokens, coref_chains)
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn coref_chains(&self) -> &BTreeMap<ChainId, Mention> {
        &self.coref_chains
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// True when any token carries a dependency relation label.
    pub fn has_dependencies(&self) -> bool {
        self.tokens.iter().any(|t| t.deprel.is_some())
    }

    /// Token surfaces joined with single spaces.
    pub fn rendered(&self) -> String {
        join_surfaces(&self.tokens)
    }

    pub fn into_parts(self) -> (String, Vec<Token>, BTreeMap<ChainId, Mention>) {
        (self.raw, self.tokens, self.coref_chains)
    }
}

/// An ordered sentence pair. The source is compared against the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: String,
    pub target: AnnotatedSentence,
    pub source: AnnotatedSentence,
}

impl SentencePair {
    pub fn new(id: impl Into<String>, target: AnnotatedSentence, source: AnnotatedSentence) -> Self {
        SentencePair {
            id: id.into(),
            target,
            source,
        }
    }

    pub fn has_coref(&self) -> bool {
        !self.target.coref_chains.is_empty() || !self.source.coref_chains.is_empty()
    }
}
