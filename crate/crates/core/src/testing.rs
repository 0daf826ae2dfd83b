//! Random, structurally valid inputs for property tests, fuzzing and
//! benchmarks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{AnnotatedSentence, ChainId, Head, Mention, NerTag, PosTag, SentencePair, Token};

const WORDS: [&str; 40] = [
    "court",
    "Court",
    "law",
    "judge",
    "Lee",
    "Jae",
    "plea",
    "trial",
    "deported",
    "ruled",
    "held",
    "advice",
    "counsel",
    "the",
    "a",
    "of",
    "and",
    "however",
    "thus",
    "moreover",
    "in",
    "addition",
    "said",
    "was",
    "is",
    "be",
    "have",
    "do",
    "533",
    "2001",
    "$",
    "%",
    "guilty",
    "prejudice",
    "Congress",
    "United",
    "States",
    "v.",
    "St.",
    "Cyr",
];
const PRONOUNS: [&str; 6] = ["he", "she", "it", "they", "him", "his"];
const PUNCT: [&str; 8] = [".", ",", ";", "\"", "'", "``", "''", "("];
const DEPRELS: [&str; 8] = ["nsubj", "dobj", "obj", "nsubjpass", "amod", "det", "root", "prep"];

fn random_token(rng: &mut impl Rng, index: usize) -> Token {
    let roll = rng.gen_range(0..10);
    let (surface, pos) = match roll {
        0 => (
            PRONOUNS.choose(rng).copied().unwrap_or("he").to_string(),
            if rng.gen_bool(0.8) { PosTag::PRP } else { PosTag::PRP_S },
        ),
        1 => (PUNCT.choose(rng).copied().unwrap_or(".").to_string(), PosTag::Period),
        2 => {
            let len = rng.gen_range(1..8);
            let w: String = (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
            (w, *PosTag::ALL.choose(rng).expect("tags exist"))
        }
        _ => (
            WORDS.choose(rng).copied().unwrap_or("law").to_string(),
            *PosTag::ALL.choose(rng).expect("tags exist"),
        ),
    };
    let ner = if rng.gen_bool(0.2) {
        *NerTag::ENTITY_TYPES.choose(rng).expect("types exist")
    } else {
        NerTag::None
    };
    let lemma = if rng.gen_bool(0.1) {
        ["be", "have", "do"].choose(rng).copied().unwrap_or("be").to_string()
    } else {
        surface.to_lowercase()
    };
    Token::new(index, &surface, &lemma, pos, ner)
}

/// Tokens with random words, tags, entities and, half of the time, random
/// dependency arcs.
pub fn random_tokens(rng: &mut impl Rng, max_len: usize) -> Vec<Token> {
    let n = rng.gen_range(0..=max_len);
    let mut tokens: Vec<Token> = (0..n).map(|i| random_token(rng, i)).collect();
    if n > 0 && rng.gen_bool(0.5) {
        let root = rng.gen_range(0..n);
        for t in tokens.iter_mut() {
            if t.index == root {
                t.head = Some(Head::Root);
                t.deprel = Some("root".into());
            } else {
                t.head = Some(Head::Token(rng.gen_range(0..n)));
                t.deprel = DEPRELS.choose(rng).map(|d| d.to_string());
            }
        }
    }
    tokens
}

/// A random sentence without coreference chains.
pub fn random_sentence(rng: &mut impl Rng, max_len: usize) -> AnnotatedSentence {
    AnnotatedSentence::from_tokens(random_tokens(rng, max_len), BTreeMap::new()).expect("generated sentence is valid")
}

/// A random pair of up to `max_len` tokens per sentence. Some pronouns are
/// linked to chains whose mention is a non-pronoun span of either sentence.
pub fn random_pair(rng: &mut impl Rng, id: &str, max_len: usize) -> SentencePair {
    let mut sides = [random_tokens(rng, max_len), random_tokens(rng, max_len)];
    let mut chains: [BTreeMap<ChainId, Mention>; 2] = [BTreeMap::new(), BTreeMap::new()];
    let chain_count = rng.gen_range(0..3u32);
    for c in 1..=chain_count {
        let owner = rng.gen_range(0..2);
        let candidates: Vec<usize> = sides[owner]
            .iter()
            .filter(|t| !t.pos.is_pronoun())
            .map(|t| t.index)
            .collect();
        let Some(&start) = candidates.choose(rng) else {
            continue;
        };
        let end = (start + rng.gen_range(1..3)).min(sides[owner].len());
        let mention = Mention::from_span(&sides[owner], start, end);
        let id = ChainId(c);
        for side in 0..2 {
            for t in sides[side].iter_mut() {
                if t.pos.is_pronoun() && t.coref_chain.is_none() && rng.gen_bool(0.5) {
                    t.coref_chain = Some(id);
                }
            }
            let m = if side == owner {
                mention.clone()
            } else {
                mention.detached()
            };
            chains[side].insert(id, m);
        }
    }
    let [target_tokens, source_tokens] = sides;
    let [target_chains, source_chains] = chains;
    SentencePair::new(
        id,
        AnnotatedSentence::from_tokens(target_tokens, target_chains).expect("generated target is valid"),
        AnnotatedSentence::from_tokens(source_tokens, source_chains).expect("generated source is valid"),
    )
}

/// Random words over `alphabet`, between 0 and `max_len` of them.
pub fn random_symbols<'a>(rng: &mut impl Rng, alphabet: &[&'a str], max_len: usize) -> Vec<&'a str> {
    let n = rng.gen_range(0..=max_len);
    (0..n)
        .map(|_| *alphabet.choose(rng).expect("alphabet is not empty"))
        .collect()
}
