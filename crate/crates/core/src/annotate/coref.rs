//! Coreference substitution and the heuristic chain builder used when input
//! carries no coreference annotation.

use std::collections::BTreeMap;

use super::AnnotateError;
use crate::corpus::{AnnotatedSentence, ChainId, Head, Mention, NerTag, SentencePair, Token};

/// Which sentence of a pair a position refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Target,
    Source,
}

/// A coreference chain over a pair: one representative mention and the
/// pronoun tokens that refer to it.
#[derive(Debug, Clone, PartialEq)]
pub struct CorefChain {
    pub id: ChainId,
    pub side: Side,
    /// Half-open token range of the representative mention in `side`.
    pub span: (usize, usize),
    pub pronouns: Vec<(Side, usize)>,
}

const THIRD_PERSON: [&str; 16] = [
    "he",
    "him",
    "his",
    "himself",
    "she",
    "her",
    "hers",
    "herself",
    "it",
    "its",
    "itself",
    "they",
    "them",
    "their",
    "theirs",
    "themselves",
];

pub fn is_third_person_pronoun(word: &str) -> bool {
    THIRD_PERSON.contains(&word.to_lowercase().as_str())
}

fn sentence(pair: &SentencePair, side: Side) -> &AnnotatedSentence {
    match side {
        Side::Target => &pair.target,
        Side::Source => &pair.source,
    }
}

#[derive(Debug, Clone)]
struct EntityMention {
    side: Side,
    start: usize,
    end: usize,
    // position in the target-then-source token sequence
    order: usize,
    text: String,
    proper: bool,
}

fn entity_mentions(pair: &SentencePair) -> Vec<EntityMention> {
    let mut out = Vec::new();
    let offset = pair.target.len();
    for side in [Side::Target, Side::Source] {
        let tokens = sentence(pair, side).tokens();
        let base = if side == Side::Target { 0 } else { offset };
        let mut i = 0;
        while i < tokens.len() {
            let tag = tokens[i].ner;
            if matches!(tag, NerTag::Person | NerTag::Organization) {
                let mut j = i + 1;
                while j < tokens.len() && tokens[j].ner == tag {
                    j += 1;
                }
                out.push(EntityMention {
                    side,
                    start: i,
                    end: j,
                    order: base + i,
                    text: tokens[i..j]
                        .iter()
                        .map(|t| t.surface.to_lowercase())
                        .collect::<Vec<_>>()
                        .join(" "),
                    proper: tokens[i..j].iter().any(|t| t.pos.is_proper_noun()),
                });
                i = j;
            } else {
                i += 1;
            }
        }
    }
    out
}

type Group = (Vec<usize>, Vec<(Side, usize)>);

/// Links each third-person pronoun to the nearest PERSON or ORGANIZATION
/// mention that ends before it, reading the target and then the source.
/// Pronouns bound to mentions with the same text share a chain whose
/// representative is the longest mention containing a proper noun, earliest
/// first on ties. Pronouns without a candidate stay unchained.
pub fn naive_coref(pair: &SentencePair) -> Vec<CorefChain> {
    let mentions = entity_mentions(pair);
    let offset = pair.target.len();
    // mention text -> (member mention indices, pronouns)
    let mut groups: BTreeMap<String, Group> = BTreeMap::new();
    for side in [Side::Target, Side::Source] {
        let base = if side == Side::Target { 0 } else { offset };
        for t in sentence(pair, side).tokens() {
            if !is_third_person_pronoun(&t.surface) {
                continue;
            }
            let position = base + t.index;
            let nearest = mentions
                .iter()
                .enumerate()
                .filter(|(_, m)| m.order + (m.end - m.start) <= position)
                .max_by_key(|(_, m)| m.order);
            if let Some((_, m)) = nearest {
                let group = groups.entry(m.text.clone()).or_default();
                group.1.push((side, t.index));
            }
        }
    }
    for (k, m) in mentions.iter().enumerate() {
        if let Some(group) = groups.get_mut(&m.text) {
            group.0.push(k);
        }
    }
    let mut chains: Vec<CorefChain> = groups
        .into_values()
        .map(|(members, pronouns)| {
            let rep = members
                .iter()
                .map(|&k| &mentions[k])
                .min_by_key(|m| (!m.proper, std::cmp::Reverse(m.end - m.start), m.order))
                .expect("a group exists only for a bound mention");
            CorefChain {
                id: ChainId(0),
                side: rep.side,
                span: (rep.start, rep.end),
                pronouns,
            }
        })
        .collect();
    chains.sort_by_key(|c| (c.side, c.span));
    for (i, c) in chains.iter_mut().enumerate() {
        c.id = ChainId(i as u32 + 1);
    }
    chains
}

/// Writes chains into a pair: pronoun tokens get their chain id and each
/// sentence that owns or references a chain declares its mention.
pub fn apply_chains(pair: &SentencePair, chains: &[CorefChain]) -> Result<SentencePair, AnnotateError> {
    let mut parts = [pair.target.clone().into_parts(), pair.source.clone().into_parts()];
    for chain in chains {
        let owner = sentence(pair, chain.side);
        let (start, end) = chain.span;
        if start >= end || end > owner.len() {
            return Err(AnnotateError::MissingMention {
                pair_id: pair.id.clone(),
                chain: chain.id,
            });
        }
        let mention = Mention::from_span(owner.tokens(), start, end);
        let owner_idx = chain.side as usize;
        parts[owner_idx].2.insert(chain.id, mention.clone());
        for &(side, index) in &chain.pronouns {
            let p = &mut parts[side as usize];
            let token = p.1.get_mut(index).ok_or_else(|| AnnotateError::MissingMention {
                pair_id: pair.id.clone(),
                chain: chain.id,
            })?;
            token.coref_chain = Some(chain.id);
            if side != chain.side {
                p.2.entry(chain.id).or_insert_with(|| mention.detached());
            }
        }
    }
    let [t, s] = parts;
    Ok(SentencePair::new(
        pair.id.clone(),
        AnnotatedSentence::new(t.0, t.1, t.2)?,
        AnnotatedSentence::new(s.0, s.1, s.2)?,
    ))
}

fn substitute(
    pair_id: &str,
    sentence: &AnnotatedSentence,
    other: &AnnotatedSentence,
) -> Result<AnnotatedSentence, AnnotateError> {
    let old = sentence.tokens();
    // old index -> (first, last) new index
    let mut map = Vec::with_capacity(old.len());
    let mut tokens: Vec<Token> = Vec::with_capacity(old.len());
    let mut replaced = Vec::with_capacity(old.len());
    for t in old {
        let mention = match t.coref_chain {
            Some(chain) if t.pos.is_pronoun() || is_third_person_pronoun(&t.surface) => {
                let mention = sentence
                    .coref_chains()
                    .get(&chain)
                    .or_else(|| other.coref_chains().get(&chain))
                    .filter(|m| m.tokens.iter().any(|mt| !mt.pos.is_pronoun()))
                    .ok_or_else(|| AnnotateError::MissingMention {
                        pair_id: pair_id.to_string(),
                        chain,
                    })?;
                Some(mention)
            }
            _ => None,
        };
        let first = tokens.len();
        match mention {
            Some(m) => {
                for mt in &m.tokens {
                    tokens.push(Token {
                        index: tokens.len(),
                        head: None,
                        deprel: None,
                        coref_chain: None,
                        ..mt.clone()
                    });
                }
                replaced.push(true);
            }
            None => {
                tokens.push(Token {
                    index: first,
                    ..t.clone()
                });
                replaced.push(false);
            }
        }
        map.push((first, tokens.len() - 1));
    }
    if !replaced.contains(&true) {
        return Ok(sentence.clone());
    }
    let remap = |h: Head| match h {
        Head::Root => Head::Root,
        Head::Token(i) => Head::Token(map[i].1),
    };
    for (old_t, (&(first, last), &was_replaced)) in old.iter().zip(map.iter().zip(&replaced)) {
        if was_replaced {
            for t in &mut tokens[first..last] {
                t.head = Some(Head::Token(last));
                t.deprel = Some("compound".to_string());
            }
            tokens[last].head = old_t.head.map(remap);
            tokens[last].deprel = old_t.deprel.clone();
        } else {
            tokens[first].head = old_t.head.map(remap);
        }
    }
    let chains = sentence
        .coref_chains()
        .iter()
        .map(|(&id, m)| {
            let span = m.span.map(|(s, e)| (map[s].0, map[e - 1].1 + 1));
            (
                id,
                Mention {
                    tokens: m.tokens.clone(),
                    span,
                },
            )
        })
        .collect();
    Ok(AnnotatedSentence::from_tokens(tokens, chains)?)
}

/// Replaces every chained pronoun with its chain's representative mention.
/// Possessives are replaced by the bare mention. The input is left untouched.
pub fn resolve_coreferences(pair: &SentencePair) -> Result<SentencePair, AnnotateError> {
    Ok(SentencePair::new(
        pair.id.clone(),
        substitute(&pair.id, &pair.target, &pair.source)?,
        substitute(&pair.id, &pair.source, &pair.target)?,
    ))
}
