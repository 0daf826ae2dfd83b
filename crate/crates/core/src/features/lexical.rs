//! Bag-of-words, overlap, substring, entity and length measures.

use std::collections::{BTreeMap, BTreeSet};

use crate::annotate::{count_entities, AnnotationResources};
use crate::corpus::{AnnotatedSentence, Token};

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

fn frequencies<A: AsRef<str>>(bag: &[A]) -> BTreeMap<&str, u64> {
    let mut m = BTreeMap::new();
    for w in bag {
        *m.entry(w.as_ref()).or_default() += 1;
    }
    m
}

/// Cosine of the frequency vectors of two bags. Zero when either is empty.
pub fn cosine_similarity<A: AsRef<str>, B: AsRef<str>>(bag_s: &[A], bag_t: &[B]) -> f64 {
    let s = frequencies(bag_s);
    let t = frequencies(bag_t);
    if s.is_empty() || t.is_empty() {
        return 0.0;
    }
    let dot: u64 = s.iter().filter_map(|(w, a)| t.get(w).map(|b| a * b)).sum();
    let norm_s: u64 = s.values().map(|a| a * a).sum();
    let norm_t: u64 = t.values().map(|b| b * b).sum();
    // sqrt of the product keeps self-similarity exactly 1
    ratio(dot as f64, ((norm_s as f64) * (norm_t as f64)).sqrt())
}

/// Lowercased surfaces of non-stopword tokens containing a letter or digit.
pub fn content_words<'a>(
    tokens: &'a [Token],
    resources: &'a AnnotationResources,
) -> impl Iterator<Item = &'a Token> + 'a {
    tokens
        .iter()
        .filter(|t| t.is_word() && !resources.is_stopword(&t.surface))
}

const EXCLUDED_VERB_LEMMAS: [&str; 4] = ["be", "do", "have", "has"];

/// The four bags compared by the cosine features.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bags {
    pub words: Vec<String>,
    pub nouns: Vec<String>,
    pub verbs: Vec<String>,
    pub adjectives: Vec<String>,
}

impl Bags {
    pub fn of(sentence: &AnnotatedSentence, resources: &AnnotationResources) -> Self {
        let mut bags = Bags::default();
        for t in content_words(sentence.tokens(), resources) {
            let w = t.surface.to_lowercase();
            if t.pos.is_noun() {
                bags.nouns.push(w.clone());
            }
            if t.pos.is_verb() && !EXCLUDED_VERB_LEMMAS.contains(&t.lemma.to_lowercase().as_str()) {
                bags.verbs.push(w.clone());
            }
            if t.pos.is_adjective() {
                bags.adjectives.push(w.clone());
            }
            bags.words.push(w);
        }
        bags
    }
}

/// (wor_t, wor_s): distinct common words over the distinct words of the
/// target and of the source.
pub fn word_overlap_ratios<A: AsRef<str>, B: AsRef<str>>(target: &[A], source: &[B]) -> (f64, f64) {
    let t: BTreeSet<&str> = target.iter().map(AsRef::as_ref).collect();
    let s: BTreeSet<&str> = source.iter().map(AsRef::as_ref).collect();
    let common = t.intersection(&s).count() as f64;
    (ratio(common, t.len() as f64), ratio(common, s.len() as f64))
}

/// Longest common contiguous run of tokens, compared case-insensitively.
/// Among runs of equal token count the one with more characters wins.
/// Returns `(start in source, token count, character length)`.
pub fn longest_common_run<A: AsRef<str>, B: AsRef<str>>(source: &[A], target: &[B]) -> Option<(usize, usize, usize)> {
    let s: Vec<String> = source.iter().map(|w| w.as_ref().to_lowercase()).collect();
    let t: Vec<String> = target.iter().map(|w| w.as_ref().to_lowercase()).collect();
    // prefix[i] = characters of source[..i] joined, plus one space per token
    let mut prefix = vec![0usize; s.len() + 1];
    for (i, w) in source.iter().enumerate() {
        prefix[i + 1] = prefix[i] + w.as_ref().chars().count() + 1;
    }
    let mut prev = vec![0usize; t.len() + 1];
    let mut cur = vec![0usize; t.len() + 1];
    let mut best: Option<(usize, usize, usize)> = None;
    for i in 1..=s.len() {
        for j in 1..=t.len() {
            cur[j] = if s[i - 1] == t[j - 1] { prev[j - 1] + 1 } else { 0 };
            let len = cur[j];
            if len > 0 {
                let start = i - len;
                let chars = prefix[i] - prefix[start] - 1;
                let better = match best {
                    None => true,
                    Some((_, bl, bc)) => (len, chars) > (bl, bc),
                };
                if better {
                    best = Some((start, len, chars));
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Characters of the tokens rendered with single spaces.
pub fn rendered_len<A: AsRef<str>>(tokens: &[A]) -> usize {
    if tokens.is_empty() {
        return 0;
    }
    tokens.iter().map(|w| w.as_ref().chars().count()).sum::<usize>() + tokens.len() - 1
}

/// n(LCS) / n(S) over the rendered token streams.
pub fn lcs_ratio<A: AsRef<str>, B: AsRef<str>>(source: &[A], target: &[B]) -> f64 {
    let n_s = rendered_len(source);
    match longest_common_run(source, target) {
        Some((_, _, chars)) => ratio(chars as f64, n_s as f64),
        None => 0.0,
    }
}

/// NE(S) / max(NE(S), NE(T)), zero when neither sentence has entities.
pub fn ne_ratio(ne_s: usize, ne_t: usize) -> f64 {
    ratio(ne_s as f64, ne_s.max(ne_t) as f64)
}

pub fn entity_counts(source: &AnnotatedSentence, target: &AnnotatedSentence) -> (usize, usize) {
    (count_entities(source.tokens()), count_entities(target.tokens()))
}

/// 0.5 + (len_s - len_t) / (2 max(len_s, len_t)); 0.5 when both are empty.
pub fn length_difference_ratio(len_s: usize, len_t: usize) -> f64 {
    let max = len_s.max(len_t);
    if max == 0 {
        return 0.5;
    }
    let diff = len_s as f64 - len_t as f64;
    (0.5 + diff / (2.0 * max as f64)).clamp(0.0, 1.0)
}

/// Number of tokens containing a letter or digit.
pub fn word_count(sentence: &AnnotatedSentence) -> usize {
    sentence.tokens().iter().filter(|t| t.is_word()).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn cosine_cases() {
        assert_eq!(cosine_similarity(&w("court law"), &w("court law")), 1.0);
        assert_eq!(cosine_similarity(&w("a b"), &w("c d")), 0.0);
        assert_eq!(cosine_similarity(&w("court law"), &w("court rule")), 0.5);
        assert_eq!(cosine_similarity::<&str, &str>(&[], &w("a")), 0.0);
        let a = w("x x y z z z");
        assert_eq!(cosine_similarity(&a, &a), 1.0);
    }

    #[test]
    fn overlap_cases() {
        assert_eq!(word_overlap_ratios(&w("a b c"), &w("b c d e")), (2.0 / 3.0, 0.5));
        assert_eq!(word_overlap_ratios(&w("a b"), &w("b a")), (1.0, 1.0));
        assert_eq!(word_overlap_ratios(&w("a"), &w("b")), (0.0, 0.0));
    }

    #[test]
    fn lcs_cases() {
        assert_eq!(lcs_ratio(&w("the court ruled"), &w("The Court ruled")), 1.0);
        assert_eq!(lcs_ratio(&w("a b"), &w("c d")), 0.0);
        assert_eq!(lcs_ratio(&w("a b c d"), &w("x b c y")), 3.0 / 7.0);
        assert_eq!(lcs_ratio::<&str, &str>(&[], &w("a")), 0.0);
        // equal token counts: the longer spelling wins
        assert_eq!(longest_common_run(&w("a xyz q"), &w("xyz a")), Some((1, 1, 3)));
    }

    #[test]
    fn ne_and_length() {
        assert_eq!(ne_ratio(2, 4), 0.5);
        assert_eq!(ne_ratio(3, 3), 1.0);
        assert_eq!(ne_ratio(0, 0), 0.0);
        assert_eq!(length_difference_ratio(7, 7), 0.5);
        assert_eq!(length_difference_ratio(10, 5), 0.75);
        assert_eq!(length_difference_ratio(5, 10), 0.25);
        assert_eq!(length_difference_ratio(0, 0), 0.5);
    }
}
