//! Gazetteer lookup plus pattern rules for numeric and temporal entities.

use std::collections::HashMap;

use crate::corpus::{NerTag, PosTag, Token};

/// Phrase → entity type table matched longest-first over lowercased tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    entries: HashMap<Vec<String>, NerTag>,
    max_len: usize,
}

impl Gazetteer {
    pub fn insert(&mut self, words: Vec<String>, tag: NerTag) {
        self.max_len = self.max_len.max(words.len());
        self.entries.insert(words, tag);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, words: &[String]) -> Option<NerTag> {
        self.entries.get(words).copied()
    }

    /// Tags every gazetteer match; earlier and longer matches win.
    fn tag(&self, tokens: &mut [Token]) {
        let lower: Vec<String> = tokens.iter().map(|t| t.surface.to_lowercase()).collect();
        let mut i = 0;
        while i < tokens.len() {
            let longest = (1..=self.max_len.min(tokens.len() - i)).rev().find_map(|len| {
                let window = &tokens[i..i + len];
                let capitalized = window
                    .iter()
                    .any(|t| t.surface.chars().next().is_some_and(char::is_uppercase));
                self.entries
                    .get(&lower[i..i + len])
                    .filter(|_| capitalized)
                    .map(|&tag| (len, tag))
            });
            match longest {
                Some((len, tag)) => {
                    for t in &mut tokens[i..i + len] {
                        t.ner = tag;
                        let proper_name = matches!(tag, NerTag::Person | NerTag::Organization | NerTag::Location);
                        if proper_name
                            && t.surface.chars().next().is_some_and(char::is_uppercase)
                            && !t.pos.is_proper_noun()
                        {
                            t.pos = if t.pos == PosTag::NNS {
                                PosTag::NNPS
                            } else {
                                PosTag::NNP
                            };
                        }
                    }
                    i += len;
                }
                None => i += 1,
            }
        }
    }
}

const MONTHS: [&str; 21] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
    "jan.",
    "feb.",
    "mar.",
    "apr.",
    "aug.",
    "sept.",
    "oct.",
    "nov.",
    "dec.",
];
const WEEKDAYS: [&str; 7] = [
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];
const MONEY_WORDS: [&str; 3] = ["dollars", "dollar", "cents"];
const MAGNITUDES: [&str; 4] = ["thousand", "million", "billion", "trillion"];

fn is_numeric(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.')
}

fn is_year(s: &str) -> bool {
    s.len() == 4 && s.parse::<u32>().is_ok_and(|y| (1600..=2099).contains(&y))
}

fn is_day(s: &str) -> bool {
    s.trim_end_matches(',')
        .parse::<u32>()
        .is_ok_and(|d| (1..=31).contains(&d))
}

fn is_clock(s: &str) -> bool {
    let Some((h, m)) = s.split_once(':') else {
        return false;
    };
    h.len() <= 2 && m.len() == 2 && h.parse::<u32>().is_ok_and(|h| h <= 24) && m.parse::<u32>().is_ok_and(|m| m < 60)
}

fn mark(tokens: &mut [Token], from: usize, to: usize, tag: NerTag) {
    for t in &mut tokens[from..to] {
        t.ner = tag;
    }
}

/// MONEY, PERCENT, DATE and TIME patterns over untagged tokens. A bare
/// number is never an entity.
fn tag_patterns(tokens: &mut [Token]) {
    let lower: Vec<String> = tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    let free = |tokens: &[Token], i: usize| i < tokens.len() && tokens[i].ner == NerTag::None;
    let mut i = 0;
    while i < tokens.len() {
        if !free(tokens, i) {
            i += 1;
            continue;
        }
        let w = lower[i].as_str();
        let next = |k: usize| lower.get(i + k).map(String::as_str).unwrap_or("");

        // $ 500 (million)
        if w == "$" && is_numeric(next(1)) {
            let end = if MAGNITUDES.contains(&next(2)) { i + 3 } else { i + 2 };
            mark(tokens, i, end, NerTag::Money);
            i = end;
            continue;
        }
        if is_numeric(w) {
            let mut end = i + 1;
            if MAGNITUDES.contains(&next(1)) {
                end += 1;
            }
            let unit = lower.get(end).map(String::as_str).unwrap_or("");
            if MONEY_WORDS.contains(&unit) {
                mark(tokens, i, end + 1, NerTag::Money);
                i = end + 1;
                continue;
            }
            if unit == "%" || unit == "percent" {
                mark(tokens, i, end + 1, NerTag::Percent);
                i = end + 1;
                continue;
            }
        }
        if is_clock(w) {
            let end = if matches!(next(1), "a.m." | "p.m." | "am" | "pm") {
                i + 2
            } else {
                i + 1
            };
            mark(tokens, i, end, NerTag::Time);
            i = end;
            continue;
        }
        if w == "noon" || w == "midnight" {
            mark(tokens, i, i + 1, NerTag::Time);
            i += 1;
            continue;
        }
        // March 3 , 2001 / March 2001
        let capitalized = tokens[i].surface.chars().next().is_some_and(char::is_uppercase);
        if capitalized && MONTHS.contains(&w) && (w != "may" || is_day(next(1)) || is_year(next(1))) {
            let mut end = i + 1;
            if is_day(next(1)) {
                end += 1;
                if lower.get(end).is_some_and(|s| s == ",") && lower.get(end + 1).is_some_and(|s| is_year(s)) {
                    end += 2;
                } else if lower.get(end).is_some_and(|s| is_year(s)) {
                    end += 1;
                }
            } else if is_year(next(1)) {
                end += 1;
            }
            mark(tokens, i, end, NerTag::Date);
            i = end;
            continue;
        }
        if capitalized && WEEKDAYS.contains(&w) {
            mark(tokens, i, i + 1, NerTag::Date);
            i += 1;
            continue;
        }
        // parenthesised year: (2001)
        if is_year(w) && i > 0 && lower[i - 1] == "(" && next(1) == ")" {
            mark(tokens, i, i + 1, NerTag::Date);
        }
        i += 1;
    }
}

pub(crate) fn tag_entities(tokens: &mut [Token], gazetteer: &Gazetteer) {
    gazetteer.tag(tokens);
    tag_patterns(tokens);
}

/// Number of entity mentions: maximal runs of tokens sharing an entity tag.
pub fn count_entities(tokens: &[Token]) -> usize {
    let mut count = 0;
    let mut prev = NerTag::None;
    for t in tokens {
        if t.ner.is_entity() && t.ner != prev {
            count += 1;
        }
        prev = t.ner;
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<Token> {
        words
            .iter()
            .enumerate()
            .map(|(i, w)| Token::new(i, w, &w.to_lowercase(), PosTag::NN, NerTag::None))
            .collect()
    }

    fn tags(tokens: &[Token]) -> Vec<NerTag> {
        tokens.iter().map(|t| t.ner).collect()
    }

    #[test]
    fn bare_number_is_not_an_entity() {
        let mut t = toks(&["533"]);
        tag_patterns(&mut t);
        assert_eq!(tags(&t), [NerTag::None]);
    }

    #[test]
    fn money_percent_time_date() {
        let mut t = toks(&[
            "$", "500", "and", "5", "%", "at", "10:30", "a.m.", "on", "March", "3", ",", "2001",
        ]);
        tag_patterns(&mut t);
        use NerTag::*;
        assert_eq!(
            tags(&t),
            [Money, Money, None, Percent, Percent, None, Time, Time, None, Date, Date, Date, Date]
        );
        assert_eq!(count_entities(&t), 4);
    }

    #[test]
    fn parenthesised_year_is_a_date() {
        let mut t = toks(&["(", "2001", ")"]);
        tag_patterns(&mut t);
        assert_eq!(t[1].ner, NerTag::Date);
        let mut t = toks(&["in", "2001"]);
        tag_patterns(&mut t);
        assert_eq!(t[1].ner, NerTag::None);
    }

    #[test]
    fn modal_may_is_not_a_month() {
        let mut t = toks(&["We", "May", "proceed"]);
        tag_patterns(&mut t);
        assert_eq!(t[1].ner, NerTag::None);
    }

    #[test]
    fn gazetteer_prefers_longest_match() {
        let mut g = Gazetteer::default();
        g.insert(vec!["jae".into(), "lee".into()], NerTag::Person);
        g.insert(vec!["lee".into()], NerTag::Location);
        let mut t = toks(&["Petitioner", "Jae", "Lee", "moved"]);
        g.tag(&mut t);
        assert_eq!(tags(&t), [NerTag::None, NerTag::Person, NerTag::Person, NerTag::None]);
        assert_eq!(t[1].pos, PosTag::NNP);
    }
}
