//! Transcript preprocessing: heading removal and abbreviation-aware
//! sentence splitting.

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;

const BUNDLED_ABBREVIATIONS: &str = include_str!("../../resources/abbreviations.txt");

/// Abbreviations whose periods never end a sentence. Entries may span
/// several words (`U. S.`); every period inside an entry is protected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abbreviations {
    entries: Vec<String>,
    pieces: HashSet<String>,
}

impl Abbreviations {
    /// One entry per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        let entries: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        let pieces = entries
            .iter()
            .flat_map(|e| e.split_whitespace())
            .filter(|p| p.ends_with('.'))
            .map(str::to_string)
            .collect();
        Abbreviations { entries, pieces }
    }

    pub fn bundled() -> Self {
        Abbreviations::parse(BUNDLED_ABBREVIATIONS)
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    /// True when `word` (a single whitespace-free chunk) is an abbreviation or
    /// one word of a multi-word abbreviation.
    pub fn contains_piece(&self, word: &str) -> bool {
        self.pieces.contains(word)
    }

    /// True when the period at byte offset `period` of `text` belongs to an
    /// abbreviation.
    pub fn protects(&self, text: &str, period: usize) -> bool {
        self.entries.iter().any(|entry| {
            entry.match_indices('.').any(|(k, _)| {
                let Some(start) = period.checked_sub(k) else {
                    return false;
                };
                let matches = text.get(start..start + entry.len()) == Some(entry.as_str());
                let boundary = text[..start].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
                matches && boundary
            })
        })
    }
}

impl Default for Abbreviations {
    fn default() -> Self {
        Abbreviations::bundled()
    }
}

fn page_number() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^(?:page\s+\d+(?:\s+of\s+\d+)?|-?\s*\d+\s*-?|\[\s*\d+\s*\])$").unwrap())
}

fn roman_numeral() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[IVXLCDM]+\.?$").unwrap())
}

const CASE_CONNECTORS: [&str; 4] = ["v.", "v", "vs.", "vs"];

fn is_all_caps(line: &str) -> bool {
    let mut letters = false;
    for word in line.split_whitespace() {
        if CASE_CONNECTORS.contains(&word) {
            continue;
        }
        for c in word.chars().filter(|c| c.is_alphabetic()) {
            letters = true;
            if c.is_lowercase() {
                return false;
            }
        }
    }
    letters
}

fn ends_with_sentence_punctuation(line: &str) -> bool {
    line.trim_end_matches(['"', '\'', ')', ']', '\u{201d}', '\u{2019}'])
        .ends_with(['.', '!', '?'])
}

/// Title, section heading or page number lines that preprocessing drops:
/// all-caps lines (ignoring `v.`), Roman-numeral-only lines, page numbers,
/// and lines of fewer than four words without sentence-final punctuation.
pub fn is_heading_line(line: &str) -> bool {
    let line = line.trim();
    if line.is_empty() {
        return false;
    }
    if page_number().is_match(line) || roman_numeral().is_match(line) || is_all_caps(line) {
        return true;
    }
    line.split_whitespace().count() < 4 && !ends_with_sentence_punctuation(line)
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_sentence_start(c: char) -> bool {
    c.is_uppercase() || matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
}

fn split_sentences(text: &str, abbreviations: &Abbreviations) -> Vec<String> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && (matches!(chars[j].1, '.' | '!' | '?') || is_closer(chars[j].1)) {
            j += 1;
        }
        let at_end = j == chars.len();
        let before_new_sentence =
            j + 1 < chars.len() && chars[j].1.is_whitespace() && is_sentence_start(chars[j + 1].1);
        let protected = c == '.' && j == i + 1 && abbreviations.protects(text, pos);
        if (at_end || before_new_sentence) && !protected {
            let end = if at_end { text.len() } else { chars[j].0 };
            let sentence = text[start..end].trim();
            if !sentence.is_empty() {
                out.push(sentence.to_string());
            }
            start = end;
        }
        i = j;
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest.to_string());
    }
    out
}

/// Strips heading lines from a transcript and splits the remainder into
/// sentences using the bundled abbreviation list.
pub fn load_transcript(text: &str) -> Vec<String> {
    load_transcript_with(text, &Abbreviations::bundled())
}

pub fn load_transcript_with(text: &str, abbreviations: &Abbreviations) -> Vec<String> {
    let body = text
        .lines()
        .filter(|l| !is_heading_line(l))
        .flat_map(str::split_whitespace)
        .collect::<Vec<_>>()
        .join(" ");
    split_sentences(&body, abbreviations)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_title_and_numeral_then_splits() {
        let got = load_transcript("LEE v. UNITED STATES\nI\nThe question is X. A claim is Y.");
        assert_eq!(got, vec!["The question is X.", "A claim is Y."]);
    }

    #[test]
    fn empty_transcript() {
        assert!(load_transcript("").is_empty());
        assert!(load_transcript("\n\n  \n").is_empty());
    }

    #[test]
    fn reporter_citation_is_one_sentence() {
        let got = load_transcript("See INS v. St. Cyr, 533 U. S. 289, 322-323 (2001).");
        assert_eq!(got, vec!["See INS v. St. Cyr, 533 U. S. 289, 322-323 (2001)."]);
    }

    #[test]
    fn id_and_no_do_not_end_sentences() {
        let got = load_transcript("The Court so held in No. 16-327 last Term. Id. The point stands. It is settled.");
        assert_eq!(
            got,
            vec![
                "The Court so held in No. 16-327 last Term.",
                "Id. The point stands.",
                "It is settled."
            ]
        );
    }

    #[test]
    fn closing_quotes_stay_with_their_sentence() {
        let got = load_transcript("He said \"no.\" The court agreed. Why? Because it must.");
        assert_eq!(
            got,
            vec!["He said \"no.\"", "The court agreed.", "Why?", "Because it must."]
        );
    }

    #[test]
    fn heading_rules() {
        assert!(is_heading_line("LEE v. UNITED STATES"));
        assert!(is_heading_line("IV"));
        assert!(is_heading_line("12"));
        assert!(is_heading_line("Page 3 of 10"));
        assert!(is_heading_line("Justice Kagan dissenting"));
        assert!(!is_heading_line("Opinion of the Court"));
        assert!(!is_heading_line("Reversed."));
        assert!(!is_heading_line("The court ruled for the petitioner"));
        assert!(!is_heading_line(""));
    }

    #[test]
    fn protected_periods() {
        let a = Abbreviations::parse("U. S.\nv.\n");
        let text = "in the U. S. Army";
        assert!(a.protects(text, text.find("U.").unwrap() + 1));
        assert!(a.protects(text, text.find("S.").unwrap() + 1));
        // "Rev." must not match "v."
        let b = Abbreviations::parse("v.\n");
        assert!(!b.protects("Rev.", 3));
    }
}
