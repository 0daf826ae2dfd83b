//! Suffix-rule part-of-speech guessing and lemmatisation, used for words
//! missing from the lexicon.

use crate::corpus::PosTag;

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn punctuation_tag(s: &str) -> Option<PosTag> {
    if s.chars().any(char::is_alphanumeric) {
        return None;
    }
    Some(match s {
        "." | "!" | "?" => PosTag::Period,
        "," => PosTag::Comma,
        ":" | ";" | "--" | "..." | "\u{2014}" | "\u{2013}" => PosTag::Colon,
        "(" | "[" | "{" => PosTag::LeftParen,
        ")" | "]" | "}" => PosTag::RightParen,
        "``" | "\u{201c}" | "\u{2018}" => PosTag::OpenQuote,
        "''" | "\"" | "'" | "\u{201d}" | "\u{2019}" => PosTag::CloseQuote,
        "$" => PosTag::Dollar,
        "#" => PosTag::Hash,
        "-" => PosTag::HYPH,
        "%" => PosTag::NN,
        _ => PosTag::SYM,
    })
}

fn is_number(s: &str) -> bool {
    s.chars().any(|c| c.is_ascii_digit())
        && s.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, ',' | '.' | '-' | '/' | ':'))
}

const ADJECTIVE_SUFFIXES: &[&str] = &["ous", "ful", "ive", "able", "ible", "ical", "less"];
const NOUN_SUFFIXES: &[&str] = &["tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship", "ism"];

/// Guesses a tag for a word absent from the lexicon: punctuation, numbers,
/// suffix rules, capitalisation, then `NN`.
pub(crate) fn guess_pos(surface: &str, sentence_initial: bool) -> PosTag {
    if let Some(tag) = punctuation_tag(surface) {
        return tag;
    }
    if is_number(surface) {
        return PosTag::CD;
    }
    if surface == "'s" || surface == "\u{2019}s" {
        return PosTag::POS;
    }
    let capitalized = surface.chars().next().is_some_and(char::is_uppercase);
    if capitalized && !sentence_initial {
        return PosTag::NNP;
    }
    let w = surface.to_lowercase();
    let n = w.len();
    if n > 4 && w.ends_with("ly") {
        return PosTag::RB;
    }
    if n > 5 && w.ends_with("ing") {
        return PosTag::VBG;
    }
    if n > 4 && w.ends_with("ed") {
        return PosTag::VBD;
    }
    if n > 4 && ADJECTIVE_SUFFIXES.iter().any(|s| w.ends_with(s)) {
        return PosTag::JJ;
    }
    if NOUN_SUFFIXES.iter().any(|s| n > s.len() + 2 && w.ends_with(s)) {
        return PosTag::NN;
    }
    if n > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return if capitalized { PosTag::NNPS } else { PosTag::NNS };
    }
    if capitalized {
        PosTag::NNP
    } else {
        PosTag::NN
    }
}

/// Whether a verb stem left by stripping `-ed`/`-ing` lost a silent `e`.
fn needs_final_e(stem: &str) -> bool {
    let b = stem.as_bytes();
    let n = b.len();
    if n < 2 {
        return false;
    }
    let ends = |s: &str| stem.ends_with(s);
    if ends("ss") {
        return false;
    }
    if matches!(b[n - 1], b'v' | b'c' | b'z' | b'u') || ends("dg") || ends("rg") || ends("ang") {
        return true;
    }
    if b[n - 1] == b's' {
        return true;
    }
    if (ends("ur") || ends("ir") || ends("ar")) && n >= 3 && (!is_vowel(b[n - 3]) || ends("quir")) {
        return true;
    }
    if ends("ib") || ends("ul") {
        return true;
    }
    if n >= 3 {
        let (c1, v, c2) = (b[n - 3], b[n - 2], b[n - 1]);
        let cvc = !is_vowel(c1) && is_vowel(v) && !is_vowel(c2) && !matches!(c2, b'w' | b'x' | b'y');
        if cvc {
            let tail = &stem[n - 2..];
            let excluded = match tail {
                "en" | "er" | "on" | "el" | "al" | "or" => true,
                "op" | "it" => n > 4,
                "et" => !(ends("let") || ends("pet")),
                _ => false,
            };
            return !excluded;
        }
    }
    false
}

fn strip_doubled(stem: &str) -> Option<&str> {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z' | b'f') {
        Some(&stem[..n - 1])
    } else {
        None
    }
}

fn verb_stem(stem: &str) -> String {
    if let Some(s) = strip_doubled(stem) {
        return s.to_string();
    }
    if needs_final_e(stem) {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

fn strip_plural(w: &str) -> String {
    let n = w.len();
    if n > 4 && w.ends_with("ies") {
        return format!("{}y", &w[..n - 3]);
    }
    for suffix in ["sses", "xes", "zes", "ches", "shes"] {
        if w.ends_with(suffix) {
            return w[..n - 2].to_string();
        }
    }
    if n > 2 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        return w[..n - 1].to_string();
    }
    w.to_string()
}

/// Rule-based lemma of a lowercased word given its tag.
pub(crate) fn lemmatize(word: &str, pos: PosTag) -> String {
    let w = word.to_lowercase();
    let n = w.len();
    match pos {
        PosTag::NNS | PosTag::NNPS | PosTag::VBZ => strip_plural(&w),
        PosTag::VBD | PosTag::VBN if n > 3 && w.ends_with("ed") => {
            if n > 4 && w.ends_with("ied") {
                format!("{}y", &w[..n - 3])
            } else if w.ends_with("eed") {
                w[..n - 1].to_string()
            } else {
                verb_stem(&w[..n - 2])
            }
        }
        PosTag::VBG if n > 4 && w.ends_with("ing") => {
            let stem = &w[..n - 3];
            if stem.ends_with("ee") || stem.ends_with('y') {
                stem.to_string()
            } else {
                verb_stem(stem)
            }
        }
        _ => w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn past_tense_lemmas() {
        let cases = [
            ("moved", "move"),
            ("walked", "walk"),
            ("ruled", "rule"),
            ("stated", "state"),
            ("stopped", "stop"),
            ("called", "call"),
            ("passed", "pass"),
            ("applied", "apply"),
            ("agreed", "agree"),
            ("argued", "argue"),
            ("judged", "judge"),
            ("ordered", "order"),
            ("opened", "open"),
            ("required", "require"),
            ("decided", "decide"),
            ("caused", "cause"),
            ("used", "use"),
            ("cited", "cite"),
            ("visited", "visit"),
            ("returned", "return"),
            ("claimed", "claim"),
            ("interpreted", "interpret"),
            ("completed", "complete"),
        ];
        for (word, lemma) in cases {
            assert_eq!(lemmatize(word, PosTag::VBD), lemma, "{word}");
        }
    }

    #[test]
    fn gerund_and_plural_lemmas() {
        assert_eq!(lemmatize("moving", PosTag::VBG), "move");
        assert_eq!(lemmatize("holding", PosTag::VBG), "hold");
        assert_eq!(lemmatize("applying", PosTag::VBG), "apply");
        assert_eq!(lemmatize("parties", PosTag::NNS), "party");
        assert_eq!(lemmatize("courts", PosTag::NNS), "court");
        assert_eq!(lemmatize("witnesses", PosTag::NNS), "witness");
        assert_eq!(lemmatize("moves", PosTag::VBZ), "move");
    }

    #[test]
    fn guesses() {
        assert_eq!(guess_pos("moved", false), PosTag::VBD);
        assert_eq!(guess_pos("533", false), PosTag::CD);
        assert_eq!(guess_pos("Korea", false), PosTag::NNP);
        assert_eq!(guess_pos("promptly", false), PosTag::RB);
        assert_eq!(guess_pos("dangerous", false), PosTag::JJ);
        assert_eq!(guess_pos("determination", false), PosTag::NN);
        assert_eq!(guess_pos("defendants", false), PosTag::NNS);
        assert_eq!(guess_pos("(", false), PosTag::LeftParen);
        assert_eq!(guess_pos("'", false), PosTag::CloseQuote);
        assert_eq!(guess_pos("widget", false), PosTag::NN);
    }
}
