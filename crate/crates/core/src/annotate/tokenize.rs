use crate::corpus::Abbreviations;

/// A token as a byte range of the input text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenSpan<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

const LEADING: &[char] = &['"', '\'', '(', '[', '{', '`', '\u{201c}', '\u{2018}', '$'];
const TRAILING: &[char] = &[
    '.', ',', ';', ':', '!', '?', '"', '\'', ')', ']', '}', '%', '\u{201d}', '\u{2019}',
];

/// Splits text into word and punctuation tokens. Quote characters, brackets
/// and sentence punctuation become their own tokens, except that periods of
/// configured abbreviations stay attached (`v.`, `U.`, `Id.`).
#[derive(Debug, Clone)]
pub struct Tokenizer<'a> {
    abbreviations: &'a Abbreviations,
}

impl<'a> Tokenizer<'a> {
    pub fn new(abbreviations: &'a Abbreviations) -> Self {
        Tokenizer { abbreviations }
    }

    pub fn tokenize<'t>(&self, text: &'t str) -> Vec<TokenSpan<'t>> {
        let mut out = Vec::new();
        for (start, chunk) in chunks(text) {
            let mut offset = start;
            for (i, part) in chunk.split("--").enumerate() {
                if i > 0 {
                    out.push(span(text, offset, offset + 2));
                    offset += 2;
                }
                self.split_chunk(text, offset, part, &mut out);
                offset += part.len();
            }
        }
        out
    }

    fn split_chunk<'t>(&self, text: &'t str, start: usize, chunk: &str, out: &mut Vec<TokenSpan<'t>>) {
        if chunk.is_empty() {
            return;
        }
        let mut lo = start;
        let mut hi = start + chunk.len();
        while lo < hi && !self.abbreviations.contains_piece(&text[lo..hi]) {
            let c = text[lo..hi].chars().next().expect("non-empty");
            if !LEADING.contains(&c) || c.len_utf8() == hi - lo {
                break;
            }
            out.push(span(text, lo, lo + c.len_utf8()));
            lo += c.len_utf8();
        }
        let mut trailing = Vec::new();
        while lo < hi && !self.abbreviations.contains_piece(&text[lo..hi]) {
            let c = text[lo..hi].chars().next_back().expect("non-empty");
            if !TRAILING.contains(&c) || c.len_utf8() == hi - lo {
                break;
            }
            hi -= c.len_utf8();
            trailing.push(span(text, hi, hi + c.len_utf8()));
        }
        let core = &text[lo..hi];
        let possessive = ["'s", "\u{2019}s"]
            .iter()
            .find(|p| core.len() > p.len() && core.ends_with(*p));
        match possessive {
            Some(p) => {
                out.push(span(text, lo, hi - p.len()));
                out.push(span(text, hi - p.len(), hi));
            }
            None => out.push(span(text, lo, hi)),
        }
        out.extend(trailing.into_iter().rev());
    }
}

fn span(text: &str, start: usize, end: usize) -> TokenSpan<'_> {
    TokenSpan {
        text: &text[start..end],
        start,
        end,
    }
}

fn chunks(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = 0usize;
    text.split_whitespace().map(move |w| {
        let start = rest + text[rest..].find(w).expect("chunk comes from text");
        rest = start + w.len();
        (start, w)
    })
}

/// Tokenizes with the bundled abbreviation list.
pub fn tokenize(text: &str) -> Vec<TokenSpan<'_>> {
    let abbreviations = Abbreviations::bundled();
    Tokenizer::new(&abbreviations).tokenize(text)
}
