//! Tab-separated annotated token format.
#![allow(clippy::tabs_in_doc_comments)]
//!
//! ```text
//! #text = Petitioner Jae Lee moved.
//! #coref = 1	span:0-3
//! 0	Petitioner	petitioner	NNP	PERSON	3	compound	_
//! ...
//! ```
//!
//! One token per line with the columns `index surface lemma pos ner head
//! deprel coref_chain`; `_` marks a missing optional field and `ROOT` the
//! root head. `#coref` lines declare a chain's representative mention either
//! as a half-open token span of the sentence (`span:S-E`) or as free text
//! (`text:Petitioner Jae Lee`). Sentences are separated by blank lines.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use super::{
    AnnotatedSentence, ChainId, Head, Mention, NerTag, ParseError, ParseErrorKind, PosTag, SentenceError, Token,
};

const FIELDS: usize = 8;

enum MentionSpec {
    Span(usize, usize),
    Text(String),
}

#[derive(Default)]
struct Pending {
    raw: Option<String>,
    first_line: usize,
    chains: Vec<(usize, ChainId, MentionSpec)>,
    tokens: Vec<Token>,
    token_lines: Vec<usize>,
    seen: HashSet<usize>,
}

impl Pending {
    fn is_empty(&self) -> bool {
        self.raw.is_none() && self.chains.is_empty() && self.tokens.is_empty()
    }

    fn finish(self) -> Result<AnnotatedSentence, ParseError> {
        let Pending {
            raw,
            first_line,
            chains,
            tokens,
            token_lines,
            ..
        } = self;
        for (t, &line) in tokens.iter().zip(&token_lines) {
            if let Some(Head::Token(h)) = t.head {
                if h >= tokens.len() {
                    return Err(ParseError::at(
                        line,
                        column_of(&token_line_fields(t), 5),
                        ParseErrorKind::DanglingHead { head: h },
                    ));
                }
            }
        }
        let mut coref_chains = BTreeMap::new();
        for (line, id, spec) in chains {
            let mention = match spec {
                MentionSpec::Span(start, end) => {
                    if start >= end || end > tokens.len() {
                        return Err(ParseError::at(
                            line,
                            1,
                            SentenceError::MentionOutOfRange { chain: id, start, end }.into(),
                        ));
                    }
                    Mention::from_span(&tokens, start, end)
                }
                MentionSpec::Text(text) => Mention::from_text(&text),
            };
            coref_chains.insert(id, mention);
        }
        let raw = raw.unwrap_or_else(|| super::join_surfaces(&tokens));
        AnnotatedSentence::new(raw, tokens, coref_chains).map_err(|e| ParseError::at(first_line, 1, e.into()))
    }
}

// Only used to recover column offsets for diagnostics after the line is gone.
fn token_line_fields(t: &Token) -> Vec<String> {
    vec![
        t.index.to_string(),
        t.surface.clone(),
        t.lemma.clone(),
        t.pos.to_string(),
        t.ner.to_string(),
    ]
}

fn column_of<S: AsRef<str>>(fields: &[S], field: usize) -> usize {
    1 + fields
        .iter()
        .take(field)
        .map(|f| f.as_ref().chars().count() + 1)
        .sum::<usize>()
}

fn parse_coref_line(line_no: usize, rest: &str) -> Result<(ChainId, MentionSpec), ParseError> {
    let malformed = |msg: &str| ParseError::at(line_no, 1, ParseErrorKind::MalformedLine(msg.to_string()));
    let (id, mention) = rest
        .split_once('\t')
        .ok_or_else(|| malformed("expected `#coref = <id><TAB><mention>`"))?;
    let id: u32 = id
        .trim()
        .parse()
        .map_err(|_| malformed("coreference chain id must be a non-negative integer"))?;
    let spec = if let Some(span) = mention.strip_prefix("span:") {
        let (s, e) = span
            .split_once('-')
            .ok_or_else(|| malformed("span must be written `span:<start>-<end>`"))?;
        let s = s.trim().parse().map_err(|_| malformed("bad span start"))?;
        let e = e.trim().parse().map_err(|_| malformed("bad span end"))?;
        MentionSpec::Span(s, e)
    } else if let Some(text) = mention.strip_prefix("text:") {
        if text.trim().is_empty() {
            return Err(malformed("empty mention text"));
        }
        MentionSpec::Text(text.trim().to_string())
    } else {
        return Err(malformed("mention must start with `span:` or `text:`"));
    };
    Ok((ChainId(id), spec))
}

fn parse_token_line(line_no: usize, line: &str, pending: &mut Pending) -> Result<(), ParseError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != FIELDS {
        return Err(ParseError::at(
            line_no,
            1,
            ParseErrorKind::MalformedLine(format!(
                "expected {FIELDS} tab-separated fields, found {}",
                fields.len()
            )),
        ));
    }
    let err = |field: usize, kind: ParseErrorKind| ParseError::at(line_no, column_of(&fields, field), kind);
    let index: usize = fields[0].parse().map_err(|_| {
        err(
            0,
            ParseErrorKind::MalformedLine("token index must be an integer".into()),
        )
    })?;
    if !pending.seen.insert(index) {
        return Err(err(0, ParseErrorKind::DuplicateIndex(index)));
    }
    if index != pending.tokens.len() {
        return Err(err(
            0,
            ParseErrorKind::MalformedLine(format!("expected token index {}", pending.tokens.len())),
        ));
    }
    let surface = fields[1];
    if surface.is_empty() {
        return Err(err(1, ParseErrorKind::MissingField("surface")));
    }
    let lemma = match fields[2] {
        "_" | "" => surface.to_lowercase(),
        l => l.to_string(),
    };
    let pos: PosTag = fields[3]
        .parse()
        .map_err(|s| err(3, ParseErrorKind::UnknownPosTag(s)))?;
    let ner: NerTag = fields[4]
        .parse()
        .map_err(|s| err(4, ParseErrorKind::UnknownNerTag(s)))?;
    let head = match fields[5] {
        "_" => None,
        "ROOT" => Some(Head::Root),
        h => Some(Head::Token(h.parse().map_err(|_| {
            err(
                5,
                ParseErrorKind::MalformedLine("head must be an index, ROOT or _".into()),
            )
        })?)),
    };
    let deprel = match fields[6] {
        "_" | "" => None,
        d => Some(d.to_string()),
    };
    let coref_chain = match fields[7] {
        "_" | "" => None,
        c => Some(ChainId(c.parse().map_err(|_| {
            err(
                7,
                ParseErrorKind::MalformedLine("coreference chain must be an integer or _".into()),
            )
        })?)),
    };
    if pending.tokens.is_empty() && pending.raw.is_none() && pending.chains.is_empty() {
        pending.first_line = line_no;
    }
    pending.tokens.push(Token {
        index,
        surface: surface.to_string(),
        lemma,
        pos,
        ner,
        head,
        deprel,
        coref_chain,
    });
    pending.token_lines.push(line_no);
    Ok(())
}

/// Reads annotated sentences. The first error aborts parsing and reports the
/// offending line and column.
pub fn parse_annotated_corpus<R: BufRead>(reader: R) -> Result<Vec<AnnotatedSentence>, ParseError> {
    let mut out = Vec::new();
    let mut pending = Pending::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            if !pending.is_empty() {
                out.push(std::mem::take(&mut pending).finish()?);
            }
            continue;
        }
        if pending.is_empty() {
            pending.first_line = line_no;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim_start();
            if let Some(text) = rest.strip_prefix("text =") {
                pending.raw = Some(text.trim().to_string());
            } else if let Some(coref) = rest.strip_prefix("coref =") {
                let (id, spec) = parse_coref_line(line_no, coref.trim_start())?;
                pending.chains.push((line_no, id, spec));
            }
            continue;
        }
        parse_token_line(line_no, line, &mut pending)?;
    }
    if !pending.is_empty() {
        out.push(pending.finish()?);
    }
    Ok(out)
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "_".to_string(), T::to_string)
}

/// Writes sentences in canonical form: `#text`, then `#coref` lines in chain
/// order, then tokens, then a blank line.
pub fn write_annotated_corpus<W: Write>(sentences: &[AnnotatedSentence], mut w: W) -> std::io::Result<()> {
    for s in sentences {
        let raw: String = s.raw().split_whitespace().collect::<Vec<_>>().join(" ");
        writeln!(w, "#text = {raw}")?;
        for (id, mention) in s.coref_chains() {
            match mention.span {
                Some((start, end)) => writeln!(w, "#coref = {id}\tspan:{start}-{end}")?,
                None => writeln!(w, "#coref = {id}\ttext:{}", mention.text())?,
            }
        }
        for t in s.tokens() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.index,
                t.surface,
                t.lemma,
                t.pos,
                t.ner,
                opt(&t.head),
                opt(&t.deprel),
                opt(&t.coref_chain)
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}
