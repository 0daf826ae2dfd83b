//! Rule grammar that recognises sentences citing case law.
//!
//! Rule file: one rule per line, `id<TAB>class<TAB>enabled<TAB>parameters`
//! with an optional fifth description column. `#` starts a comment line.
//! Parameters are `key=value` pairs separated by `;`, list values are
//! separated by `|`, and `-` or an empty field keeps the defaults.
//!
//! | class          | keys                                     |
//! |----------------|------------------------------------------|
//! | signal-prefix  | `signals`, `reporters`                   |
//! | reporter-cite  | `reporters`                              |
//! | case-name      | `reporters`, `requires` (`reporter`, `year`) |
//! | short-cite     | `forms`                                  |

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUNDLED_RULES: &str = include_str!("../../resources/citation_rules.tsv");

pub const DEFAULT_SIGNALS: [&str; 7] = [
    "See, e.g.,",
    "See generally",
    "See also",
    "See",
    "Cf.",
    "E.g.,",
    "Accord",
];
pub const DEFAULT_REPORTERS: [&str; 8] = [
    "U. S.",
    "S. Ct.",
    "L. Ed. 2d",
    "F.2d",
    "F.3d",
    "F.4th",
    "F. Supp. 2d",
    "F. Supp.",
];
pub const DEFAULT_SHORT_FORMS: [&str; 2] = ["Id.", "Ibid."];

#[derive(Debug, Error)]
pub enum CitationError {
    #[error("line {line}: expected at least 4 tab-separated fields")]
    MalformedLine { line: usize },
    #[error("line {line}: duplicate rule id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: unknown pattern class {class:?}")]
    UnknownClass { line: usize, class: String },
    #[error("line {line}: invalid enabled flag {value:?}")]
    BadFlag { line: usize, value: String },
    #[error("rule {id}: malformed parameters: {message}")]
    MalformedParams { id: String, message: String },
    #[error("rule set has no {0} rule")]
    MissingClass(PatternClass),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternClass {
    SignalPrefix,
    ReporterCite,
    CaseName,
    ShortCite,
}

impl PatternClass {
    pub const ALL: [PatternClass; 4] = [
        PatternClass::SignalPrefix,
        PatternClass::ReporterCite,
        PatternClass::CaseName,
        PatternClass::ShortCite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PatternClass::SignalPrefix => "signal-prefix",
            PatternClass::ReporterCite => "reporter-cite",
            PatternClass::CaseName => "case-name",
            PatternClass::ShortCite => "short-cite",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            PatternClass::SignalPrefix => &["signals", "reporters"],
            PatternClass::ReporterCite => &["reporters"],
            PatternClass::CaseName => &["reporters", "requires"],
            PatternClass::ShortCite => &["forms"],
        }
    }

    fn description(self) -> &'static str {
        match self {
            PatternClass::SignalPrefix => "introductory signal followed by a case name or reporter citation",
            PatternClass::ReporterCite => "volume, reporter and page",
            PatternClass::CaseName => "party v. party with a reporter citation or year",
            PatternClass::ShortCite => "Id. style short citation",
        }
    }
}

impl fmt::Display for PatternClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PatternClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Parameters of one rule, defaults filled in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleParams {
    pub signals: Vec<String>,
    pub reporters: Vec<String>,
    pub require_reporter: bool,
    pub require_year: bool,
    pub forms: Vec<String>,
}

impl Default for RuleParams {
    fn default() -> Self {
        RuleParams {
            signals: DEFAULT_SIGNALS.iter().map(|s| s.to_string()).collect(),
            reporters: DEFAULT_REPORTERS.iter().map(|s| s.to_string()).collect(),
            require_reporter: true,
            require_year: true,
            forms: DEFAULT_SHORT_FORMS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone)]
struct Compiled {
    reporter: Regex,
    year: Regex,
    case_anywhere: Regex,
    case_at_start: Regex,
    short: Vec<Regex>,
}

const NAME: &str = r"[A-Z][\w.'&-]*";
const CONNECTIVE: &str = r"(?:of|the|and|for|ex|rel\.|de|la|del)";
const YEAR: &str = r"\((?:[^()]*\s)?(?:1[6-9]|20)\d{2}\)";

fn reporter_alternation(reporters: &[String]) -> String {
    let mut sorted: Vec<&String> = reporters.iter().collect();
    sorted.sort_by_key(|r| std::cmp::Reverse(r.len()));
    let alts: Vec<String> = sorted
        .iter()
        .map(|r| {
            let mut out = String::new();
            for c in r.chars().filter(|c| !c.is_whitespace()) {
                out.push_str(&regex::escape(&c.to_string()));
                if c == '.' {
                    out.push_str(r"\s*");
                }
            }
            out
        })
        .collect();
    format!("(?:{})", alts.join("|"))
}

impl Compiled {
    fn new(params: &RuleParams) -> Result<Self, regex::Error> {
        let page = r"(?:\d{1,5}|_{2,}|,\s*at\s+\d{1,5})";
        let range = r"(?:\s*[-–]\s*\d{1,5})?";
        let reporter = format!(
            r"\b\d{{1,4}}\s+{}\s*{page}{range}(?:,\s*(?:at\s+)?\d{{1,5}}{range})*(?:\s*{YEAR})?",
            reporter_alternation(&params.reporters)
        );
        let name_run = format!(r"(?:{NAME}|{CONNECTIVE})(?:,?\s+(?:{NAME}|{CONNECTIVE}))*");
        let short = params
            .forms
            .iter()
            .map(|f| {
                let e = regex::escape(f);
                Regex::new(&format!(r"^(?:{e}|{e},?\s+at\s+\d+.*)$"))
            })
            .collect::<Result<_, _>>()?;
        Ok(Compiled {
            reporter: Regex::new(&reporter)?,
            year: Regex::new(YEAR)?,
            case_anywhere: Regex::new(&format!(r"\b{NAME}\s+v\.\s+{NAME}"))?,
            case_at_start: Regex::new(&format!(r"^{name_run}\s+v\.\s+{NAME}"))?,
            short,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CitationRule {
    pub id: String,
    pub description: String,
    pub class: PatternClass,
    pub enabled: bool,
    pub params: RuleParams,
    compiled: Compiled,
}

impl PartialEq for CitationRule {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.description == other.description
            && self.class == other.class
            && self.enabled == other.enabled
            && self.params == other.params
    }
}

impl CitationRule {
    pub fn new(
        id: impl Into<String>,
        class: PatternClass,
        enabled: bool,
        params: RuleParams,
    ) -> Result<Self, CitationError> {
        let id = id.into();
        let compiled = Compiled::new(&params).map_err(|e| CitationError::MalformedParams {
            id: id.clone(),
            message: e.to_string(),
        })?;
        Ok(CitationRule {
            id,
            description: class.description().to_string(),
            class,
            enabled,
            params,
            compiled,
        })
    }

    pub fn matches(&self, sentence: &str) -> bool {
        let text = sentence.trim();
        let c = &self.compiled;
        match self.class {
            PatternClass::SignalPrefix => {
                let mut signals: Vec<&String> = self.params.signals.iter().collect();
                signals.sort_by_key(|s| std::cmp::Reverse(s.len()));
                signals.into_iter().any(|s| {
                    let Some(rest) = text.strip_prefix(s.as_str()) else {
                        return false;
                    };
                    if !(rest.starts_with(char::is_whitespace) || rest.starts_with(',') || s.ends_with(',')) {
                        return false;
                    }
                    let rest = rest.trim_start_matches(|ch: char| ch.is_whitespace() || ch == ',');
                    c.case_at_start.is_match(rest) || c.reporter.find(rest).is_some_and(|m| m.start() == 0)
                })
            }
            PatternClass::ReporterCite => c.reporter.is_match(text),
            PatternClass::CaseName => {
                c.case_anywhere.is_match(text)
                    && ((self.params.require_reporter && c.reporter.is_match(text))
                        || (self.params.require_year && c.year.is_match(text)))
            }
            PatternClass::ShortCite => c.short.iter().any(|r| r.is_match(text)),
        }
    }

    fn render_params(&self) -> String {
        let p = &self.params;
        match self.class {
            PatternClass::SignalPrefix => {
                format!("signals={};reporters={}", p.signals.join("|"), p.reporters.join("|"))
            }
            PatternClass::ReporterCite => format!("reporters={}", p.reporters.join("|")),
            PatternClass::CaseName => {
                let mut req = Vec::new();
                if p.require_reporter {
                    req.push("reporter");
                }
                if p.require_year {
                    req.push("year");
                }
                format!("reporters={};requires={}", p.reporters.join("|"), req.join("|"))
            }
            PatternClass::ShortCite => format!("forms={}", p.forms.join("|")),
        }
    }
}

fn parse_params(id: &str, class: PatternClass, text: &str) -> Result<RuleParams, CitationError> {
    let bad = |message: String| CitationError::MalformedParams {
        id: id.to_string(),
        message,
    };
    let mut params = RuleParams::default();
    let text = text.trim();
    if text.is_empty() || text == "-" {
        return Ok(params);
    }
    let mut seen = HashSet::new();
    for part in text.split(';').filter(|p| !p.trim().is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, found {part:?}")))?;
        let key = key.trim();
        if !class.keys().contains(&key) {
            return Err(bad(format!("key {key:?} is not valid for {class}")));
        }
        if !seen.insert(key) {
            return Err(bad(format!("key {key:?} given twice")));
        }
        let items: Vec<String> = value.split('|').map(|v| v.trim().to_string()).collect();
        if items.iter().any(String::is_empty) {
            return Err(bad(format!("empty entry in {key}")));
        }
        match key {
            "signals" => params.signals = items,
            "reporters" => params.reporters = items,
            "forms" => params.forms = items,
            "requires" => {
                params.require_reporter = false;
                params.require_year = false;
                for item in items {
                    match item.as_str() {
                        "reporter" => params.require_reporter = true,
                        "year" => params.require_year = true,
                        other => return Err(bad(format!("unknown requirement {other:?}"))),
                    }
                }
            }
            _ => unreachable!("keys are checked above"),
        }
    }
    Ok(params)
}

fn parse_flag(line: usize, value: &str) -> Result<bool, CitationError> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CitationError::BadFlag {
            line,
            value: value.to_string(),
        }),
    }
}

/// Ordered rules; the first enabled rule that matches decides.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationRuleSet {
    rules: Vec<CitationRule>,
}

impl CitationRuleSet {
    pub fn parse(text: &str) -> Result<Self, CitationError> {
        let mut rules = Vec::new();
        let mut ids = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim_end_matches('\r');
            if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() < 4 || fields.len() > 5 {
                return Err(CitationError::MalformedLine { line });
            }
            let id = fields[0].trim();
            if id.is_empty() {
                return Err(CitationError::MalformedLine { line });
            }
            if !ids.insert(id.to_string()) {
                return Err(CitationError::DuplicateId {
                    line,
                    id: id.to_string(),
                });
            }
            let class: PatternClass = fields[1]
                .trim()
                .parse()
                .map_err(|class| CitationError::UnknownClass { line, class })?;
            let enabled = parse_flag(line, fields[2])?;
            let params = parse_params(id, class, fields[3])?;
            let mut rule = CitationRule::new(id, class, enabled, params)?;
            if let Some(d) = fields.get(4).map(|d| d.trim()).filter(|d| !d.is_empty()) {
                rule.description = d.to_string();
            }
            rules.push(rule);
        }
        CitationRuleSet::from_rules(rules)
    }

    /// Checks id uniqueness and that every pattern class has a rule.
    pub fn from_rules(rules: Vec<CitationRule>) -> Result<Self, CitationError> {
        let mut ids = HashSet::new();
        for (i, r) in rules.iter().enumerate() {
            if !ids.insert(r.id.as_str()) {
                return Err(CitationError::DuplicateId {
                    line: i + 1,
                    id: r.id.clone(),
                });
            }
        }
        for class in PatternClass::ALL {
            if !rules.iter().any(|r| r.class == class) {
                return Err(CitationError::MissingClass(class));
            }
        }
        Ok(CitationRuleSet { rules })
    }

    pub fn bundled() -> Self {
        CitationRuleSet::parse(BUNDLED_RULES).expect("bundled citation rules are valid")
    }

    pub fn rules(&self) -> &[CitationRule] {
        &self.rules
    }

    pub fn rule(&self, id: &str) -> Option<&CitationRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn set_enabled(&mut self, id: &str, enabled: bool) -> bool {
        match self.rules.iter_mut().find(|r| r.id == id) {
            Some(r) => {
                r.enabled = enabled;
                true
            }
            None => false,
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# id\tclass\tenabled\tparameters\tdescription\n");
        for r in &self.rules {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                r.id,
                r.class,
                r.enabled,
                r.render_params(),
                r.description
            ));
        }
        out
    }
}

impl Default for CitationRuleSet {
    fn default() -> Self {
        CitationRuleSet::bundled()
    }
}

/// Reads a rule file, or returns the bundled rules when `path` is `None`.
pub fn load_rules(path: Option<&Path>) -> Result<CitationRuleSet, CitationError> {
    match path {
        None => Ok(CitationRuleSet::bundled()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CitationError::Io {
                path: p.to_path_buf(),
                source,
            })?;
            CitationRuleSet::parse(&text)
        }
    }
}

/// Id of the first enabled rule matching the sentence.
pub fn detect_citation<'r>(sentence: &str, rules: &'r CitationRuleSet) -> Option<&'r str> {
    rules
        .rules
        .iter()
        .filter(|r| r.enabled)
        .find(|r| r.matches(sentence))
        .map(|r| r.id.as_str())
}

#[cfg(test)]
mod tests {
    use super::*;

    const ST_CYR: &str = "See INS v. St. Cyr, 533 U. S. 289, 322-323 (2001).";

    #[test]
    fn worked_examples() {
        let rules = CitationRuleSet::bundled();
        assert_eq!(detect_citation(ST_CYR, &rules), Some("R1"));
        assert_eq!(
            detect_citation(
                "The question is whether Lee can show he was prejudiced by that erroneous advice.",
                &rules
            ),
            None
        );
        assert_eq!(detect_citation("Id., at 59.", &rules), Some("R4"));
        assert_eq!(detect_citation("  Ibid. ", &rules), Some("R4"));
    }

    #[test]
    fn each_class() {
        let rules = CitationRuleSet::bundled();
        let cases = [
            ("Cf. Hill v. Lockhart, 474 U. S. 52, 59 (1985).", Some("R1")),
            ("E.g., 466 U. S. 668, 694.", Some("R1")),
            ("The rule was announced in 466 U. S. 668 (1984).", Some("R2")),
            ("That was the holding of 137 S. Ct. 1958.", Some("R2")),
            ("The Court of Appeals agreed, 825 F.3d 1252, 1256.", Some("R2")),
            (
                "As Padilla v. Kentucky (2010) explained, counsel must advise.",
                Some("R3"),
            ),
            ("Padilla v. Kentucky requires advice.", None),
            ("See what the Government says about this case.", None),
            ("Lee had lived in the U. S. for nearly three decades.", None),
            ("Identical", None),
        ];
        for (s, want) in cases {
            assert_eq!(detect_citation(s, &rules), want, "{s}");
        }
    }

    #[test]
    fn disabling() {
        let text = BUNDLED_RULES.replacen("R1\tsignal-prefix\ttrue", "R1\tsignal-prefix\tfalse", 1);
        let rules = CitationRuleSet::parse(&text).unwrap();
        assert_eq!(detect_citation(ST_CYR, &rules), Some("R2"));
        let mut none = CitationRuleSet::bundled();
        for id in ["R1", "R2", "R3", "R4"] {
            assert!(none.set_enabled(id, false));
        }
        assert_eq!(detect_citation(ST_CYR, &none), None);
        assert_eq!(detect_citation("Id.", &none), None);
    }

    #[test]
    fn file_errors() {
        let dup = format!("{BUNDLED_RULES}R2\treporter-cite\ttrue\t-\n");
        assert!(matches!(CitationRuleSet::parse(&dup), Err(CitationError::DuplicateId { id, .. }) if id == "R2"));
        let unknown = BUNDLED_RULES.replacen("short-cite", "footnote", 1);
        assert!(matches!(
            CitationRuleSet::parse(&unknown),
            Err(CitationError::UnknownClass { line: 5, .. })
        ));
        let params = BUNDLED_RULES.replacen("forms=", "shapes=", 1);
        assert!(matches!(
            CitationRuleSet::parse(&params),
            Err(CitationError::MalformedParams { .. })
        ));
        let missing: String = BUNDLED_RULES
            .lines()
            .filter(|l| !l.starts_with("R4"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            CitationRuleSet::parse(&missing),
            Err(CitationError::MissingClass(PatternClass::ShortCite))
        ));
        assert!(matches!(
            CitationRuleSet::parse("R1\tsignal-prefix\n"),
            Err(CitationError::MalformedLine { line: 1 })
        ));
    }

    #[test]
    fn serialized_rules_reload_identically() {
        let rules = CitationRuleSet::bundled();
        assert_eq!(CitationRuleSet::parse(&rules.to_tsv()).unwrap(), rules);
        assert_eq!(load_rules(None).unwrap(), rules);
    }
}
