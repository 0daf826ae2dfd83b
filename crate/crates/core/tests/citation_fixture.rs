use std::path::PathBuf;

use lexrel::citation::{detect_citation, CitationRuleSet};

fn fixture(name: &str) -> Vec<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/citations")
        .join(name);
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

#[test]
fn default_rules_catch_every_positive() {
    let rules = CitationRuleSet::bundled();
    let positives = fixture("positive.txt");
    assert_eq!(positives.len(), 40);
    let missed: Vec<_> = positives
        .iter()
        .filter(|s| detect_citation(s, &rules).is_none())
        .collect();
    assert!(missed.is_empty(), "missed: {missed:#?}");
}

#[test]
fn default_rules_reject_every_negative() {
    let rules = CitationRuleSet::bundled();
    let negatives = fixture("negative.txt");
    assert_eq!(negatives.len(), 40);
    let fired: Vec<_> = negatives
        .iter()
        .filter_map(|s| detect_citation(s, &rules).map(|id| (id, s)))
        .collect();
    assert!(fired.is_empty(), "false positives: {fired:#?}");
}
