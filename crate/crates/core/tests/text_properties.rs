use std::sync::OnceLock;

use lexrel::annotate::{annotate_pair, annotate_sentence, remove_stopwords, resolve_coreferences, AnnotationResources};
use lexrel::citation::{detect_citation, CitationRuleSet};
use lexrel::corpus::{is_heading_line, load_transcript, parse_annotated_corpus, write_annotated_corpus, CstRelation};
use lexrel::features::{extract_features, word_overlap_ratios, FeatureResources};
use lexrel::testing::{random_pair, random_sentence};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bundled_rules() -> &'static CitationRuleSet {
    static RULES: OnceLock<CitationRuleSet> = OnceLock::new();
    RULES.get_or_init(CitationRuleSet::bundled)
}

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec![
            "The", "court", "held", "that", "Lee", "was", "deported", ".", "He", "said", "it", "See", "v.", "533",
            "U.", "S.", "289", "(2001)", "however", ",", "\"", "OPINION", "II", "Id.", "at", "59", "Mr.", "Smith",
        ]),
        0..30,
    )
    .prop_map(|w| w.join(" "))
}

#[test]
fn every_cst_relation_maps_to_one_label() {
    for cst in CstRelation::ALL {
        let label = cst.relation();
        assert!(lexrel::corpus::RelationLabel::ALL.contains(&label));
        assert_eq!(label, lexrel::corpus::map_cst_to_relation(cst));
    }
}

proptest! {
    #[test]
    fn corpus_serialization_is_canonical(seed in any::<u64>(), n in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sentences: Vec<_> = (0..n)
            .flat_map(|i| {
                let p = random_pair(&mut rng, &format!("p{i}"), 10);
                [p.target, p.source]
            })
            .filter(|s| !s.is_empty())
            .collect();
        let mut first = Vec::new();
        write_annotated_corpus(&sentences, &mut first).unwrap();
        let parsed = parse_annotated_corpus(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_annotated_corpus(&parsed, &mut second).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(parse_annotated_corpus(second.as_slice()).unwrap(), parsed);
    }

    #[test]
    fn transcript_sentences_never_hold_headings(text in prop::collection::vec(words(), 0..8)) {
        let text = text.join("\n");
        let headings: Vec<&str> = text.lines().filter(|l| is_heading_line(l)).map(str::trim).collect();
        for sentence in load_transcript(&text) {
            for h in &headings {
                prop_assert!(!sentence.contains(h) || text.lines().any(|l| !is_heading_line(l) && l.contains(h)),
                    "{:?} kept heading {:?}", sentence, h);
            }
        }
    }

    #[test]
    fn annotation_is_deterministic(text in words()) {
        let resources = AnnotationResources::bundled();
        prop_assert_eq!(annotate_sentence(&text, &resources), annotate_sentence(&text, &resources));
    }

    #[test]
    fn stopword_removal_keeps_order(seed in any::<u64>()) {
        let resources = AnnotationResources::bundled();
        let s = random_sentence(&mut ChaCha8Rng::seed_from_u64(seed), 20);
        let kept = remove_stopwords(s.tokens(), &resources);
        let mut it = s.tokens().iter();
        for k in kept {
            prop_assert!(it.any(|t| std::ptr::eq(t, k)));
        }
    }

    #[test]
    fn coref_resolution_is_idempotent(seed in any::<u64>()) {
        let pair = random_pair(&mut ChaCha8Rng::seed_from_u64(seed), "p", 12);
        let once = resolve_coreferences(&pair).unwrap();
        prop_assert_eq!(resolve_coreferences(&once).unwrap(), once);
    }

    #[test]
    fn naive_coref_pairs_resolve_idempotently(t in words(), s in words()) {
        let resources = AnnotationResources::bundled();
        let pair = annotate_pair("p", &t, &s, &resources).unwrap();
        let once = resolve_coreferences(&pair).unwrap();
        prop_assert_eq!(resolve_coreferences(&once).unwrap(), once);
    }

    #[test]
    fn extraction_is_pure(seed in any::<u64>()) {
        let resources = FeatureResources::bundled();
        let pair = random_pair(&mut ChaCha8Rng::seed_from_u64(seed), "p", 12);
        let a = serde_json::to_string(&extract_features(&pair, &resources).unwrap()).unwrap();
        let b = serde_json::to_string(&extract_features(&pair, &resources).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn a_shared_word_never_lowers_common_count(
        t in prop::collection::vec("[a-f]", 0..8),
        s in prop::collection::vec("[a-f]", 0..8),
        w in "[a-h]",
    ) {
        let common = |t: &[String], s: &[String]| {
            let (r, _) = word_overlap_ratios(t, s);
            let distinct = t.iter().collect::<std::collections::BTreeSet<_>>().len();
            (r * distinct as f64).round() as usize
        };
        let before = common(&t, &s);
        let (mut t2, mut s2) = (t.clone(), s.clone());
        t2.push(w.clone());
        s2.push(w);
        prop_assert!(common(&t2, &s2) >= before);
    }

    #[test]
    fn disabled_rules_detect_nothing(text in words()) {
        let mut rules = bundled_rules().clone();
        let ids: Vec<String> = rules.rules().iter().map(|r| r.id.clone()).collect();
        for id in &ids {
            rules.set_enabled(id, false);
        }
        prop_assert_eq!(detect_citation(&text, &rules), None);
    }

    #[test]
    fn detection_is_deterministic(text in words()) {
        let rules = bundled_rules();
        prop_assert_eq!(detect_citation(&text, rules), detect_citation(&text, rules));
    }
}
