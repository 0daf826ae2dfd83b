use lexrel::annotate::count_entities;
use lexrel::corpus::SentencePair;
use lexrel::features::{
    content_words, cosine_similarity, extract_features, lcs_ratio, length_difference_ratio, rendered_len,
    word_overlap_ratios, FeatureResources, BOOLEAN_FEATURES,
};
use lexrel::testing::{random_pair, random_sentence, random_symbols};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tries every substring of `source` against every position of `target`.
fn brute_force_lcs_ratio(source: &[&str], target: &[&str]) -> f64 {
    let s: Vec<String> = source.iter().map(|w| w.to_lowercase()).collect();
    let t: Vec<String> = target.iter().map(|w| w.to_lowercase()).collect();
    let mut best: (usize, usize) = (0, 0);
    for i in 0..s.len() {
        for j in i + 1..=s.len() {
            let run = &s[i..j];
            let found = t.len() >= run.len() && (0..=t.len() - run.len()).any(|k| &t[k..k + run.len()] == run);
            if found {
                let chars = rendered_len(&source[i..j]);
                best = best.max((run.len(), chars));
            }
        }
    }
    let total = rendered_len(source);
    if total == 0 {
        0.0
    } else {
        best.1 as f64 / total as f64
    }
}

const ALPHABET: [&str; 5] = ["a", "B", "b", "cc", "ddd"];

#[test]
fn lcs_matches_brute_force_on_small_alphabet() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..3000 {
        let s = random_symbols(&mut rng, &ALPHABET, 12);
        let t = random_symbols(&mut rng, &ALPHABET, 12);
        assert_eq!(lcs_ratio(&s, &t), brute_force_lcs_ratio(&s, &t), "{s:?} / {t:?}");
    }
}

#[test]
fn random_pairs_stay_in_unit_interval() {
    let resources = FeatureResources::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..2000 {
        let pair = random_pair(&mut rng, &format!("p{i}"), 14);
        let v = extract_features(&pair, &resources).unwrap().vector.to_array();
        for (k, x) in v.iter().enumerate() {
            assert!((0.0..=1.0).contains(x), "feature {k} = {x} for {pair:?}");
        }
        for k in BOOLEAN_FEATURES {
            assert!(v[k] == 0.0 || v[k] == 1.0, "feature {k} = {}", v[k]);
        }
    }
}

proptest! {
    #[test]
    fn self_pair_is_maximally_similar(seed in any::<u64>()) {
        let resources = FeatureResources::bundled();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_sentence(&mut rng, 16);
        let pair = SentencePair::new("self", s.clone(), s.clone());
        let v = extract_features(&pair, &resources).unwrap().vector;
        let has_content = content_words(s.tokens(), &resources.annotation).next().is_some();
        let has_word = s.tokens().iter().any(|t| t.is_word());
        let expected = if has_content { 1.0 } else { 0.0 };
        prop_assert_eq!(v.word_cos, expected);
        prop_assert_eq!(v.wor_t, expected);
        prop_assert_eq!(v.wor_s, expected);
        prop_assert_eq!(v.lcsr, if has_word { 1.0 } else { 0.0 });
        prop_assert_eq!(v.ldr, 0.5);
        let entities = count_entities(s.tokens());
        prop_assert_eq!(v.ne_ratio, if entities == 0 { 0.0 } else { 1.0 });
    }

    #[test]
    fn cosine_is_symmetric(
        a in prop::collection::vec("[a-e]{1,3}", 0..12),
        b in prop::collection::vec("[a-e]{1,3}", 0..12),
    ) {
        prop_assert_eq!(cosine_similarity(&a, &b), cosine_similarity(&b, &a));
    }

    #[test]
    fn overlap_ratios_swap_with_arguments(
        a in prop::collection::vec("[a-e]{1,2}", 0..10),
        b in prop::collection::vec("[a-e]{1,2}", 0..10),
    ) {
        let (x, y) = word_overlap_ratios(&a, &b);
        let (y2, x2) = word_overlap_ratios(&b, &a);
        prop_assert_eq!((x, y), (x2, y2));
    }

    #[test]
    fn length_difference_is_complementary(s in 0usize..200, t in 0usize..200) {
        let forward = length_difference_ratio(s, t);
        let backward = length_difference_ratio(t, s);
        prop_assert!((forward + backward - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&forward));
    }
}
