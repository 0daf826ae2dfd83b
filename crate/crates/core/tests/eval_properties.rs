use std::collections::BTreeSet;

use lexrel::corpus::RelationLabel;
use lexrel::eval::{
    build_confusion, jaccard, overall_corr_hh, overall_corr_hs, per_class_corr_hh, per_class_corr_hs,
    precision_recall_f1, AgreementPolicy, ConfusionMatrix, JudgedPrediction, Metric,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EVALUATED: [RelationLabel; 4] = [
    RelationLabel::Elaboration,
    RelationLabel::NoRelation,
    RelationLabel::Citation,
    RelationLabel::ShiftInView,
];

fn label() -> impl Strategy<Value = RelationLabel> {
    prop::sample::select(EVALUATED.to_vec())
}

fn judged() -> impl Strategy<Value = Vec<JudgedPrediction>> {
    prop::collection::vec((label(), label(), label()), 0..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (p, a, b))| JudgedPrediction::new(format!("t:{}", i + 1), p, vec![a, b]))
            .collect()
    })
}

fn counts() -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(0u64..60, 4), 4)
}

proptest! {
    #[test]
    fn metrics_reconstruct_the_diagonal(counts in counts()) {
        let m = ConfusionMatrix::from_counts(EVALUATED.to_vec(), counts.clone()).unwrap();
        let report = precision_recall_f1(&m);
        for (i, c) in report.classes.iter().enumerate() {
            prop_assert_eq!(c.correct, counts[i][i]);
            if let Some(p) = c.precision.value() {
                prop_assert_eq!((p * c.predicted as f64).round() as u64, counts[i][i]);
            } else {
                prop_assert_eq!(c.predicted, 0);
            }
            if let Some(r) = c.recall.value() {
                prop_assert_eq!((r * c.actual as f64).round() as u64, counts[i][i]);
            } else {
                prop_assert_eq!(c.actual, 0);
            }
        }
        let rows: u64 = m.row_sums().iter().sum();
        let cols: u64 = m.column_sums().iter().sum();
        prop_assert_eq!(rows, m.total());
        prop_assert_eq!(cols, m.total());
    }

    #[test]
    fn record_order_changes_no_metric(records in judged(), seed in any::<u64>()) {
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        for policy in [AgreementPolicy::BothAgree, AgreementPolicy::AtLeastOne] {
            let a = build_confusion(&records, policy, EVALUATED.to_vec()).unwrap();
            let b = build_confusion(&shuffled, policy, EVALUATED.to_vec()).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(precision_recall_f1(&a), precision_recall_f1(&b));
        }
        prop_assert_eq!(overall_corr_hh(&records).unwrap(), overall_corr_hh(&shuffled).unwrap());
        prop_assert_eq!(overall_corr_hs(&records).unwrap(), overall_corr_hs(&shuffled).unwrap());
        for class in EVALUATED {
            prop_assert_eq!(per_class_corr_hh(&records, class).unwrap(), per_class_corr_hh(&shuffled, class).unwrap());
            prop_assert_eq!(per_class_corr_hs(&records, class).unwrap(), per_class_corr_hs(&shuffled, class).unwrap());
        }
    }

    #[test]
    fn agreement_equals_both_agree_share(records in judged()) {
        let used = build_confusion(&records, AgreementPolicy::BothAgree, EVALUATED.to_vec()).unwrap().total();
        let expected = Metric::ratio(used as f64, records.len() as f64);
        prop_assert_eq!(overall_corr_hh(&records).unwrap(), expected);
    }

    #[test]
    fn class_agreement_is_a_fraction(records in judged()) {
        for class in EVALUATED {
            if let Some(v) = per_class_corr_hh(&records, class).unwrap().value() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
        if let Some(v) = overall_corr_hs(&records).unwrap().value() {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn jaccard_is_symmetric_and_one_only_on_equal_sets(
        a in prop::collection::btree_set(0u8..12, 0..8),
        b in prop::collection::btree_set(0u8..12, 0..8),
    ) {
        prop_assert_eq!(jaccard(&a, &b), jaccard(&b, &a));
        match jaccard(&a, &b) {
            Metric::Undefined => prop_assert!(a.is_empty() && b.is_empty()),
            Metric::Defined(v) => prop_assert_eq!(v == 1.0, a == b),
        }
        let empty = BTreeSet::<u8>::new();
        prop_assert_eq!(jaccard(&empty, &empty), Metric::Undefined);
    }
}
