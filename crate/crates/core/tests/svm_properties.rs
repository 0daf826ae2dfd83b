use lexrel::corpus::RelationLabel;
use lexrel::features::{FeatureVector, FEATURE_COUNT};
use lexrel::svm::{
    load_model, parse_feature_dataset, save_model, synthetic_separable, train, train_with_report, ClassWeighting,
    TrainingConfig,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LABELS: [RelationLabel; 3] = [
    RelationLabel::Elaboration,
    RelationLabel::NoRelation,
    RelationLabel::Redundancy,
];

fn random_dataset(seed: u64, n: usize) -> Vec<(FeatureVector, RelationLabel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<(FeatureVector, RelationLabel)> = (0..n)
        .map(|i| {
            let mut x = [0.0; FEATURE_COUNT];
            for v in x.iter_mut() {
                *v = rng.gen::<f64>();
            }
            (FeatureVector::from_array(x), LABELS[i % LABELS.len()])
        })
        .collect();
    out.shuffle(&mut rng);
    out
}

fn quick(seed: u64) -> TrainingConfig {
    TrainingConfig {
        epochs: 15,
        seed,
        ..TrainingConfig::default()
    }
}

fn model_bytes(data: &[(FeatureVector, RelationLabel)], config: &TrainingConfig) -> Vec<u8> {
    let mut buf = Vec::new();
    save_model(&train(data, config).unwrap(), &mut buf).unwrap();
    buf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_the_model_keeps_the_label(seed in any::<u64>(), c in 0.001f64..1000.0) {
        let data = random_dataset(seed, 18);
        let model = train(&data, &quick(seed)).unwrap();
        let mut scaled = model.clone();
        for w in scaled.weights.iter_mut() {
            for v in w.iter_mut() {
                *v *= c;
            }
        }
        for b in scaled.biases.iter_mut() {
            *b *= c;
        }
        for (fv, _) in &data {
            let a = model.predict(fv).unwrap();
            let b = scaled.predict(fv).unwrap();
            // a near-tie may flip once scaled scores round differently
            let mut s: Vec<f64> = a.scores.values().copied().collect();
            s.sort_by(|x, y| y.total_cmp(x));
            if s[0] - s[1] > 1e-9 * s[0].abs().max(1.0) {
                prop_assert_eq!(a.label, b.label);
            }
        }
    }

    #[test]
    fn training_ignores_input_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let data = random_dataset(seed, 15);
        let mut permuted = data.clone();
        permuted.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        prop_assert_eq!(model_bytes(&data, &quick(3)), model_bytes(&permuted, &quick(3)));
    }

    #[test]
    fn duplicating_a_class_keeps_its_total_weight(seed in any::<u64>(), which in 0usize..3) {
        let data = random_dataset(seed, 12);
        let mut doubled = data.clone();
        doubled.extend(data.iter().filter(|(_, l)| *l == LABELS[which]).cloned());
        let config = TrainingConfig { epochs: 1, ..TrainingConfig::default() };
        let total = |d: &[(FeatureVector, RelationLabel)]| {
            let model = train(d, &config).unwrap();
            model
                .classes
                .iter()
                .zip(&model.hyperparams.class_weights)
                .map(|(c, w)| (*c, d.iter().filter(|(_, l)| l == c).count() as f64 * w))
                .collect::<Vec<_>>()
        };
        let before = total(&data);
        let after = total(&doubled);
        for ((c1, a), (c2, b)) in before.iter().zip(&after) {
            prop_assert_eq!(c1, c2);
            prop_assert!((a - b).abs() < 1e-12, "{:?}: {} vs {}", c1, a, b);
            prop_assert!((a - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn objective_tail_never_rises(seed in any::<u64>()) {
        let data = synthetic_separable(10, seed, RelationLabel::Elaboration, RelationLabel::NoRelation);
        let config = TrainingConfig { seed, ..TrainingConfig::default() };
        let (_, report) = train_with_report(&data, &config).unwrap();
        prop_assert!(report.tail_non_increasing(), "{:?}", report.objective_history);
    }

    #[test]
    fn objective_tail_never_rises_on_noise(seed in any::<u64>(), n in 6usize..40) {
        let data = random_dataset(seed, n);
        let config = TrainingConfig { epochs: 60, seed, ..TrainingConfig::default() };
        let (_, report) = train_with_report(&data, &config).unwrap();
        prop_assert!(report.tail_non_increasing(), "{:?}", report.objective_history);
    }
}

#[test]
fn uniform_weighting_is_one_over_n() {
    let data = random_dataset(4, 12);
    let config = TrainingConfig {
        epochs: 1,
        class_weighting: ClassWeighting::Uniform,
        ..TrainingConfig::default()
    };
    let model = train(&data, &config).unwrap();
    assert!(model.hyperparams.class_weights.iter().all(|w| *w == 1.0 / 12.0));
}

#[test]
fn bundled_separable_set_is_learned_and_reproducible() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../data/synthetic_separable.tsv"
    ))
    .unwrap();
    let data = parse_feature_dataset(text.as_bytes()).unwrap();
    assert_eq!(data.len(), 100);
    let config = TrainingConfig::default();
    let (model, report) = train_with_report(&data, &config).unwrap();
    assert_eq!(report.training_accuracy, 1.0);
    assert_eq!(report.objective_history.len(), config.epochs);
    assert!(report.tail_non_increasing());
    let first = model_bytes(&data, &config);
    assert_eq!(first, model_bytes(&data, &config));
    assert_eq!(load_model(first.as_slice()).unwrap(), model);
}
