//! Property tests for the contracts that hold for all inputs: normalization
//! fixed points, split purity, document-frequency bounds, selection
//! dominance, tree structural invariants and encoding soundness.

use std::collections::BTreeMap;

use proptest::prelude::*;

use sentencia::corpus::{split_dataset, Judgment, JurisdictionDataset};
use sentencia::featurize::{chi2_select, fit_feature_space, CountVector, FeatureKind, FitOptions};
use sentencia::textprep::{preprocess, strip_diacritics, TextResources};
use sentencia::trees::{
    train_tree, Criterion, MaxFeatures, Splitter, TrainingSet, TreeHyperparams, TreeModel,
};

fn spanishish_text() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-záéíóúñüA-Z0-9 .,;]{0,60}").unwrap()
}

fn resources() -> TextResources {
    TextResources::spanish()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn preprocess_is_a_fixed_point(text in spanishish_text()) {
        let r = resources();
        let once = preprocess(&text, &r);
        let twice = preprocess(&once.join(" "), &r);
        prop_assert_eq!(&once, &twice);
    }

    #[test]
    fn preprocess_output_is_normalized(text in spanishish_text()) {
        let r = resources();
        for token in preprocess(&text, &r) {
            prop_assert!(!token.is_empty());
            prop_assert!(!r.is_stop_word(&token), "stop word {token:?} leaked");
            prop_assert_eq!(&token.to_lowercase(), &token, "uppercase leaked");
            prop_assert_eq!(&strip_diacritics(&token), &token, "diacritic leaked");
        }
    }

    #[test]
    fn preprocess_never_invents_tokens(text in spanishish_text()) {
        let r = resources();
        let lowered = strip_diacritics(&text.to_lowercase());
        let inputs: Vec<&str> = sentencia::textprep::tokenize(&lowered);
        for token in preprocess(&text, &r) {
            let justified = inputs
                .iter()
                .any(|input| *input == token || r.lemma(input) == token);
            prop_assert!(justified, "token {token:?} has no source in {inputs:?}");
        }
    }

    #[test]
    fn strip_diacritics_never_grows(text in spanishish_text()) {
        prop_assert!(strip_diacritics(&text).chars().count() <= text.chars().count());
    }
}

fn dataset_from_counts(counts: &[usize]) -> JurisdictionDataset {
    let mut judgments = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        for i in 0..n {
            judgments.push(Judgment {
                id: format!("c{c}-{i}"),
                jurisdiction: "jur".into(),
                header: "h".into(),
                precedents: None,
                fundamentals: "f".into(),
                decision: None,
                primary_category: format!("cat{c}"),
                alt_categories: vec![],
            });
        }
    }
    JurisdictionDataset::new("jur", judgments)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_invariants(
        counts in proptest::collection::vec(
            prop_oneof![4 => 0usize..400, 1 => 5001usize..5500],
            1..5,
        ),
        seed in any::<u64>(),
    ) {
        let dataset = dataset_from_counts(&counts);
        if dataset.is_empty() {
            return Ok(());
        }
        let eligible = counts.iter().filter(|&&c| c >= 50).count();
        match split_dataset(&dataset, seed) {
            Err(sentencia::Error::NoEligibleCategories { .. }) => {
                prop_assert_eq!(eligible, 0);
            }
            Err(other) => return Err(TestCaseError::fail(format!("unexpected: {other}"))),
            Ok(split) => {
                prop_assert!(eligible > 0);
                prop_assert!(split.train.is_disjoint(&split.test1));
                prop_assert!(split.train.is_disjoint(&split.test2));
                prop_assert_eq!(split.test1.len(), split.test2.len());
                // Discarded exactly the under-50 categories.
                for (c, &n) in counts.iter().enumerate() {
                    let name = format!("cat{c}");
                    prop_assert_eq!(split.discarded_categories.contains(&name), n > 0 && n < 50);
                }
                // Downsampled categories hit their target exactly, and the
                // target is a multiple of 1,000 (or the 5,000 ceiling).
                for (name, (original, retained)) in &split.downsampled_categories {
                    prop_assert!(*original > 5_000);
                    prop_assert!(*retained <= 5_000);
                    prop_assert!(retained % 1_000 == 0 || *retained == 5_000);
                    let in_pool = split
                        .train
                        .iter()
                        .chain(&split.test1)
                        .filter(|id| id.starts_with(&format!("{}-", name.replace("cat", "c"))))
                        .count();
                    prop_assert_eq!(in_pool, *retained);
                }
                // Purity: the same seed reproduces the same split.
                let again = split_dataset(&dataset, seed).unwrap();
                prop_assert_eq!(split, again);
            }
        }
    }
}

fn small_docs() -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(
        proptest::string::string_regex("[a-e]{1,4}( [a-e]{1,4}){0,5}").unwrap(),
        2..10,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kept_features_respect_df_bounds(docs in small_docs()) {
        let options = FitOptions { min_df: 0.2, max_df: 0.8, ..FitOptions::default() };
        let space = fit_feature_space(&docs, &options).unwrap();
        for feature in space.features() {
            prop_assert!(feature.doc_frequency >= options.min_df);
            prop_assert!(feature.doc_frequency <= options.max_df);
        }
    }

    #[test]
    fn fitting_ignores_document_order(docs in small_docs(), swap in any::<prop::sample::Index>()) {
        let space = fit_feature_space(&docs, &FitOptions::default()).unwrap();
        let mut shuffled = docs.clone();
        let i = swap.index(shuffled.len());
        shuffled.swap(0, i);
        let other = fit_feature_space(&shuffled, &FitOptions::default()).unwrap();
        prop_assert_eq!(space.features(), other.features());
    }

    #[test]
    fn word_counts_match_brute_force(docs in small_docs()) {
        let options = FitOptions { min_df: 0.0, max_df: 1.0, ..FitOptions::default() };
        let space = fit_feature_space(&docs, &options).unwrap();
        for doc in &docs {
            let vector = space.vectorize(doc, "d");
            let tokens: Vec<&str> = doc.split_whitespace().collect();
            for feature in space.features() {
                if feature.kind != FeatureKind::Word {
                    continue;
                }
                let gram: Vec<&str> = feature.text.split(' ').collect();
                let mut expected = 0u32;
                if tokens.len() >= gram.len() {
                    for window in tokens.windows(gram.len()) {
                        if window == gram.as_slice() {
                            expected += 1;
                        }
                    }
                }
                prop_assert_eq!(vector.get(feature.index), expected, "gram {:?}", feature.text);
            }
        }
    }

    #[test]
    fn selected_scores_dominate_unselected(
        docs in small_docs(),
        percentile in 1.0f64..100.0,
    ) {
        if docs.len() < 2 {
            return Ok(());
        }
        let labels: Vec<String> = (0..docs.len()).map(|i| format!("c{}", i % 2)).collect();
        let options = FitOptions { min_df: 0.0, max_df: 1.0, ..FitOptions::default() };
        let space = fit_feature_space(&docs, &options).unwrap();
        if space.is_empty() {
            return Ok(());
        }
        let vectors: Vec<CountVector> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| space.vectorize(d, format!("d{i}")))
            .collect();
        let report = chi2_select(&vectors, &labels, space.len(), percentile).unwrap();
        let expected = ((percentile * space.len() as f64 / 100.0).ceil() as usize)
            .clamp(1, space.len());
        prop_assert_eq!(report.selected.len(), expected);
        let selected: std::collections::BTreeSet<u32> = report.selected.iter().copied().collect();
        let min_selected = report
            .selected
            .iter()
            .map(|&i| report.scores[i as usize])
            .fold(f64::INFINITY, f64::min);
        for (i, &score) in report.scores.iter().enumerate() {
            if !selected.contains(&(i as u32)) {
                prop_assert!(score <= min_selected + 1e-15);
            }
        }
    }
}

#[derive(Debug, Clone)]
struct TreeFixture {
    rows: Vec<Vec<u32>>,
    labels: Vec<String>,
    hp: TreeHyperparams,
}

fn tree_fixture() -> impl Strategy<Value = TreeFixture> {
    (
        3usize..24,
        1usize..5,
        2usize..4,
        1usize..5,
        any::<u64>(),
        prop_oneof![Just(Splitter::Best), Just(Splitter::Random)],
        prop_oneof![Just(MaxFeatures::All), Just(MaxFeatures::Sqrt)],
        prop_oneof![Just(Criterion::Gini), Just(Criterion::Entropy)],
    )
        .prop_flat_map(
            |(n, f, cats, depth, seed, splitter, max_features, criterion)| {
                (
                    proptest::collection::vec(proptest::collection::vec(0u32..4, f..=f), n..=n),
                    proptest::collection::vec(0usize..cats, n..=n),
                    Just(TreeHyperparams {
                        criterion,
                        max_depth: depth,
                        max_features,
                        splitter,
                        seed,
                        ..TreeHyperparams::default()
                    }),
                )
                    .prop_map(|(rows, label_ids, hp)| TreeFixture {
                        rows,
                        labels: label_ids.iter().map(|c| format!("c{c}")).collect(),
                        hp,
                    })
            },
        )
}

fn predict_recursive(tree: &TreeModel, node: usize, vector: &CountVector) -> (usize, usize) {
    let n = &tree.nodes[node];
    match n.feature {
        None => {
            let mut best = 0;
            for (i, &c) in n.category_counts.iter().enumerate() {
                if c > n.category_counts[best] {
                    best = i;
                }
            }
            (best, node)
        }
        Some(f) => {
            if (vector.get(f) as f64) <= n.threshold {
                predict_recursive(tree, n.left.unwrap() as usize, vector)
            } else {
                predict_recursive(tree, n.right.unwrap() as usize, vector)
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trained_trees_satisfy_structural_invariants(fixture in tree_fixture()) {
        let set = TrainingSet::from_dense(&fixture.rows, &fixture.labels).unwrap();
        let tree = train_tree(&set, &fixture.hp).unwrap();
        tree.validate().unwrap();

        // Root histogram equals the label histogram (conservation).
        let mut expected = BTreeMap::new();
        for label in &fixture.labels {
            *expected.entry(label.clone()).or_insert(0u32) += 1;
        }
        let root = &tree.nodes[0].category_counts;
        for (i, category) in tree.categories.iter().enumerate() {
            prop_assert_eq!(root[i], expected.get(category).copied().unwrap_or(0));
        }

        // Every training sample lands in a leaf that counted it.
        for i in 0..set.n_samples() {
            let (_, leaf) = tree.predict(set.row(i));
            let label = set.label(i) as usize;
            prop_assert!(tree.nodes[leaf].category_counts[label] >= 1);
        }

        // min_samples bounds: every internal node was splittable and its
        // children retain at least the leaf minimum.
        let n = set.n_samples();
        let min_split = ((fixture.hp.min_samples_split * n as f64).ceil() as usize).max(2);
        let min_leaf = ((fixture.hp.min_samples_leaf * n as f64).ceil() as usize).max(1);
        for node in &tree.nodes {
            if node.is_leaf() {
                continue;
            }
            let size: u32 = node.category_counts.iter().sum();
            prop_assert!(size as usize >= min_split);
            for child in [node.left.unwrap(), node.right.unwrap()] {
                let child_size: u32 = tree.nodes[child as usize].category_counts.iter().sum();
                prop_assert!(child_size as usize >= min_leaf);
            }
        }
    }

    #[test]
    fn array_navigation_equals_recursive_reference(fixture in tree_fixture()) {
        let set = TrainingSet::from_dense(&fixture.rows, &fixture.labels).unwrap();
        let tree = train_tree(&set, &fixture.hp).unwrap();
        for i in 0..set.n_samples() {
            prop_assert_eq!(tree.predict(set.row(i)), predict_recursive(&tree, 0, set.row(i)));
        }
        // And off-distribution probes.
        let probe = CountVector::new("p", vec![(0, 7)]);
        prop_assert_eq!(tree.predict(&probe), predict_recursive(&tree, 0, &probe));
    }

    #[test]
    fn serialization_round_trip_predicts_identically(fixture in tree_fixture()) {
        let set = TrainingSet::from_dense(&fixture.rows, &fixture.labels).unwrap();
        let tree = train_tree(&set, &fixture.hp).unwrap();
        let json = serde_json::to_string(&tree).unwrap();
        let back: TreeModel = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&tree, &back);
        for i in 0..set.n_samples() {
            prop_assert_eq!(tree.predict(set.row(i)), back.predict(set.row(i)));
        }
    }
}
