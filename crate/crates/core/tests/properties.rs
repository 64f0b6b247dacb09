mod common;

use std::collections::BTreeSet;

use ctxpolarity::ambiguity::{compute_statistics, AmbiguityRecord};
use ctxpolarity::concepts::is_valid_concept_key;
use ctxpolarity::context::pmi_from_counts;
use ctxpolarity::disambiguator;
use ctxpolarity::evaluation::{metrics, stratified_folds, ConfusionCounts};
use ctxpolarity::{
    cosine, detect_negation, extract_concepts, featurize, lemmatize, ConceptVocabulary, ContextMember, ContextProfile,
    FeatureConfig, FeatureContext, FeatureMode, Label, Polarity, Preprocessor,
};
use proptest::prelude::*;

use common::annotated;

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,10}"
}

fn polarity() -> impl Strategy<Value = Polarity> {
    prop_oneof![Just(Polarity::Positive), Just(Polarity::Negative)]
}

proptest! {
    #[test]
    fn lemmatize_is_idempotent(w in word()) {
        let once = lemmatize(&w);
        prop_assert_eq!(lemmatize(&once), once);
    }

    #[test]
    fn negation_detection_ignores_token_order(mut tokens in prop::collection::vec(
        prop_oneof![word(), Just("not".to_string()), Just("never".to_string())], 0..12)
    ) {
        let before = detect_negation(&tokens);
        tokens.reverse();
        prop_assert_eq!(detect_negation(&tokens), before);
    }

    #[test]
    fn extracted_spans_are_in_bounds_and_keys_valid(
        words in prop::collection::vec(prop_oneof![word(), Just("good".to_string()), Just("value".to_string())], 1..15),
        vocab_words in prop::collection::vec(word(), 0..10),
    ) {
        let mut vocab = ConceptVocabulary::new();
        vocab.insert("good_value");
        vocab.insert("good");
        for w in &vocab_words {
            vocab.insert(w);
        }
        let s = Preprocessor::new().process("p", &words.join(" "), Label::Positive, None).unwrap();
        let first = extract_concepts(&s, &vocab);
        for c in &first {
            if let Some((start, end)) = c.span {
                prop_assert!(start < end && end <= s.tokens.len(), "span {:?} of {}", c, s.tokens.len());
            }
            prop_assert!(is_valid_concept_key(&c.key), "invalid key {}", c.key);
        }
        prop_assert_eq!(extract_concepts(&s, &vocab), first);
    }

    #[test]
    fn delta_and_mu_bounded_under_unit_scores(pc in 0u64..1000, nc in 0u64..1000) {
        prop_assume!(pc + nc > 0);
        let (mu, delta) = compute_statistics(pc, nc, 1.0, 1.0).unwrap();
        prop_assert!((-1.0..=1.0).contains(&mu));
        prop_assert!((0.0..=1.0 + 1e-12).contains(&delta));
    }

    #[test]
    fn ambiguity_is_symmetric_in_polarity(pc in 0u64..300, nc in 0u64..300, t in 0.0f64..1.0) {
        prop_assume!(pc + nc > 0);
        let a = AmbiguityRecord::compute("c", pc, nc, 1.0, 1.0, t).unwrap();
        let b = AmbiguityRecord::compute("c", nc, pc, 1.0, 1.0, t).unwrap();
        prop_assert!((a.mu + b.mu).abs() < 1e-12);
        prop_assert!((a.delta - b.delta).abs() < 1e-12);
        prop_assert_eq!(a.ambiguous, b.ambiguous);
    }

    #[test]
    fn pmi_is_symmetric_and_non_negative(
        (n, fa, fc, j) in (1u64..500)
            .prop_flat_map(|n| (Just(n), 1..=n, 1..=n))
            .prop_flat_map(|(n, fa, fc)| (Just(n), Just(fa), Just(fc), 0..=fa.min(fc)))
    ) {
        let ac = pmi_from_counts(j, fa, fc, n).unwrap();
        let ca = pmi_from_counts(j, fc, fa, n).unwrap();
        prop_assert_eq!(ac, ca);
        prop_assert!(ac >= 0.0);
        prop_assert_eq!(ac > 1.0, j * n > fa * fc);
    }

    #[test]
    fn cosine_is_bounded_and_symmetric(
        pair in (1usize..12).prop_flat_map(|d| (prop::collection::vec(-10.0f64..10.0, d), prop::collection::vec(-10.0f64..10.0, d)))
    ) {
        let (v, w) = pair;
        prop_assume!(v.iter().any(|x| x.abs() > 1e-6) && w.iter().any(|x| x.abs() > 1e-6));
        let c = cosine(&v, &w).unwrap();
        prop_assert!((-1.0..=1.0).contains(&c));
        prop_assert!((c - cosine(&w, &v).unwrap()).abs() < 1e-12);
    }

    /// Adding occurrences of a clue to the positive side never lowers its
    /// pull toward positive.
    #[test]
    fn naive_bayes_monotone_in_positive_counts(
        pos in prop::collection::btree_map("[a-e]", 1u64..8, 1..5),
        neg in prop::collection::btree_map("[a-e]", 1u64..8, 1..5),
        extra in 1u64..10,
    ) {
        let build = |bump: u64| {
            let mut profile = ContextProfile::empty("amb");
            for (side, set) in [(Polarity::Positive, &pos), (Polarity::Negative, &neg)] {
                for (k, &count) in set {
                    let count = if side == Polarity::Positive && k == "a" { count + bump } else { count };
                    profile.side_mut(side).insert(k.clone(), ContextMember { count, pmi: Some(2.0), pseudo_count: 0.0, via_relation: None });
                }
            }
            if !profile.positive_set.contains_key("a") && bump > 0 {
                profile.side_mut(Polarity::Positive).insert("a".into(), ContextMember { count: bump, pmi: Some(2.0), pseudo_count: 0.0, via_relation: None });
            }
            profile.refresh_sizes();
            profile
        };
        let record = AmbiguityRecord::compute("amb", 5, 5, 1.0, 1.0, 0.85).unwrap();
        let base = disambiguator::train(&build(0), &record, 1.0, None).unwrap();
        let bumped = disambiguator::train(&build(extra), &record, 1.0, None).unwrap();
        // ratio p(a|+)/p(a|-) must not decrease
        let ratio = |m: &ctxpolarity::DisambiguationModel| {
            let p = m.cond_pos.get("a").copied().unwrap_or(m.floor(Polarity::Positive));
            let n = m.cond_neg.get("a").copied().unwrap_or(m.floor(Polarity::Negative));
            p / n
        };
        prop_assert!(ratio(&bumped) >= ratio(&base) - 1e-12);
        let d = bumped.classify(["a"]);
        prop_assert!(d.margin >= base.classify(["a"]).margin - 1e-12 || !base.knows("a"));
    }

    #[test]
    fn naive_bayes_conditionals_are_distributions(
        pos in prop::collection::btree_map("[a-h]", 1u64..20, 1..6),
        neg in prop::collection::btree_map("[a-h]", 1u64..20, 1..6),
    ) {
        let mut profile = ContextProfile::empty("amb");
        for (side, set) in [(Polarity::Positive, &pos), (Polarity::Negative, &neg)] {
            for (k, &count) in set {
                profile.side_mut(side).insert(k.clone(), ContextMember { count, pmi: Some(2.0), pseudo_count: 0.0, via_relation: None });
            }
        }
        profile.refresh_sizes();
        let record = AmbiguityRecord::compute("amb", 3, 4, 1.0, 1.0, 0.85).unwrap();
        let m = disambiguator::train(&profile, &record, 1.0, Some(0.5)).unwrap();
        let sum_pos: f64 = m.cond_pos.values().sum();
        let sum_neg: f64 = m.cond_neg.values().sum();
        prop_assert!((sum_pos - 1.0).abs() < 1e-9, "sum p(c|+) = {}", sum_pos);
        prop_assert!((sum_neg - 1.0).abs() < 1e-9, "sum p(c|-) = {}", sum_neg);
        prop_assert!((m.prior_pos + m.prior_neg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metrics_match_recount(pairs in prop::collection::vec((polarity(), polarity()), 1..100)) {
        let c = ConfusionCounts::from_pairs(pairs.iter().copied());
        prop_assert_eq!(c.total(), pairs.len() as u64);
        let m = metrics(&c).unwrap();
        let correct = pairs.iter().filter(|(g, p)| g == p).count() as f64;
        prop_assert!((m.accuracy - correct / pairs.len() as f64).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&m.f1));
        prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
        prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12 || m.f1 == 0.0);
    }

    #[test]
    fn folds_partition_the_corpus(
        labels in prop::collection::vec(polarity(), 10..120),
        k in 2usize..6,
        seed in any::<u64>(),
    ) {
        let per_class = |p: Polarity| labels.iter().filter(|l| **l == p).count();
        prop_assume!(per_class(Polarity::Positive) >= k && per_class(Polarity::Negative) >= k);
        let folds = stratified_folds(&labels, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = BTreeSet::new();
        for f in &folds {
            for &i in f {
                prop_assert!(seen.insert(i), "index {} in two folds", i);
            }
        }
        prop_assert_eq!(seen, (0..labels.len()).collect::<BTreeSet<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(stratified_folds(&labels, k, seed).unwrap(), folds);
    }

    /// Bag-of-words features depend only on the tokens, never on the concept
    /// annotations or resources.
    #[test]
    fn bag_of_words_ignores_concepts(
        words in prop::collection::vec(word(), 1..10),
        keys in prop::collection::vec("[a-z]{1,6}(_[a-z]{1,6})?", 0..5),
    ) {
        let s = Preprocessor::new().process("p", &words.join(" "), Label::Positive, None).unwrap();
        let plain = ctxpolarity::AnnotatedSentence::new(s.clone(), Vec::new());
        let mut with = annotated(Label::Positive, false, &keys.iter().map(String::as_str).collect::<Vec<_>>());
        with.sentence = s;
        let config = FeatureConfig::for_mode(FeatureMode::BagOfWords);
        let none = FeatureContext { resource: None, models: None };
        prop_assert_eq!(featurize(&plain, &config, none), featurize(&with, &config, none));
    }
}
