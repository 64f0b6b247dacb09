//! Sentence polarity classification over three feature schemes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concepts::AnnotatedSentence;
use crate::disambiguator::ModelSet;
use crate::error::{Error, Result};
use crate::polarity::Polarity;
use crate::resource::SentimentResource;
use crate::wordlists;

pub const NEGATION_FEATURE: &str = "NEG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    #[serde(alias = "bow")]
    BagOfWords,
    #[serde(alias = "boc")]
    BagOfConcepts,
    #[serde(alias = "boc_cs")]
    BocCommonsense,
}

impl FeatureMode {
    pub const ALL: [FeatureMode; 3] = [FeatureMode::BagOfWords, FeatureMode::BagOfConcepts, FeatureMode::BocCommonsense];

    pub fn short_name(self) -> &'static str {
        match self {
            FeatureMode::BagOfWords => "bow",
            FeatureMode::BagOfConcepts => "boc",
            FeatureMode::BocCommonsense => "boc_cs",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FeatureMode::BagOfWords => "Bag-of-words (baseline)",
            FeatureMode::BagOfConcepts => "Bag-of-concepts as context",
            FeatureMode::BocCommonsense => "Bag-of-concepts + commonsense knowledge",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bow" | "bag_of_words" => Ok(FeatureMode::BagOfWords),
            "boc" | "bag_of_concepts" => Ok(FeatureMode::BagOfConcepts),
            "boc_cs" | "boc_commonsense" => Ok(FeatureMode::BocCommonsense),
            other => Err(Error::Config(format!("unknown feature mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub mode: FeatureMode,
    pub use_disambiguation: bool,
    pub negation_flip: bool,
    /// Append augmented context members of in-sentence ambiguous concepts.
    pub include_augmented: bool,
}

impl FeatureConfig {
    pub fn for_mode(mode: FeatureMode) -> Self {
        FeatureConfig {
            mode,
            use_disambiguation: mode == FeatureMode::BocCommonsense,
            negation_flip: true,
            include_augmented: true,
        }
    }
}

/// Resources the commonsense feature scheme reads.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureContext<'a> {
    pub resource: Option<&'a SentimentResource>,
    pub models: Option<&'a ModelSet>,
}

pub fn tagged(concept: &str, polarity: Polarity) -> String {
    format!("{concept}{}", polarity.tag())
}

/// Feature multiset of one sentence under the given configuration.
pub fn featurize(s: &AnnotatedSentence, config: &FeatureConfig, ctx: FeatureContext<'_>) -> Vec<String> {
    let mut features: Vec<String> = match config.mode {
        FeatureMode::BagOfWords => s
            .sentence
            .tokens
            .iter()
            .zip(&s.sentence.lemmas)
            .filter(|(t, l)| !wordlists::is_stopword(t) && !wordlists::is_stopword(l))
            .map(|(_, l)| l.clone())
            .collect(),
        FeatureMode::BagOfConcepts => s.concepts.iter().map(|c| c.key.clone()).collect(),
        FeatureMode::BocCommonsense => commonsense_features(s, config, ctx),
    };
    if config.negation_flip && s.sentence.has_negation {
        features.push(NEGATION_FEATURE.to_string());
    }
    features
}

fn commonsense_features(s: &AnnotatedSentence, config: &FeatureConfig, ctx: FeatureContext<'_>) -> Vec<String> {
    let clues: Vec<&str> = s.concepts.iter().map(|c| c.key.as_str()).collect();
    let mut out = Vec::with_capacity(clues.len());
    let mut appended: Vec<&str> = Vec::new();
    for key in &clues {
        let model = ctx.models.filter(|_| config.use_disambiguation).and_then(|m| m.get(key));
        if let Some(model) = model {
            let decision = model.classify(clues.iter().copied());
            out.push(tagged(key, decision.polarity));
            if config.include_augmented && !appended.contains(key) {
                appended.push(key);
                out.extend(model.augmented_on(decision.polarity).map(str::to_string));
            }
        } else if let Some(polarity) = ctx.resource.and_then(|r| r.polarity(key)).and_then(Polarity::from_sign) {
            out.push(tagged(key, polarity));
        } else {
            out.push(key.to_string());
        }
    }
    out
}

/// Multinomial Naive Bayes over feature tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceModel {
    pub config: FeatureConfig,
    pub prior_pos: f64,
    pub prior_neg: f64,
    pub counts_pos: BTreeMap<String, f64>,
    pub counts_neg: BTreeMap<String, f64>,
    pub total_pos: f64,
    pub total_neg: f64,
    pub vocab_size: usize,
    pub alpha: f64,
}

impl SentenceModel {
    pub fn train<I>(examples: I, config: FeatureConfig, alpha: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<String>, Polarity)>,
    {
        if alpha.is_nan() || alpha <= 0.0 {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        let (mut docs_pos, mut docs_neg) = (0u64, 0u64);
        let mut counts_pos: BTreeMap<String, f64> = BTreeMap::new();
        let mut counts_neg: BTreeMap<String, f64> = BTreeMap::new();
        for (features, polarity) in examples {
            let counts = match polarity {
                Polarity::Positive => {
                    docs_pos += 1;
                    &mut counts_pos
                }
                Polarity::Negative => {
                    docs_neg += 1;
                    &mut counts_neg
                }
            };
            for f in features {
                *counts.entry(f).or_default() += 1.0;
            }
        }
        if docs_pos + docs_neg == 0 {
            return Err(Error::InvalidInput("empty training set".into()));
        }
        if docs_pos == 0 || docs_neg == 0 {
            return Err(Error::InvalidInput("training set has a single class".into()));
        }
        let vocab_size = counts_pos.keys().chain(counts_neg.keys()).collect::<std::collections::BTreeSet<_>>().len();
        let total = (docs_pos + docs_neg) as f64;
        Ok(SentenceModel {
            config,
            prior_pos: docs_pos as f64 / total,
            prior_neg: docs_neg as f64 / total,
            total_pos: counts_pos.values().sum(),
            total_neg: counts_neg.values().sum(),
            counts_pos,
            counts_neg,
            vocab_size,
            alpha,
        })
    }

    pub fn knows(&self, feature: &str) -> bool {
        self.counts_pos.contains_key(feature) || self.counts_neg.contains_key(feature)
    }

    pub fn log_likelihood(&self, feature: &str, side: Polarity) -> f64 {
        let (counts, total) = match side {
            Polarity::Positive => (&self.counts_pos, self.total_pos),
            Polarity::Negative => (&self.counts_neg, self.total_neg),
        };
        let c = counts.get(feature).copied().unwrap_or(0.0);
        ((c + self.alpha) / (total + self.alpha * self.vocab_size as f64)).ln()
    }

    /// Log-posterior margin (positive minus negative); unseen features are ignored.
    pub fn margin<S: AsRef<str>>(&self, features: &[S]) -> f64 {
        let mut log_pos = self.prior_pos.ln();
        let mut log_neg = self.prior_neg.ln();
        for f in features.iter().map(AsRef::as_ref).filter(|f| self.knows(f)) {
            log_pos += self.log_likelihood(f, Polarity::Positive);
            log_neg += self.log_likelihood(f, Polarity::Negative);
        }
        log_pos - log_neg
    }

    /// Ties go to the positive class.
    pub fn predict_features<S: AsRef<str>>(&self, features: &[S]) -> Polarity {
        if self.margin(features) >= 0.0 {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }

    pub fn predict(&self, s: &AnnotatedSentence, ctx: FeatureContext<'_>) -> Polarity {
        self.predict_features(&featurize(s, &self.config, ctx))
    }
}

/// Featurizes the polar sentences of `train` and fits a model.
pub fn train_sentence_model(
    train: &[AnnotatedSentence],
    config: FeatureConfig,
    ctx: FeatureContext<'_>,
    alpha: f64,
) -> Result<SentenceModel> {
    let examples = train.iter().filter_map(|s| {
        Polarity::from_label(s.sentence.label).map(|p| (featurize(s, &config, ctx), p))
    });
    SentenceModel::train(examples, config, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::AmbiguityRecord;
    use crate::concepts::{extract_concepts, ConceptVocabulary};
    use crate::context::{ContextMember, ContextProfile};
    use crate::corpus::{Label, Preprocessor};
    use crate::disambiguator;

    fn annotate(text: &str, label: Label, vocab: &ConceptVocabulary) -> AnnotatedSentence {
        let s = Preprocessor::new().process("t", text, label, None).unwrap();
        let concepts = extract_concepts(&s, vocab);
        AnnotatedSentence::new(s, concepts)
    }

    fn feats(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn bag_of_words_drops_stopwords() {
        let s = annotate("save your money", Label::Negative, &ConceptVocabulary::new());
        let f = featurize(&s, &FeatureConfig::for_mode(FeatureMode::BagOfWords), FeatureContext::default());
        assert_eq!(f, feats(&["save", "money"]));
    }

    #[test]
    fn negation_marker_appended() {
        let s = annotate("it does not work", Label::Negative, &ConceptVocabulary::new());
        let f = featurize(&s, &FeatureConfig::for_mode(FeatureMode::BagOfWords), FeatureContext::default());
        assert_eq!(f, feats(&["not", "work", NEGATION_FEATURE]));
        let mut cfg = FeatureConfig::for_mode(FeatureMode::BagOfWords);
        cfg.negation_flip = false;
        assert!(!featurize(&s, &cfg, FeatureContext::default()).contains(&NEGATION_FEATURE.to_string()));
    }

    #[test]
    fn commonsense_features_resolve_ambiguous_concepts() {
        let vocab: ConceptVocabulary = ["save_money", "go_for_device", "better_device", "device", "save", "good"]
            .into_iter()
            .collect();
        let s = annotate("Save your money and go for a better device.", Label::Negative, &vocab);
        let boc = featurize(&s, &FeatureConfig::for_mode(FeatureMode::BagOfConcepts), FeatureContext::default());
        assert_eq!(boc, feats(&["save_money", "save", "go_for_device", "better_device", "device"]));

        let mut profile = ContextProfile::empty("better_device");
        let m = |count| ContextMember {
            count,
            pmi: Some(2.0),
            pseudo_count: 0.0,
            via_relation: None,
        };
        profile.positive_set.insert("upgrade".into(), m(3));
        profile.negative_set.insert("save_money".into(), m(3));
        profile.negative_set.insert("refund".into(), ContextMember { pseudo_count: 1.5, ..m(0) });
        let record = AmbiguityRecord::compute("better_device", 3, 3, 1.0, 1.0, 0.85).unwrap();
        let mut models = ModelSet::default();
        models.insert(disambiguator::train(&profile, &record, 1.0, Some(0.5)).unwrap());
        let lexicon = SentimentResource::parse_tsv("better_device\t0.5\nsave\t0.2\n", "mem").unwrap();
        let ctx = FeatureContext {
            resource: Some(&lexicon),
            models: Some(&models),
        };
        let f = featurize(&s, &FeatureConfig::for_mode(FeatureMode::BocCommonsense), ctx);
        assert_eq!(
            f,
            feats(&["save_money", "save#pos", "go_for_device", "better_device#neg", "refund", "device"])
        );
    }

    #[test]
    fn disjoint_features_vote_for_their_class() {
        let cfg = FeatureConfig::for_mode(FeatureMode::BagOfWords);
        let m = SentenceModel::train(
            vec![(feats(&["great"]), Polarity::Positive), (feats(&["awful"]), Polarity::Negative)],
            cfg,
            1.0,
        )
        .unwrap();
        assert_eq!((m.prior_pos, m.prior_neg), (0.5, 0.5));
        assert_eq!(m.predict_features(&feats(&["great"])), Polarity::Positive);
        assert_eq!(m.predict_features(&feats(&["awful"])), Polarity::Negative);
        // only unseen features: prior decides, tie goes positive
        assert_eq!(m.predict_features(&feats(&["unseen"])), Polarity::Positive);
    }

    #[test]
    fn training_errors() {
        let cfg = FeatureConfig::for_mode(FeatureMode::BagOfWords);
        assert!(SentenceModel::train(Vec::new(), cfg, 1.0).is_err());
        assert!(SentenceModel::train(vec![(feats(&["a"]), Polarity::Positive)], cfg, 1.0).is_err());
    }

    #[test]
    fn prior_breaks_unseen() {
        let cfg = FeatureConfig::for_mode(FeatureMode::BagOfWords);
        let m = SentenceModel::train(
            vec![
                (feats(&["a"]), Polarity::Negative),
                (feats(&["b"]), Polarity::Negative),
                (feats(&["c"]), Polarity::Positive),
            ],
            cfg,
            1.0,
        )
        .unwrap();
        assert_eq!(m.predict_features(&feats(&["zzz"])), Polarity::Negative);
    }

    #[test]
    fn mode_names() {
        for mode in FeatureMode::ALL {
            assert_eq!(mode.short_name().parse::<FeatureMode>().unwrap(), mode);
        }
        assert_eq!("bag_of_words".parse::<FeatureMode>().unwrap(), FeatureMode::BagOfWords);
        assert!("svm".parse::<FeatureMode>().is_err());
    }
}
