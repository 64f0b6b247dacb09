//! Contextual concept sets of ambiguous concepts.
//!
//! Concepts sharing a sentence with an ambiguous concept are routed to its
//! positive or negative set by the sentence label, reversed when the sentence
//! carries a negation marker. Members are then filtered by the co-occurrence
//! ratio `p(a, c) / (p(a) p(c))` over non-neutral sentences.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::concepts::AnnotatedSentence;
use crate::error::{Error, Result};
use crate::polarity::Polarity;

pub const DEFAULT_PMI_MIN: f64 = 1.0;
pub const DEFAULT_TOP_K: usize = 20;

/// Sentence-level frequencies over the non-neutral part of a corpus.
#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    sentences: u64,
    doc_freq: HashMap<String, u64>,
    pair_freq: HashMap<(String, String), u64>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CorpusStats {
    pub fn from_sentences(sentences: &[AnnotatedSentence]) -> Self {
        let mut stats = CorpusStats::default();
        for s in sentences.iter().filter(|s| s.sentence.label.is_polar()) {
            stats.sentences += 1;
            let keys: Vec<&str> = s.concept_set().into_iter().collect();
            for (i, a) in keys.iter().enumerate() {
                *stats.doc_freq.entry(a.to_string()).or_default() += 1;
                for b in &keys[i + 1..] {
                    *stats.pair_freq.entry(pair_key(a, b)).or_default() += 1;
                }
            }
        }
        stats
    }

    /// Number of non-neutral sentences.
    pub fn sentence_count(&self) -> u64 {
        self.sentences
    }

    pub fn frequency(&self, concept: &str) -> u64 {
        self.doc_freq.get(concept).copied().unwrap_or(0)
    }

    pub fn joint_frequency(&self, a: &str, b: &str) -> u64 {
        if a == b {
            return self.frequency(a);
        }
        self.pair_freq.get(&pair_key(a, b)).copied().unwrap_or(0)
    }

    pub fn pmi(&self, ambiguous: &str, concept: &str) -> Result<f64> {
        pmi_from_counts(
            self.joint_frequency(ambiguous, concept),
            self.frequency(ambiguous),
            self.frequency(concept),
            self.sentences,
        )
    }
}

/// The co-occurrence ratio from raw sentence counts (no logarithm, so
/// independence gives 1).
pub fn pmi_from_counts(joint: u64, count_a: u64, count_c: u64, total: u64) -> Result<f64> {
    if count_a == 0 || count_c == 0 || total == 0 {
        return Err(Error::InvalidInput(format!(
            "pmi needs non-zero marginals (a={count_a}, c={count_c}, n={total})"
        )));
    }
    // p(a,c) / (p(a) p(c)) = joint·n / (count_a·count_c); the integer form
    // keeps exact independence at exactly 1.
    let num = joint as u128 * total as u128;
    let den = count_a as u128 * count_c as u128;
    Ok(num as f64 / den as f64)
}

/// Which set a co-occurring concept joins.
pub fn destination(sentence_polarity: Polarity, has_negation: bool, negation_flip: bool) -> Polarity {
    if has_negation && negation_flip {
        sentence_polarity.flip()
    } else {
        sentence_polarity
    }
}

/// Unfiltered co-occurrence counts (in sentences) per destination set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawContext {
    pub positive: BTreeMap<String, u64>,
    pub negative: BTreeMap<String, u64>,
}

impl RawContext {
    pub fn side(&self, polarity: Polarity) -> &BTreeMap<String, u64> {
        match polarity {
            Polarity::Positive => &self.positive,
            Polarity::Negative => &self.negative,
        }
    }

    fn side_mut(&mut self, polarity: Polarity) -> &mut BTreeMap<String, u64> {
        match polarity {
            Polarity::Positive => &mut self.positive,
            Polarity::Negative => &mut self.negative,
        }
    }
}

pub fn collect_context(ambiguous: &str, sentences: &[AnnotatedSentence], negation_flip: bool) -> RawContext {
    let mut raw = RawContext::default();
    for s in sentences {
        let Some(polarity) = Polarity::from_label(s.sentence.label) else {
            continue;
        };
        let keys = s.concept_set();
        if !keys.contains(ambiguous) {
            continue;
        }
        let side = raw.side_mut(destination(polarity, s.sentence.has_negation, negation_flip));
        for k in keys.into_iter().filter(|k| *k != ambiguous) {
            *side.entry(k.to_string()).or_default() += 1;
        }
    }
    raw
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextMember {
    /// Co-occurrence count in the corpus; zero for augmented members.
    pub count: u64,
    /// Ratio against the ambiguous concept; absent for augmented members.
    pub pmi: Option<f64>,
    pub pseudo_count: f64,
    /// Knowledge-base relation through which an augmented member was found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via_relation: Option<String>,
}

impl ContextMember {
    pub fn effective_count(&self) -> f64 {
        self.count as f64 + self.pseudo_count
    }

    pub fn is_augmented(&self) -> bool {
        self.pseudo_count > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextProfile {
    pub ambiguous_concept: String,
    pub positive_set: BTreeMap<String, ContextMember>,
    pub negative_set: BTreeMap<String, ContextMember>,
    pub m_pos: usize,
    pub m_neg: usize,
}

impl ContextProfile {
    pub fn empty(ambiguous: &str) -> Self {
        ContextProfile {
            ambiguous_concept: ambiguous.to_string(),
            positive_set: BTreeMap::new(),
            negative_set: BTreeMap::new(),
            m_pos: 0,
            m_neg: 0,
        }
    }

    pub fn side(&self, polarity: Polarity) -> &BTreeMap<String, ContextMember> {
        match polarity {
            Polarity::Positive => &self.positive_set,
            Polarity::Negative => &self.negative_set,
        }
    }

    pub fn side_mut(&mut self, polarity: Polarity) -> &mut BTreeMap<String, ContextMember> {
        match polarity {
            Polarity::Positive => &mut self.positive_set,
            Polarity::Negative => &mut self.negative_set,
        }
    }

    pub fn refresh_sizes(&mut self) {
        self.m_pos = self.positive_set.len();
        self.m_neg = self.negative_set.len();
    }

    pub fn is_empty(&self) -> bool {
        self.positive_set.is_empty() && self.negative_set.is_empty()
    }

    /// Distinct members of both sets.
    pub fn members(&self) -> BTreeSet<&str> {
        self.positive_set
            .keys()
            .chain(self.negative_set.keys())
            .map(String::as_str)
            .collect()
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.positive_set.contains_key(concept) || self.negative_set.contains_key(concept)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetentionRule {
    /// Members need a ratio strictly above this value.
    pub pmi_min: f64,
    pub top_k: usize,
}

impl Default for RetentionRule {
    fn default() -> Self {
        RetentionRule {
            pmi_min: DEFAULT_PMI_MIN,
            top_k: DEFAULT_TOP_K,
        }
    }
}

fn retain_side(
    ambiguous: &str,
    raw: &BTreeMap<String, u64>,
    stats: &CorpusStats,
    rule: RetentionRule,
) -> Result<BTreeMap<String, ContextMember>> {
    let mut scored: Vec<(&String, u64, f64)> = Vec::with_capacity(raw.len());
    for (concept, &count) in raw {
        let pmi = stats.pmi(ambiguous, concept)?;
        if pmi > rule.pmi_min {
            scored.push((concept, count, pmi));
        }
    }
    scored.sort_by(|a, b| b.2.total_cmp(&a.2).then(b.1.cmp(&a.1)).then_with(|| a.0.cmp(b.0)));
    scored.truncate(rule.top_k);
    Ok(scored
        .into_iter()
        .map(|(concept, count, pmi)| {
            (
                concept.clone(),
                ContextMember {
                    count,
                    pmi: Some(pmi),
                    pseudo_count: 0.0,
                    via_relation: None,
                },
            )
        })
        .collect())
}

pub fn filter_context(ambiguous: &str, raw: &RawContext, stats: &CorpusStats, rule: RetentionRule) -> Result<ContextProfile> {
    let mut profile = ContextProfile::empty(ambiguous);
    profile.positive_set = retain_side(ambiguous, &raw.positive, stats, rule)?;
    profile.negative_set = retain_side(ambiguous, &raw.negative, stats, rule)?;
    profile.refresh_sizes();
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextProfiler {
    pub retention: RetentionRule,
    pub negation_flip: bool,
}

impl Default for ContextProfiler {
    fn default() -> Self {
        ContextProfiler {
            retention: RetentionRule::default(),
            negation_flip: true,
        }
    }
}

impl ContextProfiler {
    pub fn profile(&self, ambiguous: &str, sentences: &[AnnotatedSentence], stats: &CorpusStats) -> Result<ContextProfile> {
        let raw = collect_context(ambiguous, sentences, self.negation_flip);
        filter_context(ambiguous, &raw, stats, self.retention)
    }

    /// Profiles for every ambiguous concept, in the given order.
    pub fn profile_all<'a>(
        &self,
        ambiguous: impl IntoIterator<Item = &'a str>,
        sentences: &[AnnotatedSentence],
    ) -> Result<Vec<ContextProfile>> {
        let stats = CorpusStats::from_sentences(sentences);
        ambiguous
            .into_iter()
            .map(|a| self.profile(a, sentences, &stats))
            .collect()
    }
}
