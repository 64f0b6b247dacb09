//! Detection of sentiment concepts whose corpus polarity is spread out.
//!
//! Every occurrence of a sentiment concept in a positive sentence is an
//! observation of `+pos_score`, every occurrence in a negative sentence an
//! observation of `-neg_score`. A concept whose observations have a
//! population standard deviation above the threshold is ambiguous.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::concepts::AnnotatedSentence;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::resource::SentimentResource;

pub const DEFAULT_THRESHOLD: f64 = 0.85;

/// Where the per-observation magnitudes come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Every observation has magnitude 1.
    #[default]
    Unit,
    /// Mean |score| of the concept's positive (negative) sentences.
    SentenceScore,
    /// |polarity value| of the concept in the lexicon, on both sides.
    LexiconIntensity,
}

/// Per-concept sentence counts split by label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceCounts {
    pub pos_count: u64,
    pub neg_count: u64,
    /// Sum of |score| over the positive sentences.
    pub pos_score_sum: f64,
    pub neg_score_sum: f64,
}

impl OccurrenceCounts {
    pub fn total(&self) -> u64 {
        self.pos_count + self.neg_count
    }

    fn merge(&mut self, other: &OccurrenceCounts) {
        self.pos_count += other.pos_count;
        self.neg_count += other.neg_count;
        self.pos_score_sum += other.pos_score_sum;
        self.neg_score_sum += other.neg_score_sum;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityRecord {
    pub concept: String,
    pub pos_count: u64,
    pub neg_count: u64,
    pub pos_score: f64,
    pub neg_score: f64,
    pub mu: f64,
    pub delta: f64,
    pub ambiguous: bool,
}

/// Counts, for every resource concept, the positive and negative sentences
/// whose bag contains it. Neutral sentences are skipped; repeats inside one
/// sentence count once.
pub fn count_occurrences(
    sentences: &[AnnotatedSentence],
    resource: &SentimentResource,
) -> BTreeMap<String, OccurrenceCounts> {
    let mut counts: BTreeMap<String, OccurrenceCounts> = BTreeMap::new();
    for s in sentences {
        let label = s.sentence.label;
        if !label.is_polar() {
            continue;
        }
        let present: BTreeSet<&str> = s
            .concepts
            .iter()
            .map(|c| c.key.as_str())
            .filter(|k| resource.contains(k))
            .collect();
        let magnitude = s.sentence.score.abs();
        for key in present {
            let mut delta = OccurrenceCounts::default();
            if label == Label::Positive {
                delta.pos_count = 1;
                delta.pos_score_sum = magnitude;
            } else {
                delta.neg_count = 1;
                delta.neg_score_sum = magnitude;
            }
            counts.entry(key.to_string()).or_default().merge(&delta);
        }
    }
    counts
}

/// Mean and population standard deviation of `pos_count` copies of
/// `+pos_score` and `neg_count` copies of `-neg_score`.
pub fn compute_statistics(pos_count: u64, neg_count: u64, pos_score: f64, neg_score: f64) -> Result<(f64, f64)> {
    let total = pos_count + neg_count;
    if total == 0 {
        return Err(Error::InvalidInput("no positive or negative occurrences".into()));
    }
    if !(pos_score > 0.0 && neg_score > 0.0) {
        return Err(Error::InvalidInput(format!(
            "scores must be positive (pos {pos_score}, neg {neg_score})"
        )));
    }
    let (p, n, t) = (pos_count as f64, neg_count as f64, total as f64);
    let mu = (p * pos_score - n * neg_score) / t;
    let variance = ((mu - pos_score).powi(2) * p + (mu + neg_score).powi(2) * n) / t;
    Ok((mu, variance.sqrt()))
}

impl AmbiguityRecord {
    pub fn compute(
        concept: impl Into<String>,
        pos_count: u64,
        neg_count: u64,
        pos_score: f64,
        neg_score: f64,
        threshold: f64,
    ) -> Result<Self> {
        let (mu, delta) = compute_statistics(pos_count, neg_count, pos_score, neg_score)?;
        Ok(AmbiguityRecord {
            concept: concept.into(),
            pos_count,
            neg_count,
            pos_score,
            neg_score,
            mu,
            delta,
            ambiguous: delta > threshold,
        })
    }
}

/// The two lists handed to reviewers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityPartition {
    pub threshold: f64,
    pub score_mode: ScoreMode,
    pub ambiguous: Vec<AmbiguityRecord>,
    pub unambiguous: Vec<AmbiguityRecord>,
}

impl AmbiguityPartition {
    pub fn is_ambiguous(&self, concept: &str) -> bool {
        self.ambiguous.iter().any(|r| r.concept == concept)
    }

    pub fn record(&self, concept: &str) -> Option<&AmbiguityRecord> {
        self.ambiguous
            .iter()
            .chain(self.unambiguous.iter())
            .find(|r| r.concept == concept)
    }

    pub fn ambiguous_concepts(&self) -> impl Iterator<Item = &str> {
        self.ambiguous.iter().map(|r| r.concept.as_str())
    }
}

pub fn validate_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold {threshold} outside (0, 1]")))
    }
}

/// Splits records by `delta > threshold`, recomputing the verdict.
pub fn detect_ambiguous(records: &[AmbiguityRecord], threshold: f64) -> Result<AmbiguityPartition> {
    validate_threshold(threshold)?;
    let mut partition = AmbiguityPartition {
        threshold,
        ..Default::default()
    };
    for r in records {
        let mut r = r.clone();
        r.ambiguous = r.delta > threshold;
        if r.ambiguous {
            partition.ambiguous.push(r);
        } else {
            partition.unambiguous.push(r);
        }
    }
    Ok(partition)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbiguityDetector {
    pub threshold: f64,
    pub score_mode: ScoreMode,
}

impl Default for AmbiguityDetector {
    fn default() -> Self {
        AmbiguityDetector {
            threshold: DEFAULT_THRESHOLD,
            score_mode: ScoreMode::Unit,
        }
    }
}

impl AmbiguityDetector {
    pub fn new(threshold: f64, score_mode: ScoreMode) -> Result<Self> {
        validate_threshold(threshold)?;
        Ok(AmbiguityDetector { threshold, score_mode })
    }

    fn scores(&self, counts: &OccurrenceCounts, lexicon_value: Option<f64>) -> (f64, f64) {
        match self.score_mode {
            ScoreMode::Unit => (1.0, 1.0),
            ScoreMode::SentenceScore => {
                let mean = |sum: f64, n: u64| if n > 0 && sum > 0.0 { sum / n as f64 } else { 1.0 };
                (
                    mean(counts.pos_score_sum, counts.pos_count),
                    mean(counts.neg_score_sum, counts.neg_count),
                )
            }
            ScoreMode::LexiconIntensity => {
                let m = lexicon_value.map(f64::abs).filter(|v| *v > 0.0).unwrap_or(1.0);
                (m, m)
            }
        }
    }

    pub fn records(&self, sentences: &[AnnotatedSentence], resource: &SentimentResource) -> Result<Vec<AmbiguityRecord>> {
        count_occurrences(sentences, resource)
            .iter()
            .map(|(concept, counts)| {
                let (ps, ns) = self.scores(counts, resource.polarity(concept));
                AmbiguityRecord::compute(concept.clone(), counts.pos_count, counts.neg_count, ps, ns, self.threshold)
            })
            .collect()
    }

    pub fn detect(&self, sentences: &[AnnotatedSentence], resource: &SentimentResource) -> Result<AmbiguityPartition> {
        let records = self.records(sentences, resource)?;
        let mut partition = detect_ambiguous(&records, self.threshold)?;
        partition.score_mode = self.score_mode;
        Ok(partition)
    }
}
