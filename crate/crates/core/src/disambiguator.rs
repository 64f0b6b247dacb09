//! Naive Bayes resolution of an ambiguous concept's in-context polarity.
//!
//! The clues are the other concepts of the sentence. Class-conditional
//! probabilities come from the effective counts (corpus count plus
//! augmentation pseudo-count) of the positive and negative context sets,
//! Laplace-smoothed over the union of both sets. Evaluation is in log space
//! and the shared evidence term is dropped since it cannot change the argmax.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ambiguity::AmbiguityRecord;
use crate::context::ContextProfile;
use crate::error::{Error, Result};
use crate::polarity::Polarity;

pub const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisambiguationModel {
    pub concept: String,
    pub prior_pos: f64,
    pub prior_neg: f64,
    /// Smoothed `p(clue | positive)` for every clue in the vocabulary.
    pub cond_pos: BTreeMap<String, f64>,
    pub cond_neg: BTreeMap<String, f64>,
    pub total_pos: f64,
    pub total_neg: f64,
    pub vocab_size: usize,
    pub alpha: f64,
    /// Lexicon polarity of the concept, used only to break exact ties.
    pub static_polarity: Option<f64>,
    /// Augmented members and the side they joined.
    #[serde(default)]
    pub augmented: BTreeMap<String, Polarity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub polarity: Polarity,
    /// `log P(+|clues) - log P(-|clues)` up to the shared evidence term.
    pub margin: f64,
    /// Number of clues that were in the model vocabulary.
    pub clues_used: usize,
}

pub fn train(
    profile: &ContextProfile,
    record: &AmbiguityRecord,
    alpha: f64,
    static_polarity: Option<f64>,
) -> Result<DisambiguationModel> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if profile.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no contextual concepts for {}; cannot train",
            profile.ambiguous_concept
        )));
    }
    if record.pos_count == 0 || record.neg_count == 0 {
        return Err(Error::InvalidInput(format!(
            "{} occurs on one side only ({} positive, {} negative)",
            record.concept, record.pos_count, record.neg_count
        )));
    }
    let total = (record.pos_count + record.neg_count) as f64;
    let prior_pos = record.pos_count as f64 / total;
    let prior_neg = 1.0 - prior_pos;

    let vocab: BTreeSet<&str> = profile.members();
    let vocab_size = vocab.len();
    let side_total = |side: Polarity| -> f64 { profile.side(side).values().map(|m| m.effective_count()).sum() };
    let total_pos = side_total(Polarity::Positive);
    let total_neg = side_total(Polarity::Negative);
    let conditionals = |side: Polarity, side_total: f64| -> BTreeMap<String, f64> {
        let denom = side_total + alpha * vocab_size as f64;
        vocab
            .iter()
            .map(|c| {
                let count = profile.side(side).get(*c).map_or(0.0, |m| m.effective_count());
                (c.to_string(), (count + alpha) / denom)
            })
            .collect()
    };
    let augmented = [Polarity::Positive, Polarity::Negative]
        .into_iter()
        .flat_map(|side| {
            profile
                .side(side)
                .iter()
                .filter(|(_, m)| m.is_augmented())
                .map(move |(k, _)| (k.clone(), side))
        })
        .collect();

    Ok(DisambiguationModel {
        concept: profile.ambiguous_concept.clone(),
        prior_pos,
        prior_neg,
        cond_pos: conditionals(Polarity::Positive, total_pos),
        cond_neg: conditionals(Polarity::Negative, total_neg),
        total_pos,
        total_neg,
        vocab_size,
        alpha,
        static_polarity,
        augmented,
    })
}

impl DisambiguationModel {
    /// Smoothed probability of a clue never seen on a side.
    pub fn floor(&self, side: Polarity) -> f64 {
        let total = match side {
            Polarity::Positive => self.total_pos,
            Polarity::Negative => self.total_neg,
        };
        self.alpha / (total + self.alpha * self.vocab_size as f64)
    }

    pub fn knows(&self, clue: &str) -> bool {
        self.cond_pos.contains_key(clue)
    }

    /// Distinct known clues other than the concept itself, sorted.
    pub fn usable_clues<'a>(&self, clues: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
        let set: BTreeSet<&str> = clues
            .into_iter()
            .filter(|c| *c != self.concept && self.knows(c))
            .collect();
        set.into_iter().collect()
    }

    pub fn classify<'a>(&self, clues: impl IntoIterator<Item = &'a str>) -> Decision {
        let used = self.usable_clues(clues);
        let mut log_pos = self.prior_pos.ln();
        let mut log_neg = self.prior_neg.ln();
        for c in &used {
            log_pos += self.cond_pos[*c].ln();
            log_neg += self.cond_neg[*c].ln();
        }
        let margin = log_pos - log_neg;
        let polarity = if margin > 0.0 {
            Polarity::Positive
        } else if margin < 0.0 {
            Polarity::Negative
        } else {
            self.static_polarity
                .and_then(Polarity::from_sign)
                .unwrap_or(Polarity::Positive)
        };
        Decision {
            polarity,
            margin,
            clues_used: used.len(),
        }
    }

    /// Augmented members assigned to the given side.
    pub fn augmented_on(&self, side: Polarity) -> impl Iterator<Item = &str> {
        self.augmented
            .iter()
            .filter(move |(_, s)| **s == side)
            .map(|(k, _)| k.as_str())
    }
}

/// Per-concept models, keyed by ambiguous concept.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelSet {
    pub models: BTreeMap<String, DisambiguationModel>,
}

impl ModelSet {
    pub fn get(&self, concept: &str) -> Option<&DisambiguationModel> {
        self.models.get(concept)
    }

    pub fn insert(&mut self, model: DisambiguationModel) {
        self.models.insert(model.concept.clone(), model);
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn concepts(&self) -> impl Iterator<Item = &String> {
        self.models.keys()
    }
}
