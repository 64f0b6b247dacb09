//! Classification metrics, stratified k-fold splitting and the
//! cross-validation harness comparing the three feature schemes.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::FeatureMode;
use crate::concepts::AnnotatedSentence;
use crate::error::{Error, Result};
use crate::pipeline::{PipelineParams, Resources, TrainedPipeline};
use crate::polarity::Polarity;

pub const DEFAULT_FOLDS: usize = 5;

/// Caveat printed at the top of every report.
pub const REPORT_NOTE: &str = "Scores depend on the exact corpus, sentiment lexicon, knowledge graph \
and embedding releases supplied; figures obtained with other resources are not comparable.";

/// Binary confusion counts; "positive" is the positive sentiment class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, tn, fp, fn_ }
    }

    pub fn record(&mut self, gold: Polarity, predicted: Polarity) {
        match (gold, predicted) {
            (Polarity::Positive, Polarity::Positive) => self.tp += 1,
            (Polarity::Negative, Polarity::Negative) => self.tn += 1,
            (Polarity::Negative, Polarity::Positive) => self.fp += 1,
            (Polarity::Positive, Polarity::Negative) => self.fn_ += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Polarity, Polarity)>) -> Self {
        let mut c = ConfusionCounts::default();
        for (gold, predicted) in pairs {
            c.record(gold, predicted);
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Metric values as fractions in [0, 1]. An undefined precision or recall
/// (zero denominator) is reported as 0 with its flag cleared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub precision_defined: bool,
    pub recall_defined: bool,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * recall * precision / (recall + precision)
    } else {
        0.0
    }
}

pub fn metrics(c: &ConfusionCounts) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::InvalidInput("no evaluated sentences (all confusion counts are zero)".into()));
    }
    let ratio = |num: u64, den: u64| if den > 0 { (num as f64 / den as f64, true) } else { (0.0, false) };
    let (precision, precision_defined) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_defined) = ratio(c.tp, c.tp + c.fn_);
    Ok(Metrics {
        precision,
        recall,
        f1: f1_score(precision, recall),
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        precision_defined,
        recall_defined,
    })
}

/// Fraction to a percentage rounded to two decimals.
pub fn percent(fraction: f64) -> f64 {
    (fraction * 10_000.0).round() / 100.0
}

/// Splits item indices into `k` folds, stratified by label.
///
/// Each class is shuffled with a ChaCha8 stream seeded by `seed`, then dealt
/// round-robin; the dealing position carries over from one class to the next
/// so fold sizes differ by at most one. Every fold's index list is sorted.
pub fn stratified_folds(labels: &[Polarity], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for class in [Polarity::Positive, Polarity::Negative] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::InvalidInput(format!(
                "{} {} sentences; at least {k} needed for {k}-fold cross-validation",
                members.len(),
                class
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Ambiguous concepts detected on this fold's training part.
    pub ambiguous: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub mode: FeatureMode,
    pub description: String,
    /// Means over folds, as percentages.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub folds: Vec<FoldResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub note: String,
    pub folds: usize,
    pub seed: u64,
    pub sentences: usize,
    pub results: Vec<ConfigResult>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Aligned text table, one row per configuration.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {REPORT_NOTE}");
        let _ = writeln!(
            out,
            "# {}-fold stratified cross-validation, seed {}, {} sentences",
            self.folds, self.seed, self.sentences
        );
        let width = self
            .results
            .iter()
            .map(|r| r.description.len())
            .chain(["Feature".len()])
            .max()
            .unwrap_or(0);
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}",
            "Feature", "Precision", "Recall", "F-measure", "Accuracy"
        );
        for r in &self.results {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.2}  {:>9.2}  {:>9.2}  {:>9.2}",
                r.description, r.precision, r.recall, r.f1, r.accuracy
            );
        }
        out
    }
}

/// Polar sentences only; neutral ones take no part in two-class evaluation.
pub fn polar_sentences(sentences: &[AnnotatedSentence]) -> Vec<&AnnotatedSentence> {
    sentences
        .iter()
        .filter(|s| s.sentence.label.is_polar())
        .collect()
}

/// k-fold cross-validation of every requested feature scheme on shared folds.
/// Each fold re-runs the whole training pipeline on its training part only.
pub fn cross_validate(
    sentences: &[AnnotatedSentence],
    resources: &Resources,
    params: &PipelineParams,
    modes: &[FeatureMode],
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    if modes.is_empty() {
        return Err(Error::Config("no feature configurations requested".into()));
    }
    let polar: Vec<&AnnotatedSentence> = polar_sentences(sentences);
    let labels: Vec<Polarity> = polar
        .iter()
        .filter_map(|s| Polarity::from_label(s.sentence.label))
        .collect();
    let folds = stratified_folds(&labels, k, seed)?;

    let mut results = Vec::with_capacity(modes.len());
    for &mode in modes {
        let mut fold_results = Vec::with_capacity(k);
        for (f, test_idx) in folds.iter().enumerate() {
            let mut in_test = vec![false; polar.len()];
            for &i in test_idx {
                in_test[i] = true;
            }
            let train: Vec<AnnotatedSentence> = polar
                .iter()
                .zip(&in_test)
                .filter(|(_, t)| !**t)
                .map(|(s, _)| (*s).clone())
                .collect();
            let model = TrainedPipeline::fit(&train, resources, params, mode)?;
            let counts =
                ConfusionCounts::from_pairs(test_idx.iter().map(|&i| (labels[i], model.predict_sentence(polar[i]))));
            let m = metrics(&counts)?;
            log::debug!("{mode} fold {f}: {counts:?}");
            fold_results.push((m, FoldResult {
                fold: f,
                train_size: train.len(),
                test_size: test_idx.len(),
                counts,
                precision: percent(m.precision),
                recall: percent(m.recall),
                f1: percent(m.f1),
                accuracy: percent(m.accuracy),
                ambiguous: model.ambiguous.clone(),
            }));
        }
        let mean = |get: fn(&Metrics) -> f64| {
            percent(fold_results.iter().map(|(m, _)| get(m)).sum::<f64>() / fold_results.len() as f64)
        };
        results.push(ConfigResult {
            mode,
            description: mode.description().to_string(),
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
            accuracy: mean(|m| m.accuracy),
            folds: fold_results.into_iter().map(|(_, r)| r).collect(),
        });
    }
    Ok(EvalReport {
        note: REPORT_NOTE.to_string(),
        folds: k,
        seed,
        sentences: polar.len(),
        results,
    })
}
