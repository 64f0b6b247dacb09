//! Vocabulary-driven concept chunker.
//!
//! A sentence is decomposed into a bag of single- and multi-word concepts in
//! three passes over its lemmas:
//!
//! 1. at every start index, the longest contiguous n-gram (n <= 4) that is in
//!    the vocabulary, probing the full window, a variant that keeps only
//!    prepositions among the function words, and a fully elided variant;
//! 2. pairs of content words separated by at most two function words (tokens
//!    that belong to a phrase headed by the right-hand word may also sit in
//!    between), probed with and without the intervening function words;
//! 3. every content word not covered by a multi-word concept, plus every
//!    content word that is itself a vocabulary entry, as a unigram.
//!
//! Each n-gram is probed in lemma form first and then in surface form.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{NegationMarkers, Sentence};
use crate::error::{Error, Result};
use crate::wordlists;

pub const MAX_CONCEPT_WORDS: usize = 4;
const MAX_GAP_FUNCTION_WORDS: usize = 2;

/// Normalizes a surface form or ConceptNet URI into a concept key.
pub fn normalize_key(surface: &str) -> String {
    let lowered = surface.trim().to_lowercase();
    let body = match lowered.strip_prefix("/c/en/") {
        // "/c/en/phone/n" carries a part-of-speech suffix
        Some(rest) => rest.split('/').next().unwrap_or(""),
        None => lowered.as_str(),
    };
    let mut out = String::with_capacity(body.len());
    for c in body.chars() {
        let c = if c.is_whitespace() || c == '-' { '_' } else { c };
        if c == '_' && (out.is_empty() || out.ends_with('_')) {
            continue;
        }
        out.push(c);
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

fn is_segment(word: &str) -> bool {
    !word.is_empty() && word.chars().all(|c| c.is_alphanumeric() && !c.is_uppercase())
}

/// True for keys made of 1 to 4 lowercase alphanumeric segments joined by single underscores.
pub fn is_valid_concept_key(key: &str) -> bool {
    let segments: Vec<&str> = key.split('_').collect();
    (1..=MAX_CONCEPT_WORDS).contains(&segments.len()) && segments.iter().all(|s| is_segment(s))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Concept {
    pub key: String,
    /// Half-open token range `[start, end)` in the source sentence; `None` for
    /// concepts that did not come from the text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(usize, usize)>,
}

impl Concept {
    pub fn new(key: impl Into<String>, start: usize, end: usize) -> Self {
        Concept {
            key: key.into(),
            span: Some((start, end)),
        }
    }

    pub fn word_count(&self) -> usize {
        self.key.split('_').count()
    }

    pub fn is_multiword(&self) -> bool {
        self.key.contains('_')
    }
}

/// Set of known concept keys, exact match on normalized keys.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptVocabulary {
    entries: BTreeSet<String>,
}

impl ConceptVocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a key after normalization; returns false if it is not a valid concept key.
    pub fn insert(&mut self, surface: &str) -> bool {
        let key = normalize_key(surface);
        if is_valid_concept_key(&key) {
            self.entries.insert(key);
            true
        } else {
            false
        }
    }

    pub fn extend<I, S>(&mut self, keys: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for k in keys {
            self.insert(k.as_ref());
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_len(&self) -> usize {
        MAX_CONCEPT_WORDS
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.entries.iter()
    }
}

impl<S: AsRef<str>> FromIterator<S> for ConceptVocabulary {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut v = ConceptVocabulary::new();
        v.extend(iter);
        v
    }
}

/// A multi-word match with the token indices whose words make up the key.
#[derive(Debug, Clone)]
struct PhraseMatch {
    key: String,
    start: usize,
    end: usize,
    members: Vec<usize>,
}

/// Chunker configuration: which tokens count as function words.
#[derive(Debug, Clone, Default)]
pub struct ConceptExtractor {
    negations: NegationMarkers,
}

impl ConceptExtractor {
    pub fn new(negations: NegationMarkers) -> Self {
        ConceptExtractor { negations }
    }

    /// Content words are valid key segments that are neither function words
    /// nor negation markers.
    pub fn is_content(&self, token: &str, lemma: &str) -> bool {
        is_segment(lemma)
            && !wordlists::is_stopword(lemma)
            && !wordlists::is_stopword(token)
            && !self.negations.is_marker(token)
    }

    pub fn extract(&self, sentence: &Sentence, vocab: &ConceptVocabulary) -> Vec<Concept> {
        self.extract_tokens(&sentence.tokens, &sentence.lemmas, vocab)
    }

    pub fn extract_tokens(&self, tokens: &[String], lemmas: &[String], vocab: &ConceptVocabulary) -> Vec<Concept> {
        let n = tokens.len().min(lemmas.len());
        if n == 0 {
            return Vec::new();
        }
        let content: Vec<bool> = (0..n).map(|i| self.is_content(&tokens[i], &lemmas[i])).collect();
        let segment: Vec<bool> = (0..n).map(|i| is_segment(&lemmas[i])).collect();
        let probe = |indices: &[usize]| -> Option<String> {
            if indices.len() < 2 || indices.len() > MAX_CONCEPT_WORDS || !indices.iter().all(|&i| segment[i]) {
                return None;
            }
            let lemma_key = join(indices.iter().map(|&i| lemmas[i].as_str()));
            if vocab.contains(&lemma_key) {
                return Some(lemma_key);
            }
            if indices.iter().all(|&i| is_segment(&tokens[i])) {
                let surface_key = join(indices.iter().map(|&i| tokens[i].as_str()));
                if vocab.contains(&surface_key) {
                    return Some(surface_key);
                }
            }
            None
        };

        // pass 1: longest contiguous match per start index
        let mut phrases: Vec<PhraseMatch> = Vec::new();
        for start in 0..n {
            for len in (2..=MAX_CONCEPT_WORDS).rev() {
                let end = start + len;
                if end > n {
                    continue;
                }
                let found = window_variants(start, end, lemmas)
                    .into_iter()
                    .find_map(|members| probe(&members).map(|key| (key, members)));
                if let Some((key, members)) = found {
                    phrases.push(PhraseMatch { key, start, end, members });
                    break;
                }
            }
        }
        let pass_one = phrases.len();
        let in_phrase: HashSet<usize> = phrases.iter().flat_map(|p| p.members.iter().copied()).collect();

        // pass 2: content-word pairs across short gaps
        for i in 0..n {
            if !content[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !content[j] {
                    continue;
                }
                if in_phrase.contains(&i) && in_phrase.contains(&j) {
                    continue;
                }
                let Some(gap) = classify_gap(i, j, &content, lemmas, &phrases[..pass_one]) else {
                    continue;
                };
                let found = pair_variants(i, j, &gap, lemmas)
                    .into_iter()
                    .find_map(|members| probe(&members).map(|key| (key, members)));
                if let Some((key, members)) = found {
                    phrases.push(PhraseMatch {
                        key,
                        start: i,
                        end: j + 1,
                        members,
                    });
                }
            }
        }

        let covered: HashSet<usize> = phrases.iter().flat_map(|p| p.members.iter().copied()).collect();
        let mut out: Vec<Concept> = phrases.into_iter().map(|p| Concept::new(p.key, p.start, p.end)).collect();

        // pass 3: unigrams
        for i in 0..n {
            if !content[i] {
                continue;
            }
            if vocab.contains(&lemmas[i]) {
                out.push(Concept::new(lemmas[i].clone(), i, i + 1));
            } else if is_segment(&tokens[i]) && vocab.contains(&tokens[i]) {
                out.push(Concept::new(tokens[i].clone(), i, i + 1));
            } else if !covered.contains(&i) {
                out.push(Concept::new(lemmas[i].clone(), i, i + 1));
            }
        }

        order_and_dedup(out)
    }
}

fn join<'a>(words: impl Iterator<Item = &'a str>) -> String {
    words.collect::<Vec<_>>().join("_")
}

/// Full window, prepositions-only and fully elided member lists, in probe
/// order. Elision is interior only: a variant must keep both window ends.
fn window_variants(start: usize, end: usize, lemmas: &[String]) -> Vec<Vec<usize>> {
    let full: Vec<usize> = (start..end).collect();
    let keep_preps: Vec<usize> = full
        .iter()
        .copied()
        .filter(|&i| !wordlists::is_stopword(&lemmas[i]) || wordlists::is_preposition(&lemmas[i]))
        .collect();
    let elided: Vec<usize> = full.iter().copied().filter(|&i| !wordlists::is_stopword(&lemmas[i])).collect();
    let keeps_ends = |v: &Vec<usize>| v.first() == Some(&start) && v.last() == Some(&(end - 1));
    dedup_variants(vec![full, keep_preps, elided].into_iter().filter(keeps_ends).collect())
}

struct Gap {
    function_words: Vec<usize>,
}

/// Accepts a gap of at most two function words, plus tokens of a pass-one
/// phrase whose head (last member) is `j`.
fn classify_gap(i: usize, j: usize, content: &[bool], lemmas: &[String], phrases: &[PhraseMatch]) -> Option<Gap> {
    let mut function_words = Vec::new();
    for k in (i + 1)..j {
        if !content[k] && wordlists::is_stopword(&lemmas[k]) {
            function_words.push(k);
        } else if phrase_owner(k, phrases).is_some_and(|p| p.members.last() == Some(&j)) {
            continue;
        } else {
            return None;
        }
    }
    (function_words.len() <= MAX_GAP_FUNCTION_WORDS).then_some(Gap { function_words })
}

/// The phrase owning a token: longest span first, then leftmost.
fn phrase_owner(k: usize, phrases: &[PhraseMatch]) -> Option<&PhraseMatch> {
    phrases
        .iter()
        .filter(|p| p.members.contains(&k))
        .min_by_key(|p| (std::cmp::Reverse(p.end - p.start), p.start))
}

fn pair_variants(i: usize, j: usize, gap: &Gap, lemmas: &[String]) -> Vec<Vec<usize>> {
    let with_all: Vec<usize> = std::iter::once(i)
        .chain(gap.function_words.iter().copied())
        .chain(std::iter::once(j))
        .collect();
    let with_preps: Vec<usize> = std::iter::once(i)
        .chain(gap.function_words.iter().copied().filter(|&k| wordlists::is_preposition(&lemmas[k])))
        .chain(std::iter::once(j))
        .collect();
    dedup_variants(vec![with_all, with_preps, vec![i, j]])
}

fn dedup_variants(variants: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in variants {
        if v.len() >= 2 && !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Sorts by start index, longer span first, then key; drops exact duplicates
/// (same key and span).
fn order_and_dedup(mut concepts: Vec<Concept>) -> Vec<Concept> {
    concepts.sort_by(|a, b| {
        let (sa, ea) = a.span.unwrap_or((0, 0));
        let (sb, eb) = b.span.unwrap_or((0, 0));
        sa.cmp(&sb)
            .then((eb - sb).cmp(&(ea - sa)))
            .then_with(|| a.key.cmp(&b.key))
    });
    concepts.dedup();
    concepts
}

/// Extracts concepts with the default function-word and negation lists.
pub fn extract_concepts(sentence: &Sentence, vocab: &ConceptVocabulary) -> Vec<Concept> {
    ConceptExtractor::default().extract(sentence, vocab)
}

/// A sentence together with its bag of concepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub sentence: Sentence,
    pub concepts: Vec<Concept>,
}

impl AnnotatedSentence {
    pub fn new(sentence: Sentence, concepts: Vec<Concept>) -> Self {
        AnnotatedSentence { sentence, concepts }
    }

    pub fn annotate(sentence: Sentence, extractor: &ConceptExtractor, vocab: &ConceptVocabulary) -> Self {
        let concepts = extractor.extract(&sentence, vocab);
        AnnotatedSentence { sentence, concepts }
    }

    /// Distinct concept keys in the bag.
    pub fn concept_set(&self) -> BTreeSet<&str> {
        self.concepts.iter().map(|c| c.key.as_str()).collect()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.concepts.iter().any(|c| c.key == key)
    }
}

/// One line of the `extract` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptRecord {
    pub sentence_id: String,
    pub concepts: Vec<Concept>,
}

/// Pairs sentences with their extracted concepts by sentence id. Every
/// sentence needs a record; records for unknown ids are ignored.
pub fn join_concepts(sentences: Vec<Sentence>, records: Vec<ConceptRecord>) -> Result<Vec<AnnotatedSentence>> {
    let mut by_id: std::collections::HashMap<String, Vec<Concept>> =
        records.into_iter().map(|r| (r.sentence_id, r.concepts)).collect();
    sentences
        .into_iter()
        .map(|s| {
            let concepts = by_id
                .remove(&s.id)
                .ok_or_else(|| Error::InvalidInput(format!("no concept record for sentence {}", s.id)))?;
            Ok(AnnotatedSentence::new(s, concepts))
        })
        .collect()
}
