//! Corpus loading and text preprocessing.
//!
//! A corpus is a JSON Lines file with one labeled sentence per line. Each
//! record is normalized (lowercasing, punctuation separation, squeezing of
//! letter runs, abbreviation expansion), tokenized, lemmatized and checked
//! for negation markers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, Error, Result};
use crate::wordlists;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
    Neutral,
}

impl Label {
    pub fn default_score(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
            Label::Neutral => 0.0,
        }
    }

    pub fn is_polar(self) -> bool {
        self != Label::Neutral
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
            Label::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" => Ok(Label::Positive),
            "negative" => Ok(Label::Negative),
            "neutral" => Ok(Label::Neutral),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// One labeled review sentence after preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: String,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub lemmas: Vec<String>,
    pub label: Label,
    /// Signed sentence score; its sign always agrees with `label`.
    pub score: f64,
    pub has_negation: bool,
}

impl Sentence {
    pub fn to_record(&self) -> CorpusRecord {
        CorpusRecord {
            id: self.id.clone(),
            text: self.raw_text.clone(),
            label: self.label.as_str().to_string(),
            score: Some(self.score),
        }
    }
}

/// The on-disk corpus record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// Rule-based lemmatizer: an irregular-form table plus suffix rules, applied
/// until the form stops changing.
#[derive(Debug, Clone)]
pub struct Lemmatizer {
    irregular: HashMap<String, String>,
}

impl Default for Lemmatizer {
    fn default() -> Self {
        Lemmatizer {
            irregular: wordlists::irregular_lemmas().clone(),
        }
    }
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &str) -> bool {
    s.bytes().any(|b| is_vowel(b) || b == b'y')
}

/// Consonant-vowel-consonant ending with a single vowel group, e.g. "mak", "hop", "lov".
fn short_cvc(stem: &str) -> bool {
    let b = stem.as_bytes();
    if b.len() < 2 || b.len() > 4 {
        return false;
    }
    let n = b.len();
    let last = b[n - 1];
    if is_vowel(last) || matches!(last, b'w' | b'x' | b'y') || !is_vowel(b[n - 2]) {
        return false;
    }
    let vowel_groups = b
        .iter()
        .enumerate()
        .filter(|&(i, &c)| is_vowel(c) && (i == 0 || !is_vowel(b[i - 1])))
        .count();
    vowel_groups == 1 && (n == 2 || !is_vowel(b[n - 3]))
}

/// Repairs a stem left by stripping "-ing" or "-ed".
fn repair_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_string();
    }
    let needs_e = ["v", "c", "z", "rg", "dg", "uir"].iter().any(|s| stem.ends_with(s)) || short_cvc(stem);
    if needs_e {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

impl Lemmatizer {
    pub fn with_irregular(irregular: HashMap<String, String>) -> Self {
        Lemmatizer { irregular }
    }

    pub fn lemmatize(&self, token: &str) -> String {
        let mut current = token.to_string();
        // every rule either shortens the form or maps to a table value
        for _ in 0..16 {
            let next = self.step(&current);
            if next == current {
                break;
            }
            current = next;
        }
        current
    }

    fn step(&self, w: &str) -> String {
        if let Some(lemma) = self.irregular.get(w) {
            return lemma.clone();
        }
        if !w.bytes().all(|b| b.is_ascii_lowercase()) {
            return w.to_string();
        }
        let n = w.len();
        if let Some(stem) = w.strip_suffix("ies") {
            if stem.len() >= 2 {
                return format!("{stem}y");
            }
        }
        if let Some(stem) = w.strip_suffix("ied") {
            if stem.len() >= 2 {
                return format!("{stem}y");
            }
        }
        if w.ends_with("sses") {
            return w[..n - 2].to_string();
        }
        if let Some(stem) = w.strip_suffix("es") {
            if stem.len() >= 3 && ["s", "x", "z", "ch", "sh"].iter().any(|s| stem.ends_with(s)) {
                return stem.to_string();
            }
        }
        if w.ends_with('s') && !["ss", "us", "is"].iter().any(|s| w.ends_with(s)) && n > 3 {
            return w[..n - 1].to_string();
        }
        if let Some(stem) = w.strip_suffix("ing") {
            if stem.len() >= 2 && has_vowel(stem) {
                return repair_stem(stem);
            }
        }
        if let Some(stem) = w.strip_suffix("ed") {
            if stem.len() >= 2 && has_vowel(stem) && !stem.ends_with('e') {
                return repair_stem(stem);
            }
        }
        w.to_string()
    }
}

/// Fixed list of negation markers plus the "n't" clitic rule.
#[derive(Debug, Clone)]
pub struct NegationMarkers {
    markers: HashSet<String>,
}

impl Default for NegationMarkers {
    fn default() -> Self {
        NegationMarkers {
            markers: wordlists::negations().clone(),
        }
    }
}

impl NegationMarkers {
    pub fn from_list(text: &str) -> Self {
        NegationMarkers {
            markers: wordlists::parse_word_list(text),
        }
    }

    pub fn is_marker(&self, token: &str) -> bool {
        self.markers.contains(token) || token.ends_with("n't")
    }

    pub fn detect(&self, tokens: &[String]) -> bool {
        tokens.iter().any(|t| self.is_marker(t))
    }
}

/// Detects negation with the bundled marker list.
pub fn detect_negation(tokens: &[String]) -> bool {
    NegationMarkers::default().detect(tokens)
}

/// Lemmatizes with the bundled irregular table.
pub fn lemmatize(token: &str) -> String {
    Lemmatizer::default().lemmatize(token)
}

/// Turns raw sentence text into normalized tokens, lemmas and a negation flag.
#[derive(Debug, Clone, Default)]
pub struct Preprocessor {
    abbreviations: HashMap<String, String>,
    lemmatizer: Lemmatizer,
    negations: NegationMarkers,
}

const EDGE_PUNCT: &[char] = &['.', ',', '!', '?', ';', ':', '"', '\'', '(', ')', '[', ']', '{', '}'];

impl Preprocessor {
    pub fn new() -> Self {
        Preprocessor {
            abbreviations: wordlists::abbreviations().clone(),
            lemmatizer: Lemmatizer::default(),
            negations: NegationMarkers::default(),
        }
    }

    pub fn with_abbreviations(mut self, table: HashMap<String, String>) -> Self {
        self.abbreviations = table;
        self
    }

    pub fn with_negations(mut self, negations: NegationMarkers) -> Self {
        self.negations = negations;
        self
    }

    pub fn lemmatizer(&self) -> &Lemmatizer {
        &self.lemmatizer
    }

    pub fn negations(&self) -> &NegationMarkers {
        &self.negations
    }

    /// Lowercases and expands abbreviations word by word.
    pub fn normalize_text(&self, text: &str) -> String {
        let lowered: String = text
            .chars()
            .map(|c| match c {
                '\u{2019}' | '\u{2018}' | '`' => '\'',
                _ => c,
            })
            .flat_map(char::to_lowercase)
            .collect();
        lowered
            .split_whitespace()
            .map(|chunk| {
                let core = chunk.trim_matches(EDGE_PUNCT);
                match self.abbreviations.get(core) {
                    Some(replacement) if !core.is_empty() => {
                        let start = chunk.find(core).unwrap_or(0);
                        format!("{}{}{}", &chunk[..start], replacement, &chunk[start + core.len()..])
                    }
                    _ => chunk.to_string(),
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        tokenize_normalized(&self.normalize_text(text))
    }

    pub fn process(&self, id: &str, text: &str, label: Label, score: Option<f64>) -> Result<Sentence> {
        let score = match score {
            None => label.default_score(),
            Some(s) => {
                if !(-1.0..=1.0).contains(&s) {
                    return Err(Error::InvalidInput(format!("score {s} of sentence {id} outside [-1, 1]")));
                }
                let consistent = match label {
                    Label::Positive => s > 0.0,
                    Label::Negative => s < 0.0,
                    Label::Neutral => s == 0.0,
                };
                if !consistent {
                    return Err(Error::InvalidInput(format!(
                        "score {s} of sentence {id} disagrees with label {label}"
                    )));
                }
                s
            }
        };
        let tokens = self.tokenize(text);
        let lemmas = tokens.iter().map(|t| self.lemmatizer.lemmatize(t)).collect();
        let has_negation = self.negations.detect(&tokens);
        Ok(Sentence {
            id: id.to_string(),
            raw_text: text.to_string(),
            tokens,
            lemmas,
            label,
            score,
            has_negation,
        })
    }

    pub fn process_record(&self, record: &CorpusRecord) -> Result<Sentence> {
        let label: Label = record.label.parse()?;
        self.process(&record.id, &record.text, label, record.score)
    }

    /// Parses JSONL corpus text. `source_name` is used in error messages.
    pub fn parse_corpus(&self, text: &str, source_name: &str) -> Result<Vec<Sentence>> {
        let mut out = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let record: CorpusRecord = serde_json::from_str(line)
                .map_err(|e| Error::schema(source_name, line_no, format!("malformed corpus record: {e}")))?;
            let sentence = self.process_record(&record).map_err(|e| match e {
                Error::UnknownLabel(_) => e,
                other => Error::schema(source_name, line_no, other.to_string()),
            })?;
            out.push(sentence);
        }
        Ok(out)
    }

    pub fn load_corpus(&self, path: &Path) -> Result<Vec<Sentence>> {
        let text = read_to_string(path)?;
        self.parse_corpus(&text, &path.display().to_string())
    }
}

/// Splits normalized text into word tokens. Apostrophes survive only between
/// alphanumerics; all other punctuation separates tokens and is dropped.
fn tokenize_normalized(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let inner_apostrophe =
            c == '\'' && !current.is_empty() && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || inner_apostrophe {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(squeeze_repeats(&current));
            current.clear();
        }
    }
    if !current.is_empty() {
        tokens.push(squeeze_repeats(&current));
    }
    tokens
}

/// Reduces runs of three or more identical letters to two.
pub fn squeeze_repeats(word: &str) -> String {
    let mut out = String::with_capacity(word.len());
    let mut prev: Option<char> = None;
    let mut run = 0;
    for c in word.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= 2 || !c.is_alphabetic() {
            out.push(c);
        }
    }
    out
}

pub fn load_corpus(path: &Path) -> Result<Vec<Sentence>> {
    Preprocessor::new().load_corpus(path)
}

/// Loads either a raw corpus (`id`, `text`, `label`, optional `score`) or
/// the preprocessed sentences written by the preprocess stage, deciding on
/// the first record.
pub fn load_sentences(path: &Path) -> Result<Vec<Sentence>> {
    let text = read_to_string(path)?;
    let preprocessed = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| serde_json::from_str::<Sentence>(l).is_ok());
    if preprocessed {
        read_jsonl(path)
    } else {
        Preprocessor::new().parse_corpus(&text, &path.display().to_string())
    }
}

/// Writes sentences as JSON Lines in the given order.
pub fn write_jsonl<T: Serialize, W: Write>(items: &[T], mut out: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Reads JSON Lines of any deserializable type, reporting the failing line.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line)
            .map_err(|e| Error::schema(path.display().to_string(), idx + 1, e.to_string()))?;
        out.push(item);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn worked_example_record_loads_as_negative() {
        let p = Preprocessor::new();
        let text = r#"{"id":"1","text":"Save your money and go for a better device.","label":"negative"}"#;
        let s = &p.parse_corpus(text, "mem").unwrap()[0];
        assert_eq!(s.label, Label::Negative);
        assert_eq!(s.score, -1.0);
        assert_eq!(
            s.tokens,
            toks(&["save", "your", "money", "and", "go", "for", "a", "better", "device"])
        );
        assert_eq!(s.lemmas[8], "device");
        assert!(!s.has_negation);
    }

    #[test]
    fn empty_text_is_kept() {
        let p = Preprocessor::new();
        let s = &p.parse_corpus(r#"{"id":"2","text":"","label":"positive"}"#, "mem").unwrap()[0];
        assert!(s.tokens.is_empty());
        assert_eq!(s.score, 1.0);
    }

    #[test]
    fn letter_runs_are_squeezed() {
        let p = Preprocessor::new();
        let s = &p.parse_corpus(r#"{"id":"3","text":"soooo good","label":"positive"}"#, "mem").unwrap()[0];
        assert_eq!(s.tokens, toks(&["soo", "good"]));
        assert_eq!(squeeze_repeats("1000"), "1000");
    }

    #[test]
    fn malformed_line_names_line_number() {
        let p = Preprocessor::new();
        let text = "{\"id\":\"1\",\"text\":\"ok\",\"label\":\"positive\"}\n{not json}\n";
        match p.parse_corpus(text, "c.jsonl") {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_label_names_value() {
        let p = Preprocessor::new();
        let err = p
            .parse_corpus(r#"{"id":"1","text":"ok","label":"mixed"}"#, "mem")
            .unwrap_err();
        assert!(matches!(err, Error::UnknownLabel(ref v) if v == "mixed"), "{err}");
    }

    #[test]
    fn score_must_agree_with_label() {
        let p = Preprocessor::new();
        assert!(p.process("x", "fine", Label::Positive, Some(-0.5)).is_err());
        assert!(p.process("x", "fine", Label::Positive, Some(1.5)).is_err());
        assert_eq!(p.process("x", "fine", Label::Positive, Some(0.4)).unwrap().score, 0.4);
    }

    #[test]
    fn punctuation_and_abbreviations() {
        let p = Preprocessor::new();
        assert_eq!(
            p.tokenize("It was worth the few ($100) extra dollars!"),
            toks(&["it", "was", "worth", "the", "few", "100", "extra", "dollars"])
        );
        assert_eq!(p.tokenize("I dont like it, thx."), toks(&["i", "don't", "like", "it", "thanks"]));
        assert_eq!(p.tokenize("Works w/o issues"), toks(&["works", "without", "issues"]));
        assert_eq!(p.tokenize("It\u{2019}s 'fine'"), toks(&["it's", "fine"]));
    }

    #[test]
    fn lemmatizer_examples() {
        assert_eq!(lemmatize("devices"), "device");
        assert_eq!(lemmatize("bought"), "buy");
        assert_eq!(lemmatize("running"), "run");
        assert_eq!(lemmatize("batteries"), "battery");
        assert_eq!(lemmatize("boxes"), "box");
        assert_eq!(lemmatize("disappointed"), "disappoint");
        assert_eq!(lemmatize("expected"), "expect");
        assert_eq!(lemmatize("dollars"), "dollar");
        assert_eq!(lemmatize("loved"), "love");
        assert_eq!(lemmatize("making"), "make");
        assert_eq!(lemmatize("stopped"), "stop");
        assert_eq!(lemmatize("charging"), "charge");
        assert_eq!(lemmatize("opened"), "open");
        assert_eq!(lemmatize("glass"), "glass");
        assert_eq!(lemmatize("this"), "this");
        assert_eq!(lemmatize("thing"), "thing");
        assert_eq!(lemmatize("100"), "100");
        assert_eq!(lemmatize("doesn't"), "doesn't");
    }

    #[test]
    fn irregular_lemmas_are_fixed_points() {
        let lem = Lemmatizer::default();
        for lemma in wordlists::irregular_lemmas().values() {
            assert_eq!(&lem.lemmatize(lemma), lemma);
        }
    }

    #[test]
    fn negation_examples() {
        assert!(detect_negation(&toks(&["this", "is", "not", "good"])));
        assert!(!detect_negation(&toks(&["great", "battery"])));
        assert!(detect_negation(&toks(&["doesn't", "work"])));
        assert!(!detect_negation(&[]));
    }

    #[test]
    fn record_round_trip() {
        let p = Preprocessor::new();
        let s = p.process("7", "Soooo many apps, can't complain.", Label::Positive, None).unwrap();
        let line = serde_json::to_string(&s.to_record()).unwrap();
        let back = &p.parse_corpus(&line, "mem").unwrap()[0];
        assert_eq!(&s, back);
    }
}
