//! Word lists shipped with the crate: negation markers, function words,
//! prepositions, abbreviation expansions and irregular lemmas.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

const NEGATIONS: &str = include_str!("../data/negations.txt");
const STOPWORDS: &str = include_str!("../data/stopwords.txt");
const PREPOSITIONS: &str = include_str!("../data/prepositions.txt");
const ABBREVIATIONS: &str = include_str!("../data/abbreviations.tsv");
const IRREGULAR_LEMMAS: &str = include_str!("../data/irregular_lemmas.tsv");

/// Non-empty, non-comment lines of a bundled or user-supplied list.
pub fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_word_list(text: &str) -> HashSet<String> {
    data_lines(text).map(str::to_lowercase).collect()
}

/// Parses `key<TAB>value` lines. Lines without a tab are skipped.
pub fn parse_pair_table(text: &str) -> HashMap<String, String> {
    data_lines(text)
        .filter_map(|l| l.split_once('\t'))
        .map(|(k, v)| (k.trim().to_lowercase(), v.trim().to_lowercase()))
        .collect()
}

pub fn negations() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| parse_word_list(NEGATIONS))
}

pub fn stopwords() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| parse_word_list(STOPWORDS))
}

pub fn prepositions() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| parse_word_list(PREPOSITIONS))
}

pub fn abbreviations() -> &'static HashMap<String, String> {
    static MAP: OnceLock<HashMap<String, String>> = OnceLock::new();
    MAP.get_or_init(|| parse_pair_table(ABBREVIATIONS))
}

pub fn irregular_lemmas() -> &'static HashMap<String, String> {
    static MAP: OnceLock<HashMap<String, String>> = OnceLock::new();
    MAP.get_or_init(|| parse_pair_table(IRREGULAR_LEMMAS))
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

pub fn is_preposition(token: &str) -> bool {
    prepositions().contains(token)
}
