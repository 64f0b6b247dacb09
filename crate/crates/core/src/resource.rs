//! Sentiment concept resource built from a flat lexicon file.
//!
//! Lexicon rows are `concept<TAB>polarity[<TAB>equiv1|equiv2|...]`. Every
//! listed equivalent becomes an entry of its own carrying the parent's
//! polarity, unless the file also has a row for it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::concepts::{is_valid_concept_key, normalize_key};
use crate::error::{read_to_string, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentEntry {
    pub concept: String,
    /// Signed intensity in `[-1, 1]`, never zero.
    pub polarity_value: f64,
    #[serde(default)]
    pub equivalents: Vec<String>,
}

impl SentimentEntry {
    pub fn is_positive(&self) -> bool {
        self.polarity_value > 0.0
    }
}

/// The set of sentiment concepts keyed by normalized concept key.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentimentResource {
    entries: BTreeMap<String, SentimentEntry>,
}

struct Row {
    line: usize,
    concept: String,
    value: f64,
    equivalents: Vec<String>,
}

impl SentimentResource {
    pub fn get(&self, key: &str) -> Option<&SentimentEntry> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn polarity(&self, key: &str) -> Option<f64> {
        self.entries.get(key).map(|e| e.polarity_value)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = &SentimentEntry> {
        self.entries.values()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = SentimentEntry>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in entries {
            check_value(e.polarity_value).map_err(Error::InvalidInput)?;
            map.insert(e.concept.clone(), e);
        }
        Ok(SentimentResource { entries: map })
    }

    /// Parses lexicon TSV text. Zero-valued rows are skipped as non-sentiment.
    pub fn parse_tsv(text: &str, source_name: &str) -> Result<Self> {
        let mut rows: Vec<Row> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
            if fields.len() < 2 || fields.len() > 3 {
                return Err(Error::schema(source_name, line, "expected concept<TAB>polarity[<TAB>equivalents]"));
            }
            let concept = normalize_key(fields[0]);
            if !is_valid_concept_key(&concept) {
                return Err(Error::schema(source_name, line, format!("invalid concept key {:?}", fields[0])));
            }
            let value: f64 = fields[1]
                .parse()
                .map_err(|_| Error::schema(source_name, line, format!("polarity {:?} is not a number", fields[1])))?;
            if value == 0.0 {
                log::debug!("{source_name}:{line}: skipping zero-valued concept {concept}");
                continue;
            }
            check_value(value).map_err(|m| Error::schema(source_name, line, format!("{concept}: {m}")))?;
            let equivalents = fields
                .get(2)
                .map(|f| {
                    f.split('|')
                        .map(normalize_key)
                        .filter(|k| is_valid_concept_key(k) && *k != concept)
                        .collect()
                })
                .unwrap_or_default();
            rows.push(Row {
                line,
                concept,
                value,
                equivalents,
            });
        }
        Self::from_rows(rows, source_name)
    }

    fn from_rows(rows: Vec<Row>, source_name: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, SentimentEntry> = BTreeMap::new();
        for row in &rows {
            match entries.get_mut(&row.concept) {
                Some(existing) if existing.polarity_value != row.value => {
                    return Err(Error::schema(
                        source_name,
                        row.line,
                        format!(
                            "duplicate concept {} with conflicting values {} and {}",
                            row.concept, existing.polarity_value, row.value
                        ),
                    ));
                }
                Some(existing) => {
                    for eq in &row.equivalents {
                        if !existing.equivalents.contains(eq) {
                            existing.equivalents.push(eq.clone());
                        }
                    }
                }
                None => {
                    entries.insert(
                        row.concept.clone(),
                        SentimentEntry {
                            concept: row.concept.clone(),
                            polarity_value: row.value,
                            equivalents: row.equivalents.clone(),
                        },
                    );
                }
            }
        }
        // Own rows take precedence; among parents the first in file order wins.
        for row in &rows {
            for eq in &row.equivalents {
                entries.entry(eq.clone()).or_insert_with(|| SentimentEntry {
                    concept: eq.clone(),
                    polarity_value: row.value,
                    equivalents: Vec::new(),
                });
            }
        }
        Ok(SentimentResource { entries })
    }

    /// Loads a lexicon from TSV, or from the JSON written by [`SentimentResource::to_json`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let resource: SentimentResource = serde_json::from_str(&text)
                .map_err(|e| Error::schema(path.display().to_string(), e.line(), e.to_string()))?;
            Self::from_entries(resource.entries.into_values())
        } else {
            Self::parse_tsv(&text, &path.display().to_string())
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_value(value: f64) -> std::result::Result<(), String> {
    if !value.is_finite() || !(-1.0..=1.0).contains(&value) {
        Err(format!("polarity {value} outside [-1, 1]"))
    } else if value == 0.0 {
        Err("zero polarity".to_string())
    } else {
        Ok(())
    }
}

pub fn build_resource(lexicon_path: &Path) -> Result<SentimentResource> {
    SentimentResource::load(lexicon_path)
}
