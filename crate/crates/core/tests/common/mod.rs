#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;

use ctxpolarity::concepts::Concept;
use ctxpolarity::{
    AnnotatedSentence, KnowledgeBase, Label, Polarity, Preprocessor, Resources, SentimentEntry, SentimentResource,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// A sentence with a hand-set bag of concepts; `negated` plants a "not".
pub fn annotated(label: Label, negated: bool, keys: &[&str]) -> AnnotatedSentence {
    let text = if negated { "not" } else { "" };
    let s = Preprocessor::new().process("s", text, label, None).unwrap();
    let concepts = keys.iter().enumerate().map(|(i, k)| Concept::new(*k, i, i + 1)).collect();
    AnnotatedSentence::new(s, concepts)
}

/// Pronounceable nonce words that survive lemmatization unchanged.
pub struct NonceWords {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl NonceWords {
    pub fn new(seed: u64) -> Self {
        NonceWords {
            rng: ChaCha8Rng::seed_from_u64(seed),
            used: HashSet::new(),
        }
    }

    pub fn next(&mut self) -> String {
        const C: &[u8] = b"bdfgklmnprtvz";
        const V: &[u8] = b"aiou";
        loop {
            let w: String = (0..3)
                .flat_map(|_| [*C.choose(&mut self.rng).unwrap() as char, *V.choose(&mut self.rng).unwrap() as char])
                .collect();
            if !ctxpolarity::wordlists::is_stopword(&w) && ctxpolarity::lemmatize(&w) == w && self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

/// One generated sentence with its planted (noise-free) polarity.
pub struct PlantedSentence {
    pub sentence: AnnotatedSentence,
    pub ambiguous: String,
    pub planted: Polarity,
}

pub struct SyntheticCorpus {
    pub resources: Resources,
    pub sentences: Vec<PlantedSentence>,
    pub ambiguous: Vec<String>,
}

/// Generates `n` sentences over `concepts` planted ambiguous concepts.
///
/// Each sentence holds one ambiguous concept, one two-word context phrase
/// and a filler word. The phrase fixes the polarity in an exclusive-or
/// pattern over its words (w1 w3 and w2 w4 positive, w1 w4 and w2 w3
/// negative), so each single word is uninformative and only the phrase as a
/// unit carries the signal. Labels are flipped with probability `noise`.
pub fn synthetic_corpus(n: usize, concepts: usize, noise: f64, seed: u64) -> SyntheticCorpus {
    let mut words = NonceWords::new(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let fillers: Vec<String> = (0..60).map(|_| words.next()).collect();
    let mut lexicon = Vec::new();
    let mut phrases: Vec<[(String, String, Polarity); 4]> = Vec::new();
    let mut ambiguous = Vec::new();
    for i in 0..concepts {
        let amb = words.next();
        lexicon.push(SentimentEntry {
            concept: amb.clone(),
            polarity_value: if i % 2 == 0 { 0.5 } else { -0.5 },
            equivalents: Vec::new(),
        });
        let w: Vec<String> = (0..4).map(|_| words.next()).collect();
        phrases.push([
            (w[0].clone(), w[2].clone(), Polarity::Positive),
            (w[1].clone(), w[3].clone(), Polarity::Positive),
            (w[0].clone(), w[3].clone(), Polarity::Negative),
            (w[1].clone(), w[2].clone(), Polarity::Negative),
        ]);
        ambiguous.push(amb);
    }
    let mut resources = Resources::new(SentimentResource::from_entries(lexicon).unwrap(), KnowledgeBase::default());
    for set in &phrases {
        resources.vocabulary.extend(set.iter().map(|(a, b, _)| format!("{a}_{b}")));
    }

    let pre = Preprocessor::new();
    let sentences = (0..n)
        .map(|idx| {
            let c = idx % concepts;
            let (w1, w2, planted) = &phrases[c][rng.random_range(0..4)];
            let filler = fillers.choose(&mut rng).unwrap();
            let amb = &ambiguous[c];
            let text = if rng.random_bool(0.5) {
                format!("{amb} {filler} {w1} {w2}")
            } else {
                format!("{w1} {w2} {filler} {amb}")
            };
            let observed = if rng.random_bool(noise) { planted.flip() } else { *planted };
            let s = pre.process(&format!("g{idx:05}"), &text, observed.label(), None).unwrap();
            PlantedSentence {
                sentence: resources.annotate(s),
                ambiguous: amb.clone(),
                planted: *planted,
            }
        })
        .collect();
    SyntheticCorpus {
        resources,
        sentences,
        ambiguous,
    }
}
