//! Concept-level sentiment analysis with context-dependent polarity.
//!
//! The crate detects sentiment concepts whose polarity in a labeled corpus
//! is spread across both classes, collects their positive and negative
//! contextual concepts, augments those sets with knowledge-graph neighbors
//! ranked by embedding similarity, and resolves each occurrence's polarity
//! with a Naive Bayes decision. A sentence classifier and a cross-validation
//! harness compare bag-of-words, bag-of-concepts and the disambiguated
//! bag-of-concepts feature schemes.

pub mod ambiguity;
pub mod classifier;
pub mod concepts;
pub mod context;
pub mod corpus;
pub mod disambiguator;
pub mod error;
pub mod evaluation;
pub mod knowledge;
pub mod pipeline;
pub mod polarity;
pub mod resource;
pub mod wordlists;

pub use ambiguity::{compute_statistics, detect_ambiguous, AmbiguityDetector, AmbiguityPartition, AmbiguityRecord, ScoreMode};
pub use classifier::{featurize, FeatureConfig, FeatureContext, FeatureMode, SentenceModel};
pub use concepts::{extract_concepts, normalize_key, AnnotatedSentence, Concept, ConceptExtractor, ConceptVocabulary};
pub use context::{CorpusStats, ContextMember, ContextProfile, ContextProfiler, RetentionRule};
pub use corpus::{detect_negation, lemmatize, Label, Preprocessor, Sentence};
pub use disambiguator::{Decision, DisambiguationModel, ModelSet};
pub use error::{Error, Result};
pub use evaluation::{cross_validate, metrics, ConfusionCounts, EvalReport, Metrics};
pub use knowledge::{cosine, score_candidate, EdgeStore, EmbeddingStore, KnowledgeBase, Relation};
pub use pipeline::{run_all, PipelineConfig, PipelineParams, Resources, TrainedPipeline};
pub use polarity::Polarity;
pub use resource::{SentimentEntry, SentimentResource};
