//! End-to-end composition of the stages, the JSON pipeline configuration and
//! the `run-all` driver that writes every intermediate artifact.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ambiguity::{self, AmbiguityDetector, AmbiguityPartition, ScoreMode};
use crate::classifier::{featurize, FeatureConfig, FeatureContext, FeatureMode, SentenceModel};
use crate::concepts::{AnnotatedSentence, ConceptExtractor, ConceptRecord, ConceptVocabulary};
use crate::context::{ContextProfile, ContextProfiler, RetentionRule, DEFAULT_PMI_MIN, DEFAULT_TOP_K};
use crate::corpus::{self, Label, Preprocessor, Sentence};
use crate::disambiguator::{self, Decision, ModelSet, DEFAULT_ALPHA};
use crate::error::{read_to_string, Error, Result};
use crate::evaluation::{self, EvalReport, DEFAULT_FOLDS};
use crate::knowledge::{AugmentConfig, EdgeStore, EmbeddingStore, KnowledgeBase, DEFAULT_NEIGHBOR_LIMIT, DEFAULT_TOP_M};
use crate::polarity::Polarity;
use crate::resource::SentimentResource;

pub const DEFAULT_SEED: u64 = 42;

/// Training hyper-parameters shared by every stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub threshold: f64,
    pub score_mode: ScoreMode,
    pub pmi_min: f64,
    pub top_k: usize,
    pub top_m: usize,
    pub neighbor_limit: usize,
    pub alpha: f64,
    pub negation_flip: bool,
    pub include_augmented: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            threshold: ambiguity::DEFAULT_THRESHOLD,
            score_mode: ScoreMode::Unit,
            pmi_min: DEFAULT_PMI_MIN,
            top_k: DEFAULT_TOP_K,
            top_m: DEFAULT_TOP_M,
            neighbor_limit: DEFAULT_NEIGHBOR_LIMIT,
            alpha: DEFAULT_ALPHA,
            negation_flip: true,
            include_augmented: true,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        ambiguity::validate_threshold(self.threshold)?;
        if !self.pmi_min.is_finite() || self.pmi_min < 0.0 {
            return Err(Error::Config(format!("pmi_min must be a non-negative number, got {}", self.pmi_min)));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        if self.neighbor_limit == 0 {
            return Err(Error::Config("neighbor_limit must be at least 1".into()));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn detector(&self) -> Result<AmbiguityDetector> {
        AmbiguityDetector::new(self.threshold, self.score_mode)
    }

    pub fn profiler(&self) -> ContextProfiler {
        ContextProfiler {
            retention: RetentionRule {
                pmi_min: self.pmi_min,
                top_k: self.top_k,
            },
            negation_flip: self.negation_flip,
        }
    }

    pub fn augment_config(&self) -> AugmentConfig {
        AugmentConfig {
            top_m: self.top_m,
            neighbor_limit: self.neighbor_limit,
        }
    }

    pub fn feature_config(&self, mode: FeatureMode) -> FeatureConfig {
        FeatureConfig {
            negation_flip: self.negation_flip,
            include_augmented: self.include_augmented,
            ..FeatureConfig::for_mode(mode)
        }
    }
}

/// Lexicon, knowledge base and the concept vocabulary derived from them.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub lexicon: SentimentResource,
    pub kb: KnowledgeBase,
    /// Every concept key the extractor may emit as a multiword unit.
    pub vocabulary: ConceptVocabulary,
    pub preprocessor: Preprocessor,
    pub extractor: ConceptExtractor,
}

impl Resources {
    pub fn new(lexicon: SentimentResource, kb: KnowledgeBase) -> Self {
        let mut vocabulary = ConceptVocabulary::new();
        vocabulary.extend(lexicon.keys());
        vocabulary.extend(kb.edges.nodes());
        vocabulary.extend(kb.embeddings.keys());
        Resources {
            lexicon,
            kb,
            vocabulary,
            preprocessor: Preprocessor::new(),
            extractor: ConceptExtractor::default(),
        }
    }

    pub fn load(lexicon: &Path, edges: Option<&Path>, embeddings: Option<&Path>) -> Result<Self> {
        let lexicon = SentimentResource::load(lexicon)?;
        let edges = edges.map(EdgeStore::load).transpose()?.unwrap_or_default();
        let embeddings = embeddings.map(EmbeddingStore::load).transpose()?.unwrap_or_default();
        log::info!(
            "resources: {} lexicon entries, {} edges, {} vectors",
            lexicon.len(),
            edges.len(),
            embeddings.len()
        );
        Ok(Resources::new(lexicon, KnowledgeBase::new(edges, embeddings)))
    }

    /// Loads a list of resource files, telling them apart by content (see
    /// [`sniff_resource`]). Exactly one lexicon is required.
    pub fn load_any(paths: &[PathBuf]) -> Result<Self> {
        let (mut lexicon, mut edges, mut embeddings) = (None, None, None);
        for p in paths {
            let slot = match sniff_resource(p)? {
                ResourceKind::Lexicon => &mut lexicon,
                ResourceKind::Edges => &mut edges,
                ResourceKind::Embeddings => &mut embeddings,
            };
            if let Some(previous) = slot.replace(p.as_path()) {
                return Err(Error::Config(format!(
                    "{} and {} are both {:?} files",
                    previous.display(),
                    p.display(),
                    sniff_resource(p)?
                )));
            }
        }
        let lexicon = lexicon.ok_or_else(|| Error::Config("no lexicon among the resource files".into()))?;
        Resources::load(lexicon, edges, embeddings)
    }

    pub fn annotate(&self, sentence: Sentence) -> AnnotatedSentence {
        AnnotatedSentence::annotate(sentence, &self.extractor, &self.vocabulary)
    }

    pub fn annotate_all(&self, sentences: Vec<Sentence>) -> Vec<AnnotatedSentence> {
        sentences.into_iter().map(|s| self.annotate(s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    Lexicon,
    Edges,
    Embeddings,
}

/// Classifies a resource file from its name and first data line: `.json`
/// files are lexicons; four tab-separated fields with a numeric last field
/// are an edge list; a term followed only by numbers is an embedding table.
pub fn sniff_resource(path: &Path) -> Result<ResourceKind> {
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(ResourceKind::Lexicon);
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            first = trimmed.to_string();
            break;
        }
    }
    let tabbed: Vec<&str> = first.split('\t').collect();
    if tabbed.len() == 4 && tabbed[3].trim().parse::<f64>().is_ok() {
        return Ok(ResourceKind::Edges);
    }
    let words: Vec<&str> = first.split_whitespace().collect();
    if words.len() >= 2 && words[1..].iter().all(|w| w.parse::<f64>().is_ok()) && !first.contains('\t') {
        return Ok(ResourceKind::Embeddings);
    }
    Ok(ResourceKind::Lexicon)
}

/// Concept vocabulary from any mix of lexicon, edge and embedding files.
pub fn load_vocabulary(paths: &[PathBuf]) -> Result<ConceptVocabulary> {
    let mut vocabulary = ConceptVocabulary::new();
    for p in paths {
        match sniff_resource(p)? {
            ResourceKind::Lexicon => vocabulary.extend(SentimentResource::load(p)?.keys()),
            ResourceKind::Edges => vocabulary.extend(EdgeStore::load(p)?.nodes()),
            ResourceKind::Embeddings => vocabulary.extend(EmbeddingStore::load(p)?.keys()),
        }
    }
    Ok(vocabulary)
}

/// Output of the detect → profile → augment → train-disambiguators stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisambiguationStage {
    pub partition: AmbiguityPartition,
    pub profiles: Vec<ContextProfile>,
    pub augmented: Vec<ContextProfile>,
    pub models: ModelSet,
}

pub fn detect_stage(train: &[AnnotatedSentence], resources: &Resources, params: &PipelineParams) -> Result<AmbiguityPartition> {
    params.detector()?.detect(train, &resources.lexicon)
}

pub fn profile_stage(
    train: &[AnnotatedSentence],
    partition: &AmbiguityPartition,
    params: &PipelineParams,
) -> Result<Vec<ContextProfile>> {
    params.profiler().profile_all(partition.ambiguous_concepts(), train)
}

pub fn augment_stage(profiles: &[ContextProfile], kb: &KnowledgeBase, params: &PipelineParams) -> Vec<ContextProfile> {
    let config = params.augment_config();
    profiles.iter().map(|p| kb.augment_profile(p, config)).collect()
}

/// One model per trainable profile; concepts with no retained context are
/// skipped with a warning and fall back to their lexicon sign downstream.
pub fn train_models(
    profiles: &[ContextProfile],
    partition: &AmbiguityPartition,
    lexicon: &SentimentResource,
    params: &PipelineParams,
) -> Result<ModelSet> {
    let mut models = ModelSet::default();
    for profile in profiles {
        let concept = &profile.ambiguous_concept;
        let record = partition
            .record(concept)
            .ok_or_else(|| Error::Invariant(format!("profile for {concept} has no ambiguity record")))?;
        if profile.is_empty() {
            log::warn!("{concept}: no contextual concepts retained; using lexicon polarity");
            continue;
        }
        models.insert(disambiguator::train(profile, record, params.alpha, lexicon.polarity(concept))?);
    }
    Ok(models)
}

pub fn build_disambiguation(
    train: &[AnnotatedSentence],
    resources: &Resources,
    params: &PipelineParams,
) -> Result<DisambiguationStage> {
    let partition = detect_stage(train, resources, params)?;
    let profiles = profile_stage(train, &partition, params)?;
    let augmented = augment_stage(&profiles, &resources.kb, params);
    let models = train_models(&augmented, &partition, &resources.lexicon, params)?;
    Ok(DisambiguationStage {
        partition,
        profiles,
        augmented,
        models,
    })
}

/// Everything needed to classify raw text: the concept vocabulary, the
/// lexicon, the disambiguation models and the sentence model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub mode: FeatureMode,
    pub ambiguous: Vec<String>,
    pub vocabulary: ConceptVocabulary,
    pub lexicon: SentimentResource,
    pub models: ModelSet,
    pub sentence_model: SentenceModel,
}

impl TrainedPipeline {
    /// Trains on `train` alone; the disambiguation stages run only for the
    /// commonsense scheme.
    pub fn fit(train: &[AnnotatedSentence], resources: &Resources, params: &PipelineParams, mode: FeatureMode) -> Result<Self> {
        params.validate()?;
        let stage = if mode == FeatureMode::BocCommonsense {
            Some(build_disambiguation(train, resources, params)?)
        } else {
            None
        };
        Self::from_stage(train, resources, params, mode, stage.as_ref())
    }

    pub fn from_stage(
        train: &[AnnotatedSentence],
        resources: &Resources,
        params: &PipelineParams,
        mode: FeatureMode,
        stage: Option<&DisambiguationStage>,
    ) -> Result<Self> {
        let config = params.feature_config(mode);
        let models = match (mode, stage) {
            (FeatureMode::BocCommonsense, Some(stage)) => stage.models.clone(),
            (FeatureMode::BocCommonsense, None) => {
                return Err(Error::Invariant("commonsense features need the disambiguation stage".into()))
            }
            _ => ModelSet::default(),
        };
        let ambiguous = stage
            .filter(|_| mode == FeatureMode::BocCommonsense)
            .map(|s| s.partition.ambiguous_concepts().map(str::to_string).collect())
            .unwrap_or_default();
        let ctx = FeatureContext {
            resource: Some(&resources.lexicon),
            models: Some(&models),
        };
        let sentence_model = crate::classifier::train_sentence_model(train, config, ctx, params.alpha)?;
        Ok(TrainedPipeline {
            mode,
            ambiguous,
            vocabulary: resources.vocabulary.clone(),
            lexicon: resources.lexicon.clone(),
            models,
            sentence_model,
        })
    }

    fn context(&self) -> FeatureContext<'_> {
        FeatureContext {
            resource: Some(&self.lexicon),
            models: Some(&self.models),
        }
    }

    pub fn annotate_text(&self, id: &str, text: &str) -> Result<AnnotatedSentence> {
        let sentence = Preprocessor::new().process(id, text, Label::Neutral, None)?;
        Ok(AnnotatedSentence::annotate(sentence, &ConceptExtractor::default(), &self.vocabulary))
    }

    pub fn features(&self, s: &AnnotatedSentence) -> Vec<String> {
        featurize(s, &self.sentence_model.config, self.context())
    }

    pub fn predict_sentence(&self, s: &AnnotatedSentence) -> Polarity {
        self.sentence_model.predict(s, self.context())
    }

    pub fn predict_text(&self, text: &str) -> Result<Polarity> {
        Ok(self.predict_sentence(&self.annotate_text("input", text)?))
    }

    /// In-context polarity of `concept` within `text`; `None` when no model
    /// exists for it.
    pub fn disambiguate(&self, text: &str, concept: &str) -> Result<Option<Decision>> {
        let concept = crate::concepts::normalize_key(concept);
        let Some(model) = self.models.get(&concept) else {
            return Ok(None);
        };
        let s = self.annotate_text("input", text)?;
        Ok(Some(model.classify(s.concepts.iter().map(|c| c.key.as_str()))))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_file(path, &serde_json::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::schema(path.display().to_string(), e.line(), e.to_string()))
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}

pub fn write_jsonl_file<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    corpus::write_jsonl(items, &mut buf)?;
    write_file(path, &String::from_utf8(buf).map_err(|e| Error::Invariant(e.to_string()))?)
}

fn default_modes() -> Vec<FeatureMode> {
    FeatureMode::ALL.to_vec()
}

fn default_model_mode() -> FeatureMode {
    FeatureMode::BocCommonsense
}

/// The JSON configuration file. Relative paths are resolved against the
/// directory holding the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub threshold: f64,
    pub score_mode: ScoreMode,
    pub pmi_min: f64,
    pub top_k: usize,
    pub top_m: usize,
    pub neighbor_limit: usize,
    pub alpha: f64,
    pub negation_flip: bool,
    pub include_augmented: bool,
    pub folds: usize,
    pub seed: u64,
    #[serde(default = "default_modes")]
    pub configs: Vec<FeatureMode>,
    /// Feature scheme of the model written by the train stage.
    #[serde(default = "default_model_mode")]
    pub model_mode: FeatureMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let p = PipelineParams::default();
        PipelineConfig {
            corpus: None,
            lexicon: None,
            edges: None,
            embeddings: None,
            output_dir: None,
            threshold: p.threshold,
            score_mode: p.score_mode,
            pmi_min: p.pmi_min,
            top_k: p.top_k,
            top_m: p.top_m,
            neighbor_limit: p.neighbor_limit,
            alpha: p.alpha,
            negation_flip: p.negation_flip,
            include_augmented: p.include_augmented,
            folds: DEFAULT_FOLDS,
            seed: DEFAULT_SEED,
            configs: default_modes(),
            model_mode: default_model_mode(),
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("{source_name}:{}: {e}", e.line())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::parse(&read_to_string(path)?, &path.display().to_string())?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.corpus,
            &mut self.lexicon,
            &mut self.edges,
            &mut self.embeddings,
            &mut self.output_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn params(&self) -> PipelineParams {
        PipelineParams {
            threshold: self.threshold,
            score_mode: self.score_mode,
            pmi_min: self.pmi_min,
            top_k: self.top_k,
            top_m: self.top_m,
            neighbor_limit: self.neighbor_limit,
            alpha: self.alpha,
            negation_flip: self.negation_flip,
            include_augmented: self.include_augmented,
        }
    }

    /// Range checks on every numeric parameter.
    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.configs.is_empty() {
            return Err(Error::Config("configs must name at least one feature scheme".into()));
        }
        Ok(())
    }

    pub fn require<'a>(&self, field: &'static str, value: &'a Option<PathBuf>) -> Result<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| Error::Config(format!("no {field} path configured")))
    }

    /// Checks that every input file exists before anything runs.
    pub fn validate_paths(&self) -> Result<()> {
        for (field, value) in [
            ("corpus", &self.corpus),
            ("lexicon", &self.lexicon),
            ("edges", &self.edges),
            ("embeddings", &self.embeddings),
        ] {
            let path = self.require(field, value)?;
            if !path.is_file() {
                return Err(Error::MissingFile(path.to_path_buf()));
            }
        }
        self.require("output_dir", &self.output_dir)?;
        Ok(())
    }

    pub fn load_resources(&self) -> Result<Resources> {
        Resources::load(
            self.require("lexicon", &self.lexicon)?,
            self.edges.as_deref(),
            self.embeddings.as_deref(),
        )
    }
}

/// Artifact file names written by [`run_all`], in stage order.
pub const ARTIFACTS: [&str; 9] = [
    "sentences.jsonl",
    "concepts.jsonl",
    "lexicon.json",
    "ambiguity.json",
    "profiles.json",
    "augmented_profiles.json",
    "model.json",
    "report.json",
    "report.txt",
];

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
    pub report: EvalReport,
}

fn stage<T>(name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    log::info!("stage {name}");
    f().map_err(|e| e.in_stage(name))
}

/// Runs every stage in order, writing one artifact per stage into the
/// output directory. Configuration and input paths are checked first.
pub fn run_all(config: &PipelineConfig) -> Result<RunSummary> {
    config.validate()?;
    config.validate_paths()?;
    let params = config.params();
    let out = config.require("output_dir", &config.output_dir)?;
    let path = |name: &str| out.join(name);
    let mut artifacts = Vec::new();

    let sentences = stage("preprocess", || {
        let sentences = corpus::load_corpus(config.require("corpus", &config.corpus)?)?;
        write_jsonl_file(&path(ARTIFACTS[0]), &sentences)?;
        Ok(sentences)
    })?;
    artifacts.push(path(ARTIFACTS[0]));

    let resources = stage("extract", || config.load_resources())?;
    let annotated = stage("extract", || {
        let annotated = resources.annotate_all(sentences);
        let records: Vec<ConceptRecord> = annotated
            .iter()
            .map(|s| ConceptRecord {
                sentence_id: s.sentence.id.clone(),
                concepts: s.concepts.clone(),
            })
            .collect();
        write_jsonl_file(&path(ARTIFACTS[1]), &records)?;
        Ok(annotated)
    })?;
    artifacts.push(path(ARTIFACTS[1]));

    stage("build-lexicon", || write_file(&path(ARTIFACTS[2]), &(resources.lexicon.to_json()? + "\n")))?;
    artifacts.push(path(ARTIFACTS[2]));

    let partition = stage("detect-ambiguous", || {
        let partition = detect_stage(&annotated, &resources, &params)?;
        write_json(&path(ARTIFACTS[3]), &partition)?;
        Ok(partition)
    })?;
    artifacts.push(path(ARTIFACTS[3]));

    let profiles = stage("profile-context", || {
        let profiles = profile_stage(&annotated, &partition, &params)?;
        write_json(&path(ARTIFACTS[4]), &profiles)?;
        Ok(profiles)
    })?;
    artifacts.push(path(ARTIFACTS[4]));

    let augmented = stage("augment", || {
        let augmented = augment_stage(&profiles, &resources.kb, &params);
        write_json(&path(ARTIFACTS[5]), &augmented)?;
        Ok(augmented)
    })?;
    artifacts.push(path(ARTIFACTS[5]));

    stage("train", || {
        let models = train_models(&augmented, &partition, &resources.lexicon, &params)?;
        let stage = DisambiguationStage {
            partition: partition.clone(),
            profiles: profiles.clone(),
            augmented: augmented.clone(),
            models,
        };
        let polar: Vec<AnnotatedSentence> = evaluation::polar_sentences(&annotated).into_iter().cloned().collect();
        let model = TrainedPipeline::from_stage(&polar, &resources, &params, config.model_mode, Some(&stage))?;
        model.save(&path(ARTIFACTS[6]))
    })?;
    artifacts.push(path(ARTIFACTS[6]));

    let report = stage("evaluate", || {
        let report =
            evaluation::cross_validate(&annotated, &resources, &params, &config.configs, config.folds, config.seed)?;
        write_json(&path(ARTIFACTS[7]), &report)?;
        write_file(&path(ARTIFACTS[8]), &report.to_table())?;
        Ok(report)
    })?;
    artifacts.extend([path(ARTIFACTS[7]), path(ARTIFACTS[8])]);

    Ok(RunSummary { artifacts, report })
}
