use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ctxpolarity::ambiguity::AmbiguityPartition;
use ctxpolarity::concepts::{join_concepts, ConceptRecord};
use ctxpolarity::corpus::{load_sentences, read_jsonl};
use ctxpolarity::pipeline::{self, write_json, write_jsonl_file, PipelineConfig, Resources, TrainedPipeline};
use ctxpolarity::{ContextProfile, EdgeStore, EmbeddingStore, Error, KnowledgeBase, Result, SentimentResource};

use crate::Command;

/// Flag value, else the configured value, else an error naming the flag.
fn pick(flag: Option<PathBuf>, configured: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| configured.clone())
        .ok_or_else(|| Error::Config(format!("--{name} not given and not set in the configuration")))
}

/// Output path: the flag, else `<output_dir>/<default_name>`.
fn out_path(flag: Option<PathBuf>, config: &PipelineConfig, default_name: &str) -> Result<PathBuf> {
    flag.or_else(|| config.output_dir.as_ref().map(|d| d.join(default_name)))
        .ok_or_else(|| Error::Config("--out not given and no output_dir configured".into()))
}

fn resource_paths(flags: Vec<PathBuf>, config: &PipelineConfig) -> Vec<PathBuf> {
    if !flags.is_empty() {
        return flags;
    }
    [&config.lexicon, &config.edges, &config.embeddings]
        .into_iter()
        .flatten()
        .cloned()
        .collect()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        source_name: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

#[derive(Debug, Deserialize)]
struct PredictInput {
    id: String,
    text: String,
}

#[derive(Debug, Serialize)]
struct PredictOutput {
    id: String,
    polarity: ctxpolarity::Polarity,
}

pub fn run(command: Command, mut config: PipelineConfig) -> Result<()> {
    match command {
        Command::Preprocess(a) => {
            let corpus = pick(a.corpus, &config.corpus, "corpus")?;
            let sentences = ctxpolarity::corpus::load_corpus(&corpus)?;
            let out = out_path(a.out, &config, pipeline::ARTIFACTS[0])?;
            write_jsonl_file(&out, &sentences)?;
            log::info!("{} sentences -> {}", sentences.len(), out.display());
        }
        Command::Extract(a) => {
            let corpus = pick(a.corpus, &config.corpus, "corpus")?;
            let vocabulary = pipeline::load_vocabulary(&resource_paths(a.vocab, &config))?;
            let extractor = ctxpolarity::ConceptExtractor::default();
            let records: Vec<ConceptRecord> = load_sentences(&corpus)?
                .iter()
                .map(|s| ConceptRecord {
                    sentence_id: s.id.clone(),
                    concepts: extractor.extract(s, &vocabulary),
                })
                .collect();
            write_jsonl_file(&out_path(a.out, &config, pipeline::ARTIFACTS[1])?, &records)?;
        }
        Command::BuildLexicon(a) => {
            let input = pick(a.input, &config.lexicon, "in")?;
            let lexicon = SentimentResource::load(&input)?;
            let out = out_path(a.out, &config, pipeline::ARTIFACTS[2])?;
            write_json(&out, &lexicon)?;
        }
        Command::DetectAmbiguous(a) => {
            if let Some(t) = a.threshold {
                config.threshold = t;
            }
            if let Some(m) = a.score_mode {
                config.score_mode = m;
            }
            config.validate()?;
            let corpus = pick(a.corpus, &config.corpus, "corpus")?;
            let lexicon = SentimentResource::load(&pick(a.lexicon, &config.lexicon, "lexicon")?)?;
            let annotated = join_concepts(load_sentences(&corpus)?, read_jsonl(&a.concepts)?)?;
            let partition = config.params().detector()?.detect(&annotated, &lexicon)?;
            println!(
                "{} ambiguous of {} sentiment concepts",
                partition.ambiguous.len(),
                partition.ambiguous.len() + partition.unambiguous.len()
            );
            write_json(&out_path(a.out, &config, pipeline::ARTIFACTS[3])?, &partition)?;
        }
        Command::ProfileContext(a) => {
            if let Some(v) = a.pmi_min {
                config.pmi_min = v;
            }
            if let Some(v) = a.top_k {
                config.top_k = v;
            }
            if a.no_negation_flip {
                config.negation_flip = false;
            }
            config.validate()?;
            let partition: AmbiguityPartition = read_json(&a.ambiguous)?;
            let corpus = pick(a.corpus, &config.corpus, "corpus")?;
            let annotated = join_concepts(load_sentences(&corpus)?, read_jsonl(&a.concepts)?)?;
            let profiles = pipeline::profile_stage(&annotated, &partition, &config.params())?;
            write_json(&out_path(a.out, &config, pipeline::ARTIFACTS[4])?, &profiles)?;
        }
        Command::Augment(a) => {
            if let Some(v) = a.top_m {
                config.top_m = v;
            }
            if let Some(v) = a.neighbor_limit {
                config.neighbor_limit = v;
            }
            config.validate()?;
            let profiles: Vec<ContextProfile> = read_json(&a.profiles)?;
            let edges = EdgeStore::load(&pick(a.edges, &config.edges, "edges")?)?;
            let embeddings = EmbeddingStore::load(&pick(a.embeddings, &config.embeddings, "embeddings")?)?;
            let kb = KnowledgeBase::new(edges, embeddings);
            let augmented = pipeline::augment_stage(&profiles, &kb, &config.params());
            write_json(&out_path(a.out, &config, pipeline::ARTIFACTS[5])?, &augmented)?;
        }
        Command::Train(a) => {
            config.validate()?;
            let mode = a.mode.unwrap_or(config.model_mode);
            let corpus = pick(a.corpus, &config.corpus, "corpus")?;
            let resources = Resources::load_any(&resource_paths(a.resources, &config))?;
            let annotated = resources.annotate_all(load_sentences(&corpus)?);
            let polar: Vec<_> = ctxpolarity::evaluation::polar_sentences(&annotated)
                .into_iter()
                .cloned()
                .collect();
            let model = TrainedPipeline::fit(&polar, &resources, &config.params(), mode)?;
            let out = out_path(a.out, &config, pipeline::ARTIFACTS[6])?;
            model.save(&out)?;
            log::info!("{mode} model with {} disambiguators -> {}", model.models.len(), out.display());
        }
        Command::Classify(a) => {
            let model = TrainedPipeline::load(&a.model)?;
            match model.disambiguate(&a.sentence, &a.concept)? {
                Some(d) => println!("{}\t{:.6}", d.polarity, d.margin),
                None => {
                    return Err(Error::InvalidInput(format!(
                        "{} has no disambiguation model (not ambiguous in training data)",
                        a.concept
                    )))
                }
            }
        }
        Command::Predict(a) => {
            let model = TrainedPipeline::load(&a.model)?;
            let inputs: Vec<PredictInput> = read_jsonl(&a.input)?;
            let outputs = inputs
                .into_iter()
                .map(|r| {
                    let s = model.annotate_text(&r.id, &r.text)?;
                    Ok(PredictOutput {
                        id: r.id,
                        polarity: model.predict_sentence(&s),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            match a.out {
                Some(out) => write_jsonl_file(&out, &outputs)?,
                None => {
                    for o in &outputs {
                        println!("{}", serde_json::to_string(o)?);
                    }
                }
            }
        }
        Command::Evaluate(a) => {
            if let Some(v) = a.folds {
                config.folds = v;
            }
            if let Some(v) = a.seed {
                config.seed = v;
            }
            if !a.configs.is_empty() {
                config.configs = a.configs;
            }
            config.validate()?;
            let corpus = pick(a.corpus, &config.corpus, "corpus")?;
            let resources = Resources::load_any(&resource_paths(a.resources, &config))?;
            let annotated = resources.annotate_all(load_sentences(&corpus)?);
            let report = ctxpolarity::cross_validate(
                &annotated,
                &resources,
                &config.params(),
                &config.configs,
                config.folds,
                config.seed,
            )?;
            let table = report.to_table();
            print!("{table}");
            let out = out_path(a.out, &config, pipeline::ARTIFACTS[7])?;
            write_json(&out, &report)?;
            fs::write(out.with_extension("txt"), table).map_err(|e| Error::Io {
                path: out.with_extension("txt"),
                source: e,
            })?;
        }
        Command::RunAll(a) => {
            if let Some(dir) = a.output_dir {
                config.output_dir = Some(dir);
            }
            if let Some(v) = a.seed {
                config.seed = v;
            }
            if let Some(v) = a.threshold {
                config.threshold = v;
            }
            let summary = pipeline::run_all(&config)?;
            print!("{}", summary.report.to_table());
            for artifact in &summary.artifacts {
                log::info!("wrote {}", artifact.display());
            }
        }
    }
    Ok(())
}
