use std::collections::HashMap;
use std::path::{Path, PathBuf};

use pyo3::exceptions::{PyFileNotFoundError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ctxpolarity::pipeline::{PipelineConfig, Resources, TrainedPipeline};
use ctxpolarity::{ConceptVocabulary, Error, FeatureMode};

fn to_py_err(err: Error) -> PyErr {
    match err.root() {
        Error::MissingFile(_) => PyFileNotFoundError::new_err(err.to_string()),
        Error::Invariant(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Lemma of a single lowercase token.
#[pyfunction]
fn lemmatize(token: &str) -> String {
    ctxpolarity::lemmatize(token)
}

/// Normalized, lowercased tokens of a text.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    let p = ctxpolarity::Preprocessor::new();
    p.tokenize(&p.normalize_text(text))
}

/// True if any token is a negation marker.
#[pyfunction]
fn detect_negation(tokens: Vec<String>) -> bool {
    ctxpolarity::detect_negation(&tokens)
}

/// Canonical concept key for a surface form or `/c/en/...` URI.
#[pyfunction]
fn normalize_key(surface: &str) -> String {
    ctxpolarity::normalize_key(surface)
}

/// `(mu, delta, ambiguous)` for the given occurrence counts and magnitudes.
#[pyfunction]
#[pyo3(signature = (pos_count, neg_count, pos_score=1.0, neg_score=1.0, threshold=0.85))]
fn ambiguity_statistics(
    pos_count: u64,
    neg_count: u64,
    pos_score: f64,
    neg_score: f64,
    threshold: f64,
) -> PyResult<(f64, f64, bool)> {
    let r = ctxpolarity::AmbiguityRecord::compute("_", pos_count, neg_count, pos_score, neg_score, threshold)
        .map_err(to_py_err)?;
    Ok((r.mu, r.delta, r.ambiguous))
}

#[pyfunction]
fn cosine(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    ctxpolarity::cosine(&a, &b).map_err(to_py_err)
}

/// Precision, recall, F1 and accuracy as fractions.
#[pyfunction]
#[pyo3(signature = (tp, tn, fp, fn_))]
fn metrics(tp: u64, tn: u64, fp: u64, fn_: u64) -> PyResult<HashMap<&'static str, f64>> {
    let m = ctxpolarity::metrics(&ctxpolarity::ConfusionCounts::new(tp, tn, fp, fn_)).map_err(to_py_err)?;
    Ok(HashMap::from([
        ("precision", m.precision),
        ("recall", m.recall),
        ("f1", m.f1),
        ("accuracy", m.accuracy),
    ]))
}

/// Runs every stage from a JSON configuration file; returns the artifact paths.
#[pyfunction]
fn run_all(config_path: PathBuf) -> PyResult<Vec<String>> {
    let config = PipelineConfig::load(&config_path).map_err(to_py_err)?;
    let summary = ctxpolarity::run_all(&config).map_err(to_py_err)?;
    Ok(summary.artifacts.iter().map(|p| p.display().to_string()).collect())
}

/// Vocabulary-driven concept chunker.
#[pyclass(name = "ConceptExtractor", module = "pyctxpolarity")]
struct PyConceptExtractor {
    vocabulary: ConceptVocabulary,
}

#[pymethods]
impl PyConceptExtractor {
    #[new]
    fn new(vocabulary: Vec<String>) -> Self {
        PyConceptExtractor {
            vocabulary: vocabulary.iter().map(String::as_str).collect(),
        }
    }

    /// Concept keys of `text`, in sentence order.
    fn extract(&self, text: &str) -> PyResult<Vec<String>> {
        let s = ctxpolarity::Preprocessor::new()
            .process("input", text, ctxpolarity::Label::Neutral, None)
            .map_err(to_py_err)?;
        Ok(ctxpolarity::extract_concepts(&s, &self.vocabulary)
            .into_iter()
            .map(|c| c.key)
            .collect())
    }

    fn __len__(&self) -> usize {
        self.vocabulary.len()
    }
}

/// A trained sentence classifier together with its disambiguation models.
#[pyclass(name = "Model", module = "pyctxpolarity")]
struct PyModel {
    inner: TrainedPipeline,
}

#[pymethods]
impl PyModel {
    /// Trains on a corpus file with the given resource files (lexicon, and
    /// optionally edges and embeddings). `mode` is bow, boc or boc_cs.
    #[staticmethod]
    #[pyo3(signature = (corpus, resources, mode="boc_cs", config=None))]
    fn train(corpus: PathBuf, resources: Vec<PathBuf>, mode: &str, config: Option<PathBuf>) -> PyResult<Self> {
        let mode: FeatureMode = mode.parse().map_err(to_py_err)?;
        let config = match config {
            Some(p) => PipelineConfig::load(&p).map_err(to_py_err)?,
            None => PipelineConfig::default(),
        };
        config.validate().map_err(to_py_err)?;
        let resources = Resources::load_any(&resources).map_err(to_py_err)?;
        let sentences = ctxpolarity::corpus::load_sentences(&corpus).map_err(to_py_err)?;
        let annotated = resources.annotate_all(sentences);
        let polar: Vec<_> = ctxpolarity::evaluation::polar_sentences(&annotated)
            .into_iter()
            .cloned()
            .collect();
        let inner = TrainedPipeline::fit(&polar, &resources, &config.params(), mode).map_err(to_py_err)?;
        Ok(PyModel { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let inner = TrainedPipeline::load(&path).map_err(to_py_err)?;
        Ok(PyModel { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(Path::new(&path)).map_err(to_py_err)
    }

    /// "positive" or "negative".
    fn predict(&self, text: &str) -> PyResult<&'static str> {
        Ok(self.inner.predict_text(text).map_err(to_py_err)?.as_str())
    }

    /// `(polarity, margin)` of `concept` in `text`, or None without a model.
    fn disambiguate(&self, text: &str, concept: &str) -> PyResult<Option<(&'static str, f64)>> {
        let decision = self.inner.disambiguate(text, concept).map_err(to_py_err)?;
        Ok(decision.map(|d| (d.polarity.as_str(), d.margin)))
    }

    fn features(&self, text: &str) -> PyResult<Vec<String>> {
        let s = self.inner.annotate_text("input", text).map_err(to_py_err)?;
        Ok(self.inner.features(&s))
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.short_name()
    }

    #[getter]
    fn ambiguous(&self) -> Vec<String> {
        self.inner.ambiguous.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(mode={:?}, ambiguous={}, disambiguators={})",
            self.inner.mode.short_name(),
            self.inner.ambiguous.len(),
            self.inner.models.len()
        )
    }
}

#[pymodule]
fn pyctxpolarity(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(lemmatize, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(detect_negation, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_key, m)?)?;
    m.add_function(wrap_pyfunction!(ambiguity_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(run_all, m)?)?;
    m.add_class::<PyConceptExtractor>()?;
    m.add_class::<PyModel>()?;
    Ok(())
}
