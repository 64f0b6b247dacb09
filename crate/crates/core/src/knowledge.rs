//! Commonsense knowledge: a ConceptNet-style edge list and a
//! Numberbatch-style embedding table, used to add semantically related
//! concepts to the context sets of ambiguous concepts.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concepts::{is_valid_concept_key, normalize_key};
use crate::context::{ContextMember, ContextProfile};
use crate::error::{Error, Result};
use crate::polarity::Polarity;

pub const DEFAULT_TOP_M: usize = 5;
pub const DEFAULT_NEIGHBOR_LIMIT: usize = 50;

macro_rules! relations {
    ($($name:ident),+ $(,)?) => {
        /// Relation types accepted from the edge list.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Relation {
            $($name),+
        }

        impl Relation {
            pub const ALL: &'static [Relation] = &[$(Relation::$name),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Relation::$name => stringify!($name)),+
                }
            }
        }
    };
}

relations!(
    IsA,
    PartOf,
    MemberOf,
    HasA,
    HasProperty,
    Synonym,
    Antonym,
    DerivedFrom,
    DefinedAs,
    TranslationOf,
    SimilarTo,
    UsedFor,
    CapableOf,
    AtLocation,
    LocatedNear,
    HasSubevent,
    HasFirstSubevent,
    HasLastSubevent,
    HasPrerequisite,
    Causes,
    Desires,
    MotivatedByGoal,
    ObstructedBy,
    RelatedTo,
    CreatedBy,
    MadeOf,
);

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = Error;

    /// Accepts `PartOf`, `Part-Of`, `part_of` and `/r/PartOf`.
    fn from_str(s: &str) -> Result<Self> {
        let bare: String = s
            .trim()
            .trim_start_matches("/r/")
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_lowercase();
        Relation::ALL
            .iter()
            .copied()
            .find(|r| r.as_str().to_lowercase() == bare)
            .ok_or_else(|| Error::InvalidInput(format!("relation {s:?} is not supported")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeEdge {
    pub relation: Relation,
    pub start: String,
    pub end: String,
    pub weight: f64,
}

/// A directly connected node, before similarity scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub concept: String,
    pub relation: Relation,
    pub weight: f64,
}

/// Edges indexed by both endpoints.
#[derive(Debug, Clone, Default)]
pub struct EdgeStore {
    edges: Vec<KnowledgeEdge>,
    index: HashMap<String, Vec<usize>>,
    dropped: usize,
}

impl EdgeStore {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Lines skipped for an unsupported relation, an unusable key or weight.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn edges(&self) -> &[KnowledgeEdge] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = &String> {
        self.index.keys()
    }

    pub fn push(&mut self, edge: KnowledgeEdge) {
        let id = self.edges.len();
        self.index.entry(edge.start.clone()).or_default().push(id);
        self.index.entry(edge.end.clone()).or_default().push(id);
        self.edges.push(edge);
    }

    pub fn parse(reader: impl BufRead, source_name: &str) -> Result<Self> {
        let mut store = EdgeStore::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::schema(
                    source_name,
                    line_no,
                    format!("expected relation<TAB>start<TAB>end<TAB>weight, found {} fields", fields.len()),
                ));
            }
            let weight: f64 = fields[3]
                .parse()
                .map_err(|_| Error::schema(source_name, line_no, format!("weight {:?} is not a number", fields[3])))?;
            let Ok(relation) = fields[0].parse::<Relation>() else {
                store.dropped += 1;
                continue;
            };
            let start = normalize_key(fields[1]);
            let end = normalize_key(fields[2]);
            if !is_valid_concept_key(&start) || !is_valid_concept_key(&end) || start == end || !weight.is_finite() || weight <= 0.0 {
                store.dropped += 1;
                continue;
            }
            store.push(KnowledgeEdge {
                relation,
                start,
                end,
                weight,
            });
        }
        if store.dropped > 0 {
            log::info!("{source_name}: dropped {} edges", store.dropped);
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(file), &path.display().to_string())
    }

    /// Other endpoints of every incident edge, one per node with its heaviest
    /// edge, by descending weight then key, truncated to `limit`.
    pub fn neighbors(&self, concept: &str, limit: usize) -> Vec<Neighbor> {
        let Some(ids) = self.index.get(concept) else {
            return Vec::new();
        };
        let mut best: BTreeMap<&str, (f64, Relation)> = BTreeMap::new();
        for &id in ids {
            let e = &self.edges[id];
            let other = if e.start == concept { &e.end } else { &e.start };
            match best.get(other.as_str()) {
                Some((w, _)) if *w >= e.weight => {}
                _ => {
                    best.insert(other, (e.weight, e.relation));
                }
            }
        }
        let mut out: Vec<Neighbor> = best
            .into_iter()
            .map(|(c, (weight, relation))| Neighbor {
                concept: c.to_string(),
                relation,
                weight,
            })
            .collect();
        out.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.concept.cmp(&b.concept)));
        out.truncate(limit);
        out
    }
}

pub fn load_edges(path: &Path) -> Result<EdgeStore> {
    EdgeStore::load(path)
}

/// Dense concept vectors of one fixed dimension.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&[f32]> {
        self.vectors.get(key).map(Vec::as_slice)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.vectors.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.vectors.keys()
    }

    /// Stores a vector under its normalized key. All-zero vectors and
    /// invalid keys are ignored; returns whether the vector was stored.
    pub fn insert(&mut self, term: &str, vector: Vec<f32>) -> Result<bool> {
        if self.dim == 0 {
            self.dim = vector.len();
        }
        if vector.len() != self.dim {
            return Err(Error::InvalidInput(format!(
                "vector for {term:?} has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        let key = normalize_key(term);
        if !is_valid_concept_key(&key) || vector.iter().all(|v| *v == 0.0) || self.vectors.contains_key(&key) {
            return Ok(false);
        }
        self.vectors.insert(key, vector);
        Ok(true)
    }

    /// Parses the word2vec/GloVe text layout with an optional `<count> <dim>` header.
    pub fn parse(reader: impl BufRead, source_name: &str) -> Result<Self> {
        let mut store = EmbeddingStore::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io(source_name, e))?;
            let mut parts = line.split_whitespace();
            let Some(term) = parts.next() else {
                continue;
            };
            let rest: Vec<&str> = parts.collect();
            if idx == 0 && rest.len() == 1 && term.parse::<usize>().is_ok() {
                if let Ok(dim) = rest[0].parse::<usize>() {
                    store.dim = dim;
                    continue;
                }
            }
            let vector = rest
                .iter()
                .map(|v| v.parse::<f32>())
                .collect::<std::result::Result<Vec<f32>, _>>()
                .map_err(|_| Error::schema(source_name, line_no, format!("non-numeric component for {term:?}")))?;
            if vector.is_empty() {
                return Err(Error::schema(source_name, line_no, format!("no components for {term:?}")));
            }
            store
                .insert(term, vector)
                .map_err(|e| Error::schema(source_name, line_no, e.to_string()))?;
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(file), &path.display().to_string())
    }

    /// Cosine similarity of two stored concepts.
    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        cosine(self.get(a)?, self.get(b)?).ok()
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    EmbeddingStore::load(path)
}

/// Normalized dot product of two equal-length, non-zero vectors.
pub fn cosine<T: Copy + Into<f64>>(v: &[T], w: &[T]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::InvalidInput(format!("dimension mismatch: {} vs {}", v.len(), w.len())));
    }
    let (mut dot, mut nv, mut nw) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in v.iter().zip(w) {
        let (a, b): (f64, f64) = (a.into(), b.into());
        dot += a * b;
        nv += a * a;
        nw += b * b;
    }
    if nv == 0.0 || nw == 0.0 {
        return Err(Error::InvalidInput("cosine of a zero vector".into()));
    }
    Ok((dot / (nv.sqrt() * nw.sqrt())).clamp(-1.0, 1.0))
}

/// Similarity of a candidate to the ambiguous concept plus its similarity to
/// every embedded member of either context set. `None` when the candidate or
/// the ambiguous concept has no vector.
pub fn score_candidate(candidate: &str, ambiguous: &str, profile: &ContextProfile, emb: &EmbeddingStore) -> Option<f64> {
    let o = emb.get(candidate)?;
    let amg = emb.get(ambiguous)?;
    let mut score = cosine(amg, o).ok()?;
    for q in profile.members() {
        if let Some(qv) = emb.get(q) {
            score += cosine(qv, o).ok()?;
        }
    }
    Some(score)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateConcept {
    pub concept: String,
    pub via_relation: Relation,
    pub similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub top_m: usize,
    pub neighbor_limit: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            top_m: DEFAULT_TOP_M,
            neighbor_limit: DEFAULT_NEIGHBOR_LIMIT,
        }
    }
}

/// Edge list and embeddings together.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    pub edges: EdgeStore,
    pub embeddings: EmbeddingStore,
}

impl KnowledgeBase {
    pub fn new(edges: EdgeStore, embeddings: EmbeddingStore) -> Self {
        KnowledgeBase { edges, embeddings }
    }

    /// Scored neighbors of `ambiguous` that have vectors and are not yet in
    /// the profile, best first.
    pub fn candidates(&self, profile: &ContextProfile, limit: usize) -> Vec<CandidateConcept> {
        let ambiguous = profile.ambiguous_concept.as_str();
        let mut out: Vec<CandidateConcept> = self
            .edges
            .neighbors(ambiguous, limit)
            .into_iter()
            .filter(|n| self.embeddings.contains(&n.concept) && !profile.contains(&n.concept))
            .filter_map(|n| {
                score_candidate(&n.concept, ambiguous, profile, &self.embeddings).map(|similarity| CandidateConcept {
                    concept: n.concept,
                    via_relation: n.relation,
                    similarity,
                })
            })
            .collect();
        out.sort_by(|a, b| b.similarity.total_cmp(&a.similarity).then_with(|| a.concept.cmp(&b.concept)));
        out
    }

    /// Adds up to `top_m` positively scored neighbors to the side whose
    /// members are more similar to them, with similarity-weighted pseudo-counts.
    pub fn augment_profile(&self, profile: &ContextProfile, config: AugmentConfig) -> ContextProfile {
        let mut out = profile.clone();
        if !self.embeddings.contains(&profile.ambiguous_concept) {
            log::warn!("no vector for {}; profile left unchanged", profile.ambiguous_concept);
            return out;
        }
        let selected = self
            .candidates(profile, config.neighbor_limit)
            .into_iter()
            .filter(|c| c.similarity > 0.0)
            .take(config.top_m);
        for cand in selected {
            let Some(o) = self.embeddings.get(&cand.concept) else {
                continue;
            };
            let affinity = |side: Polarity| -> (f64, f64) {
                let mut share = 0.0;
                let mut pseudo = 0.0;
                for (q, member) in profile.side(side) {
                    if let Some(sim) = self.embeddings.get(q).and_then(|qv| cosine(qv, o).ok()) {
                        share += sim;
                        pseudo += sim * member.count as f64;
                    }
                }
                (share, pseudo)
            };
            let (pos_share, pos_pseudo) = affinity(Polarity::Positive);
            let (neg_share, neg_pseudo) = affinity(Polarity::Negative);
            let (side, pseudo) = if pos_share > neg_share {
                (Polarity::Positive, pos_pseudo)
            } else if neg_share > pos_share {
                (Polarity::Negative, neg_pseudo)
            } else {
                continue;
            };
            if pseudo <= 0.0 {
                continue;
            }
            out.side_mut(side).insert(
                cand.concept.clone(),
                ContextMember {
                    count: 0,
                    pmi: None,
                    pseudo_count: pseudo,
                    via_relation: Some(cand.via_relation.to_string()),
                },
            );
        }
        out.refresh_sizes();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store(text: &str) -> EdgeStore {
        EdgeStore::parse(text.as_bytes(), "edges.tsv").unwrap()
    }

    fn emb(rows: &[(&str, &[f32])]) -> EmbeddingStore {
        let mut e = EmbeddingStore::default();
        for (k, v) in rows {
            e.insert(k, v.to_vec()).unwrap();
        }
        e
    }

    fn member(count: u64) -> ContextMember {
        ContextMember {
            count,
            pmi: Some(2.0),
            pseudo_count: 0.0,
            via_relation: None,
        }
    }

    #[test]
    fn relation_parsing() {
        assert_eq!("Part-Of".parse::<Relation>().unwrap(), Relation::PartOf);
        assert_eq!("/r/UsedFor".parse::<Relation>().unwrap(), Relation::UsedFor);
        assert!("ExternalURL".parse::<Relation>().is_err());
        assert_eq!(Relation::ALL.len(), 26);
    }

    #[test]
    fn single_edge_neighbors() {
        let s = store("UsedFor\tphone\tmaking_a_phone_call\t1.0\n");
        assert_eq!(s.len(), 1);
        let n = s.neighbors("phone", 24);
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].concept, "making_a_phone_call");
        assert_eq!(s.neighbors("making_a_phone_call", 24)[0].concept, "phone");
        assert!(s.neighbors("tablet", 24).is_empty());
    }

    #[test]
    fn unsupported_relations_dropped() {
        let s = store("ExternalURL\tphone\thttp_x\t1.0\nIsA\t/c/en/phone/n\t/c/en/device\t2.0\nIsA\t/c/fr/téléphone\tdevice\t1\n");
        assert_eq!(s.len(), 1);
        assert_eq!(s.dropped(), 2);
        assert_eq!(s.edges()[0].start, "phone");
    }

    #[test]
    fn empty_and_malformed() {
        assert!(store("").is_empty());
        match EdgeStore::parse("IsA\tphone\n".as_bytes(), "e.tsv") {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(EdgeStore::parse("IsA\ta\tb\theavy\n".as_bytes(), "e.tsv").is_err());
    }

    #[test]
    fn neighbor_ordering_and_dedup() {
        let mut text = String::new();
        for i in 0..30 {
            text.push_str(&format!("RelatedTo\tlaptop\tn{i:02}\t{}\n", 1.0 + i as f64));
        }
        text.push_str("IsA\tn00\tlaptop\t100\n");
        let s = store(&text);
        let n = s.neighbors("laptop", 24);
        assert_eq!(n.len(), 24);
        assert_eq!(n[0].concept, "n00");
        assert_eq!(n[0].relation, Relation::IsA);
        assert_eq!(n[1].concept, "n29");
        assert!(n.windows(2).all(|w| w[0].weight >= w[1].weight));
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(cosine(&[1.0, 0.0], &[1.0]).is_err());
        assert!(cosine(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn embedding_file_layouts() {
        let text = "3 2\n/c/en/phone 1 0\nPrice-Range 0 1\nzero 0 0\n";
        let e = EmbeddingStore::parse(text.as_bytes(), "v.txt").unwrap();
        assert_eq!(e.dim(), 2);
        assert_eq!(e.len(), 2);
        assert!(e.contains("phone") && e.contains("price_range") && !e.contains("zero"));
        let e = EmbeddingStore::parse("phone 1 0 0\ncall 0 1 0\n".as_bytes(), "v.txt").unwrap();
        assert_eq!(e.dim(), 3);
        match EmbeddingStore::parse("phone 1 0\ncall 0 1 0\n".as_bytes(), "v.txt") {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn candidate_scores() {
        let h = std::f32::consts::FRAC_1_SQRT_2;
        let e = emb(&[("amg", &[1.0, 0.0]), ("o", &[h, h]), ("q1", &[0.0, 1.0])]);
        let mut p = ContextProfile::empty("amg");
        let alone = score_candidate("o", "amg", &p, &e).unwrap();
        assert!((alone - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        p.positive_set.insert("q1".into(), member(1));
        p.negative_set.insert("unembedded".into(), member(3));
        let with_q = score_candidate("o", "amg", &p, &e).unwrap();
        assert!((with_q - std::f64::consts::SQRT_2).abs() < 1e-6);
        assert!(score_candidate("missing", "amg", &p, &e).is_none());

        let e = emb(&[("amg", &[1.0, 2.0]), ("o", &[1.0, 2.0]), ("q", &[2.0, 4.0])]);
        let mut p = ContextProfile::empty("amg");
        p.positive_set.insert("q".into(), member(1));
        assert!((score_candidate("o", "amg", &p, &e).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn augmentation_assigns_dominant_side() {
        let kb = KnowledgeBase::new(
            store("HasSubevent\tbuy\tgoing_to_market\t2.0\nRelatedTo\tbuy\tnovec\t1.0\nAntonym\tbuy\tsell\t1.0\n"),
            emb(&[
                ("buy", &[1.0, 0.2, 0.0]),
                ("going_to_market", &[0.9, 0.5, 0.0]),
                ("shop", &[0.8, 0.6, 0.0]),
                ("refund", &[0.0, 0.0, 1.0]),
                ("sell", &[-1.0, 0.0, 0.0]),
            ]),
        );
        let mut p = ContextProfile::empty("buy");
        p.positive_set.insert("shop".into(), member(3));
        p.negative_set.insert("refund".into(), member(2));
        p.refresh_sizes();
        let out = kb.augment_profile(&p, AugmentConfig::default());
        let added = &out.positive_set["going_to_market"];
        assert_eq!(added.count, 0);
        assert_eq!(added.via_relation.as_deref(), Some("HasSubevent"));
        let expected = cosine(&[0.8f32, 0.6, 0.0], &[0.9f32, 0.5, 0.0]).unwrap() * 3.0;
        assert!((added.pseudo_count - expected).abs() < 1e-9);
        // negative score: never added
        assert!(!out.contains("sell"));
        // corpus members untouched
        assert_eq!(out.positive_set["shop"], p.positive_set["shop"]);
        assert_eq!(out.m_pos, 2);
        assert_eq!(out.m_neg, 1);
    }

    #[test]
    fn augmentation_without_vectors_is_identity() {
        let kb = KnowledgeBase::new(store("IsA\tbuy\tpurchase\t1\n"), emb(&[("purchase", &[1.0, 0.0])]));
        let p = ContextProfile::empty("buy");
        assert_eq!(kb.augment_profile(&p, AugmentConfig::default()), p);
        let kb = KnowledgeBase::new(store("IsA\tbuy\tpurchase\t1\n"), emb(&[("buy", &[1.0, 0.0])]));
        assert_eq!(kb.augment_profile(&p, AugmentConfig::default()), p);
    }

    #[test]
    fn tied_affinity_is_dropped() {
        let kb = KnowledgeBase::new(
            store("IsA\tamb\tmid\t1\n"),
            emb(&[("amb", &[1.0, 1.0]), ("mid", &[1.0, 1.0]), ("p", &[1.0, 0.0]), ("n", &[0.0, 1.0])]),
        );
        let mut p = ContextProfile::empty("amb");
        p.positive_set.insert("p".into(), member(1));
        p.negative_set.insert("n".into(), member(1));
        let out = kb.augment_profile(&p, AugmentConfig::default());
        assert!(!out.contains("mid"));
    }
}
