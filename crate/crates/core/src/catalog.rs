//! Label catalogs for entities, properties and classes, and the matching
//! functions that turn a text reference into scored candidate URIs.
//!
//! Entities and classes are matched by BM25 over word stems and character
//! trigrams. Properties are matched by cosine similarity of mean word
//! vectors when a vector table is available, with the BM25 index as the
//! fallback.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::graph::KnowledgeGraph;
use crate::text::{char_ngrams, is_stopword, normalize, stem, tokenize};

const BM25_K1: f64 = 1.2;
const BM25_B: f64 = 0.75;
const NGRAM: usize = 3;

/// Upper bound for the confidence of a candidate whose label is not an exact
/// match of the reference. Exact matches alone reach 1.0.
pub const NON_EXACT_CEILING: f64 = 0.99;

/// A candidate term for a reference. Lists of candidates are sorted by
/// descending confidence, ties by ascending URI.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredCandidate {
    pub uri: String,
    pub confidence: f64,
}

impl ScoredCandidate {
    pub fn new(uri: impl Into<String>, confidence: f64) -> Self {
        Self {
            uri: uri.into(),
            confidence,
        }
    }
}

/// Canonical candidate order: confidence descending, URI ascending.
pub fn candidate_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.confidence
        .partial_cmp(&a.confidence)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.uri.as_bytes().cmp(b.uri.as_bytes()))
}

/// Result-size limits for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchLimits {
    pub entities: usize,
    pub properties: usize,
}

impl Default for MatchLimits {
    fn default() -> Self {
        Self {
            entities: 500,
            properties: 50,
        }
    }
}

/// Word vectors keyed by lowercase token, all of one dimension.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WordVectors {
    dim: usize,
    index: BTreeMap<String, u32>,
    data: Vec<f64>,
}

impl WordVectors {
    /// Parses `token v1 v2 ... vd` lines. A first line holding exactly two
    /// integers is taken as a `count dim` header and skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut index = BTreeMap::new();
        let mut data = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if line_no == 1
                && values.len() == 1
                && token.parse::<usize>().is_ok()
                && values[0].parse::<usize>().is_ok()
            {
                continue;
            }
            if values.is_empty() {
                return Err(Error::Vectors {
                    line: line_no,
                    message: format!("token {token:?} has no components"),
                });
            }
            let d = *dim.get_or_insert(values.len());
            if values.len() != d {
                return Err(Error::Vectors {
                    line: line_no,
                    message: format!("dimension {} differs from {d}", values.len()),
                });
            }
            let mut row = Vec::with_capacity(d);
            for v in values {
                row.push(v.parse::<f64>().map_err(|_| Error::Vectors {
                    line: line_no,
                    message: format!("not a number: {v:?}"),
                })?);
            }
            let key = token.to_lowercase();
            if index.contains_key(&key) {
                continue;
            }
            index.insert(key, (data.len() / d) as u32);
            data.extend(row);
        }
        Ok(Self {
            dim: dim.unwrap_or(0),
            index,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        let row = *self.index.get(token)? as usize;
        Some(&self.data[row * self.dim..(row + 1) * self.dim])
    }

    /// Mean of the vectors of in-vocabulary tokens; `None` when no token is
    /// known.
    pub fn mean(&self, text: &str) -> Option<Vec<f64>> {
        let mut acc = vec![0.0; self.dim];
        let mut count = 0usize;
        for tok in tokenize(text) {
            if let Some(v) = self.get(&tok.lower) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
                count += 1;
            }
        }
        if count == 0 {
            return None;
        }
        for a in &mut acc {
            *a /= count as f64;
        }
        Some(acc)
    }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum());
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
struct LabelDoc {
    term: u32,
    label: String,
    len: u32,
}

/// BM25 inverted index over label features (word stems and character
/// trigrams).
#[derive(Debug, Clone, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LabelIndex {
    docs: Vec<LabelDoc>,
    features: BTreeMap<String, u32>,
    postings: Vec<Vec<(u32, u32)>>,
    exact: BTreeMap<String, Vec<u32>>,
    avg_len: f64,
}

fn features(text: &str) -> BTreeMap<String, u32> {
    let mut out: BTreeMap<String, u32> = BTreeMap::new();
    for tok in tokenize(text) {
        *out.entry(format!("w:{}", stem(&tok.lower))).or_default() += 1;
        for g in char_ngrams(&tok.lower, NGRAM) {
            *out.entry(format!("g:{g}")).or_default() += 1;
        }
    }
    out
}

impl LabelIndex {
    fn build<'a>(labels: impl Iterator<Item = (u32, &'a str)>) -> Self {
        let mut idx = LabelIndex::default();
        let mut total = 0u64;
        for (term, label) in labels {
            let norm = normalize(label);
            if norm.is_empty() {
                continue;
            }
            let doc = idx.docs.len() as u32;
            let feats = features(&norm);
            let len: u32 = feats.values().sum();
            total += len as u64;
            for (f, tf) in feats {
                let next = idx.postings.len() as u32;
                let fid = *idx.features.entry(f).or_insert(next);
                if fid == next {
                    idx.postings.push(Vec::new());
                }
                idx.postings[fid as usize].push((doc, tf));
            }
            idx.exact.entry(norm.clone()).or_default().push(doc);
            idx.docs.push(LabelDoc {
                term,
                label: norm,
                len,
            });
        }
        if !idx.docs.is_empty() {
            idx.avg_len = total as f64 / idx.docs.len() as f64;
        }
        idx
    }

    pub fn label_count(&self) -> usize {
        self.docs.len()
    }

    fn idf(&self, df: usize) -> f64 {
        let n = self.docs.len() as f64;
        let df = df as f64;
        libm::log(1.0 + (n - df + 0.5) / (df + 0.5))
    }

    fn term_weight(&self, tf: f64, len: f64) -> f64 {
        let avg = if self.avg_len > 0.0 {
            self.avg_len
        } else {
            len.max(1.0)
        };
        tf * (BM25_K1 + 1.0) / (tf + BM25_K1 * (1.0 - BM25_B + BM25_B * len / avg))
    }

    /// Scores terms for a normalized query. Returns `(term, confidence)`
    /// with exact label matches at 1.0 and the rest mapped through
    /// `raw / max(raw_max, exact_bound)`, capped at [`NON_EXACT_CEILING`].
    fn search(&self, query: &str, top_k: usize) -> Vec<(u32, f64)> {
        if self.docs.is_empty() || top_k == 0 {
            return Vec::new();
        }
        let qfeats = features(query);
        let qlen: u32 = qfeats.values().sum();

        let mut doc_scores = vec![0.0f64; self.docs.len()];
        let mut touched: Vec<u32> = Vec::new();
        let mut bound = 0.0;
        for (f, &qtf) in &qfeats {
            let (df, postings) = match self.features.get(f) {
                Some(&fid) => {
                    let p = &self.postings[fid as usize];
                    (p.len(), p.as_slice())
                }
                None => (0, &[][..]),
            };
            let idf = self.idf(df);
            bound += qtf as f64 * idf * self.term_weight(qtf as f64, qlen as f64);
            for &(doc, tf) in postings {
                let d = &self.docs[doc as usize];
                if doc_scores[doc as usize] == 0.0 {
                    touched.push(doc);
                }
                doc_scores[doc as usize] +=
                    qtf as f64 * idf * self.term_weight(tf as f64, d.len as f64);
            }
        }

        let exact_docs: &[u32] = self.exact.get(query).map(Vec::as_slice).unwrap_or(&[]);
        let mut best: BTreeMap<u32, (f64, bool)> = BTreeMap::new();
        for &doc in &touched {
            let d = &self.docs[doc as usize];
            let is_exact = exact_docs.contains(&doc);
            let entry = best.entry(d.term).or_insert((0.0, false));
            entry.0 = entry.0.max(doc_scores[doc as usize]);
            entry.1 |= is_exact;
        }
        let raw_max = best
            .values()
            .filter(|(_, exact)| !exact)
            .map(|(s, _)| *s)
            .fold(0.0f64, f64::max);
        let denom = raw_max.max(bound);
        best.into_iter()
            .filter_map(|(term, (raw, exact))| {
                let conf = if exact {
                    1.0
                } else if denom > 0.0 {
                    (raw / denom).min(NON_EXACT_CEILING)
                } else {
                    0.0
                };
                (conf > 0.0).then_some((term, conf))
            })
            .collect()
    }
}

/// Kinds a lexicon entry can refer to.
pub mod kind {
    pub const ENTITY: u8 = 1;
    pub const PROPERTY: u8 = 2;
    pub const CLASS: u8 = 4;
}

/// Indexes over all labels of a graph, plus optional word vectors for
/// property matching.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TermCatalog {
    entity_uris: Vec<String>,
    property_uris: Vec<String>,
    entity_index: LabelIndex,
    property_index: LabelIndex,
    class_index: LabelIndex,
    vectors: Option<WordVectors>,
    /// Mean label vectors, parallel to `property_index` docs.
    property_vectors: Vec<Option<Vec<f64>>>,
    /// Stemmed token sequences → kind bitmask, used by the reference
    /// extractor.
    lexicon: BTreeMap<String, u8>,
    max_lexicon_tokens: usize,
}

impl TermCatalog {
    pub fn build(kg: &KnowledgeGraph, vectors: Option<WordVectors>) -> Result<Self> {
        let entity_uris: Vec<String> = kg.entities().map(|(_, u)| String::from(u)).collect();
        let property_uris: Vec<String> = kg.properties().map(|(_, u)| String::from(u)).collect();

        let entity_index = LabelIndex::build(
            kg.entities()
                .flat_map(|(id, _)| kg.entity_labels(id).iter().map(move |l| (id.0, l.as_str()))),
        );
        let property_index = LabelIndex::build(kg.properties().flat_map(|(id, _)| {
            kg.property_labels(id)
                .iter()
                .map(move |l| (id.0, l.as_str()))
        }));
        let class_index = LabelIndex::build(
            kg.classes()
                .iter()
                .flat_map(|&id| kg.entity_labels(id).iter().map(move |l| (id.0, l.as_str()))),
        );

        let property_vectors = match &vectors {
            Some(v) => property_index
                .docs
                .iter()
                .map(|d| v.mean(&d.label))
                .collect(),
            None => Vec::new(),
        };

        let mut lexicon: BTreeMap<String, u8> = BTreeMap::new();
        let mut max_lexicon_tokens = 0;
        let mut add = |label: &str, k: u8| {
            let toks = tokenize(label);
            if toks.is_empty() || toks.iter().all(|t| is_stopword(&t.lower)) {
                return;
            }
            max_lexicon_tokens = max_lexicon_tokens.max(toks.len());
            let key = crate::text::join(
                toks.iter()
                    .map(|t| t.stem())
                    .collect::<Vec<_>>()
                    .iter()
                    .map(String::as_str),
            );
            *lexicon.entry(key).or_default() |= k;
        };
        for d in &entity_index.docs {
            add(&d.label, kind::ENTITY);
        }
        for d in &class_index.docs {
            add(&d.label, kind::CLASS);
        }
        for d in &property_index.docs {
            add(&d.label, kind::PROPERTY);
            for tok in tokenize(&d.label) {
                if !is_stopword(&tok.lower) {
                    add(&tok.lower, kind::PROPERTY);
                }
            }
        }

        Ok(Self {
            entity_uris,
            property_uris,
            entity_index,
            property_index,
            class_index,
            vectors,
            property_vectors,
            lexicon,
            max_lexicon_tokens,
        })
    }

    pub fn entity_label_count(&self) -> usize {
        self.entity_index.label_count()
    }

    pub fn property_label_count(&self) -> usize {
        self.property_index.label_count()
    }

    pub fn class_label_count(&self) -> usize {
        self.class_index.label_count()
    }

    pub fn vectors(&self) -> Option<&WordVectors> {
        self.vectors.as_ref()
    }

    pub(crate) fn lexicon_kinds(&self, stemmed: &str) -> u8 {
        self.lexicon.get(stemmed).copied().unwrap_or(0)
    }

    pub(crate) fn max_lexicon_tokens(&self) -> usize {
        self.max_lexicon_tokens
    }

    fn normalized_reference(reference: &str) -> Result<String> {
        let norm = normalize(reference);
        if norm.is_empty() {
            return Err(Error::argument("empty reference"));
        }
        Ok(norm)
    }

    fn finish(uris: &[String], scored: Vec<(u32, f64)>, top_k: usize) -> Vec<ScoredCandidate> {
        let mut out: Vec<ScoredCandidate> = scored
            .into_iter()
            .map(|(term, conf)| ScoredCandidate::new(uris[term as usize].clone(), conf))
            .collect();
        out.sort_by(candidate_order);
        out.truncate(top_k);
        out
    }

    pub fn match_entity(&self, reference: &str, top_k: usize) -> Result<Vec<ScoredCandidate>> {
        let q = Self::normalized_reference(reference)?;
        Ok(Self::finish(
            &self.entity_uris,
            self.entity_index.search(&q, usize::MAX),
            top_k,
        ))
    }

    pub fn match_class(&self, reference: &str, top_k: usize) -> Result<Vec<ScoredCandidate>> {
        let q = Self::normalized_reference(reference)?;
        Ok(Self::finish(
            &self.entity_uris,
            self.class_index.search(&q, usize::MAX),
            top_k,
        ))
    }

    /// Nearest properties in the vector space, or string similarity when no
    /// vectors are loaded or the reference has no known token.
    pub fn match_property(&self, reference: &str, top_k: usize) -> Result<Vec<ScoredCandidate>> {
        let q = Self::normalized_reference(reference)?;
        let query_vec = self.vectors.as_ref().and_then(|v| v.mean(&q));
        let Some(qv) = query_vec else {
            return Ok(Self::finish(
                &self.property_uris,
                self.property_index.search(&q, usize::MAX),
                top_k,
            ));
        };
        let mut best: BTreeMap<u32, f64> = BTreeMap::new();
        for (doc, pv) in self.property_index.docs.iter().zip(&self.property_vectors) {
            let sim = if doc.label == q {
                1.0
            } else {
                match pv {
                    Some(pv) => cosine(&qv, pv).clamp(0.0, 1.0),
                    None => 0.0,
                }
            };
            if sim > 0.0 {
                let e = best.entry(doc.term).or_insert(0.0);
                *e = e.max(sim);
            }
        }
        Ok(Self::finish(
            &self.property_uris,
            best.into_iter().collect(),
            top_k,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphConfig;

    const FIXTURE: &str = "\
<http://ex.org/Tesla> <http://ex.org/foundedBy> <http://ex.org/Elon_Musk> .
<http://ex.org/SpaceX> <http://ex.org/founder> <http://ex.org/Elon_Musk> .
<http://ex.org/Elon_Musk> <http://ex.org/bornIn> <http://ex.org/Pretoria> .
<http://ex.org/Elon_Musk> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/Person> .
<http://ex.org/Tesla> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/Car> .
";

    fn catalog(vectors: Option<&str>) -> TermCatalog {
        let kg = KnowledgeGraph::load(FIXTURE, GraphConfig::default()).unwrap();
        TermCatalog::build(&kg, vectors.map(|v| WordVectors::parse(v).unwrap())).unwrap()
    }

    #[test]
    fn counts() {
        let kg = KnowledgeGraph::load(
            &FIXTURE.lines().take(3).collect::<Vec<_>>().join("\n"),
            GraphConfig::default(),
        )
        .unwrap();
        let c = TermCatalog::build(&kg, None).unwrap();
        assert_eq!(c.entity_label_count(), 4);
        assert_eq!(c.property_label_count(), 3);
        assert!(c.vectors().is_none());
    }

    #[test]
    fn exact_entity_match_is_one() {
        let c = catalog(None);
        let got = c.match_entity("Tesla", 500).unwrap();
        assert_eq!(got[0], ScoredCandidate::new("http://ex.org/Tesla", 1.0));
    }

    #[test]
    fn empty_reference_is_rejected() {
        let c = catalog(None);
        assert!(matches!(c.match_entity("", 5), Err(Error::Argument(_))));
        assert!(matches!(
            c.match_entity("  ?! ", 5),
            Err(Error::Argument(_))
        ));
        assert!(matches!(c.match_property("", 5), Err(Error::Argument(_))));
    }

    #[test]
    fn fuzzy_entity_match_is_partial() {
        let c = catalog(None);
        let got = c.match_entity("Teslaa", 500).unwrap();
        let tesla = got.iter().find(|s| s.uri == "http://ex.org/Tesla").unwrap();
        assert!(tesla.confidence > 0.0 && tesla.confidence < 1.0);
        assert_eq!(got[0].uri, "http://ex.org/Tesla");
    }

    #[test]
    fn class_matching() {
        let c = catalog(None);
        let cars = c.match_class("cars", 10).unwrap();
        assert_eq!(cars.len(), 1);
        assert_eq!(cars[0].uri, "http://ex.org/Car");
        assert!(cars[0].confidence < 1.0);
        let person = c.match_class("person", 10).unwrap();
        assert_eq!(person[0], ScoredCandidate::new("http://ex.org/Person", 1.0));
        assert!(c.match_class("quantum", 10).unwrap().is_empty());
        // Non-class entities are never class candidates.
        assert!(c.match_class("tesla", 10).unwrap().is_empty());
    }

    #[test]
    fn property_string_fallback() {
        let c = catalog(None);
        let got = c.match_property("founded by", 50).unwrap();
        assert_eq!(got[0], ScoredCandidate::new("http://ex.org/foundedBy", 1.0));
        assert!(c.match_property("zzz", 50).unwrap().is_empty());
    }

    #[test]
    fn property_vectors() {
        let vecs =
            "founded 1 0 0 0\nby 0.28 0.96 0 0\nfounder 0.9 0 0.4358898943540674 0\nborn 0 0 0 1\n";
        let c = catalog(Some(vecs));
        let got = c.match_property("founded", 50).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].uri, "http://ex.org/founder");
        assert!((got[0].confidence - 0.9).abs() < 1e-12);
        assert_eq!(got[1].uri, "http://ex.org/foundedBy");
        assert!((got[1].confidence - 0.8).abs() < 1e-12);
        // Identical label.
        let got = c.match_property("founder", 50).unwrap();
        assert_eq!(got[0], ScoredCandidate::new("http://ex.org/founder", 1.0));
        // No in-vocabulary token and no string match.
        assert!(c.match_property("qwerty", 50).unwrap().is_empty());
    }

    #[test]
    fn vector_file_parsing() {
        let v = WordVectors::parse("alpha 1 2 3 4\nbeta 0 0 0 1\n").unwrap();
        assert_eq!((v.len(), v.dim()), (2, 4));
        let v = WordVectors::parse("2 3\nalpha 1 2 3\nbeta 0 0 1\n").unwrap();
        assert_eq!((v.len(), v.dim()), (2, 3));
        assert!(matches!(
            WordVectors::parse("alpha 1 2 3 4\nbeta 0 0 1\n"),
            Err(Error::Vectors { line: 2, .. })
        ));
        assert!(matches!(
            WordVectors::parse("alpha x\n"),
            Err(Error::Vectors { line: 1, .. })
        ));
    }

    #[test]
    fn cosine_clamps_negative_similarity() {
        let vecs = "up 1 0\ndown -1 0\n";
        let kg = KnowledgeGraph::load("<a:x> <a:down> <a:y> .\n", GraphConfig::default()).unwrap();
        let c = TermCatalog::build(&kg, Some(WordVectors::parse(vecs).unwrap())).unwrap();
        assert!(c.match_property("up", 50).unwrap().is_empty());
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }
}
