//! Answer inference: confidence propagation over subgraph slices, score
//! aggregation, hop chaining and the type-specific answer functions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::catalog::ScoredCandidate;
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, PropertyId, SubgraphMatrices};
use crate::question::{InterpretedHop, InterpretedQuestion, QuestionType};
use crate::sparse::SparseSymmetric;

/// How the propagated activation mass is normalized before aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NormMode {
    /// `W <- 2W / (l + m)`.
    #[default]
    #[cfg_attr(feature = "serde", serde(rename = "alg1"))]
    Alg1,
    /// Per entity, `W` divided by the number of distinct weighted edges
    /// (edge, property) that delivered mass to it.
    #[cfg_attr(feature = "serde", serde(rename = "edge-mean"))]
    EdgeMean,
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::Alg1 => "alg1",
            NormMode::EdgeMean => "edge-mean",
        })
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg1" => Ok(NormMode::Alg1),
            "edge-mean" => Ok(NormMode::EdgeMean),
            _ => Err(Error::argument(alloc::format!("unknown norm mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InferenceConfig {
    /// Minimum score for an entity to stay in a hop's answer set.
    pub threshold: f64,
    pub norm_mode: NormMode,
    pub apply_class_filter: bool,
    pub max_hops: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            norm_mode: NormMode::Alg1,
            apply_class_filter: true,
            max_hops: 2,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(alloc::format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if self.max_hops == 0 {
            return Err(Error::Config("max_hops must be at least 1".into()));
        }
        Ok(())
    }
}

fn check_rows(rows: &[Vec<f64>], width: usize, what: &'static str) -> Result<()> {
    for row in rows {
        if row.len() != width {
            return Err(Error::Dimension {
                expected: width,
                actual: row.len(),
                context: what,
            });
        }
        if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::argument(alloc::format!(
                "{what}: activation {v} outside [0, 1]"
            )));
        }
    }
    Ok(())
}

/// `l` entity-reference activation rows over the `n` local entities.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMatrix {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl ActivationMatrix {
    pub fn new(n: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_rows(&rows, n, "entity activation row")?;
        Ok(Self { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// `m` property-reference activation rows over the `k` subgraph slices.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyActivation {
    k: usize,
    rows: Vec<Vec<f64>>,
}

impl PropertyActivation {
    pub fn new(k: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        check_rows(&rows, k, "property activation row")?;
        Ok(Self { k, rows })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Accumulators of one message-passing run, before aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct MessagePassState {
    /// Raw activation mass per entity.
    pub w: Vec<f64>,
    /// Entity references that delivered nonzero activation, per entity.
    pub n_e: Vec<u32>,
    /// Property references that delivered nonzero activation, per entity.
    pub n_p: Vec<u32>,
    /// Activations accumulated over property references, `l x n`.
    pub y_e: Vec<Vec<f64>>,
    /// Distinct (edge, property) pairs that carried mass into each entity.
    pub edge_contributions: Vec<u32>,
}

impl MessagePassState {
    pub fn zeros(l: usize, n: usize) -> Self {
        Self {
            w: vec![0.0; n],
            n_e: vec![0; n],
            n_p: vec![0; n],
            y_e: vec![vec![0.0; n]; l],
            edge_contributions: vec![0; n],
        }
    }
}

/// Property update: `S_j = sum_i P_j[i] * S_i`.
pub fn property_update(p_j: &[f64], s: &SubgraphMatrices) -> Result<SparseSymmetric> {
    if p_j.len() != s.k() {
        return Err(Error::Dimension {
            expected: s.k(),
            actual: p_j.len(),
            context: "property activation vs slice count",
        });
    }
    let mats: Vec<&SparseSymmetric> = s.slices().collect();
    SparseSymmetric::weighted_sum(s.n(), &mats, p_j)
}

/// Entity update: every activation row times the combined adjacency.
pub fn entity_update(e: &ActivationMatrix, s_j: &SparseSymmetric) -> Result<Vec<Vec<f64>>> {
    if e.n() != s_j.dim() {
        return Err(Error::Dimension {
            expected: s_j.dim(),
            actual: e.n(),
            context: "activation width vs matrix",
        });
    }
    e.rows().iter().map(|row| s_j.left_mul(row)).collect()
}

/// Runs the property and entity updates for every property reference and
/// collects the accumulators.
pub fn propagate(
    s: &SubgraphMatrices,
    e: &ActivationMatrix,
    p: &PropertyActivation,
) -> Result<MessagePassState> {
    let n = s.n();
    if e.n() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: e.n(),
            context: "entity activation width",
        });
    }
    if p.k() != s.k() {
        return Err(Error::Dimension {
            expected: s.k(),
            actual: p.k(),
            context: "property activation width",
        });
    }
    let mut state = MessagePassState::zeros(e.l(), n);

    for p_j in p.rows() {
        let s_j = property_update(p_j, s)?;
        let y = entity_update(e, &s_j)?;
        let mut delivered = vec![false; n];
        for (row, acc) in y.iter().zip(state.y_e.iter_mut()) {
            for (v, &val) in row.iter().enumerate() {
                state.w[v] += val;
                acc[v] += val;
                delivered[v] |= val > 0.0;
            }
        }
        for (v, hit) in delivered.into_iter().enumerate() {
            state.n_p[v] += u32::from(hit);
        }
    }
    for row in &state.y_e {
        for (v, &val) in row.iter().enumerate() {
            state.n_e[v] += u32::from(val > 0.0);
        }
    }

    // A (slice, neighbor) pair carries mass when the slice is weighted by
    // some property reference and the neighbor is active in some entity row.
    let active_slice: Vec<bool> = (0..s.k())
        .map(|i| p.rows().iter().any(|row| row[i] > 0.0))
        .collect();
    let active_entity: Vec<bool> = (0..n)
        .map(|u| e.rows().iter().any(|row| row[u] > 0.0))
        .collect();
    for (slice, _) in s.slices().zip(&active_slice).filter(|(_, a)| **a) {
        for (u, _) in active_entity.iter().enumerate().filter(|(_, a)| **a) {
            for (v, w) in slice.row(u) {
                if w > 0.0 {
                    state.edge_contributions[v] += 1;
                }
            }
        }
    }
    Ok(state)
}

/// Normalizes the activation mass and combines it with the reference
/// counts: `A = (W' + N_E + N_P) / (l + m + 1)`.
pub fn aggregate_scores(
    state: &MessagePassState,
    l: usize,
    m: usize,
    norm_mode: NormMode,
) -> Result<Vec<f64>> {
    if l + m == 0 {
        return Err(Error::precondition(
            "no entity or property references (l + m = 0)",
        ));
    }
    let n = state.w.len();
    for (len, what) in [
        (state.n_e.len(), "n_e"),
        (state.n_p.len(), "n_p"),
        (state.edge_contributions.len(), "edge_contributions"),
    ] {
        if len != n {
            return Err(Error::Dimension {
                expected: n,
                actual: len,
                context: what,
            });
        }
    }
    if state.n_e.iter().any(|&c| c as usize > l) || state.n_p.iter().any(|&c| c as usize > m) {
        return Err(Error::precondition("reference counts exceed l or m"));
    }
    let denom = (l + m + 1) as f64;
    Ok((0..n)
        .map(|v| {
            let w = match norm_mode {
                NormMode::Alg1 => 2.0 * state.w[v] / (l + m) as f64,
                NormMode::EdgeMean => match state.edge_contributions[v] {
                    0 => 0.0,
                    c => state.w[v] / c as f64,
                },
            };
            (w + state.n_e[v] as f64 + state.n_p[v] as f64) / denom
        })
        .collect())
}

/// Full message passing: propagation followed by aggregation.
pub fn message_pass(
    s: &SubgraphMatrices,
    e: &ActivationMatrix,
    p: &PropertyActivation,
    norm_mode: NormMode,
) -> Result<Vec<f64>> {
    let state = propagate(s, e, p)?;
    aggregate_scores(&state, e.l(), p.m(), norm_mode)
}

/// Scored entities produced by one hop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnswerSet {
    pub scores: BTreeMap<EntityId, f64>,
    pub thresholded: bool,
    pub class_filtered: bool,
    /// No property reference had a usable candidate.
    pub no_match: bool,
}

impl AnswerSet {
    pub fn no_match() -> Self {
        Self {
            no_match: true,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, entity: EntityId) -> Option<f64> {
        self.scores.get(&entity).copied()
    }

    /// Scored URIs, best first, ties by ascending URI.
    pub fn ranked(&self, kg: &KnowledgeGraph) -> Result<Vec<ScoredEntity>> {
        let mut out = self
            .scores
            .iter()
            .map(|(&e, &score)| {
                Ok(ScoredEntity {
                    uri: String::from(kg.entity_uri(e)?),
                    score,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.uri.as_bytes().cmp(b.uri.as_bytes()))
        });
        Ok(out)
    }
}

fn positive_ids<T: Ord + Copy>(
    lists: &[Vec<ScoredCandidate>],
    resolve: impl Fn(&str) -> Option<T>,
) -> Vec<T> {
    let mut ids: Vec<T> = lists
        .iter()
        .flatten()
        .filter(|c| c.confidence > 0.0)
        .filter_map(|c| resolve(&c.uri))
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Answers one hop. Entity references become activation rows with their
/// candidate confidences; a prior answer set becomes one extra row with its
/// scores clamped to `[0, 1]`.
pub fn answer_hop(
    kg: &KnowledgeGraph,
    hop: &InterpretedHop,
    prior: Option<&AnswerSet>,
    cfg: &InferenceConfig,
) -> Result<AnswerSet> {
    cfg.validate()?;
    let properties: Vec<PropertyId> = positive_ids(&hop.properties, |u| kg.property_id(u));
    if properties.is_empty() {
        return Ok(AnswerSet::no_match());
    }
    let mut seeds: Vec<EntityId> = positive_ids(&hop.entities, |u| kg.entity_id(u));
    if let Some(prior) = prior {
        seeds.extend(
            prior
                .scores
                .iter()
                .filter(|(_, s)| **s > 0.0)
                .map(|(e, _)| *e),
        );
    }
    if seeds.is_empty() {
        return Ok(AnswerSet::default());
    }
    let sg = kg.extract_subgraph(&seeds, &properties)?;
    let n = sg.n();

    let mut entity_rows = Vec::with_capacity(hop.entities.len() + 1);
    for list in &hop.entities {
        let mut row = vec![0.0; n];
        for c in list {
            if let Some(i) = kg.entity_id(&c.uri).and_then(|e| sg.local_index(e)) {
                row[i] = c.confidence;
            }
        }
        entity_rows.push(row);
    }
    if let Some(prior) = prior {
        let mut row = vec![0.0; n];
        for (&e, &score) in &prior.scores {
            if let Some(i) = sg.local_index(e) {
                row[i] = score.clamp(0.0, 1.0);
            }
        }
        entity_rows.push(row);
    }
    let mut property_rows = Vec::with_capacity(hop.properties.len());
    for list in &hop.properties {
        let mut row = vec![0.0; sg.k()];
        for c in list {
            if let Some(i) = kg.property_id(&c.uri).and_then(|p| sg.slice_index(p)) {
                row[i] = c.confidence;
            }
        }
        property_rows.push(row);
    }

    let e = ActivationMatrix::new(n, entity_rows)?;
    let p = PropertyActivation::new(sg.k(), property_rows)?;
    let scores = message_pass(&sg, &e, &p, cfg.norm_mode)?;

    let mut answer = AnswerSet {
        thresholded: true,
        ..Default::default()
    };
    for (i, score) in scores.into_iter().enumerate() {
        if score > 0.0 && score >= cfg.threshold {
            answer.scores.insert(sg.local_entities[i], score);
        }
    }
    if cfg.apply_class_filter {
        let classes: Vec<EntityId> = positive_ids(&hop.classes, |u| kg.entity_id(u));
        if !classes.is_empty() {
            let mut keep = BTreeMap::new();
            for (e, s) in answer.scores {
                if kg
                    .classes_of(e)?
                    .iter()
                    .any(|c| classes.binary_search(c).is_ok())
                {
                    keep.insert(e, s);
                }
            }
            answer.scores = keep;
            answer.class_filtered = true;
        }
    }
    Ok(answer)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoredEntity {
    pub uri: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum AnswerValue {
    Entities(Vec<String>),
    Count(u64),
    Bool(bool),
}

/// Final answer with the scored entity set it was derived from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Answer {
    pub question_type: QuestionType,
    pub value: AnswerValue,
    /// Final-hop entities, best first.
    pub entities: Vec<ScoredEntity>,
    /// Ranked answer set of every hop, in order.
    pub hops: Vec<Vec<ScoredEntity>>,
}

impl Answer {
    pub fn empty(question_type: QuestionType) -> Self {
        Self::from_entities(question_type, Vec::new(), Vec::new())
    }

    fn from_entities(
        question_type: QuestionType,
        entities: Vec<ScoredEntity>,
        hops: Vec<Vec<ScoredEntity>>,
    ) -> Self {
        let value = match question_type {
            QuestionType::Select => {
                AnswerValue::Entities(entities.iter().map(|e| e.uri.clone()).collect())
            }
            QuestionType::Count => AnswerValue::Count(entities.len() as u64),
            QuestionType::Ask => AnswerValue::Bool(!entities.is_empty()),
        };
        Self {
            question_type,
            value,
            entities,
            hops,
        }
    }
}

/// Chains hops and applies the aggregation for the question type: SELECT
/// returns the ranked set, COUNT its size, ASK whether it is non-empty.
pub fn answer_question(
    kg: &KnowledgeGraph,
    iq: &InterpretedQuestion,
    cfg: &InferenceConfig,
) -> Result<Answer> {
    cfg.validate()?;
    if iq.hops.len() > cfg.max_hops {
        return Err(Error::precondition(alloc::format!(
            "{} hops exceed the maximum of {}",
            iq.hops.len(),
            cfg.max_hops
        )));
    }
    let mut prior: Option<AnswerSet> = None;
    let mut hops = Vec::with_capacity(iq.hops.len());
    for hop in &iq.hops {
        let answer = answer_hop(kg, hop, prior.as_ref(), cfg)?;
        hops.push(answer.ranked(kg)?);
        prior = Some(answer);
    }
    let entities = hops.last().cloned().unwrap_or_default();
    Ok(Answer::from_entities(iq.question_type, entities, hops))
}
