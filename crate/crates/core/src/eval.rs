//! Dataset records, QALD-style scoring, macro aggregation and the
//! interpretation presets used by evaluation runs and ablations.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::catalog::{MatchLimits, ScoredCandidate};
use crate::error::{Error, Result};
use crate::inference::{answer_question, Answer, AnswerValue, InferenceConfig};
use crate::question::{
    detect_question_type, extract_references, interpret_model, load_gold_interpretation,
    GoldInterpretation, GoldMode, InterpretedHop, InterpretedQuestion, QuestionType,
};
use crate::Engine;

/// Gold answer of a record; its variant must match the question type.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Gold {
    Set(Vec<String>),
    Count(u64),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QARecord {
    pub id: String,
    pub question: String,
    #[cfg_attr(feature = "serde", serde(rename = "type"))]
    pub question_type: QuestionType,
    pub gold: Gold,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub gold_interpretation: Option<GoldInterpretation>,
}

impl QARecord {
    pub fn validate(&self) -> Result<()> {
        let ok = matches!(
            (self.question_type, &self.gold),
            (QuestionType::Select, Gold::Set(_))
                | (QuestionType::Count, Gold::Count(_))
                | (QuestionType::Ask, Gold::Bool(_))
        );
        if !ok {
            return Err(Error::argument(alloc::format!(
                "record {:?}: gold answer does not match type {}",
                self.id,
                self.question_type
            )));
        }
        if self.id.is_empty() {
            return Err(Error::argument("record with empty id"));
        }
        Ok(())
    }
}

/// Validates every record and checks id uniqueness. Errors name the
/// offending record index.
pub fn validate_records(records: &[QARecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for (i, r) in records.iter().enumerate() {
        r.validate()
            .map_err(|e| Error::argument(alloc::format!("record {i}: {e}")))?;
        if !seen.insert(r.id.as_str()) {
            return Err(Error::argument(alloc::format!(
                "record {i}: duplicate id {:?}",
                r.id
            )));
        }
    }
    Ok(())
}

/// Precision and recall of one answer.
///
/// Both are 0 when the predicted type differs from the gold type, when a
/// SELECT prediction is empty but the gold set is not, and when a COUNT or
/// ASK answer differs from the gold value. An empty prediction for an empty
/// gold set scores (1, 1).
pub fn score_question(predicted: &Answer, record: &QARecord) -> (f64, f64) {
    if predicted.question_type != record.question_type {
        return (0.0, 0.0);
    }
    match (&predicted.value, &record.gold) {
        (AnswerValue::Entities(pred), Gold::Set(gold)) => {
            let pred: BTreeSet<&str> = pred.iter().map(String::as_str).collect();
            let gold: BTreeSet<&str> = gold.iter().map(String::as_str).collect();
            match (pred.is_empty(), gold.is_empty()) {
                (true, true) => (1.0, 1.0),
                (true, false) | (false, true) => (0.0, 0.0),
                (false, false) => {
                    let hits = pred.intersection(&gold).count() as f64;
                    (hits / pred.len() as f64, hits / gold.len() as f64)
                }
            }
        }
        (AnswerValue::Count(p), Gold::Count(g)) if p == g => (1.0, 1.0),
        (AnswerValue::Bool(p), Gold::Bool(g)) if p == g => (1.0, 1.0),
        _ => (0.0, 0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuestionScore {
    pub id: String,
    pub precision: f64,
    pub recall: f64,
    /// Seconds spent interpreting and answering the question.
    pub runtime: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MacroScores {
    pub p: f64,
    pub r: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RuntimeStats {
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

impl RuntimeStats {
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::argument("no runtime samples"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Ok(Self {
            min: sorted[0],
            median,
            mean: samples.iter().sum::<f64>() / n as f64,
            max: sorted[n - 1],
        })
    }
}

/// F-measure of macro precision and recall; 0 when both are 0.
pub fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    #[cfg_attr(feature = "serde", serde(rename = "macro"))]
    pub macro_scores: MacroScores,
    pub runtime: RuntimeStats,
    pub per_question: Vec<QuestionScore>,
}

impl EvalReport {
    /// Macro-averages per-question rows, in their given order.
    pub fn from_scores(per_question: Vec<QuestionScore>) -> Result<Self> {
        if per_question.is_empty() {
            return Err(Error::argument("cannot report on an empty record list"));
        }
        let n = per_question.len() as f64;
        let p = per_question.iter().map(|q| q.precision).sum::<f64>() / n;
        let r = per_question.iter().map(|q| q.recall).sum::<f64>() / n;
        let times: Vec<f64> = per_question.iter().map(|q| q.runtime).collect();
        Ok(Self {
            macro_scores: MacroScores {
                p,
                r,
                f: f_measure(p, r),
            },
            runtime: RuntimeStats::from_samples(&times)?,
            per_question,
        })
    }
}

/// Where one interpretation channel comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSource {
    /// Gold URIs only.
    Gt,
    /// Gold URIs plus a down-weighted candidate tail.
    GtSpanPlus,
    /// The heuristic parser and the catalog matcher.
    Parsed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeSource {
    Gt,
    Detected,
}

/// Source of every part of an interpreted question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpretationPlan {
    pub question_type: TypeSource,
    pub entities: ChannelSource,
    pub properties: ChannelSource,
    /// `None` drops class references and disables the class filter.
    pub classes: Option<ChannelSource>,
}

impl InterpretationPlan {
    pub fn needs_gold(&self) -> bool {
        [Some(self.entities), Some(self.properties), self.classes]
            .into_iter()
            .flatten()
            .any(|c| c != ChannelSource::Parsed)
    }

    fn all_parsed(&self) -> bool {
        self.entities == ChannelSource::Parsed
            && self.properties == ChannelSource::Parsed
            && self.classes == Some(ChannelSource::Parsed)
    }
}

/// Evaluation modes of the `eval` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// Full pipeline from the question text.
    Auto,
    /// Gold interpretation throughout.
    Gt,
    /// Gold interpretation with a down-weighted candidate tail on every channel.
    GtSpanPlus,
}

impl EvalMode {
    pub fn plan(self) -> InterpretationPlan {
        let (question_type, channel) = match self {
            EvalMode::Auto => (TypeSource::Detected, ChannelSource::Parsed),
            EvalMode::Gt => (TypeSource::Gt, ChannelSource::Gt),
            EvalMode::GtSpanPlus => (TypeSource::Gt, ChannelSource::GtSpanPlus),
        };
        InterpretationPlan {
            question_type,
            entities: channel,
            properties: channel,
            classes: Some(channel),
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalMode::Auto => "auto",
            EvalMode::Gt => "gt",
            EvalMode::GtSpanPlus => "gt-span-plus",
        })
    }
}

impl FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(EvalMode::Auto),
            "gt" => Ok(EvalMode::Gt),
            "gt-span-plus" => Ok(EvalMode::GtSpanPlus),
            _ => Err(Error::argument(alloc::format!(
                "unknown evaluation mode {s:?}"
            ))),
        }
    }
}

/// Ablation presets: each fixes one interpretation channel to a gold,
/// gold-plus-tail or parsed source and keeps the rest gold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AblationSetup {
    GtAll,
    QuestionType,
    IgnoreClasses,
    ClassesSpan,
    EntitiesSpan,
    EntitiesParsed,
    PredicatesSpan,
    PredicatesParsed,
}

impl AblationSetup {
    pub const ALL: [AblationSetup; 8] = [
        AblationSetup::GtAll,
        AblationSetup::QuestionType,
        AblationSetup::IgnoreClasses,
        AblationSetup::ClassesSpan,
        AblationSetup::EntitiesSpan,
        AblationSetup::EntitiesParsed,
        AblationSetup::PredicatesSpan,
        AblationSetup::PredicatesParsed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationSetup::GtAll => "gt-all",
            AblationSetup::QuestionType => "question-type",
            AblationSetup::IgnoreClasses => "ignore-classes",
            AblationSetup::ClassesSpan => "classes-span",
            AblationSetup::EntitiesSpan => "entities-span",
            AblationSetup::EntitiesParsed => "entities-parsed",
            AblationSetup::PredicatesSpan => "predicates-span",
            AblationSetup::PredicatesParsed => "predicates-parsed",
        }
    }

    pub fn plan(self) -> InterpretationPlan {
        use ChannelSource::*;
        let mut plan = EvalMode::Gt.plan();
        match self {
            AblationSetup::GtAll => {}
            AblationSetup::QuestionType => plan.question_type = TypeSource::Detected,
            AblationSetup::IgnoreClasses => plan.classes = None,
            AblationSetup::ClassesSpan => plan.classes = Some(GtSpanPlus),
            AblationSetup::EntitiesSpan => plan.entities = GtSpanPlus,
            AblationSetup::EntitiesParsed => plan.entities = Parsed,
            AblationSetup::PredicatesSpan => plan.properties = GtSpanPlus,
            AblationSetup::PredicatesParsed => plan.properties = Parsed,
        }
        plan
    }
}

impl fmt::Display for AblationSetup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationSetup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::argument(alloc::format!("unknown ablation setup {s:?}")))
    }
}

type Lists = Vec<Vec<ScoredCandidate>>;

/// Places per-hop lists from the parser onto the gold hop structure. Hops
/// are aligned by position; surplus parsed hops merge into the last gold hop.
fn align(parsed: Vec<Lists>, gold_hops: usize) -> Vec<Lists> {
    let mut out: Vec<Lists> = (0..gold_hops).map(|_| Vec::new()).collect();
    if gold_hops == 0 {
        return out;
    }
    for (i, lists) in parsed.into_iter().enumerate() {
        out[i.min(gold_hops - 1)].extend(lists);
    }
    out
}

/// Builds the interpreted question a record is answered from under `plan`.
///
/// Any gold-sourced channel requires the record's gold interpretation.
pub fn assemble_interpretation(
    record: &QARecord,
    plan: &InterpretationPlan,
    engine: &Engine,
    limits: MatchLimits,
) -> Result<InterpretedQuestion> {
    let question_type = match plan.question_type {
        TypeSource::Gt => record.question_type,
        TypeSource::Detected => detect_question_type(&record.question)?,
    };
    if plan.all_parsed() {
        let model = extract_references(&record.question, &engine.catalog)?;
        let mut iq = interpret_model(&model, &engine.catalog, limits)?;
        iq.question_type = question_type;
        return Ok(iq);
    }
    let gold = record.gold_interpretation.as_ref().ok_or_else(|| {
        Error::Config(alloc::format!(
            "record {:?} has no gold interpretation",
            record.id
        ))
    })?;
    let gold_iq = |mode: GoldMode| {
        load_gold_interpretation(
            question_type,
            gold,
            mode,
            &engine.graph,
            Some(&engine.catalog),
            limits,
        )
    };
    let gt = gold_iq(GoldMode::Gt)?;
    let span = gold_iq(GoldMode::span_plus())?;
    let parsed = if [Some(plan.entities), Some(plan.properties), plan.classes]
        .contains(&Some(ChannelSource::Parsed))
    {
        let model = extract_references(&record.question, &engine.catalog)?;
        Some(interpret_model(&model, &engine.catalog, limits)?)
    } else {
        None
    };

    let h = gold.hops.len();
    let pick = |source: Option<ChannelSource>, get: fn(&InterpretedHop) -> &Lists| -> Vec<Lists> {
        match source {
            None => (0..h).map(|_| Vec::new()).collect(),
            Some(ChannelSource::Gt) => gt.hops.iter().map(|x| get(x).clone()).collect(),
            Some(ChannelSource::GtSpanPlus) => span.hops.iter().map(|x| get(x).clone()).collect(),
            Some(ChannelSource::Parsed) => align(
                parsed
                    .as_ref()
                    .map(|p| p.hops.iter().map(|x| get(x).clone()).collect())
                    .unwrap_or_default(),
                h,
            ),
        }
    };
    let entities = pick(Some(plan.entities), |x| &x.entities);
    let properties = pick(Some(plan.properties), |x| &x.properties);
    let classes = pick(plan.classes, |x| &x.classes);
    let hops = entities
        .into_iter()
        .zip(properties)
        .zip(classes)
        .map(|((entities, properties), classes)| InterpretedHop {
            entities,
            properties,
            classes,
        })
        .collect();
    Ok(InterpretedQuestion {
        question_type,
        hops,
    })
}

/// Interprets and answers one record. The class filter is switched off
/// when the plan drops classes.
pub fn answer_record(
    record: &QARecord,
    plan: &InterpretationPlan,
    engine: &Engine,
    cfg: &InferenceConfig,
    limits: MatchLimits,
) -> Result<Answer> {
    let iq = assemble_interpretation(record, plan, engine, limits)?;
    let mut cfg = *cfg;
    if plan.classes.is_none() {
        cfg.apply_class_filter = false;
    }
    answer_question(&engine.graph, &iq, &cfg)
}
