//! Question type detection, reference extraction and matching.
//!
//! The default parser is a heuristic: a rule cascade for the question type
//! and a longest-match scan of the catalog lexicon for references. Gold
//! annotations can be turned into an [`InterpretedQuestion`] directly with
//! [`load_gold_interpretation`].

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::catalog::{candidate_order, kind, MatchLimits, ScoredCandidate, TermCatalog};
use crate::error::{Error, Result};
use crate::graph::KnowledgeGraph;
use crate::text::{is_stopword, join, tokenize, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum QuestionType {
    Select,
    Ask,
    Count,
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuestionType::Select => "SELECT",
            QuestionType::Ask => "ASK",
            QuestionType::Count => "COUNT",
        })
    }
}

impl FromStr for QuestionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SELECT" => Ok(QuestionType::Select),
            "ASK" => Ok(QuestionType::Ask),
            "COUNT" => Ok(QuestionType::Count),
            _ => Err(Error::argument(alloc::format!(
                "unknown question type {s:?}"
            ))),
        }
    }
}

/// A reference span: the verbatim text and its byte range in the question.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Span {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hop {
    pub entity_refs: Vec<Span>,
    pub property_refs: Vec<Span>,
    pub class_refs: Vec<Span>,
}

impl Hop {
    pub fn is_empty(&self) -> bool {
        self.entity_refs.is_empty() && self.property_refs.is_empty() && self.class_refs.is_empty()
    }
}

/// Question type plus one or two hops of reference spans.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuestionModel {
    pub question_type: QuestionType,
    pub hops: Vec<Hop>,
}

/// Per-reference candidate lists for one hop.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterpretedHop {
    pub entities: Vec<Vec<ScoredCandidate>>,
    pub properties: Vec<Vec<ScoredCandidate>>,
    pub classes: Vec<Vec<ScoredCandidate>>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterpretedQuestion {
    pub question_type: QuestionType,
    pub hops: Vec<InterpretedHop>,
}

/// Rule cascade: a leading "how many" / "count" / "total number" is COUNT,
/// a leading auxiliary or copula is ASK, anything else is SELECT.
pub fn detect_question_type(question: &str) -> Result<QuestionType> {
    if question.trim().is_empty() {
        return Err(Error::argument("empty question"));
    }
    let toks = tokenize(question);
    let words: Vec<&str> = toks.iter().map(|t| t.lower.as_str()).collect();
    match words.as_slice() {
        ["how", "many", ..] | ["count", ..] | ["total", "number", ..] => Ok(QuestionType::Count),
        ["what", "is", "the", "total", "number", ..]
        | ["what", "is", "the", "number", "of", ..] => Ok(QuestionType::Count),
        [first, ..]
            if matches!(
                *first,
                "is" | "are" | "was" | "were" | "do" | "does" | "did"
            ) =>
        {
            Ok(QuestionType::Ask)
        }
        _ => Ok(QuestionType::Select),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RefKind {
    Entity,
    Property,
    Class,
}

#[derive(Debug, Clone)]
struct FoundRef {
    kind: RefKind,
    /// Token range, end exclusive.
    first: usize,
    last: usize,
}

fn scan_references(tokens: &[Token<'_>], catalog: &TermCatalog) -> Vec<FoundRef> {
    let stems: Vec<String> = tokens.iter().map(Token::stem).collect();
    let max_len = catalog.max_lexicon_tokens().max(1);
    let mut found = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut hit = None;
        for len in (1..=max_len.min(tokens.len() - i)).rev() {
            // A possessive marker ends a phrase.
            if tokens[i..i + len - 1].iter().any(|t| t.possessive) {
                continue;
            }
            let key = join(stems[i..i + len].iter().map(String::as_str));
            let kinds = catalog.lexicon_kinds(&key);
            if kinds == 0 || tokens[i..i + len].iter().all(|t| is_stopword(&t.lower)) {
                continue;
            }
            let kind = if kinds & kind::CLASS != 0 {
                RefKind::Class
            } else if kinds & kind::PROPERTY != 0 {
                RefKind::Property
            } else {
                RefKind::Entity
            };
            hit = Some(FoundRef {
                kind,
                first: i,
                last: i + len,
            });
            break;
        }
        match hit {
            Some(r) => {
                i = r.last;
                found.push(r);
            }
            None => i += 1,
        }
    }
    found
}

fn span_of(question: &str, tokens: &[Token<'_>], r: &FoundRef) -> Span {
    let start = tokens[r.first].start;
    let end = tokens[r.last - 1].end;
    Span {
        text: String::from(&question[start..end]),
        start,
        end,
    }
}

/// Index of the first reference whose property is bound to the question's
/// entities by an "of"-phrase (`founder of Tesla`) or a possessive
/// (`Tesla's founder`).
fn bound_property(tokens: &[Token<'_>], refs: &[FoundRef]) -> Option<usize> {
    let entity_at = |tok: usize| {
        refs.iter()
            .any(|r| r.kind == RefKind::Entity && r.first == tok)
    };
    for (idx, r) in refs.iter().enumerate() {
        if r.kind != RefKind::Property {
            continue;
        }
        let mut t = r.last;
        if tokens.get(t).is_some_and(|tok| tok.lower == "of") {
            t += 1;
            while tokens
                .get(t)
                .is_some_and(|tok| matches!(tok.lower.as_str(), "the" | "a" | "an"))
            {
                t += 1;
            }
            if entity_at(t) {
                return Some(idx);
            }
        }
        let possessive_owner = refs.iter().any(|e| {
            e.kind == RefKind::Entity && e.last == r.first && tokens[e.last - 1].possessive
        });
        if possessive_owner {
            return Some(idx);
        }
    }
    None
}

/// Extracts reference spans by a longest-match scan of the catalog lexicon
/// and groups them into hops.
///
/// A question becomes two hops when it has at least two property references
/// and at least one entity reference, and either
/// * a property is bound to an entity by "of" or a possessive; that property
///   and the entities form hop 1, the other properties hop 2; or
/// * the first reference is a property preceded only by function words
///   ("Which company ..."); it forms hop 2, everything else hop 1.
///
/// Class references placed before the first hop-1 reference constrain the
/// final answer and go to hop 2. Questions without any reference yield a
/// single empty hop.
pub fn extract_references(question: &str, catalog: &TermCatalog) -> Result<QuestionModel> {
    let question_type = detect_question_type(question)?;
    let tokens = tokenize(question);
    let refs = scan_references(&tokens, catalog);

    let n_props = refs.iter().filter(|r| r.kind == RefKind::Property).count();
    let first_entity = refs.iter().position(|r| r.kind == RefKind::Entity);

    // References assigned to hop 2; classes are placed once the split is known.
    let mut outer: BTreeSet<usize> = BTreeSet::new();
    if n_props >= 2 {
        if let Some(first_entity) = first_entity {
            if let Some(bound) = bound_property(&tokens, &refs) {
                outer.extend(
                    refs.iter()
                        .enumerate()
                        .filter(|(i, r)| r.kind == RefKind::Property && *i != bound)
                        .map(|(i, _)| i),
                );
            } else {
                let head = &refs[0];
                let lead_is_function_words =
                    tokens[..head.first].iter().all(|t| is_stopword(&t.lower));
                if head.kind == RefKind::Property && first_entity > 0 && lead_is_function_words {
                    outer.insert(0);
                }
            }
        }
    }

    let mut hops = alloc::vec![Hop::default()];
    if !outer.is_empty() {
        hops.push(Hop::default());
        let first_inner_tok = refs
            .iter()
            .enumerate()
            .filter(|(i, r)| r.kind != RefKind::Class && !outer.contains(i))
            .map(|(_, r)| r.first)
            .min()
            .unwrap_or(usize::MAX);
        for (i, r) in refs.iter().enumerate() {
            if r.kind == RefKind::Class && r.first < first_inner_tok {
                outer.insert(i);
            }
        }
    }

    for (i, r) in refs.iter().enumerate() {
        let hop = &mut hops[usize::from(outer.contains(&i))];
        let span = span_of(question, &tokens, r);
        match r.kind {
            RefKind::Entity => hop.entity_refs.push(span),
            RefKind::Property => hop.property_refs.push(span),
            RefKind::Class => hop.class_refs.push(span),
        }
    }

    Ok(QuestionModel {
        question_type,
        hops,
    })
}

/// Matches every reference of a question model against the catalog.
/// Unmatched references keep an empty candidate list.
pub fn interpret_model(
    model: &QuestionModel,
    catalog: &TermCatalog,
    limits: MatchLimits,
) -> Result<InterpretedQuestion> {
    let mut hops = Vec::with_capacity(model.hops.len());
    for hop in &model.hops {
        let mut ih = InterpretedHop::default();
        for s in &hop.entity_refs {
            ih.entities
                .push(catalog.match_entity(&s.text, limits.entities)?);
        }
        for s in &hop.property_refs {
            ih.properties
                .push(catalog.match_property(&s.text, limits.properties)?);
        }
        for s in &hop.class_refs {
            ih.classes
                .push(catalog.match_class(&s.text, limits.entities)?);
        }
        hops.push(ih);
    }
    Ok(InterpretedQuestion {
        question_type: model.question_type,
        hops,
    })
}

/// Type detection, reference extraction and matching in one step.
pub fn interpret(
    question: &str,
    catalog: &TermCatalog,
    limits: MatchLimits,
) -> Result<InterpretedQuestion> {
    let model = extract_references(question, catalog)?;
    interpret_model(&model, catalog, limits)
}

/// One gold URI of an annotated reference. Entries without a confidence are
/// the gold terms; entries carrying a confidence are distractors with their
/// raw matching score.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoldUri {
    pub uri: String,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoldReference {
    pub span: String,
    pub uris: Vec<GoldUri>,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoldHop {
    #[cfg_attr(feature = "serde", serde(default))]
    pub entities: Vec<GoldReference>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub properties: Vec<GoldReference>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub classes: Vec<GoldReference>,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GoldInterpretation {
    pub hops: Vec<GoldHop>,
}

/// How gold annotations become candidate lists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GoldMode {
    /// Gold URIs only, at confidence 1.0.
    Gt,
    /// Gold URIs at 1.0 plus a low-confidence tail: explicit distractors and
    /// (when a catalog is given) the catalog's matches for the gold span,
    /// all scaled by `delta`.
    GtSpanPlus { delta: f64 },
}

impl GoldMode {
    pub const DEFAULT_DELTA: f64 = 0.5;

    pub fn span_plus() -> Self {
        GoldMode::GtSpanPlus {
            delta: Self::DEFAULT_DELTA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Channel {
    Entity,
    Property,
    Class,
}

/// Candidate list for one gold reference.
pub(crate) fn gold_candidates(
    reference: &GoldReference,
    channel: Channel,
    mode: GoldMode,
    catalog: Option<&TermCatalog>,
    limits: MatchLimits,
) -> Result<Vec<ScoredCandidate>> {
    let mut out: Vec<ScoredCandidate> = Vec::new();
    let gold: BTreeSet<&str> = reference
        .uris
        .iter()
        .filter(|u| u.confidence.is_none())
        .map(|u| u.uri.as_str())
        .collect();
    out.extend(gold.iter().map(|u| ScoredCandidate::new(*u, 1.0)));
    if let GoldMode::GtSpanPlus { delta } = mode {
        let mut seen: BTreeSet<String> = gold.iter().map(|u| String::from(*u)).collect();
        for u in reference.uris.iter() {
            if let Some(c) = u.confidence {
                if seen.insert(u.uri.clone()) {
                    out.push(ScoredCandidate::new(
                        u.uri.clone(),
                        delta * c.clamp(0.0, 1.0),
                    ));
                }
            }
        }
        if let Some(catalog) = catalog {
            let matched = match channel {
                Channel::Entity => catalog.match_entity(&reference.span, limits.entities),
                Channel::Property => catalog.match_property(&reference.span, limits.properties),
                Channel::Class => catalog.match_class(&reference.span, limits.entities),
            };
            // An unmatchable span contributes no tail.
            for c in matched.unwrap_or_default() {
                if seen.insert(c.uri.clone()) {
                    out.push(ScoredCandidate::new(c.uri, delta * c.confidence));
                }
            }
        }
        out.retain(|c| c.confidence > 0.0);
    }
    out.sort_by(candidate_order);
    Ok(out)
}

/// Reports every URI in the annotation that the graph does not know.
pub fn check_gold_uris(gold: &GoldInterpretation, kg: &KnowledgeGraph) -> Result<()> {
    let mut missing: Vec<String> = Vec::new();
    for hop in &gold.hops {
        let entity_refs = hop.entities.iter().chain(&hop.classes);
        for r in entity_refs {
            for u in &r.uris {
                if kg.entity_id(&u.uri).is_none() {
                    missing.push(u.uri.clone());
                }
            }
        }
        for r in &hop.properties {
            for u in &r.uris {
                if kg.property_id(&u.uri).is_none() {
                    missing.push(u.uri.clone());
                }
            }
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        missing.sort();
        missing.dedup();
        Err(Error::Unresolved(missing))
    }
}

/// Builds an interpreted question from gold annotations.
///
/// Every referenced URI must exist in `kg`. In [`GoldMode::Gt`] each
/// candidate list holds exactly the gold URIs at 1.0.
pub fn load_gold_interpretation(
    question_type: QuestionType,
    gold: &GoldInterpretation,
    mode: GoldMode,
    kg: &KnowledgeGraph,
    catalog: Option<&TermCatalog>,
    limits: MatchLimits,
) -> Result<InterpretedQuestion> {
    check_gold_uris(gold, kg)?;
    let mut hops = Vec::with_capacity(gold.hops.len());
    for hop in &gold.hops {
        let build = |refs: &[GoldReference], ch: Channel| -> Result<Vec<Vec<ScoredCandidate>>> {
            refs.iter()
                .map(|r| gold_candidates(r, ch, mode, catalog, limits))
                .collect()
        };
        hops.push(InterpretedHop {
            entities: build(&hop.entities, Channel::Entity)?,
            properties: build(&hop.properties, Channel::Property)?,
            classes: build(&hop.classes, Channel::Class)?,
        });
    }
    Ok(InterpretedQuestion {
        question_type,
        hops,
    })
}
