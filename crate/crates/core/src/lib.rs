//! Unsupervised message-passing engine for complex question answering over
//! knowledge graphs.
//!
//! The crate is `no_std` (it only needs `alloc`) and carries no IO. It covers
//! the whole pipeline between raw triple text and a scored answer:
//!
//! * [`graph`] dictionary-encodes triples and cuts per-question subgraphs into
//!   symmetric sparse adjacency slices.
//! * [`catalog`] indexes entity, property and class labels and matches text
//!   references to scored candidate URIs.
//! * [`question`] detects the question type, extracts references and turns
//!   them into an [`InterpretedQuestion`].
//! * [`inference`] propagates confidence scores over the subgraph, chains
//!   hops and applies the type-specific aggregation.
//! * [`eval`] holds the dataset record types, the QALD-style scoring rules and
//!   the ablation presets.
//!
//! Loading files, persisting indexes and timing live in the `qamp` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod catalog;
pub mod error;
pub mod eval;
pub mod graph;
pub mod inference;
pub mod question;
pub mod sparse;
mod stem;
pub mod text;

pub use catalog::{ScoredCandidate, TermCatalog, WordVectors};
pub use error::{Error, Result};
pub use graph::{EntityId, GraphConfig, KnowledgeGraph, PropertyId, SubgraphMatrices};
pub use inference::{Answer, AnswerSet, AnswerValue, InferenceConfig, NormMode};
pub use question::{InterpretedQuestion, QuestionModel, QuestionType};

/// A loaded graph together with its label catalog.
///
/// This is the unit the CLI persists and the evaluation harness runs against.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Engine {
    pub graph: KnowledgeGraph,
    pub catalog: TermCatalog,
}

impl Engine {
    pub fn new(graph: KnowledgeGraph, vectors: Option<WordVectors>) -> Result<Self> {
        let catalog = TermCatalog::build(&graph, vectors)?;
        Ok(Self { graph, catalog })
    }

    /// Parse and match a question with the heuristic interpreter.
    pub fn interpret(
        &self,
        question: &str,
        limits: catalog::MatchLimits,
    ) -> Result<InterpretedQuestion> {
        question::interpret(question, &self.catalog, limits)
    }

    /// Full pipeline: interpretation followed by answer inference.
    pub fn ask(
        &self,
        question: &str,
        limits: catalog::MatchLimits,
        cfg: &InferenceConfig,
    ) -> Result<Answer> {
        let iq = self.interpret(question, limits)?;
        inference::answer_question(&self.graph, &iq, cfg)
    }
}
