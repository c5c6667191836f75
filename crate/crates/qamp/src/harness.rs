//! Timed, parallel evaluation of a dataset against an engine.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use qamp_core::catalog::MatchLimits;
use qamp_core::eval::{
    answer_record, score_question, AblationSetup, EvalMode, EvalReport, InterpretationPlan,
    QARecord, QuestionScore,
};
use qamp_core::{Engine, InferenceConfig};
use rayon::prelude::*;

/// Answers every record under `plan` and scores it. Records run in
/// parallel; rows come back in dataset order, so everything but the
/// runtime fields is identical across runs.
pub fn evaluate_plan(
    records: &[QARecord],
    engine: &Engine,
    plan: &InterpretationPlan,
    cfg: &InferenceConfig,
    limits: MatchLimits,
) -> Result<EvalReport> {
    if records.is_empty() {
        bail!("no records to evaluate");
    }
    let rows = records
        .par_iter()
        .map(|record| {
            let start = Instant::now();
            let answer = answer_record(record, plan, engine, cfg, limits)
                .with_context(|| format!("question {:?}", record.id))?;
            let runtime = start.elapsed().as_secs_f64();
            let (precision, recall) = score_question(&answer, record);
            Ok(QuestionScore {
                id: record.id.clone(),
                precision,
                recall,
                runtime,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_scores(rows)?)
}

pub fn evaluate(
    records: &[QARecord],
    engine: &Engine,
    cfg: &InferenceConfig,
    mode: EvalMode,
    limits: MatchLimits,
) -> Result<EvalReport> {
    evaluate_plan(records, engine, &mode.plan(), cfg, limits)
}

pub fn run_ablation(
    setup: AblationSetup,
    records: &[QARecord],
    engine: &Engine,
    cfg: &InferenceConfig,
    limits: MatchLimits,
) -> Result<EvalReport> {
    evaluate_plan(records, engine, &setup.plan(), cfg, limits)
        .with_context(|| format!("ablation {setup}"))
}
