//! QA dataset files: a JSON array of records with precomputed gold answers.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use qamp_core::eval::QARecord;

use crate::io::read_text;

/// Parses and validates a dataset. Errors name the offending record index.
pub fn parse_dataset(text: &str) -> Result<Vec<QARecord>> {
    let raw: Vec<serde_json::Value> =
        serde_json::from_str(text).context("dataset must be a JSON array of records")?;
    let mut records = Vec::with_capacity(raw.len());
    let mut seen = std::collections::HashSet::new();
    for (i, value) in raw.into_iter().enumerate() {
        let record: QARecord =
            serde_json::from_value(value).map_err(|e| anyhow!("record {i}: {e}"))?;
        record.validate().map_err(|e| anyhow!("record {i}: {e}"))?;
        if !seen.insert(record.id.clone()) {
            bail!("record {i}: duplicate id {:?}", record.id);
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_dataset(path: &Path) -> Result<Vec<QARecord>> {
    parse_dataset(&read_text(path)?).with_context(|| format!("loading dataset {}", path.display()))
}
