//! Reading graphs and vector files, and persisting a built index.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use qamp_core::{Engine, GraphConfig, KnowledgeGraph, TermCatalog, WordVectors};
use serde::de::DeserializeOwned;
use serde::Serialize;

const GRAPH_FILE: &str = "graph.json";
const CATALOG_FILE: &str = "catalog.json";

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_graph(path: &Path, config: GraphConfig) -> Result<KnowledgeGraph> {
    let text = read_text(path)?;
    KnowledgeGraph::load(&text, config).with_context(|| format!("loading graph {}", path.display()))
}

pub fn read_vectors(path: &Path) -> Result<WordVectors> {
    let text = read_text(path)?;
    WordVectors::parse(&text).with_context(|| format!("loading vectors {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes the encoded graph and its catalog into `dir`, creating it.
pub fn save_index(dir: &Path, engine: &Engine) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join(GRAPH_FILE), &engine.graph)?;
    write_json(&dir.join(CATALOG_FILE), &engine.catalog)
}

pub fn load_index(dir: &Path) -> Result<Engine> {
    let graph: KnowledgeGraph = read_json(&dir.join(GRAPH_FILE))?;
    let catalog: TermCatalog = read_json(&dir.join(CATALOG_FILE))?;
    Ok(Engine { graph, catalog })
}
