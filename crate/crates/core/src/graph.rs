//! Dictionary-encoded triple store with label and class indexes, plus
//! extraction of per-question subgraphs as symmetric adjacency slices.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::sparse::SparseSymmetric;

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PropertyId(pub u32);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Triple {
    pub subject: EntityId,
    pub property: PropertyId,
    pub object: EntityId,
}

/// Vocabulary used while loading.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphConfig {
    pub type_property: String,
    pub label_property: String,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            type_property: RDF_TYPE.to_owned(),
            label_property: RDFS_LABEL.to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphStats {
    pub entities: usize,
    pub properties: usize,
    pub triples: usize,
}

/// Per-node incidence lists sorted by `(property, neighbor)`.
#[derive(Debug, Clone, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
struct Adjacency {
    offsets: Vec<u32>,
    entries: Vec<(PropertyId, EntityId)>,
}

impl Adjacency {
    fn build(n: usize, mut pairs: Vec<(EntityId, PropertyId, EntityId)>) -> Self {
        pairs.sort_unstable();
        let mut offsets = vec![0u32; n + 1];
        for (node, _, _) in &pairs {
            offsets[node.0 as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let entries = pairs.into_iter().map(|(_, p, o)| (p, o)).collect();
        Self { offsets, entries }
    }

    fn of(&self, node: EntityId) -> &[(PropertyId, EntityId)] {
        let i = node.0 as usize;
        &self.entries[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Neighbors of `node` through `property`.
    fn via(&self, node: EntityId, property: PropertyId) -> &[(PropertyId, EntityId)] {
        let list = self.of(node);
        let lo = list.partition_point(|(p, _)| *p < property);
        let hi = list.partition_point(|(p, _)| *p <= property);
        &list[lo..hi]
    }
}

/// An immutable, dictionary-encoded knowledge graph.
///
/// Entity and property ids are ranks in byte order of their URIs, so ids do
/// not depend on the order in which triples were read.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KnowledgeGraph {
    config: GraphConfig,
    entities: Vec<String>,
    properties: Vec<String>,
    triples: Vec<Triple>,
    entity_labels: Vec<Vec<String>>,
    property_labels: Vec<Vec<String>>,
    type_index: Vec<Vec<EntityId>>,
    classes: Vec<EntityId>,
    outgoing: Adjacency,
    incoming: Adjacency,
}

enum Term<'a> {
    Uri(&'a str),
    Literal(String),
}

impl KnowledgeGraph {
    /// Parses line-oriented triple text.
    ///
    /// Two line forms are accepted: `<s> <p> <o> .` and tab-separated
    /// `s<TAB>p<TAB>o`. Lines starting with `#` are comments. Literal objects
    /// are kept only as labels (when the property is the configured label
    /// property) and dropped otherwise.
    pub fn load(source: &str, config: GraphConfig) -> Result<Self> {
        let mut uri_triples: Vec<(&str, &str, &str)> = Vec::new();
        let mut label_triples: Vec<(&str, String)> = Vec::new();

        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (s, p, o) = parse_line(line).map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
            let s = match s {
                Term::Uri(u) => u,
                Term::Literal(_) => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "subject must be a URI".into(),
                    })
                }
            };
            let p = match p {
                Term::Uri(u) => u,
                Term::Literal(_) => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "predicate must be a URI".into(),
                    })
                }
            };
            match o {
                Term::Uri(o) => uri_triples.push((s, p, o)),
                Term::Literal(text) if p == config.label_property => label_triples.push((s, text)),
                Term::Literal(_) => {}
            }
        }

        let mut property_uris: Vec<&str> = uri_triples.iter().map(|t| t.1).collect();
        property_uris.sort_unstable();
        property_uris.dedup();

        let mut entity_uris: Vec<&str> = uri_triples.iter().flat_map(|t| [t.0, t.2]).collect();
        // Label subjects that are neither entities nor properties become
        // isolated entities so every labelled term is registered.
        for (s, _) in &label_triples {
            if property_uris.binary_search(s).is_err() {
                entity_uris.push(s);
            }
        }
        entity_uris.sort_unstable();
        entity_uris.dedup();

        let eid = |u: &str| EntityId(entity_uris.binary_search(&u).expect("registered") as u32);
        let pid = |u: &str| PropertyId(property_uris.binary_search(&u).expect("registered") as u32);

        let mut triples: Vec<Triple> = uri_triples
            .iter()
            .map(|&(s, p, o)| Triple {
                subject: eid(s),
                property: pid(p),
                object: eid(o),
            })
            .collect();
        triples.sort_unstable();
        triples.dedup();

        let n = entity_uris.len();
        let mut explicit_entity: Vec<Vec<String>> = vec![Vec::new(); n];
        let mut explicit_property: Vec<Vec<String>> = vec![Vec::new(); property_uris.len()];
        for (s, text) in label_triples {
            let label = normalize_label(&text);
            if label.is_empty() {
                continue;
            }
            if let Ok(i) = property_uris.binary_search(&s) {
                explicit_property[i].push(label.clone());
            }
            if let Ok(i) = entity_uris.binary_search(&s) {
                explicit_entity[i].push(label);
            }
        }
        let finish = |mut labels: Vec<String>, uri: &str, camel: bool| {
            if labels.is_empty() {
                labels.push(label_from_uri(uri, camel));
            }
            labels.sort();
            labels.dedup();
            labels
        };
        let entity_labels = explicit_entity
            .into_iter()
            .zip(&entity_uris)
            .map(|(l, u)| finish(l, u, false))
            .collect();
        let property_labels = explicit_property
            .into_iter()
            .zip(&property_uris)
            .map(|(l, u)| finish(l, u, true))
            .collect();

        let type_pid = property_uris
            .binary_search(&config.type_property.as_str())
            .ok()
            .map(|i| PropertyId(i as u32));
        let mut type_index: Vec<Vec<EntityId>> = vec![Vec::new(); n];
        let mut classes = Vec::new();
        if let Some(tp) = type_pid {
            for t in triples.iter().filter(|t| t.property == tp) {
                type_index[t.subject.0 as usize].push(t.object);
                classes.push(t.object);
            }
        }
        classes.sort_unstable();
        classes.dedup();

        let outgoing = Adjacency::build(
            n,
            triples
                .iter()
                .map(|t| (t.subject, t.property, t.object))
                .collect(),
        );
        let incoming = Adjacency::build(
            n,
            triples
                .iter()
                .map(|t| (t.object, t.property, t.subject))
                .collect(),
        );

        Ok(Self {
            config,
            entities: entity_uris.into_iter().map(String::from).collect(),
            properties: property_uris.into_iter().map(String::from).collect(),
            triples,
            entity_labels,
            property_labels,
            type_index,
            classes,
            outgoing,
            incoming,
        })
    }

    pub fn config(&self) -> &GraphConfig {
        &self.config
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            entities: self.entities.len(),
            properties: self.properties.len(),
            triples: self.triples.len(),
        }
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn property_count(&self) -> usize {
        self.properties.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn entity_id(&self, uri: &str) -> Option<EntityId> {
        self.entities
            .binary_search_by(|e| e.as_str().cmp(uri))
            .ok()
            .map(|i| EntityId(i as u32))
    }

    pub fn property_id(&self, uri: &str) -> Option<PropertyId> {
        self.properties
            .binary_search_by(|p| p.as_str().cmp(uri))
            .ok()
            .map(|i| PropertyId(i as u32))
    }

    pub fn entity_uri(&self, id: EntityId) -> Result<&str> {
        self.entities
            .get(id.0 as usize)
            .map(String::as_str)
            .ok_or(Error::UnknownId {
                kind: "entity",
                id: id.0,
            })
    }

    pub fn property_uri(&self, id: PropertyId) -> Result<&str> {
        self.properties
            .get(id.0 as usize)
            .map(String::as_str)
            .ok_or(Error::UnknownId {
                kind: "property",
                id: id.0,
            })
    }

    pub fn entity_labels(&self, id: EntityId) -> &[String] {
        self.entity_labels
            .get(id.0 as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn property_labels(&self, id: PropertyId) -> &[String] {
        self.property_labels
            .get(id.0 as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn entities(&self) -> impl Iterator<Item = (EntityId, &str)> {
        self.entities
            .iter()
            .enumerate()
            .map(|(i, u)| (EntityId(i as u32), u.as_str()))
    }

    pub fn properties(&self) -> impl Iterator<Item = (PropertyId, &str)> {
        self.properties
            .iter()
            .enumerate()
            .map(|(i, u)| (PropertyId(i as u32), u.as_str()))
    }

    /// Entities that occur as the object of a type triple.
    pub fn classes(&self) -> &[EntityId] {
        &self.classes
    }

    pub fn is_class(&self, id: EntityId) -> bool {
        self.classes.binary_search(&id).is_ok()
    }

    /// Objects of the type property for `entity`, ascending.
    pub fn classes_of(&self, entity: EntityId) -> Result<&[EntityId]> {
        self.type_index
            .get(entity.0 as usize)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownId {
                kind: "entity",
                id: entity.0,
            })
    }

    fn check_entity(&self, id: EntityId) -> Result<()> {
        if (id.0 as usize) < self.entities.len() {
            Ok(())
        } else {
            Err(Error::UnknownId {
                kind: "entity",
                id: id.0,
            })
        }
    }

    fn check_property(&self, id: PropertyId) -> Result<()> {
        if (id.0 as usize) < self.properties.len() {
            Ok(())
        } else {
            Err(Error::UnknownId {
                kind: "property",
                id: id.0,
            })
        }
    }

    /// Retrieves every triple that has a seed entity in subject or object
    /// position and a seed property, as one symmetric 0/1 slice per seed
    /// property. Triple direction is ignored.
    ///
    /// Local entities are ordered by ascending global id; slices follow
    /// ascending property id.
    pub fn extract_subgraph(
        &self,
        seed_entities: &[EntityId],
        seed_properties: &[PropertyId],
    ) -> Result<SubgraphMatrices> {
        if seed_entities.is_empty() {
            return Err(Error::precondition("empty seed entity set"));
        }
        if seed_properties.is_empty() {
            return Err(Error::precondition("empty seed property set"));
        }
        let mut seeds = seed_entities.to_vec();
        seeds.sort_unstable();
        seeds.dedup();
        let mut props = seed_properties.to_vec();
        props.sort_unstable();
        props.dedup();
        for &e in &seeds {
            self.check_entity(e)?;
        }
        for &p in &props {
            self.check_property(p)?;
        }

        let mut edges: Vec<Vec<(EntityId, EntityId)>> = vec![Vec::new(); props.len()];
        let mut local = seeds.clone();
        for &seed in &seeds {
            for (slot, &p) in props.iter().enumerate() {
                for adj in [&self.outgoing, &self.incoming] {
                    for &(_, other) in adj.via(seed, p) {
                        edges[slot].push((seed, other));
                        local.push(other);
                    }
                }
            }
        }
        local.sort_unstable();
        local.dedup();

        let position = |e: EntityId| local.binary_search(&e).expect("local entity");
        let n = local.len();
        let mut slices = Vec::with_capacity(props.len());
        for (slot, &p) in props.iter().enumerate() {
            let m = SparseSymmetric::from_unit_edges(
                n,
                edges[slot].iter().map(|&(a, b)| (position(a), position(b))),
            )?;
            slices.push((p, m));
        }

        Ok(SubgraphMatrices {
            local_entities: local,
            property_slices: slices,
            origin: seeds,
        })
    }
}

/// Adjacency slices of a per-question subgraph over a local entity universe.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgraphMatrices {
    pub local_entities: Vec<EntityId>,
    pub property_slices: Vec<(PropertyId, SparseSymmetric)>,
    pub origin: Vec<EntityId>,
}

impl SubgraphMatrices {
    /// Number of local entities.
    pub fn n(&self) -> usize {
        self.local_entities.len()
    }

    /// Number of property slices.
    pub fn k(&self) -> usize {
        self.property_slices.len()
    }

    pub fn local_index(&self, entity: EntityId) -> Option<usize> {
        self.local_entities.binary_search(&entity).ok()
    }

    pub fn slice_index(&self, property: PropertyId) -> Option<usize> {
        self.property_slices
            .binary_search_by(|(p, _)| p.cmp(&property))
            .ok()
    }

    pub fn slices(&self) -> impl Iterator<Item = &SparseSymmetric> {
        self.property_slices.iter().map(|(_, m)| m)
    }

    /// Builds matrices directly from local edge lists; mostly useful for
    /// tests and synthetic inputs. `edges[i]` lists the undirected edges of
    /// slice `i`, in local indices.
    pub fn from_local_edges(n: usize, edges: &[Vec<(usize, usize)>]) -> Result<Self> {
        let mut slices = Vec::with_capacity(edges.len());
        for (i, list) in edges.iter().enumerate() {
            slices.push((
                PropertyId(i as u32),
                SparseSymmetric::from_unit_edges(n, list.iter().copied())?,
            ));
        }
        Ok(Self {
            local_entities: (0..n as u32).map(EntityId).collect(),
            property_slices: slices,
            origin: Vec::new(),
        })
    }
}

fn parse_line(line: &str) -> core::result::Result<(Term<'_>, Term<'_>, Term<'_>), String> {
    if line.contains('\t') {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            ));
        }
        let term = |f: &'_ str| -> core::result::Result<(), String> {
            if f.is_empty() {
                Err("empty field".into())
            } else {
                Ok(())
            }
        };
        for f in &fields {
            term(f)?;
        }
        let uri = |f: &str| -> core::result::Result<(), String> {
            if f.starts_with('"') {
                Err("subject and predicate must be URIs".into())
            } else {
                Ok(())
            }
        };
        uri(fields[0])?;
        uri(fields[1])?;
        let o = if fields[2].starts_with('"') {
            let (lit, rest) = parse_literal(fields[2])?;
            if !rest.trim().is_empty() {
                return Err(format!("trailing content after literal: {rest:?}"));
            }
            Term::Literal(lit)
        } else {
            Term::Uri(strip_angles(fields[2]))
        };
        return Ok((
            Term::Uri(strip_angles(fields[0])),
            Term::Uri(strip_angles(fields[1])),
            o,
        ));
    }

    let rest = line;
    let (s, rest) = parse_term(rest)?;
    let (p, rest) = parse_term(rest)?;
    let (o, rest) = parse_term(rest)?;
    if rest.trim() != "." {
        return Err("expected terminating '.'".into());
    }
    Ok((s, p, o))
}

fn strip_angles(f: &str) -> &str {
    f.strip_prefix('<')
        .and_then(|x| x.strip_suffix('>'))
        .unwrap_or(f)
}

fn parse_term(input: &str) -> core::result::Result<(Term<'_>, &str), String> {
    let input = input.trim_start();
    if let Some(body) = input.strip_prefix('<') {
        let end = body.find('>').ok_or("unterminated URI")?;
        let uri = &body[..end];
        if uri.is_empty() || uri.contains(char::is_whitespace) {
            return Err(format!("invalid URI <{uri}>"));
        }
        Ok((Term::Uri(uri), &body[end + 1..]))
    } else if input.starts_with('"') {
        let (lit, rest) = parse_literal(input)?;
        Ok((Term::Literal(lit), rest))
    } else if input.starts_with("_:") {
        let end = input.find(char::is_whitespace).unwrap_or(input.len());
        Ok((Term::Uri(&input[..end]), &input[end..]))
    } else if input.is_empty() {
        Err("missing term".into())
    } else {
        Err(format!(
            "unexpected token near {:?}",
            input.chars().take(16).collect::<String>()
        ))
    }
}

/// Parses `"..."` with backslash escapes and an optional `@lang` or
/// `^^<datatype>` suffix. Returns the unescaped text and the remaining input.
fn parse_literal(input: &str) -> core::result::Result<(String, &str), String> {
    let body = &input[1..];
    let mut out = String::new();
    let mut chars = body.char_indices();
    let end = loop {
        match chars.next() {
            None => return Err("unterminated literal".into()),
            Some((i, '"')) => break i,
            Some((_, '\\')) => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, 'r')) => out.push('\r'),
                Some((_, c)) => out.push(c),
                None => return Err("unterminated escape".into()),
            },
            Some((_, c)) => out.push(c),
        }
    };
    let mut rest = &body[end + 1..];
    if let Some(tag) = rest.strip_prefix('@') {
        let stop = tag
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
            .unwrap_or(tag.len());
        rest = &tag[stop..];
    } else if let Some(dt) = rest.strip_prefix("^^") {
        let (_, r) = parse_term(dt)?;
        rest = r;
    }
    Ok((out, rest))
}

/// Lowercases and collapses whitespace.
pub fn normalize_label(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Label derived from a URI's local name: namespace stripped, `_` turned
/// into spaces, lowercased. With `split_camel`, `bodyStyle` becomes
/// `body style`.
pub fn label_from_uri(uri: &str, split_camel: bool) -> String {
    let local = uri
        .rsplit(['#', '/'])
        .find(|s| !s.is_empty())
        .unwrap_or(uri);
    let local = match local.rsplit_once(':') {
        Some((_, tail)) if !tail.is_empty() && !local.contains("//") => tail,
        _ => local,
    };
    let mut spaced = String::with_capacity(local.len() + 4);
    let mut prev_lower = false;
    for c in local.chars() {
        if c == '_' {
            spaced.push(' ');
            prev_lower = false;
            continue;
        }
        if split_camel && prev_lower && c.is_uppercase() {
            spaced.push(' ');
        }
        prev_lower = c.is_lowercase() || c.is_ascii_digit();
        spaced.push(c);
    }
    normalize_label(&spaced)
}
