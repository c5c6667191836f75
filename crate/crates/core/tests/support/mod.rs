//! Random message-passing instances and a brute-force reference
//! implementation that walks the edge list directly.

#![allow(dead_code)]

use std::collections::BTreeSet;

use qamp_core::inference::{ActivationMatrix, PropertyActivation};
use qamp_core::{NormMode, SubgraphMatrices};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    /// Undirected edges per property slice, in local indices.
    pub edges: Vec<Vec<(usize, usize)>>,
    pub e: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

/// Confidence that is zero half of the time and uniform otherwise.
fn sparse_conf<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.5) {
        0.0
    } else {
        rng.gen::<f64>()
    }
}

pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_k: usize,
    max_l: usize,
    max_m: usize,
) -> Instance {
    let n = rng.gen_range(2..=max_n);
    let k = rng.gen_range(1..=max_k);
    let l = rng.gen_range(1..=max_l);
    let m = rng.gen_range(1..=max_m);
    let density = rng.gen_range(0.0..0.3);
    let edges = (0..k)
        .map(|_| {
            let count = ((n * n) as f64 * density / 2.0) as usize;
            (0..count)
                .filter_map(|_| {
                    let u = rng.gen_range(0..n);
                    let v = rng.gen_range(0..n);
                    (u != v).then_some((u, v))
                })
                .collect()
        })
        .collect();
    let e = (0..l)
        .map(|_| (0..n).map(|_| sparse_conf(rng)).collect())
        .collect();
    let p = (0..m)
        .map(|_| (0..k).map(|_| sparse_conf(rng)).collect())
        .collect();
    Instance { n, edges, e, p }
}

impl Instance {
    pub fn k(&self) -> usize {
        self.edges.len()
    }

    pub fn inputs(&self) -> (SubgraphMatrices, ActivationMatrix, PropertyActivation) {
        (
            SubgraphMatrices::from_local_edges(self.n, &self.edges).unwrap(),
            ActivationMatrix::new(self.n, self.e.clone()).unwrap(),
            PropertyActivation::new(self.k(), self.p.clone()).unwrap(),
        )
    }

    pub fn run(&self, mode: NormMode) -> Vec<f64> {
        let (s, e, p) = self.inputs();
        qamp_core::inference::message_pass(&s, &e, &p, mode).unwrap()
    }

    /// Distinct undirected edges of every slice as `(slice, low, high)`.
    pub fn unique_edges(&self) -> BTreeSet<(usize, usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().map(move |&(u, v)| (i, u.min(v), u.max(v))))
            .collect()
    }
}

/// Scores computed edge by edge: every undirected edge passes
/// `E[r][u] * P[j][i]` to each endpoint from the other one.
pub fn brute_force(inst: &Instance, mode: NormMode) -> Vec<f64> {
    let n = inst.n;
    let l = inst.e.len();
    let m = inst.p.len();
    let edges = inst.unique_edges();

    let mut w = vec![0.0; n];
    let mut n_p = vec![0u32; n];
    let mut y_e = vec![vec![0.0; n]; l];
    for pj in &inst.p {
        let mut y = vec![vec![0.0; n]; l];
        for &(i, a, b) in &edges {
            for (yr, er) in y.iter_mut().zip(&inst.e) {
                yr[b] += er[a] * pj[i];
                yr[a] += er[b] * pj[i];
            }
        }
        for v in 0..n {
            let col: f64 = (0..l).map(|r| y[r][v]).sum();
            w[v] += col;
            if col > 0.0 {
                n_p[v] += 1;
            }
            for r in 0..l {
                y_e[r][v] += y[r][v];
            }
        }
    }
    let n_e: Vec<u32> = (0..n)
        .map(|v| (0..l).filter(|&r| y_e[r][v] > 0.0).count() as u32)
        .collect();

    let slice_on = |i: usize| inst.p.iter().any(|row| row[i] > 0.0);
    let entity_on = |u: usize| inst.e.iter().any(|row| row[u] > 0.0);
    let mut carriers = vec![0u32; n];
    for &(i, a, b) in &edges {
        if !slice_on(i) {
            continue;
        }
        if entity_on(a) {
            carriers[b] += 1;
        }
        if entity_on(b) {
            carriers[a] += 1;
        }
    }

    (0..n)
        .map(|v| {
            let norm = match mode {
                NormMode::Alg1 => 2.0 * w[v] / (l + m) as f64,
                NormMode::EdgeMean if carriers[v] == 0 => 0.0,
                NormMode::EdgeMean => w[v] / carriers[v] as f64,
            };
            (norm + n_e[v] as f64 + n_p[v] as f64) / (l + m + 1) as f64
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// A random graph as `(subject, property, object)` index triples.
pub fn random_triples<R: Rng>(
    rng: &mut R,
    entities: usize,
    properties: usize,
    count: usize,
) -> Vec<(usize, usize, usize)> {
    (0..count)
        .map(|_| {
            let s = rng.gen_range(0..entities);
            let mut o = rng.gen_range(0..entities);
            if o == s {
                o = (o + 1) % entities;
            }
            (s, rng.gen_range(0..properties), o)
        })
        .collect()
}

pub fn entity_uri(i: usize) -> String {
    format!("http://ex.org/e{i}")
}

pub fn property_uri(j: usize) -> String {
    format!("http://ex.org/p{j}")
}

/// N-Triples text; the triple at `flip` has subject and object swapped.
pub fn render(triples: &[(usize, usize, usize)], flip: Option<usize>) -> String {
    triples
        .iter()
        .enumerate()
        .map(|(t, &(s, p, o))| {
            let (s, o) = if flip == Some(t) { (o, s) } else { (s, o) };
            format!(
                "<{}> <{}> <{}> .\n",
                entity_uri(s),
                property_uri(p),
                entity_uri(o)
            )
        })
        .collect()
}

fn candidates<R: Rng>(
    rng: &mut R,
    pool: usize,
    uri: fn(usize) -> String,
) -> Vec<qamp_core::ScoredCandidate> {
    let count = rng.gen_range(1..=3);
    let mut picked: Vec<usize> = (0..count).map(|_| rng.gen_range(0..pool)).collect();
    picked.sort_unstable();
    picked.dedup();
    picked
        .into_iter()
        .map(|i| qamp_core::ScoredCandidate::new(uri(i), rng.gen_range(0.05..=1.0)))
        .collect()
}

/// One- or two-hop interpreted question over the random vocabulary.
pub fn random_question<R: Rng>(
    rng: &mut R,
    entities: usize,
    properties: usize,
) -> qamp_core::InterpretedQuestion {
    use qamp_core::question::InterpretedHop;
    let hops = rng.gen_range(1..=2);
    let hops = (0..hops)
        .map(|h| InterpretedHop {
            entities: (0..if h == 0 {
                rng.gen_range(1..=3)
            } else {
                rng.gen_range(0..=1)
            })
                .map(|_| candidates(rng, entities, entity_uri))
                .collect(),
            properties: (0..rng.gen_range(1..=3))
                .map(|_| candidates(rng, properties, property_uri))
                .collect(),
            classes: Vec::new(),
        })
        .collect();
    qamp_core::InterpretedQuestion {
        question_type: qamp_core::QuestionType::Select,
        hops,
    }
}
