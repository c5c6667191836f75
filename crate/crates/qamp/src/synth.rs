//! Deterministic synthetic graphs and QA datasets.
//!
//! Relations are typed and connect disjoint classes (people are born in
//! cities, cities lie in countries, people found companies and charities,
//! organizations are located in cities), so an undirected walk from a seed
//! over one relation reaches exactly the directed answers. Gold answers are
//! computed by scanning the triple list.

use std::collections::{BTreeMap, BTreeSet};

use anyhow::{bail, Result};
use qamp_core::eval::{Gold, QARecord};
use qamp_core::question::{GoldHop, GoldInterpretation, GoldReference, GoldUri};
use qamp_core::QuestionType;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NS: &str = "http://synth.example/";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mer", "sta", "vin", "tor", "el", "ru", "bas", "qui", "den", "far", "gol", "hin",
    "pas", "zu",
];
const GIVEN: [&str; 12] = [
    "Ada", "Boris", "Clara", "Dmitri", "Elena", "Farid", "Greta", "Hugo", "Ines", "Jonas", "Kira",
    "Luca",
];

/// Rough number of triples produced per person, used to size a graph.
const TRIPLES_PER_PERSON: f64 = 6.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub seed: u64,
    pub people: usize,
    pub questions: usize,
}

impl SynthConfig {
    /// A configuration whose graph holds roughly `triples` triples.
    pub fn for_triples(triples: usize, questions: usize, seed: u64) -> Self {
        Self {
            seed,
            people: ((triples as f64 / TRIPLES_PER_PERSON) as usize).max(20),
            questions,
        }
    }
}

fn word(i: usize) -> String {
    let mut n = i + SYLLABLES.len();
    let mut parts = Vec::new();
    while n > 0 {
        parts.push(SYLLABLES[n % SYLLABLES.len()]);
        n /= SYLLABLES.len();
    }
    let w: String = parts.concat();
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

fn uri(kind: &str, i: usize) -> String {
    format!("{NS}{kind}/{i}")
}

fn prop(name: &str) -> String {
    format!("{NS}ontology/{name}")
}

fn class(name: &str) -> String {
    format!("{NS}class/{name}")
}

#[derive(Debug, Clone)]
pub struct SynthData {
    /// Resource triples, including type triples.
    pub triples: Vec<[String; 3]>,
    pub labels: BTreeMap<String, String>,
    pub records: Vec<QARecord>,
}

impl SynthData {
    pub fn triple_count(&self) -> usize {
        self.triples.len() + self.labels.len()
    }

    pub fn ntriples(&self) -> String {
        let mut out = String::new();
        for [s, p, o] in &self.triples {
            out.push_str(&format!("<{s}> <{p}> <{o}> .\n"));
        }
        for (s, l) in &self.labels {
            out.push_str(&format!("<{s}> <{RDFS_LABEL}> \"{l}\" .\n"));
        }
        out
    }

    fn label(&self, entity: &str) -> &str {
        &self.labels[entity]
    }

    fn add(&mut self, s: &str, p: &str, o: &str) {
        self.triples
            .push([s.to_string(), p.to_string(), o.to_string()]);
    }

    fn add_entities(
        &mut self,
        kind: &str,
        cls: &str,
        n: usize,
        name: impl Fn(usize) -> String,
    ) -> Vec<String> {
        (0..n)
            .map(|i| {
                let u = uri(kind, i);
                self.add(&u, RDF_TYPE, &class(cls));
                self.labels.insert(u.clone(), name(i));
                u
            })
            .collect()
    }
}

/// Directed lookups over the triple list, used to compute gold answers.
#[derive(Debug, Default)]
pub struct TripleOracle {
    out: BTreeMap<(String, String), BTreeSet<String>>,
    touched: BTreeSet<(String, String)>,
    types: BTreeSet<(String, String)>,
}

impl TripleOracle {
    pub fn new(triples: &[[String; 3]]) -> Self {
        let mut o = Self::default();
        for [s, p, obj] in triples {
            if p == RDF_TYPE {
                o.types.insert((s.clone(), obj.clone()));
            }
            o.out
                .entry((s.clone(), p.clone()))
                .or_default()
                .insert(obj.clone());
            o.touched.insert((s.clone(), p.clone()));
            o.touched.insert((obj.clone(), p.clone()));
        }
        o
    }

    /// Objects of `(subject, property, ?)`.
    pub fn objects(&self, subject: &str, property: &str) -> BTreeSet<String> {
        self.out
            .get(&(subject.to_string(), property.to_string()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn has_type(&self, entity: &str, class_uri: &str) -> bool {
        self.types
            .contains(&(entity.to_string(), class_uri.to_string()))
    }

    /// Whether `entity` takes part in any `property` triple, in either role.
    pub fn touches(&self, entity: &str, property: &str) -> bool {
        self.touched
            .contains(&(entity.to_string(), property.to_string()))
    }
}

struct World {
    people: Vec<String>,
    cities: Vec<String>,
    companies: Vec<String>,
    charities: Vec<String>,
}

fn build_graph(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> (SynthData, World) {
    let n_people = cfg.people;
    let n_cities = (n_people / 4).max(4);
    let n_countries = (n_people / 20).max(2);
    let n_companies = (n_people / 2).max(2);
    let n_charities = (n_people / 6).max(2);

    let mut data = SynthData {
        triples: Vec::new(),
        labels: BTreeMap::new(),
        records: Vec::new(),
    };
    let people = data.add_entities("person", "Person", n_people, |i| {
        format!("{} {}", GIVEN[i % GIVEN.len()], word(i / GIVEN.len()))
    });
    let cities = data.add_entities("city", "City", n_cities, |i| format!("{}ville", word(i)));
    let countries = data.add_entities("country", "Country", n_countries, |i| {
        format!("{}land", word(i))
    });
    let companies = data.add_entities("company", "Company", n_companies, |i| {
        format!("{} Industries", word(i))
    });
    let charities = data.add_entities("charity", "Charity", n_charities, |i| {
        format!("{} Foundation", word(i))
    });

    for c in &cities {
        data.add(c, &prop("country"), countries.choose(rng).unwrap());
    }
    for org in companies.iter().chain(&charities) {
        data.add(org, &prop("locatedIn"), cities.choose(rng).unwrap());
    }
    // Only the first 70% of cities are birthplaces.
    let birth_cities = &cities[..(cities.len() * 7 / 10).max(1)];
    for (i, p) in people.iter().enumerate() {
        if rng.gen_bool(0.8) {
            data.add(p, &prop("bornIn"), birth_cities.choose(rng).unwrap());
        }
        let mut founded: BTreeSet<&String> = BTreeSet::new();
        if i % 10 == 0 {
            founded.insert(companies.choose(rng).unwrap());
            founded.insert(charities.choose(rng).unwrap());
        } else if rng.gen_bool(0.5) {
            for _ in 0..rng.gen_range(1..=3) {
                founded.insert(companies.choose(rng).unwrap());
            }
        }
        for org in founded {
            data.add(p, &prop("founded"), org);
        }
    }
    (
        data,
        World {
            people,
            cities,
            companies,
            charities,
        },
    )
}

fn reference(span: &str, uris: &[&str]) -> GoldReference {
    GoldReference {
        span: span.to_string(),
        uris: uris
            .iter()
            .map(|u| GoldUri {
                uri: u.to_string(),
                confidence: None,
            })
            .collect(),
    }
}

fn record(
    id: usize,
    question: String,
    question_type: QuestionType,
    gold: Gold,
    hops: Vec<GoldHop>,
) -> QARecord {
    QARecord {
        id: format!("q{id:03}"),
        question,
        question_type,
        gold,
        gold_interpretation: Some(GoldInterpretation { hops }),
    }
}

fn hop(
    entities: Vec<GoldReference>,
    properties: Vec<GoldReference>,
    classes: Vec<GoldReference>,
) -> GoldHop {
    GoldHop {
        entities,
        properties,
        classes,
    }
}

const TEMPLATES: usize = 7;

fn make_question(
    template: usize,
    id: usize,
    data: &SynthData,
    oracle: &TripleOracle,
    world: &World,
    rng: &mut ChaCha8Rng,
) -> Option<QARecord> {
    let born = prop("bornIn");
    let founded = prop("founded");
    match template {
        0 => {
            let p = world.people.choose(rng)?;
            let gold = oracle.objects(p, &born);
            if gold.is_empty() {
                return None;
            }
            let mut prop_ref = reference("born", &[&born]);
            prop_ref.uris.push(GoldUri {
                uri: prop("locatedIn"),
                confidence: Some(0.4),
            });
            Some(record(
                id,
                format!("Where was {} born?", data.label(p)),
                QuestionType::Select,
                Gold::Set(gold.into_iter().collect()),
                vec![hop(
                    vec![reference(data.label(p), &[p])],
                    vec![prop_ref],
                    vec![],
                )],
            ))
        }
        1 => {
            let org = if rng.gen_bool(0.5) {
                world.companies.choose(rng)?
            } else {
                world.charities.choose(rng)?
            };
            let located = prop("locatedIn");
            let gold = oracle.objects(org, &located);
            Some(record(
                id,
                format!("In which city is {} located?", data.label(org)),
                QuestionType::Select,
                Gold::Set(gold.into_iter().collect()),
                vec![hop(
                    vec![reference(data.label(org), &[org])],
                    vec![reference("located", &[&located])],
                    vec![reference("city", &[&class("City")])],
                )],
            ))
        }
        2 => {
            let p = world.people.choose(rng)?;
            let country = prop("country");
            let gold: BTreeSet<String> = oracle
                .objects(p, &born)
                .iter()
                .flat_map(|c| oracle.objects(c, &country))
                .collect();
            if gold.is_empty() {
                return None;
            }
            Some(record(
                id,
                format!("In which country was {} born?", data.label(p)),
                QuestionType::Select,
                Gold::Set(gold.into_iter().collect()),
                vec![
                    hop(
                        vec![reference(data.label(p), &[p])],
                        vec![reference("born", &[&born])],
                        vec![],
                    ),
                    hop(vec![], vec![reference("country", &[&country])], vec![]),
                ],
            ))
        }
        3 => {
            // Prefer founders of both a company and a charity, whose
            // question only the class constraint answers exactly.
            let mixed: Vec<&String> = world
                .people
                .iter()
                .filter(|p| {
                    let f = oracle.objects(p, &founded);
                    f.iter().any(|o| oracle.has_type(o, &class("Company")))
                        && f.iter().any(|o| oracle.has_type(o, &class("Charity")))
                })
                .collect();
            let p = *mixed.choose(rng)?;
            let company = class("Company");
            let gold: BTreeSet<String> = oracle
                .objects(p, &founded)
                .into_iter()
                .filter(|o| oracle.has_type(o, &company))
                .collect();
            Some(record(
                id,
                format!("Which companies did {} found?", data.label(p)),
                QuestionType::Select,
                Gold::Set(gold.into_iter().collect()),
                vec![hop(
                    vec![reference(data.label(p), &[p])],
                    vec![reference("found", &[&founded])],
                    vec![reference("companies", &[&company])],
                )],
            ))
        }
        4 => {
            let p = world.people.choose(rng)?;
            let n = oracle.objects(p, &founded).len();
            if n == 0 {
                return None;
            }
            Some(record(
                id,
                format!("How many organizations did {} found?", data.label(p)),
                QuestionType::Count,
                Gold::Count(n as u64),
                vec![hop(
                    vec![reference(data.label(p), &[p])],
                    vec![reference("found", &[&founded])],
                    vec![],
                )],
            ))
        }
        5 | 6 => {
            let (p, c) = if template == 5 {
                let p = world.people.choose(rng)?;
                let c = oracle.objects(p, &born).into_iter().next()?;
                (p.clone(), c)
            } else {
                let p = world
                    .people
                    .iter()
                    .filter(|p| !oracle.touches(p, &born))
                    .collect::<Vec<_>>();
                let c = world
                    .cities
                    .iter()
                    .filter(|c| !oracle.touches(c, &born))
                    .collect::<Vec<_>>();
                ((*p.choose(rng)?).clone(), (*c.choose(rng)?).clone())
            };
            let truth = oracle.objects(&p, &born).contains(&c);
            Some(record(
                id,
                format!("Was {} born in {}?", data.label(&p), data.label(&c)),
                QuestionType::Ask,
                Gold::Bool(truth),
                vec![hop(
                    vec![
                        reference(data.label(&p), &[&p]),
                        reference(data.label(&c), &[&c]),
                    ],
                    vec![reference("born", &[&born])],
                    vec![],
                )],
            ))
        }
        _ => None,
    }
}

/// Generates a graph and `cfg.questions` QA records over it.
pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut data, world) = build_graph(cfg, &mut rng);
    let oracle = TripleOracle::new(&data.triples);
    let mut records = Vec::with_capacity(cfg.questions);
    let mut attempts = 0;
    while records.len() < cfg.questions {
        attempts += 1;
        if attempts > cfg.questions * 100 + 1000 {
            bail!("could not generate {} questions", cfg.questions);
        }
        let template = records.len() % TEMPLATES;
        if let Some(r) = make_question(
            template,
            records.len() + 1,
            &data,
            &oracle,
            &world,
            &mut rng,
        ) {
            records.push(r);
        }
    }
    data.records = records;
    Ok(data)
}
