use proptest::prelude::*;
use qamp_core::catalog::MatchLimits;
use qamp_core::question::{
    detect_question_type, extract_references, interpret, load_gold_interpretation, GoldHop,
    GoldInterpretation, GoldMode, GoldReference, GoldUri,
};
use qamp_core::{GraphConfig, KnowledgeGraph, QuestionType, TermCatalog, WordVectors};

const FIXTURE: &str = "\
<http://ex.org/Tesla> <http://ex.org/foundedBy> <http://ex.org/Elon_Musk> .
<http://ex.org/SpaceX> <http://ex.org/founder> <http://ex.org/Elon_Musk> .
<http://ex.org/Elon_Musk> <http://ex.org/bornIn> <http://ex.org/Pretoria> .
<http://ex.org/Elon_Musk> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/Person> .
";
const VECTORS: &str =
    "founded 1 0 0 0\nby 0.28 0.96 0 0\nfounder 0.9 0 0.4358898943540674 0\nborn 0 0 0 1\n";

fn setup() -> (KnowledgeGraph, TermCatalog) {
    let kg = KnowledgeGraph::load(FIXTURE, GraphConfig::default()).unwrap();
    let cat = TermCatalog::build(&kg, Some(WordVectors::parse(VECTORS).unwrap())).unwrap();
    (kg, cat)
}

const WORDS: &[&str] = &[
    "who", "where", "was", "is", "the", "of", "founder", "founded", "Tesla", "SpaceX", "Tesla's",
    "born", "person", "Elon", "Musk", "and", "how", "many", "Pretoria", "in", "by", "?", ",",
];

fn question() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..12).prop_map(|w| w.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn type_detection_is_total(text in "\\PC{1,40}") {
        prop_assume!(!text.trim().is_empty());
        let a = detect_question_type(&text).unwrap();
        prop_assert_eq!(a, detect_question_type(&text).unwrap());
    }

    #[test]
    fn spans_are_verbatim_and_disjoint(q in question()) {
        let (_, cat) = setup();
        let model = extract_references(&q, &cat).unwrap();
        prop_assert!((1..=2).contains(&model.hops.len()));
        let mut spans: Vec<_> = model
            .hops
            .iter()
            .flat_map(|h| h.entity_refs.iter().chain(&h.property_refs).chain(&h.class_refs))
            .collect();
        spans.sort_by_key(|s| s.start);
        for s in &spans {
            prop_assert_eq!(&q[s.start..s.end], s.text.as_str());
        }
        for w in spans.windows(2) {
            prop_assert!(w[0].end <= w[1].start);
        }
    }

    #[test]
    fn interpretation_keeps_model_shape(q in question()) {
        let (_, cat) = setup();
        let model = extract_references(&q, &cat).unwrap();
        let iq = interpret(&q, &cat, MatchLimits::default()).unwrap();
        prop_assert_eq!(iq.question_type, model.question_type);
        prop_assert_eq!(iq.hops.len(), model.hops.len());
        for (h, ih) in model.hops.iter().zip(&iq.hops) {
            prop_assert_eq!(h.entity_refs.len(), ih.entities.len());
            prop_assert_eq!(h.property_refs.len(), ih.properties.len());
            prop_assert_eq!(h.class_refs.len(), ih.classes.len());
        }
    }

    #[test]
    fn gold_mode_gives_singletons(picks in prop::collection::vec((0usize..4, 0usize..3), 1..4)) {
        let (kg, cat) = setup();
        let entities = ["Tesla", "SpaceX", "Elon_Musk", "Pretoria"];
        let properties = ["founder", "foundedBy", "bornIn"];
        let reference = |uri: String| GoldReference { span: "x".into(), uris: vec![GoldUri { uri, confidence: None }] };
        let gold = GoldInterpretation {
            hops: vec![GoldHop {
                entities: picks.iter().map(|(e, _)| reference(format!("http://ex.org/{}", entities[*e]))).collect(),
                properties: picks.iter().map(|(_, p)| reference(format!("http://ex.org/{}", properties[*p]))).collect(),
                classes: vec![],
            }],
        };
        let iq = load_gold_interpretation(QuestionType::Select, &gold, GoldMode::Gt, &kg, Some(&cat), MatchLimits::default()).unwrap();
        for list in iq.hops[0].entities.iter().chain(&iq.hops[0].properties) {
            prop_assert_eq!(list.len(), 1);
            prop_assert_eq!(list[0].confidence, 1.0);
        }
    }
}

#[test]
fn punctuation_only_is_select() {
    assert_eq!(detect_question_type("?!").unwrap(), QuestionType::Select);
    assert!(detect_question_type(" \t").is_err());
}
