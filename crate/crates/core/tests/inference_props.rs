mod support;

use proptest::prelude::*;
use qamp_core::inference::{
    aggregate_scores, answer_question, message_pass, propagate, ActivationMatrix,
    PropertyActivation,
};
use qamp_core::{GraphConfig, InferenceConfig, KnowledgeGraph, NormMode, SubgraphMatrices};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{max_abs_diff, random_instance, random_question, random_triples, render, Instance};

const EPS: f64 = 1e-12;

fn instance(seed: u64) -> Instance {
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 30, 5, 3, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn raising_a_confidence_never_lowers_a_score(seed in any::<u64>(), pick in any::<u64>(), bump in 0.0f64..=1.0) {
        let inst = instance(seed);
        let before = inst.run(NormMode::Alg1);
        let mut raised = inst.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(pick);
        let cell = if rng.gen_bool(0.5) {
            let r = rng.gen_range(0..raised.e.len());
            &mut raised.e[r][rng.gen_range(0..inst.n)]
        } else {
            let j = rng.gen_range(0..raised.p.len());
            &mut raised.p[j][rng.gen_range(0..inst.k())]
        };
        *cell += (1.0 - *cell) * bump;
        let after = raised.run(NormMode::Alg1);
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(*a >= *b - EPS, "{} dropped to {}", b, a);
        }
    }

    #[test]
    fn more_entity_references_win_at_equal_mass(c1 in 0.01f64..=0.5, c2 in 0.01f64..=0.5, q in 0.01f64..=1.0) {
        // a is reached from s1 and s2 (two rows), b from s3 alone with the
        // same total mass. Local order: a, b, s1, s2, s3.
        let s = SubgraphMatrices::from_local_edges(5, &[vec![(2, 0), (3, 0), (4, 1)]]).unwrap();
        let e = ActivationMatrix::new(5, vec![
            vec![0.0, 0.0, c1, 0.0, c1 + c2],
            vec![0.0, 0.0, 0.0, c2, 0.0],
        ]).unwrap();
        let p = PropertyActivation::new(1, vec![vec![q]]).unwrap();
        let st = propagate(&s, &e, &p).unwrap();
        prop_assert!((st.w[0] - st.w[1]).abs() < EPS);
        prop_assert!(st.n_e[0] > st.n_e[1]);
        for mode in [NormMode::Alg1, NormMode::EdgeMean] {
            let a = message_pass(&s, &e, &p, mode).unwrap();
            prop_assert!(a[0] > a[1], "{}: {} vs {}", mode, a[0], a[1]);
        }
    }

    #[test]
    fn more_property_references_win_at_equal_mass(c in 0.01f64..=1.0, x in 0.01f64..=0.5, y in 0.01f64..=0.5) {
        // a hangs off s through slices 0 and 1, b through slice 2; the two
        // property rows put x + y on each side. Local order: a, b, s.
        let s = SubgraphMatrices::from_local_edges(3, &[vec![(2, 0)], vec![(2, 0)], vec![(2, 1)]]).unwrap();
        let e = ActivationMatrix::new(3, vec![vec![0.0, 0.0, c]]).unwrap();
        let p = PropertyActivation::new(3, vec![vec![x, 0.0, x + y], vec![0.0, y, 0.0]]).unwrap();
        let st = propagate(&s, &e, &p).unwrap();
        prop_assert!((st.w[0] - st.w[1]).abs() < EPS);
        prop_assert!(st.n_p[0] > st.n_p[1]);
        for mode in [NormMode::Alg1, NormMode::EdgeMean] {
            let a = message_pass(&s, &e, &p, mode).unwrap();
            prop_assert!(a[0] > a[1], "{}: {} vs {}", mode, a[0], a[1]);
        }
    }

    #[test]
    fn relabeling_entities_permutes_scores(seed in any::<u64>(), perm_seed in any::<u64>()) {
        let inst = instance(seed);
        let mut perm: Vec<usize> = (0..inst.n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let mut moved = inst.clone();
        moved.edges = inst.edges.iter().map(|l| l.iter().map(|&(u, v)| (perm[u], perm[v])).collect()).collect();
        for (row, orig) in moved.e.iter_mut().zip(&inst.e) {
            for (u, &c) in orig.iter().enumerate() {
                row[perm[u]] = c;
            }
        }
        for mode in [NormMode::Alg1, NormMode::EdgeMean] {
            let a = inst.run(mode);
            let b = moved.run(mode);
            for v in 0..inst.n {
                prop_assert!((a[v] - b[perm[v]]).abs() <= EPS);
            }
        }
    }

    #[test]
    fn reordering_references_keeps_scores(seed in any::<u64>()) {
        let inst = instance(seed);
        let mut flipped = inst.clone();
        flipped.e.reverse();
        flipped.p.reverse();
        for mode in [NormMode::Alg1, NormMode::EdgeMean] {
            prop_assert!(max_abs_diff(&inst.run(mode), &flipped.run(mode)) <= EPS);
        }
    }

    #[test]
    fn scores_are_nonnegative(seed in any::<u64>()) {
        let inst = instance(seed);
        for mode in [NormMode::Alg1, NormMode::EdgeMean] {
            prop_assert!(inst.run(mode).iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn single_reference_scores_stay_within_one(seed in any::<u64>()) {
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(seed), 30, 5, 1, 1);
        for v in inst.run(NormMode::EdgeMean) {
            prop_assert!((0.0..=1.0 + EPS).contains(&v), "{}", v);
        }
    }
}

#[test]
fn alg1_mass_can_exceed_one() {
    // Two active neighbors in one row push W past 1 under the 2W/(l+m)
    // normalization: (2 + 1 + 1) / 3.
    let s = SubgraphMatrices::from_local_edges(3, &[vec![(0, 2), (1, 2)]]).unwrap();
    let e = ActivationMatrix::new(3, vec![vec![1.0, 1.0, 0.0]]).unwrap();
    let p = PropertyActivation::new(1, vec![vec![1.0]]).unwrap();
    let st = propagate(&s, &e, &p).unwrap();
    let a = aggregate_scores(&st, 1, 1, NormMode::Alg1).unwrap();
    assert!((a[2] - 4.0 / 3.0).abs() < EPS);
    let a = aggregate_scores(&st, 1, 1, NormMode::EdgeMean).unwrap();
    assert!((a[2] - 1.0).abs() < EPS);
}

fn scores(
    kg: &KnowledgeGraph,
    iq: &qamp_core::InterpretedQuestion,
    cfg: &InferenceConfig,
) -> Vec<(String, f64)> {
    answer_question(kg, iq, cfg)
        .unwrap()
        .entities
        .into_iter()
        .map(|e| (e.uri, e.score))
        .collect()
}

#[test]
fn reversing_any_triple_keeps_answers() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for mode in [NormMode::Alg1, NormMode::EdgeMean] {
        let cfg = InferenceConfig {
            threshold: 0.0,
            norm_mode: mode,
            ..Default::default()
        };
        for _ in 0..30 {
            let triples = random_triples(&mut rng, 12, 3, 30);
            let kg = KnowledgeGraph::load(&render(&triples, None), GraphConfig::default()).unwrap();
            let iq = random_question(&mut rng, 12, 3);
            let base = scores(&kg, &iq, &cfg);
            for t in 0..triples.len() {
                let flipped =
                    KnowledgeGraph::load(&render(&triples, Some(t)), GraphConfig::default())
                        .unwrap();
                let got = scores(&flipped, &iq, &cfg);
                assert_eq!(base.len(), got.len());
                for ((u1, s1), (u2, s2)) in base.iter().zip(&got) {
                    assert_eq!(u1, u2);
                    assert!((s1 - s2).abs() <= EPS);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn raising_a_prior_score_never_lowers_an_answer(seed in any::<u64>(), bump in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = random_triples(&mut rng, 12, 3, 30);
        let kg = KnowledgeGraph::load(&render(&triples, None), GraphConfig::default()).unwrap();
        let mut iq = random_question(&mut rng, 12, 3);
        iq.hops.truncate(1);
        let cfg = InferenceConfig { threshold: 0.0, ..Default::default() };
        let hop1 = qamp_core::inference::answer_hop(&kg, &iq.hops[0], None, &cfg).unwrap();
        prop_assume!(!hop1.is_empty());
        let hop2 = qamp_core::question::InterpretedHop {
            entities: vec![],
            properties: random_question(&mut rng, 12, 3).hops[0].properties.clone(),
            classes: vec![],
        };
        let before = qamp_core::inference::answer_hop(&kg, &hop2, Some(&hop1), &cfg).unwrap();
        let mut raised = hop1.clone();
        let key = *raised.scores.keys().nth(rng.gen_range(0..raised.len())).unwrap();
        let s = raised.scores.get_mut(&key).unwrap();
        *s += (1.0 - s.min(1.0)) * bump;
        let after = qamp_core::inference::answer_hop(&kg, &hop2, Some(&raised), &cfg).unwrap();
        for (e, b) in &before.scores {
            prop_assert!(after.get(*e).unwrap_or(0.0) >= *b - EPS);
        }
    }
}
