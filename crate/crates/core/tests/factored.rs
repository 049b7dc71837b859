mod common;

use classmaxent::classing::{build_hierarchy, ClassHierarchy};
use classmaxent::corpus::Event;
use classmaxent::factored::{level_spaces, train_factored, train_unfactored, FactoredConfig, FactoredModel};
use classmaxent::features::{Feature, FeatureKey, FeatureSet, TemplateKind};
use classmaxent::gis::{CandidateSpace, GisConfig, MaxEntModel};
use common::*;
use rand::Rng;

/// A model over `outcomes` whose class-trigram weights are `ln table[h][o]`.
/// With the identity indicator map every `(history, outcome)` pair fires
/// exactly one feature, so the model reproduces the table's conditionals.
fn table_model(
    n_words: usize,
    outcomes: usize,
    space: CandidateSpace,
    logp: impl Fn([u32; 2], u32) -> f64,
) -> MaxEntModel {
    let mut features = Vec::new();
    let mut lambdas = Vec::new();
    for h2 in 0..n_words as u32 {
        for h1 in 0..n_words as u32 {
            for o in 0..outcomes as u32 {
                let key = FeatureKey { kind: TemplateKind::ClassTrigram, target: o, z: h1, y: h2 };
                features.push((key, logp([h2, h1], o)));
            }
        }
    }
    features.sort_by_key(|f| f.0);
    let list =
        features.iter().enumerate().map(|(i, (key, _))| Feature { id: i as u32, key: *key, train_count: 1 }).collect();
    lambdas.extend(features.iter().map(|f| f.1));
    lambdas.push(0.0);
    let identity = (0..n_words as u32).collect();
    let fs = FeatureSet::from_features(list, identity, outcomes).unwrap();
    let mut m = MaxEntModel::with_slack_constant(fs, space, 1).unwrap();
    m.set_lambdas(lambdas).unwrap();
    m
}

#[test]
fn factoring_is_exact_at_the_true_distribution() {
    let n = 12;
    let assign: Vec<u32> = (0..n as u32).map(|w| [0, 1, 2, 0, 1, 2, 2, 2, 0, 1, 1, 0][w as usize]).collect();
    let h = ClassHierarchy::flat(assign.clone()).unwrap();
    for seed in 0..5 {
        let mut r = rng(seed);
        // joint[h2][h1][w]
        let joint: Vec<f64> = (0..n * n * n).map(|_| r.gen_range(0.01..1.0)).collect();
        let at = |h: [u32; 2], w: u32| joint[(h[0] as usize * n + h[1] as usize) * n + w as usize];
        let cond = |h: [u32; 2], w: u32| at(h, w) / (0..n as u32).map(|v| at(h, v)).sum::<f64>();
        let class_cond =
            |h: [u32; 2], c: u32| (0..n as u32).filter(|&v| assign[v as usize] == c).map(|v| cond(h, v)).sum::<f64>();

        let spaces = level_spaces(&h).unwrap();
        let class_level = table_model(n, 3, spaces[0].clone(), |h, c| class_cond(h, c).ln());
        let word_level =
            table_model(n, n, spaces[1].clone(), |h, w| (cond(h, w) / class_cond(h, assign[w as usize])).ln());
        let factored = FactoredModel::new(h.clone(), vec![class_level, word_level]).unwrap();
        let direct =
            FactoredModel::unfactored(table_model(n, n, CandidateSpace::all(n), |h, w| cond(h, w).ln())).unwrap();

        for h2 in 0..n as u32 {
            for h1 in 0..n as u32 {
                for w in 0..n as u32 {
                    let truth = cond([h2, h1], w);
                    let f = factored.probability([h2, h1], w);
                    let d = direct.probability([h2, h1], w);
                    assert!((f - truth).abs() <= 1e-12, "{f} vs {truth}");
                    assert!((f - d).abs() <= 1e-12);
                }
            }
        }
    }
}

fn random_word_events(vocab: usize, n: usize, seed: u64) -> Vec<Event> {
    let mut r = rng(seed);
    random_events(&mut r, vocab, n)
}

#[test]
fn two_level_cost_is_classes_plus_class_size() {
    let v = 10_000;
    let events = random_word_events(v, 2_000, 1);
    let indicator: Vec<u32> = (0..v as u32).map(|w| w % 64).collect();
    let cfg =
        FactoredConfig { gis: GisConfig { iterations: 1, tolerance: 0.0, ..Default::default() }, ..Default::default() };
    let base = train_unfactored(&events, v, &indicator, &cfg).unwrap();
    let h = ClassHierarchy::balanced(v, &[100]).unwrap();
    let fact = train_factored(&events, &h, &indicator, &cfg).unwrap();
    assert_eq!(base.first_iteration_ops_per_event(), 10_000.0);
    assert_eq!(fact.first_iteration_ops_per_event(), 200.0);
    assert_eq!(base.first_iteration_ops_per_event() / fact.first_iteration_ops_per_event(), 50.0);
    assert_eq!(fact.model.ops_per_event(1234), 200);
}

#[test]
fn three_level_cost_adds_the_super_class_level() {
    let v = 10_000;
    let events = random_word_events(v, 1_000, 2);
    let indicator = vec![0; v];
    let cfg =
        FactoredConfig { gis: GisConfig { iterations: 1, tolerance: 0.0, ..Default::default() }, ..Default::default() };
    let h = ClassHierarchy::balanced(v, &[10, 100]).unwrap();
    let fact = train_factored(&events, &h, &indicator, &cfg).unwrap();
    assert_eq!(fact.first_iteration_ops_per_event(), 120.0);
    assert_eq!(fact.reports.len(), 3);
}

#[test]
fn words_outside_the_class_get_no_mass() {
    let corpus = synthetic_corpus(80, 3_000, 3);
    let (vocab, events) = prepare(&corpus, 1_000);
    let h = build_hierarchy(&events, vocab.len(), &[4, 9], 0).unwrap();
    let spaces = level_spaces(&h).unwrap();
    let word_space = spaces.last().unwrap();
    for c in 0..h.size(1) as u32 {
        let cands = word_space.candidates(c);
        assert_eq!(cands, h.members(1, c));
        assert!(cands.iter().all(|&w| h.class_of(1, w) == c));
    }
    let indicator: Vec<u32> = (0..vocab.len() as u32).map(|w| w % 8).collect();
    let cfg = FactoredConfig { gis: GisConfig { iterations: 5, ..Default::default() }, ..Default::default() };
    let fact = train_factored(&events, &h, &indicator, &cfg).unwrap();
    let words = &fact.model.levels()[2];
    for c in 0..h.size(1) as u32 {
        let dist = words.distribution([0, 5], c);
        assert_eq!(dist.len(), h.members(1, c).len());
    }
}

#[test]
fn trained_models_are_normalized() {
    let corpus = synthetic_corpus(150, 6_000, 5);
    let (vocab, events) = prepare(&corpus, 1_000);
    let v = vocab.len();
    let indicator: Vec<u32> = (0..v as u32).map(|w| w % 16).collect();
    let cfg = FactoredConfig { gis: GisConfig { iterations: 20, ..Default::default() }, ..Default::default() };
    let h = build_hierarchy(&events, v, &[12], 0).unwrap();
    let models = [
        train_unfactored(&events, v, &indicator, &cfg).unwrap().model,
        train_factored(&events, &h, &indicator, &cfg).unwrap().model,
    ];
    let mut r = rng(11);
    for m in &models {
        for _ in 0..100 {
            let hist = [r.gen_range(0..v as u32), r.gen_range(0..v as u32)];
            let total: f64 = (0..v as u32).map(|w| m.probability(hist, w)).sum();
            assert!((total - 1.0).abs() <= 1e-9, "{total}");
        }
    }
}
