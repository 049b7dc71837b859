#![allow(dead_code)]

use std::collections::BTreeMap;

use classmaxent::corpus::{build_vocabulary, extract_events, tokenize, Event, RawCorpus, Vocabulary};
use classmaxent::features::{FeatureKey, FeatureSet, TemplateKind, UNBOUND};
use classmaxent::gis::{CandidateSpace, MaxEntModel, TrainEvent};
use classmaxent::synth::{self, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Whether a feature fires, written out template by template.
/// `history = [w_{i-2}, w_{i-1}]`.
pub fn fires(key: &FeatureKey, indicator: &[u32], history: [u32; 2], w: u32) -> bool {
    let [w2, w1] = history;
    let (c2, c1) = (indicator[w2 as usize], indicator[w1 as usize]);
    if key.target != w {
        return false;
    }
    match key.kind {
        TemplateKind::Unigram => true,
        TemplateKind::ClassBigram => key.z == c1,
        TemplateKind::ClassSkipBigram => key.z == c2,
        TemplateKind::Bigram => key.z == w1,
        TemplateKind::SkipBigram => key.z == w2,
        TemplateKind::ClassTrigram => key.z == c1 && key.y == c2,
        TemplateKind::ClassBigramSkipBigram => key.z == c1 && key.y == w2,
        TemplateKind::BigramClassSkipBigram => key.z == w1 && key.y == c2,
    }
}

/// Every `(kind, W, Z, Y)` tuple an event instantiates.
pub fn tuples(indicator: &[u32], history: [u32; 2], w: u32) -> Vec<FeatureKey> {
    let [w2, w1] = history;
    let (c2, c1) = (indicator[w2 as usize], indicator[w1 as usize]);
    let k = |kind, z, y| FeatureKey { kind, target: w, z, y };
    vec![
        k(TemplateKind::Unigram, UNBOUND, UNBOUND),
        k(TemplateKind::ClassBigram, c1, UNBOUND),
        k(TemplateKind::ClassSkipBigram, c2, UNBOUND),
        k(TemplateKind::Bigram, w1, UNBOUND),
        k(TemplateKind::SkipBigram, w2, UNBOUND),
        k(TemplateKind::ClassTrigram, c1, c2),
        k(TemplateKind::ClassBigramSkipBigram, c1, w2),
        k(TemplateKind::BigramClassSkipBigram, w1, c2),
    ]
}

/// Brute-force feature inventory: tuple counts with count >= threshold, in
/// key order.
pub fn enumerate_features(events: &[Event], indicator: &[u32], threshold: u64) -> Vec<(FeatureKey, u64)> {
    let mut counts: BTreeMap<FeatureKey, u64> = BTreeMap::new();
    for e in events {
        for t in tuples(indicator, e.history, e.target) {
            *counts.entry(t).or_default() += e.count;
        }
    }
    counts.into_iter().filter(|&(_, c)| c >= threshold).collect()
}

/// Firing features of `(history, w)` by scanning the whole feature list.
pub fn scan_active(model: &MaxEntModel, history: [u32; 2], w: u32) -> Vec<usize> {
    let ind = model.features().indicator_classes();
    model.features().features().iter().filter(|f| fires(&f.key, ind, history, w)).map(|f| f.id as usize).collect()
}

/// `ln` of the unnormalized score, by full scan.
pub fn scan_log_score(model: &MaxEntModel, history: [u32; 2], w: u32) -> f64 {
    let active = scan_active(model, history, w);
    let l = model.lambdas();
    let c = model.slack_constant() as f64;
    active.iter().map(|&j| l[j]).sum::<f64>() + l[model.slack_index()] * (c - active.len() as f64)
}

/// Double loop over events and candidates. Returns per-constraint
/// expectations (slack last) and the training log-likelihood.
pub fn naive_expectations(model: &MaxEntModel, events: &[TrainEvent]) -> (Vec<f64>, f64) {
    let n = model.lambdas().len();
    let c = model.slack_constant() as f64;
    let mut expected = vec![0.0; n];
    let mut loglike = 0.0;
    for e in events {
        let cands = model.space().candidates(e.group);
        let scores: Vec<f64> = cands.iter().map(|&w| scan_log_score(model, e.history, w).exp()).collect();
        let z: f64 = scores.iter().sum();
        for (&w, s) in cands.iter().zip(&scores) {
            let p = s / z;
            let active = scan_active(model, e.history, w);
            for &j in &active {
                expected[j] += e.count as f64 * p;
            }
            expected[n - 1] += e.count as f64 * p * (c - active.len() as f64);
        }
        loglike += e.count as f64 * (scan_log_score(model, e.history, e.target).exp() / z).ln();
    }
    (expected, loglike)
}

/// Random events over `vocab` words; histories drawn from a small pool so
/// features repeat.
pub fn random_events(r: &mut ChaCha8Rng, vocab: usize, n: usize) -> Vec<Event> {
    let pool: Vec<[u32; 2]> =
        (0..(n / 3).max(1)).map(|_| [r.gen_range(0..vocab as u32), r.gen_range(0..vocab as u32)]).collect();
    (0..n)
        .map(|_| Event {
            history: pool[r.gen_range(0..pool.len())],
            target: r.gen_range(0..vocab as u32),
            count: r.gen_range(1..4),
        })
        .collect()
}

pub struct Problem {
    pub model: MaxEntModel,
    pub events: Vec<TrainEvent>,
}

/// A random unfactored problem with random weights.
pub fn random_problem(seed: u64, vocab: usize, n: usize, threshold: u64) -> Problem {
    let mut r = rng(seed);
    let events = random_events(&mut r, vocab, n);
    let classes = (vocab / 3).max(1) as u32;
    let indicator: Vec<u32> = (0..vocab as u32).map(|w| w % classes).collect();
    let fs =
        FeatureSet::instantiate(events.iter().map(|e| (e.history, e.target, e.count)), indicator, vocab, threshold)
            .unwrap();
    let train: Vec<TrainEvent> = events.iter().map(TrainEvent::ungrouped).collect();
    let mut model = MaxEntModel::new(fs, CandidateSpace::all(vocab), &train).unwrap();
    let lambdas = (0..model.lambdas().len()).map(|_| r.gen_range(-1.5..1.5)).collect();
    model.set_lambdas(lambdas).unwrap();
    Problem { model, events: train }
}

pub fn synthetic_corpus(lexicon: usize, tokens: usize, seed: u64) -> RawCorpus {
    synth::generate(&SynthConfig::small(lexicon, seed), tokens)
}

pub fn prepare(corpus: &RawCorpus, max_vocab: usize) -> (Vocabulary, Vec<Event>) {
    let vocab = build_vocabulary(corpus, max_vocab).unwrap();
    let events = extract_events(&tokenize(corpus, &vocab));
    (vocab, events)
}

pub fn toy_corpus() -> RawCorpus {
    RawCorpus::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy.txt"), false).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
