mod common;

use classmaxent::classing::{
    build_hierarchy, class_bigram_loglik, induce_classes, induce_hierarchy_traced, ClassHierarchy,
};
use classmaxent::corpus::{Event, RawCorpus};
use classmaxent::synth;
use common::*;
use proptest::prelude::*;
use rand::Rng;

/// Best class-bigram log-likelihood over every 2-partition of `n` words.
fn best_two_partition(events: &[Event], n: usize) -> (f64, Vec<u32>) {
    let mut best = (f64::NEG_INFINITY, Vec::new());
    // word 0 stays in class 0 to skip mirror images
    for mask in 0u32..(1 << (n - 1)) {
        let assign: Vec<u32> = (0..n).map(|w| if w == 0 { 0 } else { (mask >> (w - 1)) & 1 }).collect();
        if assign.iter().all(|&c| c == 0) {
            continue;
        }
        let ll = class_bigram_loglik(events, &assign);
        if ll > best.0 {
            best = (ll, assign);
        }
    }
    best
}

fn same_partition(a: &[u32], b: &[u32]) -> bool {
    a.len() == b.len() && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

#[test]
fn tiny_corpus_finds_the_optimal_split() {
    let corpus = RawCorpus::parse("a b a b c d c d", false);
    let (vocab, events) = prepare(&corpus, 100);
    let h = induce_classes(&events, vocab.len(), 2, 0).unwrap();
    let (best, best_assign) = best_two_partition(&events, vocab.len());
    let got = class_bigram_loglik(&events, h.level(0));
    let [a, b, c, d] = ["a", "b", "c", "d"].map(|w| vocab.id(w).unwrap());
    let ac_bd = h.class_of(0, a) == h.class_of(0, c)
        && h.class_of(0, b) == h.class_of(0, d)
        && h.class_of(0, a) != h.class_of(0, b);
    assert!(ac_bd || same_partition(h.level(0), &best_assign) || got >= best - 1e-9, "{:?}", h.level(0));
}

#[test]
fn greedy_split_against_exhaustive_search() {
    let mut gaps = Vec::new();
    for seed in 0..12 {
        let mut r = rng(seed);
        let n = 6 + (seed as usize % 5);
        let events = random_events(&mut r, n, 60);
        let h = induce_classes(&events, n, 2, seed).unwrap();
        let got = class_bigram_loglik(&events, h.level(0));
        let (best, _) = best_two_partition(&events, n);
        assert!(got <= best + 1e-9);
        // never worse than random 2-partitions
        for _ in 0..20 {
            let mut assign: Vec<u32> = (0..n).map(|_| r.gen_range(0..2)).collect();
            assign[0] = 0;
            assign[1] = 1;
            assert!(got >= class_bigram_loglik(&events, &assign) - 1e-9, "seed {seed}");
        }
        gaps.push(best - got);
    }
    eprintln!("greedy gaps to the exhaustive optimum: {gaps:.3?}");
}

#[test]
fn twelve_word_hierarchy_nests() {
    let corpus = synth::generate(&synth::SynthConfig::small(9, 1), 400);
    let (vocab, events) = prepare(&corpus, 100);
    assert_eq!(vocab.len(), 12);
    let h = build_hierarchy(&events, 12, &[2, 4], 3).unwrap();
    for w in 0..12u32 {
        for v in 0..12u32 {
            if h.class_of(1, w) == h.class_of(1, v) {
                assert_eq!(h.class_of(0, w), h.class_of(0, v));
            }
        }
    }
    assert_eq!(h.sizes(), &[2, 4]);
}

#[test]
fn large_vocabulary_two_level_structure() {
    // every word exactly four times, shuffled
    let mut r = rng(5);
    let mut tokens: Vec<usize> = (0..240_000).map(|i| i % 60_000).collect();
    for i in (1..tokens.len()).rev() {
        tokens.swap(i, r.gen_range(0..=i));
    }
    let corpus =
        RawCorpus { sentences: tokens.chunks(20).map(|c| c.iter().map(|t| format!("u{t}")).collect()).collect() };
    let (vocab, events) = prepare(&corpus, 60_000);
    assert_eq!(vocab.content_len(), 60_000);
    let h = build_hierarchy(&events, vocab.len(), &[10, 100], 0).unwrap();
    for w in 0..vocab.len() as u32 {
        assert_eq!(h.path(w).len(), 2);
        assert_eq!(h.parent(1, h.class_of(1, w)), Some(h.class_of(0, w)));
    }
    assert_eq!(h.sizes(), &[10, 100]);
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn induced_hierarchies_are_nested_partitions(seed in 0u64..10_000, n in 4usize..40, levels in 1usize..4) {
        let mut r = rng(seed);
        let events = random_events(&mut r, n, 200);
        let mut sizes: Vec<usize> = (0..levels).map(|k| (2 + 3 * k).min(n)).collect();
        sizes.dedup();
        let ind = induce_hierarchy_traced(&events, n, &sizes, seed).unwrap();
        let h: &ClassHierarchy = &ind.hierarchy;
        for k in 0..h.num_levels() {
            let mut seen = vec![false; n];
            for c in 0..h.size(k) as u32 {
                prop_assert!(!h.members(k, c).is_empty());
                for &w in h.members(k, c) {
                    prop_assert!(!seen[w as usize]);
                    seen[w as usize] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
            if k > 0 {
                for w in 0..n as u32 {
                    prop_assert_eq!(h.parent(k, h.class_of(k, w)), Some(h.class_of(k - 1, w)));
                }
            }
        }
        for w in ind.trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
        let last = h.level(h.num_levels() - 1);
        prop_assert!((class_bigram_loglik(&events, last) - ind.objective).abs() <= 1e-6 * ind.objective.abs().max(1.0));
    }
}
