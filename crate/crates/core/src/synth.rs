//! Deterministic synthetic corpora with Zipfian word frequencies and hidden
//! class structure, for tests, examples and benchmarks.
//!
//! Each lexicon word belongs to one hidden class. The next class depends on
//! the classes of the two previous words; the word is then drawn from its
//! class by frequency, except that with some probability the previous word's
//! fixed collocate is emitted instead. Vocabulary keeps growing with corpus
//! size, as it does with real text.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::RawCorpus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub lexicon: usize,
    pub classes: usize,
    pub zipf: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability of emitting the previous word's collocate.
    pub collocation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { lexicon: 50_000, classes: 40, zipf: 1.0, min_len: 5, max_len: 25, collocation: 0.15, seed: 7 }
    }
}

impl SynthConfig {
    /// Small lexicon suited to fast tests.
    pub fn small(lexicon: usize, seed: u64) -> Self {
        SynthConfig { lexicon, classes: 12, seed, ..Default::default() }
    }
}

struct Language {
    emit: Vec<(Vec<usize>, WeightedIndex<f64>)>,
    after_prev: Vec<WeightedIndex<f64>>,
    after_prev2: Vec<WeightedIndex<f64>>,
    start: WeightedIndex<f64>,
    class_of: Vec<usize>,
    collocate: Vec<usize>,
}

impl Language {
    fn new(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Self {
        let k = cfg.classes.clamp(1, cfg.lexicon.max(1));
        let class_of: Vec<usize> = (0..cfg.lexicon).map(|w| w % k).collect();
        let mut members = vec![Vec::new(); k];
        for w in 0..cfg.lexicon {
            members[class_of[w]].push(w);
        }
        let emit = members
            .into_iter()
            .map(|m| {
                let weights: Vec<f64> = m.iter().map(|&w| 1.0 / ((w + 1) as f64).powf(cfg.zipf)).collect();
                let dist = WeightedIndex::new(&weights).unwrap();
                (m, dist)
            })
            .collect();
        let sparse_row = |rng: &mut ChaCha8Rng| {
            let mut row = vec![0.02; k];
            for _ in 0..3 {
                row[rng.gen_range(0..k)] += rng.gen_range(1.0..4.0);
            }
            WeightedIndex::new(&row).unwrap()
        };
        let after_prev = (0..k).map(|_| sparse_row(rng)).collect();
        let after_prev2 = (0..k).map(|_| sparse_row(rng)).collect();
        let start = sparse_row(rng);
        let collocate = (0..cfg.lexicon)
            .map(|_| {
                // collocates lean frequent
                let r: f64 = rng.gen_range(0.0f64..1.0);
                ((r * r * r) * cfg.lexicon as f64) as usize
            })
            .collect();
        Language { emit, after_prev, after_prev2, start, class_of, collocate }
    }

    fn sentence(&self, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let len = rng.gen_range(cfg.min_len..=cfg.max_len.max(cfg.min_len));
        let mut out: Vec<usize> = Vec::with_capacity(len);
        for i in 0..len {
            if i >= 1 && rng.gen_bool(cfg.collocation) {
                out.push(self.collocate[out[i - 1]]);
                continue;
            }
            let class = match i {
                0 => self.start.sample(rng),
                1 => self.after_prev[self.class_of[out[0]]].sample(rng),
                _ => {
                    if rng.gen_bool(0.7) {
                        self.after_prev[self.class_of[out[i - 1]]].sample(rng)
                    } else {
                        self.after_prev2[self.class_of[out[i - 2]]].sample(rng)
                    }
                }
            };
            let (members, dist) = &self.emit[class];
            out.push(members[dist.sample(rng)]);
        }
        out
    }
}

/// At least `tokens` tokens of synthetic text, whole sentences only.
pub fn generate(cfg: &SynthConfig, tokens: usize) -> RawCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lang = Language::new(cfg, &mut rng);
    let mut sentences = Vec::new();
    let mut total = 0;
    while total < tokens {
        let s = lang.sentence(cfg, &mut rng);
        total += s.len();
        sentences.push(s.into_iter().map(|w| format!("w{w}")).collect());
    }
    RawCorpus { sentences }
}

/// Independent uniform draws over `k` word types.
pub fn uniform(k: usize, tokens: usize, sentence_len: usize, seed: u64) -> RawCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences = (0..tokens.div_ceil(sentence_len))
        .map(|_| (0..sentence_len).map(|_| format!("u{}", rng.gen_range(0..k))).collect())
        .collect();
    RawCorpus { sentences }
}

pub fn to_text(corpus: &RawCorpus) -> String {
    let mut s = String::new();
    for sent in &corpus.sentences {
        s.push_str(&sent.join(" "));
        s.push('\n');
    }
    s
}
