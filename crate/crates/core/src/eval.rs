//! Perplexity, trigram smoothing, interpolation and the training-speed
//! benchmark.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::classing::{build_hierarchy, default_level_sizes, induce_classes};
use crate::corpus::{build_vocabulary, extract_events, tokenize, Event, RawCorpus, TokenStream};
use crate::error::{Error, Result};
use crate::factored::{self, level_spaces, FactoredModel};
use crate::features::{DEFAULT_INDICATOR_CLASSES, DEFAULT_MIN_COUNT};
use crate::gis::{self, CandidateSpace, GisConfig, TrainEvent, Variant};

/// A conditional distribution over the vocabulary given two history words.
pub trait LanguageModel: Sync {
    fn vocab_size(&self) -> usize;

    fn log_prob(&self, history: [u32; 2], word: u32) -> f64;

    fn prob(&self, history: [u32; 2], word: u32) -> f64 {
        self.log_prob(history, word).exp()
    }
}

impl LanguageModel for FactoredModel {
    fn vocab_size(&self) -> usize {
        FactoredModel::vocab_size(self)
    }

    fn log_prob(&self, history: [u32; 2], word: u32) -> f64 {
        self.log_probability(history, word)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for &M {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn log_prob(&self, history: [u32; 2], word: u32) -> f64 {
        (**self).log_prob(history, word)
    }
}

/// Every word equally likely.
#[derive(Debug, Clone, Copy)]
pub struct Uniform(pub usize);

impl LanguageModel for Uniform {
    fn vocab_size(&self) -> usize {
        self.0
    }

    fn log_prob(&self, _: [u32; 2], _: u32) -> f64 {
        -(self.0 as f64).ln()
    }
}

/// Deleted-interpolation trigram model. Each order mixes its relative
/// frequency with the next lower order, `P3 = l3 f3 + (1 - l3) P2`, down to a
/// uniform floor; an order whose context was never seen defers entirely to
/// the lower order.
#[derive(Debug, Clone)]
pub struct TrigramLM {
    vocab_size: usize,
    total: u64,
    unigram: Vec<u64>,
    bigram: FxHashMap<(u32, u32), u64>,
    bigram_context: FxHashMap<u32, u64>,
    trigram: FxHashMap<([u32; 2], u32), u64>,
    trigram_context: FxHashMap<[u32; 2], u64>,
    /// `[l1, l2, l3]`: unigram, bigram and trigram mixing weights.
    pub weights: [f64; 3],
}

impl TrigramLM {
    fn from_counts(events: &[Event], vocab_size: usize, weights: [f64; 3]) -> Self {
        let mut lm = TrigramLM {
            vocab_size,
            total: 0,
            unigram: vec![0; vocab_size],
            bigram: FxHashMap::default(),
            bigram_context: FxHashMap::default(),
            trigram: FxHashMap::default(),
            trigram_context: FxHashMap::default(),
            weights,
        };
        for e in events {
            let c = e.count;
            lm.total += c;
            lm.unigram[e.target as usize] += c;
            *lm.bigram.entry((e.history[1], e.target)).or_default() += c;
            *lm.bigram_context.entry(e.history[1]).or_default() += c;
            *lm.trigram.entry((e.history, e.target)).or_default() += c;
            *lm.trigram_context.entry(e.history).or_default() += c;
        }
        lm
    }

    /// Relative frequencies `(f1, f2, f3)`; `None` where the context is unseen.
    fn frequencies(&self, history: [u32; 2], w: u32) -> (f64, Option<f64>, Option<f64>) {
        let f1 = if self.total > 0 { self.unigram[w as usize] as f64 / self.total as f64 } else { 0.0 };
        let f2 = self
            .bigram_context
            .get(&history[1])
            .map(|&n| self.bigram.get(&(history[1], w)).copied().unwrap_or(0) as f64 / n as f64);
        let f3 = self
            .trigram_context
            .get(&history)
            .map(|&n| self.trigram.get(&(history, w)).copied().unwrap_or(0) as f64 / n as f64);
        (f1, f2, f3)
    }

    fn mix(&self, (f1, f2, f3): (f64, Option<f64>, Option<f64>)) -> [f64; 3] {
        let [l1, l2, l3] = self.weights;
        let p1 = l1 * f1 + (1.0 - l1) / self.vocab_size as f64;
        let p2 = f2.map_or(p1, |f| l2 * f + (1.0 - l2) * p1);
        let p3 = f3.map_or(p2, |f| l3 * f + (1.0 - l3) * p2);
        [p1, p2, p3]
    }
}

impl LanguageModel for TrigramLM {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn log_prob(&self, history: [u32; 2], word: u32) -> f64 {
        self.mix(self.frequencies(history, word))[2].ln()
    }
}

/// Splits event mass so every tenth token goes to the held-out side.
fn holdout_split(events: &[Event]) -> (Vec<Event>, Vec<Event>) {
    let (mut train, mut held) = (Vec::new(), Vec::new());
    let mut position = 0u64;
    for e in events {
        // positions p in [position, position + count) with p % 10 == 9
        let end = position + e.count;
        let held_count = (end + 1) / 10 - (position + 1) / 10;
        position = end;
        if held_count > 0 {
            held.push(Event { count: held_count, ..*e });
        }
        if e.count > held_count {
            train.push(Event { count: e.count - held_count, ..*e });
        }
    }
    (train, held)
}

/// Counts all events, with mixing weights fit by EM on a 10% held-out split.
pub fn train_trigram(events: &[Event], vocab_size: usize) -> Result<TrigramLM> {
    let (train, held) = holdout_split(events);
    if train.is_empty() || held.is_empty() {
        return Err(Error::invalid("corpus too small for a 10% held-out split"));
    }
    let mut lm = TrigramLM::from_counts(&train, vocab_size, [0.5, 0.5, 0.5]);
    for _ in 0..200 {
        let mut num = [0.0; 3];
        let mut den = [0.0; 3];
        for e in &held {
            let freqs = lm.frequencies(e.history, e.target);
            let [p1, p2, p3] = lm.mix(freqs);
            let c = e.count as f64;
            let [l1, l2, l3] = lm.weights;
            // mass reaching each order from above
            let mut reach = 1.0;
            if let Some(f3) = freqs.2 {
                num[2] += c * l3 * f3 / p3;
                den[2] += c;
                reach = (1.0 - l3) * p2 / p3;
            }
            if let Some(f2) = freqs.1 {
                num[1] += c * reach * l2 * f2 / p2;
                den[1] += c * reach;
                reach *= (1.0 - l2) * p1 / p2;
            }
            num[0] += c * reach * l1 * freqs.0 / p1;
            den[0] += c * reach;
        }
        let mut next = lm.weights;
        for k in 0..3 {
            if den[k] > 0.0 {
                next[k] = (num[k] / den[k]).clamp(0.0, 1.0 - 1e-6);
            }
        }
        let delta = next.iter().zip(lm.weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        lm.weights = next;
        if delta < 1e-9 {
            break;
        }
    }
    Ok(TrigramLM::from_counts(events, vocab_size, lm.weights))
}

/// `alpha * P_maxent + (1 - alpha) * P_trigram`.
pub fn interpolate(maxent_prob: f64, trigram_prob: f64, alpha: f64) -> f64 {
    alpha * maxent_prob + (1.0 - alpha) * trigram_prob
}

#[derive(Debug, Clone)]
pub struct Interpolated<A, B> {
    pub maxent: A,
    pub trigram: B,
    pub alpha: f64,
}

impl<A: LanguageModel, B: LanguageModel> LanguageModel for Interpolated<A, B> {
    fn vocab_size(&self) -> usize {
        self.maxent.vocab_size()
    }

    fn log_prob(&self, history: [u32; 2], word: u32) -> f64 {
        interpolate(self.maxent.prob(history, word), self.trigram.prob(history, word), self.alpha).ln()
    }
}

fn mixture_loglik(pairs: &[(f64, f64)], alpha: f64) -> f64 {
    pairs.iter().map(|&(a, b)| interpolate(a, b, alpha).ln()).sum()
}

/// Best of a 0.05-step grid over `[0, 1]`.
pub fn fit_alpha_grid(pairs: &[(f64, f64)]) -> f64 {
    (0..=20)
        .map(|i| i as f64 * 0.05)
        .map(|a| (a, mixture_loglik(pairs, a)))
        .fold((0.5, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0
}

/// EM estimate of the mixing weight from `(P_maxent, P_trigram)` pairs on
/// held-out text; falls back to the grid optimum if that is better.
pub fn fit_alpha(pairs: &[(f64, f64)]) -> f64 {
    if pairs.is_empty() {
        return 0.5;
    }
    let mut alpha = 0.5;
    for _ in 0..500 {
        let post: f64 = pairs
            .iter()
            .map(|&(a, b)| {
                let p = interpolate(a, b, alpha);
                if p > 0.0 {
                    alpha * a / p
                } else {
                    0.0
                }
            })
            .sum();
        let next = post / pairs.len() as f64;
        let done = (next - alpha).abs() < 1e-10;
        alpha = next;
        if done {
            break;
        }
    }
    let grid = fit_alpha_grid(pairs);
    if mixture_loglik(pairs, grid) > mixture_loglik(pairs, alpha) {
        grid
    } else {
        alpha
    }
}

/// Held-out `(P_maxent, P_trigram)` pairs for every position of `stream`.
pub fn probability_pairs<A: LanguageModel, B: LanguageModel>(
    maxent: &A,
    trigram: &B,
    stream: &TokenStream,
) -> Vec<(f64, f64)> {
    let positions: Vec<_> = stream.positions().collect();
    positions.par_iter().map(|&(h, w)| (maxent.prob(h, w), trigram.prob(h, w))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenLog {
    pub position: usize,
    pub word: u32,
    pub logprob: f64,
}

#[derive(Debug, Clone)]
pub struct PerplexityReport {
    pub perplexity: f64,
    pub tokens: usize,
    pub log: Vec<TokenLog>,
}

impl PerplexityReport {
    /// `position<TAB>word<TAB>logprob` lines.
    pub fn write_log<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "position\tword\tlogprob")?;
        for t in &self.log {
            writeln!(out, "{}\t{}\t{:.17e}", t.position, t.word, t.logprob)?;
        }
        Ok(())
    }
}

/// Perplexity from logged per-token natural-log probabilities.
pub fn perplexity_from_log(logprobs: &[f64]) -> f64 {
    (-logprobs.iter().sum::<f64>() / logprobs.len() as f64).exp()
}

/// `exp(-(1/N) sum ln P(w_i | h_i))` over every word position of `test`.
pub fn perplexity<M: LanguageModel>(model: &M, test: &TokenStream) -> Result<PerplexityReport> {
    let positions: Vec<_> = test.positions().collect();
    if positions.is_empty() {
        return Err(Error::invalid("test set has no tokens"));
    }
    let v = model.vocab_size();
    let logprobs: Vec<f64> = positions
        .par_iter()
        .map(|&(h, w)| if (w as usize) < v { model.log_prob(h, w) } else { f64::NEG_INFINITY })
        .collect();
    let mut log = Vec::with_capacity(positions.len());
    for (i, (&(_, w), &lp)) in positions.iter().zip(&logprobs).enumerate() {
        if !lp.is_finite() {
            return Err(Error::ZeroProbability { position: i, word: w });
        }
        log.push(TokenLog { position: i, word: w, logprob: lp });
    }
    Ok(PerplexityReport { perplexity: perplexity_from_log(&logprobs), tokens: positions.len(), log })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Gis,
    GisCache,
    Factored2,
    Factored3,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gis, Method::GisCache, Method::Factored2, Method::Factored3];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gis => "gis",
            Method::GisCache => "gis-cache",
            Method::Factored2 => "factored2",
            Method::Factored3 => "factored3",
        }
    }

    /// Class levels of the factoring hierarchy (0 when unfactored).
    pub fn class_levels(self) -> usize {
        match self {
            Method::Gis | Method::GisCache => 0,
            Method::Factored2 => 1,
            Method::Factored3 => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::invalid(format!("unknown method {s:?} (expected gis, gis-cache, factored2 or factored3)"))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub max_vocab: usize,
    pub min_count: u64,
    pub indicator_classes: usize,
    /// Timed GIS iterations per run.
    pub iterations: usize,
    /// Runs per `(method, size)`; the mean is reported with the spread.
    pub repetitions: usize,
    pub threads: usize,
    pub seed: u64,
    /// Overrides the default class counts per factoring depth.
    pub level_sizes: Option<Vec<usize>>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            max_vocab: crate::corpus::DEFAULT_MAX_VOCAB,
            min_count: DEFAULT_MIN_COUNT,
            indicator_classes: DEFAULT_INDICATOR_CLASSES,
            iterations: 1,
            repetitions: 1,
            threads: 1,
            seed: 0,
            level_sizes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub train_size: usize,
    pub vocab_size: usize,
    pub events: usize,
    pub class_sizes: Vec<usize>,
    pub sec_per_iter: f64,
    /// Max minus min per-iteration time across repetitions.
    pub sec_spread: f64,
    /// Measured candidate evaluations per event in one iteration.
    pub ops_per_event: f64,
    /// The same quantity computed from the candidate-space sizes alone.
    pub analytic_ops_per_event: f64,
    pub relative_speed: f64,
    /// Class induction plus feature instantiation, excluded from timing.
    pub setup_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchRow>,
}

impl BenchmarkReport {
    pub const HEADER: &'static str = "method\ttrain_size\tsec_per_iter\tops_per_event\trelative_speed";

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::HEADER)?;
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{}\t{:.6}\t{:.4}\t{:.4}",
                r.method, r.train_size, r.sec_per_iter, r.ops_per_event, r.relative_speed
            )?;
        }
        Ok(())
    }

    pub fn row(&self, method: Method, size: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method && r.train_size == size)
    }
}

struct Prepared {
    models: Vec<(gis::MaxEntModel, Vec<TrainEvent>)>,
    class_sizes: Vec<usize>,
    analytic_ops: f64,
}

fn prepare(
    method: Method,
    events: &[Event],
    vocab_size: usize,
    indicator: &[u32],
    cfg: &BenchConfig,
) -> Result<Prepared> {
    if method.class_levels() == 0 {
        let train: Vec<TrainEvent> = events.iter().map(TrainEvent::ungrouped).collect();
        let model = factored::build_level(&train, CandidateSpace::all(vocab_size), indicator, cfg.min_count)?;
        return Ok(Prepared { models: vec![(model, train)], class_sizes: Vec::new(), analytic_ops: vocab_size as f64 });
    }
    let sizes = match &cfg.level_sizes {
        Some(s) if s.len() == method.class_levels() => s.clone(),
        _ => default_level_sizes(vocab_size, method.class_levels()),
    };
    let hierarchy = build_hierarchy(events, vocab_size, &sizes, cfg.seed)?;
    let per_level = factored::factor_events(events, &hierarchy)?;
    let spaces = level_spaces(&hierarchy)?;
    let mut models = Vec::new();
    for (level_events, space) in per_level.into_iter().zip(spaces) {
        let m = factored::build_level(&level_events, space, indicator, cfg.min_count)?;
        models.push((m, level_events));
    }
    let analytic: u64 = events
        .iter()
        .map(|e| {
            factored::word_route(&hierarchy, e.target)
                .into_iter()
                .zip(&models)
                .map(|((g, _), (m, _))| m.space().candidates(g).len() as u64)
                .sum::<u64>()
        })
        .sum();
    Ok(Prepared { models, class_sizes: sizes, analytic_ops: analytic as f64 / events.len() as f64 })
}

/// Times training iterations of each method on growing prefixes of
/// `corpus`. Classes are re-induced from scratch at every size.
pub fn benchmark(
    methods: &[Method],
    sizes: &[usize],
    corpus: &RawCorpus,
    cfg: &BenchConfig,
) -> Result<BenchmarkReport> {
    if methods.is_empty() || sizes.is_empty() {
        return Err(Error::invalid("benchmark needs at least one method and one size"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("benchmark sizes must be strictly ascending"));
    }
    let available = corpus.token_count();
    if *sizes.last().unwrap() > available {
        return Err(Error::invalid(format!("size {} exceeds the corpus ({available} tokens)", sizes.last().unwrap())));
    }
    let gis_cfg =
        GisConfig { iterations: cfg.iterations.max(1), tolerance: 0.0, threads: cfg.threads, variant: Variant::Plain };
    let mut report = BenchmarkReport::default();
    for &size in sizes {
        let sub = corpus.prefix(size);
        let vocab = build_vocabulary(&sub, cfg.max_vocab)?;
        let events = extract_events(&tokenize(&sub, &vocab));
        let setup = Instant::now();
        let indicator =
            induce_classes(&events, vocab.len(), cfg.indicator_classes.min(vocab.len()), cfg.seed)?.level(0).to_vec();
        let indicator_seconds = setup.elapsed().as_secs_f64();
        let mut rows = Vec::new();
        for &method in methods {
            let start = Instant::now();
            let prepared = prepare(method, &events, vocab.len(), &indicator, cfg)?;
            let setup_seconds = indicator_seconds + start.elapsed().as_secs_f64();
            let variant = if method == Method::GisCache { Variant::UnigramCached } else { Variant::Plain };
            let mut per_iter = Vec::new();
            let mut ops = 0u64;
            for _ in 0..cfg.repetitions.max(1) {
                let mut seconds = 0.0;
                let mut run_ops = 0u64;
                for (model, level_events) in &prepared.models {
                    let mut model = model.clone();
                    let report = gis::train(&mut model, level_events, &GisConfig { variant, ..gis_cfg })?;
                    seconds += report.log.iter().map(|l| l.seconds).sum::<f64>() / report.log.len() as f64;
                    run_ops += report.log[0].ops;
                }
                per_iter.push(seconds);
                ops = run_ops;
            }
            let mean = per_iter.iter().sum::<f64>() / per_iter.len() as f64;
            let spread =
                per_iter.iter().cloned().fold(f64::MIN, f64::max) - per_iter.iter().cloned().fold(f64::MAX, f64::min);
            log::info!("{method} @ {size}: {mean:.4}s/iter, {:.1} ops/event", ops as f64 / events.len() as f64);
            rows.push(BenchRow {
                method,
                train_size: size,
                vocab_size: vocab.len(),
                events: events.len(),
                class_sizes: prepared.class_sizes,
                sec_per_iter: mean,
                sec_spread: spread,
                ops_per_event: ops as f64 / events.len() as f64,
                analytic_ops_per_event: prepared.analytic_ops,
                relative_speed: 1.0,
                setup_seconds,
            });
        }
        let baseline = rows.iter().find(|r| r.method == Method::Gis).unwrap_or(&rows[0]).sec_per_iter;
        for r in &mut rows {
            r.relative_speed = baseline / r.sec_per_iter;
        }
        report.rows.extend(rows);
    }
    Ok(report)
}
