//! Conditional maximum-entropy models trained with Generalized Iterative
//! Scaling.
//!
//! `P(w | h) = exp(sum_j lambda_j f_j(w, h)) / Z(h)` where `w` ranges over a
//! candidate space: the whole outcome set, or the group an event belongs to
//! (the members of one class). A slack feature pads the number of firing
//! features of every `(training history, candidate)` pair up to the constant
//! `C`, and each iteration applies
//! `lambda_j += ln(empirical_j / expected_j) / C`.
//!
//! Two expectation passes are provided. The plain pass scores every
//! candidate of every event. The unigram-cached pass precomputes each
//! candidate's context-free score once per iteration and only visits
//! candidates that have a contextual feature firing, which is the same
//! arithmetic rearranged.

use std::io::{BufRead, Write};
use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::features::{ContextHits, Feature, FeatureKey, FeatureSet, TemplateKind, UNBOUND};

pub const DEFAULT_ITERATIONS: usize = 100;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

/// `ln(1e300)`: scores above this are reported as overflow.
const MAX_LOG_SCORE: f64 = 690.775_527_898_213_7;

/// A training observation for one model: the target outcome, and the group
/// whose members form the candidate space for this event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrainEvent {
    pub history: [u32; 2],
    pub target: u32,
    pub group: u32,
    pub count: u64,
}

impl TrainEvent {
    pub fn ungrouped(e: &crate::corpus::Event) -> Self {
        TrainEvent { history: e.history, target: e.target, group: 0, count: e.count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// Every outcome competes.
    All,
    /// Outcomes are partitioned; an event only competes within its group.
    Grouped,
}

/// The candidate outcomes of each event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSpace {
    kind: SpaceKind,
    groups: Vec<Vec<u32>>,
    group_of: Vec<u32>,
    position: Vec<u32>,
}

impl CandidateSpace {
    pub fn all(num_outcomes: usize) -> Self {
        CandidateSpace {
            kind: SpaceKind::All,
            groups: vec![(0..num_outcomes as u32).collect()],
            group_of: vec![0; num_outcomes],
            position: (0..num_outcomes as u32).collect(),
        }
    }

    /// `groups` must partition `0..num_outcomes` into non-empty sets.
    pub fn grouped(groups: Vec<Vec<u32>>, num_outcomes: usize) -> Result<Self> {
        let mut group_of = vec![UNBOUND; num_outcomes];
        let mut position = vec![UNBOUND; num_outcomes];
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::invalid(format!("candidate group {g} is empty")));
            }
            for (i, &w) in members.iter().enumerate() {
                let slot = group_of
                    .get_mut(w as usize)
                    .ok_or_else(|| Error::invalid(format!("group {g} holds outcome {w} >= {num_outcomes}")))?;
                if *slot != UNBOUND {
                    return Err(Error::invalid(format!("outcome {w} in two candidate groups")));
                }
                *slot = g as u32;
                position[w as usize] = i as u32;
            }
        }
        if let Some(w) = group_of.iter().position(|&g| g == UNBOUND) {
            return Err(Error::invalid(format!("outcome {w} is in no candidate group")));
        }
        Ok(CandidateSpace { kind: SpaceKind::Grouped, groups, group_of, position })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn num_outcomes(&self) -> usize {
        self.group_of.len()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    #[inline]
    pub fn candidates(&self, group: u32) -> &[u32] {
        &self.groups[group as usize]
    }

    #[inline]
    pub fn group_of(&self, outcome: u32) -> u32 {
        self.group_of[outcome as usize]
    }

    #[inline]
    pub fn contains(&self, group: u32, outcome: u32) -> bool {
        self.group_of[outcome as usize] == group
    }

    fn descriptor(&self) -> String {
        match self.kind {
            SpaceKind::All => format!("all {}", self.num_outcomes()),
            SpaceKind::Grouped => format!("grouped {} {}", self.num_groups(), self.num_outcomes()),
        }
    }
}

/// Per-iteration context-free quantities: `base[w]` is the log-score of `w`
/// when no contextual feature fires (unigram weight plus full slack).
#[derive(Debug, Clone, Default)]
struct BulkCache {
    base: Vec<f64>,
    unigram_score: Vec<f64>,
    group_sum: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MaxEntModel {
    features: FeatureSet,
    /// One weight per feature, then the slack weight.
    lambdas: Vec<f64>,
    space: CandidateSpace,
    slack_constant: u32,
    iterations: usize,
    has_unigram: Vec<u8>,
    cache: BulkCache,
}

impl MaxEntModel {
    /// Zero-weight model; `C` is the largest number of features firing on any
    /// `(training history, candidate)` pair.
    pub fn new(features: FeatureSet, space: CandidateSpace, events: &[TrainEvent]) -> Result<Self> {
        let c = max_firing(&features, &space, events)?.max(1);
        Self::with_slack_constant(features, space, c)
    }

    pub fn with_slack_constant(features: FeatureSet, space: CandidateSpace, slack_constant: u32) -> Result<Self> {
        if features.num_outcomes() != space.num_outcomes() {
            return Err(Error::invalid(format!(
                "features cover {} outcomes, candidate space {}",
                features.num_outcomes(),
                space.num_outcomes()
            )));
        }
        if slack_constant == 0 {
            return Err(Error::invalid("slack constant must be positive"));
        }
        let mut features = features;
        if space.kind == SpaceKind::Grouped {
            features.sort_contexts_by_group(&space.group_of);
        }
        let has_unigram = (0..space.num_outcomes() as u32).map(|w| features.unigram(w).is_some() as u8).collect();
        let mut m = MaxEntModel {
            lambdas: vec![0.0; features.len() + 1],
            features,
            space,
            slack_constant,
            iterations: 0,
            has_unigram,
            cache: BulkCache::default(),
        };
        m.refresh_cache();
        Ok(m)
    }

    pub fn features(&self) -> &FeatureSet {
        &self.features
    }

    pub fn space(&self) -> &CandidateSpace {
        &self.space
    }

    pub fn slack_constant(&self) -> u32 {
        self.slack_constant
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn slack_index(&self) -> usize {
        self.features.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn set_lambdas(&mut self, lambdas: Vec<f64>) -> Result<()> {
        if lambdas.len() != self.lambdas.len() {
            return Err(Error::invalid(format!("expected {} weights, got {}", self.lambdas.len(), lambdas.len())));
        }
        if let Some(j) = lambdas.iter().position(|l| !l.is_finite()) {
            return Err(Error::invalid(format!("weight {j} is not finite")));
        }
        self.lambdas = lambdas;
        self.refresh_cache();
        Ok(())
    }

    fn slack_lambda(&self) -> f64 {
        self.lambdas[self.features.len()]
    }

    #[inline]
    fn unigram_lambda(&self, w: u32) -> f64 {
        self.features.unigram(w).map_or(0.0, |j| self.lambdas[j as usize])
    }

    fn refresh_cache(&mut self) {
        let n = self.space.num_outcomes();
        let (c, ls) = (self.slack_constant as f64, self.slack_lambda());
        let base: Vec<f64> =
            (0..n as u32).map(|w| self.unigram_lambda(w) + ls * (c - self.has_unigram[w as usize] as f64)).collect();
        let unigram_score: Vec<f64> = base.iter().map(|b| b.exp()).collect();
        let group_sum = self.space.groups.iter().map(|g| g.iter().map(|&w| unigram_score[w as usize]).sum()).collect();
        self.cache = BulkCache { base, unigram_score, group_sum };
    }

    /// Number of features firing on `(history, candidate)`, slack excluded.
    pub fn firing_count(&self, history: [u32; 2], candidate: u32) -> u32 {
        self.features.active_features(history, candidate).len() as u32
    }

    /// `exp(sum of firing weights)`, slack included.
    pub fn unnormalized_score(&self, history: [u32; 2], candidate: u32) -> Result<f64> {
        let active = self.features.active_features(history, candidate);
        let slack = self.slack_constant as f64 - active.len() as f64;
        let log_score = active.iter().map(|&j| self.lambdas[j as usize]).sum::<f64>() + self.slack_lambda() * slack;
        if log_score > MAX_LOG_SCORE || log_score.is_nan() {
            return Err(Error::Overflow(log_score));
        }
        Ok(log_score.exp())
    }

    /// Contextual features of `history` whose outcome lies in `group`.
    #[inline]
    fn hits(&self, history: [u32; 2], group: u32) -> ContextHits<'_> {
        match self.space.kind {
            SpaceKind::All => self.features.context_hits(history),
            SpaceKind::Grouped => self.features.context_hits_in_group(history, &self.space.group_of, group),
        }
    }

    /// Contextual adjustments for one history restricted to `group`:
    /// `(outcome, summed contextual weight, contextual firing count)`.
    fn touched(&self, history: [u32; 2], group: u32) -> Vec<(u32, f64, u32)> {
        let mut idx: FxHashMap<u32, usize> = FxHashMap::default();
        let mut out: Vec<(u32, f64, u32)> = Vec::new();
        for &(t, j) in self.hits(history, group).iter() {
            let i = *idx.entry(t).or_insert_with(|| {
                out.push((t, 0.0, 0));
                out.len() - 1
            });
            out[i].1 += self.lambdas[j as usize];
            out[i].2 += 1;
        }
        out
    }

    #[inline]
    fn touched_log_score(&self, t: u32, acc: f64, fired: u32) -> f64 {
        self.cache.base[t as usize] + acc - self.slack_lambda() * fired as f64
    }

    /// `Z(h)` over the candidates of `group`.
    pub fn normalizer(&self, history: [u32; 2], group: u32) -> f64 {
        let mut z = self.cache.group_sum[group as usize];
        for (t, acc, fired) in self.touched(history, group) {
            z += self.touched_log_score(t, acc, fired).exp() - self.cache.unigram_score[t as usize];
        }
        z
    }

    /// `ln P(outcome | history)` within `group`; `-inf` outside it.
    pub fn log_prob(&self, history: [u32; 2], group: u32, outcome: u32) -> f64 {
        if !self.space.contains(group, outcome) {
            return f64::NEG_INFINITY;
        }
        let mut z = self.cache.group_sum[group as usize];
        let mut log_score = self.cache.base[outcome as usize];
        for (t, acc, fired) in self.touched(history, group) {
            let ls = self.touched_log_score(t, acc, fired);
            z += ls.exp() - self.cache.unigram_score[t as usize];
            if t == outcome {
                log_score = ls;
            }
        }
        log_score - z.ln()
    }

    pub fn prob(&self, history: [u32; 2], group: u32, outcome: u32) -> f64 {
        self.log_prob(history, group, outcome).exp()
    }

    /// Full conditional distribution over `group`, in candidate order.
    pub fn distribution(&self, history: [u32; 2], group: u32) -> Vec<(u32, f64)> {
        let cands = self.space.candidates(group);
        let mut scores: Vec<f64> = cands.iter().map(|&w| self.cache.unigram_score[w as usize]).collect();
        for (t, acc, fired) in self.touched(history, group) {
            scores[self.space.position[t as usize] as usize] = self.touched_log_score(t, acc, fired).exp();
        }
        let z: f64 = scores.iter().sum();
        cands.iter().zip(scores).map(|(&w, s)| (w, s / z)).collect()
    }

    /// Count-weighted firing totals over the training targets, slack last.
    pub fn empirical_counts(&self, events: &[TrainEvent]) -> Vec<f64> {
        let mut emp = vec![0.0; self.lambdas.len()];
        let slack = self.slack_index();
        for e in events {
            let active = self.features.active_features(e.history, e.target);
            let count = e.count as f64;
            for &j in &active {
                emp[j as usize] += count;
            }
            emp[slack] += count * (self.slack_constant as f64 - active.len() as f64);
        }
        emp
    }

    /// Writes the textual model file.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "candidate_space {}", self.space.descriptor())?;
        writeln!(out, "C {}", self.slack_constant)?;
        writeln!(out, "feature_count {}", self.features.len())?;
        writeln!(out, "iterations {}", self.iterations)?;
        for f in self.features.features() {
            write!(out, "{}\t{}", f.id, f.key.kind)?;
            for a in f.args() {
                write!(out, "\t{a}")?;
            }
            writeln!(out, "\t{:.16e}", self.lambdas[f.id as usize])?;
        }
        writeln!(out, "{}\tslack\t{:.16e}", self.slack_index(), self.slack_lambda())?;
        Ok(())
    }

    /// Reads a model file. Grouped spaces are not self-describing, so the
    /// caller passes the space for those; `indicator` is the history class
    /// map the features were built with.
    pub fn read<R: BufRead>(reader: R, indicator: Vec<u32>, grouped_space: Option<CandidateSpace>) -> Result<Self> {
        let src = "<model>";
        let mut lines = reader.lines().enumerate();
        let mut header = FxHashMap::default();
        for _ in 0..4 {
            let (i, line) = lines.next().ok_or_else(|| Error::parse(src, 0, "truncated header"))?;
            let line = line?;
            let (k, v) = line.split_once(' ').ok_or_else(|| Error::parse(src, i + 1, "expected `key value` header"))?;
            header.insert(k.to_string(), v.to_string());
        }
        let field = |k: &str| header.get(k).cloned().ok_or_else(|| Error::parse(src, 0, format!("missing {k}")));
        let num =
            |k: &str| -> Result<usize> { field(k)?.parse().map_err(|_| Error::parse(src, 0, format!("bad {k}"))) };
        let space_desc = field("candidate_space")?;
        let parts: Vec<&str> = space_desc.split_whitespace().collect();
        let space = match parts.as_slice() {
            ["all", n] => CandidateSpace::all(n.parse().map_err(|_| Error::parse(src, 1, "bad outcome count"))?),
            ["grouped", g, n] => {
                let space = grouped_space.ok_or_else(|| Error::parse(src, 1, "grouped model needs its hierarchy"))?;
                if g.parse::<usize>().ok() != Some(space.num_groups())
                    || n.parse::<usize>().ok() != Some(space.num_outcomes())
                {
                    return Err(Error::parse(src, 1, "candidate space does not match hierarchy"));
                }
                space
            }
            _ => return Err(Error::parse(src, 1, format!("bad candidate_space {space_desc:?}"))),
        };
        let slack_constant = num("C")? as u32;
        let count = num("feature_count")?;
        let iterations = num("iterations")?;

        let mut features = Vec::with_capacity(count);
        let mut lambdas = Vec::with_capacity(count + 1);
        for (i, line) in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |m: &str| Error::parse(src, i + 1, m.to_string());
            let id: usize = cols[0].parse().map_err(|_| bad("bad feature id"))?;
            let lambda: f64 = cols.last().unwrap().parse().map_err(|_| bad("bad weight"))?;
            if id != lambdas.len() {
                return Err(bad("feature ids out of order"));
            }
            if cols.get(1) == Some(&"slack") {
                if id != count {
                    return Err(bad("slack must follow all features"));
                }
                lambdas.push(lambda);
                continue;
            }
            let kind: TemplateKind = cols.get(1).ok_or_else(|| bad("missing kind"))?.parse()?;
            let args: Vec<u32> = cols[2..cols.len() - 1]
                .iter()
                .map(|a| a.parse().map_err(|_| bad("bad argument")))
                .collect::<Result<_>>()?;
            if args.len() != kind.arity() {
                return Err(bad("argument count does not match kind"));
            }
            let key = FeatureKey {
                kind,
                target: args[0],
                z: args.get(1).copied().unwrap_or(UNBOUND),
                y: args.get(2).copied().unwrap_or(UNBOUND),
            };
            features.push(Feature { id: id as u32, key, train_count: 0 });
            lambdas.push(lambda);
        }
        if features.len() != count || lambdas.len() != count + 1 {
            return Err(Error::parse(src, 0, "feature count does not match header"));
        }
        let num_outcomes = space.num_outcomes();
        let set = FeatureSet::from_features(features, indicator, num_outcomes)?;
        let mut model = Self::with_slack_constant(set, space, slack_constant)?;
        model.set_lambdas(lambdas)?;
        model.iterations = iterations;
        Ok(model)
    }
}

fn max_firing(features: &FeatureSet, space: &CandidateSpace, events: &[TrainEvent]) -> Result<u32> {
    let group_has_unigram: Vec<u32> =
        space.groups.iter().map(|g| g.iter().any(|&w| features.unigram(w).is_some()) as u32).collect();
    let mut fired: FxHashMap<u32, u32> = FxHashMap::default();
    let mut best = 0;
    for e in events {
        check_event(space, e)?;
        fired.clear();
        for &(t, _) in features.context_hits(e.history).iter() {
            if space.contains(e.group, t) {
                *fired.entry(t).or_default() += 1;
            }
        }
        best = best.max(group_has_unigram[e.group as usize]);
        for (&t, &n) in &fired {
            best = best.max(n + features.unigram(t).is_some() as u32);
        }
    }
    Ok(best)
}

fn check_event(space: &CandidateSpace, e: &TrainEvent) -> Result<()> {
    if e.group as usize >= space.num_groups() || e.target as usize >= space.num_outcomes() {
        return Err(Error::invalid(format!("event {e:?} outside the candidate space")));
    }
    if !space.contains(e.group, e.target) {
        return Err(Error::invalid(format!("event target {} not in its group {}", e.target, e.group)));
    }
    if e.count == 0 {
        return Err(Error::invalid("event count must be positive"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    Plain,
    UnigramCached,
}

/// Totals accumulated by one expectation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PassStats {
    /// Model expectation per feature, slack last.
    pub expected: Vec<f64>,
    /// `sum count * ln P(target | history)`.
    pub loglike: f64,
    /// Candidate evaluations performed.
    pub ops: u64,
}

impl PassStats {
    fn zeros(n: usize) -> Self {
        PassStats { expected: vec![0.0; n], loglike: 0.0, ops: 0 }
    }

    fn absorb(&mut self, other: PassStats) {
        for (a, b) in self.expected.iter_mut().zip(other.expected) {
            *a += b;
        }
        self.loglike += other.loglike;
        self.ops += other.ops;
    }
}

/// Dense per-worker scratch for contextual weights of one history.
struct Scratch {
    acc: Vec<f64>,
    fired: Vec<u32>,
    touched: Vec<u32>,
    scores: Vec<f64>,
}

impl Scratch {
    fn new(model: &MaxEntModel) -> Self {
        let n = model.space.num_outcomes();
        let widest = model.space.groups.iter().map(Vec::len).max().unwrap_or(0);
        Scratch { acc: vec![0.0; n], fired: vec![0; n], touched: Vec::new(), scores: vec![0.0; widest] }
    }

    fn load(&mut self, model: &MaxEntModel, history: [u32; 2], group: u32) {
        for &(t, j) in model.hits(history, group).iter() {
            let ti = t as usize;
            if self.fired[ti] == 0 {
                self.touched.push(t);
            }
            self.acc[ti] += model.lambdas[j as usize];
            self.fired[ti] += 1;
        }
    }

    fn clear(&mut self) {
        for &t in &self.touched {
            self.acc[t as usize] = 0.0;
            self.fired[t as usize] = 0;
        }
        self.touched.clear();
    }
}

fn shards(events: &[TrainEvent], threads: usize) -> Vec<&[TrainEvent]> {
    let n = threads.max(1);
    let size = events.len().div_ceil(n).max(1);
    events.chunks(size).collect()
}

fn merge(model: &MaxEntModel, parts: Vec<PassStats>) -> PassStats {
    let mut total = PassStats::zeros(model.lambdas.len());
    for p in parts {
        total.absorb(p);
    }
    total
}

/// Plain expectation pass: every candidate of every event is scored.
/// Events are split into `threads` contiguous shards merged in order.
pub fn expectation_pass(model: &MaxEntModel, events: &[TrainEvent], threads: usize) -> PassStats {
    let parts = shards(events, threads).into_par_iter().map(|shard| plain_shard(model, shard)).collect();
    merge(model, parts)
}

fn plain_shard(model: &MaxEntModel, events: &[TrainEvent]) -> PassStats {
    let mut out = PassStats::zeros(model.lambdas.len());
    let mut s = Scratch::new(model);
    let c = model.slack_constant as f64;
    let ls = model.slack_lambda();
    let slack = model.slack_index();
    let base = &model.cache.base;
    for e in events {
        s.load(model, e.history, e.group);
        let cands = model.space.candidates(e.group);
        let scores = &mut s.scores[..cands.len()];
        let mut z = 0.0;
        for (score, &w) in scores.iter_mut().zip(cands) {
            let wi = w as usize;
            *score = (base[wi] + s.acc[wi] - ls * s.fired[wi] as f64).exp();
            z += *score;
        }
        let weight = e.count as f64 / z;
        let mut slack_mass = 0.0;
        for (&score, &w) in scores.iter().zip(cands) {
            let p = score * weight;
            if let Some(j) = model.features.unigram(w) {
                out.expected[j as usize] += p;
            }
            let fired = model.has_unigram[w as usize] as u32 + s.fired[w as usize];
            slack_mass += p * (c - fired as f64);
        }
        out.expected[slack] += slack_mass;
        for &(t, j) in model.hits(e.history, e.group).iter() {
            out.expected[j as usize] += scores[model.space.position[t as usize] as usize] * weight;
        }
        let target_score = scores[model.space.position[e.target as usize] as usize];
        out.loglike += e.count as f64 * (target_score.ln() - z.ln());
        out.ops += cands.len() as u64;
        s.clear();
    }
    out
}

/// Unigram-cached expectation pass: the context-free part of every score is
/// computed once per iteration and candidates without a contextual feature
/// are handled in bulk.
pub fn expectation_pass_cached(model: &MaxEntModel, events: &[TrainEvent], threads: usize) -> PassStats {
    let parts: Vec<(PassStats, Vec<f64>)> =
        shards(events, threads).into_par_iter().map(|shard| cached_shard(model, shard)).collect();
    let mut bulk_weight = vec![0.0; model.space.num_groups()];
    let mut stats = Vec::with_capacity(parts.len());
    for (p, bw) in parts {
        for (a, b) in bulk_weight.iter_mut().zip(bw) {
            *a += b;
        }
        stats.push(p);
    }
    let mut total = merge(model, stats);
    let c = model.slack_constant as f64;
    let slack = model.slack_index();
    let mut slack_mass = 0.0;
    for (g, members) in model.space.groups.iter().enumerate() {
        let weight = bulk_weight[g];
        if weight == 0.0 {
            continue;
        }
        for &w in members {
            let p = weight * model.cache.unigram_score[w as usize];
            if let Some(j) = model.features.unigram(w) {
                total.expected[j as usize] += p;
            }
            slack_mass += p * (c - model.has_unigram[w as usize] as f64);
        }
    }
    total.expected[slack] += slack_mass;
    total
}

fn cached_shard(model: &MaxEntModel, events: &[TrainEvent]) -> (PassStats, Vec<f64>) {
    let mut out = PassStats::zeros(model.lambdas.len());
    let mut bulk_weight = vec![0.0; model.space.num_groups()];
    let mut s = Scratch::new(model);
    let c = model.slack_constant as f64;
    let ls = model.slack_lambda();
    let slack = model.slack_index();
    let cache = &model.cache;
    for e in events {
        s.load(model, e.history, e.group);
        let mut z = cache.group_sum[e.group as usize];
        for (i, &t) in s.touched.iter().enumerate() {
            let ti = t as usize;
            let score = (cache.base[ti] + s.acc[ti] - ls * s.fired[ti] as f64).exp();
            s.scores[i] = score;
            z += score - cache.unigram_score[ti];
        }
        let weight = e.count as f64 / z;
        bulk_weight[e.group as usize] += weight;
        let mut target_score = cache.unigram_score[e.target as usize];
        for (i, &t) in s.touched.iter().enumerate() {
            let ti = t as usize;
            let (score, plain) = (s.scores[i], cache.unigram_score[ti]);
            if let Some(j) = model.features.unigram(t) {
                out.expected[j as usize] += weight * (score - plain);
            }
            let uni = model.has_unigram[ti] as f64;
            out.expected[slack] += weight * (score * (c - uni - s.fired[ti] as f64) - plain * (c - uni));
            // reuse the slot to map outcome -> score for the hit loop below
            s.acc[ti] = score;
            if t == e.target {
                target_score = score;
            }
        }
        for &(t, j) in model.hits(e.history, e.group).iter() {
            out.expected[j as usize] += s.acc[t as usize] * weight;
        }
        out.loglike += e.count as f64 * (target_score.ln() - z.ln());
        out.ops += s.touched.len() as u64;
        s.clear();
    }
    (out, bulk_weight)
}

/// Running totals of one training run.
#[derive(Debug, Clone)]
pub struct TrainerState {
    pub empirical: Vec<f64>,
    pub expected: Vec<f64>,
    pub iteration: usize,
    pub train_loglike: f64,
    pub op_counter: u64,
}

impl TrainerState {
    pub fn new(model: &MaxEntModel, events: &[TrainEvent]) -> Self {
        TrainerState {
            empirical: model.empirical_counts(events),
            expected: vec![0.0; model.lambdas.len()],
            iteration: 0,
            train_loglike: f64::NEG_INFINITY,
            op_counter: 0,
        }
    }

    pub fn record(&mut self, pass: PassStats) {
        self.expected = pass.expected;
        self.train_loglike = pass.loglike;
        self.op_counter += pass.ops;
        self.iteration += 1;
    }

    /// `max_j |empirical_j / expected_j - 1|` over constraints with data.
    pub fn max_deviation(&self) -> f64 {
        self.empirical
            .iter()
            .zip(&self.expected)
            .filter(|(e, _)| **e > 0.0)
            .map(|(e, x)| if *x > 0.0 { (e / x - 1.0).abs() } else { f64::INFINITY })
            .fold(0.0, f64::max)
    }

    /// `max_j |expected_j / empirical_j - 1|`.
    pub fn max_expectation_error(&self) -> f64 {
        self.empirical
            .iter()
            .zip(&self.expected)
            .filter(|(e, _)| **e > 0.0)
            .map(|(e, x)| (x / e - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// One GIS step from the expectations in `state`. A constraint with no
/// empirical mass (only possible for slack) keeps its weight.
pub fn update_lambdas(state: &TrainerState, model: &mut MaxEntModel) -> Result<()> {
    let inv_c = 1.0 / model.slack_constant as f64;
    let mut next = model.lambdas.clone();
    for (j, l) in next.iter_mut().enumerate() {
        let (emp, exp) = (state.empirical[j], state.expected[j]);
        if emp <= 0.0 {
            continue;
        }
        if exp <= 0.0 {
            return Err(Error::invariant(format!("feature {j} has empirical count {emp} but zero model expectation")));
        }
        *l += inv_c * (emp / exp).ln();
    }
    model.set_lambdas(next)?;
    model.iterations += 1;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GisConfig {
    pub iterations: usize,
    pub tolerance: f64,
    pub threads: usize,
    pub variant: Variant,
}

impl Default for GisConfig {
    fn default() -> Self {
        GisConfig { iterations: DEFAULT_ITERATIONS, tolerance: DEFAULT_TOLERANCE, threads: 1, variant: Variant::Plain }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    /// Training log-likelihood under the weights entering this iteration.
    pub loglike: f64,
    pub ops: u64,
    pub seconds: f64,
    pub max_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub log: Vec<IterationLog>,
    pub converged: bool,
    pub state: TrainerState,
}

impl TrainReport {
    pub fn total_ops(&self) -> u64 {
        self.state.op_counter
    }
}

/// Runs GIS until `max_j |empirical_j / expected_j - 1| <= tolerance` or the
/// iteration cap is hit.
pub fn train(model: &mut MaxEntModel, events: &[TrainEvent], cfg: &GisConfig) -> Result<TrainReport> {
    if cfg.iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    for e in events {
        check_event(&model.space, e)?;
    }
    let mut state = TrainerState::new(model, events);
    let mut log = Vec::new();
    let mut converged = false;
    for it in 1..=cfg.iterations {
        let start = Instant::now();
        let pass = match cfg.variant {
            Variant::Plain => expectation_pass(model, events, cfg.threads),
            Variant::UnigramCached => expectation_pass_cached(model, events, cfg.threads),
        };
        let ops = pass.ops;
        state.record(pass);
        if !state.train_loglike.is_finite() {
            return Err(Error::NonFinite { iteration: it });
        }
        let dev = state.max_deviation();
        converged = dev <= cfg.tolerance;
        if !converged {
            update_lambdas(&state, model)?;
        }
        let entry = IterationLog {
            iteration: it,
            loglike: state.train_loglike,
            ops,
            seconds: start.elapsed().as_secs_f64(),
            max_deviation: dev,
        };
        log::debug!("iteration {it}: loglike {:.6} ops {ops} max deviation {dev:.3e}", entry.loglike);
        log.push(entry);
        if converged {
            break;
        }
    }
    Ok(TrainReport { log, converged, state })
}

/// GIS with the unigram-cached expectation pass.
pub fn train_unigram_cached(model: &mut MaxEntModel, events: &[TrainEvent], cfg: &GisConfig) -> Result<TrainReport> {
    train(model, events, &GisConfig { variant: Variant::UnigramCached, ..*cfg })
}
